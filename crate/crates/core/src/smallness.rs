//! Smallness constants, thin covers, leftover covers and separations with
//! small boundaries.
//!
//! Finite point sets on rotations are decided exactly: two points lie on a
//! common orbit iff their difference is in `ℤθ + ℤ`, and the smallness
//! constant of a finite set is the size of its largest orbit class.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::plfun::{bump, min_cascade, PlFunction};
use crate::regions::arcs::{circle_dist, mod1, ArcSet};
use crate::regions::boxes::BoxSet;
use crate::regions::{inner_radius, outer_radius, Region};
use crate::scalar::Scalar;
use crate::systems::{CircleRotation, Point, System, TorusRotation};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Proven,
    BoundedSearch { depth: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SmallnessCertificate {
    /// Least `m` such that any `m + 1` distinct translates have empty
    /// intersection (an upper bound when the verdict is a bounded search).
    pub constant: u64,
    pub verdict: Verdict,
    /// Distinct integers whose translates share a point; `constant` of them
    /// when the lower bound is witnessed.
    pub witness: Vec<i64>,
    /// Per-axis constants for boundaries of boxes on a torus.
    pub axis_constants: Vec<u64>,
}

impl SmallnessCertificate {
    fn proven(constant: u64, witness: Vec<i64>) -> SmallnessCertificate {
        SmallnessCertificate { constant, verdict: Verdict::Proven, witness, axis_constants: Vec::new() }
    }
}

/// `card {d_i + n_j}`.
pub fn distinct_sums_card(d: &[i64], n: (i64, i64)) -> Result<usize> {
    let mut seen = HashSet::new();
    if n.0 == n.1 || !d.iter().all(|x| seen.insert(*x)) {
        return Err(Error::DuplicateInput);
    }
    let sums: HashSet<i64> = d.iter().flat_map(|x| [x + n.0, x + n.1]).collect();
    Ok(sums.len())
}

/// Orbit representative of `x` under a rotation: `x = rep + e·θ (mod 1)`
/// where the √D-part of `rep` lies in a fixed fundamental interval.
pub(crate) fn orbit_key(rot: &CircleRotation, x: &Scalar) -> ((BigRational, BigRational), i64) {
    let (alpha, beta) = rot.theta().parts();
    let (u, v) = x.parts();
    let e = (&v / &beta).floor().to_integer();
    let ebr = BigRational::from_integer(e.clone());
    let v_rep = &v - &ebr * &beta;
    let u_rep = &u - &ebr * &alpha;
    let u_rep = &u_rep - u_rep.floor();
    let e: i64 = i64::try_from(&e).expect("orbit exponent fits i64");
    ((u_rep, v_rep), e)
}

fn check_field(rot_d: u64, x: &Scalar) -> Result<()> {
    if !x.is_rational() && x.radicand() != rot_d {
        return Err(Error::InvalidInput("point lies outside the rotation's quadratic field".into()));
    }
    Ok(())
}

fn circle_classes(rot: &CircleRotation, pts: &[Scalar]) -> Result<Vec<Vec<i64>>> {
    let mut classes: HashMap<(BigRational, BigRational), Vec<i64>> = HashMap::new();
    let mut order = Vec::new();
    for x in pts {
        check_field(rot.radicand(), x)?;
        let (key, e) = orbit_key(rot, &mod1(x));
        if !classes.contains_key(&key) {
            order.push(key.clone());
        }
        classes.entry(key).or_default().push(e);
    }
    Ok(order.into_iter().map(|k| classes.remove(&k).unwrap()).collect())
}

fn largest_class(classes: Vec<Vec<i64>>) -> SmallnessCertificate {
    match classes.into_iter().max_by_key(|c| c.len()) {
        None => SmallnessCertificate::proven(0, Vec::new()),
        Some(c) => {
            let mut witness: Vec<i64> = c.iter().map(|e| -e).collect();
            witness.sort_unstable();
            SmallnessCertificate::proven(c.len() as u64, witness)
        }
    }
}

/// Exact smallness constant of a finite point set.
pub fn smallness_of_points(system: &System, pts: &[Point]) -> Result<SmallnessCertificate> {
    let mut uniq = pts.to_vec();
    uniq.sort_by_key(|p| format!("{:?}", p));
    uniq.dedup();
    match system {
        System::Rotation(rot) => {
            let xs = uniq
                .iter()
                .map(|p| match p {
                    Point::Circle(x) => Ok(mod1(x)),
                    _ => Err(Error::MixedAmbient),
                })
                .collect::<Result<Vec<_>>>()?;
            let mut xs = xs;
            xs.sort();
            xs.dedup();
            Ok(largest_class(circle_classes(rot, &xs)?))
        }
        System::Torus(t) => {
            let mut classes: HashMap<Vec<(BigRational, BigRational)>, Vec<i64>> = HashMap::new();
            let mut order = Vec::new();
            for p in &uniq {
                let xs = match p {
                    Point::Torus(xs) if xs.len() == t.dims() => xs,
                    _ => return Err(Error::MixedAmbient),
                };
                let mut key = Vec::new();
                let mut es = Vec::new();
                for (i, x) in xs.iter().enumerate() {
                    let axis = t.axis(i);
                    check_field(axis.radicand(), x)?;
                    let (k, e) = orbit_key(&axis, &mod1(x));
                    key.push(k);
                    es.push(e);
                }
                let rel: Vec<i64> = es.iter().map(|e| e - es[0]).collect();
                let mut full_key = key;
                for r in rel {
                    full_key.push((BigRational::from_integer(BigInt::from(r)), BigRational::zero()));
                }
                if !classes.contains_key(&full_key) {
                    order.push(full_key.clone());
                }
                classes.entry(full_key).or_default().push(es[0]);
            }
            Ok(largest_class(order.into_iter().map(|k| classes.remove(&k).unwrap()).collect()))
        }
        System::Odometer(o) => {
            // finite words are read as sequences ending in zeros, all on the orbit of 0
            let mut idx = Vec::new();
            for p in &uniq {
                match p {
                    Point::Odometer(w) if w.len() == o.level() && w.iter().zip(o.bases()).all(|(d, b)| d < b) => {
                        idx.push(o.index_of(w) as i64)
                    }
                    _ => return Err(Error::MixedAmbient),
                }
            }
            idx.sort_unstable();
            Ok(largest_class(if idx.is_empty() { Vec::new() } else { vec![idx] }))
        }
    }
}

/// Smallness constant of a finite point region (circle points or torus
/// point cells).
pub fn smallness_constant(system: &System, f: &Region, _search_depth: u64) -> Result<SmallnessCertificate> {
    if !f.fits(system) {
        return Err(Error::MixedAmbient);
    }
    match f {
        Region::Arcs(a) => {
            let pts = finite_points(a)?;
            smallness_of_points(system, &pts.into_iter().map(Point::Circle).collect::<Vec<_>>())
        }
        Region::Boxes(b) => {
            let mut pts = Vec::new();
            for cell in b.cell_sets() {
                let mut coords = Vec::new();
                for factor in cell {
                    let c = factor.components();
                    if c.len() != 1 || !c[0].is_point() {
                        return Err(Error::InvalidInput("not a finite point set".into()));
                    }
                    coords.push(c[0].lo.clone());
                }
                pts.push(Point::Torus(coords));
            }
            smallness_of_points(system, &pts)
        }
        Region::Cylinders(c) => {
            if c.is_empty() {
                Ok(SmallnessCertificate::proven(0, Vec::new()))
            } else {
                Err(Error::Unsupported("cylinder sets are open, not finite point sets"))
            }
        }
    }
}

pub(crate) fn finite_points(a: &ArcSet) -> Result<Vec<Scalar>> {
    let comps = a.components();
    if comps.iter().any(|c| !c.is_point()) {
        return Err(Error::InvalidInput("not a finite point set".into()));
    }
    Ok(comps.into_iter().map(|c| c.lo).collect())
}

/// Smallness of a union, by adding the constants.
pub fn union_smallness_bound(certs: &[SmallnessCertificate]) -> Result<u64> {
    if certs.iter().any(|c| c.verdict != Verdict::Proven) {
        return Err(Error::UnprovenInput);
    }
    Ok(certs.iter().map(|c| c.constant).sum())
}

/// Independent check of a certificate for a finite circle set: the witness
/// translates must meet, and orbit classes found by pairwise difference
/// tests must not exceed the constant.
pub fn verify_circle_smallness(rot: &CircleRotation, pts: &[Scalar], cert: &SmallnessCertificate) -> bool {
    let set = ArcSet::points(pts);
    if cert.witness.len() as u64 != cert.constant {
        return false;
    }
    let mut seen = HashSet::new();
    if !cert.witness.iter().all(|d| seen.insert(*d)) {
        return false;
    }
    if !cert.witness.is_empty() {
        let mut common = ArcSet::full();
        for &d in &cert.witness {
            common = common.intersect(&set.translate(&rot.shift(d)));
        }
        if common.is_empty() {
            return false;
        }
    }
    let pts = finite_points(&set).unwrap_or_default();
    let n = pts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in 0..i {
            if same_orbit(rot, &pts[i], &pts[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut sizes: HashMap<usize, u64> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        *sizes.entry(r).or_default() += 1;
    }
    sizes.values().copied().max().unwrap_or(0) <= cert.constant
}

/// `x - y ∈ ℤθ + ℤ`, decided coefficient-wise.
pub fn same_orbit(rot: &CircleRotation, x: &Scalar, y: &Scalar) -> bool {
    let (alpha, beta) = rot.theta().parts();
    let (u, v) = (x - y).parts();
    let k = &v / &beta;
    if !k.is_integer() {
        return false;
    }
    (&u - &k * &alpha).is_integer()
}

// ---------------------------------------------------------------------------
// Thin covers

/// Finite set `F` moved into an open target by shifts `d_j`: each source
/// `x_j` lands at `y_j = x_j + d_j θ`, and arcs of radius `radius` around the
/// landings are pairwise disjoint and inside the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Landing {
    pub sources: Vec<Scalar>,
    pub shifts: Vec<i64>,
    pub targets: Vec<Scalar>,
    pub radius: Scalar,
}

fn dyadic_below(bound: &Scalar) -> Scalar {
    assert!(bound.is_positive());
    let mut r = Scalar::rational(1, 4);
    while r > *bound {
        r = r.div_i64(2);
    }
    r
}

fn min_cyclic_gap(sorted: &[Scalar]) -> Option<Scalar> {
    if sorted.len() < 2 {
        return None;
    }
    let n = sorted.len();
    (0..n).map(|i| mod1(&(&sorted[(i + 1) % n] - &sorted[i]))).min()
}

fn dist_to_boundary(sorted_bd: &[Scalar], y: &Scalar) -> Option<Scalar> {
    if sorted_bd.is_empty() {
        return None;
    }
    let i = sorted_bd.partition_point(|b| b < y);
    let n = sorted_bd.len();
    let a = &sorted_bd[i % n];
    let b = &sorted_bd[(i + n - 1) % n];
    Some(circle_dist(a, y).min(circle_dist(b, y)))
}

/// Moves every point of `pts` into `target` by integer shifts whose
/// landings are pairwise distinct, then picks a dyadic radius below half the
/// landing and source separations, the distance of landings to the target
/// boundary and `eps/(4·card F)`.
///
/// Points on a common orbit form a class `x_0 + eθ`; the landing slots of a
/// class are the exponents `m` with `x_0 + mθ` in the target. Exponents are
/// matched to a run of consecutive slots centred on the class median, so a
/// single point gets the nearest slot (ties go to the positive shift).
pub fn land_points(rot: &CircleRotation, pts: &[Scalar], target: &ArcSet, eps: Option<&Scalar>, depth: u64) -> Result<Landing> {
    let mut sources: Vec<Scalar> = pts.iter().map(mod1).collect();
    sources.sort();
    sources.dedup();
    if sources.is_empty() {
        return Ok(Landing { sources, shifts: Vec::new(), targets: Vec::new(), radius: Scalar::rational(1, 4) });
    }
    let tin = target.interior();
    if tin.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut classes: HashMap<(BigRational, BigRational), Vec<(i64, usize)>> = HashMap::new();
    let mut order = Vec::new();
    for (i, x) in sources.iter().enumerate() {
        check_field(rot.radicand(), x)?;
        let (key, e) = orbit_key(rot, x);
        if !classes.contains_key(&key) {
            order.push(key.clone());
        }
        classes.entry(key).or_default().push((e, i));
    }
    let slotter = Slotter::new(rot, &tin);
    let mut shifts = vec![0i64; sources.len()];
    let mut targets = vec![Scalar::zero(); sources.len()];
    for key in order {
        let mut members = classes.remove(&key).unwrap();
        members.sort_unstable();
        let (e0, i0) = members[0];
        let x0 = &sources[i0];
        let (lo, hi) = (members[0].0, members[members.len() - 1].0);
        let mut reach: u64 = 64.min(depth.max(1));
        let slots = loop {
            let slots = slotter.slots(x0, lo - e0 - reach as i64, hi - e0 + reach as i64);
            if slots.len() >= members.len() {
                break slots;
            }
            if reach >= depth {
                return Err(Error::SearchExhausted(depth));
            }
            reach = (reach * 2).min(depth);
        };
        // slots are offsets from e0; centre the run on the median member
        let mid = members.len() / 2;
        let want = members[mid].0 - e0;
        let nearest = slots.partition_point(|&m| m < want);
        let nearest = match (nearest.checked_sub(1), slots.get(nearest)) {
            (Some(p), Some(&n)) if want - slots[p] < n - want => p,
            (Some(p), None) => p,
            _ => nearest,
        };
        let start = nearest.saturating_sub(mid).min(slots.len() - members.len());
        for (slot, &(e, i)) in slots[start..start + members.len()].iter().zip(&members) {
            let d = slot - (e - e0);
            shifts[i] = d;
            targets[i] = mod1(&(&sources[i] + &rot.shift(d)));
            debug_assert!(tin.contains(&targets[i]));
        }
    }
    let mut bound = Scalar::rational(1, 4);
    let mut sorted_t = targets.clone();
    sorted_t.sort();
    if let Some(g) = min_cyclic_gap(&sorted_t) {
        bound = bound.min(g.div_i64(2));
    }
    if let Some(g) = min_cyclic_gap(&sources) {
        bound = bound.min(g.div_i64(2));
    }
    let mut bd = tin.boundary_points();
    bd.sort();
    for y in &targets {
        if let Some(dist) = dist_to_boundary(&bd, y) {
            bound = bound.min(dist);
        }
    }
    if let Some(e) = eps {
        bound = bound.min(e.div_i64(4 * sources.len() as i64));
    }
    Ok(Landing { sources, shifts, targets, radius: dyadic_below(&bound) })
}

/// Finds the offsets `m` in a range with `x + mθ` inside an open set,
/// deciding by floating point away from the boundary and exactly near it.
struct Slotter<'a> {
    rot: &'a CircleRotation,
    set: &'a ArcSet,
    theta: f64,
    pieces: Vec<(f64, f64)>,
}

const SLOT_MARGIN: f64 = 1e-6;

impl<'a> Slotter<'a> {
    fn new(rot: &'a CircleRotation, set: &'a ArcSet) -> Slotter<'a> {
        let pieces = set
            .pieces()
            .iter()
            .map(|a| (a.lo.to_f64(), a.hi.to_f64()))
            .collect();
        Slotter { rot, set, theta: rot.theta().to_f64(), pieces }
    }

    fn slots(&self, x: &Scalar, from: i64, to: i64) -> Vec<i64> {
        let xf = x.to_f64();
        let mut out = Vec::new();
        for m in from..=to {
            let y = (xf + m as f64 * self.theta).rem_euclid(1.0);
            let mut verdict = Some(false);
            for &(lo, hi) in &self.pieces {
                if y > lo + SLOT_MARGIN && y < hi - SLOT_MARGIN {
                    verdict = Some(true);
                    break;
                }
                if (y - lo).abs() <= SLOT_MARGIN || (y - hi).abs() <= SLOT_MARGIN {
                    verdict = None;
                }
            }
            // the circle seam needs an exact look too
            if y <= SLOT_MARGIN || y >= 1.0 - SLOT_MARGIN {
                verdict = None;
            }
            let inside = match verdict {
                Some(v) => v,
                None => self.set.contains(&mod1(&(x + &self.rot.shift(m)))),
            };
            if inside {
                out.push(m);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThinCover {
    pub opens: Vec<ArcSet>,
    pub shifts: Vec<i64>,
    /// Open `V ⊇ F` whose closure is covered by the same opens.
    pub nbhd: ArcSet,
}

fn point_set_of(system: &System, f: &Region) -> Result<(CircleRotation, Vec<Scalar>)> {
    let rot = system.as_rotation()?.clone();
    if !f.fits(system) {
        return Err(Error::MixedAmbient);
    }
    Ok((rot, finite_points(f.as_arcs()?)?))
}

pub fn thin_cover(system: &System, f: &Region, u: &Region, depth: u64) -> Result<ThinCover> {
    let (rot, pts) = point_set_of(system, f)?;
    let l = land_points(&rot, &pts, u.as_arcs()?, None, depth)?;
    let r = &l.radius;
    let half = r.div_i64(2);
    let opens = l.sources.iter().map(|x| ArcSet::open_arc(&(x - r), &(x + r))).collect();
    let nbhd = ArcSet::union_all(l.sources.iter().map(|x| ArcSet::open_arc(&(x - &half), &(x + &half))).collect());
    Ok(ThinCover { opens, shifts: l.shifts, nbhd })
}

pub fn closed_thin_cover(system: &System, f: &Region, u: &Region, depth: u64) -> Result<Vec<(ArcSet, i64)>> {
    let (rot, pts) = point_set_of(system, f)?;
    let l = land_points(&rot, &pts, u.as_arcs()?, None, depth)?;
    let half = l.radius.div_i64(2);
    Ok(l.sources.iter().zip(&l.shifts).map(|(x, d)| (ArcSet::closed_arc(&(x - &half), &(x + &half)), *d)).collect())
}

/// Independent check of a thin cover using region algebra only.
pub fn verify_thin_cover(rot: &CircleRotation, f: &ArcSet, u: &ArcSet, cover: &ThinCover) -> bool {
    if cover.opens.len() != cover.shifts.len() {
        return false;
    }
    let union = ArcSet::union_all(cover.opens.clone());
    if !f.is_subset(&union) || !cover.nbhd.closure().is_subset(&union) || !f.is_subset(&cover.nbhd) {
        return false;
    }
    let images: Vec<ArcSet> = cover.opens.iter().zip(&cover.shifts).map(|(o, d)| o.translate(&rot.shift(*d))).collect();
    if !images.iter().all(|i| i.is_open() && i.is_subset(u)) {
        return false;
    }
    // open sets are pairwise disjoint iff measure is additive on them
    let total = images.iter().fold(Scalar::zero(), |acc, i| acc + i.measure());
    ArcSet::union_all(images).measure() == total
}

/// Independent check of a closed thin cover.
pub fn verify_closed_thin_cover(rot: &CircleRotation, f: &ArcSet, u: &ArcSet, cover: &[(ArcSet, i64)]) -> bool {
    let union = ArcSet::union_all(cover.iter().map(|c| c.0.clone()).collect());
    if !f.is_subset(&union) || !cover.iter().all(|c| c.0.is_closed()) {
        return false;
    }
    let images: Vec<ArcSet> = cover.iter().map(|(s, d)| s.translate(&rot.shift(*d))).collect();
    if !images.iter().all(|i| i.is_subset(u)) {
        return false;
    }
    for i in 0..images.len() {
        for j in 0..i {
            if !images[i].is_disjoint(&images[j]) {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Leftover covers

/// Cover of a finite set by closed arcs `F_j` around the sources whose
/// translates by `d_j` sit inside nested open arcs `T_j ⊂ V_j ⊂ W_j` around
/// the landings, all inside the target. Radii relative to the landing
/// radius `ρ`: `W = ρ`, `V = 3ρ/4`, `T = ρ/2`, `F = ρ/4` (closed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftoverCover {
    pub landing: Landing,
    pub epsilon: Scalar,
}

impl LeftoverCover {
    pub fn len(&self) -> usize {
        self.landing.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landing.sources.is_empty()
    }

    fn around(&self, x: &Scalar, num: i64, closed: bool) -> ArcSet {
        let r = self.landing.radius.mul_i64(num).div_i64(4);
        ArcSet::arc(&(x - &r), &(x + &r), closed, closed)
    }

    pub fn shift(&self, j: usize) -> i64 {
        self.landing.shifts[j]
    }

    pub fn f_set(&self, j: usize) -> ArcSet {
        self.around(&self.landing.sources[j], 1, true)
    }

    pub fn t_set(&self, j: usize) -> ArcSet {
        self.around(&self.landing.targets[j], 2, false)
    }

    pub fn v_set(&self, j: usize) -> ArcSet {
        self.around(&self.landing.targets[j], 3, false)
    }

    pub fn w_set(&self, j: usize) -> ArcSet {
        self.around(&self.landing.targets[j], 4, false)
    }

    /// Bump near the source equal to 1 on the pullback of `V̄_j` and
    /// supported in the pullback of `W_j`.
    pub fn bump_at(&self, j: usize) -> PlFunction {
        let x = &self.landing.sources[j];
        bump(&self.around(x, 3, true), &self.around(x, 4, false)).expect("nested arcs leave a gap")
    }

    /// The partition functions, normalised by the min-cascade.
    pub fn functions(&self) -> Vec<PlFunction> {
        min_cascade(&(0..self.len()).map(|j| self.bump_at(j)).collect::<Vec<_>>())
    }
}

pub fn leftover_cover(system: &System, f: &Region, u: &Region, eps: &Scalar) -> Result<LeftoverCover> {
    leftover_cover_with_depth(system, f, u, eps, DEFAULT_SEARCH_DEPTH)
}

pub const DEFAULT_SEARCH_DEPTH: u64 = 1_000_000;

pub fn leftover_cover_with_depth(system: &System, f: &Region, u: &Region, eps: &Scalar, depth: u64) -> Result<LeftoverCover> {
    if !eps.is_positive() {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let (rot, pts) = point_set_of(system, f)?;
    let landing = land_points(&rot, &pts, u.as_arcs()?, Some(eps), depth)?;
    Ok(LeftoverCover { landing, epsilon: eps.clone() })
}

/// Clause-by-clause check of a leftover cover, from region algebra and exact
/// extrema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftoverReport {
    pub covers: bool,
    pub nested: bool,
    pub sums_to_one: bool,
    pub supports: bool,
    pub disjoint_small: bool,
}

impl LeftoverReport {
    pub fn ok(&self) -> bool {
        self.covers && self.nested && self.sums_to_one && self.supports && self.disjoint_small
    }
}

pub fn verify_leftover_cover(rot: &CircleRotation, f: &ArcSet, u: &ArcSet, cover: &LeftoverCover) -> LeftoverReport {
    let n = cover.len();
    let fs: Vec<ArcSet> = (0..n).map(|j| cover.f_set(j)).collect();
    let covers = f.is_subset(&ArcSet::union_all(fs.clone()));
    let mut nested = true;
    let mut supports = true;
    let funcs = cover.functions();
    let mut pulled_v = Vec::with_capacity(n);
    for j in 0..n {
        let s = rot.shift(cover.shift(j));
        let (t, v, w) = (cover.t_set(j), cover.v_set(j), cover.w_set(j));
        nested &= fs[j].is_closed()
            && fs[j].translate(&s).is_subset(&t)
            && t.is_open()
            && t.closure().is_subset(&v)
            && v.is_open()
            && v.closure().is_subset(&w)
            && w.is_open()
            && w.is_subset(u);
        let g = &funcs[j];
        supports &= g.within_unit_range() && g.support().translate(&s).is_subset(&w);
        pulled_v.push(v.closure().translate(&-s));
    }
    let region = ArcSet::union_all(pulled_v);
    let sums_to_one = match crate::plfun::sum_extrema_on(&funcs, &region) {
        None => true,
        Some(e) => e.min == Scalar::one() && e.max == Scalar::one(),
    };
    let ws: Vec<ArcSet> = (0..n).map(|j| cover.w_set(j)).collect();
    let total = ws.iter().fold(Scalar::zero(), |acc, w| acc + w.measure());
    let disjoint_small = ArcSet::union_all(ws).measure() == total && total < cover.epsilon;
    LeftoverReport { covers, nested, sums_to_one, supports, disjoint_small }
}

// ---------------------------------------------------------------------------
// Separations with small boundaries

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation {
    pub u: Region,
    pub v: Region,
    pub cert: SmallnessCertificate,
}

/// Smallness certificate for the boundary of a region.
pub fn boundary_certificate(system: &System, r: &Region, depth: u64) -> Result<SmallnessCertificate> {
    match (system, r) {
        (System::Rotation(_), Region::Arcs(a)) => {
            let pts: Vec<Point> = a.boundary_points().into_iter().map(Point::Circle).collect();
            smallness_of_points(system, &pts)
        }
        (System::Torus(t), Region::Boxes(b)) => torus_boundary_certificate(t, b, depth),
        (System::Odometer(_), Region::Cylinders(_)) => Ok(SmallnessCertificate::proven(0, Vec::new())),
        _ => Err(Error::MixedAmbient),
    }
}

/// Box boundaries lie in finitely many coordinate hyperplanes. Hyperplanes
/// normal to different axes always meet, so the constants of the per-axis
/// coordinate sets add up; the lower bound is witnessed by offsetting the
/// per-axis witnesses until the translated faces share a point.
pub fn torus_boundary_certificate(t: &TorusRotation, b: &BoxSet, depth: u64) -> Result<SmallnessCertificate> {
    let faces = b.faces();
    let mut per_axis: Vec<SmallnessCertificate> = Vec::new();
    for i in 0..t.dims() {
        let coords: Vec<Scalar> = faces.iter().filter(|f| f.0 == i).map(|f| f.1.clone()).collect();
        let axis = System::Rotation(t.axis(i));
        per_axis.push(smallness_of_points(&axis, &coords.into_iter().map(Point::Circle).collect::<Vec<_>>())?);
    }
    let axis_constants: Vec<u64> = per_axis.iter().map(|c| c.constant).collect();
    let constant: u64 = axis_constants.iter().sum();
    let bd = b.boundary();
    let used: Vec<usize> = (0..t.dims()).filter(|&i| axis_constants[i] > 0).collect();
    let mut witness = Vec::new();
    let mut found = used.len() <= 1;
    if used.len() == 1 {
        witness = per_axis[used[0]].witness.clone();
    }
    if !found {
        let k = used.len() - 1;
        let span = 2 * depth as i64 + 1;
        let total = (span as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        let mut counter: u128 = 0;
        while counter < total {
            let mut c = counter;
            let mut offsets = vec![0i64];
            for _ in 0..k {
                let digit = (c % span as u128) as i64;
                c /= span as u128;
                offsets.push(if digit % 2 == 1 { (digit + 1) / 2 } else { -(digit / 2) });
            }
            counter += 1;
            let mut cand = Vec::new();
            for (slot, &i) in used.iter().enumerate() {
                cand.extend(per_axis[i].witness.iter().map(|d| d + offsets[slot]));
            }
            let mut distinct = cand.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() != cand.len() {
                continue;
            }
            let mut common = BoxSet::full(t.dims());
            for &d in &cand {
                common = common.intersect(&bd.translate(&t.shift(d)));
                if common.is_empty() {
                    break;
                }
            }
            if !common.is_empty() {
                witness = distinct;
                found = true;
                break;
            }
        }
    }
    Ok(SmallnessCertificate {
        constant,
        verdict: if found { Verdict::Proven } else { Verdict::BoundedSearch { depth } },
        witness,
        axis_constants,
    })
}

/// Open `U ⊇ F`, `V ⊇ K` with disjoint closures and small boundaries:
/// closed neighbourhoods of radius a quarter of the separation.
pub fn tsbp_separate(system: &System, f: &Region, k: &Region) -> Result<Separation> {
    if !f.fits(system) || !k.fits(system) {
        return Err(Error::MixedAmbient);
    }
    let (f, k) = (f.closure(), k.closure());
    if !f.is_disjoint(&k)? {
        return Err(Error::NotDisjoint);
    }
    if f.is_empty() || k.is_empty() {
        return Err(Error::Degenerate("separation needs two non-empty sets"));
    }
    match (system, &f, &k) {
        (System::Rotation(_), Region::Arcs(fa), Region::Arcs(ka)) => {
            let gap = fa.distance(ka).expect("non-empty sets");
            let r = gap.div_i64(4);
            let u = Region::Arcs(fa.open_neighborhood(&r));
            let v = Region::Arcs(ka.open_neighborhood(&r));
            let cert = boundary_certificate(system, &u, 0)?;
            Ok(Separation { u, v, cert })
        }
        (System::Torus(t), Region::Boxes(fb), Region::Boxes(kb)) => {
            let r = torus_separation_radius(fb, kb);
            let u = Region::Boxes(expand_boxes(fb, &r));
            let v = Region::Boxes(expand_boxes(kb, &r));
            let cert = torus_boundary_certificate(t, u.as_boxes()?, 60)?;
            Ok(Separation { u, v, cert })
        }
        (System::Odometer(_), Region::Cylinders(_), Region::Cylinders(_)) => {
            Ok(Separation { u: f.clone(), v: k.clone(), cert: SmallnessCertificate::proven(0, Vec::new()) })
        }
        _ => Err(Error::MixedAmbient),
    }
}

/// Positive rational lower bound for a quadratic irrational.
fn rational_floor_positive(x: &Scalar) -> Scalar {
    let mut scale: i64 = 16;
    loop {
        let f = x.mul_i64(scale).floor();
        if f.is_positive() {
            return Scalar::from_bigint(f).div_i64(scale);
        }
        scale = scale.checked_mul(16).expect("distance too small to bound");
    }
}

/// Rational radius `r` such that expanding every closed cell of `f` and `k`
/// by `r` on each axis keeps them apart: every pair of cells is separated by
/// more than `4r` on some axis.
fn torus_separation_radius(f: &BoxSet, k: &BoxSet) -> Scalar {
    let fc: Vec<Vec<ArcSet>> = f.cell_sets();
    let kc: Vec<Vec<ArcSet>> = k.cell_sets();
    let mut best: Option<Scalar> = None;
    for a in &fc {
        for b in &kc {
            let mut pair_best: Option<Scalar> = None;
            for (x, y) in a.iter().zip(b) {
                if let Some(d) = x.distance(y) {
                    if d.is_positive() {
                        let lb = rational_floor_positive(&d);
                        pair_best = Some(match pair_best {
                            Some(p) => p.max(lb),
                            None => lb,
                        });
                    }
                }
            }
            let pb = pair_best.expect("disjoint closed cells differ on some axis");
            best = Some(match best {
                Some(p) => p.min(pb),
                None => pb,
            });
        }
    }
    best.expect("non-empty sets").div_i64(4)
}

fn expand_boxes(b: &BoxSet, r: &Scalar) -> BoxSet {
    let mut out = BoxSet::empty(b.dims());
    for cell in b.cell_sets() {
        let factors: Vec<ArcSet> = cell.iter().map(|a| a.open_neighborhood(r)).collect();
        out = out.union(&BoxSet::product(&factors));
    }
    out
}

/// Open `V ∋ x` with `V̄ ⊂ U` and finite boundary: an arc (or box) of radius
/// half the distance from `x` to the complement of `U`.
pub fn tsbp_point_nbhd(system: &System, x: &Point, u: &Region) -> Result<(Region, SmallnessCertificate)> {
    if !u.contains(system, x)? || !u.is_open() {
        return Err(Error::PointOutside);
    }
    match (system, x, u) {
        (System::Rotation(_), Point::Circle(p), Region::Arcs(a)) => {
            let r = match a.distance_to_complement(p) {
                Some(d) => d.div_i64(2),
                None => Scalar::rational(1, 8),
            };
            let v = Region::Arcs(ArcSet::open_arc(&(p - &r), &(p + &r)));
            let cert = boundary_certificate(system, &v, 0)?;
            Ok((v, cert))
        }
        (System::Torus(t), Point::Torus(ps), Region::Boxes(b)) => {
            let mut factors = Vec::new();
            for (i, p) in ps.iter().enumerate() {
                let cuts = b.axis_points(i);
                let r = cuts
                    .iter()
                    .filter(|c| *c != p)
                    .map(|c| circle_dist(c, p))
                    .min()
                    .map(|d| d.div_i64(2))
                    .unwrap_or_else(|| Scalar::rational(1, 8))
                    .min(Scalar::rational(1, 8));
                factors.push(ArcSet::open_arc(&(p - &r), &(p + &r)));
            }
            let v = BoxSet::product(&factors);
            debug_assert!(v.closure().is_subset(b));
            let cert = torus_boundary_certificate(t, &v, 60)?;
            Ok((Region::Boxes(v), cert))
        }
        (System::Odometer(o), Point::Odometer(w), Region::Cylinders(c)) => {
            let v = crate::regions::cylinders::CylinderSet::new(c.modulus(), vec![o.index_of(w)]);
            Ok((Region::Cylinders(v), SmallnessCertificate::proven(0, Vec::new())))
        }
        _ => Err(Error::MixedAmbient),
    }
}

/// Open `V` with `V̄ ⊂ U`, finite boundary and `μ(U \ V̄) < eps`.
pub fn regular_inner_approx(system: &System, u: &Region, eps: &Scalar) -> Result<(Region, SmallnessCertificate)> {
    let a = u.as_arcs()?;
    if !u.fits(system) {
        return Err(Error::MixedAmbient);
    }
    let a = a.interior();
    let v = match inner_radius(&a, eps)? {
        None => {
            let r = eps.div_i64(4);
            ArcSet::closed_arc(&-&r, &r).complement()
        }
        Some(r) => a.retract_closed(&r).interior(),
    };
    let v = Region::Arcs(v);
    let cert = boundary_certificate(system, &v, 0)?;
    Ok((v, cert))
}

/// Open `V` with `F ⊂ V ⊂ V̄ ⊂ U`, finite boundary and `μ(V \ F) < eps`.
pub fn regular_outer_approx(system: &System, f: &Region, u: &Region, eps: &Scalar) -> Result<(Region, SmallnessCertificate)> {
    if !f.fits(system) || !u.fits(system) {
        return Err(Error::MixedAmbient);
    }
    let fa = f.as_arcs()?.closure();
    let ua = u.as_arcs()?.interior();
    if !fa.is_subset(&ua) {
        return Err(Error::NotContained);
    }
    let v = if fa.is_empty() {
        let comps = ua.components();
        let c = comps.first().ok_or(Error::EmptyInput)?;
        let r = if ua.is_full() { eps.div_i64(4) } else { eps.clone().min(c.length()).div_i64(4) };
        let m = c.midpoint();
        ArcSet::open_arc(&(&m - &r), &(&m + &r))
    } else if fa.is_full() {
        fa
    } else {
        let r = outer_radius(&fa, eps, Some(&ua))?.expect("proper non-empty set");
        fa.open_neighborhood(&r)
    };
    let v = Region::Arcs(v);
    let cert = boundary_certificate(system, &v, 0)?;
    Ok((v, cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::rational(p, d)
    }

    fn golden() -> (System, CircleRotation) {
        let s = System::golden();
        let r = s.as_rotation().unwrap().clone();
        (s, r)
    }

    fn pts(xs: &[Scalar]) -> Vec<Point> {
        xs.iter().cloned().map(Point::Circle).collect()
    }

    #[test]
    fn distinct_sums() {
        assert_eq!(distinct_sums_card(&[0, 1, 2], (0, 5)).unwrap(), 6);
        assert_eq!(distinct_sums_card(&[0, 1], (0, 1)).unwrap(), 3);
        assert_eq!(distinct_sums_card(&[0], (0, 1)).unwrap(), 2);
        assert_eq!(distinct_sums_card(&[0, 0], (0, 1)), Err(Error::DuplicateInput));
        assert_eq!(distinct_sums_card(&[0], (1, 1)), Err(Error::DuplicateInput));
    }

    #[test]
    fn small_point_sets() {
        let (s, r) = golden();
        let x = q(1, 7);
        let one = smallness_of_points(&s, &pts(&[x.clone()])).unwrap();
        assert_eq!(one.constant, 1);
        let two = smallness_of_points(&s, &pts(&[x.clone(), r.apply(&x, 1)])).unwrap();
        assert_eq!(two.constant, 2);
        assert_eq!(two.witness.len(), 2);
        assert!(verify_circle_smallness(&r, &[x.clone(), r.apply(&x, 1)], &two));
        let generic = smallness_of_points(&s, &pts(&[Scalar::zero(), q(1, 3)])).unwrap();
        assert_eq!(generic.constant, 1);
        assert_eq!(smallness_of_points(&s, &[]).unwrap().constant, 0);
    }

    #[test]
    fn witness_shifts_meet() {
        let (s, r) = golden();
        let x = q(2, 9);
        let set = [x.clone(), r.apply(&x, 1), r.apply(&x, -3), q(1, 2)];
        let c = smallness_of_points(&s, &pts(&set)).unwrap();
        assert_eq!(c.constant, 3);
        assert!(verify_circle_smallness(&r, &set, &c));
        let mut wrong = c.clone();
        wrong.constant = 2;
        wrong.witness.pop();
        assert!(!verify_circle_smallness(&r, &set, &wrong));
    }

    #[test]
    fn union_bounds() {
        let p = |m| SmallnessCertificate::proven(m, Vec::new());
        assert_eq!(union_smallness_bound(&[p(1)]).unwrap(), 1);
        assert_eq!(union_smallness_bound(&[p(1), p(1)]).unwrap(), 2);
        assert_eq!(union_smallness_bound(&[p(2), p(3)]).unwrap(), 5);
        let mut b = p(1);
        b.verdict = Verdict::BoundedSearch { depth: 3 };
        assert_eq!(union_smallness_bound(&[b]), Err(Error::UnprovenInput));
    }

    #[test]
    fn thin_cover_examples() {
        let (s, r) = golden();
        let u = Region::Arcs(ArcSet::open_arc(&q(0, 1), &q(1, 2)));
        let f = Region::Arcs(ArcSet::point(&q(0, 1)));
        let c = thin_cover(&s, &f, &u, 100).unwrap();
        // θ ≈ 0.618 misses (0, 1/2) while -θ ≈ 0.382 lands inside
        assert_eq!(c.shifts, vec![-1]);
        assert!(verify_thin_cover(&r, f.as_arcs().unwrap(), u.as_arcs().unwrap(), &c));
        let empty = thin_cover(&s, &Region::Arcs(ArcSet::empty()), &u, 10).unwrap();
        assert!(empty.opens.is_empty());
        let target = ArcSet::open_arc(&q(3, 10), &q(4, 10));
        let f2 = ArcSet::points(&[q(0, 1), q(1, 2)]);
        let c2 = thin_cover(&s, &Region::Arcs(f2.clone()), &Region::Arcs(target.clone()), 1000).unwrap();
        assert_eq!(c2.opens.len(), 2);
        assert!(verify_thin_cover(&r, &f2, &target, &c2));
        let closed = closed_thin_cover(&s, &f, &u, 100).unwrap();
        assert_eq!(closed.len(), 1);
        assert!(verify_closed_thin_cover(&r, f.as_arcs().unwrap(), u.as_arcs().unwrap(), &closed));
    }

    #[test]
    fn same_orbit_collisions_avoided() {
        let (s, r) = golden();
        let x = q(1, 5);
        let f = ArcSet::points(&[x.clone(), r.apply(&x, 1), r.apply(&x, 2), r.apply(&x, -1)]);
        let u = ArcSet::open_arc(&q(1, 5), &q(1, 4));
        let c = thin_cover(&s, &Region::Arcs(f.clone()), &Region::Arcs(u.clone()), 10_000).unwrap();
        assert!(verify_thin_cover(&r, &f, &u, &c));
    }

    #[test]
    fn leftover_examples() {
        let (s, r) = golden();
        let u = ArcSet::open_arc(&q(0, 1), &q(1, 2));
        let f = ArcSet::point(&q(0, 1));
        let c = leftover_cover(&s, &Region::Arcs(f.clone()), &Region::Arcs(u.clone()), &q(1, 20)).unwrap();
        assert_eq!(c.len(), 1);
        assert!(verify_leftover_cover(&r, &f, &u, &c).ok());
        let e = leftover_cover(&s, &Region::Arcs(ArcSet::empty()), &Region::Arcs(u.clone()), &q(1, 20)).unwrap();
        assert!(e.is_empty() && verify_leftover_cover(&r, &ArcSet::empty(), &u, &e).ok());
        let u3 = ArcSet::open_arc(&q(0, 1), &q(1, 3));
        let f2 = ArcSet::points(&[q(0, 1), q(1, 2)]);
        let c2 = leftover_cover(&s, &Region::Arcs(f2.clone()), &Region::Arcs(u3.clone()), &q(1, 10)).unwrap();
        assert_eq!(c2.len(), 2);
        assert!(verify_leftover_cover(&r, &f2, &u3, &c2).ok());
    }

    #[test]
    fn leftover_checker_catches_bad_shift() {
        let (s, r) = golden();
        let u = ArcSet::open_arc(&q(0, 1), &q(1, 2));
        let f = ArcSet::points(&[q(0, 1), q(1, 7)]);
        let mut c = leftover_cover(&s, &Region::Arcs(f.clone()), &Region::Arcs(u.clone()), &q(1, 20)).unwrap();
        c.landing.shifts[0] += 1;
        assert!(!verify_leftover_cover(&r, &f, &u, &c).ok());
    }

    #[test]
    fn circle_separation() {
        let (s, _) = golden();
        let f = Region::Arcs(ArcSet::closed_arc(&q(0, 1), &q(1, 4)));
        let k = Region::Arcs(ArcSet::closed_arc(&q(1, 2), &q(3, 4)));
        let sep = tsbp_separate(&s, &f, &k).unwrap();
        assert_eq!(sep.u, Region::Arcs(ArcSet::open_arc(&q(-1, 16), &q(5, 16))));
        assert_eq!(sep.v, Region::Arcs(ArcSet::open_arc(&q(7, 16), &q(13, 16))));
        assert!(sep.u.closure().is_disjoint(&sep.v.closure()).unwrap());
        assert!(tsbp_separate(&s, &Region::Arcs(ArcSet::empty()), &Region::Arcs(ArcSet::full())).is_err());
        assert_eq!(tsbp_separate(&s, &f, &f), Err(Error::NotDisjoint));
    }

    #[test]
    fn point_neighbourhoods() {
        let (s, _) = golden();
        let (v, c) = tsbp_point_nbhd(&s, &Point::Circle(q(0, 1)), &Region::Arcs(ArcSet::open_arc(&q(-1, 4), &q(1, 4)))).unwrap();
        assert_eq!(v, Region::Arcs(ArcSet::open_arc(&q(-1, 8), &q(1, 8))));
        assert!(c.constant <= 2);
        let (v2, _) = tsbp_point_nbhd(&s, &Point::Circle(q(1, 8)), &Region::Arcs(ArcSet::open_arc(&q(0, 1), &q(1, 4)))).unwrap();
        assert_eq!(v2, Region::Arcs(ArcSet::open_arc(&q(1, 16), &q(3, 16))));
        let (v3, _) = tsbp_point_nbhd(&s, &Point::Circle(q(0, 1)), &Region::Arcs(ArcSet::full())).unwrap();
        assert!(v3.contains(&s, &Point::Circle(q(0, 1))).unwrap());
        assert_eq!(
            tsbp_point_nbhd(&s, &Point::Circle(q(1, 2)), &Region::Arcs(ArcSet::open_arc(&q(0, 1), &q(1, 4)))),
            Err(Error::PointOutside)
        );
    }

    #[test]
    fn regular_approximations() {
        let (s, _) = golden();
        let u = Region::Arcs(ArcSet::open_arc(&q(0, 1), &q(1, 2)));
        let (v, _) = regular_inner_approx(&s, &u, &q(1, 8)).unwrap();
        assert_eq!(v, Region::Arcs(ArcSet::open_arc(&q(1, 32), &q(15, 32))));
        let (vf, _) = regular_inner_approx(&s, &Region::Arcs(ArcSet::full()), &q(1, 8)).unwrap();
        assert!(Scalar::one() - vf.closure().measure() < q(1, 8));
        let f = Region::Arcs(ArcSet::closed_arc(&q(1, 4), &q(1, 2)));
        let (o, c) = regular_outer_approx(&s, &f, &Region::Arcs(ArcSet::open_arc(&q(0, 1), &q(1, 1))), &q(1, 8)).unwrap();
        assert_eq!(o, Region::Arcs(ArcSet::open_arc(&q(7, 32), &q(17, 32))));
        assert!(c.constant <= 2);
        let (e, _) = regular_outer_approx(&s, &Region::Arcs(ArcSet::empty()), &u, &q(1, 8)).unwrap();
        assert!(e.measure() < q(1, 8) && e.is_subset(&u).unwrap());
    }

    #[test]
    fn torus_box_separation_sums_axis_constants() {
        let t = TorusRotation::new(vec![Scalar::quadratic(-1, 1, 2, 5).unwrap(), Scalar::quadratic(-1, 1, 1, 2).unwrap()]).unwrap();
        let s = System::Torus(t.clone());
        let bx = |a: (i64, i64), b: (i64, i64)| {
            Region::Boxes(BoxSet::product(&[ArcSet::closed_arc(&q(a.0, 10), &q(a.1, 10)), ArcSet::closed_arc(&q(b.0, 10), &q(b.1, 10))]))
        };
        let sep = tsbp_separate(&s, &bx((0, 2), (0, 2)), &bx((5, 7), (5, 7))).unwrap();
        assert!(sep.u.closure().is_disjoint(&sep.v.closure()).unwrap());
        assert_eq!(sep.u.as_boxes().unwrap().faces().len(), 4);
        assert_eq!(sep.cert.axis_constants, vec![1, 1]);
        assert_eq!(sep.cert.constant, 2);
        assert_eq!(sep.cert.verdict, Verdict::Proven);
        assert_eq!(sep.cert.witness.len(), 2);
    }

    proptest::proptest! {
        #[test]
        fn orbit_classes_count_shifts(ns in proptest::collection::vec(-40i64..40, 0..8), other in 1i64..50) {
            let (s, r) = golden();
            let x = q(1, 11);
            let mut set: Vec<Scalar> = ns.iter().map(|n| r.apply(&x, *n)).collect();
            set.push(q(1, other + 50));
            let c = smallness_of_points(&s, &pts(&set)).unwrap();
            let distinct: HashSet<i64> = ns.iter().copied().collect();
            proptest::prop_assert_eq!(c.constant, distinct.len().max(1) as u64);
            proptest::prop_assert!(verify_circle_smallness(&r, &set, &c));
        }
    }
}
