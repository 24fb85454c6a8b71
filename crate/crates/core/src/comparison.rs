//! Dynamic comparison witnesses: Birkhoff certificates, input
//! simplification, column matching over a refined tower, leftover handling,
//! the clopen comparison on odometers and an independent witness checker.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::plfun::{birkhoff_sum, bump, min_cascade, sum_extrema_on, CylinderFunction, PlFunction};
use crate::regions::arcs::{mod1, ArcSet};
use crate::regions::cylinders::CylinderSet;
use crate::regions::{inner_approx_arcs, outer_approx_arcs, Region};
use crate::scalar::Scalar;
use crate::smallness::{land_points, regular_inner_approx, regular_outer_approx, LeftoverCover};
use crate::systems::{CircleRotation, Point, System};
use crate::towers::{build_tower, disjoint_base, RokhlinTower};

/// Attempts of the tower stage; each retry triples the tower height.
pub const TOWER_ATTEMPTS: u32 = 3;

/// Reach of the leftover landing search.
pub const LANDING_DEPTH: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirkhoffCertificate {
    pub g0: PlFunction,
    pub g1: PlFunction,
    pub g: PlFunction,
    pub n0: u64,
    pub sigma: Scalar,
    /// `min S_{N0} g / N0`.
    pub m0: Scalar,
    pub n1: u64,
}

/// `min_x S_N g(x) / N`, exactly.
pub fn birkhoff_min_average(rot: &CircleRotation, g: &PlFunction, n: u64) -> Result<Scalar> {
    Ok(birkhoff_sum(rot, g, n)?.extrema().min.div_i64(n as i64))
}

impl BirkhoffCertificate {
    /// Recomputes the averages at `N1`, `N1 + 1` and `2·N1` and compares them
    /// with `sigma`.
    pub fn spot_check(&self, rot: &CircleRotation) -> Result<bool> {
        for n in [self.n1, self.n1 + 1, 2 * self.n1] {
            if birkhoff_min_average(rot, &self.g, n)? < self.sigma {
                return Ok(false);
            }
        }
        Ok(birkhoff_min_average(rot, &self.g, self.n0)? == self.m0)
    }
}

/// Builds `g = g1 - g0` with `g0 = 1` on `F` away from `Ē` and `g1`
/// supported in `E`, then finds `N0` by doubling and the uniform threshold
/// `N1 = N0·⌈(m0 + max|g|)/(m0 - σ)⌉`.
pub fn birkhoff_certificate(system: &System, f: &Region, e: &Region, sigma_fraction: &Scalar) -> Result<BirkhoffCertificate> {
    let rot = system.as_rotation()?;
    if !f.fits(system) || !e.fits(system) {
        return Err(Error::MixedAmbient);
    }
    if !sigma_fraction.is_positive() || *sigma_fraction >= Scalar::one() {
        return Err(Error::InvalidInput("sigma fraction must lie in (0, 1)".into()));
    }
    let fa = f.as_arcs()?.closure();
    let ea = e.as_arcs()?.interior();
    if !fa.is_disjoint(&ea.closure()) {
        return Err(Error::NotSeparated);
    }
    let gap = ea.measure() - fa.measure();
    if !gap.is_positive() {
        return Err(Error::GapNonpositive);
    }
    let eta = gap.div_i64(4);
    let g0 = if fa.is_empty() {
        PlFunction::zero()
    } else {
        let w = outer_approx_arcs(&fa, &eta, Some(&ea.closure().complement()))?;
        bump(&fa, &w)?
    };
    let g1 = if ea.is_full() { PlFunction::constant(Scalar::one()) } else { bump(&inner_approx_arcs(&ea, &eta)?, &ea)? };
    let g = g1.sub(&g0);
    let integral = g.integral();
    if !integral.is_positive() {
        return Err(Error::GapNonpositive);
    }
    let sigma = sigma_fraction * &integral;
    let mut n0 = 1u64;
    let m0 = loop {
        let m = birkhoff_min_average(rot, &g, n0)?;
        if m > sigma {
            break m;
        }
        n0 *= 2;
    };
    let ext = g.extrema();
    let max_abs = ext.min.abs().max(ext.max.abs());
    let ratio = (&m0 + &max_abs) / (&m0 - &sigma);
    let factor: u64 = ratio.ceil().try_into().map_err(|_| Error::InvalidInput("threshold overflow".into()))?;
    Ok(BirkhoffCertificate { g0, g1, g, n0, sigma, m0, n1: n0 * factor.max(1) })
}

/// Inputs brought into the shape the tower argument needs: a closed `c`, an
/// open `u0` with `Ū0 ⊂ u`, `Ū0 ∩ c = ∅` and `μ(c) < μ(u0)`. When the
/// original sets overlap too much, part of `C` is absorbed by a single
/// untranslated function equal to 1 on `absorbed.0` and supported in
/// `absorbed.1`, and `c`, `u` are the reduced sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplified {
    pub c: Region,
    pub u0: Region,
    pub u: Region,
    pub delta: Scalar,
    pub absorbed: Option<(ArcSet, ArcSet)>,
}

fn direct_simplify(system: &System, c: &ArcSet, u: &ArcSet) -> Result<Option<(ArcSet, Scalar)>> {
    let delta = u.measure() - c.measure();
    if !delta.is_positive() {
        return Err(Error::GapNonpositive);
    }
    let third = delta.div_i64(3);
    let (inner, _) = regular_inner_approx(system, &Region::Arcs(u.clone()), &third)?;
    let mut u0 = inner.as_arcs()?.clone();
    if !c.is_empty() {
        let ex = outer_approx_arcs(c, &third, None)?.closure();
        u0 = u0.difference(&ex);
    }
    let u0 = u0.closure().interior();
    let ok = u0.closure().is_subset(u) && u0.closure().is_disjoint(c) && c.measure() < u0.measure();
    Ok(if ok { Some((u0, delta)) } else { None })
}

pub fn simplify_inputs(system: &System, c: &Region, u: &Region) -> Result<Simplified> {
    system.as_rotation()?;
    if !c.fits(system) || !u.fits(system) {
        return Err(Error::MixedAmbient);
    }
    let ca = c.as_arcs()?.closure();
    let ua = u.as_arcs()?.interior();
    if let Some((u0, delta)) = direct_simplify(system, &ca, &ua)? {
        return Ok(Simplified { c: Region::Arcs(ca), u0: Region::Arcs(u0), u: Region::Arcs(ua), delta, absorbed: None });
    }
    // C meets U in positive measure: absorb C near an inner part of U with
    // one untranslated bump and compare the rest
    let delta = ua.measure() - ca.measure();
    let third = delta.div_i64(3);
    let (u0p, _) = regular_inner_approx(system, &Region::Arcs(ua.clone()), &third)?;
    let u0p = u0p.as_arcs()?.clone();
    if ca.is_subset(&u0p.closure()) {
        return Ok(Simplified {
            c: Region::Arcs(ArcSet::empty()),
            u0: Region::Arcs(ArcSet::empty()),
            u: Region::Arcs(ua.clone()),
            delta,
            absorbed: Some((u0p.closure(), ua)),
        });
    }
    let (v, _) = regular_inner_approx(system, &Region::Arcs(u0p.clone()), &third)?;
    let v = v.as_arcs()?.clone();
    let eps = v.measure() - ca.measure();
    let k = ca.intersect(&v.closure());
    let within = Region::Arcs(u0p.clone());
    let (g0, g1, g2) = if k.is_empty() {
        (ArcSet::empty(), ArcSet::empty(), ArcSet::empty())
    } else {
        let quarter = eps.div_i64(4);
        let g0 = regular_outer_approx(system, &Region::Arcs(k), &within, &quarter)?.0.as_arcs()?.clone();
        let g1 = regular_outer_approx(system, &Region::Arcs(g0.closure()), &within, &quarter)?.0.as_arcs()?.clone();
        let g2 = regular_outer_approx(system, &Region::Arcs(g1.closure()), &within, &eps)?.0.as_arcs()?.clone();
        (g0, g1, g2)
    };
    let f0 = ca.difference(&g0);
    let e1 = v.difference(&g2.closure());
    let (u0, d2) = direct_simplify(system, &f0, &e1)?.ok_or(Error::GapNonpositive)?;
    let absorbed = if g1.is_empty() { None } else { Some((g1.closure(), g2)) };
    Ok(Simplified { c: Region::Arcs(f0), u0: Region::Arcs(u0), u: Region::Arcs(e1), delta: d2, absorbed })
}

/// `N(S, k)`: levels of column `k` whose open part lies in `S`, decided by
/// region algebra. Degenerate columns get empty lists.
pub fn column_counts(tower: &RokhlinTower, s: &Region) -> Result<Vec<Vec<u64>>> {
    let mut out = Vec::with_capacity(tower.columns.len());
    for (k, col) in tower.columns.iter().enumerate() {
        let mut list = Vec::new();
        if !col.degenerate {
            for j in 0..col.height {
                let lvl = tower.open_level(k, j)?;
                if lvl.is_subset(s)? {
                    list.push(j);
                } else if !lvl.is_disjoint(s)? {
                    return Err(Error::UnrefinedTower);
                }
            }
        }
        out.push(list);
    }
    Ok(out)
}

/// `N(S, k)` read off the refinement labels of a tower refined by a
/// partition whose element `label` is `S`.
pub fn column_counts_from_labels(tower: &RokhlinTower, label: u32) -> Result<Vec<Vec<u64>>> {
    if !tower.is_refined() {
        return Err(Error::UnrefinedTower);
    }
    Ok(tower
        .columns
        .iter()
        .map(|c| {
            if c.degenerate {
                Vec::new()
            } else {
                c.labels.iter().enumerate().filter(|(_, l)| **l == label).map(|(j, _)| j as u64).collect()
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatchingTable {
    pub n_c: Vec<u64>,
    pub n_u0: Vec<u64>,
    /// `(s, t, t - s)`.
    pub injection: Vec<(u64, u64, i64)>,
}

/// Order-preserving injection `N(C,k) → N(U0,k)` for every column.
pub fn column_matching(counts_c: &[Vec<u64>], counts_u0: &[Vec<u64>]) -> Result<Vec<MatchingTable>> {
    if counts_c.len() != counts_u0.len() {
        return Err(Error::InvalidInput("count lists have different lengths".into()));
    }
    let mut out = Vec::with_capacity(counts_c.len());
    for (k, (nc, nu)) in counts_c.iter().zip(counts_u0).enumerate() {
        if nu.len() <= nc.len() {
            return Err(Error::ColumnDeficit(k));
        }
        let injection = nc.iter().zip(nu).map(|(&s, &t)| (s, t, t as i64 - s as i64)).collect();
        out.push(MatchingTable { n_c: nc.clone(), n_u0: nu.clone(), injection });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WitnessFunction {
    Pl(PlFunction),
    Cylinder(CylinderFunction),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WitnessEntry {
    pub f: WitnessFunction,
    pub shift: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    pub n0: u64,
    pub n1: u64,
    pub tower_height: u64,
    pub attempts: u32,
    /// `(height, base measure)` per non-degenerate column.
    pub columns: Vec<(u64, Scalar)>,
    pub matching: Vec<MatchingTable>,
    pub leftover: usize,
    pub leftover_radius: Option<Scalar>,
    pub absorbed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonWitness {
    pub entries: Vec<WitnessEntry>,
    pub c: Region,
    pub u: Region,
    pub provenance: Provenance,
}

impl ComparisonWitness {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Raw (not yet normalised) functions and shifts for a simplified instance.
struct CoreOutput {
    gs: Vec<PlFunction>,
    shifts: Vec<i64>,
    provenance: Provenance,
}

fn core_comparison(system: &System, c: &ArcSet, u0: &ArcSet, u: &ArcSet) -> Result<CoreOutput> {
    let rot = system.as_rotation()?;
    let mut provenance = Provenance::default();
    if c.is_empty() {
        return Ok(CoreOutput { gs: Vec::new(), shifts: Vec::new(), provenance });
    }
    let cert = birkhoff_certificate(system, &Region::Arcs(c.clone()), &Region::Arcs(u0.clone()), &Scalar::rational(1, 2))?;
    provenance.n0 = cert.n0;
    provenance.n1 = cert.n1;
    let u0c = u0.closure();
    let rest = u0c.union(c).complement().closure();
    let partition = [Region::Arcs(u0c.clone()), Region::Arcs(c.clone()), Region::Arcs(rest)];
    let mut n = cert.n1;
    let mut attempt = 0;
    let (tower, tables) = loop {
        attempt += 1;
        let y = disjoint_base(system, n, &Point::Circle(Scalar::zero()))?;
        let tower = build_tower(system, &y)?.refine(&partition)?;
        let live: Vec<usize> = (0..tower.columns.len()).filter(|&k| !tower.columns[k].degenerate).collect();
        let nc = column_counts_from_labels(&tower, 1)?;
        let nu = column_counts_from_labels(&tower, 0)?;
        let pick = |v: &Vec<Vec<u64>>| live.iter().map(|&k| v[k].clone()).collect::<Vec<_>>();
        match column_matching(&pick(&nc), &pick(&nu)) {
            Ok(t) => break (tower, live.into_iter().zip(t).collect::<Vec<_>>()),
            Err(Error::ColumnDeficit(k)) if attempt >= TOWER_ATTEMPTS => return Err(Error::ColumnDeficit(live[k])),
            Err(Error::ColumnDeficit(_)) => n *= 3,
            Err(e) => return Err(e),
        }
    };
    provenance.attempts = attempt;
    provenance.tower_height = n;
    // endpoints of the levels lying in C, and C points outside all open levels
    let theta = rot.theta();
    let one = Scalar::one();
    let mut leftover: Vec<Scalar> = Vec::new();
    let mut min_mass: Option<Scalar> = None;
    for col in tower.columns.iter().filter(|c| !c.degenerate) {
        let base = col.base.as_arcs()?.components();
        let arc = &base[0];
        let mass = arc.length();
        provenance.columns.push((col.height, mass.clone()));
        min_mass = Some(match min_mass {
            Some(m) => m.min(mass),
            None => mass,
        });
        let (mut lo, mut hi) = (mod1(&arc.lo), mod1(&arc.hi));
        for j in 0..col.height {
            if j > 0 {
                lo = &lo + theta;
                if lo >= one {
                    lo = lo - &one;
                }
                hi = &hi + theta;
                if hi >= one {
                    hi = hi - &one;
                }
            }
            for x in [&lo, &hi] {
                if c.contains(x) {
                    leftover.push(x.clone());
                }
            }
        }
    }
    for col in tower.columns.iter().filter(|c| c.degenerate) {
        for p in col.base.as_arcs()?.boundary_points() {
            let mut x = p;
            for j in 0..col.height {
                if j > 0 {
                    x = mod1(&(&x + theta));
                }
                if c.contains(&x) {
                    leftover.push(x.clone());
                }
            }
        }
    }
    let eps = min_mass.ok_or(Error::ColumnDeficit(0))?.div_i64(2);
    let target = u.difference(&u0c);
    let landing = land_points(rot, &leftover, &target, Some(&eps), LANDING_DEPTH)?;
    let cover = LeftoverCover { landing, epsilon: eps };
    provenance.leftover = cover.len();
    provenance.leftover_radius = Some(cover.landing.radius.clone());
    let mut gs = Vec::with_capacity(cover.len());
    let mut shifts = Vec::with_capacity(cover.len());
    for j in 0..cover.len() {
        gs.push(cover.bump_at(j));
        shifts.push(cover.shift(j));
    }
    let rho = cover.landing.radius.clone();
    let inset = rho.mul_i64(3).div_i64(4);
    for (k, table) in &tables {
        let arc = &tower.columns[*k].base.as_arcs()?.components()[0];
        for &(s, _, d) in &table.injection {
            let sh = rot.shift(s as i64);
            let (a, b) = (&arc.lo + &sh, &arc.hi + &sh);
            let inner = ArcSet::closed_arc(&(&a + &inset), &(&b - &inset));
            gs.push(bump(&inner, &ArcSet::open_arc(&a, &b))?);
            shifts.push(d);
        }
    }
    provenance.matching = tables.into_iter().map(|(_, t)| t).collect();
    Ok(CoreOutput { gs, shifts, provenance })
}

/// Witness of dynamic comparison for a closed `C` and an open `U` with
/// `μ(C) < μ(U)`, checked by [`verify_witness`] before it is returned.
pub fn dynamic_comparison(system: &System, c: &Region, u: &Region) -> Result<ComparisonWitness> {
    if let System::Odometer(_) = system {
        return clopen_comparison(system, c, u);
    }
    system.as_rotation()?;
    if !c.fits(system) || !u.fits(system) {
        return Err(Error::MixedAmbient);
    }
    let ca = c.as_arcs()?.closure();
    let ua = u.as_arcs()?.interior();
    if !(ua.measure() > ca.measure()) {
        return Err(Error::GapNonpositive);
    }
    let (c, u) = (Region::Arcs(ca.clone()), Region::Arcs(ua.clone()));
    if ca.is_empty() {
        let entries = vec![WitnessEntry { f: WitnessFunction::Pl(PlFunction::zero()), shift: 0 }];
        return Ok(ComparisonWitness { entries, c, u, provenance: Provenance::default() });
    }
    let simp = simplify_inputs(system, &c, &u)?;
    let core = core_comparison(system, simp.c.as_arcs()?, simp.u0.as_arcs()?, simp.u.as_arcs()?)?;
    let mut gs = Vec::with_capacity(core.gs.len() + 1);
    let mut shifts = Vec::with_capacity(core.gs.len() + 1);
    let mut provenance = core.provenance;
    if let Some((inner, outer)) = &simp.absorbed {
        gs.push(bump(inner, outer)?);
        shifts.push(0);
        provenance.absorbed = true;
    }
    gs.extend(core.gs);
    shifts.extend(core.shifts);
    let fs = min_cascade(&gs);
    let entries = fs.into_iter().zip(shifts).map(|(f, shift)| WitnessEntry { f: WitnessFunction::Pl(f), shift }).collect();
    let w = ComparisonWitness { entries, c, u, provenance };
    if !verify_witness(system, &w.c, &w.u, &w).ok() {
        return Err(Error::CoverFailure);
    }
    Ok(w)
}

/// Decomposition of a clopen `A` into cylinders moved disjointly into `B`:
/// cylinders already in `B` stay put, the others go order-preserving onto
/// the free cylinders of `B`.
pub fn clopen_comparison(system: &System, a: &Region, b: &Region) -> Result<ComparisonWitness> {
    let o = system.as_odometer()?;
    let (aa, bb) = (a.as_cylinders()?, b.as_cylinders()?);
    let k = o.period();
    if aa.modulus() != k || bb.modulus() != k {
        return Err(Error::MixedAmbient);
    }
    if aa.len() >= bb.len() {
        return Err(Error::GapNonpositive);
    }
    let stay = aa.intersect(bb);
    let moving = aa.difference(bb);
    let free = bb.difference(aa);
    let mut entries = Vec::with_capacity(aa.len());
    let mut matching = Vec::with_capacity(aa.len());
    for &i in stay.members() {
        entries.push(WitnessEntry { f: WitnessFunction::Cylinder(CylinderFunction::indicator(k, &[i])), shift: 0 });
        matching.push((i, i, 0));
    }
    for (&s, &t) in moving.members().iter().zip(free.members()) {
        let d = t as i64 - s as i64;
        entries.push(WitnessEntry { f: WitnessFunction::Cylinder(CylinderFunction::indicator(k, &[s])), shift: d });
        matching.push((s, t, d));
    }
    matching.sort_unstable();
    let provenance = Provenance {
        matching: vec![MatchingTable { n_c: aa.members().to_vec(), n_u0: bb.members().to_vec(), injection: matching }],
        ..Provenance::default()
    };
    Ok(ComparisonWitness { entries, c: a.clone(), u: b.clone(), provenance })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub well_formed: bool,
    pub ranges: bool,
    pub sums_to_one: bool,
    pub disjoint: bool,
    pub contained: bool,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.well_formed && self.ranges && self.sums_to_one && self.disjoint && self.contained
    }

    fn failed() -> VerificationReport {
        VerificationReport { well_formed: false, ranges: false, sums_to_one: false, disjoint: false, contained: false }
    }
}

/// Checks a witness from scratch: every function takes values in `[0, 1]`,
/// the sum is exactly 1 on `C`, and the translated supports are pairwise
/// disjoint subsets of `U`.
pub fn verify_witness(system: &System, c: &Region, u: &Region, w: &ComparisonWitness) -> VerificationReport {
    match system {
        System::Rotation(rot) => verify_circle(rot, c, u, w),
        System::Odometer(_) => verify_cylinders(system, c, u, w),
        System::Torus(_) => VerificationReport::failed(),
    }
}

fn verify_circle(rot: &CircleRotation, c: &Region, u: &Region, w: &ComparisonWitness) -> VerificationReport {
    let (ca, ua) = match (c.as_arcs(), u.as_arcs()) {
        (Ok(c), Ok(u)) => (c.closure(), u),
        _ => return VerificationReport::failed(),
    };
    let mut fs = Vec::with_capacity(w.entries.len());
    for e in &w.entries {
        match &e.f {
            WitnessFunction::Pl(f) => fs.push(f),
            WitnessFunction::Cylinder(_) => return VerificationReport::failed(),
        }
    }
    let ranges = fs.iter().all(|f| f.within_unit_range());
    let sums_to_one = match sum_extrema_on(&fs, &ca) {
        None => true,
        Some(e) => e.min == Scalar::one() && e.max == Scalar::one(),
    };
    let mut shifts: HashMap<i64, Scalar> = HashMap::new();
    let moved: Vec<ArcSet> = fs
        .iter()
        .zip(&w.entries)
        .map(|(f, e)| f.support().translate(shifts.entry(e.shift).or_insert_with(|| rot.shift(e.shift))))
        .collect();
    let contained = moved.iter().all(|s| s.is_subset(ua));
    let disjoint = closed_sets_disjoint(&moved);
    VerificationReport { well_formed: true, ranges, sums_to_one, disjoint, contained }
}

/// Pairwise disjointness of closed sets by one sorted sweep over their
/// pieces, keeping the two furthest-reaching pieces from distinct owners.
fn closed_sets_disjoint(sets: &[ArcSet]) -> bool {
    let one = Scalar::one();
    let zero = Scalar::zero();
    let mut pieces: Vec<(Scalar, Scalar, usize)> = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        if s.is_empty() {
            continue;
        }
        if s.is_full() {
            pieces.push((zero.clone(), one.clone(), i));
            continue;
        }
        for a in s.closure().pieces() {
            if a.hi == one {
                // 1 and 0 are the same point of the circle
                pieces.push((zero.clone(), zero.clone(), i));
            }
            pieces.push((a.lo, a.hi, i));
        }
    }
    pieces.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut best: Option<(Scalar, usize)> = None;
    let mut second: Option<(Scalar, usize)> = None;
    for (lo, hi, owner) in pieces {
        let rival = match (&best, &second) {
            (Some(b), _) if b.1 != owner => Some(&b.0),
            (_, Some(s)) => Some(&s.0),
            _ => None,
        };
        if let Some(r) = rival {
            if *r >= lo {
                return false;
            }
        }
        match &mut best {
            Some(b) if b.1 == owner => {
                if hi > b.0 {
                    b.0 = hi;
                }
            }
            Some(b) if hi > b.0 => {
                second = best.take();
                best = Some((hi, owner));
            }
            Some(_) => {
                if second.as_ref().map_or(true, |s| hi > s.0) {
                    second = Some((hi, owner));
                }
            }
            None => best = Some((hi, owner)),
        }
    }
    true
}

fn verify_cylinders(system: &System, c: &Region, u: &Region, w: &ComparisonWitness) -> VerificationReport {
    let (o, ca, ua) = match (system.as_odometer(), c.as_cylinders(), u.as_cylinders()) {
        (Ok(o), Ok(c), Ok(u)) => (o, c, u),
        _ => return VerificationReport::failed(),
    };
    let k = o.period();
    let mut fs = Vec::with_capacity(w.entries.len());
    for e in &w.entries {
        match &e.f {
            WitnessFunction::Cylinder(f) if f.modulus == k && f.values.iter().all(|(i, _)| *i < k) => fs.push(f),
            _ => return VerificationReport::failed(),
        }
    }
    let one = Scalar::one();
    let ranges = fs.iter().all(|f| f.values.iter().all(|(_, v)| !v.is_negative() && *v <= one));
    let mut sums = vec![Scalar::zero(); ca.len()];
    for f in &fs {
        for (i, v) in &f.values {
            if let Ok(slot) = ca.members().binary_search(i) {
                sums[slot] = &sums[slot] + v;
            }
        }
    }
    let sums_to_one = sums.iter().all(|x| *x == one);
    let moved: Vec<CylinderSet> =
        fs.iter().zip(&w.entries).map(|(f, e)| CylinderSet::new(k, f.support()).translate(e.shift)).collect();
    let contained = moved.iter().all(|m| m.is_subset(ua));
    let mut seen = vec![false; k as usize];
    let mut disjoint = true;
    for m in &moved {
        for &i in m.members() {
            disjoint &= !std::mem::replace(&mut seen[i as usize], true);
        }
    }
    VerificationReport { well_formed: true, ranges, sums_to_one, disjoint, contained }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Odometer;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::rational(p, d)
    }

    fn arcs(a: ArcSet) -> Region {
        Region::Arcs(a)
    }

    #[test]
    fn matching_examples() {
        let t = column_matching(&[vec![]], &[vec![0, 1]]).unwrap();
        assert!(t[0].injection.is_empty());
        let t = column_matching(&[vec![1]], &[vec![0, 2]]).unwrap();
        assert_eq!(t[0].injection, vec![(1, 0, -1)]);
        let t = column_matching(&[vec![0, 3]], &[vec![1, 2, 4]]).unwrap();
        assert_eq!(t[0].injection, vec![(0, 1, 1), (3, 2, -1)]);
        assert_eq!(column_matching(&[vec![0], vec![0, 1]], &[vec![1, 2], vec![2, 3]]), Err(Error::ColumnDeficit(1)));
    }

    #[test]
    fn birkhoff_empty_f() {
        let s = System::golden();
        let rot = s.as_rotation().unwrap();
        let cert = birkhoff_certificate(&s, &arcs(ArcSet::empty()), &arcs(ArcSet::open_arc(&q(0, 1), &q(1, 2))), &q(1, 2)).unwrap();
        assert!(cert.g0.is_empty() || cert.g0 == PlFunction::zero());
        assert!(cert.m0 > cert.sigma);
        // smallest power of two that clears sigma
        if cert.n0 > 1 {
            assert!(birkhoff_min_average(rot, &cert.g, cert.n0 / 2).unwrap() <= cert.sigma);
        }
        assert!(cert.spot_check(rot).unwrap());
    }

    #[test]
    fn birkhoff_separated_sets() {
        let s = System::golden();
        let rot = s.as_rotation().unwrap();
        let f = arcs(ArcSet::closed_arc(&q(0, 1), &q(1, 10)));
        let e = arcs(ArcSet::open_arc(&q(3, 10), &q(6, 10)));
        let cert = birkhoff_certificate(&s, &f, &e, &q(1, 2)).unwrap();
        assert_eq!(cert.sigma, cert.g.integral().div_i64(2));
        assert_eq!(birkhoff_min_average(rot, &cert.g, cert.n0).unwrap(), cert.m0);
        assert!(cert.spot_check(rot).unwrap());
        assert_eq!(cert.g0.eval(&q(1, 20)), Scalar::one());
        assert!(cert.g0.support().is_disjoint(&e.as_arcs().unwrap().closure()));
        assert!(cert.g1.support().is_subset(e.as_arcs().unwrap()));
        let overlapping = arcs(ArcSet::open_arc(&q(1, 20), &q(6, 10)));
        assert_eq!(birkhoff_certificate(&s, &f, &overlapping, &q(1, 2)), Err(Error::NotSeparated));
    }

    #[test]
    fn simplify_examples() {
        let s = System::golden();
        let u = arcs(ArcSet::open_arc(&q(0, 1), &q(1, 2)));
        let e = simplify_inputs(&s, &arcs(ArcSet::empty()), &u).unwrap();
        assert!(e.u0.closure().is_subset(&u).unwrap() && e.absorbed.is_none());
        let c = arcs(ArcSet::closed_arc(&q(0, 1), &q(1, 5)));
        let u = arcs(ArcSet::open_arc(&q(3, 10), &q(6, 10)));
        let r = simplify_inputs(&s, &c, &u).unwrap();
        assert!(r.u0.closure().is_subset(&u).unwrap());
        assert!(r.u0.closure().is_disjoint(&c).unwrap());
        assert!(r.u0.measure() > q(1, 5));
        assert_eq!(r.delta, q(1, 10));
        let tight = arcs(ArcSet::open_arc(&q(0, 1), &q(1, 5)));
        assert_eq!(simplify_inputs(&s, &c, &tight), Err(Error::GapNonpositive));
    }

    #[test]
    fn simplify_overlapping_sets_absorbs_part_of_c() {
        let s = System::golden();
        let c = arcs(ArcSet::closed_arc(&q(0, 1), &q(2, 5)));
        let u = arcs(ArcSet::open_arc(&q(1, 10), &q(6, 10)));
        let r = simplify_inputs(&s, &c, &u).unwrap();
        let (inner, outer) = r.absorbed.clone().unwrap();
        assert!(inner.is_closed() && outer.is_open() && inner.is_subset(&outer));
        assert!(outer.is_subset(u.as_arcs().unwrap()));
        // what is left of C is covered by the absorbed part or the reduced C
        let left = c.as_arcs().unwrap().difference(r.c.as_arcs().unwrap());
        assert!(left.is_subset(&inner));
        assert!(r.u0.closure().is_subset(&r.u).unwrap());
        assert!(r.u.is_disjoint(&Region::Arcs(outer)).unwrap());
        assert!(r.c.measure() < r.u0.measure());
    }

    #[test]
    fn counts_on_trivial_sets() {
        let s = System::golden();
        let t = s.as_rotation().unwrap().theta().clone();
        let tower = build_tower(&s, &arcs(ArcSet::closed_arc(&Scalar::zero(), &t))).unwrap();
        let all = column_counts(&tower, &Region::Arcs(ArcSet::full())).unwrap();
        for (c, l) in tower.columns.iter().zip(&all) {
            assert_eq!(*l, (0..c.height).collect::<Vec<_>>());
        }
        assert!(column_counts(&tower, &arcs(ArcSet::empty())).unwrap().iter().all(|l| l.is_empty()));
        let half = arcs(ArcSet::closed_arc(&q(0, 1), &q(1, 2)));
        assert_eq!(column_counts(&tower, &half), Err(Error::UnrefinedTower));
    }

    #[test]
    fn counts_from_labels_match_region_algebra() {
        let s = System::golden();
        let y = disjoint_base(&s, 30, &Point::Circle(Scalar::zero())).unwrap();
        let c = ArcSet::closed_arc(&q(0, 1), &q(1, 5));
        let u0 = ArcSet::open_arc(&q(3, 10), &q(6, 10));
        let rest = u0.closure().union(&c).complement().closure();
        let tower = build_tower(&s, &y).unwrap().refine(&[arcs(u0.closure()), arcs(c.clone()), arcs(rest)]).unwrap();
        assert_eq!(column_counts_from_labels(&tower, 1).unwrap(), column_counts(&tower, &arcs(c)).unwrap());
        assert_eq!(column_counts_from_labels(&tower, 0).unwrap(), column_counts(&tower, &arcs(u0)).unwrap());
    }

    #[test]
    fn empty_c_gives_zero_entry() {
        let s = System::golden();
        let u = arcs(ArcSet::open_arc(&q(0, 1), &q(1, 2)));
        let w = dynamic_comparison(&s, &arcs(ArcSet::empty()), &u).unwrap();
        assert_eq!(w.entries.len(), 1);
        assert!(verify_witness(&s, &w.c, &w.u, &w).ok());
        let full_c = arcs(ArcSet::closed_arc(&q(0, 1), &q(1, 2)));
        assert_eq!(dynamic_comparison(&s, &full_c, &u), Err(Error::GapNonpositive));
    }

    #[test]
    fn small_comparison_verifies() {
        let s = System::golden();
        let c = arcs(ArcSet::closed_arc(&q(0, 1), &q(1, 20)));
        let u = arcs(ArcSet::open_arc(&q(3, 10), &q(6, 10)));
        let w = dynamic_comparison(&s, &c, &u).unwrap();
        let r = verify_witness(&s, &c, &u, &w);
        assert!(r.ok(), "{:?}", r);
        let mut bad = w.clone();
        bad.entries.pop();
        assert!(!verify_witness(&s, &c, &u, &bad).ok());
    }

    #[test]
    fn overlapping_comparison_verifies() {
        let s = System::golden();
        let c = arcs(ArcSet::closed_arc(&q(0, 1), &q(1, 4)));
        let u = arcs(ArcSet::open_arc(&q(1, 10), &q(1, 2)));
        let w = dynamic_comparison(&s, &c, &u).unwrap();
        assert!(w.provenance.absorbed);
        assert!(verify_witness(&s, &c, &u, &w).ok());
    }

    #[test]
    fn clopen_examples() {
        let s = System::Odometer(Odometer::new(vec![2, 2, 2], 3).unwrap());
        let a = Region::Cylinders(CylinderSet::new(8, vec![0, 1]));
        let b = Region::Cylinders(CylinderSet::new(8, vec![3, 5, 6]));
        let w = clopen_comparison(&s, &a, &b).unwrap();
        let shifts: Vec<i64> = w.entries.iter().map(|e| e.shift).collect();
        assert_eq!(shifts, vec![3, 4]);
        assert!(verify_witness(&s, &a, &b, &w).ok());
        let empty = clopen_comparison(&s, &Region::Cylinders(CylinderSet::empty(8)), &b).unwrap();
        assert!(empty.is_empty() && verify_witness(&s, &empty.c, &b, &empty).ok());
        let sub = Region::Cylinders(CylinderSet::new(8, vec![3, 5]));
        let w = clopen_comparison(&s, &sub, &b).unwrap();
        assert!(w.entries.iter().all(|e| e.shift == 0));
        assert_eq!(clopen_comparison(&s, &b, &a), Err(Error::GapNonpositive));
        let mut bad = clopen_comparison(&s, &a, &b).unwrap();
        bad.entries[0].shift += 1;
        assert!(!verify_witness(&s, &a, &b, &bad).ok());
    }

    #[test]
    fn disjointness_sweep() {
        let s = |a: i64, b: i64| ArcSet::closed_arc(&q(a, 20), &q(b, 20));
        assert!(closed_sets_disjoint(&[s(0, 2), s(3, 5), s(6, 8)]));
        assert!(!closed_sets_disjoint(&[s(0, 2), s(2, 5)]));
        assert!(!closed_sets_disjoint(&[s(0, 10), s(3, 4), s(12, 13)]));
        // one owner's pieces around the seam do not clash with themselves
        assert!(closed_sets_disjoint(&[s(-2, 2), s(5, 6)]));
        assert!(!closed_sets_disjoint(&[s(18, 20), s(0, 1)]));
        assert!(!closed_sets_disjoint(&[s(0, 1), s(4, 9), s(2, 5)]));
    }
}
