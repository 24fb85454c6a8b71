//! Continuous piecewise-linear functions on the circle with exact breakpoints.
//!
//! A function is a non-empty list of `(x, value)` pairs with `x` strictly
//! increasing in `[0,1)`, interpolated linearly and wrapping from the last
//! breakpoint to the first.

use std::borrow::Borrow;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::regions::arcs::{mod1, ArcSet, Cut};
use crate::scalar::Scalar;
use crate::systems::CircleRotation;

/// Default breakpoint cap for Birkhoff sums, overridable through
/// `DYNCOMP_BP_CAP`.
pub const DEFAULT_BP_CAP: usize = 10_000_000;

pub fn breakpoint_cap() -> usize {
    std::env::var("DYNCOMP_BP_CAP").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BP_CAP)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlFunction {
    pts: Vec<(Scalar, Scalar)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportReport {
    pub support: ArcSet,
    pub one_set: ArcSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extrema {
    pub min: Scalar,
    pub max: Scalar,
    pub argmin: Scalar,
}

impl PlFunction {
    pub fn constant(c: Scalar) -> PlFunction {
        PlFunction { pts: vec![(Scalar::zero(), c)] }
    }

    pub fn zero() -> PlFunction {
        PlFunction::constant(Scalar::zero())
    }

    /// Validates and builds a function from breakpoints.
    pub fn from_points(pts: Vec<(Scalar, Scalar)>) -> Result<PlFunction> {
        if pts.is_empty() {
            return Err(Error::InvalidInput("function needs at least one breakpoint".into()));
        }
        let one = Scalar::one();
        if pts.iter().any(|(x, _)| x.is_negative() || *x >= one) {
            return Err(Error::InvalidInput("breakpoints must lie in [0,1)".into()));
        }
        if pts.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
        }
        Ok(PlFunction { pts })
    }

    /// Builds from unsorted points given modulo 1, merging duplicates
    /// (which must agree in value).
    fn from_unsorted(mut pts: Vec<(Scalar, Scalar)>) -> PlFunction {
        for p in pts.iter_mut() {
            p.0 = mod1(&p.0);
        }
        pts.sort_by(|a, b| a.0.cmp(&b.0));
        pts.dedup_by(|a, b| {
            if a.0 == b.0 {
                debug_assert_eq!(a.1, b.1, "conflicting values at a breakpoint");
                true
            } else {
                false
            }
        });
        PlFunction { pts }
    }

    pub fn points(&self) -> &[(Scalar, Scalar)] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn next_x(&self, i: usize) -> Scalar {
        if i + 1 < self.pts.len() {
            self.pts[i + 1].0.clone()
        } else {
            &self.pts[0].0 + Scalar::one()
        }
    }

    fn next_v(&self, i: usize) -> &Scalar {
        &self.pts[(i + 1) % self.pts.len()].1
    }

    /// Slope on the cell starting at breakpoint `i`.
    pub fn slope(&self, i: usize) -> Scalar {
        if self.pts.len() == 1 {
            return Scalar::zero();
        }
        (self.next_v(i) - &self.pts[i].1) / (self.next_x(i) - &self.pts[i].0)
    }

    /// Index of the breakpoint starting the cell that contains `x`
    /// (`x` already in `[0,1)`), and whether `x` is that breakpoint.
    fn locate(&self, x: &Scalar) -> (usize, bool) {
        match self.pts.binary_search_by(|p| p.0.cmp(x)) {
            Ok(i) => (i, true),
            Err(0) => (self.pts.len() - 1, false),
            Err(i) => (i - 1, false),
        }
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let x = mod1(x);
        let (i, exact) = self.locate(&x);
        if exact || self.pts.len() == 1 {
            return self.pts[i].1.clone();
        }
        let x0 = &self.pts[i].0;
        let dx = if x >= *x0 { &x - x0 } else { &x + Scalar::one() - x0 };
        &self.pts[i].1 + self.slope(i) * dx
    }

    /// Slope immediately to the right of `x`.
    pub fn right_slope(&self, x: &Scalar) -> Scalar {
        let (i, _) = self.locate(&mod1(x));
        self.slope(i)
    }

    /// Drops breakpoints where the slope does not change.
    pub fn simplify(&self) -> PlFunction {
        let n = self.pts.len();
        if n == 1 {
            return self.clone();
        }
        let slopes: Vec<Scalar> = (0..n).map(|i| self.slope(i)).collect();
        let keep: Vec<(Scalar, Scalar)> = (0..n)
            .filter(|&i| {
                let prev = if i == 0 { &slopes[n - 1] } else { &slopes[i - 1] };
                *prev != slopes[i]
            })
            .map(|i| self.pts[i].clone())
            .collect();
        if keep.is_empty() {
            PlFunction::constant(self.pts[0].1.clone())
        } else {
            PlFunction { pts: keep }
        }
    }

    /// `x -> f(x - s)`: breakpoints shifted by `+s`.
    pub fn shift(&self, s: &Scalar) -> PlFunction {
        let s = mod1(s);
        let one = Scalar::one();
        let mut head = Vec::new();
        let mut tail = Vec::new();
        for (x, v) in &self.pts {
            let y = x + &s;
            if y >= one {
                head.push((y - &one, v.clone()));
            } else {
                tail.push((y, v.clone()));
            }
        }
        head.extend(tail);
        PlFunction { pts: head }
    }

    /// Union of both breakpoint sets with both functions evaluated there.
    fn merged(&self, other: &PlFunction) -> Vec<(Scalar, Scalar, Scalar)> {
        let mut xs: Vec<Scalar> = self.pts.iter().chain(other.pts.iter()).map(|p| p.0.clone()).collect();
        xs.sort();
        xs.dedup();
        xs.into_iter()
            .map(|x| {
                let a = self.eval(&x);
                let b = other.eval(&x);
                (x, a, b)
            })
            .collect()
    }

    fn pointwise(&self, other: &PlFunction, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> PlFunction {
        let pts = self.merged(other).into_iter().map(|(x, a, b)| {
            let v = f(&a, &b);
            (x, v)
        });
        PlFunction { pts: pts.collect() }.simplify()
    }

    pub fn add(&self, other: &PlFunction) -> PlFunction {
        self.pointwise(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &PlFunction) -> PlFunction {
        self.pointwise(other, |a, b| a - b)
    }

    pub fn scale(&self, k: &Scalar) -> PlFunction {
        PlFunction { pts: self.pts.iter().map(|(x, v)| (x.clone(), v * k)).collect() }.simplify()
    }

    pub fn add_constant(&self, c: &Scalar) -> PlFunction {
        PlFunction { pts: self.pts.iter().map(|(x, v)| (x.clone(), v + c)).collect() }
    }

    fn lattice(&self, other: &PlFunction, take_min: bool) -> PlFunction {
        let m = self.merged(other);
        let n = m.len();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            let (x, a, b) = &m[i];
            let pick = |p: &Scalar, q: &Scalar| if (p <= q) == take_min { p.clone() } else { q.clone() };
            out.push((x.clone(), pick(a, b)));
            let (x2, a2, b2) = &m[(i + 1) % n];
            let d1 = a - b;
            let d2 = a2 - b2;
            if d1.signum() != Ordering::Equal && d2.signum() != Ordering::Equal && d1.signum() != d2.signum() {
                let span = if i + 1 < n { x2 - x } else { x2 + Scalar::one() - x };
                let t = &d1 / &(&d1 - &d2);
                let cx = x + &(&span * &t);
                let cv = a + &((a2 - a) * &t);
                out.push((mod1(&cx), cv));
            }
        }
        PlFunction::from_unsorted(out).simplify()
    }

    pub fn min(&self, other: &PlFunction) -> PlFunction {
        self.lattice(other, true)
    }

    pub fn max(&self, other: &PlFunction) -> PlFunction {
        self.lattice(other, false)
    }

    pub fn extrema(&self) -> Extrema {
        let mut min = &self.pts[0];
        let mut max = &self.pts[0].1;
        for p in &self.pts[1..] {
            if p.1 < min.1 {
                min = p;
            }
            if p.1 > *max {
                max = &p.1;
            }
        }
        Extrema { min: min.1.clone(), max: max.clone(), argmin: min.0.clone() }
    }

    /// Extrema over a closed set; `None` when the set is empty.
    pub fn extrema_on(&self, region: &ArcSet) -> Option<Extrema> {
        let r = region.closure();
        if r.is_empty() {
            return None;
        }
        if r.is_full() {
            return Some(self.extrema());
        }
        let mut cands: Vec<(Scalar, Scalar)> =
            self.pts.iter().filter(|(x, _)| r.contains(x)).cloned().collect();
        for c in r.boundary_points() {
            let v = self.eval(&c);
            cands.push((c, v));
        }
        let mut best_min = cands[0].clone();
        let mut max = cands[0].1.clone();
        for (x, v) in cands.into_iter().skip(1) {
            if v < best_min.1 || (v == best_min.1 && x < best_min.0) {
                best_min = (x, v.clone());
            }
            if v > max {
                max = v;
            }
        }
        Some(Extrema { min: best_min.1, max, argmin: best_min.0 })
    }

    pub fn integral(&self) -> Scalar {
        let n = self.pts.len();
        if n == 1 {
            return self.pts[0].1.clone();
        }
        let mut twice = Scalar::zero();
        for i in 0..n {
            let len = self.next_x(i) - &self.pts[i].0;
            twice = twice + (&self.pts[i].1 + self.next_v(i)) * len;
        }
        twice.div_i64(2)
    }

    /// Closure of `{f != 0}` and the level set `{f = 1}`.
    pub fn support_report(&self) -> SupportReport {
        SupportReport { support: self.support(), one_set: self.one_set() }
    }

    pub fn support(&self) -> ArcSet {
        let n = self.pts.len();
        if n == 1 {
            return if self.pts[0].1.is_zero() { ArcSet::empty() } else { ArcSet::full() };
        }
        let cell_in: Vec<bool> = (0..n).map(|i| !self.pts[i].1.is_zero() || !self.next_v(i).is_zero()).collect();
        let cuts = (0..n)
            .map(|i| {
                let before = cell_in[(i + n - 1) % n];
                Cut { at: self.pts[i].0.clone(), point: !self.pts[i].1.is_zero() || before || cell_in[i], after: cell_in[i] }
            })
            .collect();
        ArcSet::from_cuts(cuts, false)
    }

    pub fn one_set(&self) -> ArcSet {
        let one = Scalar::one();
        let n = self.pts.len();
        if n == 1 {
            return if self.pts[0].1 == one { ArcSet::full() } else { ArcSet::empty() };
        }
        let mut cuts = Vec::with_capacity(n);
        let mut extra = Vec::new();
        for i in 0..n {
            let v0 = &self.pts[i].1;
            let v1 = self.next_v(i);
            let flat = *v0 == one && *v1 == one;
            cuts.push(Cut { at: self.pts[i].0.clone(), point: *v0 == one, after: flat });
            if (*v0 < one && *v1 > one) || (*v0 > one && *v1 < one) {
                let t = (&one - v0) / (v1 - v0);
                let x = mod1(&(&self.pts[i].0 + (self.next_x(i) - &self.pts[i].0) * t));
                extra.push(Cut { at: x, point: true, after: false });
            }
        }
        cuts.extend(extra);
        cuts.sort_by(|a, b| a.at.cmp(&b.at));
        ArcSet::from_cuts(cuts, false)
    }

    /// Range check via breakpoint values.
    pub fn within_unit_range(&self) -> bool {
        let e = self.extrema();
        !e.min.is_negative() && e.max <= Scalar::one()
    }
}

/// `f ∘ h^{-n}`: breakpoints move by `+nθ`.
pub fn translate_fn(rot: &CircleRotation, f: &PlFunction, n: i64) -> PlFunction {
    f.shift(&rot.shift(n))
}

/// Trapezoid equal to 1 on `f` and supported strictly inside `w`. Each ramp
/// spans half of the free space on its side, where free space is bounded by
/// the boundary of `w` and by the neighbouring components of `f`.
pub fn bump(f: &ArcSet, w: &ArcSet) -> Result<PlFunction> {
    let f = f.closure();
    if f.is_empty() {
        return Ok(PlFunction::zero());
    }
    if !f.is_subset(w) {
        return Err(Error::NoGap);
    }
    if f.is_full() {
        return Ok(PlFunction::constant(Scalar::one()));
    }
    let comps = f.components();
    let n = comps.len();
    let boundary = w.boundary_points();
    let mut pts = Vec::with_capacity(4 * n);
    for (i, c) in comps.iter().enumerate() {
        let prev = &comps[(i + n - 1) % n];
        let next = &comps[(i + 1) % n];
        let mut left = mod1(&(&c.lo - &prev.hi));
        let mut right = mod1(&(&next.lo - &c.hi));
        if n == 1 {
            left = Scalar::one() - c.length();
            right = left.clone();
        }
        for b in &boundary {
            let dl = mod1(&(&c.lo - b));
            if dl < left {
                left = dl;
            }
            let dr = mod1(&(b - &c.hi));
            if dr < right {
                right = dr;
            }
        }
        if left.is_zero() || right.is_zero() {
            return Err(Error::NoGap);
        }
        let (left, right) = (left.div_i64(2), right.div_i64(2));
        pts.push((&c.lo - &left, Scalar::zero()));
        pts.push((c.lo.clone(), Scalar::one()));
        if !c.is_point() {
            pts.push((c.hi.clone(), Scalar::one()));
        }
        pts.push((&c.hi + &right, Scalar::zero()));
    }
    Ok(PlFunction::from_unsorted(pts).simplify())
}

/// Unnormalised Birkhoff sum `S_N g(x) = Σ_{j<N} g(x + jθ)`, computed by
/// sweeping the sorted pulled-back breakpoints and accumulating slope jumps.
pub fn birkhoff_sum(rot: &CircleRotation, g: &PlFunction, n: u64) -> Result<PlFunction> {
    birkhoff_sum_capped(rot, g, n, breakpoint_cap())
}

pub fn birkhoff_sum_capped(rot: &CircleRotation, g: &PlFunction, n: u64, cap: usize) -> Result<PlFunction> {
    assert!(n >= 1, "Birkhoff sum needs N >= 1");
    let k = g.pts.len();
    let count = (n as usize).saturating_mul(k);
    if count > cap {
        return Err(Error::BreakpointBudget { count, cap });
    }
    if k == 1 {
        return Ok(PlFunction::constant(g.pts[0].1.mul_i64(n as i64)));
    }
    let theta = rot.theta();
    let zero = Scalar::zero();
    let one = Scalar::one();
    let slopes: Vec<Scalar> = (0..k).map(|i| g.slope(i)).collect();
    let jumps: Vec<Scalar> = (0..k).map(|i| &slopes[i] - &slopes[(i + k - 1) % k]).collect();
    let mut items: Vec<(Scalar, usize)> = Vec::with_capacity(count);
    for (b, (x, _)) in g.pts.iter().enumerate() {
        let mut y = x.clone();
        for j in 0..n {
            if j > 0 {
                y = &y - theta;
                if y < zero {
                    y = y + &one;
                }
            }
            items.push((y.clone(), b));
        }
    }
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(Scalar, Scalar)> = Vec::with_capacity(items.len());
    for (y, b) in items {
        match merged.last_mut() {
            Some(last) if last.0 == y => last.1 = &last.1 + &jumps[b],
            _ => merged.push((y, jumps[b].clone())),
        }
    }
    merged.retain(|(_, j)| !j.is_zero());
    if merged.is_empty() {
        // all slope changes cancel, so the sum is constant
        let mut total = Scalar::zero();
        let mut x = Scalar::zero();
        for _ in 0..n {
            total = total + g.eval(&x);
            x = &x + theta;
            if x >= one {
                x = x - &one;
            }
        }
        return Ok(PlFunction::constant(total));
    }
    let y0 = merged[0].0.clone();
    let mut value = Scalar::zero();
    let mut slope = Scalar::zero();
    let mut x = y0.clone();
    for _ in 0..n {
        value = value + g.eval(&x);
        slope = slope + g.right_slope(&x);
        x = &x + theta;
        if x >= one {
            x = x - &one;
        }
    }
    let first_value = value.clone();
    let mut pts = Vec::with_capacity(merged.len());
    pts.push((y0.clone(), value.clone()));
    for w in 1..merged.len() {
        let dx = &merged[w].0 - &merged[w - 1].0;
        value = value + &slope * dx;
        slope = slope + &merged[w].1;
        pts.push((merged[w].0.clone(), value.clone()));
    }
    let closing = value + slope * (&y0 + &one - &merged[merged.len() - 1].0);
    debug_assert_eq!(closing, first_value, "Birkhoff sweep failed to close up");
    let _ = closing;
    Ok(PlFunction { pts })
}

/// Cascade `f_j = min(g_j, 1 - Σ_{i<j} f_i)`. Only earlier functions whose
/// supports meet `supp g_j` contribute, so the work stays local.
pub fn min_cascade(gs: &[PlFunction]) -> Vec<PlFunction> {
    let supports: Vec<ArcSet> = gs.iter().map(|g| g.support()).collect();
    let neighbours = overlap_lists(&supports);
    let one = PlFunction::constant(Scalar::one());
    let mut out: Vec<PlFunction> = Vec::with_capacity(gs.len());
    for (j, g) in gs.iter().enumerate() {
        if supports[j].is_empty() {
            out.push(PlFunction::zero());
            continue;
        }
        let mut s = PlFunction::zero();
        for &i in &neighbours[j] {
            if i < j {
                s = s.add(&out[i]);
            }
        }
        out.push(g.min(&one.sub(&s)));
    }
    out
}

/// `Σ f_j` by one sweep over all breakpoints, accumulating slope jumps.
pub fn sum_all<F: Borrow<PlFunction>>(fs: &[F]) -> PlFunction {
    let mut constant = Scalar::zero();
    let mut items: Vec<(&Scalar, Scalar)> = Vec::new();
    let mut live: Vec<&PlFunction> = Vec::new();
    for f in fs {
        let f = f.borrow();
        let k = f.pts.len();
        if k == 1 {
            constant = constant + &f.pts[0].1;
            continue;
        }
        let slopes: Vec<Scalar> = (0..k).map(|i| f.slope(i)).collect();
        for i in 0..k {
            items.push((&f.pts[i].0, &slopes[i] - &slopes[(i + k - 1) % k]));
        }
        live.push(f);
    }
    // equal positions are merged by addition, so their order is irrelevant
    items.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let start = items.first().map(|p| p.0);
    let mut merged: Vec<(&Scalar, Scalar)> = Vec::with_capacity(items.len());
    for (y, j) in items {
        match merged.last_mut() {
            Some(last) if last.0 == y => last.1 = &last.1 + &j,
            _ => merged.push((y, j)),
        }
    }
    merged.retain(|(_, j)| !j.is_zero());
    if merged.is_empty() {
        let x = Scalar::zero();
        return PlFunction::constant(live.iter().fold(constant, |acc, f| acc + f.eval(&x)));
    }
    // value and right slope at the first breakpoint of all, which sits on
    // each function's first breakpoint or on its wrap-around piece
    let start = start.expect("breakpoints present");
    let mut value = constant;
    let mut slope = Scalar::zero();
    for f in &live {
        let k = f.pts.len();
        if f.pts[0].0 == *start {
            value = value + &f.pts[0].1;
            slope = slope + f.slope(0);
        } else if !(f.pts[0].1.is_zero() && f.pts[k - 1].1.is_zero()) {
            value = value + f.eval(start);
            slope = slope + f.slope(k - 1);
        }
    }
    // the jumps before y0 cancel, so the slope is constant up to y0
    let y0 = merged[0].0;
    if y0 != start {
        value = value + &slope * (y0 - start);
        slope = slope + &merged[0].1;
    }
    let mut pts = Vec::with_capacity(merged.len());
    pts.push((y0.clone(), value.clone()));
    for w in 1..merged.len() {
        let dx = merged[w].0 - merged[w - 1].0;
        value = value + &slope * dx;
        slope = slope + &merged[w].1;
        pts.push((merged[w].0.clone(), value.clone()));
    }
    PlFunction { pts }.simplify()
}

/// Linear pieces `[lo, hi]` of a closed set, each tagged with an owner.
fn linear_pieces(owner: usize, set: &ArcSet, out: &mut Vec<(Scalar, Scalar, usize)>) {
    if set.is_full() {
        out.push((Scalar::zero(), Scalar::one(), owner));
        return;
    }
    let one = Scalar::one();
    for c in set.closure().components() {
        if c.hi > one {
            out.push((c.lo.clone(), one.clone(), owner));
            out.push((Scalar::zero(), &c.hi - &one, owner));
        } else {
            out.push((c.lo, c.hi, owner));
        }
    }
}

/// For every set, the indices of other sets whose closures meet it.
pub fn overlap_lists(sets: &[ArcSet]) -> Vec<Vec<usize>> {
    let mut pieces = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        if !s.is_empty() {
            linear_pieces(i, s, &mut pieces);
        }
    }
    pieces.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)));
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); sets.len()];
    for p in 0..pieces.len() {
        let (_, hi, owner) = &pieces[p];
        let mut q = p + 1;
        while q < pieces.len() && pieces[q].0 <= *hi {
            let other = pieces[q].2;
            if other != *owner {
                out[*owner].push(other);
                out[other].push(*owner);
            }
            q += 1;
        }
    }
    for v in out.iter_mut() {
        v.sort_unstable();
        v.dedup();
    }
    out
}

/// Partition of unity subordinate to `(F_j, W_j)` that sums to exactly 1 on `c`.
pub fn partition_of_unity(pairs: &[(ArcSet, ArcSet)], c: &ArcSet) -> Result<Vec<PlFunction>> {
    let cover = ArcSet::union_all(pairs.iter().map(|(f, _)| f.closure()).collect());
    if !c.closure().is_subset(&cover) {
        return Err(Error::CoverFailure);
    }
    let gs = pairs.iter().map(|(f, w)| bump(f, w)).collect::<Result<Vec<_>>>()?;
    Ok(min_cascade(&gs))
}

/// Extrema of `Σ f_j` over a closed set; `None` when the set is empty.
pub fn sum_extrema_on<F: Borrow<PlFunction>>(fs: &[F], region: &ArcSet) -> Option<Extrema> {
    sum_all(fs).extrema_on(&region.closure())
}

/// Locally constant function on the level-n cylinders of an odometer,
/// stored sparsely as `(cylinder, value)` pairs with non-zero values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CylinderFunction {
    pub modulus: u64,
    pub values: Vec<(u64, Scalar)>,
}

impl CylinderFunction {
    pub fn indicator(modulus: u64, cylinders: &[u64]) -> CylinderFunction {
        let mut idx: Vec<u64> = cylinders.to_vec();
        idx.sort_unstable();
        idx.dedup();
        CylinderFunction { modulus, values: idx.into_iter().map(|i| (i, Scalar::one())).collect() }
    }

    pub fn value(&self, i: u64) -> Scalar {
        match self.values.binary_search_by(|p| p.0.cmp(&i)) {
            Ok(k) => self.values[k].1.clone(),
            Err(_) => Scalar::zero(),
        }
    }

    pub fn support(&self) -> Vec<u64> {
        self.values.iter().filter(|(_, v)| !v.is_zero()).map(|(i, _)| *i).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::rational(p, d)
    }

    fn tent(center: Scalar, half: Scalar) -> PlFunction {
        bump(&ArcSet::point(&center), &ArcSet::open_arc(&(&center - half.mul_i64(2)), &(&center + half.mul_i64(2))))
            .unwrap()
    }

    #[test]
    fn trapezoid_shape() {
        let f = bump(&ArcSet::closed_arc(&q(1, 4), &q(1, 2)), &ArcSet::open_arc(&q(1, 8), &q(5, 8))).unwrap();
        assert_eq!(
            f.points(),
            &[(q(3, 16), q(0, 1)), (q(1, 4), q(1, 1)), (q(1, 2), q(1, 1)), (q(9, 16), q(0, 1))]
        );
        assert_eq!(f.support(), ArcSet::closed_arc(&q(3, 16), &q(9, 16)));
        assert_eq!(f.one_set(), ArcSet::closed_arc(&q(1, 4), &q(1, 2)));
        assert!(f.support().is_subset(&ArcSet::open_arc(&q(1, 8), &q(5, 8))));
    }

    #[test]
    fn degenerate_bumps() {
        assert_eq!(bump(&ArcSet::empty(), &ArcSet::open_arc(&q(0, 1), &q(1, 2))).unwrap(), PlFunction::zero());
        let t = bump(&ArcSet::point(&q(0, 1)), &ArcSet::open_arc(&q(-1, 8), &q(1, 8))).unwrap();
        assert_eq!(t.eval(&q(0, 1)), Scalar::one());
        assert_eq!(t.eval(&q(1, 32)), q(1, 2));
        assert_eq!(t.extrema().max, Scalar::one());
        assert_eq!(t.extrema().min, Scalar::zero());
        assert_eq!(
            bump(&ArcSet::closed_arc(&q(0, 1), &q(1, 2)), &ArcSet::open_arc(&q(0, 1), &q(1, 2))),
            Err(Error::NoGap)
        );
    }

    #[test]
    fn integrals() {
        assert_eq!(PlFunction::constant(Scalar::one()).integral(), Scalar::one());
        // base length 1/4, height 1
        let t = tent(q(1, 2), q(1, 8));
        assert_eq!(t.integral(), q(1, 8));
    }

    #[test]
    fn lattice_identities() {
        let f = tent(q(1, 3), q(1, 10));
        assert_eq!(f.min(&f), f);
        assert_eq!(f.add(&PlFunction::zero()), f);
        let g = tent(q(2, 5), q(1, 10));
        let lo = f.min(&g);
        let hi = f.max(&g);
        assert_eq!(lo.add(&hi), f.add(&g));
    }

    #[test]
    fn birkhoff_small_cases() {
        let rot = CircleRotation::golden();
        let g = tent(q(1, 3), q(1, 10));
        assert_eq!(birkhoff_sum(&rot, &g, 1).unwrap(), g);
        let c = PlFunction::constant(Scalar::one());
        assert_eq!(birkhoff_sum(&rot, &c, 5).unwrap(), PlFunction::constant(q(5, 1)));
        assert!(matches!(birkhoff_sum_capped(&rot, &g, 100, 10), Err(Error::BreakpointBudget { .. })));
    }

    #[test]
    fn birkhoff_cocycle() {
        let rot = CircleRotation::golden();
        let g = bump(&ArcSet::closed_arc(&q(1, 5), &q(1, 3)), &ArcSet::open_arc(&q(1, 10), &q(1, 2))).unwrap();
        let s7 = birkhoff_sum(&rot, &g, 7).unwrap();
        let s3 = birkhoff_sum(&rot, &g, 3).unwrap();
        let s4 = birkhoff_sum(&rot, &g, 4).unwrap();
        // S_7(x) = S_3(x) + S_4(x + 3θ), and x -> S_4(x + 3θ) is S_4 shifted by -3θ
        let rhs = s3.add(&translate_fn(&rot, &s4, -3));
        assert_eq!(s7.simplify(), rhs.simplify());
    }

    #[test]
    fn birkhoff_minimum_approaches_integral() {
        let rot = CircleRotation::golden();
        let g1 = bump(&ArcSet::closed_arc(&q(3, 10), &q(1, 2)), &ArcSet::open_arc(&q(1, 4), &q(6, 10))).unwrap();
        let g0 = bump(&ArcSet::closed_arc(&q(0, 1), &q(1, 10)), &ArcSet::open_arc(&q(-1, 10), &q(2, 10))).unwrap();
        let g = g1.sub(&g0);
        let ig = g.integral().to_f64();
        let m10 = birkhoff_sum(&rot, &g, 10).unwrap().extrema().min.to_f64() / 10.0;
        let m100 = birkhoff_sum(&rot, &g, 100).unwrap().extrema().min.to_f64() / 100.0;
        assert!(m10 <= ig && m100 <= ig);
        assert!((ig - m100) < (ig - m10));
    }

    #[test]
    fn translate_support_commutes() {
        let rot = CircleRotation::golden();
        let f = bump(&ArcSet::closed_arc(&q(1, 7), &q(2, 7)), &ArcSet::open_arc(&q(1, 14), &q(5, 14))).unwrap();
        let moved = translate_fn(&rot, &f, 7);
        assert_eq!(moved.support(), f.support().translate(&rot.shift(7)));
        assert_eq!(moved.integral(), f.integral());
    }

    #[test]
    fn partition_examples() {
        let f = ArcSet::closed_arc(&q(1, 4), &q(1, 2));
        let w = ArcSet::open_arc(&q(1, 8), &q(5, 8));
        let out = partition_of_unity(&[(f.clone(), w.clone())], &f).unwrap();
        assert_eq!(out, vec![bump(&f, &w).unwrap()]);
        let pairs = vec![
            (ArcSet::closed_arc(&q(0, 1), &q(3, 10)), ArcSet::open_arc(&q(-1, 10), &q(4, 10))),
            (ArcSet::closed_arc(&q(2, 10), &q(1, 2)), ArcSet::open_arc(&q(1, 10), &q(6, 10))),
        ];
        let c = ArcSet::closed_arc(&q(0, 1), &q(1, 2));
        let out = partition_of_unity(&pairs, &c).unwrap();
        let sum = out[0].add(&out[1]);
        let e = sum.extrema_on(&c).unwrap();
        assert_eq!((e.min, e.max), (Scalar::one(), Scalar::one()));
        let e2 = sum_extrema_on(&out, &c).unwrap();
        assert_eq!((e2.min, e2.max), (Scalar::one(), Scalar::one()));
        assert!(partition_of_unity(&pairs, &ArcSet::closed_arc(&q(0, 1), &q(3, 4))).is_err());
        let empty = partition_of_unity(&pairs, &ArcSet::empty()).unwrap();
        assert_eq!(empty.len(), 2);
    }

    fn arb_fn() -> impl Strategy<Value = PlFunction> {
        prop::collection::btree_map(0i64..60, -6i64..7, 1..8).prop_map(|m| {
            PlFunction::from_points(m.into_iter().map(|(x, v)| (q(x, 60), q(v, 3))).collect()).unwrap()
        })
    }

    fn arb_bump() -> impl Strategy<Value = PlFunction> {
        (0i64..40, 0i64..6, 1i64..6).prop_map(|(lo, len, gap)| {
            let f = ArcSet::closed_arc(&q(lo, 40), &q(lo + len, 40));
            let w = ArcSet::open_arc(&q(lo - gap, 40), &q(lo + len + gap, 40));
            bump(&f, &w).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sweep_sum_matches_pairwise(fs in prop::collection::vec(arb_fn(), 0..6), bs in prop::collection::vec(arb_bump(), 0..6)) {
            let all: Vec<PlFunction> = fs.into_iter().chain(bs).collect();
            let folded = all.iter().fold(PlFunction::zero(), |acc, f| acc.add(f));
            prop_assert_eq!(sum_all(&all), folded);
        }

        #[test]
        fn extrema_match_sampling(f in arb_fn()) {
            let e = f.extrema();
            let mut smin = f64::INFINITY;
            let mut smax = f64::NEG_INFINITY;
            for i in 0..1000 {
                let v = f.eval(&q(i, 1000)).to_f64();
                smin = smin.min(v);
                smax = smax.max(v);
            }
            // slopes are at most 60·4, so sampling at step 1/1000 errs by < 0.25
            prop_assert!(e.min.to_f64() <= smin + 1e-12 && smin - e.min.to_f64() < 0.25);
            prop_assert!(e.max.to_f64() >= smax - 1e-12 && e.max.to_f64() - smax < 0.25);
        }

        #[test]
        fn integral_linear(f in arb_fn(), g in arb_fn(), n in -20i64..20) {
            prop_assert_eq!(f.add(&g).integral(), f.integral() + g.integral());
            let rot = CircleRotation::golden();
            prop_assert_eq!(translate_fn(&rot, &f, n).integral(), f.integral());
        }

        #[test]
        fn lattice_pointwise(f in arb_fn(), g in arb_fn()) {
            let lo = f.min(&g);
            let hi = f.max(&g);
            for i in 0..120 {
                let x = q(i, 120);
                let (a, b) = (f.eval(&x), g.eval(&x));
                prop_assert_eq!(lo.eval(&x), a.clone().min(b.clone()));
                prop_assert_eq!(hi.eval(&x), a.max(b));
            }
        }

        #[test]
        fn birkhoff_matches_orbit_sums(g in arb_fn(), n in 1u64..50, xs in prop::collection::vec(0i64..997, 2)) {
            let rot = CircleRotation::golden();
            let s = birkhoff_sum(&rot, &g, n).unwrap();
            for x in xs {
                let x = q(x, 997);
                let mut direct = Scalar::zero();
                for j in 0..n as i64 {
                    direct = direct + g.eval(&rot.apply(&x, j));
                }
                prop_assert_eq!(s.eval(&x), direct);
            }
        }

        #[test]
        fn cascade_prefix_identity(gs in prop::collection::vec(arb_bump(), 1..6)) {
            let fs = min_cascade(&gs);
            let one = PlFunction::constant(Scalar::one());
            let mut fsum = PlFunction::zero();
            let mut gsum = PlFunction::zero();
            for (f, g) in fs.iter().zip(&gs) {
                prop_assert!(f.support().is_subset(&g.support()));
                prop_assert!(f.within_unit_range());
                fsum = fsum.add(f);
                gsum = gsum.add(g);
                prop_assert_eq!(fsum.simplify(), gsum.min(&one).simplify());
            }
        }
    }
}
