//! Finite unions of arcs on the circle `R/Z`.
//!
//! A set is stored as the cyclically ordered list of its breakpoints. Each
//! breakpoint records whether the point itself belongs to the set and whether
//! the open gap up to the next breakpoint does. A set without breakpoints is
//! either empty or the whole circle.

use std::cmp::Ordering;

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cut {
    pub at: Scalar,
    pub point: bool,
    pub after: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArcSet {
    cuts: Vec<Cut>,
    full: bool,
}

/// A connected piece of a circle set. `lo` lies in `[0,1)` and
/// `lo <= hi <= lo + 1`; the arc may run past 1. When `hi = lo + 1` the arc
/// is the whole circle (if either flag is set) or the circle minus `lo`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arc {
    pub lo: Scalar,
    pub hi: Scalar,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Arc {
    pub fn closed(lo: Scalar, hi: Scalar) -> Arc {
        Arc { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: Scalar, hi: Scalar) -> Arc {
        Arc { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn length(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Scalar {
        (&self.lo + &self.hi).div_i64(2).frac()
    }
}

/// Reduces a value into `[0,1)`.
pub fn mod1(x: &Scalar) -> Scalar {
    if !x.is_negative() && *x < Scalar::one() {
        x.clone()
    } else {
        x.frac()
    }
}

/// Circular distance `min(|x-y| mod 1, 1 - |x-y| mod 1)`.
pub fn circle_dist(x: &Scalar, y: &Scalar) -> Scalar {
    let t = mod1(&(x - y));
    let u = Scalar::one() - &t;
    t.min(u)
}

fn cmp_scalar(a: &Scalar, b: &Scalar) -> Ordering {
    a.cmp(b)
}

impl ArcSet {
    pub fn empty() -> ArcSet {
        ArcSet { cuts: Vec::new(), full: false }
    }

    pub fn full() -> ArcSet {
        ArcSet { cuts: Vec::new(), full: true }
    }

    pub fn point(x: &Scalar) -> ArcSet {
        ArcSet { cuts: vec![Cut { at: mod1(x), point: true, after: false }], full: false }
    }

    pub fn points(xs: &[Scalar]) -> ArcSet {
        let mut v: Vec<Scalar> = xs.iter().map(mod1).collect();
        v.sort();
        v.dedup();
        ArcSet { cuts: v.into_iter().map(|at| Cut { at, point: true, after: false }).collect(), full: false }
    }

    /// The arc from `lo` to `hi` (taken counterclockwise, `lo <= hi`, any
    /// real representatives) with the given endpoint flags.
    pub fn arc(lo: &Scalar, hi: &Scalar, lo_closed: bool, hi_closed: bool) -> ArcSet {
        let len = hi - lo;
        assert!(!len.is_negative(), "arc with hi < lo");
        if len.is_zero() {
            return if lo_closed && hi_closed { ArcSet::point(lo) } else { ArcSet::empty() };
        }
        let one = Scalar::one();
        if len >= one {
            if len > one || lo_closed || hi_closed {
                return ArcSet::full();
            }
            return ArcSet::point(lo).complement();
        }
        let l = mod1(lo);
        let mut h = &l + &len;
        if h >= one {
            h = h - &one;
        }
        let a = Cut { at: l, point: lo_closed, after: true };
        let b = Cut { at: h, point: hi_closed, after: false };
        let cuts = if a.at < b.at { vec![a, b] } else { vec![b, a] };
        ArcSet { cuts, full: false }
    }

    pub fn closed_arc(lo: &Scalar, hi: &Scalar) -> ArcSet {
        ArcSet::arc(lo, hi, true, true)
    }

    pub fn open_arc(lo: &Scalar, hi: &Scalar) -> ArcSet {
        ArcSet::arc(lo, hi, false, false)
    }

    pub fn from_arc(a: &Arc) -> ArcSet {
        ArcSet::arc(&a.lo, &a.hi, a.lo_closed, a.hi_closed)
    }

    /// Builds a set from breakpoints sorted strictly increasing in `[0,1)`.
    pub fn from_cuts(cuts: Vec<Cut>, full_if_empty: bool) -> ArcSet {
        debug_assert!(cuts.windows(2).all(|w| w[0].at < w[1].at));
        let mut s = ArcSet { cuts, full: full_if_empty };
        s.canonicalize();
        s
    }

    fn canonicalize(&mut self) {
        if self.cuts.is_empty() {
            return;
        }
        let n = self.cuts.len();
        let fallback = self.cuts[0].point;
        let mut keep = Vec::with_capacity(n);
        let mut before = self.cuts[n - 1].after;
        for c in self.cuts.drain(..) {
            let b = before;
            before = c.after;
            if !(c.point == b && c.after == b) {
                keep.push(c);
            }
        }
        self.cuts = keep;
        self.full = self.cuts.is_empty() && fallback;
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty() && !self.full
    }

    pub fn is_full(&self) -> bool {
        self.cuts.is_empty() && self.full
    }

    /// Membership of the gap immediately before cut `i`.
    fn before(&self, i: usize) -> bool {
        if i == 0 {
            self.cuts[self.cuts.len() - 1].after
        } else {
            self.cuts[i - 1].after
        }
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        if self.cuts.is_empty() {
            return self.full;
        }
        let x = mod1(x);
        match self.cuts.binary_search_by(|c| cmp_scalar(&c.at, &x)) {
            Ok(i) => self.cuts[i].point,
            Err(0) => self.cuts[self.cuts.len() - 1].after,
            Err(i) => self.cuts[i - 1].after,
        }
    }

    fn merge(&self, other: &ArcSet, f: impl Fn(bool, bool) -> bool) -> ArcSet {
        let (a, b) = (&self.cuts, &other.cuts);
        if a.is_empty() && b.is_empty() {
            return ArcSet { cuts: Vec::new(), full: f(self.full, other.full) };
        }
        let mut sa = a.last().map(|c| c.after).unwrap_or(self.full);
        let mut sb = b.last().map(|c| c.after).unwrap_or(other.full);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.at.cmp(&y.at),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            let at;
            let (pa, aa) = if ord != Ordering::Greater {
                let c = &a[i];
                i += 1;
                at = c.at.clone();
                sa = c.after;
                (c.point, c.after)
            } else {
                at = b[j].at.clone();
                (sa, sa)
            };
            let (pb, ab) = if ord != Ordering::Less {
                let c = &b[j];
                j += 1;
                sb = c.after;
                (c.point, c.after)
            } else {
                (sb, sb)
            };
            out.push(Cut { at, point: f(pa, pb), after: f(aa, ab) });
        }
        let mut s = ArcSet { cuts: out, full: false };
        s.canonicalize();
        s
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        self.merge(other, |x, y| x || y)
    }

    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        self.merge(other, |x, y| x && y)
    }

    pub fn difference(&self, other: &ArcSet) -> ArcSet {
        self.merge(other, |x, y| x && !y)
    }

    pub fn complement(&self) -> ArcSet {
        ArcSet {
            cuts: self.cuts.iter().map(|c| Cut { at: c.at.clone(), point: !c.point, after: !c.after }).collect(),
            full: self.cuts.is_empty() && !self.full,
        }
    }

    /// Union of many sets by pairwise reduction.
    pub fn union_all(mut sets: Vec<ArcSet>) -> ArcSet {
        if sets.is_empty() {
            return ArcSet::empty();
        }
        while sets.len() > 1 {
            let mut next = Vec::with_capacity(sets.len() / 2 + 1);
            let mut it = sets.into_iter();
            while let Some(x) = it.next() {
                match it.next() {
                    Some(y) => next.push(x.union(&y)),
                    None => next.push(x),
                }
            }
            sets = next;
        }
        sets.pop().unwrap()
    }

    pub fn is_subset(&self, other: &ArcSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &ArcSet) -> bool {
        self.intersect(other).is_empty()
    }

    pub fn closure(&self) -> ArcSet {
        self.map_points(|p, b, a| p || b || a)
    }

    pub fn interior(&self) -> ArcSet {
        self.map_points(|p, b, a| p && b && a)
    }

    fn map_points(&self, f: impl Fn(bool, bool, bool) -> bool) -> ArcSet {
        if self.cuts.is_empty() {
            return self.clone();
        }
        let cuts = (0..self.cuts.len())
            .map(|i| {
                let c = &self.cuts[i];
                Cut { at: c.at.clone(), point: f(c.point, self.before(i), c.after), after: c.after }
            })
            .collect();
        let mut s = ArcSet { cuts, full: false };
        s.canonicalize();
        s
    }

    pub fn is_closed(&self) -> bool {
        self.closure() == *self
    }

    pub fn is_open(&self) -> bool {
        self.interior() == *self
    }

    /// Boundary points: exactly the canonical breakpoints.
    pub fn boundary_points(&self) -> Vec<Scalar> {
        self.cuts.iter().map(|c| c.at.clone()).collect()
    }

    pub fn measure(&self) -> Scalar {
        if self.cuts.is_empty() {
            return if self.full { Scalar::one() } else { Scalar::zero() };
        }
        let n = self.cuts.len();
        let mut total = Scalar::zero();
        for i in 0..n {
            if self.cuts[i].after {
                let len = if i + 1 < n {
                    &self.cuts[i + 1].at - &self.cuts[i].at
                } else {
                    &self.cuts[0].at + Scalar::one() - &self.cuts[i].at
                };
                total = total + len;
            }
        }
        total
    }

    /// Image under `x -> x + s`.
    pub fn translate(&self, s: &Scalar) -> ArcSet {
        if self.cuts.is_empty() {
            return self.clone();
        }
        let s = mod1(s);
        let one = Scalar::one();
        let mut head = Vec::new();
        let mut tail = Vec::new();
        for c in &self.cuts {
            let x = &c.at + &s;
            if x >= one {
                head.push(Cut { at: x - &one, point: c.point, after: c.after });
            } else {
                tail.push(Cut { at: x, point: c.point, after: c.after });
            }
        }
        head.extend(tail);
        ArcSet { cuts: head, full: false }
    }

    /// Maximal connected pieces, ordered by `lo`.
    pub fn components(&self) -> Vec<Arc> {
        let n = self.cuts.len();
        if n == 0 {
            return if self.full { vec![Arc::closed(Scalar::zero(), Scalar::one())] } else { Vec::new() };
        }
        // element 2i is cut i, element 2i+1 the gap after it
        let m = 2 * n;
        let inside = |e: usize| if e % 2 == 0 { self.cuts[e / 2].point } else { self.cuts[e / 2].after };
        let start = (0..m).find(|&e| !inside(e)).expect("canonical set with all elements inside");
        let one = Scalar::one();
        let pos = |e: usize, wraps: bool| {
            let x = self.cuts[e / 2].at.clone();
            if wraps {
                x + &one
            } else {
                x
            }
        };
        let mut out = Vec::new();
        let mut run: Option<(Scalar, bool)> = None;
        for step in 1..=m {
            let raw = start + step;
            let e = raw % m;
            let wraps = raw >= m;
            if inside(e) {
                if run.is_none() {
                    run = Some((pos(e, wraps), e % 2 == 0));
                }
                continue;
            }
            if let Some((lo, lo_closed)) = run.take() {
                // run ended at element e-1
                let prev_raw = raw - 1;
                let pe = prev_raw % m;
                let (hi, hi_closed) = if pe % 2 == 0 {
                    (pos(pe, prev_raw >= m), true)
                } else {
                    // gap after cut pe/2 ends at the next cut, which is element e
                    (pos(e, wraps), false)
                };
                let (lo, hi) = if lo >= one { (lo - &one, hi - &one) } else { (lo, hi) };
                out.push(Arc { lo, hi, lo_closed, hi_closed });
            }
        }
        out.sort_by(|x, y| x.lo.cmp(&y.lo));
        out
    }

    /// Components split at 0 into pieces with `0 <= lo <= hi <= 1`.
    pub fn pieces(&self) -> Vec<Arc> {
        let one = Scalar::one();
        let mut out = Vec::new();
        for c in self.components() {
            if c.hi <= one {
                out.push(c);
            } else {
                out.push(Arc { lo: Scalar::zero(), hi: &c.hi - &one, lo_closed: true, hi_closed: c.hi_closed });
                out.push(Arc { lo: c.lo, hi: one.clone(), lo_closed: c.lo_closed, hi_closed: false });
            }
        }
        out.sort_by(|x, y| x.lo.cmp(&y.lo));
        out
    }

    /// Open `r`-neighbourhood of the closure.
    pub fn open_neighborhood(&self, r: &Scalar) -> ArcSet {
        self.grow(r, false)
    }

    /// Closed `r`-neighbourhood of the closure.
    pub fn closed_neighborhood(&self, r: &Scalar) -> ArcSet {
        self.grow(r, true)
    }

    fn grow(&self, r: &Scalar, closed: bool) -> ArcSet {
        let parts = self
            .closure()
            .components()
            .into_iter()
            .map(|c| ArcSet::arc(&(&c.lo - r), &(&c.hi + r), closed, closed))
            .collect();
        ArcSet::union_all(parts)
    }

    /// Shrinks every component by `r` on each side, returning the closed
    /// result. Components of length at most `2r` disappear unless exactly `2r`.
    pub fn retract_closed(&self, r: &Scalar) -> ArcSet {
        if self.is_full() {
            return self.clone();
        }
        let parts = self
            .components()
            .into_iter()
            .filter_map(|c| {
                let lo = &c.lo + r;
                let hi = &c.hi - r;
                if lo <= hi {
                    Some(ArcSet::closed_arc(&lo, &hi))
                } else {
                    None
                }
            })
            .collect();
        ArcSet::union_all(parts)
    }

    /// Distance between the closures of two sets; `None` if either is empty.
    pub fn distance(&self, other: &ArcSet) -> Option<Scalar> {
        let a = self.closure();
        let b = other.closure();
        if a.is_empty() || b.is_empty() {
            return None;
        }
        if !a.is_disjoint(&b) {
            return Some(Scalar::zero());
        }
        let mut tagged: Vec<(Arc, bool)> = a.components().into_iter().map(|c| (c, false)).collect();
        tagged.extend(b.components().into_iter().map(|c| (c, true)));
        tagged.sort_by(|x, y| x.0.lo.cmp(&y.0.lo));
        let n = tagged.len();
        let mut best: Option<Scalar> = None;
        for i in 0..n {
            let (cur, tc) = &tagged[i];
            let (next, tn) = &tagged[(i + 1) % n];
            if tc == tn {
                continue;
            }
            let gap = mod1(&(&next.lo - &cur.hi));
            best = Some(match best {
                Some(b) => b.min(gap),
                None => gap,
            });
        }
        best
    }

    /// Distance from `x` to the complement; `None` for the full circle.
    pub fn distance_to_complement(&self, x: &Scalar) -> Option<Scalar> {
        if !self.contains(x) {
            return Some(Scalar::zero());
        }
        self.cuts.iter().map(|c| circle_dist(x, &c.at)).min()
    }

    /// Smallest gap between consecutive components of the closure, measured
    /// cyclically; `None` when the closure has fewer than two components.
    pub fn min_component_gap(&self) -> Option<Scalar> {
        let comps = self.closure().components();
        if comps.len() < 2 {
            return None;
        }
        let n = comps.len();
        (0..n).map(|i| mod1(&(&comps[(i + 1) % n].lo - &comps[i].hi))).min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::rational(p, d)
    }

    /// Membership by brute force on a set described as a list of arcs.
    fn brute_contains(arcs: &[Arc], x: &Scalar) -> bool {
        arcs.iter().any(|a| {
            let mut y = mod1(x);
            if y < a.lo {
                y = y + Scalar::one();
            }
            let inside_lo = if a.lo_closed { y >= a.lo } else { y > a.lo };
            let inside_hi = if a.hi_closed { y <= a.hi } else { y < a.hi };
            inside_lo && inside_hi
        })
    }

    #[test]
    fn adjacent_merge() {
        let u = ArcSet::closed_arc(&q(0, 1), &q(1, 4)).union(&ArcSet::closed_arc(&q(1, 4), &q(1, 2)));
        assert_eq!(u, ArcSet::closed_arc(&q(0, 1), &q(1, 2)));
        let u = ArcSet::arc(&q(0, 1), &q(1, 4), true, false).union(&ArcSet::arc(&q(1, 4), &q(1, 2), true, false));
        assert_eq!(u, ArcSet::arc(&q(0, 1), &q(1, 2), true, false));
    }

    #[test]
    fn intersect_and_closure() {
        let a = ArcSet::arc(&q(0, 1), &q(1, 2), true, false);
        let b = ArcSet::open_arc(&q(1, 4), &q(3, 4));
        assert_eq!(a.intersect(&b), ArcSet::open_arc(&q(1, 4), &q(1, 2)));
        let c = ArcSet::open_arc(&q(1, 3), &q(2, 3)).closure();
        assert_eq!(c, ArcSet::closed_arc(&q(1, 3), &q(2, 3)));
        assert_eq!(ArcSet::open_arc(&q(1, 3), &q(2, 3)).boundary_points(), vec![q(1, 3), q(2, 3)]);
        assert!(ArcSet::full().boundary_points().is_empty());
    }

    #[test]
    fn wrap_around_arc() {
        let a = ArcSet::open_arc(&q(-1, 8), &q(1, 8));
        assert!(a.contains(&q(0, 1)));
        assert!(a.contains(&q(15, 16)));
        assert!(!a.contains(&q(1, 8)));
        assert_eq!(a.measure(), q(1, 4));
        let comps = a.components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].lo, q(7, 8));
        assert_eq!(comps[0].hi, q(9, 8));
        assert_eq!(a.pieces().len(), 2);
    }

    #[test]
    fn circle_minus_point() {
        let a = ArcSet::point(&q(1, 3)).complement();
        assert_eq!(a.measure(), Scalar::one());
        assert_eq!(a.components(), vec![Arc::open(q(1, 3), q(4, 3))]);
        assert!(a.closure().is_full());
        assert_eq!(a.interior(), a);
    }

    #[test]
    fn translate_golden() {
        let t = Scalar::quadratic(-1, 1, 2, 5).unwrap();
        let a = ArcSet::arc(&q(0, 1), &q(1, 4), true, false);
        let b = a.translate(&t);
        let expect = ArcSet::arc(&t, &(&t + q(1, 4)), true, false);
        assert_eq!(b, expect);
        assert!(b.contains(&q(7, 10)) && !b.contains(&q(0, 1)));
        assert_eq!(b.measure(), q(1, 4));
    }

    #[test]
    fn distances() {
        let a = ArcSet::closed_arc(&q(0, 1), &q(1, 4));
        let b = ArcSet::closed_arc(&q(1, 2), &q(3, 4));
        assert_eq!(a.distance(&b), Some(q(1, 4)));
        let c = ArcSet::closed_arc(&q(1, 2), &q(9, 10));
        assert_eq!(a.distance(&c), Some(q(1, 10)));
        assert_eq!(a.distance(&ArcSet::empty()), None);
        let u = ArcSet::open_arc(&q(-1, 4), &q(1, 4));
        assert_eq!(u.distance_to_complement(&q(0, 1)), Some(q(1, 4)));
    }

    fn arb_arc() -> impl Strategy<Value = Arc> {
        (0i64..24, 0i64..24, any::<bool>(), any::<bool>()).prop_map(|(lo, len, lc, hc)| {
            Arc { lo: q(lo, 24), hi: q(lo + len, 24), lo_closed: lc, hi_closed: hc }
        })
    }

    fn arb_set() -> impl Strategy<Value = (Vec<Arc>, ArcSet)> {
        prop::collection::vec(arb_arc(), 0..4).prop_map(|arcs| {
            let s = ArcSet::union_all(arcs.iter().map(ArcSet::from_arc).collect());
            (arcs, s)
        })
    }

    fn probes() -> Vec<Scalar> {
        (0..96).map(|i| q(i, 96)).collect()
    }

    proptest! {
        #[test]
        fn membership_matches_brute((arcs, s) in arb_set()) {
            for x in probes() {
                prop_assert_eq!(s.contains(&x), brute_contains(&arcs, &x));
            }
        }

        #[test]
        fn inclusion_exclusion((_, a) in arb_set(), (_, b) in arb_set()) {
            let lhs = a.union(&b).measure() + a.intersect(&b).measure();
            prop_assert_eq!(lhs, a.measure() + b.measure());
            prop_assert_eq!(a.complement().complement(), a.clone());
            prop_assert!(a.interior().is_subset(&a.closure().interior()));
            let bu: Vec<Scalar> = a.union(&b).boundary_points();
            let mut ab = a.boundary_points();
            ab.extend(b.boundary_points());
            prop_assert!(bu.iter().all(|p| ab.contains(p)));
        }

        #[test]
        fn components_rebuild((_, a) in arb_set(), k in 0i64..24) {
            let rebuilt = ArcSet::union_all(a.components().iter().map(ArcSet::from_arc).collect());
            prop_assert_eq!(&rebuilt, &a);
            let s = q(k, 24) + Scalar::quadratic(0, 1, 7, 2).unwrap();
            let moved = a.translate(&s);
            prop_assert_eq!(moved.measure(), a.measure());
            prop_assert_eq!(moved.translate(&(-s)), a.clone());
            prop_assert_eq!(moved.components().len(), a.components().len());
        }
    }
}
