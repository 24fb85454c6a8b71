//! Finite unions of boxes on the torus `(R/Z)^d`, stored as a boolean grid.
//!
//! Each axis carries a sorted list of breakpoints; with `m` breakpoints the
//! axis splits into `2m` cells alternating point, open gap, point, ... (one
//! whole-circle cell when `m = 0`). A set is a boolean over the product cells.

use crate::regions::arcs::{mod1, ArcSet};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoxSet {
    axes: Vec<Vec<Scalar>>,
    cells: Vec<bool>,
}

fn axis_cells(cuts: &[Scalar]) -> usize {
    if cuts.is_empty() {
        1
    } else {
        2 * cuts.len()
    }
}

/// For each cell of the refined axis `fine`, the index of the cell of
/// `coarse` containing it. `coarse` must be a subset of `fine`.
fn refine_map(coarse: &[Scalar], fine: &[Scalar]) -> Vec<usize> {
    if coarse.is_empty() {
        return vec![0; axis_cells(fine)];
    }
    let m = coarse.len();
    let mut out = Vec::with_capacity(2 * fine.len());
    // gap state before the first fine cut is the last coarse gap
    let mut j = 0usize;
    let mut current_gap = 2 * m - 1;
    for x in fine {
        if j < m && coarse[j] == *x {
            out.push(2 * j);
            current_gap = 2 * j + 1;
            j += 1;
        } else {
            out.push(current_gap);
        }
        out.push(current_gap);
    }
    out
}

fn merge_sorted(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut v: Vec<Scalar> = a.iter().chain(b.iter()).cloned().collect();
    v.sort();
    v.dedup();
    v
}

impl BoxSet {
    pub fn empty(dims: usize) -> BoxSet {
        BoxSet { axes: vec![Vec::new(); dims], cells: vec![false] }
    }

    pub fn full(dims: usize) -> BoxSet {
        BoxSet { axes: vec![Vec::new(); dims], cells: vec![true] }
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    /// Product of one-dimensional sets.
    pub fn product(factors: &[ArcSet]) -> BoxSet {
        let axes: Vec<Vec<Scalar>> = factors.iter().map(|f| f.boundary_points()).collect();
        let shape: Vec<usize> = axes.iter().map(|a| axis_cells(a)).collect();
        let per_axis: Vec<Vec<bool>> = factors
            .iter()
            .zip(&axes)
            .map(|(f, cuts)| {
                if cuts.is_empty() {
                    vec![f.is_full()]
                } else {
                    let mut v = Vec::with_capacity(2 * cuts.len());
                    for c in f.cuts() {
                        v.push(c.point);
                        v.push(c.after);
                    }
                    v
                }
            })
            .collect();
        let total: usize = shape.iter().product();
        let mut cells = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = unflatten(flat, &shape);
            cells.push(idx.iter().enumerate().all(|(i, &k)| per_axis[i][k]));
        }
        let mut s = BoxSet { axes, cells };
        s.canonicalize();
        s
    }

    fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| axis_cells(a)).collect()
    }

    fn refine(&self, axes: &[Vec<Scalar>]) -> Vec<bool> {
        let maps: Vec<Vec<usize>> = self.axes.iter().zip(axes).map(|(c, f)| refine_map(c, f)).collect();
        let shape: Vec<usize> = axes.iter().map(|a| axis_cells(a)).collect();
        let old_shape = self.shape();
        let total: usize = shape.iter().product();
        (0..total)
            .map(|flat| {
                let idx = unflatten(flat, &shape);
                let old: Vec<usize> = idx.iter().enumerate().map(|(i, &k)| maps[i][k]).collect();
                self.cells[flatten(&old, &old_shape)]
            })
            .collect()
    }

    fn combine(&self, other: &BoxSet, f: impl Fn(bool, bool) -> bool) -> BoxSet {
        assert_eq!(self.dims(), other.dims(), "dimension mismatch");
        let axes: Vec<Vec<Scalar>> = self.axes.iter().zip(&other.axes).map(|(a, b)| merge_sorted(a, b)).collect();
        let x = self.refine(&axes);
        let y = other.refine(&axes);
        let cells = x.iter().zip(&y).map(|(&p, &q)| f(p, q)).collect();
        let mut s = BoxSet { axes, cells };
        s.canonicalize();
        s
    }

    pub fn union(&self, other: &BoxSet) -> BoxSet {
        self.combine(other, |p, q| p || q)
    }

    pub fn intersect(&self, other: &BoxSet) -> BoxSet {
        self.combine(other, |p, q| p && q)
    }

    pub fn difference(&self, other: &BoxSet) -> BoxSet {
        self.combine(other, |p, q| p && !q)
    }

    pub fn complement(&self) -> BoxSet {
        BoxSet { axes: self.axes.clone(), cells: self.cells.iter().map(|c| !c).collect() }
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn is_subset(&self, other: &BoxSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Removes breakpoints whose three adjacent slices agree everywhere.
    fn canonicalize(&mut self) {
        loop {
            let mut changed = false;
            for axis in 0..self.dims() {
                let m = self.axes[axis].len();
                let mut t = 0;
                while t < self.axes[axis].len() {
                    if self.removable(axis, t) {
                        self.remove_cut(axis, t);
                        changed = true;
                    } else {
                        t += 1;
                    }
                }
                let _ = m;
            }
            if !changed {
                break;
            }
        }
        if self.axes.iter().all(|a| a.is_empty()) {
            debug_assert_eq!(self.cells.len(), 1);
        }
    }

    fn removable(&self, axis: usize, t: usize) -> bool {
        let shape = self.shape();
        let m = self.axes[axis].len();
        let before = if t == 0 { 2 * m - 1 } else { 2 * t - 1 };
        let point = 2 * t;
        let after = 2 * t + 1;
        let total: usize = shape.iter().product();
        for flat in 0..total {
            let idx = unflatten(flat, &shape);
            if idx[axis] != point {
                continue;
            }
            let mut i2 = idx.clone();
            let p = self.cells[flat];
            i2[axis] = before;
            let b = self.cells[flatten(&i2, &shape)];
            i2[axis] = after;
            let a = self.cells[flatten(&i2, &shape)];
            if !(p == b && b == a) {
                return false;
            }
        }
        true
    }

    fn remove_cut(&mut self, axis: usize, t: usize) {
        let mut axes = self.axes.clone();
        axes[axis].remove(t);
        // every new cell maps to an old cell with identical value
        let old_m = self.axes[axis].len();
        let new_shape: Vec<usize> = axes.iter().map(|a| axis_cells(a)).collect();
        let old_shape = self.shape();
        let total: usize = new_shape.iter().product();
        let cells = (0..total)
            .map(|flat| {
                let mut idx = unflatten(flat, &new_shape);
                let k = idx[axis];
                idx[axis] = if old_m == 1 {
                    1
                } else if k < 2 * t {
                    k
                } else {
                    k + 2
                };
                self.cells[flatten(&idx, &old_shape)]
            })
            .collect();
        self.axes = axes;
        self.cells = cells;
    }

    fn star_closure(&self, want_all: bool) -> BoxSet {
        let shape = self.shape();
        let total: usize = shape.iter().product();
        let mut cells = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = unflatten(flat, &shape);
            let options: Vec<Vec<usize>> = idx
                .iter()
                .enumerate()
                .map(|(axis, &k)| {
                    let m = self.axes[axis].len();
                    if m == 0 || k % 2 == 1 {
                        vec![k]
                    } else {
                        let before = if k == 0 { 2 * m - 1 } else { k - 1 };
                        vec![k, before, k + 1]
                    }
                })
                .collect();
            let mut acc = want_all;
            for combo in product_iter(&options) {
                let v = self.cells[flatten(&combo, &shape)];
                if want_all {
                    acc &= v;
                } else {
                    acc |= v;
                }
            }
            cells.push(acc);
        }
        let mut s = BoxSet { axes: self.axes.clone(), cells };
        s.canonicalize();
        s
    }

    pub fn closure(&self) -> BoxSet {
        self.star_closure(false)
    }

    pub fn interior(&self) -> BoxSet {
        self.star_closure(true)
    }

    pub fn boundary(&self) -> BoxSet {
        self.closure().difference(&self.interior())
    }

    /// Axis-aligned faces `(axis, coordinate)` met by the boundary.
    pub fn faces(&self) -> Vec<(usize, Scalar)> {
        let b = self.boundary();
        let shape = b.shape();
        let total: usize = shape.iter().product();
        let mut out = Vec::new();
        for axis in 0..b.dims() {
            for (t, x) in b.axes[axis].iter().enumerate() {
                let hit = (0..total).any(|flat| b.cells[flat] && unflatten(flat, &shape)[axis] == 2 * t);
                if hit {
                    out.push((axis, x.clone()));
                }
            }
        }
        out
    }

    /// Breakpoint coordinates on one axis.
    pub fn axis_points(&self, axis: usize) -> &[Scalar] {
        &self.axes[axis]
    }

    fn cell_length(&self, axis: usize, k: usize) -> Scalar {
        let cuts = &self.axes[axis];
        if cuts.is_empty() {
            return Scalar::one();
        }
        if k % 2 == 0 {
            return Scalar::zero();
        }
        let t = k / 2;
        if t + 1 < cuts.len() {
            &cuts[t + 1] - &cuts[t]
        } else {
            &cuts[0] + Scalar::one() - &cuts[t]
        }
    }

    pub fn measure(&self) -> Scalar {
        let shape = self.shape();
        let mut total = Scalar::zero();
        for (flat, &inside) in self.cells.iter().enumerate() {
            if !inside {
                continue;
            }
            let idx = unflatten(flat, &shape);
            let mut vol = Scalar::one();
            for (axis, &k) in idx.iter().enumerate() {
                vol = vol * self.cell_length(axis, k);
                if vol.is_zero() {
                    break;
                }
            }
            total = total + vol;
        }
        total
    }

    fn cell_of(&self, axis: usize, x: &Scalar) -> usize {
        let cuts = &self.axes[axis];
        if cuts.is_empty() {
            return 0;
        }
        match cuts.binary_search(x) {
            Ok(t) => 2 * t,
            Err(0) => 2 * cuts.len() - 1,
            Err(t) => 2 * (t - 1) + 1,
        }
    }

    pub fn contains(&self, p: &[Scalar]) -> bool {
        let idx: Vec<usize> = p.iter().enumerate().map(|(axis, x)| self.cell_of(axis, &mod1(x))).collect();
        self.cells[flatten(&idx, &self.shape())]
    }

    /// Image under translation by the vector `s`.
    pub fn translate(&self, s: &[Scalar]) -> BoxSet {
        let one = Scalar::one();
        let mut axes = Vec::with_capacity(self.dims());
        let mut rot = Vec::with_capacity(self.dims());
        for (cuts, sh) in self.axes.iter().zip(s) {
            let sh = mod1(sh);
            let moved: Vec<Scalar> = cuts.iter().map(|x| x + &sh).collect();
            let wrapped = moved.iter().filter(|x| **x >= one).count();
            let k = cuts.len() - wrapped;
            let mut v: Vec<Scalar> = moved[k..].iter().map(|x| x - &one).collect();
            v.extend(moved[..k].iter().cloned());
            axes.push(v);
            rot.push(k);
        }
        let shape: Vec<usize> = axes.iter().map(|a| axis_cells(a)).collect();
        let total: usize = shape.iter().product();
        let cells = (0..total)
            .map(|flat| {
                let idx = unflatten(flat, &shape);
                let old: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .map(|(axis, &k)| {
                        let n = shape[axis];
                        if n == 1 {
                            0
                        } else {
                            (k + 2 * rot[axis]) % n
                        }
                    })
                    .collect();
                self.cells[flatten(&old, &shape)]
            })
            .collect();
        BoxSet { axes, cells }
    }

    /// The member cells as products of one-dimensional closed or open arcs,
    /// each described per axis by a one-dimensional set.
    pub fn cell_sets(&self) -> Vec<Vec<ArcSet>> {
        let shape = self.shape();
        let mut out = Vec::new();
        for (flat, &inside) in self.cells.iter().enumerate() {
            if !inside {
                continue;
            }
            let idx = unflatten(flat, &shape);
            let factors = idx
                .iter()
                .enumerate()
                .map(|(axis, &k)| {
                    let cuts = &self.axes[axis];
                    if cuts.is_empty() {
                        ArcSet::full()
                    } else if k % 2 == 0 {
                        ArcSet::point(&cuts[k / 2])
                    } else {
                        let t = k / 2;
                        let lo = &cuts[t];
                        let hi = if t + 1 < cuts.len() { cuts[t + 1].clone() } else { &cuts[0] + Scalar::one() };
                        if cuts.len() == 1 {
                            ArcSet::point(lo).complement()
                        } else {
                            ArcSet::open_arc(lo, &hi)
                        }
                    }
                })
                .collect();
            out.push(factors);
        }
        out
    }
}

fn flatten(idx: &[usize], shape: &[usize]) -> usize {
    let mut f = 0;
    for (i, &k) in idx.iter().enumerate() {
        f = f * shape[i] + k;
    }
    f
}

fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for i in (0..shape.len()).rev() {
        idx[i] = flat % shape[i];
        flat /= shape[i];
    }
    idx
}

fn product_iter(options: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for prefix in &acc {
            for &o in opts {
                let mut p = prefix.clone();
                p.push(o);
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::rational(p, d)
    }

    fn closed_box(lo: &[(i64, i64)]) -> BoxSet {
        BoxSet::product(&lo.iter().map(|&(a, b)| ArcSet::closed_arc(&q(a, 8), &q(b, 8))).collect::<Vec<_>>())
    }

    #[test]
    fn square_measure_and_faces() {
        let b = closed_box(&[(0, 4), (0, 4)]);
        assert_eq!(b.measure(), q(1, 4));
        assert_eq!(b.faces().len(), 4);
        assert!(b.contains(&[q(1, 2), q(0, 1)]));
        assert!(!b.contains(&[q(5, 8), q(0, 1)]));
        assert_eq!(b.interior().measure(), q(1, 4));
        assert_eq!(b.interior().closure(), b);
    }

    #[test]
    fn adjacent_boxes_merge() {
        let a = closed_box(&[(0, 2), (0, 4)]);
        let b = closed_box(&[(2, 4), (0, 4)]);
        assert_eq!(a.union(&b), closed_box(&[(0, 4), (0, 4)]));
        assert!(BoxSet::full(2).faces().is_empty());
    }

    #[test]
    fn translation_wraps() {
        let b = closed_box(&[(0, 4), (2, 6)]);
        let t = b.translate(&[q(3, 4), q(1, 2)]);
        assert!(t.contains(&[q(7, 8), q(1, 8)]));
        assert!(t.contains(&[q(1, 8), q(7, 8)]));
        assert_eq!(t.measure(), b.measure());
        assert_eq!(t.translate(&[q(1, 4), q(1, 2)]), b);
    }

    fn arb_box(dims: usize) -> impl Strategy<Value = BoxSet> {
        prop::collection::vec((0i64..8, 0i64..8, any::<bool>()), dims).prop_map(|spec| {
            BoxSet::product(
                &spec
                    .iter()
                    .map(|&(lo, len, closed)| ArcSet::arc(&q(lo, 8), &q(lo + len, 8), closed, closed))
                    .collect::<Vec<_>>(),
            )
        })
    }

    proptest! {
        #[test]
        fn lattice_laws(a in arb_box(2), b in arb_box(2), c in arb_box(2)) {
            let u = a.union(&b).union(&c);
            prop_assert_eq!(&u, &a.union(&b.union(&c)));
            prop_assert_eq!(a.union(&b).measure() + a.intersect(&b).measure(), a.measure() + b.measure());
            prop_assert_eq!(a.complement().complement(), a.clone());
            prop_assert!(a.interior().is_subset(&a));
            prop_assert!(a.is_subset(&a.closure()));
            prop_assert_eq!(a.closure().closure(), a.closure());
            for x in 0..16 {
                for y in 0..16 {
                    let p = [q(x, 16), q(y, 16)];
                    prop_assert_eq!(u.contains(&p), a.contains(&p) || b.contains(&p) || c.contains(&p));
                }
            }
        }

        #[test]
        fn closure_by_sampling(a in arb_box(2)) {
            // a grid point is in the closure iff some nearby sample is in the set
            let cl = a.closure();
            for x in 0..8 {
                for y in 0..8 {
                    let p = [q(x, 8), q(y, 8)];
                    let near = [-1i64, 0, 1].iter().any(|&dx| [-1i64, 0, 1].iter().any(|&dy| {
                        a.contains(&[q(16 * x + dx, 128), q(16 * y + dy, 128)])
                    }));
                    prop_assert_eq!(cl.contains(&p), near);
                }
            }
        }
    }
}
