//! Unions of level-n cylinders of an odometer, indexed by position on the
//! `K`-cycle the truncated adding machine runs through.

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CylinderSet {
    k: u64,
    members: Vec<u64>,
}

impl CylinderSet {
    pub fn new(k: u64, mut members: Vec<u64>) -> CylinderSet {
        members.iter_mut().for_each(|m| *m %= k);
        members.sort_unstable();
        members.dedup();
        CylinderSet { k, members }
    }

    pub fn empty(k: u64) -> CylinderSet {
        CylinderSet { k, members: Vec::new() }
    }

    pub fn full(k: u64) -> CylinderSet {
        CylinderSet { k, members: (0..k).collect() }
    }

    pub fn modulus(&self) -> u64 {
        self.k
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: u64) -> bool {
        self.members.binary_search(&(i % self.k)).is_ok()
    }

    fn zip(&self, other: &CylinderSet, f: impl Fn(bool, bool) -> bool) -> CylinderSet {
        assert_eq!(self.k, other.k, "cylinder sets at different levels");
        let (a, b) = (&self.members, &other.members);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() || j < b.len() {
            let x = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => x.min(y),
                (Some(&x), None) => x,
                (None, Some(&y)) => y,
                _ => unreachable!(),
            };
            let ia = a.get(i) == Some(&x);
            let ib = b.get(j) == Some(&x);
            if ia {
                i += 1;
            }
            if ib {
                j += 1;
            }
            if f(ia, ib) {
                out.push(x);
            }
        }
        CylinderSet { k: self.k, members: out }
    }

    pub fn union(&self, other: &CylinderSet) -> CylinderSet {
        self.zip(other, |x, y| x || y)
    }

    pub fn intersect(&self, other: &CylinderSet) -> CylinderSet {
        self.zip(other, |x, y| x && y)
    }

    pub fn difference(&self, other: &CylinderSet) -> CylinderSet {
        self.zip(other, |x, y| x && !y)
    }

    pub fn complement(&self) -> CylinderSet {
        CylinderSet::full(self.k).difference(self)
    }

    pub fn is_subset(&self, other: &CylinderSet) -> bool {
        assert_eq!(self.k, other.k, "cylinder sets at different levels");
        self.members.len() <= other.members.len() && self.members.iter().all(|m| other.members.binary_search(m).is_ok())
    }

    pub fn measure(&self) -> Scalar {
        Scalar::rational(self.members.len() as i64, self.k as i64)
    }

    /// Image under `h^n`, which moves cylinder `i` to `i + n mod K`.
    pub fn translate(&self, n: i64) -> CylinderSet {
        let k = self.k as i128;
        let shift = (n as i128).rem_euclid(k) as u64;
        CylinderSet::new(self.k, self.members.iter().map(|&m| (m + shift) % self.k).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cycle_translate() {
        let c = CylinderSet::new(4, vec![3]);
        assert_eq!(c.translate(1), CylinderSet::new(4, vec![0]));
        assert_eq!(c.translate(-3), CylinderSet::new(4, vec![0]));
    }

    #[test]
    fn measure_counts_cylinders() {
        let c = CylinderSet::new(8, vec![0, 5]);
        assert_eq!(c.measure(), Scalar::rational(1, 4));
        let d = CylinderSet::new(8, vec![5, 6]);
        assert_eq!(c.union(&d).members(), &[0, 5, 6]);
        assert_eq!(c.intersect(&d).members(), &[5]);
        assert_eq!(c.complement().len(), 6);
    }
}
