//! Rokhlin towers built from first-return times.
//!
//! A tower is a list of columns `(Y_k, n_k)`. The levels `h^j(Y_k)` for
//! `j < n_k` are derived on demand; only their interiors are required to be
//! disjoint, closures may share boundary points.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::regions::arcs::{mod1, ArcSet};
use crate::regions::cylinders::CylinderSet;
use crate::regions::{translate_region, Region};
use crate::scalar::Scalar;
use crate::systems::{Point, System};

/// Return times above this bound abort the first-return sweep.
pub const RETURN_GUARD: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub base: Region,
    pub height: u64,
    /// Set when the base has empty interior: such columns carry no open
    /// levels and only record return times of isolated base points.
    pub degenerate: bool,
    /// After refinement, the index of the partition element containing each
    /// open level. Empty for unrefined towers.
    pub labels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RokhlinTower {
    pub system: System,
    pub base: Region,
    pub columns: Vec<Column>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerReport {
    pub open_levels_disjoint: bool,
    pub covers_base: bool,
    pub tiles: bool,
    pub kac_sum: Scalar,
}

impl TowerReport {
    pub fn ok(&self) -> bool {
        self.open_levels_disjoint && self.covers_base && self.tiles && self.kac_sum == Scalar::one()
    }
}

/// Partition of a closed set `y` by first-return time, as `(cell, r)` pairs
/// in increasing `r`.
pub fn first_return(system: &System, y: &Region) -> Result<Vec<(Region, u64)>> {
    if !y.fits(system) {
        return Err(Error::MixedAmbient);
    }
    if let System::Torus(_) = system {
        // cell volumes mix the quadratic fields of different axes
        return Err(Error::Unsupported("return-time towers on the torus"));
    }
    if !y.is_closed() || y.interior().is_empty() {
        return Err(Error::InvalidInput("return-time base must be closed with non-empty interior".into()));
    }
    let mut out = Vec::new();
    let mut rest = y.clone();
    let mut n: u64 = 1;
    loop {
        let back = translate_region(system, y, -(n as i64))?;
        let cell = rest.intersect(&back)?;
        if !cell.is_empty() {
            rest = rest.difference(&cell)?;
            out.push((cell, n));
            if rest.is_empty() {
                return Ok(out);
            }
        }
        n += 1;
        if n > RETURN_GUARD {
            return Err(Error::NonTermination(RETURN_GUARD));
        }
    }
}

fn leftmost(r: &Region) -> Vec<Scalar> {
    match r {
        Region::Arcs(a) => a.components().first().map(|c| vec![c.lo.clone()]).unwrap_or_default(),
        Region::Cylinders(c) => c.members().first().map(|&i| vec![Scalar::int(i as i64)]).unwrap_or_default(),
        Region::Boxes(b) => (0..b.dims()).map(|i| b.axis_points(i).first().cloned().unwrap_or_else(Scalar::zero)).collect(),
    }
}

fn sort_columns(cols: &mut [Column]) {
    cols.sort_by(|a, b| {
        a.height
            .cmp(&b.height)
            .then(a.degenerate.cmp(&b.degenerate))
            .then_with(|| leftmost(&a.base).cmp(&leftmost(&b.base)))
    });
}

/// Tower over `y` whose columns are the closures of the interiors of the
/// return-time cells. Base points left uncovered by those closures become
/// degenerate columns.
pub fn build_tower(system: &System, y: &Region) -> Result<RokhlinTower> {
    let cells = first_return(system, y)?;
    let mut columns = Vec::new();
    let mut covered = Region::empty_for(system);
    for (cell, n) in &cells {
        let int = cell.interior();
        if !int.is_empty() {
            let base = int.closure();
            covered = covered.union(&base)?;
            columns.push(Column { base, height: *n, degenerate: false, labels: Vec::new() });
        }
    }
    let leftover = y.difference(&covered)?;
    if !leftover.is_empty() {
        for (cell, n) in &cells {
            let d = cell.intersect(&leftover)?;
            if !d.is_empty() {
                columns.push(Column { base: d, height: *n, degenerate: true, labels: Vec::new() });
            }
        }
    }
    sort_columns(&mut columns);
    Ok(RokhlinTower { system: system.clone(), base: y.clone(), columns })
}

fn check_partition(system: &System, partition: &[Region]) -> Result<()> {
    if partition.is_empty() {
        return Err(Error::InvalidPartition("empty partition".into()));
    }
    let mut union = Region::empty_for(system);
    for p in partition {
        if !p.fits(system) {
            return Err(Error::MixedAmbient);
        }
        union = union.union(p)?;
    }
    if union != Region::full_for(system) {
        return Err(Error::InvalidPartition("sets do not cover the space".into()));
    }
    let interiors: Vec<Region> = partition.iter().map(|p| p.interior()).collect();
    for i in 0..interiors.len() {
        for j in 0..i {
            if !interiors[i].is_disjoint(&interiors[j])? {
                return Err(Error::InvalidPartition(format!("sets {} and {} overlap in an open set", j, i)));
            }
        }
    }
    Ok(())
}

fn label_of(partition: &[ArcSet], x: &Scalar) -> u32 {
    partition.iter().position(|p| p.contains(x)).expect("partition covers the circle") as u32
}

impl RokhlinTower {
    pub fn is_refined(&self) -> bool {
        self.columns.iter().all(|c| c.degenerate || !c.labels.is_empty())
    }

    pub fn level(&self, k: usize, j: u64) -> Result<Region> {
        translate_region(&self.system, &self.columns[k].base, j as i64)
    }

    pub fn open_level(&self, k: usize, j: u64) -> Result<Region> {
        translate_region(&self.system, &self.columns[k].base.interior(), j as i64)
    }

    pub fn total_levels(&self) -> u64 {
        self.columns.iter().filter(|c| !c.degenerate).map(|c| c.height).sum()
    }

    pub fn max_height(&self) -> u64 {
        self.columns.iter().map(|c| c.height).max().unwrap_or(0)
    }

    pub fn kac_sum(&self) -> Scalar {
        self.columns
            .iter()
            .filter(|c| !c.degenerate)
            .fold(Scalar::zero(), |acc, c| acc + c.base.measure().mul_i64(c.height as i64))
    }

    /// Splits every column so that each open level lies in a single
    /// partition element. Base pieces are cut at the pullbacks of partition
    /// boundaries met by the levels.
    pub fn refine(&self, partition: &[Region]) -> Result<RokhlinTower> {
        check_partition(&self.system, partition)?;
        let mut columns = Vec::new();
        match &self.system {
            System::Rotation(rot) => {
                let parts: Vec<ArcSet> = partition.iter().map(|p| p.as_arcs().cloned()).collect::<Result<_>>()?;
                let mut bpts: Vec<Scalar> = parts.iter().flat_map(|p| p.boundary_points()).collect();
                bpts.sort();
                bpts.dedup();
                let theta = rot.theta();
                let one = Scalar::one();
                for col in &self.columns {
                    if col.degenerate {
                        columns.push(col.clone());
                        continue;
                    }
                    let open = col.base.as_arcs()?.interior();
                    let mut cuts = Vec::new();
                    let mut s = Scalar::zero();
                    for j in 0..col.height {
                        if j > 0 {
                            s = &s + theta;
                            if s >= one {
                                s = s - &one;
                            }
                        }
                        for b in &bpts {
                            let x = mod1(&(b - &s));
                            if open.contains(&x) {
                                cuts.push(x);
                            }
                        }
                    }
                    let pieces = open.difference(&ArcSet::points(&cuts));
                    for piece in pieces.components() {
                        let mut x = piece.midpoint();
                        let mut labels = Vec::with_capacity(col.height as usize);
                        for j in 0..col.height {
                            if j > 0 {
                                x = &x + theta;
                                if x >= one {
                                    x = x - &one;
                                }
                            }
                            labels.push(label_of(&parts, &x));
                        }
                        columns.push(Column {
                            base: Region::Arcs(ArcSet::from_arc(&piece).closure()),
                            height: col.height,
                            degenerate: false,
                            labels,
                        });
                    }
                }
            }
            System::Odometer(o) => {
                let parts: Vec<CylinderSet> =
                    partition.iter().map(|p| p.as_cylinders().cloned()).collect::<Result<_>>()?;
                let k = o.period();
                for col in &self.columns {
                    let mut groups: HashMap<Vec<u32>, Vec<u64>> = HashMap::new();
                    let mut order = Vec::new();
                    for &i in col.base.as_cylinders()?.members() {
                        let labels: Vec<u32> = (0..col.height)
                            .map(|j| {
                                let x = (i + j) % k;
                                parts.iter().position(|p| p.contains(x)).expect("partition covers") as u32
                            })
                            .collect();
                        if !groups.contains_key(&labels) {
                            order.push(labels.clone());
                        }
                        groups.entry(labels).or_default().push(i);
                    }
                    for labels in order {
                        let members = groups.remove(&labels).unwrap();
                        columns.push(Column {
                            base: Region::Cylinders(CylinderSet::new(k, members)),
                            height: col.height,
                            degenerate: false,
                            labels,
                        });
                    }
                }
            }
            System::Torus(_) => return Err(Error::Unsupported("tower refinement on the torus")),
        }
        sort_columns(&mut columns);
        Ok(RokhlinTower { system: self.system.clone(), base: self.base.clone(), columns })
    }

    /// Checks disjointness of open levels, that the bases make up `Y`, that
    /// the closed levels cover the space, and the Kac sum.
    pub fn verify(&self) -> Result<TowerReport> {
        let mut union = Region::empty_for(&self.system);
        for c in &self.columns {
            union = union.union(&c.base)?;
        }
        let covers_base = union == self.base;
        let (open_levels_disjoint, tiles) = match &self.system {
            System::Rotation(rot) => {
                let theta = rot.theta();
                let one = Scalar::one();
                let mut pieces: Vec<(Scalar, Scalar)> = Vec::new();
                for c in self.columns.iter().filter(|c| !c.degenerate) {
                    let comps = c.base.as_arcs()?.interior().components();
                    let mut s = Scalar::zero();
                    for j in 0..c.height {
                        if j > 0 {
                            s = &s + theta;
                            if s >= one {
                                s = s - &one;
                            }
                        }
                        for a in &comps {
                            let lo = &a.lo + &s;
                            let hi = &a.hi + &s;
                            let (lo, hi) = if lo >= one { (lo - &one, hi - &one) } else { (lo, hi) };
                            if hi > one {
                                pieces.push((lo, one.clone()));
                                pieces.push((Scalar::zero(), hi - &one));
                            } else {
                                pieces.push((lo, hi));
                            }
                        }
                    }
                }
                pieces.sort();
                let disjoint = pieces.windows(2).all(|w| w[0].1 <= w[1].0);
                let tiles = !pieces.is_empty()
                    && pieces[0].0.is_zero()
                    && pieces[pieces.len() - 1].1 == one
                    && pieces.windows(2).all(|w| w[0].1 >= w[1].0);
                (disjoint, tiles)
            }
            System::Odometer(o) => {
                let k = o.period();
                let mut count = vec![0u32; k as usize];
                for c in self.columns.iter().filter(|c| !c.degenerate) {
                    for &i in c.base.as_cylinders()?.members() {
                        for j in 0..c.height {
                            count[((i + j) % k) as usize] += 1;
                        }
                    }
                }
                (count.iter().all(|&m| m <= 1), count.iter().all(|&m| m == 1))
            }
            System::Torus(_) => return Err(Error::Unsupported("return-time towers on the torus")),
        };
        Ok(TowerReport { open_levels_disjoint, covers_base, tiles, kac_sum: self.kac_sum() })
    }

    /// Checks that every open level of a refined tower lies in the partition
    /// element its label names.
    pub fn verify_refinement(&self, partition: &[Region]) -> Result<bool> {
        for (k, c) in self.columns.iter().enumerate() {
            if c.degenerate {
                continue;
            }
            if c.labels.len() != c.height as usize {
                return Ok(false);
            }
            for j in 0..c.height {
                let lvl = self.open_level(k, j)?;
                let p = partition.get(c.labels[j as usize] as usize).ok_or(Error::UnrefinedTower)?;
                if !lvl.is_subset(p)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn refine_tower(tower: &RokhlinTower, partition: &[Region]) -> Result<RokhlinTower> {
    tower.refine(partition)
}

/// Closed neighbourhood `Y` of `anchor` whose first `n + 1` iterates are
/// pairwise disjoint. On rotations its diameter is a third of the minimal
/// orbit gap; on odometers it is the cylinder of the coarsest level whose
/// period exceeds `n`.
pub fn disjoint_base(system: &System, n: u64, anchor: &Point) -> Result<Region> {
    let gap = system.min_orbit_gap(n)?;
    match (system, anchor) {
        (System::Rotation(_), Point::Circle(x)) => {
            let r = gap.div_i64(6);
            Ok(Region::Arcs(ArcSet::closed_arc(&(x - &r), &(x + &r))))
        }
        (System::Torus(t), Point::Torus(xs)) if xs.len() == t.dims() => {
            let r = gap.div_i64(6);
            let factors: Vec<ArcSet> = xs.iter().map(|x| ArcSet::closed_arc(&(x - &r), &(x + &r))).collect();
            Ok(Region::Boxes(crate::regions::boxes::BoxSet::product(&factors)))
        }
        (System::Odometer(o), Point::Odometer(w)) if w.len() == o.level() => {
            let coarse = gap.recip();
            let km = coarse.floor().to_string().parse::<u64>().expect("period fits u64");
            let k = o.period();
            let anchor_idx = o.index_of(w) % km;
            let members: Vec<u64> = (0..k / km).map(|t| anchor_idx + t * km).collect();
            Ok(Region::Cylinders(CylinderSet::new(k, members)))
        }
        _ => Err(Error::MixedAmbient),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Odometer, TorusRotation};

    fn golden() -> (System, Scalar) {
        let s = System::golden();
        let t = s.as_rotation().unwrap().theta().clone();
        (s, t)
    }

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::rational(p, d)
    }

    fn arcs(a: ArcSet) -> Region {
        Region::Arcs(a)
    }

    #[test]
    fn golden_first_return() {
        let (s, t) = golden();
        let y = arcs(ArcSet::closed_arc(&Scalar::zero(), &t));
        let tower = build_tower(&s, &y).unwrap();
        let one_minus = Scalar::one() - &t;
        assert_eq!(tower.columns.len(), 2);
        assert_eq!(tower.columns[0].height, 1);
        assert_eq!(tower.columns[0].base, arcs(ArcSet::closed_arc(&one_minus, &t)));
        assert_eq!(tower.columns[1].height, 2);
        assert_eq!(tower.columns[1].base, arcs(ArcSet::closed_arc(&Scalar::zero(), &one_minus)));
        assert!(tower.verify().unwrap().ok());
        assert_eq!(tower.kac_sum(), Scalar::one());
    }

    #[test]
    fn whole_space_is_one_column() {
        let (s, _) = golden();
        let tower = build_tower(&s, &arcs(ArcSet::full())).unwrap();
        assert_eq!(tower.columns.len(), 1);
        assert_eq!(tower.columns[0].height, 1);
        assert!(tower.verify().unwrap().ok());
        let o = System::Odometer(Odometer::new(vec![2, 2], 2).unwrap());
        let t = build_tower(&o, &Region::full_for(&o)).unwrap();
        assert_eq!(t.columns[0].height, 1);
    }

    #[test]
    fn odometer_cylinder_returns() {
        let o = System::Odometer(Odometer::new(vec![2, 2, 2], 3).unwrap());
        let r = first_return(&o, &Region::Cylinders(CylinderSet::new(8, vec![0]))).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].1, 8);
        let o2 = System::Odometer(Odometer::new(vec![2, 2], 2).unwrap());
        let t = build_tower(&o2, &Region::Cylinders(CylinderSet::new(4, vec![0]))).unwrap();
        assert_eq!((t.columns.len(), t.columns[0].height), (1, 4));
        assert!(t.verify().unwrap().ok());
        let t3 = build_tower(&o, &Region::Cylinders(CylinderSet::new(8, vec![0, 3, 4]))).unwrap();
        assert!(t3.verify().unwrap().ok());
        assert_eq!(t3.columns.iter().map(|c| c.height).collect::<Vec<_>>(), vec![1, 3, 4]);
    }

    #[test]
    fn at_most_three_return_times_for_intervals() {
        let (s, _) = golden();
        for (a, b) in [(0, 1), (1, 7), (3, 11), (2, 5), (1, 19)] {
            let y = arcs(ArcSet::closed_arc(&q(a, 13), &q(a + b, 13)));
            let tower = build_tower(&s, &y).unwrap();
            let heights: std::collections::BTreeSet<u64> =
                tower.columns.iter().filter(|c| !c.degenerate).map(|c| c.height).collect();
            assert!(heights.len() <= 3, "{:?}", heights);
            assert!(tower.verify().unwrap().ok());
        }
    }

    #[test]
    fn union_base_with_isolated_point() {
        let (s, _) = golden();
        let y = arcs(ArcSet::closed_arc(&q(1, 10), &q(2, 10)).union(&ArcSet::point(&q(7, 10))));
        let tower = build_tower(&s, &y).unwrap();
        assert!(tower.columns.iter().any(|c| c.degenerate));
        assert!(tower.verify().unwrap().ok());
    }

    #[test]
    fn refinement_by_halves() {
        let (s, t) = golden();
        let tower = build_tower(&s, &arcs(ArcSet::closed_arc(&Scalar::zero(), &t))).unwrap();
        let p = vec![
            arcs(ArcSet::arc(&Scalar::zero(), &q(1, 2), true, false)),
            arcs(ArcSet::arc(&q(1, 2), &Scalar::one(), true, false)),
        ];
        let r = tower.refine(&p).unwrap();
        assert!(r.verify().unwrap().ok());
        assert!(r.verify_refinement(&p).unwrap());
        assert!(r.is_refined());
        assert_eq!(r, tower.refine(&p).unwrap());
        let unchanged = tower.refine(&[arcs(ArcSet::full())]).unwrap();
        assert_eq!(unchanged.kac_sum(), Scalar::one());
        assert_eq!(unchanged.columns.len(), tower.columns.len());
    }

    #[test]
    fn bad_partitions_rejected() {
        let (s, t) = golden();
        let tower = build_tower(&s, &arcs(ArcSet::closed_arc(&Scalar::zero(), &t))).unwrap();
        let gap = vec![arcs(ArcSet::closed_arc(&Scalar::zero(), &q(1, 2)))];
        assert!(matches!(tower.refine(&gap), Err(Error::InvalidPartition(_))));
        let overlap = vec![arcs(ArcSet::closed_arc(&Scalar::zero(), &q(2, 3))), arcs(ArcSet::closed_arc(&q(1, 2), &Scalar::one()))];
        assert!(matches!(tower.refine(&overlap), Err(Error::InvalidPartition(_))));
    }

    #[test]
    fn disjoint_bases() {
        let (s, _) = golden();
        let root5 = Scalar::quadratic(0, 1, 1, 5).unwrap();
        let anchor = Point::Circle(Scalar::zero());
        let y1 = disjoint_base(&s, 1, &anchor).unwrap();
        assert_eq!(y1.measure(), (Scalar::int(3) - &root5).div_i64(6));
        let y2 = disjoint_base(&s, 2, &anchor).unwrap();
        assert_eq!(y2.measure(), (root5 - Scalar::int(2)).div_i64(3));
        for n in [1u64, 2, 5, 13, 40] {
            let y = disjoint_base(&s, n, &anchor).unwrap();
            assert!(y.interior().contains(&s, &anchor).unwrap());
            let its: Vec<Region> = (0..=n as i64).map(|j| translate_region(&s, &y, j).unwrap()).collect();
            for i in 0..its.len() {
                for j in 0..i {
                    assert!(its[i].is_disjoint(&its[j]).unwrap());
                }
            }
        }
        let o = System::Odometer(Odometer::new(vec![2, 3, 2], 3).unwrap());
        let y = disjoint_base(&o, 3, &Point::Odometer(vec![1, 2, 1])).unwrap();
        let its: Vec<Region> = (0..=3).map(|j| translate_region(&o, &y, j).unwrap()).collect();
        for i in 0..its.len() {
            for j in 0..i {
                assert!(its[i].is_disjoint(&its[j]).unwrap());
            }
        }
    }

    #[test]
    fn level_boundaries_come_from_base_boundary() {
        let (s, _) = golden();
        let rot = s.as_rotation().unwrap();
        let y = ArcSet::closed_arc(&q(1, 5), &q(3, 10));
        let tower = build_tower(&s, &arcs(y.clone())).unwrap();
        let nmax = tower.max_height();
        // a base cell ends where some iterate of it meets the boundary of Y,
        // so its level boundaries are iterates of that boundary in both directions
        let mut allowed = Vec::new();
        for j in -(nmax as i64)..nmax as i64 {
            for b in y.boundary_points() {
                allowed.push(rot.apply(&b, j));
            }
        }
        let allowed = ArcSet::points(&allowed);
        for (k, c) in tower.columns.iter().enumerate() {
            for j in 0..c.height {
                let lvl = tower.level(k, j).unwrap();
                let bd = ArcSet::points(&lvl.as_arcs().unwrap().boundary_points());
                assert!(bd.is_subset(&allowed));
            }
        }
    }

    /// Integer rotation by the convergent 6765/10946 reproduces the return
    /// times and, up to a few boundary lattice points, the column masses.
    #[test]
    fn convergent_oracle() {
        let (s, t) = golden();
        let (p, qd) = (6765i64, 10946i64);
        for (a, b) in [(Scalar::zero(), t.clone()), (q(1, 5), q(1, 3)), (q(1, 2), q(9, 10))] {
            let tower = build_tower(&s, &arcs(ArcSet::closed_arc(&a, &b))).unwrap();
            let inside = |i: i64| {
                let x = q(i, qd);
                x >= a && x <= b
            };
            let mut counts: HashMap<u64, i64> = HashMap::new();
            for i in 0..qd {
                if !inside(i) {
                    continue;
                }
                let mut j = i;
                let mut r = 0u64;
                loop {
                    j = (j + p) % qd;
                    r += 1;
                    if inside(j) {
                        break;
                    }
                }
                *counts.entry(r).or_default() += 1;
            }
            for c in tower.columns.iter().filter(|c| !c.degenerate) {
                let expect = c.base.measure().to_f64() * qd as f64;
                let got = *counts.get(&c.height).unwrap_or(&0) as f64;
                assert!((expect - got).abs() <= 3.0, "height {} expect {} got {}", c.height, expect, got);
            }
            let heights: std::collections::BTreeSet<u64> = tower.columns.iter().map(|c| c.height).collect();
            let seen: std::collections::BTreeSet<u64> = counts.keys().copied().collect();
            assert!(seen.is_subset(&heights) || seen.len() <= heights.len() + 1);
        }
    }

    #[test]
    fn torus_towers_unsupported() {
        let t = TorusRotation::new(vec![
            Scalar::quadratic(-1, 1, 2, 5).unwrap(),
            Scalar::quadratic(-1, 1, 1, 2).unwrap(),
        ])
        .unwrap();
        let s = System::Torus(t);
        let half = ArcSet::closed_arc(&Scalar::zero(), &q(1, 2));
        let y = Region::Boxes(crate::regions::boxes::BoxSet::product(&[half.clone(), half]));
        assert!(matches!(build_tower(&s, &y), Err(Error::Unsupported(_))));
    }

    #[test]
    fn non_regular_base_rejected() {
        let (s, _) = golden();
        assert!(first_return(&s, &arcs(ArcSet::point(&q(1, 2)))).is_err());
        assert!(first_return(&s, &arcs(ArcSet::open_arc(&q(0, 1), &q(1, 2)))).is_err());
    }
}
