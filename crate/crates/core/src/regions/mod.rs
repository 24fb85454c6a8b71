//! Exact set algebra over the three kinds of ambient space, plus the
//! measure-controlled approximations used by the comparison pipeline.

pub mod arcs;
pub mod boxes;
pub mod cylinders;

pub use arcs::{circle_dist, mod1, Arc, ArcSet, Cut};
pub use boxes::BoxSet;
pub use cylinders::CylinderSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::systems::{Point, System};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Arcs(ArcSet),
    Boxes(BoxSet),
    Cylinders(CylinderSet),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryPiece {
    Point(Point),
    /// The face `x_axis = coordinate` of a torus region.
    Face { axis: usize, coordinate: Scalar },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryReport {
    pub pieces: Vec<BoundaryPiece>,
    pub is_empty: bool,
}

impl Region {
    pub fn empty_for(system: &System) -> Region {
        match system {
            System::Rotation(_) => Region::Arcs(ArcSet::empty()),
            System::Torus(t) => Region::Boxes(BoxSet::empty(t.dims())),
            System::Odometer(o) => Region::Cylinders(CylinderSet::empty(o.period())),
        }
    }

    pub fn full_for(system: &System) -> Region {
        Region::empty_for(system).complement()
    }

    pub fn fits(&self, system: &System) -> bool {
        match (self, system) {
            (Region::Arcs(_), System::Rotation(_)) => true,
            (Region::Boxes(b), System::Torus(t)) => b.dims() == t.dims(),
            (Region::Cylinders(c), System::Odometer(o)) => c.modulus() == o.period(),
            _ => false,
        }
    }

    pub fn as_arcs(&self) -> Result<&ArcSet> {
        match self {
            Region::Arcs(a) => Ok(a),
            _ => Err(Error::Unsupported("circle region required")),
        }
    }

    pub fn as_boxes(&self) -> Result<&BoxSet> {
        match self {
            Region::Boxes(b) => Ok(b),
            _ => Err(Error::Unsupported("torus region required")),
        }
    }

    pub fn as_cylinders(&self) -> Result<&CylinderSet> {
        match self {
            Region::Cylinders(c) => Ok(c),
            _ => Err(Error::Unsupported("odometer region required")),
        }
    }

    fn binary(
        &self,
        other: &Region,
        fa: impl Fn(&ArcSet, &ArcSet) -> ArcSet,
        fb: impl Fn(&BoxSet, &BoxSet) -> BoxSet,
        fc: impl Fn(&CylinderSet, &CylinderSet) -> CylinderSet,
    ) -> Result<Region> {
        match (self, other) {
            (Region::Arcs(a), Region::Arcs(b)) => Ok(Region::Arcs(fa(a, b))),
            (Region::Boxes(a), Region::Boxes(b)) if a.dims() == b.dims() => Ok(Region::Boxes(fb(a, b))),
            (Region::Cylinders(a), Region::Cylinders(b)) if a.modulus() == b.modulus() => {
                Ok(Region::Cylinders(fc(a, b)))
            }
            _ => Err(Error::MixedAmbient),
        }
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        self.binary(other, ArcSet::union, BoxSet::union, CylinderSet::union)
    }

    pub fn intersect(&self, other: &Region) -> Result<Region> {
        self.binary(other, ArcSet::intersect, BoxSet::intersect, CylinderSet::intersect)
    }

    pub fn difference(&self, other: &Region) -> Result<Region> {
        self.binary(other, ArcSet::difference, BoxSet::difference, CylinderSet::difference)
    }

    pub fn complement(&self) -> Region {
        match self {
            Region::Arcs(a) => Region::Arcs(a.complement()),
            Region::Boxes(b) => Region::Boxes(b.complement()),
            Region::Cylinders(c) => Region::Cylinders(c.complement()),
        }
    }

    pub fn closure(&self) -> Region {
        match self {
            Region::Arcs(a) => Region::Arcs(a.closure()),
            Region::Boxes(b) => Region::Boxes(b.closure()),
            Region::Cylinders(_) => self.clone(),
        }
    }

    pub fn interior(&self) -> Region {
        match self {
            Region::Arcs(a) => Region::Arcs(a.interior()),
            Region::Boxes(b) => Region::Boxes(b.interior()),
            Region::Cylinders(_) => self.clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Region::Arcs(a) => a.is_empty(),
            Region::Boxes(b) => b.is_empty(),
            Region::Cylinders(c) => c.is_empty(),
        }
    }

    pub fn is_subset(&self, other: &Region) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn is_disjoint(&self, other: &Region) -> Result<bool> {
        Ok(self.intersect(other)?.is_empty())
    }

    pub fn is_closed(&self) -> bool {
        self.closure() == *self
    }

    pub fn is_open(&self) -> bool {
        self.interior() == *self
    }

    pub fn measure(&self) -> Scalar {
        match self {
            Region::Arcs(a) => a.measure(),
            Region::Boxes(b) => b.measure(),
            Region::Cylinders(c) => c.measure(),
        }
    }

    pub fn contains(&self, system: &System, p: &Point) -> Result<bool> {
        match (self, system, p) {
            (Region::Arcs(a), System::Rotation(_), Point::Circle(x)) => Ok(a.contains(x)),
            (Region::Boxes(b), System::Torus(_), Point::Torus(x)) if x.len() == b.dims() => Ok(b.contains(x)),
            (Region::Cylinders(c), System::Odometer(o), Point::Odometer(w)) if w.len() == o.level() => {
                Ok(c.contains(o.index_of(w)))
            }
            _ => Err(Error::MixedAmbient),
        }
    }

    pub fn boundary(&self) -> BoundaryReport {
        let pieces: Vec<BoundaryPiece> = match self {
            Region::Arcs(a) => a.boundary_points().into_iter().map(|x| BoundaryPiece::Point(Point::Circle(x))).collect(),
            Region::Boxes(b) => {
                b.faces().into_iter().map(|(axis, coordinate)| BoundaryPiece::Face { axis, coordinate }).collect()
            }
            Region::Cylinders(_) => Vec::new(),
        };
        let is_empty = pieces.is_empty();
        BoundaryReport { pieces, is_empty }
    }
}

/// Image of a region under `h^n`.
pub fn translate_region(system: &System, region: &Region, n: i64) -> Result<Region> {
    if !region.fits(system) {
        return Err(Error::MixedAmbient);
    }
    Ok(match (system, region) {
        (System::Rotation(r), Region::Arcs(a)) => Region::Arcs(a.translate(&r.shift(n))),
        (System::Torus(t), Region::Boxes(b)) => Region::Boxes(b.translate(&t.shift(n))),
        (System::Odometer(_), Region::Cylinders(c)) => Region::Cylinders(c.translate(n)),
        _ => unreachable!(),
    })
}

pub fn measure(system: &System, region: &Region) -> Result<Scalar> {
    if !region.fits(system) {
        return Err(Error::MixedAmbient);
    }
    Ok(region.measure())
}

/// `μ(U) - μ(C)`.
pub fn measure_gap(system: &System, c: &Region, u: &Region) -> Result<Scalar> {
    Ok(measure(system, u)? - measure(system, c)?)
}

/// Open set of measure below `eps` around a finite point set, made of arcs
/// of radius `eps/(4·card F)`. The empty set gets an arc of length `eps/2`
/// centred at 0.
pub fn small_nbhd(system: &System, f: &Region, eps: &Scalar) -> Result<Region> {
    let a = circle_region(system, f)?;
    if !a.measure().is_zero() {
        return Err(Error::NotNull);
    }
    let pts = a.boundary_points();
    if pts.is_empty() {
        let r = eps.div_i64(4);
        return Ok(Region::Arcs(ArcSet::open_arc(&-&r, &r)));
    }
    let r = eps.div_i64(4 * pts.len() as i64);
    let out = a.open_neighborhood(&r);
    debug_assert!(out.measure() < *eps);
    Ok(Region::Arcs(out))
}

/// Closed `K ⊂ U` with non-empty interior and `μ(U \ K) < eps`.
pub fn inner_approx(system: &System, u: &Region, eps: &Scalar) -> Result<Region> {
    let a = circle_region(system, u)?;
    Ok(Region::Arcs(inner_approx_arcs(a, eps)?))
}

pub(crate) fn inner_radius(u: &ArcSet, eps: &Scalar) -> Result<Option<Scalar>> {
    if u.is_empty() {
        return Err(Error::EmptyInput);
    }
    if u.is_full() {
        return Ok(None);
    }
    let comps = u.components();
    let shortest = comps.iter().map(|c| c.length()).min().unwrap();
    let k = comps.len() as i64;
    Ok(Some(eps.clone().min(shortest.div_i64(2)).div_i64(4 * k)))
}

pub(crate) fn inner_approx_arcs(u: &ArcSet, eps: &Scalar) -> Result<ArcSet> {
    let r = match inner_radius(u, eps)? {
        None => return Ok(u.clone()),
        Some(r) => r,
    };
    if r.is_zero() {
        return Err(Error::InvalidInput("open set has a degenerate component".into()));
    }
    let k = u.interior().retract_closed(&r);
    if !(k.is_subset(u) && u.difference(&k).measure() < *eps && !k.interior().is_empty()) {
        return Err(Error::InvalidInput("inner approximation failed its self-check".into()));
    }
    Ok(k)
}

/// Open `E ⊇ F` with `μ(E \ F) < eps`.
pub fn outer_approx(system: &System, f: &Region, eps: &Scalar) -> Result<Region> {
    let a = circle_region(system, f)?;
    Ok(Region::Arcs(outer_approx_arcs(a, eps, None)?))
}

/// Extension radius `min(eps, dist(F, X \ U), half the smallest gap)/(4k)`.
pub(crate) fn outer_radius(f: &ArcSet, eps: &Scalar, within: Option<&ArcSet>) -> Result<Option<Scalar>> {
    let f = f.closure();
    if f.is_empty() || f.is_full() {
        return Ok(None);
    }
    let comps = f.components();
    let mut bound = eps.clone();
    if let Some(g) = f.min_component_gap() {
        bound = bound.min(g.div_i64(2));
    }
    if let Some(u) = within {
        if !f.is_subset(u) {
            return Err(Error::NotContained);
        }
        if let Some(d) = f.distance(&u.complement()) {
            bound = bound.min(d);
        }
    }
    Ok(Some(bound.div_i64(4 * comps.len() as i64)))
}

pub(crate) fn outer_approx_arcs(f: &ArcSet, eps: &Scalar, within: Option<&ArcSet>) -> Result<ArcSet> {
    let r = match outer_radius(f, eps, within)? {
        None => return Ok(f.closure()),
        Some(r) => r,
    };
    let fc = f.closure();
    let e = fc.open_neighborhood(&r);
    if !(fc.is_subset(&e) && e.difference(&fc).measure() < *eps) {
        return Err(Error::InvalidInput("outer approximation failed its self-check".into()));
    }
    Ok(e)
}

fn circle_region<'a>(system: &System, r: &'a Region) -> Result<&'a ArcSet> {
    if !r.fits(system) {
        return Err(Error::MixedAmbient);
    }
    r.as_arcs()
}
