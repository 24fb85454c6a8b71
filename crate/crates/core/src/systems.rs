//! The concrete minimal systems: circle rotations, torus rotations and
//! truncated odometers.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::regions::arcs::{circle_dist, mod1};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CircleRotation {
    theta: Scalar,
}

impl CircleRotation {
    pub fn new(theta: Scalar) -> Result<CircleRotation> {
        if theta.is_rational() {
            return Err(Error::InvalidInput("rotation angle must be irrational".into()));
        }
        Ok(CircleRotation { theta: mod1(&theta) })
    }

    /// The golden rotation by `(√5 - 1)/2`.
    pub fn golden() -> CircleRotation {
        CircleRotation::new(Scalar::quadratic(-1, 1, 2, 5).unwrap()).unwrap()
    }

    pub fn theta(&self) -> &Scalar {
        &self.theta
    }

    pub fn radicand(&self) -> u64 {
        self.theta.radicand()
    }

    /// `nθ mod 1`.
    pub fn shift(&self, n: i64) -> Scalar {
        mod1(&self.theta.mul_int(&BigInt::from(n)))
    }

    pub fn apply(&self, x: &Scalar, n: i64) -> Scalar {
        mod1(&(x + self.theta.mul_int(&BigInt::from(n))))
    }

    /// `min over 1 <= j <= n of ||jθ||`.
    pub fn min_orbit_gap(&self, n: u64) -> Scalar {
        let zero = Scalar::zero();
        let mut x = zero.clone();
        let mut best: Option<Scalar> = None;
        for _ in 0..n {
            x = mod1(&(&x + &self.theta));
            let g = circle_dist(&x, &zero);
            best = Some(match best {
                Some(b) => b.min(g),
                None => g,
            });
        }
        best.expect("n >= 1")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusRotation {
    thetas: Vec<Scalar>,
}

impl TorusRotation {
    /// Accepts angles that are irrational and lie in pairwise distinct
    /// quadratic fields, which makes them rationally independent with 1.
    pub fn new(thetas: Vec<Scalar>) -> Result<TorusRotation> {
        if thetas.is_empty() {
            return Err(Error::InvalidInput("torus needs at least one angle".into()));
        }
        for (i, t) in thetas.iter().enumerate() {
            if t.is_rational() {
                return Err(Error::InvalidInput(format!("angle {} is rational", i)));
            }
            for s in &thetas[..i] {
                if s.radicand() == t.radicand() {
                    return Err(Error::InvalidInput(
                        "angles sharing a quadratic field are not certified independent".into(),
                    ));
                }
            }
        }
        Ok(TorusRotation { thetas: thetas.iter().map(mod1).collect() })
    }

    pub fn dims(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[Scalar] {
        &self.thetas
    }

    pub fn axis(&self, i: usize) -> CircleRotation {
        CircleRotation { theta: self.thetas[i].clone() }
    }

    pub fn shift(&self, n: i64) -> Vec<Scalar> {
        self.thetas.iter().map(|t| mod1(&t.mul_int(&BigInt::from(n)))).collect()
    }

    pub fn apply(&self, x: &[Scalar], n: i64) -> Vec<Scalar> {
        x.iter().zip(&self.thetas).map(|(xi, t)| mod1(&(xi + t.mul_int(&BigInt::from(n))))).collect()
    }

    /// `min over 1 <= j <= n of max_i ||jθ_i||`, the sup-metric gap.
    pub fn min_orbit_gap(&self, n: u64) -> Scalar {
        let zero = Scalar::zero();
        let mut xs: Vec<Scalar> = vec![zero.clone(); self.dims()];
        let mut best: Option<Scalar> = None;
        for _ in 0..n {
            for (x, t) in xs.iter_mut().zip(&self.thetas) {
                *x = mod1(&(&*x + t));
            }
            let g = xs.iter().map(|x| circle_dist(x, &zero)).max().unwrap();
            best = Some(match best {
                Some(b) => b.min(g),
                None => g,
            });
        }
        best.expect("n >= 1")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Odometer {
    bases: Vec<u64>,
    level: usize,
}

impl Odometer {
    pub fn new(bases: Vec<u64>, level: usize) -> Result<Odometer> {
        if bases.iter().any(|&k| k < 2) {
            return Err(Error::InvalidInput("odometer bases must be at least 2".into()));
        }
        if level == 0 || level > bases.len() {
            return Err(Error::InvalidInput("truncation level out of range".into()));
        }
        let mut k: u64 = 1;
        for &b in &bases[..level] {
            k = k.checked_mul(b).ok_or_else(|| Error::InvalidInput("odometer period overflows".into()))?;
        }
        Ok(Odometer { bases, level })
    }

    pub fn bases(&self) -> &[u64] {
        &self.bases
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `K_m = k_1 ... k_m`.
    pub fn period_at(&self, m: usize) -> u64 {
        self.bases[..m].iter().product()
    }

    /// Number of level-n cylinders.
    pub fn period(&self) -> u64 {
        self.period_at(self.level)
    }

    /// Cylinder index of a digit word, least significant digit first.
    pub fn index_of(&self, word: &[u64]) -> u64 {
        let mut idx = 0;
        for i in (0..self.level).rev() {
            idx = idx * self.bases[i] + word[i];
        }
        idx
    }

    pub fn word_of(&self, mut idx: u64) -> Vec<u64> {
        let mut w = Vec::with_capacity(self.level);
        for i in 0..self.level {
            w.push(idx % self.bases[i]);
            idx /= self.bases[i];
        }
        w
    }

    pub fn apply(&self, word: &[u64], n: i64) -> Vec<u64> {
        let k = self.period() as i128;
        let idx = (self.index_of(word) as i128 + n as i128).rem_euclid(k) as u64;
        self.word_of(idx)
    }

    /// `1/K_m` for the least `m` with `K_m > n`: cylinders of that level
    /// have `n + 1` pairwise disjoint iterates.
    pub fn min_orbit_gap(&self, n: u64) -> Result<Scalar> {
        for m in 1..=self.level {
            let k = self.period_at(m);
            if k > n {
                return Ok(Scalar::rational(1, k as i64));
            }
        }
        Err(Error::InvalidInput("truncation level too coarse for the requested number of iterates".into()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum System {
    Rotation(CircleRotation),
    Torus(TorusRotation),
    Odometer(Odometer),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Circle(Scalar),
    Torus(Vec<Scalar>),
    Odometer(Vec<u64>),
}

impl System {
    pub fn golden() -> System {
        System::Rotation(CircleRotation::golden())
    }

    pub fn as_rotation(&self) -> Result<&CircleRotation> {
        match self {
            System::Rotation(r) => Ok(r),
            _ => Err(Error::Unsupported("circle rotation required")),
        }
    }

    pub fn as_odometer(&self) -> Result<&Odometer> {
        match self {
            System::Odometer(o) => Ok(o),
            _ => Err(Error::Unsupported("odometer required")),
        }
    }

    /// `h^n(x)`.
    pub fn apply(&self, x: &Point, n: i64) -> Result<Point> {
        match (self, x) {
            (System::Rotation(r), Point::Circle(p)) => Ok(Point::Circle(r.apply(p, n))),
            (System::Torus(t), Point::Torus(p)) if p.len() == t.dims() => Ok(Point::Torus(t.apply(p, n))),
            (System::Odometer(o), Point::Odometer(w)) if w.len() == o.level() && w.iter().zip(o.bases()).all(|(d, b)| d < b) => {
                Ok(Point::Odometer(o.apply(w, n)))
            }
            _ => Err(Error::MixedAmbient),
        }
    }

    pub fn min_orbit_gap(&self, n: u64) -> Result<Scalar> {
        if n == 0 {
            return Err(Error::InvalidInput("number of iterates must be positive".into()));
        }
        match self {
            System::Rotation(r) => Ok(r.min_orbit_gap(n)),
            System::Torus(t) => Ok(t.min_orbit_gap(n)),
            System::Odometer(o) => o.min_orbit_gap(n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_theta() -> Scalar {
        Scalar::quadratic(-1, 1, 2, 5).unwrap()
    }

    #[test]
    fn rational_angle_rejected() {
        assert!(CircleRotation::new(Scalar::rational(1, 3)).is_err());
        assert!(TorusRotation::new(vec![golden_theta(), Scalar::quadratic(0, 1, 2, 5).unwrap()]).is_err());
    }

    #[test]
    fn apply_examples() {
        let s = System::golden();
        let zero = Point::Circle(Scalar::zero());
        assert_eq!(s.apply(&zero, 0).unwrap(), zero);
        assert_eq!(s.apply(&zero, 1).unwrap(), Point::Circle(golden_theta()));
        let o = System::Odometer(Odometer::new(vec![2, 2, 2], 3).unwrap());
        assert_eq!(o.apply(&Point::Odometer(vec![1, 1, 1]), 1).unwrap(), Point::Odometer(vec![0, 0, 0]));
        assert_eq!(o.apply(&Point::Odometer(vec![1, 0, 0]), 1).unwrap(), Point::Odometer(vec![0, 1, 0]));
        assert!(o.apply(&zero, 1).is_err());
    }

    #[test]
    fn gaps_for_golden() {
        let r = CircleRotation::golden();
        let t = golden_theta();
        assert_eq!(r.min_orbit_gap(1), Scalar::one() - &t);
        assert_eq!(r.min_orbit_gap(2), t.mul_i64(2) - Scalar::one());
        let mut prev = r.min_orbit_gap(1);
        for n in 2..40 {
            let g = r.min_orbit_gap(n);
            assert!(g <= prev);
            prev = g;
        }
    }

    #[test]
    fn odometer_gap_levels() {
        let o = Odometer::new(vec![2, 3, 4], 3).unwrap();
        assert_eq!(o.min_orbit_gap(1).unwrap(), Scalar::rational(1, 2));
        assert_eq!(o.min_orbit_gap(2).unwrap(), Scalar::rational(1, 6));
        assert_eq!(o.min_orbit_gap(23).unwrap(), Scalar::rational(1, 24));
        assert!(o.min_orbit_gap(24).is_err());
    }

    #[test]
    fn group_action_on_words() {
        let o = Odometer::new(vec![3, 2, 5], 3).unwrap();
        for idx in 0..30 {
            let w = o.word_of(idx);
            assert_eq!(o.index_of(&w), idx);
            for (m, n) in [(3i64, 4i64), (-7, 29), (0, 0)] {
                assert_eq!(o.apply(&o.apply(&w, m), n), o.apply(&w, m + n));
            }
        }
    }
}
