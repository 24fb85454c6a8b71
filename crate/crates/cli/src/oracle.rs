//! Brute-force cross-checks that share no code paths with the exact
//! constructions: an integer rotation standing in for the irrational one,
//! exhaustive matching on odometer cylinders, and dense float sampling of
//! Birkhoff averages.

use dyncomp::comparison::{birkhoff_certificate, clopen_comparison, verify_witness, BirkhoffCertificate};
use dyncomp::plfun::PlFunction;
use dyncomp::regions::arcs::ArcSet;
use dyncomp::regions::CylinderSet;
use dyncomp::systems::{CircleRotation, Odometer};
use dyncomp::towers::build_tower;
use dyncomp::{Region, Result, Scalar, System};
use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Continued-fraction convergents `p/q` of `x` up to denominator `q_max`.
pub fn convergents(x: &Scalar, q_max: u64) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    let (mut p0, mut q0) = (BigInt::from(1), BigInt::from(0));
    let (mut p1, mut q1) = (x.floor(), BigInt::from(1));
    out.push((p1.clone(), q1.clone()));
    let mut rest = x.sub_int(&x.floor());
    while !rest.is_zero() {
        let y = rest.recip();
        let a = y.floor();
        rest = y.sub_int(&a);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > BigInt::from(q_max) {
            break;
        }
        out.push((p2.clone(), q2.clone()));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnTimeReport {
    pub q: u64,
    pub p: u64,
    /// Heights of the exact tower, in column order.
    pub exact_heights: Vec<u64>,
    /// Distinct return times seen on the lattice, increasing.
    pub lattice_heights: Vec<u64>,
    /// Lattice base points per exact column, against `q·μ(Y_k)` rounded down.
    pub counts: Vec<(u64, u64)>,
    /// Lattice points well inside a column base whose return time differs.
    pub interior_mismatches: usize,
}

impl ReturnTimeReport {
    pub fn agree(&self) -> bool {
        let mut exact = self.exact_heights.clone();
        exact.sort_unstable();
        exact.dedup();
        let slack = self.exact_heights.iter().max().copied().unwrap_or(0) + 2;
        exact == self.lattice_heights
            && self.interior_mismatches == 0
            && self.counts.iter().all(|(seen, expected)| seen.abs_diff(*expected) <= slack)
    }
}

/// Simulates `i -> i + p mod q` on the lattice `Z/q` for the convergent
/// `p/q` of the angle and compares first-return times on the lattice points
/// of the base with the exact tower over `base`.
pub fn return_times(rot: &CircleRotation, base: &ArcSet, q: u64) -> Result<std::result::Result<ReturnTimeReport, String>> {
    let conv = convergents(rot.theta(), q);
    let p = match conv.iter().find(|(_, qq)| *qq == BigInt::from(q)) {
        Some((p, _)) => u64::try_from(p).map_err(|_| dyncomp::Error::InvalidInput("convergent numerator".into()))?,
        None => {
            let qs: Vec<String> = conv.iter().map(|(_, q)| q.to_string()).collect();
            return Ok(Err(format!("{q} is not a convergent denominator (convergents: {})", qs.join(" "))));
        }
    };
    let system = System::Rotation(rot.clone());
    let tower = build_tower(&system, &Region::Arcs(base.clone()))?;
    let cols: Vec<(ArcSet, u64)> =
        tower.columns.iter().filter(|c| !c.degenerate).map(|c| (c.base.as_arcs().unwrap().clone(), c.height)).collect();
    let qs = Scalar::int(q as i64);
    let in_base: Vec<bool> = (0..q).map(|i| base.contains(&Scalar::rational(i as i64, q as i64))).collect();
    let max_h = cols.iter().map(|c| c.1).max().unwrap_or(1);
    // a lattice orbit drifts from the true orbit by at most n·|qθ - p|/q
    // after n steps; points farther than that from every column boundary
    // must return at the same time
    let drift = (rot.theta().mul_i64(q as i64) - Scalar::int(p as i64)).abs().mul_i64(max_h as i64 + 1).div_i64(q as i64);
    let margin = drift + Scalar::rational(2, q as i64);
    let mut lattice = Vec::new();
    let mut counts = vec![0u64; cols.len()];
    let mut mismatches = 0;
    for i in 0..q {
        if !in_base[i as usize] {
            continue;
        }
        let mut j = i;
        let mut r = 0u64;
        loop {
            j = (j + p) % q;
            r += 1;
            if in_base[j as usize] || r > q {
                break;
            }
        }
        lattice.push(r);
        let x = Scalar::rational(i as i64, q as i64);
        for (k, (y, h)) in cols.iter().enumerate() {
            if y.contains(&x) {
                counts[k] += 1;
                let inner = y.retract_closed(&margin);
                if inner.contains(&x) && r != *h {
                    mismatches += 1;
                }
            }
        }
    }
    lattice.sort_unstable();
    lattice.dedup();
    let expected: Vec<u64> = cols.iter().map(|(y, _)| (y.measure() * &qs).floor().try_into().unwrap_or(0)).collect();
    Ok(Ok(ReturnTimeReport {
        q,
        p,
        exact_heights: cols.iter().map(|c| c.1).collect(),
        lattice_heights: lattice,
        counts: counts.into_iter().zip(expected).collect(),
        interior_mismatches: mismatches,
    }))
}

/// Whether a saturating matching `A -> B` exists, by augmenting paths over
/// all pairs. Every pair is an edge because any shift is allowed.
pub fn matching_exists(a: &[u64], b: &[u64]) -> bool {
    let mut owner: Vec<Option<usize>> = vec![None; b.len()];
    fn augment(u: usize, nb: usize, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        if let Some(v) = (0..nb).find(|&v| !seen[v] && owner[v].is_none()) {
            seen[v] = true;
            owner[v] = Some(u);
            return true;
        }
        for v in 0..nb {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none() || augment(owner[v].unwrap(), nb, seen, owner) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    for u in 0..a.len() {
        let mut seen = vec![false; b.len()];
        if !augment(u, b.len(), &mut seen, &mut owner) {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClopenTrial {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub exact_verified: bool,
    pub feasible: bool,
}

impl ClopenTrial {
    pub fn agree(&self) -> bool {
        self.exact_verified == self.feasible
    }
}

/// Odometer whose period is `k`, with the prime factors of `k` as bases.
pub fn odometer_with_period(k: u64) -> Result<Odometer> {
    let mut bases = Vec::new();
    let mut n = k;
    let mut f = 2;
    while f * f <= n {
        while n % f == 0 {
            bases.push(f);
            n /= f;
        }
        f += 1;
    }
    if n > 1 {
        bases.push(n);
    }
    let level = bases.len();
    Odometer::new(bases, level)
}

/// Runs the exact clopen comparison on `(A, B)` and the exhaustive matching.
pub fn clopen_trial(o: &Odometer, a: Vec<u64>, b: Vec<u64>) -> ClopenTrial {
    let k = o.period();
    let system = System::Odometer(o.clone());
    let ra = Region::Cylinders(CylinderSet::new(k, a.clone()));
    let rb = Region::Cylinders(CylinderSet::new(k, b.clone()));
    let exact_verified = match clopen_comparison(&system, &ra, &rb) {
        Ok(w) => {
            let images_in_b = w.entries.iter().all(|e| match &e.f {
                dyncomp::comparison::WitnessFunction::Cylinder(f) => {
                    f.values.iter().all(|(i, _)| rb.as_cylinders().unwrap().contains((*i as i64 + e.shift).rem_euclid(k as i64) as u64))
                }
                _ => false,
            });
            images_in_b && verify_witness(&system, &ra, &rb, &w).ok()
        }
        Err(_) => false,
    };
    ClopenTrial { feasible: matching_exists(&a, &b), a, b, exact_verified }
}

/// Random pair with `|A| < |B|` on the `k`-cycle.
pub fn random_clopen_pair(rng: &mut ChaCha8Rng, k: u64) -> (Vec<u64>, Vec<u64>) {
    let nb = rng.gen_range(1..=k);
    let na = rng.gen_range(0..nb);
    (random_subset(rng, k, na), random_subset(rng, k, nb))
}

fn random_subset(rng: &mut ChaCha8Rng, k: u64, n: u64) -> Vec<u64> {
    let idx = rand::seq::index::sample(rng, k as usize, n as usize);
    let mut v: Vec<u64> = idx.into_iter().map(|i| i as u64).collect();
    v.sort_unstable();
    v
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `trials` random pairs on the odometer of period `k`.
pub fn clopen_trials(k: u64, trials: usize, seed: u64) -> Result<Vec<ClopenTrial>> {
    let o = odometer_with_period(k)?;
    let mut rng = seeded(seed);
    Ok((0..trials)
        .map(|_| {
            let (a, b) = random_clopen_pair(&mut rng, k);
            clopen_trial(&o, a, b)
        })
        .collect())
}

/// A PL function read into floats.
pub struct FloatPl {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl FloatPl {
    pub fn new(f: &PlFunction) -> FloatPl {
        let (xs, vs) = f.points().iter().map(|(x, v)| (x.to_f64(), v.to_f64())).unzip();
        FloatPl { xs, vs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return self.vs[0];
        }
        let x = x.rem_euclid(1.0);
        let i = match self.xs.partition_point(|&b| b <= x) {
            0 => n - 1,
            i => i - 1,
        };
        let (x0, v0) = (self.xs[i], self.vs[i]);
        let (x1, v1) = if i + 1 < n { (self.xs[i + 1], self.vs[i + 1]) } else { (self.xs[0] + 1.0, self.vs[0]) };
        let dx = if x >= x0 { x - x0 } else { x + 1.0 - x0 };
        v0 + (v1 - v0) * dx / (x1 - x0)
    }
}

/// `S_N g(x)/N` in floating point.
pub fn float_average(g: &FloatPl, theta: f64, n: u64, x: f64) -> f64 {
    let mut s = 0.0;
    let mut y = x;
    for _ in 0..n {
        s += g.eval(y);
        y = (y + theta).rem_euclid(1.0);
    }
    s / n as f64
}

#[derive(Debug, Clone)]
pub struct BirkhoffOracle {
    pub cert: BirkhoffCertificate,
    pub float_min: f64,
    pub exact_min: f64,
    pub at_argmin: f64,
    pub sigma: f64,
}

impl BirkhoffOracle {
    /// Sampled minimum never undercuts `σ` (or the exact minimum) by more
    /// than `tol`, and the float average at the exact minimiser matches it.
    pub fn agree(&self, tol: f64) -> bool {
        self.float_min >= self.sigma - tol && self.float_min >= self.exact_min - tol && (self.at_argmin - self.exact_min).abs() <= tol
    }
}

/// Samples `S_{N0} g / N0` on a jittered grid of `samples` points.
pub fn birkhoff_oracle(system: &System, f: &Region, e: &Region, sigma_fraction: &Scalar, samples: u64, seed: u64) -> Result<BirkhoffOracle> {
    let cert = birkhoff_certificate(system, f, e, sigma_fraction)?;
    let rot = system.as_rotation()?;
    let sum = dyncomp::plfun::birkhoff_sum(rot, &cert.g, cert.n0)?;
    let ex = sum.extrema();
    let g = FloatPl::new(&cert.g);
    let theta = rot.theta().to_f64();
    let mut rng = seeded(seed);
    let mut float_min = f64::INFINITY;
    for i in 0..samples {
        let x = (i as f64 + rng.gen::<f64>()) / samples as f64;
        float_min = float_min.min(float_average(&g, theta, cert.n0, x));
    }
    let at_argmin = float_average(&g, theta, cert.n0, ex.argmin.to_f64());
    Ok(BirkhoffOracle {
        exact_min: cert.m0.to_f64(),
        sigma: cert.sigma.to_f64(),
        float_min,
        at_argmin,
        cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_convergents_are_fibonacci() {
        let th = CircleRotation::golden();
        let qs: Vec<BigInt> = convergents(th.theta(), 100).into_iter().map(|c| c.1).collect();
        let fib: Vec<BigInt> = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89].iter().map(|&x| BigInt::from(x)).collect();
        // the first two convergents of θ < 1 are 0/1 and 1/1
        assert_eq!(qs, fib);
    }

    #[test]
    fn matching_counts() {
        assert!(matching_exists(&[1, 2], &[0, 5, 7]));
        assert!(!matching_exists(&[1, 2, 3], &[0, 5]));
        assert!(matching_exists(&[], &[]));
    }

    #[test]
    fn float_pl_matches_exact_eval() {
        let f = PlFunction::from_points(vec![
            (Scalar::rational(1, 10), Scalar::zero()),
            (Scalar::rational(1, 4), Scalar::one()),
            (Scalar::rational(3, 4), Scalar::one()),
            (Scalar::rational(9, 10), Scalar::zero()),
        ])
        .unwrap();
        let ff = FloatPl::new(&f);
        for i in 0..100 {
            let x = Scalar::rational(i, 100);
            assert!((ff.eval(x.to_f64()) - f.eval(&x).to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn period_factorisation() {
        assert_eq!(odometer_with_period(64).unwrap().bases(), &[2, 2, 2, 2, 2, 2]);
        assert_eq!(odometer_with_period(90).unwrap().period(), 90);
    }
}
