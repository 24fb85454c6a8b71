//! Elements `(a + b√D)/c` of a real quadratic field with big-integer
//! coefficients.
//!
//! Values are kept in lowest terms with `c > 0`. The radicand travels with
//! each value; a rational value (`b = 0`) adopts the radicand of whatever it
//! is combined with, and equality and hashing ignore the radicand of rationals.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone)]
pub struct Scalar {
    k: Coef,
    d: u64,
    // floating value and error bound, derived from the fields above
    est: (f64, f64),
}

/// Coefficients `[a, b, c]`. A value whose coefficients all fit an `i64` is
/// always stored inline, so the two variants never describe the same number.
#[derive(Clone)]
enum Coef {
    Small([i64; 3]),
    Big(Box<[BigInt; 3]>),
}

/// True when `d` has no square factor other than 1.
pub fn is_squarefree(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= d {
        if d % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

impl Scalar {
    /// Builds `(a + b√d)/c`. Panics on `c = 0`; `d` must be square-free.
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: u64) -> Scalar {
        assert!(!c.is_zero(), "zero denominator");
        assert!(d >= 1, "radicand must be positive");
        let (mut a, mut b, mut c) = (a, b, c);
        if d == 1 && !b.is_zero() {
            a += &b;
            b = BigInt::zero();
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = gcd3(&a, &b, &c);
        if !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        Scalar::assemble(a, b, c, d)
    }

    fn assemble(a: BigInt, b: BigInt, c: BigInt, d: u64) -> Scalar {
        if let (Some(x), Some(y), Some(z)) = (a.to_i64(), b.to_i64(), c.to_i64()) {
            return Scalar::inline(x, y, z, d);
        }
        let est = estimate(&a, &b, &c, d).unwrap_or((0.0, f64::INFINITY));
        Scalar { k: Coef::Big(Box::new([a, b, c])), d, est }
    }

    fn inline(a: i64, b: i64, c: i64, d: u64) -> Scalar {
        let est = estimate_wide(a as i128, b as i128, c as i128, d);
        Scalar { k: Coef::Small([a, b, c]), d, est }
    }

    /// Checked constructor for external input.
    pub fn quadratic(a: i64, b: i64, c: i64, d: u64) -> Option<Scalar> {
        if c == 0 || !is_squarefree(d) {
            return None;
        }
        Some(from_wide(a.into(), b.into(), c.into(), d))
    }

    pub fn from_big_parts(a: BigInt, b: BigInt, c: BigInt, d: u64) -> Option<Scalar> {
        if c.is_zero() || !is_squarefree(d) {
            return None;
        }
        Some(Scalar::new(a, b, c, d))
    }

    pub fn rational(p: i64, q: i64) -> Scalar {
        assert!(q != 0, "zero denominator");
        from_wide(p.into(), 0, q.into(), 1)
    }

    pub fn from_ratio(r: &BigRational) -> Scalar {
        Scalar::new(r.numer().clone(), BigInt::zero(), r.denom().clone(), 1)
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::inline(n, 0, 1, 1)
    }

    pub fn from_bigint(n: BigInt) -> Scalar {
        Scalar::assemble(n, BigInt::zero(), BigInt::one(), 1)
    }

    pub fn zero() -> Scalar {
        Scalar::int(0)
    }

    pub fn one() -> Scalar {
        Scalar::int(1)
    }

    fn coefs(&self) -> Cow<'_, [BigInt; 3]> {
        match &self.k {
            Coef::Small([a, b, c]) => Cow::Owned([BigInt::from(*a), BigInt::from(*b), BigInt::from(*c)]),
            Coef::Big(v) => Cow::Borrowed(v),
        }
    }

    pub fn a(&self) -> BigInt {
        self.coefs()[0].clone()
    }
    pub fn b(&self) -> BigInt {
        self.coefs()[1].clone()
    }
    pub fn c(&self) -> BigInt {
        self.coefs()[2].clone()
    }
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        match &self.k {
            Coef::Small(v) => v[1] == 0,
            Coef::Big(v) => v[1].is_zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.k {
            Coef::Small(v) => v[0] == 0 && v[1] == 0,
            Coef::Big(_) => false,
        }
    }

    /// Rational part `a/c` and irrational coefficient `b/c`.
    pub fn parts(&self) -> (BigRational, BigRational) {
        let [a, b, c] = self.coefs().into_owned();
        (BigRational::new(a, c.clone()), BigRational::new(b, c))
    }

    pub fn from_parts(u: &BigRational, v: &BigRational, d: u64) -> Scalar {
        let c = u.denom().lcm(v.denom());
        let a = u.numer() * (&c / u.denom());
        let b = v.numer() * (&c / v.denom());
        Scalar::new(a, b, c, d)
    }

    fn join_radicand(&self, other: &Scalar) -> u64 {
        if self.d == other.d {
            self.d
        } else if self.is_rational() {
            if other.is_rational() {
                self.d.max(other.d)
            } else {
                other.d
            }
        } else if other.is_rational() {
            self.d
        } else {
            panic!("scalars from different quadratic fields: {} and {}", self.d, other.d)
        }
    }

    /// Sign of the value, decided exactly.
    pub fn signum(&self) -> Ordering {
        match &self.k {
            Coef::Small([a, b, _]) => sign_wide(*a as i128, *b as i128, self.d),
            Coef::Big(v) => num_sign(&v[0], &v[1], self.d),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Scalar {
        assert!(!self.is_zero(), "division by zero");
        if let Some((a, b, c)) = small(self) {
            if b == 0 {
                return from_wide(c, 0, a, self.d);
            }
            let norm = (b * b).checked_mul(self.d as i128).and_then(|t| (a * a).checked_sub(t));
            if let Some(norm) = norm {
                return from_wide(c * a, -(c * b), norm, self.d);
            }
        }
        let [a, b, c] = &*self.coefs();
        let norm = a * a - b * b * BigInt::from(self.d);
        Scalar::new(c * a, -(c * b), norm, self.d)
    }

    pub fn mul_int(&self, k: &BigInt) -> Scalar {
        if let (Some((a, b, c)), Some(k)) = (small(self), k.to_i64()) {
            return from_wide(a * k as i128, b * k as i128, c, self.d);
        }
        let [a, b, c] = &*self.coefs();
        Scalar::new(a * k, b * k, c.clone(), self.d)
    }

    pub fn div_int(&self, k: &BigInt) -> Scalar {
        if let (Some((a, b, c)), Some(k)) = (small(self), k.to_i64()) {
            assert!(k != 0, "zero denominator");
            return from_wide(a, b, c * k as i128, self.d);
        }
        let [a, b, c] = &*self.coefs();
        Scalar::new(a.clone(), b.clone(), c * k, self.d)
    }

    pub fn mul_i64(&self, k: i64) -> Scalar {
        self.mul_int(&BigInt::from(k))
    }

    pub fn div_i64(&self, k: i64) -> Scalar {
        self.div_int(&BigInt::from(k))
    }

    /// Floor when the floating estimate already brackets it.
    fn floor_estimate(&self) -> Option<i64> {
        let (v, e) = self.est;
        let (lo, hi) = ((v - e).floor(), (v + e).floor());
        if lo == hi && lo.abs() < 9.0e15 {
            Some(lo as i64)
        } else {
            None
        }
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        if let Some(k) = self.floor_estimate() {
            return BigInt::from(k);
        }
        if let Coef::Small([a, 0, c]) = self.k {
            return BigInt::from(a.div_euclid(c));
        }
        let [a, b, c] = &*self.coefs();
        if b.is_zero() {
            return a.div_floor(c);
        }
        let r = (b * b * BigInt::from(self.d)).sqrt();
        // b√d lies in [r, r+1) for b > 0 and in (-r-1, -r) for b < 0
        let lower = if b.is_positive() { a + &r } else { a - &r - 1 };
        let mut k = lower.div_floor(c);
        loop {
            let t = a - &k * c;
            if num_sign(&t, b, self.d) == Ordering::Less {
                k -= 1;
                continue;
            }
            let t1 = &t - c;
            if num_sign(&t1, b, self.d) != Ordering::Less {
                k += 1;
                continue;
            }
            return k;
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// Representative in `[0, 1)`.
    pub fn frac(&self) -> Scalar {
        let k = self.floor();
        if k.is_zero() {
            return self.clone();
        }
        self.sub_int(&k)
    }

    pub fn sub_int(&self, k: &BigInt) -> Scalar {
        self.add_int(&-k)
    }

    pub fn add_int(&self, k: &BigInt) -> Scalar {
        if let (Some((a, b, c)), Some(k)) = (small(self), k.to_i64()) {
            return from_wide(a + k as i128 * c, b, c, self.d);
        }
        let [a, b, c] = &*self.coefs();
        Scalar::new(a + k * c, b.clone(), c.clone(), self.d)
    }

    /// Nearest `f64`, computed from the exact floor and 64 exact fractional bits.
    pub fn to_f64(&self) -> f64 {
        let k = self.floor();
        let f = self.sub_int(&k);
        let scaled = f.mul_int(&(BigInt::one() << 64u32)).floor();
        k.to_f64().unwrap_or(f64::NAN) + scaled.to_f64().unwrap_or(0.0) / 18446744073709551616.0
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Serialization as the triple `a b c`.
    pub fn triple(&self) -> String {
        match &self.k {
            Coef::Small([a, b, c]) => format!("{a} {b} {c}"),
            Coef::Big(v) => format!("{} {} {}", v[0], v[1], v[2]),
        }
    }

    /// Serialization as `p/q` when rational, `a b c` otherwise.
    pub fn token(&self) -> String {
        if self.is_rational() {
            let [a, _, c] = &*self.coefs();
            format!("{a}/{c}")
        } else {
            self.triple()
        }
    }

    /// Same value carried in the field `Q(√d)`; only valid for rationals or
    /// values already in that field.
    pub fn with_radicand(mut self, d: u64) -> Scalar {
        if self.is_rational() || self.d == d {
            self.d = d;
            self
        } else {
            panic!("cannot move an irrational scalar between fields")
        }
    }
}

/// Sign of `a + b√d` for square-free `d`.
fn num_sign(a: &BigInt, b: &BigInt, d: u64) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    match (sa, sb) {
        (_, Sign::NoSign) => sign_ord(sa),
        (Sign::NoSign, _) => sign_ord(sb),
        _ if sa == sb => sign_ord(sa),
        _ => {
            if let Some((v, err)) = estimate(a, b, &BigInt::one(), d) {
                if v.abs() > err {
                    return if v < 0.0 { Ordering::Less } else { Ordering::Greater };
                }
            }
            let lhs = a * a;
            let rhs = b * b * BigInt::from(d);
            match lhs.cmp(&rhs) {
                Ordering::Greater => sign_ord(sa),
                Ordering::Less => sign_ord(sb),
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

/// `num_sign` for machine-word coefficients.
fn sign_wide(a: i128, b: i128, d: u64) -> Ordering {
    let (sa, sb) = (a.cmp(&0), b.cmp(&0));
    if sb == Ordering::Equal || sa == sb {
        return sa.then(sb);
    }
    if sa == Ordering::Equal {
        return sb;
    }
    let squares = a.checked_mul(a).zip(b.checked_mul(b).and_then(|t| t.checked_mul(d as i128)));
    match squares {
        Some((lhs, rhs)) => match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        },
        None => num_sign(&a.into(), &b.into(), d),
    }
}

fn sign_ord(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        let same = match (&self.k, &other.k) {
            (Coef::Small(x), Coef::Small(y)) => x == y,
            (Coef::Big(x), Coef::Big(y)) => x == y,
            _ => false,
        };
        same && (self.d == other.d || self.is_rational())
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.k {
            Coef::Small(v) => v.hash(state),
            Coef::Big(v) => v.hash(state),
        }
        if !self.is_rational() {
            self.d.hash(state);
        }
    }
}

/// `gcd(a, b, c)` with a machine-word path for small coefficients.
fn gcd3(a: &BigInt, b: &BigInt, c: &BigInt) -> BigInt {
    if let (Some(x), Some(y), Some(z)) = (a.to_i128(), b.to_i128(), c.to_i128()) {
        return BigInt::from(binary_gcd(binary_gcd(x.unsigned_abs(), y.unsigned_abs()), z.unsigned_abs()));
    }
    a.gcd(b).gcd(c)
}

fn binary_gcd(mut u: u128, mut v: u128) -> u128 {
    if u == 0 {
        return v;
    }
    if v == 0 {
        return u;
    }
    let shift = (u | v).trailing_zeros();
    u >>= u.trailing_zeros();
    loop {
        v >>= v.trailing_zeros();
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        v -= u;
        if v == 0 {
            return u << shift;
        }
    }
}

fn to_f64_fast(x: &BigInt) -> Option<f64> {
    match x.to_i128() {
        Some(v) => Some(v as f64),
        None => x.to_f64(),
    }
}

/// Floating estimate of `(a + b√d)/c` with a bound on its absolute error,
/// or `None` when the coefficients do not fit an `f64`.
fn estimate(a: &BigInt, b: &BigInt, c: &BigInt, d: u64) -> Option<(f64, f64)> {
    let (af, bf, cf) = (to_f64_fast(a)?, to_f64_fast(b)?, to_f64_fast(c)?);
    let t = bf * (d as f64).sqrt();
    let v = (af + t) / cf;
    let err = (af.abs() + t.abs()) / cf * 1e-14 + 1e-300;
    if v.is_finite() && err.is_finite() {
        Some((v, err))
    } else {
        None
    }
}

fn estimate_wide(a: i128, b: i128, c: i128, d: u64) -> (f64, f64) {
    let (af, bf, cf) = (a as f64, b as f64, c as f64);
    let t = bf * (d as f64).sqrt();
    let v = (af + t) / cf;
    let err = (af.abs() + t.abs()) / cf * 1e-14 + 1e-300;
    if v.is_finite() && err.is_finite() {
        (v, err)
    } else {
        (0.0, f64::INFINITY)
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Scalar) -> Ordering {
        let d = self.join_radicand(other);
        let ((x, ex), (y, ey)) = (self.est, other.est);
        if (x - y).abs() > ex + ey {
            return if x < y { Ordering::Less } else { Ordering::Greater };
        }
        if let (Some((xa, xb, xc)), Some((ya, yb, yc))) = (small(self), small(other)) {
            if xc == yc {
                return sign_wide(xa - ya, xb - yb, d);
            }
            return sign_wide(xa * yc - ya * xc, xb * yc - yb * xc, d);
        }
        let ([xa, xb, xc], [ya, yb, yc]) = (&*self.coefs(), &*other.coefs());
        if xc == yc {
            return num_sign(&(xa - ya), &(xb - yb), d);
        }
        num_sign(&(xa * yc - ya * xc), &(xb * yc - yb * xc), d)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &*self.coefs();
        if b.is_zero() {
            if c.is_one() {
                write!(f, "{}", a)
            } else {
                write!(f, "{}/{}", a, c)
            }
        } else {
            let sign = if b.is_negative() { '-' } else { '+' };
            let babs = b.abs();
            let coef = if babs.is_one() { String::new() } else { babs.to_string() };
            if c.is_one() {
                write!(f, "{}{}{}√{}", a, sign, coef, self.d)
            } else {
                write!(f, "({}{}{}√{})/{}", a, sign, coef, self.d, c)
            }
        }
    }
}

/// Coefficients widened to `i128` when stored inline.
fn small(x: &Scalar) -> Option<(i128, i128, i128)> {
    match x.k {
        Coef::Small([a, b, c]) => Some((a as i128, b as i128, c as i128)),
        Coef::Big(_) => None,
    }
}

/// `Scalar::new` for coefficients already in `i128`.
fn from_wide(mut a: i128, mut b: i128, mut c: i128, d: u64) -> Scalar {
    assert!(c != 0, "zero denominator");
    if d == 1 && b != 0 {
        match a.checked_add(b) {
            Some(s) => {
                a = s;
                b = 0;
            }
            None => return Scalar::new(a.into(), b.into(), c.into(), d),
        }
    }
    if c < 0 {
        if a == i128::MIN || b == i128::MIN || c == i128::MIN {
            return Scalar::new(a.into(), b.into(), c.into(), d);
        }
        a = -a;
        b = -b;
        c = -c;
    }
    let g = binary_gcd(binary_gcd(a.unsigned_abs(), b.unsigned_abs()), c.unsigned_abs()) as i128;
    if g > 1 {
        a /= g;
        b /= g;
        c /= g;
    }
    match (i64::try_from(a), i64::try_from(b), i64::try_from(c)) {
        (Ok(x), Ok(y), Ok(z)) => Scalar::inline(x, y, z, d),
        _ => {
            let est = estimate_wide(a, b, c, d);
            Scalar { k: Coef::Big(Box::new([a.into(), b.into(), c.into()])), d, est }
        }
    }
}

fn add_impl(x: &Scalar, y: &Scalar, negate: bool) -> Scalar {
    let d = x.join_radicand(y);
    if let (Some((xa, xb, xc)), Some((ya, yb, yc))) = (small(x), small(y)) {
        let (ya, yb) = if negate { (-ya, -yb) } else { (ya, yb) };
        if xc == yc {
            return from_wide(xa + ya, xb + yb, xc, d);
        }
        return from_wide(xa * yc + ya * xc, xb * yc + yb * xc, xc * yc, d);
    }
    let ([xa, xb, xc], [ya, yb, yc]) = (&*x.coefs(), &*y.coefs());
    let (ya, yb) = if negate { (-ya, -yb) } else { (ya.clone(), yb.clone()) };
    if xc == yc {
        return Scalar::new(xa + ya, xb + yb, xc.clone(), d);
    }
    Scalar::new(xa * yc + ya * xc, xb * yc + yb * xc, xc * yc, d)
}

fn mul_impl(x: &Scalar, y: &Scalar) -> Scalar {
    let d = x.join_radicand(y);
    if let (Some((xa, xb, xc)), Some((ya, yb, yc))) = (small(x), small(y)) {
        if xb == 0 || yb == 0 {
            return from_wide(xa * ya, xa * yb + xb * ya, xc * yc, d);
        }
        let cross = (xb * yb).checked_mul(d as i128).and_then(|t| t.checked_add(xa * ya));
        let b = (xa * yb).checked_add(xb * ya);
        if let (Some(a), Some(b)) = (cross, b) {
            return from_wide(a, b, xc * yc, d);
        }
    }
    let ([xa, xb, xc], [ya, yb, yc]) = (&*x.coefs(), &*y.coefs());
    if yb.is_zero() {
        return Scalar::new(xa * ya, xb * ya, xc * yc, d);
    }
    if xb.is_zero() {
        return Scalar::new(xa * ya, xa * yb, xc * yc, d);
    }
    let a = xa * ya + xb * yb * BigInt::from(d);
    let b = xa * yb + xb * ya;
    Scalar::new(a, b, xc * yc, d)
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                $body(self, rhs)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                $body(&self, &rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                $body(&self, rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |x, y| add_impl(x, y, false));
binop!(Sub, sub, |x, y| add_impl(x, y, true));
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

fn div_impl(x: &Scalar, y: &Scalar) -> Scalar {
    if y.is_rational() {
        assert!(!y.is_zero(), "division by zero");
        let d = x.join_radicand(y);
        if let (Some((xa, xb, xc)), Some((ya, _, yc))) = (small(x), small(y)) {
            return from_wide(xa * yc, xb * yc, xc * ya, d);
        }
        let ([xa, xb, xc], [ya, _, yc]) = (&*x.coefs(), &*y.coefs());
        return Scalar::new(xa * yc, xb * yc, xc * ya, d);
    }
    mul_impl(x, &y.recip())
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match &self.k {
            Coef::Small([a, b, c]) if *a != i64::MIN && *b != i64::MIN => {
                Scalar { k: Coef::Small([-a, -b, *c]), d: self.d, est: (-self.est.0, self.est.1) }
            }
            Coef::Small([a, b, c]) => from_wide(-(*a as i128), -(*b as i128), *c as i128, self.d),
            Coef::Big(v) => {
                let [a, b, c] = &**v;
                Scalar::new(-a, -b, c.clone(), self.d)
            }
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn golden() -> Scalar {
        Scalar::quadratic(-1, 1, 2, 5).unwrap()
    }

    /// Independent evaluation: floor((a + b√d)/c · 10^40) via integer square roots.
    fn scaled_value(s: &Scalar) -> BigInt {
        let scale = BigInt::from(10u32).pow(40);
        let bd = s.b() * &scale;
        let root = (&bd * &bd * BigInt::from(s.radicand())).sqrt();
        let root = if s.b().is_negative() { -root } else { root };
        (s.a() * &scale + root).div_floor(&s.c())
    }

    #[test]
    fn canonical_form() {
        let s = Scalar::new(BigInt::from(-2), BigInt::from(2), BigInt::from(-4), 5);
        assert_eq!(s.a(), BigInt::from(1));
        assert_eq!(s.b(), BigInt::from(-1));
        assert_eq!(s.c(), BigInt::from(2));
        assert_eq!(Scalar::rational(2, 4), Scalar::rational(1, 2).with_radicand(5));
    }

    #[test]
    fn golden_identities() {
        let t = golden();
        assert!(t > Scalar::rational(1, 2));
        assert!(t < Scalar::one());
        // θ² + θ = 1
        assert_eq!(&t * &t + &t, Scalar::one());
        assert_eq!(t.recip(), &t + Scalar::one());
        assert_eq!(t.floor(), BigInt::zero());
        assert_eq!(t.mul_i64(10).floor(), BigInt::from(6));
        assert_eq!((-&t).floor(), BigInt::from(-1));
        assert_eq!((-&t).frac(), Scalar::one() - &t);
        assert!((t.to_f64() - 0.6180339887498949).abs() < 1e-15);
    }

    #[test]
    fn display_and_tokens() {
        assert_eq!(golden().to_string(), "(-1+√5)/2");
        assert_eq!(golden().token(), "-1 1 2");
        assert_eq!(Scalar::rational(3, 10).token(), "3/10");
        assert_eq!(Scalar::rational(4, 2).to_string(), "2");
    }

    #[test]
    fn squarefree_check() {
        assert!(is_squarefree(5));
        assert!(is_squarefree(30));
        assert!(!is_squarefree(12));
        assert!(Scalar::quadratic(1, 1, 1, 8).is_none());
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        (-10_000i64..10_000, -10_000i64..10_000, 1i64..5_000, prop::sample::select(vec![2u64, 3, 5, 7]))
            .prop_map(|(a, b, c, d)| Scalar::quadratic(a, b, c, d).unwrap())
    }

    fn arb_pair() -> impl Strategy<Value = (Scalar, Scalar)> {
        (arb_scalar(), -10_000i64..10_000, -10_000i64..10_000, 1i64..5_000)
            .prop_map(|(x, a, b, c)| {
                let y = Scalar::quadratic(a, b, c, x.radicand()).unwrap();
                (x, y)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn order_matches_high_precision((x, y) in arb_pair()) {
            let (sx, sy) = (scaled_value(&x), scaled_value(&y));
            // values differ by far more than 10^-40 unless equal
            if x == y {
                prop_assert_eq!(sx, sy);
            } else {
                prop_assert_eq!(x.cmp(&y), sx.cmp(&sy));
            }
        }
    }

    proptest! {
        #[test]
        fn field_axioms((x, y) in arb_pair()) {
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            if !y.is_zero() {
                prop_assert_eq!(&(&x * &y) / &y, x.clone());
            }
            prop_assert_eq!(&x * &y, &y * &x);
        }

        #[test]
        fn floor_brackets_value(x in arb_scalar()) {
            let k = Scalar::from_bigint(x.floor());
            prop_assert!(k <= x);
            prop_assert!(x < &k + Scalar::one());
            let f = x.frac();
            prop_assert!(f >= Scalar::zero() && f < Scalar::one());
            prop_assert!((x.to_f64() - scaled_value(&x).to_f64().unwrap() / 1e40).abs() < 1e-9);
        }
    }
}
