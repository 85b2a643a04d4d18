//! Numeric helpers: log-gamma arithmetic, adaptive quadrature and an exact/float scalar trait.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use statrs::function::gamma::ln_gamma;

/// Field arithmetic shared by the float and exact-rational evaluation paths.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(v: u64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero_value(&self) -> bool;
    fn is_negative(&self) -> bool;

    fn powu(&self, e: u32) -> Self {
        let mut out = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        out
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_u64(v: u64) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn powu(&self, e: u32) -> Self {
        self.powi(e as i32)
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

/// `p/q` as an exact rational.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Recognise `x` as `p/q` with `q <= max_den`, if it is one to within 1e-12.
pub fn small_rational(x: f64, max_den: i64) -> Option<BigRational> {
    for q in 1..=max_den {
        let p = (x * q as f64).round();
        if (p / q as f64 - x).abs() < 1e-12 {
            return Some(ratio(p as i64, q));
        }
    }
    None
}

pub fn factorial_big(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Generalised binomial coefficient binom(a, r) for real `a`.
pub fn binom_real<S: Scalar>(a: &S, r: u32) -> S {
    let mut out = S::one();
    for i in 0..r {
        out = out * (a.clone() - S::from_u64(i as u64)) / S::from_u64(i as u64 + 1);
    }
    out
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Adaptive double-exponential quadrature on a finite interval.
///
/// Intervals whose error estimate exceeds the share of `tol` are bisected.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // tolerances below rounding level of the whole integral cannot be met by bisection
    let coarse = quadrature::integrate(f, a, b, tol).integral;
    let tol = tol.max(1e-14 * coarse.abs());
    let v = integrate_rec(f, a, b, tol, 1e-16 * coarse.abs(), 0)?;
    if !v.is_finite() {
        return Err(Error::Numeric(format!("non-finite integral on [{a}, {b}]")));
    }
    Ok(v)
}

fn integrate_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, floor: f64, depth: u32) -> Result<f64> {
    let tol = tol.max(floor);
    let out = quadrature::integrate(f, a, b, tol);
    if out.error_estimate <= tol || depth >= 24 {
        if depth >= 24 && out.error_estimate > 100.0 * tol {
            return Err(Error::Numeric(format!(
                "quadrature did not converge on [{a}, {b}] (err {:e})",
                out.error_estimate
            )));
        }
        return Ok(out.integral);
    }
    let m = 0.5 * (a + b);
    Ok(integrate_rec(f, a, m, 0.5 * tol, floor, depth + 1)? + integrate_rec(f, m, b, 0.5 * tol, floor, depth + 1)?)
}

/// Quadrature of `f` over `[a, inf)` through the map `x = a + t / (1 - t)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> Result<f64> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        f(a + t / s) / (s * s)
    };
    // the map compresses the tail into a thin layer near t = 1
    let cuts = [0.0, 0.5, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.999, 1.0];
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate(&g, w[0], w[1], tol / cuts.len() as f64)?;
    }
    Ok(total)
}

/// Quadrature of `x^(b-1) h(x)` over `[0, inf)`. On `[0, 1]` the map `u = x^b` removes the
/// power singularity; the tail is integrated directly.
pub fn integrate_power_weight<F: Fn(f64) -> f64>(h: &F, b: f64, tol: f64) -> Result<f64> {
    let inv = 1.0 / b;
    let g = |u: f64| h(u.powf(inv));
    let head = integrate(&g, 0.0, 1.0, 0.5 * tol * b)? / b;
    let tail = |x: f64| {
        let v = h(x);
        if v == 0.0 {
            0.0
        } else {
            x.powf(b - 1.0) * v
        }
    };
    Ok(head + integrate_to_inf(&tail, 1.0, 0.5 * tol)?)
}

/// Quadrature of `x^(a-1) (1-x)^(b-1) h(x, 1-x)` over `(0, 1)`; each half is mapped by
/// `u = x^a` or `u = (1-x)^b` so the endpoint powers disappear. `h` receives both `x` and
/// `1-x` so neither is formed by cancellation.
pub fn integrate_beta_weight<F: Fn(f64, f64) -> f64>(h: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let left = |u: f64| {
        let x = u.powf(1.0 / a);
        (1.0 - x).powf(b - 1.0) * h(x, 1.0 - x)
    };
    let right = |u: f64| {
        let y = u.powf(1.0 / b);
        (1.0 - y).powf(a - 1.0) * h(1.0 - y, y)
    };
    let l = integrate(&left, 0.0, 0.5f64.powf(a), tol * a / 2.0)? / a;
    let r = integrate(&right, 0.0, 0.5f64.powf(b), tol * b / 2.0)? / b;
    Ok(l + r)
}

/// Bisection root of a monotone function on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol {
            return mid;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let v = integrate_to_inf(&|x: f64| (-x * x).exp(), 0.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
    }

    #[test]
    fn power_weight_gamma() {
        // int x^(b-1) e^-x = Gamma(b)
        for b in [0.3, 0.75, 2.5] {
            let v = integrate_power_weight(&|x: f64| (-x).exp(), b, 1e-12).unwrap();
            assert!((v - ln_gamma(b).exp()).abs() < 1e-9, "b={b} v={v}");
        }
    }

    #[test]
    fn beta_weight_is_beta_function() {
        for &(a, b) in &[(0.5, 0.5), (0.3, 2.0), (3.0, 0.2), (1.0, 1.0)] {
            let v = integrate_beta_weight(&|_, _| 1.0, a, b, 1e-12).unwrap();
            let exact = (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp();
            assert!((v - exact).abs() < 1e-9 * exact, "{a} {b}: {v} vs {exact}");
        }
    }

    #[test]
    fn rational_detection() {
        assert_eq!(small_rational(1.5, 4), Some(ratio(3, 2)));
        assert_eq!(small_rational(0.25, 4), Some(ratio(1, 4)));
        assert_eq!(small_rational(0.3, 4), None);
    }

    #[test]
    fn real_binomial() {
        // binom(3/2, 2) = 3/8, binom(3/2, 3) = -1/16
        let a = ratio(3, 2);
        assert_eq!(binom_real(&a, 2), ratio(3, 8));
        assert_eq!(binom_real(&a, 3), ratio(-1, 16));
    }
}
