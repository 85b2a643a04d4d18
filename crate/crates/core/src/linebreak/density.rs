//! One-sided stable and Mittag-Leffler densities.
//!
//! With `A(φ) = [sin(αφ)^α sin((1-α)φ)^{1-α} / sin φ]^{1/(1-α)}` (Kanter), the Mittag-Leffler
//! density is `g(s) = s^{α/(1-α)} / ((1-α)π) ∫_0^π A(φ) exp(-s^{1/(1-α)} A(φ)) dφ`; for
//! `s <= 1` its power series is used instead.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::numeric::{integrate, ln_gamma};

const SERIES_TERMS: usize = 90;

fn check_alpha(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {a}"));
    }
    Ok(())
}

fn ln_sinc(x: f64) -> f64 {
    if x < 1e-4 {
        let x2 = x * x;
        -x2 / 6.0 - x2 * x2 / 180.0
    } else {
        (x.sin() / x).ln()
    }
}

// the ln φ terms cancel exactly, so this stays accurate as φ -> 0
fn ln_kanter_a(a: f64, phi: f64) -> f64 {
    let b = 1.0 - a;
    (a * (a.ln() + ln_sinc(a * phi)) + b * (b.ln() + ln_sinc(b * phi)) - ln_sinc(phi)) / b
}

/// `ln ∫_0^π A(φ) exp(-c A(φ)) dφ`, shifted by the integrand's peak so large `c` does not
/// underflow.
fn ln_kanter_integral(a: f64, c: f64) -> Result<f64> {
    let a0 = ln_kanter_a(a, 0.0);
    let e = |p: f64| {
        let la = ln_kanter_a(a, p);
        la - c * la.exp()
    };
    // A increases on (0, π); the exponent peaks where A = 1/c, or at 0 when A(0) > 1/c
    let (peak, m) = if a0 >= -c.ln() {
        (0.0, e(0.0))
    } else {
        let mut lo = 0.0;
        let mut hi = PI - 1e-12;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ln_kanter_a(a, mid) < -c.ln() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = 0.5 * (lo + hi);
        (p, e(p))
    };
    let f = |p: f64| {
        let v = (e(p) - m).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // rounding in c A limits the relative accuracy of the integrand
    let tol = 1e-14 * (c * a0.exp()).max(1.0);
    let mut total = 0.0;
    if peak > 0.0 {
        total += integrate(&f, 0.0, peak, tol)?;
    }
    total += integrate(&f, peak, PI, tol)?;
    Ok(m + total.ln())
}

pub(crate) fn series_coefs(alpha: f64) -> Vec<f64> {
    (1..=SERIES_TERMS)
        .map(|k| {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0)).exp() * (PI * alpha * kf).sin() / (PI * alpha)
        })
        .collect()
}

pub(crate) fn series_eval(coefs: &[f64], s: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

/// `ln g_α(s)` without tables.
pub(crate) fn ln_g_direct(alpha: f64, s: f64, coefs: Option<&[f64]>) -> Result<f64> {
    if (alpha - 0.5).abs() < 1e-15 {
        return Ok(-0.5 * PI.ln() - s * s / 4.0);
    }
    if s <= 1.0 {
        let owned;
        let c = match coefs {
            Some(c) => c,
            None => {
                owned = series_coefs(alpha);
                &owned
            }
        };
        return Ok(series_eval(c, s).ln());
    }
    ln_g_kanter(alpha, s)
}

pub(crate) fn ln_g_kanter(alpha: f64, s: f64) -> Result<f64> {
    let p = 1.0 / (1.0 - alpha);
    Ok(-((1.0 - alpha) * PI).ln() + alpha * p * s.ln() + ln_kanter_integral(alpha, s.powf(p))?)
}

/// Density of the positive stable law with Laplace transform `exp(-λ^ahat)`.
pub fn stable_density(ahat: f64, t: f64) -> Result<f64> {
    check_alpha(ahat)?;
    if !(t > 0.0) {
        return domain(format!("t = {t} must be positive"));
    }
    if (ahat - 0.5).abs() < 1e-15 {
        return Ok(t.powf(-1.5) * (-1.0 / (4.0 * t)).exp() / (2.0 * PI.sqrt()));
    }
    // f(t) = α t^{-1-α} g(t^{-α})
    let ln = ahat.ln() - (1.0 + ahat) * t.ln() + ln_g_direct(ahat, t.powf(-ahat), None)?;
    Ok(ln.exp())
}

/// Mittag-Leffler density `g_α(s) = (1/α) s^{-1-1/α} f_α(s^{-1/α})`.
pub fn g_density(alpha: f64, s: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(s > 0.0) {
        return domain(format!("s = {s} must be positive"));
    }
    Ok(ln_g_direct(alpha, s, None)?.exp())
}
