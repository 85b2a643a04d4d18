use super::QTable;
use crate::error::{domain, Error, Result};
use crate::numeric::{ln_choose, ln_gamma, log_sum_exp};
use crate::partitions::IntegerPartition;

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return domain("binary splits need n >= 2");
    }
    Ok(())
}

fn normalize_logs(logs: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(logs);
    logs.iter().map(|l| (l - z).exp()).collect()
}

fn beta_logs(beta: f64, n: usize) -> Vec<f64> {
    let nf = n as f64;
    (1..n)
        .map(|k| {
            let kf = k as f64;
            ln_choose(n, k) + ln_gamma(beta + kf + 1.0) + ln_gamma(beta + nf - kf + 1.0) - ln_gamma(nf + 2.0 * beta + 2.0)
        })
        .collect()
}

/// `q̃_n(k)`, k = 1..n-1, for the beta family with density proportional to `(x(1-x))^beta`.
pub fn qtilde_beta_vec(beta: f64, n: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    if !(beta > -2.0) {
        return domain(format!("beta must exceed -2, got {beta}"));
    }
    Ok(normalize_logs(&beta_logs(beta, n)))
}

pub fn qtilde_beta(beta: f64, n: usize, k: usize) -> Result<f64> {
    if k == 0 || k >= n {
        return domain(format!("k = {k} outside 1..{n}"));
    }
    Ok(qtilde_beta_vec(beta, n)?[k - 1])
}

/// `C_beta = (-beta-1)/Γ(2+beta)` on (-2,-1); 1 for the other betas.
pub fn beta_constant(beta: f64) -> f64 {
    if beta > -2.0 && beta < -1.0 {
        (-beta - 1.0) / ln_gamma(2.0 + beta).exp()
    } else {
        1.0
    }
}

/// `Z_n = ∫ (1 - x^n - (1-x)^n) C_beta (x(1-x))^beta dx`.
pub fn normalizer_beta(beta: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(beta > -2.0) {
        return domain(format!("beta must exceed -2, got {beta}"));
    }
    Ok(beta_constant(beta) * log_sum_exp(&beta_logs(beta, n)).exp())
}

fn ford_logs(alpha: f64, n: usize) -> Vec<f64> {
    let nf = n as f64;
    (1..n)
        .map(|k| {
            let kf = k as f64;
            let bracket = alpha * nf * (nf - 1.0) / (2.0 * kf * (nf - kf)) + 1.0 - 2.0 * alpha;
            ln_choose(n - 2, k - 1) + bracket.ln() + ln_gamma(kf - alpha) + ln_gamma(nf - kf - alpha)
                - ln_gamma(nf - alpha)
                - ln_gamma(1.0 - alpha)
        })
        .collect()
}

/// `q̃_n(k)` for Ford's alpha model, straight from the closed form.
pub fn qtilde_ford_vec(alpha: f64, n: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    if !(0.0..1.0).contains(&alpha) {
        return domain(format!("Ford alpha must lie in [0,1), got {alpha}"));
    }
    let v: Vec<f64> = ford_logs(alpha, n).into_iter().map(f64::exp).collect();
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Numeric(format!("Ford weights at n = {n} sum to {total}")));
    }
    Ok(v.into_iter().map(|x| x / total).collect())
}

pub fn qtilde_ford(alpha: f64, n: usize, k: usize) -> Result<f64> {
    if k == 0 || k >= n {
        return domain(format!("k = {k} outside 1..{n}"));
    }
    Ok(qtilde_ford_vec(alpha, n)?[k - 1])
}

/// `Z_n` for the Ford measure with density `2 f_alpha(x)` on (0,1).
pub fn normalizer_ford(alpha: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(0.0..1.0).contains(&alpha) {
        return domain(format!("Ford alpha must lie in [0,1), got {alpha}"));
    }
    let nf = n as f64;
    let lead = (2.0f64).ln() - ln_gamma(1.0 - alpha);
    let logs: Vec<f64> = (1..n)
        .map(|k| {
            let kf = k as f64;
            let ln_b = ln_gamma(kf - alpha) + ln_gamma(nf - kf - alpha) - ln_gamma(nf - 2.0 * alpha);
            let tail = (1.0 - 2.0 * alpha) * (kf - alpha) * (nf - kf - alpha) / ((nf - 2.0 * alpha) * (nf - 2.0 * alpha + 1.0));
            lead + ln_choose(n, k) + ln_b + (alpha / 2.0 + tail).ln()
        })
        .collect();
    Ok(log_sum_exp(&logs).exp())
}

/// Probability density of the Ford dislocation measure `f_alpha` on (0,1), so that the
/// binary weight is `2 f_alpha`.
pub fn ford_density(alpha: f64, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return domain(format!("x = {x} outside (0,1)"));
    }
    let y = x * (1.0 - x);
    Ok((alpha / 2.0 * y.powf(-1.0 - alpha) + (1.0 - 2.0 * alpha) * y.powf(-alpha)) / ln_gamma(1.0 - alpha).exp())
}

/// The two binary families, for density lookups.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BinaryFamily {
    AldousBeta(f64),
    FordAlpha(f64),
}

/// Density of the dislocation measure in `s_1 = x`, supported on [1/2, 1).
pub fn dislocation_density(family: BinaryFamily, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return domain(format!("x = {x} outside (0,1)"));
    }
    if x < 0.5 {
        return Ok(0.0);
    }
    match family {
        BinaryFamily::AldousBeta(beta) => Ok(beta_constant(beta) * (x * (1.0 - x)).powf(beta)),
        BinaryFamily::FordAlpha(alpha) => Ok(2.0 * ford_density(alpha, x)?),
    }
}

/// Lévy density `((α-1)/Γ(1/α)) (1-e^{-x})^{1/α-2} e^{-(1-1/α)x}` of the stable family.
pub fn stable_levy_density(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return domain(format!("stable alpha must lie in (1,2), got {alpha}"));
    }
    if !(x > 0.0) {
        return domain(format!("x = {x} must be positive"));
    }
    let a = 1.0 / alpha;
    let ln = (alpha - 1.0).ln() - ln_gamma(a) + (a - 2.0) * (-(-x).exp_m1()).ln() - (1.0 - a) * x;
    Ok(ln.exp())
}

/// Binary table of `q_n` from `q̃_n(k)`, k = 1..n-1.
pub fn symmetrize(qtilde: &[f64], n: usize) -> QTable {
    let mut entries = Vec::new();
    for k in (1..=n / 2).rev() {
        let v = if 2 * k == n { qtilde[k - 1] } else { qtilde[k - 1] + qtilde[n - k - 1] };
        entries.push((IntegerPartition::new(vec![n - k, k]).unwrap(), v));
    }
    QTable::new(n, entries).unwrap()
}

/// Symmetric `q̃_n` from a binary table.
pub fn desymmetrize(table: &QTable) -> Result<Vec<f64>> {
    let n = table.n;
    let mut out = vec![0.0; n - 1];
    for (p, v) in table.entries() {
        if p.r() != 2 {
            if *v != 0.0 {
                return domain(format!("table puts mass on non-binary split {p}"));
            }
            continue;
        }
        let k = p.parts()[1];
        if 2 * k == n {
            out[k - 1] = *v;
        } else {
            out[k - 1] = v / 2.0;
            out[n - k - 1] = v / 2.0;
        }
    }
    Ok(out)
}

/// Pre-limit of the dislocation mass on `[a, b]`: `Z_n` times the `q̃_n` mass on `[an, bn]`.
pub fn recover_dislocation_mass(rule: &super::RuleSpec, n: usize, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return domain(format!("need 0 <= a <= b <= 1, got [{a}, {b}]"));
    }
    if a == b {
        return Ok(0.0);
    }
    let qt = rule.qtilde(n)?;
    let z = rule.normalizer(n)?;
    let nf = n as f64;
    let mass: f64 = (1..n).filter(|&k| k as f64 >= a * nf && k as f64 <= b * nf).map(|k| qt[k - 1]).sum();
    Ok(z * mass)
}
