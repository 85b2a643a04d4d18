use crate::error::{domain, Result};
use crate::numeric::{ln_factorial, ln_gamma};
use crate::partitions::IntegerPartition;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return domain(format!("stable alpha must lie in (1,2), got {alpha}"));
    }
    Ok(())
}

/// Splitting rule of the stable tree of index `alpha`.
pub fn q_stable(alpha: f64, shape: &IntegerPartition) -> Result<f64> {
    check_alpha(alpha)?;
    let n = shape.n();
    let r = shape.r();
    if n < 2 || r < 2 {
        return domain(format!("{shape} is not a split"));
    }
    let a = 1.0 / alpha;
    let mut ln = ln_factorial(n);
    for &k in shape.parts() {
        ln += ln_gamma(k as f64 - a) - ln_gamma(1.0 - a) - ln_factorial(k);
    }
    for (_, m) in shape.multiplicities() {
        ln -= ln_factorial(m);
    }
    ln += ln_gamma(2.0 - a) - (r as f64 - 2.0) * alpha.ln() + ln_gamma(r as f64 - alpha)
        - ln_gamma(n as f64 - a)
        - ln_gamma(2.0 - alpha);
    Ok(ln.exp())
}

/// `Z_n = α Γ(n - 1/α) / Γ(n - 1)`.
pub fn normalizer_stable(alpha: f64, n: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if n < 2 {
        return domain("normalizer needs n >= 2");
    }
    Ok((alpha.ln() + ln_gamma(n as f64 - 1.0 / alpha) - ln_gamma(n as f64 - 1.0)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::integer_partitions;

    #[test]
    fn three_leaves() {
        let q = q_stable(1.5, &"2-1".parse().unwrap()).unwrap();
        assert!((q - 0.75).abs() < 1e-12, "{q}");
        let q = q_stable(1.5, &"1-1-1".parse().unwrap()).unwrap();
        assert!((q - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sums_to_one() {
        for &alpha in &[1.1, 1.5, 1.9] {
            for n in 2..=14 {
                let s: f64 = integer_partitions(n, 2).iter().map(|p| q_stable(alpha, p).unwrap()).sum();
                assert!((s - 1.0).abs() < 1e-12, "alpha={alpha} n={n}: {s}");
            }
        }
    }

    #[test]
    fn two_leaves_is_sure() {
        assert!((q_stable(1.3, &"1-1".parse().unwrap()).unwrap() - 1.0).abs() < 1e-14);
        assert!(q_stable(2.0, &"1-1".parse().unwrap()).is_err());
    }
}
