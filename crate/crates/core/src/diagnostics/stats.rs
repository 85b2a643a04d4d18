use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Result};
use crate::numeric::integrate;

/// Count, moments, range and the sorted sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalSummary {
    count: usize,
    mean: f64,
    m2: f64,
    sorted: Vec<f64>,
}

impl EmpiricalSummary {
    pub fn new(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return domain("summary of an empty sample");
        }
        if xs.iter().any(|x| x.is_nan()) {
            return domain("sample contains NaN");
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let mut sorted = xs.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Ok(EmpiricalSummary { count: xs.len(), mean, m2, sorted })
    }

    /// Pooled summary; sample order is irrelevant.
    pub fn merge(&self, other: &Self) -> Self {
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + delta * delta * na * nb / n;
        let mut sorted = Vec::with_capacity(self.sorted.len() + other.sorted.len());
        let (mut i, mut j) = (0, 0);
        while i < self.sorted.len() && j < other.sorted.len() {
            if self.sorted[i] <= other.sorted[j] {
                sorted.push(self.sorted[i]);
                i += 1;
            } else {
                sorted.push(other.sorted[j]);
                j += 1;
            }
        }
        sorted.extend_from_slice(&self.sorted[i..]);
        sorted.extend_from_slice(&other.sorted[j..]);
        EmpiricalSummary { count: self.count + other.count, mean, m2, sorted }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for a single point).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().unwrap()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let i = ((p.clamp(0.0, 1.0) * (self.count - 1) as f64).round()) as usize;
        self.sorted[i]
    }

    pub fn median(&self) -> f64 {
        let n = self.count;
        if n % 2 == 1 {
            self.sorted[n / 2]
        } else {
            0.5 * (self.sorted[n / 2 - 1] + self.sorted[n / 2])
        }
    }

    /// Counts in `bins` equal cells of `[lo, hi)`; points outside are dropped.
    pub fn histogram(&self, lo: f64, hi: f64, bins: usize) -> Vec<usize> {
        let mut out = vec![0; bins];
        let w = (hi - lo) / bins as f64;
        for &x in &self.sorted {
            if x >= lo && x < hi {
                out[(((x - lo) / w) as usize).min(bins - 1)] += 1;
            }
        }
        out
    }
}

/// Asymptotic Kolmogorov tail `P(K > λ)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=200 {
        let j = j as f64;
        let term = 2.0 * (-1f64).powi(j as i32 - 1) * (-2.0 * j * j * lambda * lambda).exp();
        s += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

/// KS statistic and p-value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p: f64,
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_tail((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> Result<KsResult> {
    if xs.is_empty() {
        return domain("KS test of an empty sample");
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult { statistic: d, p: ks_p(d, n) })
}

/// Two-sample KS test: the sup-distance of the empirical CDFs, ties handled exactly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return domain("KS test of an empty sample");
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.total_cmp(q));
    y.sort_by(|p, q| p.total_cmp(q));
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(KsResult { statistic: d, p: ks_p(d, ne) })
}

/// Pearson goodness of fit over cells with positive expected probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p: f64,
}

pub fn chi_square(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return domain("observed and expected lengths differ");
    }
    let n: u64 = observed.iter().sum();
    let total: f64 = expected.iter().sum();
    if n == 0 || !(total > 0.0) {
        return domain("empty chi-square table");
    }
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &e) in observed.iter().zip(expected) {
        let e = e / total * n as f64;
        if e <= 0.0 {
            if o > 0 {
                // an impossible cell was hit
                return Ok(ChiSquare { statistic: f64::INFINITY, df: 0, p: 0.0 });
            }
            continue;
        }
        cells += 1;
        stat += (o as f64 - e).powi(2) / e;
    }
    let df = cells.max(2) - 1;
    let p = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    Ok(ChiSquare { statistic: stat, df, p })
}

/// CDF of a density on `[lo, hi]` tabulated by quadrature and interpolated linearly.
#[derive(Clone, Debug)]
pub struct TabulatedCdf {
    lo: f64,
    h: f64,
    cum: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new<F: Fn(f64) -> f64>(density: F, lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(hi > lo) || cells == 0 {
            return domain("empty CDF range");
        }
        let h = (hi - lo) / cells as f64;
        let mut cum = Vec::with_capacity(cells + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            let a = lo + i as f64 * h;
            acc += integrate(&density, a, a + h, 1e-13)?;
            cum.push(acc);
        }
        Ok(TabulatedCdf { lo, h, cum })
    }

    /// Mass captured on `[lo, hi]`.
    pub fn mass(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.lo) / self.h;
        if t <= 0.0 {
            return 0.0;
        }
        let i = t.floor() as usize;
        if i + 1 >= self.cum.len() {
            return self.mass();
        }
        let f = t - i as f64;
        self.cum[i] + f * (self.cum[i + 1] - self.cum[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn summary_moments() {
        let s = EmpiricalSummary::new(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean(), 2.5);
        assert!((s.variance() - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.median(), 2.5);
        assert_eq!(s.histogram(0.0, 4.0, 2), vec![1, 2]);
        assert!(EmpiricalSummary::new(&[]).is_err());
    }

    #[test]
    fn merge_matches_pooled() {
        let a = [0.5, 3.0, -1.0];
        let b = [2.0, 2.0, 7.5, 0.25];
        let m = EmpiricalSummary::new(&a).unwrap().merge(&EmpiricalSummary::new(&b).unwrap());
        let all: Vec<f64> = a.iter().chain(&b).cloned().collect();
        let p = EmpiricalSummary::new(&all).unwrap();
        assert_eq!(m.sorted(), p.sorted());
        assert!((m.mean() - p.mean()).abs() < 1e-14);
        assert!((m.variance() - p.variance()).abs() < 1e-13);
    }

    #[test]
    fn ks_two_sample_extremes() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
        assert_eq!(ks_two_sample(&a, &[5.0, 6.0]).unwrap().statistic, 1.0);
        assert!(ks_two_sample(&a, &[]).is_err());
    }

    #[test]
    fn ks_two_sample_calibration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let runs = 1000;
        let mut low = 0;
        for _ in 0..runs {
            let a: Vec<f64> = (0..200).map(|_| rng.gen()).collect();
            let b: Vec<f64> = (0..150).map(|_| rng.gen()).collect();
            if ks_two_sample(&a, &b).unwrap().p < 0.05 {
                low += 1;
            }
        }
        let frac = low as f64 / runs as f64;
        assert!((0.03..=0.07).contains(&frac), "{frac}");
    }

    #[test]
    fn ks_one_sample_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xs: Vec<f64> = (0..5000).map(|_| rng.gen()).collect();
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap().p > 0.01);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(ks_one_sample(&sq, |x| x.clamp(0.0, 1.0)).unwrap().p < 1e-6);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // P(K > 1.3581) = 0.05
        assert!((kolmogorov_tail(1.3581) - 0.05).abs() < 1e-4);
        assert_eq!(kolmogorov_tail(0.0), 1.0);
    }

    #[test]
    fn chi_square_basic() {
        let c = chi_square(&[50, 50], &[0.5, 0.5]).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.df, 1);
        assert!((c.p - 1.0).abs() < 1e-12);
        let bad = chi_square(&[10, 1], &[1.0, 0.0]).unwrap();
        assert_eq!(bad.p, 0.0);
    }

    #[test]
    fn tabulated_exponential() {
        let t = TabulatedCdf::new(|x: f64| (-x).exp(), 0.0, 30.0, 3000).unwrap();
        for &x in &[0.1, 1.0, 2.5] {
            assert!((t.eval(x) - (1.0 - (-x).exp())).abs() < 1e-5);
        }
        assert_eq!(t.eval(-1.0), 0.0);
    }
}
