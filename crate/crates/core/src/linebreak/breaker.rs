//! Tabulated `ln g_α` and the two rejection samplers built on it.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use super::density::{ln_g_kanter, series_coefs};
use crate::error::{Error, Result};
use crate::numeric::{bisect, integrate, integrate_power_weight, ln_gamma};

const GRID: usize = 8192;
const N_THETA: usize = 64;
const MARGIN: f64 = 0.01;
const MAX_TRIES: usize = 100_000;

/// Acceptance counters of a [`LineBreaker`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SamplerStats {
    pub proposals: u64,
    pub accepted: u64,
    pub fallbacks: u64,
}

impl SamplerStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            return f64::NAN;
        }
        self.accepted as f64 / self.proposals as f64
    }
}

/// Per-α tables: `ln g` on a uniform grid of `[0, s_max]`, and for each gamma scale `θ` the
/// suffix maxima of `ln(y g(y)) + y/θ` used as rejection bounds.
pub struct LineBreaker {
    alpha: f64,
    b: f64,
    coefs: Vec<f64>,
    h: f64,
    s_max: f64,
    ln_g: Vec<f64>,
    thetas: Vec<f64>,
    // suffix[j][i] = max over i' >= i of L(s_i') + s_i'/θ_j, or +inf when θ_j is unusable there
    suffix: Vec<Vec<f64>>,
    // sup_s ln g(s) + s/θ_j
    sup_g: Vec<f64>,
    proposals: AtomicU64,
    accepted: AtomicU64,
    fallbacks: AtomicU64,
}

impl std::fmt::Debug for LineBreaker {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LineBreaker").field("alpha", &self.alpha).field("s_max", &self.s_max).finish()
    }
}

fn half(a: f64) -> bool {
    (a - 0.5).abs() < 1e-15
}

impl LineBreaker {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let coefs = series_coefs(alpha);
        let exact = |s: f64| -> Result<f64> {
            if half(alpha) {
                Ok(-0.5 * PI.ln() - s * s / 4.0)
            } else if s <= 1.0 {
                Ok(super::density::series_eval(&coefs, s).ln())
            } else {
                ln_g_kanter(alpha, s)
            }
        };
        let mut s_max = 2.0;
        while exact(s_max)? > -1000.0 {
            s_max *= 2.0;
        }
        let h = s_max / GRID as f64;
        let ln_g: Vec<f64> = (0..=GRID)
            .into_par_iter()
            .map(|i| exact(i as f64 * h))
            .collect::<Result<_>>()?;
        let thetas: Vec<f64> =
            (0..N_THETA).map(|j| (1e-3f64.ln() + (50.0f64 / 1e-3).ln() * j as f64 / (N_THETA - 1) as f64).exp()).collect();
        let mut suffix = Vec::with_capacity(N_THETA);
        let mut sup_g = Vec::with_capacity(N_THETA);
        let slope_end = (ln_g[GRID] - ln_g[GRID - 1]) / h;
        for &th in &thetas {
            // past s_max everything is rejected, so a bound only has to hold on the grid; still,
            // a scale whose objective is rising at s_max is not worth proposing from
            let usable = slope_end + 1.0 / th < 0.0;
            let mut col = vec![f64::INFINITY; GRID + 1];
            let mut best = f64::NEG_INFINITY;
            let mut best_g = f64::NEG_INFINITY;
            for i in (0..=GRID).rev() {
                let s = i as f64 * h;
                let l = if i == 0 { f64::NEG_INFINITY } else { ln_g[i] + s.ln() };
                best = best.max(l + s / th);
                best_g = best_g.max(ln_g[i] + s / th);
                if usable {
                    col[i] = best;
                }
            }
            suffix.push(col);
            sup_g.push(if usable { best_g } else { f64::INFINITY });
        }
        Ok(LineBreaker {
            alpha,
            b: (1.0 - alpha) / alpha,
            coefs,
            h,
            s_max,
            ln_g,
            thetas,
            suffix,
            sup_g,
            proposals: AtomicU64::new(0),
            accepted: AtomicU64::new(0),
            fallbacks: AtomicU64::new(0),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Upper end of the table; beyond it `g < e^{-1000}`.
    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn stats(&self) -> SamplerStats {
        SamplerStats {
            proposals: self.proposals.load(Ordering::Relaxed),
            accepted: self.accepted.load(Ordering::Relaxed),
            fallbacks: self.fallbacks.load(Ordering::Relaxed),
        }
    }

    /// `ln g_α(s)`: closed form at 1/2, series below 1, cubic interpolation in the table, and
    /// direct quadrature past it.
    pub fn ln_g(&self, s: f64) -> Result<f64> {
        if half(self.alpha) {
            return Ok(-0.5 * PI.ln() - s * s / 4.0);
        }
        if s <= 1.0 {
            return Ok(super::density::series_eval(&self.coefs, s).ln());
        }
        if s >= self.s_max {
            return ln_g_kanter(self.alpha, s);
        }
        let x = s / self.h;
        let i = (x.floor() as usize).clamp(1, GRID - 2);
        let t = x - i as f64;
        let (p0, p1, p2, p3) = (self.ln_g[i - 1], self.ln_g[i], self.ln_g[i + 1], self.ln_g[i + 2]);
        // Lagrange through nodes -1, 0, 1, 2
        Ok(-t * (t - 1.0) * (t - 2.0) / 6.0 * p0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * p1
            - (t + 1.0) * t * (t - 2.0) / 2.0 * p2
            + (t + 1.0) * t * (t - 1.0) / 6.0 * p3)
    }

    /// Density `Γ(k+1-α)/Γ(k/α) s^{k/α-1} g_α(s)` of the total length of the `k`-leaf tree.
    pub fn ln_initial_density(&self, k: usize, s: f64) -> Result<f64> {
        let a = k as f64 / self.alpha;
        Ok(ln_gamma(k as f64 + 1.0 - self.alpha) - ln_gamma(a) + (a - 1.0) * s.ln() + self.ln_g(s)?)
    }

    fn count(&self, proposals: u64, accepted: bool) {
        self.proposals.fetch_add(proposals, Ordering::Relaxed);
        if accepted {
            self.accepted.fetch_add(1, Ordering::Relaxed);
        }
    }

    /// Draw `S_k` by rejection from the best gamma envelope `Gamma(k/α, θ)` on the θ grid.
    pub fn sample_initial<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<f64> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        let a = k as f64 / self.alpha;
        let (j, ln_m) = (0..N_THETA)
            .map(|j| (j, a * self.thetas[j].ln() + self.sup_g[j]))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if !ln_m.is_finite() {
            return Err(Error::Numeric(format!("no gamma envelope for k = {k}")));
        }
        let th = self.thetas[j];
        let q = self.sup_g[j] + MARGIN;
        let prop = Gamma::new(a, th).map_err(|e| Error::Numeric(e.to_string()))?;
        for tries in 1..=MAX_TRIES {
            let s: f64 = prop.sample(rng);
            if !(s > 0.0) || s >= self.s_max {
                continue;
            }
            let lr = self.ln_g(s)? + s / th - q;
            if lr > 0.0 {
                log::warn!("initial envelope exceeded at s = {s} (log ratio {lr:e})");
            }
            if rng.gen::<f64>().ln() < lr {
                self.count(tries as u64, true);
                log::trace!("S_{k} accepted after {tries} proposals");
                return Ok(s);
            }
        }
        self.count(MAX_TRIES as u64, false);
        Err(Error::Numeric(format!("S_{k} envelope rejected {MAX_TRIES} proposals")))
    }

    /// Density of `S_{k+1}` given `S_k = z`: `(α/Γ(b)) (y-z)^{b-1} y g(y) / g(z)` on `y > z`.
    pub fn ln_transition_density(&self, z: f64, y: f64) -> Result<f64> {
        if y <= z {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.alpha.ln() - ln_gamma(self.b) + (self.b - 1.0) * (y - z).ln() + y.ln() + self.ln_g(y)? - self.ln_g(z)?)
    }

    /// Draw `S_{k+1}` given `S_k = z`.
    pub fn sample_next<R: Rng + ?Sized>(&self, z: f64, rng: &mut R) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::Domain(format!("current length {z} must be positive")));
        }
        if z < self.s_max {
            let i = ((z / self.h).floor() as usize).min(GRID);
            let (j, ln_m) = (0..N_THETA)
                .map(|j| {
                    let th = self.thetas[j];
                    (j, self.alpha.ln() + self.b * th.ln() + self.suffix[j][i] - z / th - self.ln_g(z).unwrap_or(f64::NAN))
                })
                .filter(|x| x.1.is_finite())
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap_or((0, f64::INFINITY));
            if ln_m < 100f64.ln() {
                let th = self.thetas[j];
                let q = self.suffix[j][i] + MARGIN;
                let prop = Gamma::new(self.b, th).map_err(|e| Error::Numeric(e.to_string()))?;
                for tries in 1..=MAX_TRIES {
                    let x: f64 = prop.sample(rng);
                    let y = z + x;
                    if !(x > 0.0) || y >= self.s_max {
                        continue;
                    }
                    let lr = y.ln() + self.ln_g(y)? + y / th - q;
                    if lr > 0.0 {
                        log::warn!("transition envelope exceeded at z = {z}, y = {y} (log ratio {lr:e})");
                    }
                    if rng.gen::<f64>().ln() < lr {
                        self.count(tries as u64, true);
                        return Ok(y);
                    }
                }
                self.count(MAX_TRIES as u64, false);
            }
        }
        self.fallbacks.fetch_add(1, Ordering::Relaxed);
        log::debug!("inverse-CDF fallback for S given z = {z}");
        self.invert_next(z, rng.gen())
    }

    /// Inverse CDF of the increment `y - z`, by quadrature in `u = x^b`.
    fn invert_next(&self, z: f64, u: f64) -> Result<f64> {
        let lgz = self.ln_g(z)?;
        let h = |x: f64| match self.ln_g(z + x) {
            Ok(l) => ((z + x).ln() + l - lgz).exp(),
            Err(_) => f64::NAN,
        };
        let total = integrate_power_weight(&h, self.b, 1e-12)?;
        let inv = 1.0 / self.b;
        let hu = |v: f64| h(v.powf(inv));
        let cdf = |x: f64| integrate(&hu, 0.0, x.powf(self.b), 1e-12).map(|v| v / self.b / total);
        let target = u.clamp(1e-300, 1.0 - 1e-16);
        let mut hi = 1.0 / (z + 1.0);
        while cdf(hi)? < target {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::Numeric(format!("inverse CDF bracket failed at z = {z}")));
            }
        }
        let x = bisect(|x| cdf(x).unwrap_or(f64::NAN) - target, 0.0, hi, 1e-13 * hi);
        Ok(z + x)
    }
}

static CACHE: OnceLock<Mutex<HashMap<u64, Arc<LineBreaker>>>> = OnceLock::new();

/// Shared tables for `alpha`, built on first use.
pub fn line_breaker(alpha: f64) -> Result<Arc<LineBreaker>> {
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    if let Some(b) = map.get(&alpha.to_bits()) {
        return Ok(b.clone());
    }
    let b = Arc::new(LineBreaker::new(alpha)?);
    map.insert(alpha.to_bits(), b.clone());
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linebreak::density::ln_g_direct;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn table_matches_direct() {
        for &a in &[0.3, 0.7] {
            let lb = line_breaker(a).unwrap();
            for i in 0..200 {
                let s = 0.05 + i as f64 * 0.173;
                if s >= lb.s_max() {
                    break;
                }
                let x = lb.ln_g(s).unwrap();
                let y = ln_g_direct(a, s, None).unwrap();
                assert!((x - y).abs() < 1e-6 * y.abs().max(1.0), "a={a} s={s}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn half_initial_moments() {
        let lb = line_breaker(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| lb.sample_initial(1, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // (s/2) e^{-s^2/4}: mean √π, variance 4 - π
        let se = ((4.0 - PI) / n as f64).sqrt();
        assert!((mean - PI.sqrt()).abs() < 4.0 * se, "{mean}");
        assert!(xs.iter().all(|&x| x > 0.0));
        assert!(lb.stats().acceptance_rate() > 0.2);
    }

    #[test]
    fn next_increment_mean() {
        // E[S_{k+1} - z | z] by quadrature against the sample mean
        for &a in &[0.3, 0.5, 0.7] {
            let lb = line_breaker(a).unwrap();
            let z = 1.3;
            let b = (1.0 - a) / a;
            // density divided by its (y - z)^{b-1} factor
            let h = |x: f64| (lb.ln_transition_density(z, z + x).unwrap() - (b - 1.0) * x.ln()).exp();
            let mass = integrate_power_weight(&h, b, 1e-10).unwrap();
            let first = integrate_power_weight(&|x: f64| x * h(x), b, 1e-10).unwrap();
            assert!((mass - 1.0).abs() < 1e-4, "a={a}: mass {mass}");
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let n = 20_000;
            let xs: Vec<f64> = (0..n).map(|_| lb.sample_next(z, &mut rng).unwrap() - z).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
            assert!(xs.iter().all(|&x| x > 0.0));
            assert!((m - first).abs() < 4.0 * (v / n as f64).sqrt(), "a={a}: {m} vs {first}");
        }
    }

    #[test]
    fn inverse_cdf_agrees_with_rejection() {
        let lb = line_breaker(0.3).unwrap();
        let z = 0.8;
        let med = lb.invert_next(z, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20_000;
        let below = (0..n).filter(|_| lb.sample_next(z, &mut rng).unwrap() < med).count();
        let p = below as f64 / n as f64;
        assert!((p - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt(), "{p}");
    }
}
