//! Line-breaking construction of the reduced Ford trees: a Markov chain on ordered binary shapes
//! with total length `S_k` and edge-length proportions `D_k`.

mod breaker;
mod density;

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{domain, Error, Result};
use crate::numeric::{integrate, integrate_power_weight, ln_gamma};
use crate::trees::{EdgeWeightedTree, Label, OrderedCladogram, Topology, ROOT};

pub use breaker::{line_breaker, LineBreaker, SamplerStats};
pub use density::{g_density, stable_density};

/// Default number of stick-breaking factors in [`sample_v1`].
pub const V1_TRUNCATION: usize = 64;

fn tilt(alpha: f64) -> f64 {
    (1.0 - alpha) / alpha
}

/// Ordered binary planted shape on leaves `1..=k` with absolute edge lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct LineBreakState {
    topo: Topology,
    lengths: Vec<f64>,
    total: f64,
}

/// One step of a chain trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub s_k: f64,
    pub edge_index_split: usize,
    pub c: f64,
    pub left: bool,
}

impl TraceRow {
    pub const CSV_HEADER: &'static str = "k,S_k,edge_index_split,C,left_or_right";

    pub fn to_csv(&self) -> String {
        // the first row records S_1 only
        if self.c.is_nan() {
            return format!("{},{},,,", self.k, self.s_k);
        }
        format!(
            "{},{},{},{},{}",
            self.k,
            self.s_k,
            self.edge_index_split,
            self.c,
            if self.left { "left" } else { "right" }
        )
    }
}

impl LineBreakState {
    /// The one-leaf state: a single edge of length `s1`.
    pub fn initial(s1: f64) -> Result<Self> {
        if !(s1 > 0.0 && s1.is_finite()) {
            return domain(format!("initial length {s1} must be positive"));
        }
        let mut topo = Topology::new();
        topo.add_child(ROOT, Some(1));
        Ok(LineBreakState { topo, lengths: vec![0.0, s1], total: s1 })
    }

    /// Build from a shape, a total and proportions in the canonical edge order.
    pub fn from_parts(shape: &OrderedCladogram, total: f64, proportions: &[f64]) -> Result<Self> {
        let topo = shape.topology().clone();
        let k = topo.n_leaves();
        if topo.nodes().iter().skip(1).any(|n| !n.children.is_empty() && n.children.len() != 2) {
            return domain("line-breaking shapes are binary");
        }
        let mut want: Vec<Label> = (1..=k as Label).collect();
        want.sort_unstable();
        if topo.leaf_labels() != want {
            return domain("leaves must be labelled 1..k");
        }
        if !(total > 0.0 && total.is_finite()) {
            return domain("total length must be positive");
        }
        let edges = edge_order(&topo);
        if proportions.len() != edges.len() {
            return domain(format!("{} proportions for {} edges", proportions.len(), edges.len()));
        }
        if proportions.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::State("edge proportions must be positive".into()));
        }
        let sum: f64 = proportions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::State(format!("edge proportions sum to {sum}")));
        }
        let mut lengths = vec![0.0; topo.len()];
        for (&v, &d) in edges.iter().zip(proportions) {
            lengths[v] = total * d / sum;
        }
        Ok(LineBreakState { topo, lengths, total })
    }

    pub fn k(&self) -> usize {
        self.topo.n_leaves()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn shape(&self) -> OrderedCladogram {
        OrderedCladogram::from_topology(&self.topo).expect("state shape is valid")
    }

    /// Nodes whose parent edges are the `D_k` coordinates: inner edges in preorder, then leaf
    /// edges left to right.
    pub fn edges(&self) -> Vec<usize> {
        edge_order(&self.topo)
    }

    pub fn proportions(&self) -> Vec<f64> {
        self.edges().iter().map(|&v| self.lengths[v] / self.total).collect()
    }

    /// Proportion carried by the edge above the top node, `0` being the root edge.
    pub fn root_edge_proportion(&self) -> f64 {
        self.lengths[self.topo.top()] / self.total
    }

    pub fn check(&self) -> Result<()> {
        let sum: f64 = self.lengths.iter().skip(1).sum();
        if (sum - self.total).abs() > 1e-9 * self.total {
            return Err(Error::State(format!("lengths sum to {sum}, total is {}", self.total)));
        }
        if self.lengths.iter().skip(1).any(|&l| !(l > 0.0)) {
            return Err(Error::State("zero edge length".into()));
        }
        Ok(())
    }
}

fn edge_order(topo: &Topology) -> Vec<usize> {
    let pre: Vec<usize> = topo.preorder().into_iter().skip(1).collect();
    let mut out: Vec<usize> = pre.iter().cloned().filter(|&v| !topo.is_leaf(v)).collect();
    out.extend(pre.into_iter().filter(|&v| topo.is_leaf(v)));
    out
}

/// Draw `S_k` from `Γ(k+1-α)/Γ(k/α) s^{k/α-1} g_α(s)`.
pub fn sample_sk_initial<R: Rng + ?Sized>(alpha: f64, k: usize, rng: &mut R) -> Result<f64> {
    line_breaker(alpha)?.sample_initial(k, rng)
}

/// One chain step with its trace row.
pub fn transition_traced<R: Rng + ?Sized>(
    alpha: f64,
    state: &LineBreakState,
    rng: &mut R,
) -> Result<(LineBreakState, TraceRow)> {
    state.check()?;
    let lb = line_breaker(alpha)?;
    let edges = state.edges();
    let mut x = rng.gen::<f64>() * state.total;
    let mut pick = edges.len() - 1;
    for (i, &v) in edges.iter().enumerate() {
        x -= state.lengths[v];
        if x < 0.0 {
            pick = i;
            break;
        }
    }
    let v = edges[pick];
    let next = lb.sample_next(state.total, rng)?;
    let c = if state.topo.is_leaf(v) {
        Beta::new(1.0, tilt(alpha)).map_err(|e| Error::Numeric(e.to_string()))?.sample(rng)
    } else {
        rng.gen::<f64>()
    };
    let mut topo = state.topo.clone();
    let mut lengths = state.lengths.clone();
    let l = lengths[v];
    let u = topo.subdivide(v);
    lengths.push(c * l);
    lengths[v] = (1.0 - c) * l;
    let left = rng.gen::<bool>();
    let k = state.k() + 1;
    topo.insert_leaf(u, if left { 0 } else { 1 }, k as Label);
    lengths.push(next - state.total);
    let out = LineBreakState { topo, lengths, total: next };
    if out.lengths.iter().skip(1).any(|&l| !(l > 0.0)) {
        return Err(Error::State("a split produced an edge of length 0".into()));
    }
    Ok((out, TraceRow { k, s_k: next, edge_index_split: pick, c, left }))
}

pub fn transition<R: Rng + ?Sized>(alpha: f64, state: &LineBreakState, rng: &mut R) -> Result<LineBreakState> {
    Ok(transition_traced(alpha, state, rng)?.0)
}

/// Run the chain from `S_1` to `k` leaves.
pub fn run_chain<R: Rng + ?Sized>(alpha: f64, k: usize, rng: &mut R) -> Result<(LineBreakState, Vec<TraceRow>)> {
    if k == 0 {
        return domain("k must be at least 1");
    }
    let s1 = sample_sk_initial(alpha, 1, rng)?;
    let mut state = LineBreakState::initial(s1)?;
    let mut trace = vec![TraceRow { k: 1, s_k: s1, edge_index_split: 0, c: f64::NAN, left: false }];
    for _ in 1..k {
        let (next, row) = transition_traced(alpha, &state, rng)?;
        state = next;
        trace.push(row);
    }
    Ok((state, trace))
}

pub fn assemble_tree(state: &LineBreakState) -> Result<EdgeWeightedTree> {
    EdgeWeightedTree::new(&state.topo, &state.lengths)
}

fn exact_ln_g(alpha: f64, coefs: &[f64]) -> impl Fn(f64) -> f64 + '_ {
    move |s: f64| density::ln_g_direct(alpha, s, Some(coefs)).unwrap_or(f64::NAN)
}

/// `∫_0^∞ y^{b-1} (z+y) g_α(z+y) dy` with `b = (1-α)/α`.
pub fn tilted_mass(alpha: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if !(z >= 0.0) {
        return domain("z must be nonnegative");
    }
    let coefs = density::series_coefs(alpha);
    let lg = exact_ln_g(alpha, &coefs);
    let h = |y: f64| if z + y <= 0.0 { 0.0 } else { (z + y) * lg(z + y).exp() };
    integrate_power_weight(&h, tilt(alpha), 1e-13)
}

/// Hazard at time `t` of the renewal process of chain lengths, `y` after the last renewal.
pub fn hazard(alpha: f64, t: f64, y: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if !(t > 0.0 && y >= 0.0 && y <= t) {
        return domain(format!("need t > 0 and 0 <= y <= t, got t = {t}, y = {y}"));
    }
    let b = tilt(alpha);
    let coefs = density::series_coefs(alpha);
    let lg = exact_ln_g(alpha, &coefs);
    // with w = y + x the denominator is ∫_y^∞ w^{b-1} h(w) dw, h(w) = (t-y+w) g(t-y+w)
    let h = |w: f64| {
        let s = t - y + w;
        if s <= 0.0 {
            0.0
        } else {
            s * lg(s).exp()
        }
    };
    let full = integrate_power_weight(&h, b, 1e-11)?;
    let head = if y > 0.0 {
        let inv = 1.0 / b;
        integrate(&|u: f64| h(u.powf(inv)), 0.0, y.powf(b), 1e-11)? / b
    } else {
        0.0
    };
    let den = full - head;
    if !(den > 0.0) {
        return Err(Error::Numeric(format!("hazard denominator {den} at t = {t}, y = {y}")));
    }
    Ok(y.powf(b - 1.0) * (t.ln() + lg(t)).exp() / den)
}

/// Truncated spinal-proportion draw: `partial` is the sum over the first `K` sticks and
/// `remainder` the unbroken stick left over.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct V1Sample {
    pub partial: f64,
    pub remainder: f64,
}

impl V1Sample {
    /// `partial + remainder / 2`, the conditional mean given the first `K` sticks.
    pub fn midpoint(&self) -> f64 {
        self.partial + 0.5 * self.remainder
    }
}

/// `Σ_{k<K} A_k W_k ∏_{i<k}(1-W_i)` with fair `A_k ∈ {0,1}` and `W_i ~ Beta(1-α, (i+1)α+1-α)`,
/// the GEM(α, 1-α) sticks of the spinal Chinese restaurant. Uniform at α = 1/2.
pub fn sample_v1<R: Rng + ?Sized>(alpha: f64, truncation: usize, rng: &mut R) -> Result<V1Sample> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if truncation == 0 {
        return domain("truncation must be at least 1");
    }
    let mut stick = 1.0;
    let mut partial = 0.0;
    for i in 0..truncation {
        let w = Beta::new(1.0 - alpha, i as f64 * alpha + 1.0)
            .map_err(|e| Error::Numeric(e.to_string()))?
            .sample(rng);
        if rng.gen::<bool>() {
            partial += w * stick;
        }
        stick *= 1.0 - w;
    }
    Ok(V1Sample { partial, remainder: stick })
}

/// `E[∏_{i<K}(1-W_i)]`, the mean truncation remainder of [`sample_v1`].
pub fn v1_mean_remainder(alpha: f64, truncation: usize) -> f64 {
    (0..truncation)
        .map(|i| {
            let i = i as f64;
            (i * alpha + 1.0) / (i * alpha + 2.0 - alpha)
        })
        .product()
}

/// `ln ∫ s^{k/α-1} g_α(s) ds` in closed form, `ln Γ(k/α) - ln Γ(k+1-α)`.
pub fn ln_moment_normalizer(alpha: f64, k: usize) -> f64 {
    ln_gamma(k as f64 / alpha) - ln_gamma(k as f64 + 1.0 - alpha)
}
