use std::collections::BTreeMap;

use serde::Serialize;

use super::stats::{chi_square, ks_one_sample, ks_two_sample, ChiSquare, EmpiricalSummary, KsResult, TabulatedCdf};
use crate::error::{domain, Result};
use crate::linebreak::{line_breaker, sample_v1, V1_TRUNCATION};
use crate::partitions::{IntegerPartition, SetPartition};
use crate::samplers::{par_reps, FordGrowth, MarchalGrowth, MarkovBranching};
use crate::splitting_rules::{RuleSpec, SplittingRule};
use crate::trees::{distortion, reduce, Cladogram, EdgeWeightedTree, Label, Topology};

/// Independent seed for a named part of a report.
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which sampler produces the trees whose first split is tabulated.
#[derive(Clone, Debug, PartialEq)]
pub enum SplitSampler {
    Markov(RuleSpec),
    FordGrowth(f64),
    MarchalGrowth(f64),
}

impl SplitSampler {
    /// The splitting rule whose `q_n` the sampler should reproduce.
    pub fn rule(&self) -> Result<RuleSpec> {
        match self {
            SplitSampler::Markov(r) => Ok(r.clone()),
            SplitSampler::FordGrowth(a) => RuleSpec::ford(*a),
            SplitSampler::MarchalGrowth(a) => RuleSpec::stable(*a),
        }
    }
}

fn first_split_sets(topo: &Topology) -> Option<SetPartition> {
    let top = topo.top();
    if topo.is_leaf(top) {
        return None;
    }
    let sets = topo.leaf_sets();
    SetPartition::new(topo.children(top).iter().map(|&c| sets[c].clone()).collect()).ok()
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitReport {
    pub n: usize,
    pub reps: usize,
    /// First-split shape frequencies, keyed by the partition written as `a+b+...`.
    pub frequencies: BTreeMap<String, f64>,
    pub expected: BTreeMap<String, f64>,
    /// First split as a set partition of the labels.
    pub labelled: BTreeMap<String, f64>,
    pub chi2: ChiSquare,
}

impl SplitReport {
    pub fn frequency(&self, p: &IntegerPartition) -> f64 {
        self.frequencies.get(&p.to_string()).cloned().unwrap_or(0.0)
    }
}

/// Tabulate first splits of `reps` trees with `n` leaves and test them against `q_n`.
pub fn empirical_split_distribution(model: &SplitSampler, n: usize, reps: usize, seed: u64) -> Result<SplitReport> {
    if n < 2 {
        return domain("need n >= 2 for a first split");
    }
    if reps == 0 {
        return domain("reps must be positive");
    }
    let rule = model.rule()?;
    let q = rule.qtable(n)?;
    let markov = match model {
        SplitSampler::Markov(r) => Some(MarkovBranching::new(r, n)?),
        _ => None,
    };
    let draws: Vec<SetPartition> = par_reps(seed, reps, |rng, _| {
        let topo: Topology = match model {
            SplitSampler::Markov(_) => markov.as_ref().unwrap().sample(n, rng).expect("n checked").topology().clone(),
            SplitSampler::FordGrowth(a) => {
                let mut g = FordGrowth::new(*a).expect("alpha checked");
                g.grow_to(n, rng);
                g.topology().clone()
            }
            SplitSampler::MarchalGrowth(a) => {
                let mut g = MarchalGrowth::new(*a).expect("alpha checked");
                g.grow_to(n, rng);
                g.tree().topology().clone()
            }
        };
        first_split_sets(&topo).expect("n >= 2 has a first split")
    });
    let mut counts: BTreeMap<IntegerPartition, u64> = BTreeMap::new();
    let mut labelled: BTreeMap<String, f64> = BTreeMap::new();
    for d in &draws {
        *counts.entry(d.shape()).or_insert(0) += 1;
        *labelled.entry(d.to_string()).or_insert(0.0) += 1.0 / reps as f64;
    }
    let mut observed = Vec::new();
    let mut expected_p = Vec::new();
    let mut expected = BTreeMap::new();
    for (p, v) in q.entries() {
        observed.push(counts.get(p).cloned().unwrap_or(0));
        expected_p.push(*v);
        expected.insert(p.to_string(), *v);
    }
    // shapes the table does not list at all
    for (p, c) in &counts {
        if q.get(p) == 0.0 && !q.entries().iter().any(|(e, _)| e == p) {
            observed.push(*c);
            expected_p.push(0.0);
        }
    }
    let chi2 = chi_square(&observed, &expected_p)?;
    let frequencies = counts.iter().map(|(p, &c)| (p.to_string(), c as f64 / reps as f64)).collect();
    Ok(SplitReport { n, reps, frequencies, expected, labelled, chi2 })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub depth_mean: f64,
    pub depth_var: f64,
    pub height_mean: f64,
    pub height_var: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossKs {
    pub n: usize,
    pub next: usize,
    pub depth: KsResult,
    pub height: KsResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub gamma: f64,
    pub reps: usize,
    pub rows: Vec<ScalingRow>,
    pub cross: Vec<CrossKs>,
    #[serde(skip)]
    pub depths: Vec<EmpiricalSummary>,
    #[serde(skip)]
    pub heights: Vec<EmpiricalSummary>,
}

impl ScalingReport {
    /// Number of places where the cross-n height KS statistic fails to decrease.
    pub fn height_inversions(&self) -> usize {
        self.cross.windows(2).filter(|w| w[1].height.statistic >= w[0].height.statistic).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,depth_mean,depth_var,height_mean,height_var,ks_depth_next,ks_height_next\n");
        for (i, r) in self.rows.iter().enumerate() {
            let (a, b) = self
                .cross
                .get(i)
                .map(|c| (c.depth.statistic.to_string(), c.height.statistic.to_string()))
                .unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n, r.depth_mean, r.depth_var, r.height_mean, r.height_var, a, b
            ));
        }
        s
    }
}

/// Depth of a uniform leaf and height of Markov branching trees, scaled by `n^γ`, for each `n`.
pub fn scaling_report(rule: &RuleSpec, gamma: f64, n_list: &[usize], reps: usize, seed: u64) -> Result<ScalingReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return domain("n_list must be nonempty and increasing");
    }
    if reps == 0 {
        return domain("reps must be positive");
    }
    if let Some(g) = rule.gamma() {
        if (g - gamma).abs() > 1e-12 {
            log::warn!("scaling with γ = {gamma} but the model's index is {g}");
        }
    }
    let n_max = *n_list.last().unwrap();
    let sampler = MarkovBranching::new(rule, n_max)?;
    let mut depths = Vec::new();
    let mut heights = Vec::new();
    let mut rows = Vec::new();
    for &n in n_list {
        let scale = (n as f64).powf(gamma);
        let draws = par_reps(sub_seed(seed, n as u64), reps, |rng, _| sampler.sample_heights(n, rng).expect("n checked"));
        let d: Vec<f64> = draws.iter().map(|&(_, d)| d as f64 / scale).collect();
        let h: Vec<f64> = draws.iter().map(|&(h, _)| h as f64 / scale).collect();
        let ds = EmpiricalSummary::new(&d)?;
        let hs = EmpiricalSummary::new(&h)?;
        rows.push(ScalingRow {
            n,
            depth_mean: ds.mean(),
            depth_var: ds.variance(),
            height_mean: hs.mean(),
            height_var: hs.variance(),
        });
        depths.push(ds);
        heights.push(hs);
    }
    let mut cross = Vec::new();
    for i in 1..n_list.len() {
        cross.push(CrossKs {
            n: n_list[i - 1],
            next: n_list[i],
            depth: ks_two_sample(depths[i - 1].sorted(), depths[i].sorted())?,
            height: ks_two_sample(heights[i - 1].sorted(), heights[i].sorted())?,
        });
    }
    Ok(ScalingReport { gamma, reps, rows, cross, depths, heights })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedReport {
    pub alpha: f64,
    pub k: usize,
    pub n_list: Vec<usize>,
    /// `S_k^{(n)} / n^α` for each listed n.
    pub lengths: Vec<EmpiricalSummary>,
    /// KS of the last scaled length against the limit density of `S_k`.
    pub ks_limit: KsResult,
    /// Per path, the largest distortion between successive scaled reduced trees in the early
    /// window `[n_0, 2 n_0]` and the late window `[n_last / 2, n_last]`.
    pub early: EmpiricalSummary,
    pub late: EmpiricalSummary,
    /// Fraction of paths whose reduced shape at every listed n equals the final one.
    pub shape_stable: f64,
}

impl ReducedReport {
    pub fn median_ratio(&self) -> f64 {
        self.late.median() / self.early.median()
    }
}

fn scaled(t: &EdgeWeightedTree, n: usize, alpha: f64) -> EdgeWeightedTree {
    t.scaled((n as f64).powf(-alpha)).expect("positive scale")
}

/// Follow `reps` Ford growth paths to `max(n_list)` and record the reduced tree of leaves `1..=k`.
pub fn reduced_tree_convergence(alpha: f64, k: usize, n_list: &[usize], reps: usize, seed: u64) -> Result<ReducedReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if k == 0 || k > 6 {
        return domain("k must lie in 1..=6");
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] < k {
        return domain("n_list must be increasing and start at k or above");
    }
    if reps == 0 {
        return domain("reps must be positive");
    }
    let n_last = *n_list.last().unwrap();
    let early = (n_list[0], (2 * n_list[0]).min(n_last));
    let late = ((n_last / 2).max(n_list[0]), n_last);
    let labels: Vec<Label> = (1..=k as Label).collect();
    let paths = par_reps(seed, reps, |rng, _| {
        let mut g = FordGrowth::new(alpha).expect("alpha checked");
        g.grow_to(k, rng);
        g.track_reduced().expect("k >= 1");
        let mut lens = Vec::with_capacity(n_list.len());
        let mut shapes: Vec<Cladogram> = Vec::with_capacity(n_list.len());
        let (mut e_max, mut l_max) = (0.0f64, 0.0f64);
        let mut prev: Option<EdgeWeightedTree> = None;
        let mut next_idx = 0;
        for n in k..=n_last {
            if n > k {
                g.step(rng);
            }
            let in_early = n >= early.0 && n <= early.1;
            let in_late = n >= late.0 && n <= late.1;
            if in_early || in_late {
                let cur = scaled(&g.reduced_tree().expect("tracking"), n, alpha);
                if let Some(p) = &prev {
                    let d = distortion(p, &cur).expect("same labels");
                    // a step counts for a window when both of its ends lie in it
                    if in_early && n > early.0 {
                        e_max = e_max.max(d);
                    }
                    if in_late && n > late.0 {
                        l_max = l_max.max(d);
                    }
                }
                prev = Some(cur);
            } else {
                prev = None;
            }
            if next_idx < n_list.len() && n == n_list[next_idx] {
                lens.push(g.reduced_length().unwrap() as f64 / (n as f64).powf(alpha));
                let full = EdgeWeightedTree::unit(g.topology());
                shapes.push(reduce(&full, &labels).expect("labels present").shape());
                next_idx += 1;
            }
        }
        let stable = shapes.iter().all(|s| s == shapes.last().unwrap());
        (lens, e_max, l_max, stable)
    });
    let mut lengths = Vec::new();
    for i in 0..n_list.len() {
        let v: Vec<f64> = paths.iter().map(|p| p.0[i]).collect();
        lengths.push(EmpiricalSummary::new(&v)?);
    }
    let lb = line_breaker(alpha)?;
    let hi = lengths.last().unwrap().max().max(1.0) * 3.0;
    let cdf = TabulatedCdf::new(
        |s: f64| if s <= 0.0 { 0.0 } else { lb.ln_initial_density(k, s).map(f64::exp).unwrap_or(0.0) },
        0.0,
        hi,
        4000,
    )?;
    let ks_limit = ks_one_sample(lengths.last().unwrap().sorted(), |x| cdf.eval(x))?;
    let early_s = EmpiricalSummary::new(&paths.iter().map(|p| p.1).collect::<Vec<_>>())?;
    let late_s = EmpiricalSummary::new(&paths.iter().map(|p| p.2).collect::<Vec<_>>())?;
    let shape_stable = paths.iter().filter(|p| p.3).count() as f64 / reps as f64;
    Ok(ReducedReport {
        alpha,
        k,
        n_list: n_list.to_vec(),
        lengths,
        ks_limit,
        early: early_s,
        late: late_s,
        shape_stable,
    })
}

/// Estimate of `P(V = 0 | shape)` at three leaves.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeEstimate {
    pub shape: String,
    pub count: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub expected: f64,
}

impl ShapeEstimate {
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            return if self.estimate == self.expected { 0.0 } else { f64::INFINITY };
        }
        (self.estimate - self.expected) / self.std_error
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpinalReport {
    pub alpha: f64,
    pub three_leaf: Vec<ShapeEstimate>,
    pub n: usize,
    /// `V_1^{(n)} / n` along growth paths.
    pub growth: EmpiricalSummary,
    /// KS of the growth sample against stick-breaking draws of `V_1`.
    pub ks_stick: KsResult,
    /// KS against the uniform law, which is the limit at α = 1/2 only.
    pub ks_uniform: KsResult,
}

/// Spinal proportion checks: small-n conditional laws and the large-n limit.
pub fn spinal_proportion_check(alpha: f64, reps_small: usize, n: usize, reps_large: usize, seed: u64) -> Result<SpinalReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if reps_small == 0 || reps_large == 0 || n < 3 {
        return domain("need positive reps and n >= 3");
    }
    let small = par_reps(sub_seed(seed, 3), reps_small, |rng, _| {
        let mut g = FordGrowth::new(alpha).expect("alpha checked");
        g.grow_to(3, rng);
        (g.topology().shape_key(g.topology().top(), true), g.leaves_left_of(1).unwrap() == 0)
    });
    let expect = [
        ("((**)*)".to_string(), 1.0 / (4.0 - 2.0 * alpha)),
        ("(*(**))".to_string(), (2.0 - 2.0 * alpha) / (4.0 - 2.0 * alpha)),
    ];
    let mut three_leaf = Vec::new();
    for (key, e) in expect {
        let hits: Vec<bool> = small.iter().filter(|(k, _)| *k == key).map(|&(_, z)| z).collect();
        let c = hits.len();
        let p = if c == 0 { f64::NAN } else { hits.iter().filter(|&&z| z).count() as f64 / c as f64 };
        three_leaf.push(ShapeEstimate {
            shape: key,
            count: c,
            estimate: p,
            std_error: (e * (1.0 - e) / c.max(1) as f64).sqrt(),
            expected: e,
        });
    }
    let v: Vec<f64> = par_reps(sub_seed(seed, n as u64), reps_large, |rng, _| {
        let mut g = FordGrowth::new(alpha).expect("alpha checked");
        g.grow_to(n, rng);
        g.leaves_left_of(1).unwrap() as f64 / n as f64
    });
    let stick: Vec<f64> = par_reps(sub_seed(seed, 1 << 40), reps_large, |rng, _| {
        sample_v1(alpha, V1_TRUNCATION, rng).expect("alpha checked").midpoint()
    });
    Ok(SpinalReport {
        alpha,
        three_leaf,
        n,
        ks_stick: ks_two_sample(&v, &stick)?,
        ks_uniform: ks_one_sample(&v, |x| x.clamp(0.0, 1.0))?,
        growth: EmpiricalSummary::new(&v)?,
    })
}
