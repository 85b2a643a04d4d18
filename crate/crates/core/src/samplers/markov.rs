use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{domain, Result};
use crate::numeric::Scalar;
use crate::partitions::IntegerPartition;
use crate::splitting_rules::SplittingRule;
use crate::trees::{enumerate_cladograms, Cladogram, Label, Topology, ROOT};

struct ShapeTable {
    shapes: Vec<IntegerPartition>,
    cum: Vec<f64>,
}

impl ShapeTable {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &IntegerPartition {
        let u = rng.gen::<f64>() * self.cum.last().unwrap();
        let i = self.cum.partition_point(|&c| c <= u).min(self.shapes.len() - 1);
        &self.shapes[i]
    }
}

/// Recursive sampler of the Markov branching model for one rule, with the split tables for
/// every size up to `n_max` built up front.
pub struct MarkovBranching {
    n_max: usize,
    tables: Vec<ShapeTable>,
}

impl MarkovBranching {
    pub fn new<R: SplittingRule + ?Sized>(rule: &R, n_max: usize) -> Result<Self> {
        let mut tables = Vec::with_capacity(n_max + 1);
        for m in 0..=n_max {
            if m < 2 {
                tables.push(ShapeTable { shapes: vec![], cum: vec![] });
                continue;
            }
            let t = rule.qtable(m)?;
            let mut shapes = Vec::new();
            let mut cum = Vec::new();
            let mut acc = 0.0;
            for (p, v) in t.entries() {
                if *v > 0.0 {
                    acc += v;
                    shapes.push(p.clone());
                    cum.push(acc);
                }
            }
            if shapes.is_empty() {
                return domain(format!("rule puts no mass on splits of {m}"));
            }
            tables.push(ShapeTable { shapes, cum });
        }
        Ok(MarkovBranching { n_max, tables })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max {
            return domain(format!("n = {n} outside 1..={}", self.n_max));
        }
        Ok(())
    }

    /// A tree on leaves `1..=n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Cladogram> {
        self.check(n)?;
        let mut topo = Topology::new();
        let mut stack: Vec<(usize, Vec<Label>)> = vec![(ROOT, (1..=n as Label).collect())];
        while let Some((parent, mut labels)) = stack.pop() {
            if labels.len() == 1 {
                topo.add_child(parent, Some(labels[0]));
                continue;
            }
            let v = topo.add_child(parent, None);
            let shape = self.tables[labels.len()].draw(rng);
            // a uniform permutation cut into consecutive blocks gives a uniform compatible partition
            labels.shuffle(rng);
            let mut start = 0;
            for &k in shape.parts() {
                stack.push((v, labels[start..start + k].to_vec()));
                start += k;
            }
        }
        Cladogram::from_topology(&topo)
    }

    /// Height `H_n` and the depth of a uniformly chosen leaf, without building the tree.
    pub fn sample_heights<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<(usize, usize)> {
        self.check(n)?;
        let mut height = 0;
        let mut tracked = 0;
        // (block size, depth of the block's node, block holds the tracked leaf)
        let mut stack = vec![(n, 1usize, true)];
        while let Some((m, d, mark)) = stack.pop() {
            if m == 1 {
                height = height.max(d);
                if mark {
                    tracked = d;
                }
                continue;
            }
            let shape = self.tables[m].draw(rng);
            let mut pick = if mark { rng.gen_range(0..m) } else { usize::MAX };
            for &k in shape.parts() {
                let here = pick < k;
                if pick != usize::MAX {
                    pick = if here { usize::MAX } else { pick - k };
                }
                stack.push((k, d + 1, here));
            }
        }
        Ok((height, tracked))
    }
}

pub fn sample_markov_branching<S: SplittingRule + ?Sized, R: Rng + ?Sized>(
    rule: &S,
    n: usize,
    rng: &mut R,
) -> Result<Cladogram> {
    MarkovBranching::new(rule, n.max(1))?.sample(n, rng)
}

/// Probability of one labelled tree: the product over internal nodes of the split probability
/// divided by the number of set partitions with that shape.
pub fn cladogram_probability<S: SplittingRule + ?Sized>(rule: &S, tree: &Cladogram) -> Result<f64> {
    let topo = tree.topology();
    let sets = topo.leaf_sets();
    let mut p = 1.0;
    for v in 1..topo.len() {
        if topo.is_leaf(v) {
            continue;
        }
        let shape = IntegerPartition::new(topo.children(v).iter().map(|&c| sets[c].len()).collect())?;
        let q = rule.q(&shape)?;
        p *= q / f64::from_bigint(&shape.compatible_count());
    }
    Ok(p)
}

/// Exact law of [`MarkovBranching::sample`] over all cladograms on `1..=n` (n <= 8).
pub fn labelled_law<S: SplittingRule + ?Sized>(rule: &S, n: usize) -> Result<HashMap<Cladogram, f64>> {
    let mut out = HashMap::new();
    for t in enumerate_cladograms(n, false)? {
        let p = cladogram_probability(rule, &t)?;
        if p > 0.0 {
            out.insert(t, p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngState;
    use crate::splitting_rules::RuleSpec;

    #[test]
    fn small_trees() {
        let rule = RuleSpec::beta(-1.5).unwrap();
        let mut rng = RngState::new(1).rng();
        assert_eq!(sample_markov_branching(&rule, 1, &mut rng).unwrap().to_string(), "1");
        assert_eq!(sample_markov_branching(&rule, 2, &mut rng).unwrap().to_string(), "(1,2)");
    }

    #[test]
    fn uniform_law_is_uniform() {
        let rule = RuleSpec::beta(-1.5).unwrap();
        for n in 2..=6 {
            let law = labelled_law(&rule, n).unwrap();
            let count = crate::trees::count_cladograms(n, true).unwrap() as f64;
            assert_eq!(law.len() as f64, count);
            for p in law.values() {
                assert!((p - 1.0 / count).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn four_leaf_split_frequencies() {
        let rule = RuleSpec::beta(-1.5).unwrap();
        let mb = MarkovBranching::new(&rule, 4).unwrap();
        let mut rng = RngState::new(5).rng();
        let reps = 20_000;
        let mut c31 = 0;
        for _ in 0..reps {
            if mb.sample(4, &mut rng).unwrap().first_split().unwrap().to_string() == "3-1" {
                c31 += 1;
            }
        }
        let f = c31 as f64 / reps as f64;
        let sd = (0.8 * 0.2 / reps as f64).sqrt();
        assert!((f - 0.8).abs() < 4.0 * sd, "{f}");
    }

    #[test]
    fn heights_agree_with_full_trees() {
        // same law for the fast recursion and the full sampler (means over many draws)
        let rule = RuleSpec::ford(0.3).unwrap();
        let mb = MarkovBranching::new(&rule, 40).unwrap();
        let mut rng = RngState::new(9).rng();
        let reps = 4000;
        let (mut h_fast, mut d_fast, mut h_full, mut d_full) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..reps {
            let (h, d) = mb.sample_heights(40, &mut rng).unwrap();
            h_fast += h as f64;
            d_fast += d as f64;
            let t = mb.sample(40, &mut rng).unwrap();
            let (depths, h) = t.leaf_depths();
            h_full += h as f64;
            d_full += depths[&1] as f64;
        }
        let r = reps as f64;
        assert!((h_fast - h_full).abs() / r < 0.3, "{} {}", h_fast / r, h_full / r);
        assert!((d_fast - d_full).abs() / r < 0.3, "{} {}", d_fast / r, d_full / r);
    }
}
