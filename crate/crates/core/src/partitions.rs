//! Set partitions, integer partitions, paintbox sampling and the labelled/unlabelled bridge.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use rand::Rng;
use rand_distr::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::{factorial_big, ln_factorial, Scalar};
use crate::trees::Label;

/// Blocks ordered by least element, each block sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SetPartition {
    blocks: Vec<Vec<Label>>,
}

impl SetPartition {
    pub fn new(blocks: Vec<Vec<Label>>) -> Result<Self> {
        let mut blocks: Vec<Vec<Label>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        if blocks.iter().any(|b| b.is_empty()) {
            return domain("empty block");
        }
        let mut all: Vec<Label> = blocks.iter().flatten().cloned().collect();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != n {
            return domain("blocks are not disjoint");
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(SetPartition { blocks })
    }

    /// The one-block partition `1_B`.
    pub fn trivial(labels: &[Label]) -> Self {
        let mut b = labels.to_vec();
        b.sort_unstable();
        SetPartition { blocks: if b.is_empty() { vec![] } else { vec![b] } }
    }

    /// The partition into singletons `0_B`.
    pub fn singletons(labels: &[Label]) -> Self {
        let mut b = labels.to_vec();
        b.sort_unstable();
        SetPartition { blocks: b.into_iter().map(|l| vec![l]).collect() }
    }

    pub fn blocks(&self) -> &[Vec<Label>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn labels(&self) -> Vec<Label> {
        let mut l: Vec<Label> = self.blocks.iter().flatten().cloned().collect();
        l.sort_unstable();
        l
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// Block sizes as an integer partition.
    pub fn shape(&self) -> IntegerPartition {
        IntegerPartition::new(self.blocks.iter().map(|b| b.len()).collect()).expect("nonempty partition")
    }

    /// The partition of `B ∩ labels` induced by intersecting every block.
    pub fn restrict(&self, labels: &[Label]) -> SetPartition {
        let mut keep = labels.to_vec();
        keep.sort_unstable();
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().cloned().filter(|l| keep.binary_search(l).is_ok()).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
        SetPartition::new(blocks).expect("restriction of a partition is a partition")
    }

    /// Whether every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &SetPartition) -> bool {
        self.blocks.iter().all(|b| other.blocks.iter().any(|o| b.iter().all(|l| o.binary_search(l).is_ok())))
    }

    pub fn relabel<F: Fn(Label) -> Label>(&self, f: F) -> SetPartition {
        SetPartition::new(self.blocks.iter().map(|b| b.iter().map(|&l| f(l)).collect()).collect())
            .expect("relabelling by a bijection")
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{}", parts.join(""))
    }
}

/// All set partitions of `labels`, via restricted growth strings.
pub fn set_partitions(labels: &[Label]) -> Vec<SetPartition> {
    let mut labels = labels.to_vec();
    labels.sort_unstable();
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<Label>> = Vec::new();
    fn rec(labels: &[Label], i: usize, blocks: &mut Vec<Vec<Label>>, out: &mut Vec<SetPartition>) {
        if i == labels.len() {
            out.push(SetPartition { blocks: blocks.clone() });
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(labels[i]);
            rec(labels, i + 1, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![labels[i]]);
        rec(labels, i + 1, blocks, out);
        blocks.pop();
    }
    rec(&labels, 0, &mut blocks, &mut out);
    out
}

/// Nonincreasing positive parts `k_1 >= ... >= k_r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerPartition {
    parts: Vec<usize>,
}

impl IntegerPartition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return domain("integer partition needs positive parts");
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(IntegerPartition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    /// `m_i`, the number of parts equal to `i`.
    pub fn multiplicity(&self, i: usize) -> usize {
        self.parts.iter().filter(|&&k| k == i).count()
    }

    /// Distinct part values with their multiplicities, largest value first.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut m: BTreeMap<usize, usize> = BTreeMap::new();
        for &k in &self.parts {
            *m.entry(k).or_default() += 1;
        }
        m.into_iter().rev().collect()
    }

    /// `n! / (prod k_j! prod m_i!)`, the number of set partitions of an `n`-set with this shape.
    pub fn compatible_count(&self) -> BigInt {
        let mut den = BigInt::from(1);
        for &k in &self.parts {
            den *= factorial_big(k as u64);
        }
        for (_, m) in self.multiplicities() {
            den *= factorial_big(m as u64);
        }
        factorial_big(self.n() as u64) / den
    }

    pub fn ln_compatible_count(&self) -> f64 {
        ln_factorial(self.n())
            - self.parts.iter().map(|&k| ln_factorial(k)).sum::<f64>()
            - self.multiplicities().iter().map(|&(_, m)| ln_factorial(m)).sum::<f64>()
    }

    /// Replace one part equal to `k` by `k + 1`.
    pub fn bump(&self, k: usize) -> Option<IntegerPartition> {
        let i = self.parts.iter().position(|&p| p == k)?;
        let mut parts = self.parts.clone();
        parts[i] += 1;
        IntegerPartition::new(parts).ok()
    }

    pub fn with_part(&self, k: usize) -> IntegerPartition {
        let mut parts = self.parts.clone();
        parts.push(k);
        IntegerPartition::new(parts).unwrap()
    }
}

impl Ord for IntegerPartition {
    // reverse lexicographic: (3,1) before (2,2) before (2,1,1)
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.parts.cmp(&self.parts)
    }
}

impl PartialOrd for IntegerPartition {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", s.join("-"))
    }
}

impl FromStr for IntegerPartition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: std::result::Result<Vec<usize>, _> = s.split('-').map(|p| p.trim().parse::<usize>()).collect();
        match parts {
            Ok(p) => IntegerPartition::new(p),
            Err(_) => Err(Error::Parse { pos: 0, msg: format!("bad integer partition '{s}'") }),
        }
    }
}

/// Partitions of `n` with at least `min_parts` parts, in reverse lexicographic order.
pub fn integer_partitions(n: usize, min_parts: usize) -> Vec<IntegerPartition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, min_parts: usize, out: &mut Vec<IntegerPartition>) {
        if rem == 0 {
            if cur.len() >= min_parts {
                out.push(IntegerPartition { parts: cur.clone() });
            }
            return;
        }
        for k in (1..=max.min(rem)).rev() {
            cur.push(k);
            rec(rem - k, k, cur, min_parts, out);
            cur.pop();
        }
    }
    if n > 0 {
        rec(n, n, &mut cur, min_parts, &mut out);
    }
    out
}

/// Kingman's paintbox: urn `j >= 1` has mass `s_j`, the rest is dust and yields singletons.
pub fn paintbox_sample<R: Rng + ?Sized>(s: &[f64], n: usize, rng: &mut R) -> Result<SetPartition> {
    let dust = dust_mass(s)?;
    if n == 0 {
        return domain("paintbox needs n >= 1");
    }
    let mut weights = Vec::with_capacity(s.len() + 1);
    weights.push(dust);
    weights.extend_from_slice(s);
    let urn = WeightedIndex::new(&weights).map_err(|e| Error::Domain(e.to_string()))?;
    let mut by_urn: BTreeMap<usize, Vec<Label>> = BTreeMap::new();
    let mut blocks = Vec::new();
    for i in 1..=n as Label {
        match urn.sample(rng) {
            0 => blocks.push(vec![i]),
            j => by_urn.entry(j).or_default().push(i),
        }
    }
    blocks.extend(by_urn.into_values());
    SetPartition::new(blocks)
}

/// `s_0 = 1 - sum s_i`, clamped at zero when within 1e-12 below.
pub fn dust_mass(s: &[f64]) -> Result<f64> {
    if s.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return domain("mass sequence must be nonnegative");
    }
    if s.windows(2).any(|w| w[1] > w[0]) {
        return domain("mass sequence must be nonincreasing");
    }
    let total: f64 = s.iter().sum();
    let d = 1.0 - total;
    if d < -1e-12 {
        return domain(format!("masses sum to {total} > 1"));
    }
    Ok(d.max(0.0))
}

/// Probability of one labelled partition `pi` under the exchangeable rule with `q_n(shape) = q`.
pub fn exchangeable_weight(q: f64, shape: &IntegerPartition, pi: &SetPartition) -> Result<f64> {
    check_compatible(shape, pi)?;
    if shape.n() <= 30 {
        return Ok(q / f64::from_bigint(&shape.compatible_count()));
    }
    Ok((q.ln() - shape.ln_compatible_count()).exp())
}

pub fn exchangeable_weight_exact(q: &BigRational, shape: &IntegerPartition, pi: &SetPartition) -> Result<BigRational> {
    check_compatible(shape, pi)?;
    Ok(q.clone() / BigRational::from_integer(shape.compatible_count()))
}

/// Scalar-generic form used by oracles.
pub fn exchangeable_weight_generic<S: Scalar>(q: &S, shape: &IntegerPartition, pi: &SetPartition) -> Result<S> {
    check_compatible(shape, pi)?;
    Ok(q.clone() / S::from_bigint(&shape.compatible_count()))
}

fn check_compatible(shape: &IntegerPartition, pi: &SetPartition) -> Result<()> {
    if &pi.shape() != shape {
        return domain(format!("partition {pi} does not have shape {shape}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn restrict_examples() {
        let pi = SetPartition::new(vec![vec![1, 3], vec![2]]).unwrap();
        assert_eq!(pi.restrict(&[1, 2]), SetPartition::new(vec![vec![1], vec![2]]).unwrap());
        assert_eq!(pi.restrict(&[1, 2, 3]), pi);
        assert_eq!(SetPartition::trivial(&[1, 2, 3, 4]).restrict(&[2, 4, 7]), SetPartition::trivial(&[2, 4]));
    }

    #[test]
    fn blocks_ordered_by_least_element() {
        let pi = SetPartition::new(vec![vec![4, 2], vec![3, 1]]).unwrap();
        assert_eq!(pi.blocks(), &[vec![1, 3], vec![2, 4]]);
        assert!(SetPartition::new(vec![vec![1, 2], vec![2]]).is_err());
    }

    #[test]
    fn bell_numbers() {
        let bell = [1usize, 2, 5, 15, 52, 203];
        for (i, &b) in bell.iter().enumerate() {
            let labels: Vec<Label> = (1..=(i as Label + 1)).collect();
            assert_eq!(set_partitions(&labels).len(), b);
        }
    }

    #[test]
    fn integer_partition_basics() {
        let p: IntegerPartition = "1-3-1".parse().unwrap();
        assert_eq!(p.parts(), &[3, 1, 1]);
        assert_eq!(p.to_string(), "3-1-1");
        assert_eq!(p.multiplicity(1), 2);
        assert_eq!(p.compatible_count(), BigInt::from(10));
        let all = integer_partitions(4, 2);
        let names: Vec<String> = all.iter().map(|p| p.to_string()).collect();
        assert_eq!(names, vec!["3-1", "2-2", "2-1-1", "1-1-1-1"]);
        assert_eq!(integer_partitions(10, 1).len(), 42);
    }

    #[test]
    fn compatible_counts_match_enumeration() {
        let labels: Vec<Label> = (1..=6).collect();
        let mut counts: BTreeMap<IntegerPartition, u64> = BTreeMap::new();
        for pi in set_partitions(&labels) {
            *counts.entry(pi.shape()).or_default() += 1;
        }
        for (shape, c) in counts {
            assert_eq!(shape.compatible_count(), BigInt::from(c), "{shape}");
        }
    }

    #[test]
    fn exchangeable_weights() {
        let shape: IntegerPartition = "2-1".parse().unwrap();
        let pi = SetPartition::new(vec![vec![1, 3], vec![2]]).unwrap();
        assert!((exchangeable_weight(1.0, &shape, &pi).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let ones: IntegerPartition = "1-1-1-1".parse().unwrap();
        let zero = SetPartition::singletons(&[1, 2, 3, 4]);
        assert!((exchangeable_weight(0.3, &ones, &zero).unwrap() - 0.3).abs() < 1e-15);
        assert!(exchangeable_weight(0.3, &shape, &zero).is_err());
        assert_eq!(exchangeable_weight_exact(&ratio(1, 1), &shape, &pi).unwrap(), ratio(1, 3));
    }

    #[test]
    fn paintbox_degenerate_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(paintbox_sample(&[1.0], 5, &mut rng).unwrap(), SetPartition::trivial(&[1, 2, 3, 4, 5]));
            assert_eq!(paintbox_sample(&[0.0, 0.0], 5, &mut rng).unwrap(), SetPartition::singletons(&[1, 2, 3, 4, 5]));
        }
        assert!(paintbox_sample(&[0.2, 0.5], 3, &mut rng).is_err());
        assert!(paintbox_sample(&[0.7, 0.5], 3, &mut rng).is_err());
        assert!(paintbox_sample(&[-0.1], 3, &mut rng).is_err());
        assert!(paintbox_sample(&[0.5, 0.5 + 1e-13], 3, &mut rng).is_err());
        assert!(paintbox_sample(&[0.5 + 5e-13, 0.5], 3, &mut rng).is_ok());
    }
}
