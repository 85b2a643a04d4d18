use std::collections::{BTreeMap, HashMap};

use num::rational::BigRational;
use num::Zero;

use crate::error::{domain, Error, Result};
use crate::numeric::{binom_real, small_rational, Scalar};
use crate::partitions::IntegerPartition;
use crate::trees::{Cladogram, Label, Topology, ROOT};

/// Largest leaf count the oracle enumerates.
pub const GW_MAX_N: usize = 6;

/// Offspring law with generating function `z + (1-z)^α / α`.
pub fn gw_offspring<S: Scalar>(alpha: &S, r: u32) -> S {
    let a_inv = S::one() / alpha.clone();
    let b = binom_real(alpha, r) * a_inv;
    let signed = if r % 2 == 0 { b } else { S::zero() - b };
    if r == 1 {
        S::one() + signed
    } else {
        signed
    }
}

#[derive(Clone, Debug)]
enum Plane {
    Leaf,
    Node(Vec<Plane>),
}

impl Plane {
    fn key(&self, ordered: bool) -> String {
        match self {
            Plane::Leaf => "*".into(),
            Plane::Node(c) => {
                let mut k: Vec<String> = c.iter().map(|t| t.key(ordered)).collect();
                if !ordered {
                    k.sort();
                }
                format!("({})", k.concat())
            }
        }
    }

    fn degrees(&self, out: &mut Vec<u32>) {
        if let Plane::Node(c) = self {
            out.push(c.len() as u32);
            for t in c {
                t.degrees(out);
            }
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Plane::Leaf => 1,
            Plane::Node(c) => c.iter().map(|t| t.leaves()).sum(),
        }
    }

    fn build(&self, topo: &mut Topology, parent: usize, labels: &mut impl Iterator<Item = Label>) {
        match self {
            Plane::Leaf => {
                topo.add_child(parent, labels.next());
            }
            Plane::Node(c) => {
                let v = topo.add_child(parent, None);
                for t in c {
                    t.build(topo, v, labels);
                }
            }
        }
    }
}

fn compositions(n: usize, min_parts: usize) -> Vec<Vec<usize>> {
    // ordered compositions of n with at least min_parts parts
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(left: usize, min_parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            if cur.len() >= min_parts {
                out.push(cur.clone());
            }
            return;
        }
        for first in 1..=left {
            cur.push(first);
            rec(left - first, min_parts, cur, out);
            cur.pop();
        }
    }
    rec(n, min_parts, &mut cur, &mut out);
    out
}

fn plane_trees(n: usize, memo: &mut HashMap<usize, Vec<Plane>>) -> Vec<Plane> {
    if let Some(v) = memo.get(&n) {
        return v.clone();
    }
    let out = if n == 1 {
        vec![Plane::Leaf]
    } else {
        let mut out = Vec::new();
        for comp in compositions(n, 2) {
            let mut acc: Vec<Vec<Plane>> = vec![vec![]];
            for &part in &comp {
                let subs = plane_trees(part, memo);
                let mut next = Vec::with_capacity(acc.len() * subs.len());
                for prefix in &acc {
                    for s in &subs {
                        let mut p = prefix.clone();
                        p.push(s.clone());
                        next.push(p);
                    }
                }
                acc = next;
            }
            out.extend(acc.into_iter().map(Plane::Node));
        }
        out
    };
    memo.insert(n, out.clone());
    out
}

fn conditioned<S: Scalar>(alpha: &S, trees: &[Plane]) -> (Vec<S>, S) {
    let mut w = Vec::with_capacity(trees.len());
    let mut total = S::zero();
    let p0 = gw_offspring(alpha, 0);
    for t in trees {
        let mut d = Vec::new();
        t.degrees(&mut d);
        let mut x = p0.powu(t.leaves() as u32);
        for r in d {
            x = x * gw_offspring(alpha, r);
        }
        total = total + x.clone();
        w.push(x);
    }
    let w = w.into_iter().map(|x| x / total.clone()).collect();
    (w, total)
}

fn permutations(n: usize) -> Vec<Vec<Label>> {
    let mut out = Vec::new();
    let mut cur: Vec<Label> = (1..=n as Label).collect();
    fn heap(k: usize, a: &mut Vec<Label>, out: &mut Vec<Vec<Label>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

/// Law of a Galton-Watson tree with the offspring law above, conditioned on `n` leaves.
#[derive(Clone, Debug)]
pub struct GwOracle {
    pub alpha: f64,
    pub n: usize,
    /// Keyed by the ordered shape key (`*` for a leaf).
    pub ordered: BTreeMap<String, f64>,
    /// Keyed by the unordered shape key.
    pub shapes: BTreeMap<String, f64>,
    pub first_split: BTreeMap<IntegerPartition, f64>,
    /// Law of the labelled cladogram when labels are put on the leaves uniformly at random.
    pub labelled: HashMap<Cladogram, f64>,
    /// Present when α is a rational with denominator at most 4.
    pub exact_first_split: Option<BTreeMap<IntegerPartition, BigRational>>,
}

pub fn gw_conditioned_oracle(alpha: f64, n: usize) -> Result<GwOracle> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return domain(format!("stable index must lie in (1,2], got {alpha}"));
    }
    if n == 0 {
        return domain("n must be positive");
    }
    if n > GW_MAX_N {
        return Err(Error::Capacity(format!("oracle enumerates up to {GW_MAX_N} leaves, asked for {n}")));
    }
    let mut memo = HashMap::new();
    let trees = plane_trees(n, &mut memo);
    let (w, _) = conditioned(&alpha, &trees);
    let exact = small_rational(alpha, 4).map(|a| conditioned(&a, &trees).0);
    let mut ordered = BTreeMap::new();
    let mut shapes = BTreeMap::new();
    let mut first_split = BTreeMap::new();
    let mut exact_first: BTreeMap<IntegerPartition, BigRational> = BTreeMap::new();
    let mut labelled = HashMap::new();
    let perms = permutations(n);
    let share = 1.0 / perms.len() as f64;
    for (i, t) in trees.iter().enumerate() {
        if w[i] == 0.0 {
            continue;
        }
        *ordered.entry(t.key(true)).or_insert(0.0) += w[i];
        *shapes.entry(t.key(false)).or_insert(0.0) += w[i];
        if let Plane::Node(c) = t {
            let p = IntegerPartition::new(c.iter().map(|s| s.leaves()).collect())?;
            *first_split.entry(p.clone()).or_insert(0.0) += w[i];
            if let Some(e) = &exact {
                let slot = exact_first.entry(p).or_insert_with(<BigRational as Zero>::zero);
                *slot = slot.clone() + e[i].clone();
            }
        }
        for perm in &perms {
            let mut topo = Topology::new();
            t.build(&mut topo, ROOT, &mut perm.iter().cloned());
            *labelled.entry(Cladogram::from_topology(&topo)?).or_insert(0.0) += w[i] * share;
        }
    }
    Ok(GwOracle {
        alpha,
        n,
        ordered,
        shapes,
        first_split,
        labelled,
        exact_first_split: exact.map(|_| exact_first),
    })
}
