use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{domain, Result};
use crate::trees::{Cladogram, Label, OrderedCladogram, Topology};

/// Independent uniform child orders at every internal node.
pub fn attach_exchangeable_order<R: Rng + ?Sized>(tree: &Cladogram, rng: &mut R) -> OrderedCladogram {
    let mut topo = tree.topology().clone();
    for v in 1..topo.len() {
        if topo.children(v).len() > 1 {
            let mut kids = topo.children(v).to_vec();
            kids.shuffle(rng);
            topo.set_child_order(v, kids).unwrap();
        }
    }
    OrderedCladogram::from_topology(&topo).unwrap()
}

/// Where a new leaf joins an ordered tree; nodes are named by their leaf sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Insertion {
    /// As an extra child of the internal node with this leaf set.
    Vertex(Vec<Label>),
    /// On the edge above the node with this leaf set, through a new binary vertex.
    Edge(Vec<Label>),
}

fn find(topo: &Topology, set: &[Label]) -> Result<usize> {
    let mut want = set.to_vec();
    want.sort_unstable();
    let sets = topo.leaf_sets();
    (1..topo.len()).find(|&v| sets[v] == want).ok_or_else(|| crate::Error::Domain(format!("no node with leaf set {want:?}")))
}

/// Consistent extension of a planar order: position uniform among the `r+1` gaps at an
/// `r`-child vertex, left or right with probability 1/2 at a new binary vertex.
pub fn extend_order<R: Rng + ?Sized>(
    tree: &OrderedCladogram,
    at: &Insertion,
    label: Label,
    rng: &mut R,
) -> Result<OrderedCladogram> {
    let mut topo = tree.topology().clone();
    if topo.leaf_node(label).is_some() {
        return domain(format!("leaf {label} already present"));
    }
    match at {
        Insertion::Vertex(set) => {
            let v = find(&topo, set)?;
            if topo.is_leaf(v) {
                return domain("cannot attach a leaf below a leaf; use Insertion::Edge");
            }
            let r = topo.children(v).len();
            topo.insert_leaf(v, rng.gen_range(0..=r), label);
        }
        Insertion::Edge(set) => {
            let v = find(&topo, set)?;
            let u = topo.subdivide(v);
            topo.insert_leaf(u, rng.gen_range(0..=1), label);
        }
    }
    OrderedCladogram::from_topology(&topo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngState;
    use std::collections::HashMap;

    #[test]
    fn three_children_orders_uniform() {
        let t = Cladogram::parse("(1,2,3)").unwrap();
        let mut rng = RngState::new(1).rng();
        let reps = 60_000;
        let mut counts: HashMap<Vec<Label>, usize> = HashMap::new();
        for _ in 0..reps {
            *counts.entry(attach_exchangeable_order(&t, &mut rng).leaf_order()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let e = reps as f64 / 6.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 5 degrees of freedom, 0.001 quantile is 20.5
        assert!(chi2 < 20.5, "{chi2}");
    }

    #[test]
    fn extension_restricts_back() {
        let mut rng = RngState::new(2).rng();
        let t = OrderedCladogram::parse("((2,1),3)").unwrap();
        for at in [Insertion::Vertex(vec![1, 2]), Insertion::Edge(vec![3]), Insertion::Edge(vec![1, 2, 3])] {
            for _ in 0..20 {
                let e = extend_order(&t, &at, 4, &mut rng).unwrap();
                assert_eq!(e.restrict(&[1, 2, 3]).unwrap(), t);
                assert_eq!(e.n_leaves(), 4);
            }
        }
        assert!(extend_order(&t, &Insertion::Vertex(vec![3]), 4, &mut rng).is_err());
        assert!(extend_order(&t, &Insertion::Edge(vec![1, 3]), 4, &mut rng).is_err());
        assert!(extend_order(&t, &Insertion::Edge(vec![1]), 2, &mut rng).is_err());
    }

    #[test]
    fn binary_sides_even() {
        let mut rng = RngState::new(3).rng();
        let t = OrderedCladogram::parse("(1,2)").unwrap();
        let reps = 20_000;
        let left = (0..reps)
            .filter(|_| extend_order(&t, &Insertion::Edge(vec![1]), 3, &mut rng).unwrap().leaf_order()[0] == 3)
            .count();
        let f = left as f64 / reps as f64;
        assert!((f - 0.5).abs() < 4.0 * (0.25 / reps as f64).sqrt());
    }
}
