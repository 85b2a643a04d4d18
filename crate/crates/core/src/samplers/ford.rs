use rand::Rng;

use crate::error::{domain, Result};
use crate::trees::{EdgeWeightedTree, Label, OrderedCladogram, Topology, ROOT};

/// Ford's sequential construction: leaf edges carry weight `1-α`, inner edges `α`; the chosen
/// edge is split and the new leaf goes left or right of the new vertex with probability 1/2.
///
/// Leaf `m` is the one added at stage `m`. Optionally tracks the reduced tree spanned by the
/// first `k` leaves, whose edge lengths are numbers of edges of the current tree.
#[derive(Clone, Debug)]
pub struct FordGrowth {
    alpha: f64,
    topo: Topology,
    leaf_edges: Vec<usize>,
    inner_edges: Vec<usize>,
    // reduced-tree edge owning the edge above each node, and its current length
    owner: Vec<Option<usize>>,
    counts: Vec<usize>,
    tracked: Option<(usize, Topology)>,
}

impl FordGrowth {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return domain(format!("Ford alpha must lie in [0,1], got {alpha}"));
        }
        Ok(FordGrowth {
            alpha,
            topo: Topology::new(),
            leaf_edges: vec![],
            inner_edges: vec![],
            owner: vec![None],
            counts: vec![],
            tracked: None,
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.leaf_edges.len()
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    /// Add the next leaf; returns the index of the new vertex (or of leaf 1 at the first step).
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let m = self.n_leaves();
        if m == 0 {
            let v = self.topo.add_child(ROOT, Some(1));
            self.leaf_edges.push(v);
            self.owner.push(None);
            return v;
        }
        let mf = m as f64;
        let leaf_side = m == 1 || rng.gen::<f64>() * (mf - self.alpha) < mf * (1.0 - self.alpha);
        let v = if leaf_side {
            self.leaf_edges[rng.gen_range(0..m)]
        } else {
            self.inner_edges[rng.gen_range(0..self.inner_edges.len())]
        };
        let u = self.topo.subdivide(v);
        let owner = self.owner[v];
        self.owner.push(owner);
        if let Some(e) = owner {
            self.counts[e] += 1;
        }
        let pos = if rng.gen::<bool>() { 0 } else { 1 };
        let leaf = self.topo.insert_leaf(u, pos, (m + 1) as Label);
        self.owner.push(None);
        self.inner_edges.push(u);
        self.leaf_edges.push(leaf);
        u
    }

    pub fn grow_to<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) {
        while self.n_leaves() < n {
            self.step(rng);
        }
    }

    pub fn snapshot(&self) -> OrderedCladogram {
        OrderedCladogram::from_topology(&self.topo).expect("growth keeps the tree valid")
    }

    /// Start following the reduced tree of leaves `1..=k`; the tree must have exactly k leaves.
    pub fn track_reduced(&mut self) -> Result<()> {
        let k = self.n_leaves();
        if k == 0 {
            return domain("nothing to track before the first leaf");
        }
        self.counts = vec![0; self.topo.len()];
        for v in 1..self.topo.len() {
            self.owner[v] = Some(v);
            self.counts[v] = 1;
        }
        self.tracked = Some((k, self.topo.clone()));
        Ok(())
    }

    /// Current reduced tree of the tracked leaves with unscaled edge counts as lengths.
    pub fn reduced_tree(&self) -> Option<EdgeWeightedTree> {
        let (_, topo) = self.tracked.as_ref()?;
        let lengths: Vec<f64> = (0..topo.len()).map(|v| if v == ROOT { 0.0 } else { self.counts[v] as f64 }).collect();
        EdgeWeightedTree::new(topo, &lengths).ok()
    }

    /// Total number of edges of the current tree lying in the tracked reduced tree.
    pub fn reduced_length(&self) -> Option<usize> {
        self.tracked.as_ref().map(|_| self.counts.iter().sum())
    }

    /// Depths of all leaves (edges from `ROOT`) indexed by label - 1, and the height.
    pub fn leaf_depths(&self) -> (Vec<usize>, usize) {
        let d = self.topo.depths();
        let mut out = vec![0; self.n_leaves()];
        for &v in &self.leaf_edges {
            out[self.topo.label(v).unwrap() as usize - 1] = d[v];
        }
        let h = out.iter().cloned().max().unwrap_or(0);
        (out, h)
    }

    /// Number of leaves strictly to the left of leaf `label`.
    pub fn leaves_left_of(&self, label: Label) -> Option<usize> {
        self.topo.leaves().iter().position(|&v| self.topo.label(v) == Some(label))
    }
}

/// The coupled sequence `T̃_1, ..., T̃_n`.
pub fn sample_ford_growth<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Result<Vec<OrderedCladogram>> {
    let mut g = FordGrowth::new(alpha)?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        g.step(rng);
        out.push(g.snapshot());
    }
    Ok(out)
}

/// Only the final tree `T̃_n`.
pub fn grow_ford<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Result<OrderedCladogram> {
    if n == 0 {
        return domain("growth needs n >= 1");
    }
    let mut g = FordGrowth::new(alpha)?;
    g.grow_to(n, rng);
    Ok(g.snapshot())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngState;
    use crate::trees::reduce;

    #[test]
    fn first_two_stages() {
        let mut rng = RngState::new(3).rng();
        let seq = sample_ford_growth(0.4, 2, &mut rng).unwrap();
        assert_eq!(seq[0].to_string(), "1");
        assert_eq!(seq[1].unordered().to_string(), "(1,2)");
    }

    #[test]
    fn sequence_is_increasing() {
        let mut rng = RngState::new(4).rng();
        for _ in 0..50 {
            let seq = sample_ford_growth(0.3, 9, &mut rng).unwrap();
            for m in 1..seq.len() {
                let labels: Vec<Label> = (1..=m as Label).collect();
                assert_eq!(seq[m].restrict(&labels).unwrap(), seq[m - 1]);
            }
        }
    }

    #[test]
    fn leaf_three_depth_two() {
        let alpha = 0.3;
        let mut rng = RngState::new(8).rng();
        let reps = 20_000;
        let mut hits = 0;
        for _ in 0..reps {
            let mut g = FordGrowth::new(alpha).unwrap();
            g.grow_to(3, &mut rng);
            if g.leaf_depths().0[2] == 2 {
                hits += 1;
            }
        }
        let p = alpha / (2.0 - alpha);
        let f = hits as f64 / reps as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / reps as f64).sqrt(), "{f} vs {p}");
    }

    #[test]
    fn tracked_reduced_tree_matches_reduce() {
        let mut rng = RngState::new(12).rng();
        for k in 1..=4 {
            let mut g = FordGrowth::new(0.6).unwrap();
            g.grow_to(k, &mut rng);
            g.track_reduced().unwrap();
            for _ in 0..60 {
                g.step(&mut rng);
                let labels: Vec<Label> = (1..=k as Label).collect();
                let full = EdgeWeightedTree::unit(g.topology());
                let direct = reduce(&full, &labels).unwrap();
                let tracked = g.reduced_tree().unwrap();
                assert!(tracked.approx_eq(&direct, 0.0), "{} vs {}", tracked.newick(), direct.newick());
                assert_eq!(g.reduced_length().unwrap() as f64, direct.total_length());
            }
        }
    }

    #[test]
    fn edge_counts() {
        let mut rng = RngState::new(2).rng();
        let mut g = FordGrowth::new(1.0).unwrap();
        g.grow_to(30, &mut rng);
        assert_eq!(g.topology().len() - 1, 59);
        assert!(g.snapshot().unordered().is_binary());
    }
}
