use rand::Rng;

use crate::error::{domain, Result};
use crate::trees::{Cladogram, Label, Topology, ROOT};

/// Marchal's growth for the stable shapes: every edge has weight `1-1/α` and every internal
/// vertex with `c` children has weight `c/α - 1`; the stage-`n` total is `n - 1/α`.
#[derive(Clone, Debug)]
pub struct MarchalGrowth {
    alpha: f64,
    topo: Topology,
    n: usize,
    n_internal: usize,
}

impl MarchalGrowth {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return domain(format!("Marchal growth needs alpha in (1,2), got {alpha}"));
        }
        let mut topo = Topology::new();
        topo.add_child(ROOT, Some(1));
        Ok(MarchalGrowth { alpha, topo, n: 1, n_internal: 0 })
    }

    pub fn n_leaves(&self) -> usize {
        self.n
    }

    /// Sum of the edge and vertex weights of the current tree.
    pub fn total_weight(&self) -> f64 {
        let a = self.alpha;
        let edges = (self.topo.len() - 1) as f64;
        let vertex: f64 = (1..self.topo.len())
            .filter(|&v| !self.topo.is_leaf(v))
            .map(|v| self.topo.children(v).len() as f64 / a - 1.0)
            .sum();
        edges * (1.0 - 1.0 / a) + vertex
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let a = self.alpha;
        let n_nodes = self.topo.len() - 1;
        let edge_total = n_nodes as f64 * (1.0 - 1.0 / a);
        let total = self.n as f64 - 1.0 / a;
        let label = (self.n + 1) as Label;
        if self.n_internal == 0 || rng.gen::<f64>() * total < edge_total {
            let v = rng.gen_range(1..=n_nodes);
            let u = self.topo.subdivide(v);
            let pos = rng.gen_range(0..=1);
            self.topo.insert_leaf(u, pos, label);
            self.n_internal += 1;
        } else {
            // parent of a uniform non-top node is internal vertex v with probability c_v / (nodes - 1);
            // thinning by 1 - α/c_v leaves probability proportional to c_v/α - 1
            let v = loop {
                let w = rng.gen_range(1..=n_nodes);
                let p = self.topo.parent(w).unwrap();
                if p == ROOT {
                    continue;
                }
                let c = self.topo.children(p).len() as f64;
                if rng.gen::<f64>() < 1.0 - a / c {
                    break p;
                }
            };
            let pos = rng.gen_range(0..=self.topo.children(v).len());
            self.topo.insert_leaf(v, pos, label);
        }
        self.n += 1;
    }

    pub fn grow_to<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) {
        while self.n < n {
            self.step(rng);
            debug_assert!((self.total_weight() - (self.n as f64 - 1.0 / self.alpha)).abs() < 1e-9);
        }
    }

    pub fn tree(&self) -> Cladogram {
        Cladogram::from_topology(&self.topo).expect("growth keeps the tree valid")
    }
}

pub fn sample_marchal_growth<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Result<Cladogram> {
    if n == 0 {
        return domain("growth needs n >= 1");
    }
    let mut g = MarchalGrowth::new(alpha)?;
    g.grow_to(n, rng);
    Ok(g.tree())
}
