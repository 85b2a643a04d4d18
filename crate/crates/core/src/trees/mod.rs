//! Planted leaf-labelled trees: unordered shapes, ordered shapes and trees with edge lengths.
//!
//! All three share an arena [`Topology`]. Node 0 is the root vertex `ROOT`, which has a single
//! child, the node carrying the full leaf set. Leaves carry positive integer labels.

mod enumerate;
mod height;
mod metric;
mod newick;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{domain, Error, Result};
use crate::partitions::IntegerPartition;

pub use enumerate::{count_cladograms, enumerate_cladograms};
pub use height::LeafHeightFunction;
pub use metric::{distance_matrix, distortion, reduce, DistanceMatrix, Point};
pub use newick::{parse_newick, to_newick};

pub type Label = u32;

/// Index of the root vertex in every arena.
pub const ROOT: usize = 0;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub label: Option<Label>,
}

/// Arena representation shared by the tree types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Topology {
    nodes: Vec<Node>,
}

impl Default for Topology {
    fn default() -> Self {
        Self::new()
    }
}

impl Topology {
    /// A lone `ROOT` with no children yet.
    pub fn new() -> Self {
        Topology {
            nodes: vec![Node {
                parent: None,
                children: Vec::new(),
                label: None,
            }],
        }
    }

    pub fn add_child(&mut self, parent: usize, label: Option<Label>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            parent: Some(parent),
            children: Vec::new(),
            label,
        });
        self.nodes[parent].children.push(id);
        id
    }

    /// Insert a new node on the edge above `v`; the new node takes `v`'s slot in its parent.
    pub fn subdivide(&mut self, v: usize) -> usize {
        let p = self.nodes[v].parent.expect("cannot subdivide above ROOT");
        let u = self.nodes.len();
        self.nodes.push(Node {
            parent: Some(p),
            children: vec![v],
            label: None,
        });
        let slot = self.nodes[p].children.iter().position(|&c| c == v).unwrap();
        self.nodes[p].children[slot] = u;
        self.nodes[v].parent = Some(u);
        u
    }

    /// Attach a new leaf under `parent` at child position `pos`.
    pub fn insert_leaf(&mut self, parent: usize, pos: usize, label: Label) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            parent: Some(parent),
            children: Vec::new(),
            label: Some(label),
        });
        self.nodes[parent].children.insert(pos, id);
        id
    }

    /// Replace the child list of `v` by a permutation of it.
    pub fn set_child_order(&mut self, v: usize, order: Vec<usize>) -> Result<()> {
        let mut a = order.clone();
        let mut b = self.nodes[v].children.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return domain(format!("new child order of node {v} is not a permutation"));
        }
        self.nodes[v].children = order;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.nodes[i].children
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.nodes[i].parent
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        i != ROOT && self.nodes[i].children.is_empty()
    }

    pub fn label(&self, i: usize) -> Option<Label> {
        self.nodes[i].label
    }

    /// The node holding the full leaf set.
    pub fn top(&self) -> usize {
        self.nodes[ROOT].children[0]
    }

    /// Depth-first preorder following child order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![ROOT];
        while let Some(v) = stack.pop() {
            out.push(v);
            for &c in self.nodes[v].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Leaves in depth-first (left to right) order.
    pub fn leaves(&self) -> Vec<usize> {
        self.preorder().into_iter().filter(|&v| self.is_leaf(v)).collect()
    }

    pub fn leaf_labels(&self) -> Vec<Label> {
        let mut l: Vec<Label> = self.leaves().iter().map(|&v| self.nodes[v].label.unwrap()).collect();
        l.sort_unstable();
        l
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().enumerate().filter(|(i, _)| self.is_leaf(*i)).count()
    }

    pub fn leaf_node(&self, label: Label) -> Option<usize> {
        (0..self.nodes.len()).find(|&i| self.is_leaf(i) && self.nodes[i].label == Some(label))
    }

    /// Number of edges from `ROOT` to every node.
    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for v in self.preorder() {
            if let Some(p) = self.nodes[v].parent {
                d[v] = d[p] + 1;
            }
        }
        d
    }

    /// Sorted leaf labels below every node.
    pub fn leaf_sets(&self) -> Vec<Vec<Label>> {
        let mut sets: Vec<Vec<Label>> = vec![Vec::new(); self.nodes.len()];
        for v in self.preorder().into_iter().rev() {
            if self.is_leaf(v) {
                sets[v] = vec![self.nodes[v].label.unwrap()];
            } else {
                let mut s: Vec<Label> = Vec::new();
                for &c in &self.nodes[v].children {
                    s.extend_from_slice(&sets[c]);
                }
                s.sort_unstable();
                sets[v] = s;
            }
        }
        sets
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes[ROOT].children.len() != 1 {
            return domain(format!(
                "ROOT must have exactly one child, found {}",
                self.nodes[ROOT].children.len()
            ));
        }
        if self.nodes[ROOT].label.is_some() {
            return domain("ROOT carries no label");
        }
        let mut seen = BTreeSet::new();
        let mut reached = 0;
        for v in self.preorder() {
            reached += 1;
            if v == ROOT {
                continue;
            }
            let node = &self.nodes[v];
            for &c in &node.children {
                if self.nodes[c].parent != Some(v) {
                    return Err(Error::State(format!("parent link of node {c} is broken")));
                }
            }
            if node.children.is_empty() {
                let l = node.label.ok_or_else(|| Error::Domain("unlabelled leaf".into()))?;
                if l == 0 {
                    return domain("leaf labels must be positive");
                }
                if !seen.insert(l) {
                    return domain(format!("duplicate leaf label {l}"));
                }
            } else {
                if node.label.is_some() {
                    return domain("internal nodes carry no label");
                }
                if node.children.len() == 1 {
                    return domain("internal node with a single child");
                }
            }
        }
        if reached != self.nodes.len() {
            return Err(Error::State("arena contains unreachable nodes".into()));
        }
        Ok(())
    }

    /// Rebuild the arena in preorder, returning the old-to-new index map.
    pub fn relayout(&self) -> (Topology, Vec<usize>) {
        let order = self.preorder();
        let mut map = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = new;
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let n = &self.nodes[old];
                Node {
                    parent: n.parent.map(|p| map[p]),
                    children: n.children.iter().map(|&c| map[c]).collect(),
                    label: n.label,
                }
            })
            .collect();
        (Topology { nodes }, map)
    }

    /// Sort children by their smallest leaf label, then relayout.
    pub fn canonical(&self) -> (Topology, Vec<usize>) {
        let sets = self.leaf_sets();
        let mut t = self.clone();
        for v in 0..t.nodes.len() {
            t.nodes[v].children.sort_by_key(|&c| sets[c][0]);
        }
        t.relayout()
    }

    /// Unlabelled key of the subtree at `v`; children keys are sorted unless `ordered`.
    pub fn shape_key(&self, v: usize, ordered: bool) -> String {
        if self.is_leaf(v) {
            return "*".to_string();
        }
        let mut keys: Vec<String> = self.nodes[v].children.iter().map(|&c| self.shape_key(c, ordered)).collect();
        if !ordered {
            keys.sort();
        }
        format!("({})", keys.concat())
    }

    /// Leaf-count sizes of the children of the top node.
    pub fn first_split(&self) -> Option<IntegerPartition> {
        let top = self.top();
        if self.is_leaf(top) {
            return None;
        }
        let sets = self.leaf_sets();
        let parts = self.nodes[top].children.iter().map(|&c| sets[c].len()).collect();
        IntegerPartition::new(parts).ok()
    }

    fn fmt_shape(&self, v: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leaf(v) {
            return write!(f, "{}", self.nodes[v].label.unwrap());
        }
        write!(f, "(")?;
        for (i, &c) in self.nodes[v].children.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            self.fmt_shape(c, f)?;
        }
        write!(f, ")")
    }
}

/// A planted cladogram with canonical child order, so equality is equality of cluster systems.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cladogram {
    topo: Topology,
}

impl Cladogram {
    pub fn from_topology(topo: &Topology) -> Result<Self> {
        topo.validate()?;
        Ok(Cladogram { topo: topo.canonical().0 })
    }

    pub fn single_leaf(label: Label) -> Self {
        let mut t = Topology::new();
        t.add_child(ROOT, Some(label));
        Cladogram { topo: t }
    }

    /// Build from the non-root node sets. The full set and all singletons must be present.
    pub fn from_clusters(clusters: &[Vec<Label>]) -> Result<Self> {
        let mut sets: Vec<Vec<Label>> = clusters
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        sets.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        sets.dedup();
        let full = sets.first().cloned().ok_or_else(|| Error::Domain("no clusters".into()))?;
        for &l in &full {
            if !sets.iter().any(|s| s.len() == 1 && s[0] == l) {
                return domain(format!("singleton {{{l}}} missing"));
            }
        }
        let mut topo = Topology::new();
        let mut ids = Vec::with_capacity(sets.len());
        for (i, s) in sets.iter().enumerate() {
            if s.iter().any(|l| full.binary_search(l).is_err()) {
                return domain("cluster not contained in the full leaf set");
            }
            // smallest earlier set containing s is its parent; any partial overlap breaks laminarity
            let mut parent = None;
            for j in (0..i).rev() {
                let t = &sets[j];
                let inter = s.iter().filter(|l| t.binary_search(l).is_ok()).count();
                if inter == s.len() {
                    if parent.is_none() {
                        parent = Some(j);
                    }
                } else if inter > 0 {
                    return domain("clusters are not nested or disjoint");
                }
            }
            let label = if s.len() == 1 { Some(s[0]) } else { None };
            let id = match parent {
                None if i == 0 => topo.add_child(ROOT, label),
                None => return domain("clusters are not nested or disjoint"),
                Some(j) => topo.add_child(ids[j], label),
            };
            ids.push(id);
        }
        Self::from_topology(&topo)
    }

    /// Parse a shape such as `((1,2),3)`; the outer group is the full leaf set.
    pub fn parse(s: &str) -> Result<Self> {
        let t = parse_newick(&format!("({});", s.trim().trim_end_matches(';')))?;
        Ok(t.shape())
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn n_leaves(&self) -> usize {
        self.topo.n_leaves()
    }

    pub fn leaf_labels(&self) -> Vec<Label> {
        self.topo.leaf_labels()
    }

    /// Node sets other than `ROOT`.
    pub fn clusters(&self) -> BTreeSet<Vec<Label>> {
        self.topo.leaf_sets().into_iter().skip(1).collect()
    }

    /// Depth of every leaf and the height `H_n`.
    pub fn leaf_depths(&self) -> (BTreeMap<Label, usize>, usize) {
        let d = self.topo.depths();
        let mut m = BTreeMap::new();
        for v in self.topo.leaves() {
            m.insert(self.topo.label(v).unwrap(), d[v]);
        }
        let h = m.values().cloned().max().unwrap_or(0);
        (m, h)
    }

    pub fn height(&self) -> usize {
        self.leaf_depths().1
    }

    pub fn is_binary(&self) -> bool {
        (1..self.topo.len()).all(|v| self.topo.is_leaf(v) || self.topo.children(v).len() == 2)
    }

    pub fn first_split(&self) -> Option<IntegerPartition> {
        self.topo.first_split()
    }

    /// Key of the unlabelled shape.
    pub fn shape_key(&self) -> String {
        self.topo.shape_key(self.topo.top(), false)
    }

    pub fn with_unit_lengths(&self) -> EdgeWeightedTree {
        EdgeWeightedTree::unit(&self.topo)
    }

    /// Relabel leaves through `f`.
    pub fn relabel<F: Fn(Label) -> Label>(&self, f: F) -> Result<Self> {
        let mut t = self.topo.clone();
        for n in t.nodes.iter_mut() {
            if let Some(l) = n.label {
                n.label = Some(f(l));
            }
        }
        Self::from_topology(&t)
    }
}

impl fmt::Display for Cladogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.topo.fmt_shape(self.topo.top(), f)
    }
}

/// A cladogram with a total order on the children of every internal node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderedCladogram {
    topo: Topology,
}

impl OrderedCladogram {
    pub fn from_topology(topo: &Topology) -> Result<Self> {
        topo.validate()?;
        Ok(OrderedCladogram { topo: topo.relayout().0 })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = parse_newick(&format!("({});", s.trim().trim_end_matches(';')))?;
        Ok(t.ordered_shape())
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn n_leaves(&self) -> usize {
        self.topo.n_leaves()
    }

    /// Leaf labels from left to right.
    pub fn leaf_order(&self) -> Vec<Label> {
        self.topo.leaves().iter().map(|&v| self.topo.label(v).unwrap()).collect()
    }

    pub fn unordered(&self) -> Cladogram {
        Cladogram { topo: self.topo.canonical().0 }
    }

    /// Key of the unlabelled ordered shape.
    pub fn shape_key(&self) -> String {
        self.topo.shape_key(self.topo.top(), true)
    }

    pub fn leaf_height_function(&self) -> LeafHeightFunction {
        let d = self.topo.depths();
        LeafHeightFunction::new(self.topo.leaves().iter().map(|&v| d[v] as f64).collect())
    }

    /// Restriction to a subset of leaves with order inherited; degree-2 vertices suppressed.
    pub fn restrict(&self, leaves: &[Label]) -> Result<Self> {
        Ok(reduce(&EdgeWeightedTree::unit(&self.topo), leaves)?.ordered_shape())
    }
}

impl fmt::Display for OrderedCladogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.topo.fmt_shape(self.topo.top(), f)
    }
}

/// A planted tree with a strictly positive length on every edge.
///
/// `lengths[v]` is the length of the edge from `v` to its parent; child order is kept as given.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeightedTree {
    topo: Topology,
    lengths: Vec<f64>,
}

impl EdgeWeightedTree {
    pub fn new(topo: &Topology, lengths: &[f64]) -> Result<Self> {
        topo.validate()?;
        if lengths.len() != topo.len() {
            return domain("one length per node is required");
        }
        for (v, &l) in lengths.iter().enumerate().skip(1) {
            if !(l > 0.0 && l.is_finite()) {
                return domain(format!("edge above node {v} has non-positive length {l}"));
            }
        }
        let (t, map) = topo.relayout();
        let mut ls = vec![0.0; lengths.len()];
        for (old, &new) in map.iter().enumerate() {
            ls[new] = lengths[old];
        }
        ls[ROOT] = 0.0;
        Ok(EdgeWeightedTree { topo: t, lengths: ls })
    }

    pub fn unit(topo: &Topology) -> Self {
        let (t, _) = topo.relayout();
        let mut lengths = vec![1.0; t.len()];
        lengths[ROOT] = 0.0;
        EdgeWeightedTree { topo: t, lengths }
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn length(&self, v: usize) -> f64 {
        self.lengths[v]
    }

    pub fn leaf_labels(&self) -> Vec<Label> {
        self.topo.leaf_labels()
    }

    pub fn n_edges(&self) -> usize {
        self.topo.len() - 1
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return domain("scale factor must be positive");
        }
        Ok(EdgeWeightedTree {
            topo: self.topo.clone(),
            lengths: self.lengths.iter().map(|l| l * a).collect(),
        })
    }

    /// Distance from `ROOT` to every node.
    pub fn heights(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.topo.len()];
        for v in self.topo.preorder() {
            if let Some(p) = self.topo.parent(v) {
                h[v] = h[p] + self.lengths[v];
            }
        }
        h
    }

    pub fn shape(&self) -> Cladogram {
        Cladogram { topo: self.topo.canonical().0 }
    }

    pub fn ordered_shape(&self) -> OrderedCladogram {
        OrderedCladogram { topo: self.topo.clone() }
    }

    /// Same tree with children sorted by smallest leaf label.
    pub fn canonical(&self) -> Self {
        let (t, map) = self.topo.canonical();
        let mut ls = vec![0.0; self.lengths.len()];
        for (old, &new) in map.iter().enumerate() {
            ls[new] = self.lengths[old];
        }
        EdgeWeightedTree { topo: t, lengths: ls }
    }

    /// Equality up to child order with lengths compared to within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        a.topo == b.topo && a.lengths.iter().zip(&b.lengths).all(|(x, y)| (x - y).abs() <= tol)
    }

    pub fn newick(&self) -> String {
        to_newick(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depths_of_small_trees() {
        let cherry = Cladogram::parse("(1,2)").unwrap();
        let (d, h) = cherry.leaf_depths();
        assert_eq!(d.values().cloned().collect::<Vec<_>>(), vec![2, 2]);
        assert_eq!(h, 2);

        let t = Cladogram::parse("((1,2),3)").unwrap();
        let (d, h) = t.leaf_depths();
        assert_eq!(d.values().cloned().collect::<Vec<_>>(), vec![3, 3, 2]);
        assert_eq!(h, 3);

        let comb = Cladogram::parse("(((1,2),3),4)").unwrap();
        let (d, h) = comb.leaf_depths();
        assert_eq!(d.values().cloned().collect::<Vec<_>>(), vec![4, 4, 3, 2]);
        assert_eq!(h, 4);
    }

    #[test]
    fn canonical_equality_ignores_child_order() {
        let a = Cladogram::parse("((2,1),3)").unwrap();
        let b = Cladogram::parse("(3,(1,2))").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "((1,2),3)");
        let c = Cladogram::parse("((1,3),2)").unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn clusters_roundtrip() {
        let t = Cladogram::parse("((1,2),(3,4,5))").unwrap();
        let cl: Vec<Vec<Label>> = t.clusters().into_iter().collect();
        assert_eq!(Cladogram::from_clusters(&cl).unwrap(), t);
        assert!(cl.contains(&vec![1, 2, 3, 4, 5]));
    }

    #[test]
    fn overlapping_clusters_rejected() {
        let cl = vec![vec![1, 2, 3], vec![1, 2], vec![2, 3], vec![1], vec![2], vec![3]];
        assert!(Cladogram::from_clusters(&cl).is_err());
    }

    #[test]
    fn degree_two_vertices_rejected() {
        let mut t = Topology::new();
        let b = t.add_child(ROOT, None);
        t.add_child(b, Some(1));
        assert!(Cladogram::from_topology(&t).is_err());
    }

    #[test]
    fn ordered_shape_keys() {
        let a = OrderedCladogram::parse("((1,2),3)").unwrap();
        let b = OrderedCladogram::parse("(3,(1,2))").unwrap();
        assert_ne!(a.shape_key(), b.shape_key());
        assert_eq!(a.unordered(), b.unordered());
        assert_eq!(b.leaf_order(), vec![3, 1, 2]);
    }

    #[test]
    fn first_split_sizes() {
        let t = Cladogram::parse("((1,2),(3,4),5)").unwrap();
        assert_eq!(t.first_split().unwrap().parts(), &[2, 2, 1]);
        assert!(Cladogram::single_leaf(1).first_split().is_none());
    }
}
