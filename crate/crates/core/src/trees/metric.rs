use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{EdgeWeightedTree, Label, Topology, ROOT};
use crate::error::{domain, Result};

/// Reduced subtree spanned by `ROOT` and `leaves`; degree-2 vertices are suppressed and
/// their edge lengths summed. Child order of the input is inherited.
pub fn reduce(tree: &EdgeWeightedTree, leaves: &[Label]) -> Result<EdgeWeightedTree> {
    let topo = tree.topology();
    let want: BTreeSet<Label> = leaves.iter().cloned().collect();
    if want.is_empty() {
        return domain("reduce needs at least one leaf");
    }
    let mut keep = vec![false; topo.len()];
    let mut found = 0;
    for v in topo.preorder().into_iter().rev() {
        if topo.is_leaf(v) {
            if want.contains(&topo.label(v).unwrap()) {
                keep[v] = true;
                found += 1;
            }
        } else {
            keep[v] = topo.children(v).iter().any(|&c| keep[c]);
        }
    }
    if found != want.len() {
        let have: BTreeSet<Label> = topo.leaf_labels().into_iter().collect();
        let missing: Vec<_> = want.difference(&have).collect();
        return domain(format!("unknown leaf labels {missing:?}"));
    }
    let mut out = Topology::new();
    let mut lengths = vec![0.0];
    // (old node, new parent, length carried from suppressed ancestors)
    let mut stack = vec![(topo.top(), ROOT, 0.0)];
    while let Some((v, parent, acc)) = stack.pop() {
        let len = acc + tree.length(v);
        let kids: Vec<usize> = topo.children(v).iter().cloned().filter(|&c| keep[c]).collect();
        if kids.len() == 1 {
            stack.push((kids[0], parent, len));
            continue;
        }
        let id = out.add_child(parent, topo.label(v));
        lengths.push(len);
        for &c in kids.iter().rev() {
            stack.push((c, id, 0.0));
        }
    }
    EdgeWeightedTree::new(&out, &lengths)
}

/// One of the points `ROOT` or a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Root,
    Leaf(Label),
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Point::Root => write!(f, "ROOT"),
            Point::Leaf(l) => write!(f, "{l}"),
        }
    }
}

/// Path distances between `ROOT` and the leaves, `ROOT` first and then leaves by label.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    pub points: Vec<Point>,
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn get(&self, a: Point, b: Point) -> Option<f64> {
        let i = self.points.iter().position(|&p| p == a)?;
        let j = self.points.iter().position(|&p| p == b)?;
        Some(self.values[i][j])
    }

    pub fn max_entry(&self) -> f64 {
        self.values.iter().flatten().cloned().fold(0.0, f64::max)
    }

    /// CSV with a header row of point names.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("point");
        for p in &self.points {
            write!(s, ",{p}").unwrap();
        }
        s.push('\n');
        for (p, row) in self.points.iter().zip(&self.values) {
            write!(s, "{p}").unwrap();
            for v in row {
                write!(s, ",{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

pub fn distance_matrix(tree: &EdgeWeightedTree) -> DistanceMatrix {
    let topo = tree.topology();
    let h = tree.heights();
    let depth = topo.depths();
    let mut leaves: Vec<(Label, usize)> = topo.leaves().iter().map(|&v| (topo.label(v).unwrap(), v)).collect();
    leaves.sort_unstable();
    let mut nodes = vec![ROOT];
    let mut points = vec![Point::Root];
    for &(l, v) in &leaves {
        nodes.push(v);
        points.push(Point::Leaf(l));
    }
    let lca = |mut a: usize, mut b: usize| {
        while depth[a] > depth[b] {
            a = topo.parent(a).unwrap();
        }
        while depth[b] > depth[a] {
            b = topo.parent(b).unwrap();
        }
        while a != b {
            a = topo.parent(a).unwrap();
            b = topo.parent(b).unwrap();
        }
        a
    };
    let m = nodes.len();
    let mut values = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let c = lca(nodes[i], nodes[j]);
            let d = h[nodes[i]] + h[nodes[j]] - 2.0 * h[c];
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    DistanceMatrix { points, values }
}

/// Largest discrepancy of pairwise distances among `ROOT` and the leaves under the identity
/// correspondence.
pub fn distortion(a: &EdgeWeightedTree, b: &EdgeWeightedTree) -> Result<f64> {
    if a.leaf_labels() != b.leaf_labels() {
        return domain("trees have different leaf label sets");
    }
    let da = distance_matrix(a);
    let db = distance_matrix(b);
    let mut worst: f64 = 0.0;
    for (ra, rb) in da.values.iter().zip(&db.values) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{parse_newick, Cladogram};

    #[test]
    fn reduce_suppresses_degree_two() {
        let t = Cladogram::parse("((1,2),3)").unwrap().with_unit_lengths();
        let r = reduce(&t, &[1, 3]).unwrap();
        let expected = parse_newick("((1:2,3:1):1);").unwrap();
        assert!(r.approx_eq(&expected, 0.0), "{}", r.newick());
    }

    #[test]
    fn reduce_full_set_is_identity() {
        let t = parse_newick("(((1:0.5,2:2):1.5,3:1):0.25);").unwrap();
        assert_eq!(reduce(&t, &[1, 2, 3]).unwrap(), t);
    }

    #[test]
    fn reduce_single_leaf_is_a_path() {
        let t = parse_newick("(((1:0.5,2:2):1.5,3:1):0.25);").unwrap();
        let r = reduce(&t, &[2]).unwrap();
        assert_eq!(r.newick(), "(2:3.75);");
    }

    #[test]
    fn reduce_rejects_unknown_labels() {
        let t = Cladogram::parse("(1,2)").unwrap().with_unit_lengths();
        assert!(reduce(&t, &[3]).is_err());
        assert!(reduce(&t, &[]).is_err());
    }

    #[test]
    fn reduce_keeps_child_order() {
        let t = parse_newick("(((3:1,4:1):1,(2:1,1:1):1):1);").unwrap();
        let r = reduce(&t, &[1, 2, 3]).unwrap();
        assert_eq!(r.newick(), "((3:2,(2:1,1:1):1):1);");
    }

    #[test]
    fn cherry_distances() {
        let t = Cladogram::parse("(1,2)").unwrap().with_unit_lengths();
        let d = distance_matrix(&t);
        assert_eq!(d.get(Point::Leaf(1), Point::Leaf(2)), Some(2.0));
        assert_eq!(d.get(Point::Root, Point::Leaf(2)), Some(2.0));
        assert!(d.to_csv().starts_with("point,ROOT,1,2\n"));
    }

    #[test]
    fn three_leaf_distortion() {
        let a = Cladogram::parse("((1,2),3)").unwrap().with_unit_lengths();
        let b = Cladogram::parse("((1,3),2)").unwrap().with_unit_lengths();
        // hand-computed matrices over (ROOT, 1, 2, 3)
        let ma = [[0.0, 3.0, 3.0, 2.0], [3.0, 0.0, 2.0, 3.0], [3.0, 2.0, 0.0, 3.0], [2.0, 3.0, 3.0, 0.0]];
        let mb = [[0.0, 3.0, 2.0, 3.0], [3.0, 0.0, 3.0, 2.0], [2.0, 3.0, 0.0, 3.0], [3.0, 2.0, 3.0, 0.0]];
        assert_eq!(distance_matrix(&a).values, ma.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        assert_eq!(distance_matrix(&b).values, mb.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        let mut brute: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                brute = brute.max((ma[i][j] - mb[i][j]).abs());
            }
        }
        assert_eq!(brute, 1.0);
        assert_eq!(distortion(&a, &b).unwrap(), brute);
        assert_eq!(distortion(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn distortion_of_scaling() {
        let t = parse_newick("(((1:0.5,2:2):1.5,3:1):0.25);").unwrap();
        let a = 2.5;
        let d = distortion(&t, &t.scaled(a).unwrap()).unwrap();
        let m = distance_matrix(&t).max_entry();
        assert!((d - (a - 1.0) * m).abs() < 1e-12);
        let other = Cladogram::parse("(1,2)").unwrap().with_unit_lengths();
        assert!(distortion(&t, &other).is_err());
    }
}
