use std::collections::HashMap;

use super::{Cladogram, Label, Topology, ROOT};
use crate::error::{Error, Result};

const MAX_N: usize = 8;

type Mask = u16;

/// Every labelled cladogram on `[n]`, or only the binary ones.
pub fn enumerate_cladograms(n: usize, binary_only: bool) -> Result<Vec<Cladogram>> {
    check(n)?;
    let full: Mask = ((1u32 << n) - 1) as Mask;
    let mut memo = HashMap::new();
    let shapes = trees_on(full, binary_only, &mut memo);
    shapes.iter().map(|clusters| build(full, clusters)).collect()
}

/// Number of labelled cladograms on `[n]` without materialising them.
pub fn count_cladograms(n: usize, binary_only: bool) -> Result<u64> {
    check(n)?;
    let full: Mask = ((1u32 << n) - 1) as Mask;
    let mut memo = HashMap::new();
    Ok(count_on(full, binary_only, &mut memo))
}

fn check(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Capacity(format!("enumeration supports 1 <= n <= {MAX_N}, got {n}")));
    }
    Ok(())
}

/// Unordered splits of `set` into at least two blocks, each block a mask; the block holding
/// the lowest element comes first.
fn splits(set: Mask, binary_only: bool) -> Vec<Vec<Mask>> {
    let elems: Vec<Mask> = (0..16).map(|i| 1 << i).filter(|b| set & b != 0).collect();
    let mut out = Vec::new();
    let mut blocks: Vec<Mask> = Vec::new();
    fn rec(elems: &[Mask], i: usize, blocks: &mut Vec<Mask>, binary_only: bool, out: &mut Vec<Vec<Mask>>) {
        if i == elems.len() {
            if blocks.len() >= 2 && (!binary_only || blocks.len() == 2) {
                out.push(blocks.clone());
            }
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] |= elems[i];
            rec(elems, i + 1, blocks, binary_only, out);
            blocks[b] &= !elems[i];
        }
        if !binary_only || blocks.len() < 2 {
            blocks.push(elems[i]);
            rec(elems, i + 1, blocks, binary_only, out);
            blocks.pop();
        }
    }
    rec(&elems, 0, &mut blocks, binary_only, &mut out);
    out
}

fn trees_on(set: Mask, binary_only: bool, memo: &mut HashMap<Mask, Vec<Vec<Mask>>>) -> Vec<Vec<Mask>> {
    if let Some(v) = memo.get(&set) {
        return v.clone();
    }
    let out = if set.count_ones() == 1 {
        vec![Vec::new()]
    } else {
        let mut out = Vec::new();
        for blocks in splits(set, binary_only) {
            // clusters strictly below `set`, as a product over the blocks
            let mut acc: Vec<Vec<Mask>> = vec![Vec::new()];
            for &b in &blocks {
                let sub = trees_on(b, binary_only, memo);
                let mut next = Vec::with_capacity(acc.len() * sub.len());
                for a in &acc {
                    for s in &sub {
                        let mut c = a.clone();
                        c.push(b);
                        c.extend_from_slice(s);
                        next.push(c);
                    }
                }
                acc = next;
            }
            out.extend(acc);
        }
        out
    };
    memo.insert(set, out.clone());
    out
}

fn count_on(set: Mask, binary_only: bool, memo: &mut HashMap<Mask, u64>) -> u64 {
    if set.count_ones() == 1 {
        return 1;
    }
    if let Some(&v) = memo.get(&set) {
        return v;
    }
    let total = splits(set, binary_only)
        .iter()
        .map(|blocks| blocks.iter().map(|&b| count_on(b, binary_only, memo)).product::<u64>())
        .sum();
    memo.insert(set, total);
    total
}

fn labels_of(m: Mask) -> Vec<Label> {
    (0..16).filter(|i| m & (1 << i) != 0).map(|i| i as Label + 1).collect()
}

fn build(full: Mask, clusters: &[Mask]) -> Result<Cladogram> {
    let mut all: Vec<Mask> = clusters.to_vec();
    all.push(full);
    for i in 0..16 {
        let b = 1 << i;
        if full & b != 0 && !all.contains(&b) {
            all.push(b);
        }
    }
    // parents before children: sort by size descending
    all.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    let mut topo = Topology::new();
    let mut ids: Vec<usize> = Vec::with_capacity(all.len());
    for (i, &m) in all.iter().enumerate() {
        let label = if m.count_ones() == 1 { Some(labels_of(m)[0]) } else { None };
        let parent = (0..i)
            .rev()
            .filter(|&j| all[j] & m == m)
            .min_by_key(|&j| all[j].count_ones())
            .map(|j| ids[j])
            .unwrap_or(ROOT);
        ids.push(topo.add_child(parent, label));
    }
    Cladogram::from_topology(&topo)
}
