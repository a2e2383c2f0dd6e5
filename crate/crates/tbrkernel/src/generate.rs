//! Deterministic tree generators for tests, verification suites, and the
//! command line.

use rand::Rng;

use crate::taxa::{Taxon, TaxonSet};
use crate::tree::{build_by_insertion, TreeBuilder, UnrootedTree};

/// Taxon set `t00, t01, ...` in canonical order.
pub fn numbered_taxa(n: usize) -> TaxonSet {
    (0..n).map(|i| Taxon::new(format!("t{i:02}"))).collect()
}

/// The caterpillar on `taxa` in canonical order: a cherry of the two
/// smallest taxa, then one leaf per spine vertex.
pub fn caterpillar(taxa: &TaxonSet) -> UnrootedTree {
    let labels: Vec<&Taxon> = taxa.iter().collect();
    match labels.len() {
        0 => panic!("caterpillar needs at least one taxon"),
        1 => UnrootedTree::singleton(labels[0].clone()),
        2 => {
            let mut b = TreeBuilder::new();
            let u = b.add_leaf(labels[0].clone());
            let v = b.add_leaf(labels[1].clone());
            b.add_edge(u, v);
            b.finish()
        }
        n => {
            let mut b = TreeBuilder::new();
            let mut spine = Vec::new();
            for _ in 0..n - 2 {
                spine.push(b.add_internal());
            }
            for w in spine.windows(2) {
                b.add_edge(w[0], w[1]);
            }
            let first = b.add_leaf(labels[0].clone());
            let second = b.add_leaf(labels[1].clone());
            b.add_edge(spine[0], first);
            b.add_edge(spine[0], second);
            for (i, t) in labels[2..n - 1].iter().enumerate() {
                let leaf = b.add_leaf((*t).clone());
                b.add_edge(spine[i + 1], leaf);
            }
            let last = b.add_leaf(labels[n - 1].clone());
            b.add_edge(spine[n - 3], last);
            b.finish()
        }
    }
}

/// Uniformly random tree on `taxa`: taxa are inserted in canonical order,
/// each on a uniformly chosen edge, which hits every tree exactly once.
pub fn random_tree(taxa: &TaxonSet, rng: &mut impl Rng) -> UnrootedTree {
    let labels: Vec<&Taxon> = taxa.iter().collect();
    assert!(labels.len() >= 3, "random trees need at least 3 taxa");
    let digits: Vec<usize> = (3..labels.len()).map(|j| rng.gen_range(0..2 * j - 3)).collect();
    build_by_insertion(&labels, &digits)
}

/// An independent pair of uniformly random trees on the same taxa.
pub fn random_pair(taxa: &TaxonSet, rng: &mut impl Rng) -> (UnrootedTree, UnrootedTree) {
    (random_tree(taxa, rng), random_tree(taxa, rng))
}
