//! Exact TBR (tree bisection and reconnection) distance between unrooted
//! binary phylogenetic trees.
//!
//! The pipeline kernelizes a tree pair with the subtree and chain reductions
//! plus five further rules, solves the reduced pair exactly by a bounded
//! edge-deletion search over agreement forests, and adds back the offset
//! accumulated by the distance-reducing rules. Brute-force oracles (set
//! partition enumeration, breadth-first search over tree space) verify the
//! pipeline at small scale, and a network/generator layer audits the kernel
//! size bounds.

pub mod chain;
pub mod generate;
pub mod network;
pub mod forest;
pub mod newick;
pub mod preserve;
pub mod reduce;
pub mod search;
pub mod tbr;
pub mod tight;
pub mod taxa;
pub mod tree;

pub use taxa::{Taxon, TaxonSet};
pub use tree::{Quartet, UnrootedTree};

/// Oracle size guard, overridable through `TBRKERNEL_MAX_N`.
pub fn oracle_max_n() -> usize {
    std::env::var("TBRKERNEL_MAX_N")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(9)
}
