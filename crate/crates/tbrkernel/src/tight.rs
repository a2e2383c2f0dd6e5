//! The tight family: for each `k >= 4`, a pair of exhaustively reduced
//! trees on `11k - 9` taxa at TBR distance exactly `k`.
//!
//! Both trees are read off one network built on the necklace generator with
//! `k - 1` beads. Every side carries a 3-chain block; the `2k` sides that
//! carry a breakpoint (all `2(k-1)` bead sides plus two connectors) also
//! carry one extra leaf. Each tree is the network minus one break edge per
//! breakpoint side of the other tree's spanning structure, so the two trees
//! disagree on every bead while sharing all blocks as common chains.

use thiserror::Error;

use crate::network::{necklace_generator, UnrootedNetwork};
use crate::taxa::Taxon;
use crate::tree::UnrootedTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TightError {
    #[error("the tight family starts at k = 4, got {0}")]
    KTooSmall(usize),
}

/// Side roles in construction order: top and bottom parallel sides per bead,
/// then the connectors.
fn side_layout(k: usize) -> (usize, Vec<usize>) {
    let beads = k - 1;
    // generator side order: (top_i, bot_i) pairs, then connectors
    let mut leaves_per_side = Vec::new();
    for _ in 0..beads {
        leaves_per_side.push(4);
        leaves_per_side.push(4);
    }
    for j in 0..beads {
        leaves_per_side.push(if j < 2 { 4 } else { 3 });
    }
    (beads, leaves_per_side)
}

/// The network underlying the pair: the necklace generator with leaf blocks
/// attached to every side.
pub fn tight_family_network(k: usize) -> Result<UnrootedNetwork, TightError> {
    if k < 4 {
        return Err(TightError::KTooSmall(k));
    }
    let generator = necklace_generator(k);
    let (beads, leaves_per_side) = side_layout(k);
    let mut labels: Vec<Vec<Taxon>> = Vec::new();
    for (s, &count) in leaves_per_side.iter().enumerate() {
        let role = if s < 2 * beads {
            if s % 2 == 0 { "t" } else { "b" }
        } else {
            "c"
        };
        let index = if s < 2 * beads { s / 2 } else { s - 2 * beads };
        labels.push(
            (0..count)
                .map(|p| Taxon::new(format!("{role}{index:02}x{p}")))
                .collect(),
        );
    }
    let net = generator
        .attach(&labels)
        .expect("necklace attachment is binary");
    Ok(net)
}

/// Index of the break edge on a 4-leaf side: the attachment path is
/// `u, m1, m2, m3, m4, v` and the break separates the 3-chain block from
/// the single extra leaf, between `m3` and `m4`.
fn break_edges(net: &UnrootedNetwork, k: usize, first_tree: bool) -> Vec<usize> {
    let (beads, leaves_per_side) = side_layout(k);
    // reconstruct the edge layout produced by Generator::attach: per side,
    // `count` (mid, leaf) pairs then the closing edge
    let mut breaks = Vec::new();
    let mut edge_idx = 0;
    for (s, &count) in leaves_per_side.iter().enumerate() {
        let side_edges: Vec<usize> = {
            // edges alternate (prev, mid), (mid, leaf) per attachment
            let mut path_edges = Vec::new();
            for p in 0..count {
                path_edges.push(edge_idx + 2 * p); // (prev, mid)
            }
            path_edges.push(edge_idx + 2 * count); // closing (prev, v)
            path_edges
        };
        let is_top = s < 2 * beads && s % 2 == 0;
        let is_bot = s < 2 * beads && s % 2 == 1;
        let connector = if s >= 2 * beads { Some(s - 2 * beads) } else { None };
        let broken = if first_tree {
            is_top || connector == Some(0)
        } else {
            is_bot || connector == Some(1)
        };
        if broken {
            assert_eq!(count, 4, "only 4-leaf sides carry breakpoints");
            // break between the third and fourth attachment vertices
            breaks.push(side_edges[3]);
        }
        edge_idx += 2 * count + 1;
    }
    let _ = net;
    breaks
}

/// The pair of trees displayed by the tight-family network along its two
/// spanning structures.
pub fn tight_family(k: usize) -> Result<(UnrootedTree, UnrootedTree), TightError> {
    let net = tight_family_network(k)?;
    let t1 = net
        .tree_after_deleting(&break_edges(&net, k, true).into_iter().collect())
        .expect("break edges of the first spanning structure leave a tree");
    let t2 = net
        .tree_after_deleting(&break_edges(&net, k, false).into_iter().collect())
        .expect("break edges of the second spanning structure leave a tree");
    Ok((t1, t2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::extract_generator;

    #[test]
    fn rejects_small_k() {
        assert_eq!(tight_family(3).unwrap_err(), TightError::KTooSmall(3));
    }

    #[test]
    fn taxon_count_is_eleven_k_minus_nine() {
        for k in [4, 5, 6] {
            let (t1, t2) = tight_family(k).unwrap();
            assert_eq!(t1.leaf_count(), 11 * k - 9);
            assert_eq!(t1.taxa(), t2.taxa());
            assert_eq!(t1.validate(), Ok(()));
            assert_eq!(t2.validate(), Ok(()));
            assert!(!t1.isomorphic(&t2));
        }
    }

    #[test]
    fn network_has_reticulation_k_and_necklace_generator() {
        let k = 4;
        let net = tight_family_network(k).unwrap();
        assert_eq!(net.reticulation_number().unwrap(), k);
        let g = extract_generator(&net).unwrap();
        assert_eq!(g.side_count(), 3 * (k - 1));
        assert!(g.isomorphic(&crate::network::necklace_generator(k)));
    }

    #[test]
    fn network_displays_both_trees() {
        let k = 4;
        let net = tight_family_network(k).unwrap();
        let (t1, t2) = tight_family(k).unwrap();
        assert!(net.displays(&t1).unwrap());
        assert!(net.displays(&t2).unwrap());
    }
}
