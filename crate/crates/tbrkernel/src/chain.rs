//! Chains: ordered leaf sequences whose parents form a path, with cherry
//! coincidences allowed only at the two ends.
//!
//! A sequence of distinct taxa `(l1, ..., ln)` with parents `(p1, ..., pn)`
//! is a chain when consecutive parents are adjacent, all parents are
//! distinct except that `p1 = p2` and/or `p(n-1) = pn` may hold, and (for
//! n = 3) the three leaves do not all share one parent. An end coincidence
//! makes the chain pendant. A chain and its whole-sequence reversal are the
//! same object; the canonical orientation puts the lexicographically
//! smallest reachable sequence first.

use crate::taxa::{Taxon, TaxonSet};
use crate::tree::{TreeError, UnrootedTree, VertexId};

/// A common chain of a tree pair: the leaf sequence plus pendancy flags per
/// host tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Chain {
    leaves: Vec<Taxon>,
    pendant_in_first: bool,
    pendant_in_second: bool,
}

impl Chain {
    /// Builds the chain object for `seq` when it is a chain of both trees.
    pub fn common(t1: &UnrootedTree, t2: &UnrootedTree, seq: &[Taxon]) -> Option<Chain> {
        let w1 = chain_walk(t1, seq)?;
        let w2 = chain_walk(t2, seq)?;
        Some(Chain {
            leaves: seq.to_vec(),
            pendant_in_first: w1.pendant,
            pendant_in_second: w2.pendant,
        })
    }

    pub fn leaves(&self) -> &[Taxon] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn taxa(&self) -> TaxonSet {
        self.leaves.iter().cloned().collect()
    }

    pub fn pendant_in_first(&self) -> bool {
        self.pendant_in_first
    }

    pub fn pendant_in_second(&self) -> bool {
        self.pendant_in_second
    }

    pub fn is_pendant(&self) -> bool {
        self.pendant_in_first || self.pendant_in_second
    }

    /// Eligible for preservation: length >= 3, or a 2-chain pendant in at
    /// least one tree.
    pub fn is_eligible(&self) -> bool {
        self.len() >= 3 || (self.len() == 2 && self.is_pendant())
    }
}

impl std::fmt::Display for Chain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<&str> = self.leaves.iter().map(|t| t.as_str()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Parent walk certificate for a chain of one tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainWalk {
    pub parents: Vec<VertexId>,
    pub pendant: bool,
}

/// Checks whether `seq` is a chain of `tree`; returns the parent walk if so.
pub fn chain_walk(tree: &UnrootedTree, seq: &[Taxon]) -> Option<ChainWalk> {
    let n = seq.len();
    if n == 0 {
        return None;
    }
    let mut parents = Vec::with_capacity(n);
    let mut distinct = std::collections::BTreeSet::new();
    for t in seq {
        if !distinct.insert(t) {
            return None;
        }
        parents.push(tree.parent_of_leaf(t)?);
    }
    if n == 1 {
        return Some(ChainWalk { parents, pendant: false });
    }
    let head_cherry = parents[0] == parents[1];
    let tail_cherry = n >= 2 && parents[n - 2] == parents[n - 1];
    for i in 0..n - 1 {
        let coincidence_ok = (i == 0 && head_cherry) || (i == n - 2 && tail_cherry);
        if parents[i] == parents[i + 1] {
            if !coincidence_ok {
                return None;
            }
        } else if !tree.neighbors(parents[i]).contains(&parents[i + 1]) {
            return None;
        }
    }
    // all parents distinct apart from the permitted end coincidences
    let mut uniq: Vec<VertexId> = parents.clone();
    uniq.sort_unstable();
    uniq.dedup();
    let allowed_dups = usize::from(head_cherry) + usize::from(n >= 3 && tail_cherry);
    if uniq.len() + allowed_dups != n {
        return None;
    }
    if n == 3 && head_cherry && tail_cherry {
        // three leaves sharing one parent are not a 3-chain
        return None;
    }
    Some(ChainWalk { parents, pendant: head_cherry || tail_cherry })
}

/// True if `seq` is a chain of both trees, as the identical sequence.
pub fn is_common_chain(t1: &UnrootedTree, t2: &UnrootedTree, seq: &[Taxon]) -> bool {
    chain_walk(t1, seq).is_some() && chain_walk(t2, seq).is_some()
}

fn reversed(seq: &[Taxon]) -> Vec<Taxon> {
    seq.iter().rev().cloned().collect()
}

/// The sequence, its reversal, and every variant with an end pair swapped.
/// Two chains denote the same object exactly when one is a variant of the
/// other that is still a chain (end swaps are only legal at cherries).
fn sequence_variants(seq: &[Taxon]) -> Vec<Vec<Taxon>> {
    let n = seq.len();
    let mut candidates = vec![seq.to_vec(), reversed(seq)];
    if n >= 2 {
        for base in [seq.to_vec(), reversed(seq)] {
            let mut head_swapped = base.clone();
            head_swapped.swap(0, 1);
            candidates.push(head_swapped);
            if n >= 3 {
                let mut tail_swapped = base.clone();
                tail_swapped.swap(n - 2, n - 1);
                candidates.push(tail_swapped);
                let mut both = base.clone();
                both.swap(0, 1);
                both.swap(n - 2, n - 1);
                candidates.push(both);
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    candidates
}

/// Canonical representative: the lexicographically smallest variant that is
/// still a common chain.
fn canonicalize(t1: &UnrootedTree, t2: &UnrootedTree, seq: &[Taxon]) -> Vec<Taxon> {
    sequence_variants(seq)
        .into_iter()
        .filter(|c| is_common_chain(t1, t2, c))
        .next()
        .expect("input sequence is itself a common chain")
}

/// All maximal common chains of length >= 2, canonically oriented and
/// sorted. A chain is maximal when no single-taxon extension (at either end)
/// is still a common chain.
pub fn find_maximal_common_chains(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Vec<Chain>, TreeError> {
    let taxa = t1.taxa();
    if taxa != t2.taxa() {
        return Err(TreeError::TaxonSetMismatch);
    }
    let all: Vec<Taxon> = taxa.iter().cloned().collect();
    let mut found: std::collections::BTreeSet<Vec<Taxon>> = Default::default();

    // Extensions from a given common chain; the parent-path structure keeps
    // the candidate count small.
    let extensions = |seq: &[Taxon]| -> Vec<Vec<Taxon>> {
        let mut out = Vec::new();
        for t in &all {
            if seq.contains(t) {
                continue;
            }
            let mut right = seq.to_vec();
            right.push(t.clone());
            if is_common_chain(t1, t2, &right) {
                out.push(right);
            }
            let mut left = vec![t.clone()];
            left.extend_from_slice(seq);
            if is_common_chain(t1, t2, &left) {
                out.push(left);
            }
        }
        out
    };

    let mut stack: Vec<Vec<Taxon>> = Vec::new();
    for a in &all {
        for b in &all {
            if a != b {
                let seq = vec![a.clone(), b.clone()];
                if is_common_chain(t1, t2, &seq) {
                    stack.push(seq);
                }
            }
        }
    }
    let mut seen: std::collections::BTreeSet<Vec<Taxon>> = Default::default();
    while let Some(seq) = stack.pop() {
        if !seen.insert(seq.clone()) {
            continue;
        }
        let exts = extensions(&seq);
        if exts.is_empty() {
            found.insert(canonicalize(t1, t2, &seq));
        } else {
            stack.extend(exts);
        }
    }

    // canonicalization can map two maximal sequences to one representative;
    // drop representatives dominated by a longer chain's taxon set
    let mut chains: Vec<Vec<Taxon>> = found.into_iter().collect();
    let sets: Vec<TaxonSet> = chains.iter().map(|c| c.iter().cloned().collect()).collect();
    let keep: Vec<bool> = sets
        .iter()
        .map(|s| !sets.iter().any(|t| s != t && s.is_subset(t)))
        .collect();
    chains = chains
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| if k { Some(c) } else { None })
        .collect();
    chains.sort();

    Ok(chains
        .into_iter()
        .map(|leaves| {
            let w1 = chain_walk(t1, &leaves).expect("common chain in first tree");
            let w2 = chain_walk(t2, &leaves).expect("common chain in second tree");
            Chain {
                leaves,
                pendant_in_first: w1.pendant,
                pendant_in_second: w2.pendant,
            }
        })
        .collect())
}

/// All common chains of exactly `len`, read off the maximal chains as
/// contiguous windows in both orientations. Used by the reduction matchers.
pub fn common_chains_of_length(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
    len: usize,
) -> Result<Vec<Vec<Taxon>>, TreeError> {
    let maximal = find_maximal_common_chains(t1, t2)?;
    let mut out: std::collections::BTreeSet<Vec<Taxon>> = Default::default();
    for chain in &maximal {
        let seq = chain.leaves();
        if seq.len() < len {
            continue;
        }
        // windows of every stored orientation variant, since a sub-chain may
        // differ from a window of the canonical sequence by an end swap
        for variant in sequence_variants(seq) {
            if !is_common_chain(t1, t2, &variant) {
                continue;
            }
            for window in variant.windows(len) {
                for cand in sequence_variants(window) {
                    if is_common_chain(t1, t2, &cand) {
                        out.insert(cand);
                    }
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}
