//! Agreement forests: validity checking, the brute-force maximum agreement
//! forest oracle over all set partitions, exhaustive enumeration of maximum
//! forests, and chain status.
//!
//! An agreement forest for a tree pair is a partition of the taxon set such
//! that (1) both trees induce the same restriction on every component and
//! (2) the components' embeddings are pairwise vertex-disjoint in each tree.
//! The TBR distance is the minimum component count minus one.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::chain::Chain;
use crate::oracle_max_n;
use crate::taxa::{Taxon, TaxonSet};
use crate::tree::{TreeError, UnrootedTree, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("components do not partition the taxon set")]
    NotAPartition,
    #[error("instance too large for the oracle: {n} taxa (guard {max})")]
    TooLarge { n: usize, max: usize },
    #[error("ineligible chain: {0}")]
    IneligibleChain(String),
    #[error("input forest is not a maximum agreement forest")]
    NotMaximum,
    #[error("sequence is not a common chain of the pair")]
    NotACommonChain,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// A partition of the taxon set, components sorted by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AgreementForest {
    components: Vec<TaxonSet>,
}

impl AgreementForest {
    pub fn new(mut components: Vec<TaxonSet>) -> Self {
        components.retain(|c| !c.is_empty());
        components.sort_by(|a, b| a.smallest().cmp(&b.smallest()));
        AgreementForest { components }
    }

    pub fn components(&self) -> &[TaxonSet] {
        &self.components
    }

    pub fn size(&self) -> usize {
        self.components.len()
    }

    pub fn taxa(&self) -> TaxonSet {
        self.components
            .iter()
            .fold(TaxonSet::new(), |acc, c| acc.union(c))
    }

    /// The component containing `taxon`, if any.
    pub fn component_of(&self, taxon: &Taxon) -> Option<&TaxonSet> {
        self.components.iter().find(|c| c.contains(taxon))
    }

    /// True if the components partition `taxa`.
    pub fn is_partition_of(&self, taxa: &TaxonSet) -> bool {
        let total: usize = self.components.iter().map(|c| c.len()).sum();
        total == taxa.len() && self.taxa() == *taxa
    }
}

impl std::fmt::Display for AgreementForest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join("|"))
    }
}

/// Why a partition fails to be an agreement forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AfViolation {
    /// Condition 1: the two restrictions to this component differ.
    RestrictionMismatch { component: TaxonSet },
    /// Condition 2: two embeddings share a vertex in one of the trees.
    EmbeddingOverlap {
        first: TaxonSet,
        second: TaxonSet,
        in_second_tree: bool,
    },
}

impl std::fmt::Display for AfViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AfViolation::RestrictionMismatch { component } => {
                write!(f, "restrictions disagree on component {{{component}}}")
            }
            AfViolation::EmbeddingOverlap { first, second, in_second_tree } => write!(
                f,
                "embeddings of {{{first}}} and {{{second}}} overlap in the {} tree",
                if *in_second_tree { "second" } else { "first" }
            ),
        }
    }
}

/// Full check of both agreement-forest conditions; reports the first
/// violation found (condition 1 before condition 2, components in canonical
/// order).
pub fn agreement_violation(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
    forest: &AgreementForest,
) -> Result<Option<AfViolation>, ForestError> {
    let taxa = t1.taxa();
    if taxa != t2.taxa() {
        return Err(TreeError::TaxonSetMismatch.into());
    }
    if !forest.is_partition_of(&taxa) {
        return Err(ForestError::NotAPartition);
    }
    for c in forest.components() {
        let r1 = t1.restrict(c)?;
        let r2 = t2.restrict(c)?;
        if !r1.isomorphic(&r2) {
            return Ok(Some(AfViolation::RestrictionMismatch { component: c.clone() }));
        }
    }
    for (tree, in_second) in [(t1, false), (t2, true)] {
        let embeddings: Vec<BTreeSet<VertexId>> = forest
            .components()
            .iter()
            .map(|c| tree.embedding_vertices(c))
            .collect::<Result<_, _>>()?;
        for i in 0..embeddings.len() {
            for j in (i + 1)..embeddings.len() {
                if !embeddings[i].is_disjoint(&embeddings[j]) {
                    return Ok(Some(AfViolation::EmbeddingOverlap {
                        first: forest.components()[i].clone(),
                        second: forest.components()[j].clone(),
                        in_second_tree: in_second,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Convenience wrapper over [`agreement_violation`].
pub fn is_agreement_forest(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
    forest: &AgreementForest,
) -> Result<bool, ForestError> {
    Ok(agreement_violation(t1, t2, forest)?.is_none())
}

/// Incremental search over set partitions in restricted-growth order.
///
/// Both agreement-forest conditions are checked as elements are assigned:
/// quartet agreement inside a block (condition 1) and embedding
/// disjointness via bitsets (condition 2). Violations of either are
/// monotone under block growth, so pruned branches are genuinely dead.
struct PartitionSearch<'a> {
    order: Vec<Taxon>,
    leaf: [Vec<VertexId>; 2],
    trees: [&'a UnrootedTree; 2],
    /// agree flag per sorted 4-subset: both trees induce the same topology
    agree: Vec<bool>,
    n: usize,
}

#[derive(Clone)]
struct Block {
    members: Vec<usize>,
    emb: [u128; 2],
}

impl<'a> PartitionSearch<'a> {
    fn new(t1: &'a UnrootedTree, t2: &'a UnrootedTree) -> Result<Self, ForestError> {
        let taxa = t1.taxa();
        if taxa != t2.taxa() {
            return Err(TreeError::TaxonSetMismatch.into());
        }
        let order: Vec<Taxon> = taxa.iter().cloned().collect();
        let n = order.len();
        let leaf1: Vec<VertexId> = order.iter().map(|t| t1.leaf_vertex(t).unwrap()).collect();
        let leaf2: Vec<VertexId> = order.iter().map(|t| t2.leaf_vertex(t).unwrap()).collect();
        let mut agree = vec![true; n * n * n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    for l in (k + 1)..n {
                        let four: TaxonSet = [&order[i], &order[j], &order[k], &order[l]]
                            .into_iter()
                            .cloned()
                            .collect();
                        let q1 = t1.quartet_topology(&four)?;
                        let q2 = t2.quartet_topology(&four)?;
                        agree[((i * n + j) * n + k) * n + l] = q1 == q2;
                    }
                }
            }
        }
        Ok(PartitionSearch { order, leaf: [leaf1, leaf2], trees: [t1, t2], agree, n })
    }

    fn quartets_agree(&self, block: &[usize], x: usize) -> bool {
        let m = block.len();
        for a in 0..m {
            for b in (a + 1)..m {
                for c in (b + 1)..m {
                    let mut q = [block[a], block[b], block[c], x];
                    q.sort_unstable();
                    let idx = ((q[0] * self.n + q[1]) * self.n + q[2]) * self.n + q[3];
                    if !self.agree[idx] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Extends the block embedding by the path from `x`'s leaf; `None` when
    /// the new path crosses another block's embedding.
    fn grown_embedding(
        &self,
        tree_idx: usize,
        block: &Block,
        x: usize,
        occupied: u128,
    ) -> Option<u128> {
        let tree = self.trees[tree_idx];
        let start = self.leaf[tree_idx][x];
        let emb = block.emb[tree_idx];
        let mut prev = vec![usize::MAX; tree.vertex_count()];
        let mut queue = std::collections::VecDeque::new();
        prev[start] = start;
        queue.push_back(start);
        let mut hit = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &v in tree.neighbors(u) {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    if emb & (1 << v) != 0 {
                        hit = Some(v);
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        let hit = hit.expect("tree is connected");
        let mut added: u128 = 0;
        let mut cur = prev[hit];
        loop {
            added |= 1 << cur;
            if cur == start {
                break;
            }
            cur = prev[cur];
        }
        if added & occupied != 0 {
            return None;
        }
        Some(emb | added)
    }

    fn try_join(&self, block: &Block, x: usize, occupied: &[u128; 2]) -> Option<[u128; 2]> {
        if !self.quartets_agree(&block.members, x) {
            return None;
        }
        let e1 = self.grown_embedding(0, block, x, occupied[0])?;
        let e2 = self.grown_embedding(1, block, x, occupied[1])?;
        Some([e1, e2])
    }

    fn singleton_block(&self, x: usize) -> Block {
        Block {
            members: vec![x],
            emb: [1 << self.leaf[0][x], 1 << self.leaf[1][x]],
        }
    }

    fn forest_from(&self, blocks: &[Block]) -> AgreementForest {
        AgreementForest::new(
            blocks
                .iter()
                .map(|b| b.members.iter().map(|&i| self.order[i].clone()).collect())
                .collect(),
        )
    }

    /// Depth-first over restricted-growth assignments. Branches using more
    /// than `limit` blocks are pruned; every completed partition within the
    /// limit is passed to `found`, which returns the (possibly tightened)
    /// limit for the rest of the walk.
    fn walk(&self, limit: usize, found: &mut dyn FnMut(&[Block]) -> usize) {
        let mut blocks = Vec::new();
        let mut occupied = [0u128; 2];
        let mut limit = limit;
        self.walk_rec(0, &mut blocks, &mut occupied, &mut limit, found);
    }

    fn walk_rec(
        &self,
        next: usize,
        blocks: &mut Vec<Block>,
        occupied: &mut [u128; 2],
        limit: &mut usize,
        found: &mut dyn FnMut(&[Block]) -> usize,
    ) {
        if blocks.len() > *limit {
            return;
        }
        if next == self.n {
            if !blocks.is_empty() {
                *limit = found(blocks);
            }
            return;
        }
        for i in 0..blocks.len() {
            if let Some(new_emb) = self.try_join(&blocks[i], next, occupied) {
                let old_emb = blocks[i].emb;
                let delta = [new_emb[0] & !old_emb[0], new_emb[1] & !old_emb[1]];
                blocks[i].members.push(next);
                blocks[i].emb = new_emb;
                occupied[0] |= delta[0];
                occupied[1] |= delta[1];
                self.walk_rec(next + 1, blocks, occupied, limit, found);
                occupied[0] &= !delta[0];
                occupied[1] &= !delta[1];
                blocks[i].emb = old_emb;
                blocks[i].members.pop();
            }
        }
        let b = self.singleton_block(next);
        let leaf_bits = b.emb;
        occupied[0] |= leaf_bits[0];
        occupied[1] |= leaf_bits[1];
        blocks.push(b);
        self.walk_rec(next + 1, blocks, occupied, limit, found);
        blocks.pop();
        occupied[0] &= !leaf_bits[0];
        occupied[1] &= !leaf_bits[1];
    }
}

/// Exhaustive minimum: smallest agreement-forest size over all partitions,
/// with a witness. Guarded by the oracle size limit (default 9 taxa,
/// override with `TBRKERNEL_MAX_N`).
pub fn maf_bruteforce(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<(usize, AgreementForest), ForestError> {
    let n = t1.taxa().len();
    let max = oracle_max_n();
    if n == 0 || n > max {
        return Err(ForestError::TooLarge { n, max });
    }
    if t1.vertex_count() > 128 || t2.vertex_count() > 128 {
        return Err(ForestError::TooLarge { n, max });
    }
    let search = PartitionSearch::new(t1, t2)?;
    if n == 1 {
        return Ok((1, search.forest_from(&[search.singleton_block(0)])));
    }
    // all singletons is always an agreement forest
    let mut best = n;
    let mut witness: AgreementForest = AgreementForest::new(
        search.order.iter().map(|t| [t.clone()].into_iter().collect()).collect(),
    );
    search.walk(best - 1, &mut |blocks| {
        if blocks.len() < best {
            best = blocks.len();
            witness = search.forest_from(blocks);
        }
        best - 1
    });
    Ok((best, witness))
}

/// Every minimum-size agreement forest, each exactly once (restricted-growth
/// enumeration is canonical). Guarded at one taxon below the brute-force
/// limit.
pub fn enumerate_mafs(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<impl Iterator<Item = AgreementForest>, ForestError> {
    let n = t1.taxa().len();
    let max = oracle_max_n().saturating_sub(1);
    if n == 0 || n > max {
        return Err(ForestError::TooLarge { n, max });
    }
    let (min_size, _) = maf_bruteforce(t1, t2)?;
    let search = PartitionSearch::new(t1, t2)?;
    let mut out: Vec<AgreementForest> = Vec::new();
    if n == 1 {
        out.push(search.forest_from(&[search.singleton_block(0)]));
    } else {
        search.walk(min_size, &mut |blocks| {
            if blocks.len() == min_size {
                out.push(search.forest_from(blocks));
            }
            min_size
        });
    }
    Ok(out.into_iter())
}

/// Status of a chain inside a forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainStatus {
    /// One component contains every chain taxon.
    Preserved,
    /// Spread over at least two components, not all singletons.
    Split,
    /// Every chain taxon is a singleton component.
    Atomized,
}

/// Preserved if one component contains all chain taxa; atomized if every
/// chain taxon is a singleton; otherwise split.
pub fn chain_status(forest: &AgreementForest, chain: &Chain) -> ChainStatus {
    chain_status_of_taxa(forest, &chain.taxa())
}

pub(crate) fn chain_status_of_taxa(forest: &AgreementForest, taxa: &TaxonSet) -> ChainStatus {
    if forest.components().iter().any(|c| taxa.is_subset(c)) {
        return ChainStatus::Preserved;
    }
    let all_singletons = taxa.iter().all(|t| {
        forest
            .component_of(t)
            .map(|c| c.len() == 1)
            .unwrap_or(false)
    });
    if all_singletons {
        ChainStatus::Atomized
    } else {
        ChainStatus::Split
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::find_maximal_common_chains;
    use crate::newick::parse;

    fn taxa(list: &[&str]) -> TaxonSet {
        list.iter().copied().collect()
    }

    fn forest(parts: &[&[&str]]) -> AgreementForest {
        AgreementForest::new(parts.iter().map(|p| p.iter().copied().collect()).collect())
    }

    #[test]
    fn whole_set_is_forest_for_identical_trees() {
        let t = parse("((a,b),(c,d));").unwrap();
        let f = forest(&[&["a", "b", "c", "d"]]);
        assert!(is_agreement_forest(&t, &t, &f).unwrap());
    }

    #[test]
    fn all_singletons_always_agree() {
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,c),(b,d));").unwrap();
        let f = forest(&[&["a"], &["b"], &["c"], &["d"]]);
        assert!(is_agreement_forest(&t1, &t2, &f).unwrap());
    }

    #[test]
    fn cherry_pair_fails_condition_two() {
        // restrictions agree (two-leaf trees) but the embeddings cross in
        // the second tree
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,c),(b,d));").unwrap();
        let f = forest(&[&["a", "b"], &["c", "d"]]);
        let v = agreement_violation(&t1, &t2, &f).unwrap();
        match v {
            Some(AfViolation::EmbeddingOverlap { in_second_tree, .. }) => {
                assert!(in_second_tree)
            }
            other => panic!("expected an embedding overlap, got {other:?}"),
        }
    }

    #[test]
    fn not_a_partition_is_an_error() {
        let t = parse("((a,b),(c,d));").unwrap();
        let f = forest(&[&["a", "b"], &["b", "c", "d"]]);
        assert_eq!(
            agreement_violation(&t, &t, &f).unwrap_err(),
            ForestError::NotAPartition
        );
    }

    #[test]
    fn bruteforce_identical_trees() {
        let t = parse("((a,b),(c,d));").unwrap();
        let (size, w) = maf_bruteforce(&t, &t).unwrap();
        assert_eq!(size, 1);
        assert_eq!(w.to_string(), "a,b,c,d");
    }

    #[test]
    fn bruteforce_conflicting_quartets() {
        // all 15 partitions of 4 elements: minimum agreeing size is 2
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,c),(b,d));").unwrap();
        let (size, w) = maf_bruteforce(&t1, &t2).unwrap();
        assert_eq!(size, 2);
        assert!(is_agreement_forest(&t1, &t2, &w).unwrap());
    }

    #[test]
    fn bruteforce_conflict_pair_on_five() {
        let t1 = parse("((a,b),(c,(d,e)));").unwrap();
        let t2 = parse("((e,b),(c,(d,a)));").unwrap();
        let (size, _) = maf_bruteforce(&t1, &t2).unwrap();
        assert_eq!(size, 3);
    }

    #[test]
    fn bruteforce_matches_naive_filter_on_quartets() {
        // independent oracle: test every partition explicitly through the
        // full two-condition check
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,d),(c,b));").unwrap();
        let elements = ["a", "b", "c", "d"];
        let mut naive_best = usize::MAX;
        // restricted growth strings over 4 elements
        let mut assignment = [0usize; 4];
        loop {
            let blocks = *assignment.iter().max().unwrap() + 1;
            let mut parts: Vec<Vec<&str>> = vec![Vec::new(); blocks];
            for (e, &b) in elements.iter().zip(&assignment) {
                parts[b].push(e);
            }
            let f = AgreementForest::new(
                parts.iter().map(|p| p.iter().copied().collect()).collect(),
            );
            if is_agreement_forest(&t1, &t2, &f).unwrap() {
                naive_best = naive_best.min(f.size());
            }
            // next restricted-growth string
            let mut i = 3;
            loop {
                let max_prefix = assignment[..i].iter().copied().max().unwrap_or(0);
                if assignment[i] <= max_prefix {
                    assignment[i] += 1;
                    break;
                }
                assignment[i] = 0;
                if i == 1 {
                    i = 0;
                    break;
                }
                i -= 1;
            }
            if i == 0 {
                break;
            }
        }
        let (size, _) = maf_bruteforce(&t1, &t2).unwrap();
        assert_eq!(size, naive_best);
    }

    #[test]
    fn bruteforce_guard() {
        let labels: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
        let ts: TaxonSet = labels.iter().map(|s| Taxon::new(s.clone())).collect();
        let t = crate::tree::tree_from_index(&ts, 0);
        assert!(matches!(
            maf_bruteforce(&t, &t),
            Err(ForestError::TooLarge { .. })
        ));
    }

    #[test]
    fn enumerate_identical_trees_single_maf() {
        let t = parse("((a,b),(c,d));").unwrap();
        let all: Vec<_> = enumerate_mafs(&t, &t).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].size(), 1);
    }

    #[test]
    fn enumerate_conflicting_quartets() {
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,c),(b,d));").unwrap();
        let all: Vec<_> = enumerate_mafs(&t1, &t2).unwrap().collect();
        assert!(!all.is_empty());
        for f in &all {
            assert_eq!(f.size(), 2);
            assert!(is_agreement_forest(&t1, &t2, f).unwrap());
            assert!(f.components().iter().any(|c| c.len() == 1));
        }
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let t1 = parse("((a,b),(c,(d,e)));").unwrap();
        let t2 = parse("((e,b),(c,(d,a)));").unwrap();
        let all: Vec<_> = enumerate_mafs(&t1, &t2).unwrap().collect();
        let distinct: BTreeSet<String> = all.iter().map(|f| f.to_string()).collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn chain_status_cases() {
        let t1 = parse("((a,b),(c,(d,e)));").unwrap();
        let t2 = parse("((e,b),(c,(d,a)));").unwrap();
        let chains = find_maximal_common_chains(&t1, &t2).unwrap();
        let bcd = chains
            .iter()
            .find(|c| c.taxa() == taxa(&["b", "c", "d"]))
            .unwrap();
        let whole = forest(&[&["a", "b", "c", "d", "e"]]);
        assert_eq!(chain_status(&whole, bcd), ChainStatus::Preserved);
        let singles = forest(&[&["a"], &["b"], &["c"], &["d"], &["e"]]);
        assert_eq!(chain_status(&singles, bcd), ChainStatus::Atomized);
        let split = forest(&[&["a", "b"], &["c", "d", "e"]]);
        assert_eq!(chain_status(&split, bcd), ChainStatus::Split);
    }

    #[test]
    fn forest_display_format() {
        let f = forest(&[&["d"], &["e", "a"], &["c", "b"]]);
        assert_eq!(f.to_string(), "a,e|b,c|d");
    }
}
