//! Budgeted exact maximum-agreement-forest search.
//!
//! The search deletes edges of the first tree. A cut set induces the
//! partition of the taxon set given by the leaf sets of the resulting
//! components; every agreement forest of size `s` is induced by some set of
//! `s - 1` cuts, so exploring cut sets by increasing size and returning the
//! first agreement forest found yields the exact minimum.
//!
//! Branching is conflict-driven. Whenever the induced partition is not an
//! agreement forest there is a quartet `a1,a2|b1,b2` that is split this way
//! in the first tree but not in the second (a restriction mismatch inside a
//! part, or an embedding overlap between two parts). Any refinement into an
//! agreement forest must separate `a1` from `a2` or `b1` from `b2` in the
//! first tree, so at least one edge on those two paths must be cut. The
//! candidate list is those path edges; the conflict with the fewest
//! candidates is branched on.

use std::collections::{HashMap, HashSet};

use crate::forest::{AgreementForest, ForestError};
use crate::taxa::{Taxon, TaxonSet};
use crate::tree::{TreeError, UnrootedTree, VertexId};

/// Result of a budgeted search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// The exact minimum agreement-forest size and a witness.
    Found { size: usize, witness: AgreementForest },
    /// No agreement forest within `budget` cuts: the distance exceeds it.
    BudgetExceeded,
}

impl SearchOutcome {
    pub fn found(self) -> Option<(usize, AgreementForest)> {
        match self {
            SearchOutcome::Found { size, witness } => Some((size, witness)),
            SearchOutcome::BudgetExceeded => None,
        }
    }
}

/// Exact MAF size within `budget` cuts; sound and complete: returns
/// `BudgetExceeded` iff the TBR distance exceeds `budget`.
pub fn maf_search(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
    budget: usize,
) -> Result<SearchOutcome, ForestError> {
    let taxa = t1.taxa();
    if taxa != t2.taxa() {
        return Err(ForestError::Tree(TreeError::TaxonSetMismatch));
    }
    let n = taxa.len();
    if n == 0 {
        return Err(ForestError::TooLarge { n, max: 64 });
    }
    if n > 64 || t1.vertex_count() > 128 || t2.vertex_count() > 128 {
        return Err(ForestError::TooLarge { n, max: 64 });
    }
    let ctx = SearchContext::new(t1, t2);
    let mut memo = PartCache::default();
    for level in 0..=budget {
        let mut visited: HashSet<Vec<u32>> = HashSet::new();
        if let Some(parts) = ctx.dfs(&mut Vec::new(), level, &mut memo, &mut visited) {
            let witness = AgreementForest::new(
                parts
                    .iter()
                    .map(|&mask| ctx.taxa_of_mask(mask))
                    .collect(),
            );
            let size = witness.size();
            debug_assert_eq!(size, level + 1, "first hit level equals minimum size - 1");
            return Ok(SearchOutcome::Found { size, witness });
        }
    }
    Ok(SearchOutcome::BudgetExceeded)
}

#[derive(Default)]
struct PartCache {
    /// taxon mask -> conflicting quartet (taxon indices) inside the part,
    /// or None when both restrictions agree
    restriction: HashMap<u64, Option<[usize; 4]>>,
    /// taxon mask -> embedding bitset in the second tree
    embedding2: HashMap<u64, u128>,
}

struct SearchContext<'a> {
    t1: &'a UnrootedTree,
    t2: &'a UnrootedTree,
    order: Vec<Taxon>,
    taxon_idx: HashMap<Taxon, usize>,
    /// edges of t1 in canonical (split-signature) order
    edges: Vec<(VertexId, VertexId)>,
    /// per t1-vertex: taxon index if leaf
    leaf_taxon1: Vec<Option<usize>>,
}

impl<'a> SearchContext<'a> {
    fn new(t1: &'a UnrootedTree, t2: &'a UnrootedTree) -> Self {
        let order: Vec<Taxon> = t1.taxa().iter().cloned().collect();
        let taxon_idx: HashMap<Taxon, usize> =
            order.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        // canonical edge order: by the sorted taxa of the smaller side, so
        // tie-breaking follows taxon order rather than vertex numbering
        let mut edges: Vec<((Vec<Taxon>, Vec<Taxon>), (VertexId, VertexId))> = t1
            .edges()
            .into_iter()
            .map(|(u, v)| {
                let mut side: Vec<Taxon> = t1.side_taxa(u, v).into_iter().collect();
                let mut other: Vec<Taxon> = t1.side_taxa(v, u).into_iter().collect();
                if (side.len(), &side) > (other.len(), &other) {
                    std::mem::swap(&mut side, &mut other);
                }
                ((side, other), (u, v))
            })
            .collect();
        edges.sort();
        let edges: Vec<(VertexId, VertexId)> = edges.into_iter().map(|(_, e)| e).collect();
        let leaf_taxon1: Vec<Option<usize>> = (0..t1.vertex_count())
            .map(|v| t1.label(v).map(|t| taxon_idx[t]))
            .collect();
        SearchContext { t1, t2, order, taxon_idx, edges, leaf_taxon1 }
    }

    fn taxa_of_mask(&self, mask: u64) -> TaxonSet {
        (0..self.order.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.order[i].clone())
            .collect()
    }

    /// Leaf-set masks of the components of t1 minus the cut edges.
    fn parts(&self, cuts: &[u32]) -> Vec<u64> {
        let n_v = self.t1.vertex_count();
        let cut_set: HashSet<(VertexId, VertexId)> = cuts
            .iter()
            .map(|&e| self.edges[e as usize])
            .collect();
        let mut comp = vec![usize::MAX; n_v];
        let mut masks: Vec<u64> = Vec::new();
        for start in 0..n_v {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = masks.len();
            masks.push(0);
            comp[start] = id;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                if let Some(t) = self.leaf_taxon1[u] {
                    masks[id] |= 1 << t;
                }
                for &v in self.t1.neighbors(u) {
                    let key = (u.min(v), u.max(v));
                    if comp[v] == usize::MAX && !cut_set.contains(&key) {
                        comp[v] = id;
                        stack.push(v);
                    }
                }
            }
        }
        masks.retain(|&m| m != 0);
        masks.sort_unstable();
        masks
    }

    /// Conflicting quartet inside one part: restrictions differ, so some
    /// split of the first restriction is missing from the second; two leaves
    /// per side around a shared embedding vertex witness the disagreement.
    fn restriction_conflict(&self, mask: u64) -> Option<[usize; 4]> {
        let taxa = self.taxa_of_mask(mask);
        if taxa.len() < 4 {
            return None;
        }
        let r1 = self.t1.restrict(&taxa).expect("part taxa");
        let r2 = self.t2.restrict(&taxa).expect("part taxa");
        if r1.canonical_code() == r2.canonical_code() {
            return None;
        }
        // splits of a restriction, as taxon masks of one side
        let splits = |r: &UnrootedTree| -> HashSet<u64> {
            let mut out = HashSet::new();
            for (u, v) in r.edges() {
                let side = r.side_taxa(u, v);
                let m = self.mask_of(&side);
                out.insert(m.min(mask & !m));
            }
            out
        };
        let s2 = splits(&r2);
        for (u, v) in r1.edges() {
            let side = r1.side_taxa(u, v);
            let m = self.mask_of(&side);
            let key = m.min(mask & !m);
            let a_mask = key;
            let b_mask = mask & !key;
            if a_mask.count_ones() < 2 || b_mask.count_ones() < 2 || s2.contains(&key) {
                continue;
            }
            // missing split: embeddings of the two sides intersect in t2
            let quartet = self.crossing_quartet(a_mask, b_mask);
            return Some(quartet);
        }
        unreachable!("differing restrictions must disagree on some split");
    }

    fn mask_of(&self, taxa: &TaxonSet) -> u64 {
        taxa.iter().map(|t| 1u64 << self.taxon_idx[t]).sum()
    }

    /// Embedding of the masked taxa in the second tree, as a vertex bitset.
    fn embedding2(&self, mask: u64, memo: &mut PartCache) -> u128 {
        if let Some(&e) = memo.embedding2.get(&mask) {
            return e;
        }
        let taxa = self.taxa_of_mask(mask);
        let marks = self.t2.embedding_marks(&taxa).expect("part taxa");
        let mut bits: u128 = 0;
        for (v, &m) in marks.iter().enumerate() {
            if m {
                bits |= 1 << v;
            }
        }
        memo.embedding2.insert(mask, bits);
        bits
    }

    /// Two leaves from each side whose t2-paths share a vertex. The sides
    /// are t1-separated, so the returned quartet disagrees between trees.
    fn crossing_quartet(&self, a_mask: u64, b_mask: u64) -> [usize; 4] {
        let ta = self.taxa_of_mask(a_mask);
        let tb = self.taxa_of_mask(b_mask);
        let ea = self.t2.embedding_vertices(&ta).expect("taxa");
        let eb = self.t2.embedding_vertices(&tb).expect("taxa");
        let v = *ea.intersection(&eb).next().expect("embeddings intersect");
        let pick = |taxa: &TaxonSet| -> [usize; 2] {
            // two leaves in different directions from v
            let mut found: Vec<usize> = Vec::new();
            for nbr in self.t2.neighbors(v) {
                let side = self.t2.side_taxa(v, *nbr);
                if let Some(t) = side.intersection(taxa).smallest() {
                    found.push(self.taxon_idx[t]);
                    if found.len() == 2 {
                        break;
                    }
                }
            }
            [found[0], found[1]]
        };
        let [a1, a2] = pick(&ta);
        let [b1, b2] = pick(&tb);
        [a1, a2, b1, b2]
    }

    /// First conflict of the induced partition, as branch-candidate edges
    /// (indices into the canonical edge order). `None` means the partition
    /// is an agreement forest.
    fn find_conflict(
        &self,
        parts: &[u64],
        cuts: &[u32],
        memo: &mut PartCache,
    ) -> Option<Vec<u32>> {
        let mut best: Option<Vec<u32>> = None;
        let mut conflicts: Vec<[usize; 4]> = Vec::new();
        for &mask in parts {
            let conflict = if let Some(c) = memo.restriction.get(&mask) {
                *c
            } else {
                let c = self.restriction_conflict(mask);
                memo.restriction.insert(mask, c);
                c
            };
            if let Some(q) = conflict {
                conflicts.push(q);
            }
        }
        for (i, &ma) in parts.iter().enumerate() {
            for &mb in parts.iter().skip(i + 1) {
                if ma.count_ones() == 1 && mb.count_ones() == 1 {
                    continue;
                }
                let ea = self.embedding2(ma, memo);
                let eb = self.embedding2(mb, memo);
                if ea & eb != 0 {
                    conflicts.push(self.crossing_quartet(ma, mb));
                }
            }
        }
        for quartet in conflicts {
            let cand = self.branch_candidates(quartet, cuts);
            debug_assert!(!cand.is_empty(), "conflict with no uncut path edges");
            if best.as_ref().map(|b| cand.len() < b.len()).unwrap_or(true) {
                best = Some(cand);
            }
        }
        best
    }

    /// Uncut edges on the t1-paths a1-a2 and b1-b2, in canonical order.
    fn branch_candidates(&self, quartet: [usize; 4], cuts: &[u32]) -> Vec<u32> {
        let [a1, a2, b1, b2] = quartet;
        let mut on_path: HashSet<(VertexId, VertexId)> = HashSet::new();
        for (x, y) in [(a1, a2), (b1, b2)] {
            let vx = self.t1.leaf_vertex(&self.order[x]).unwrap();
            let vy = self.t1.leaf_vertex(&self.order[y]).unwrap();
            let path = self.t1.path(vx, vy);
            for w in path.windows(2) {
                on_path.insert((w[0].min(w[1]), w[0].max(w[1])));
            }
        }
        let cut_set: HashSet<u32> = cuts.iter().copied().collect();
        (0..self.edges.len() as u32)
            .filter(|e| !cut_set.contains(e))
            .filter(|&e| {
                let (u, v) = self.edges[e as usize];
                on_path.contains(&(u.min(v), u.max(v)))
            })
            .collect()
    }

    /// Depth-limited search; returns the partition masks of the first
    /// agreement forest found within `remaining` further cuts.
    fn dfs(
        &self,
        cuts: &mut Vec<u32>,
        remaining: usize,
        memo: &mut PartCache,
        visited: &mut HashSet<Vec<u32>>,
    ) -> Option<Vec<u64>> {
        let mut key = cuts.clone();
        key.sort_unstable();
        if !visited.insert(key) {
            return None;
        }
        let parts = self.parts(cuts);
        match self.find_conflict(&parts, cuts, memo) {
            None => Some(parts),
            Some(candidates) => {
                if remaining == 0 {
                    return None;
                }
                for e in candidates {
                    cuts.push(e);
                    if let Some(found) = self.dfs(cuts, remaining - 1, memo, visited) {
                        cuts.pop();
                        return Some(found);
                    }
                    cuts.pop();
                }
                None
            }
        }
    }
}
