//! Reduction rules and the fixed-point kernelization driver.
//!
//! Two classic rules and five further ones. The subtree and chain reductions
//! preserve the TBR distance. Of the others, the (*,3,*)-, (3,1,*)- and
//! (2,1,2)-rules lower it by exactly one (their offset is added back by the
//! pipeline), while the (3,3)- and (3,2)-rules preserve it. The five later
//! rules are only applied to subtree- and chain-reduced pairs, which the
//! driver guarantees by priority and restart order.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::chain::{chain_walk, common_chains_of_length, find_maximal_common_chains};
use crate::taxa::{Taxon, TaxonSet};
use crate::tree::{find_common_pendant_subtrees, TreeError, UnrootedTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("reduction requires at least 4 taxa, got {0}")]
    DegenerateInput(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// The seven reduction rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Subtree,
    Chain,
    Star3Star,
    ThreeOneStar,
    TwoOneTwo,
    ThreeThree,
    ThreeTwo,
}

impl RuleKind {
    /// Amount the rule lowers the TBR distance: added back after solving
    /// the kernel.
    pub fn offset(self) -> usize {
        match self {
            RuleKind::Star3Star | RuleKind::ThreeOneStar | RuleKind::TwoOneTwo => 1,
            _ => 0,
        }
    }
}

impl std::fmt::Display for RuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            RuleKind::Subtree => "Subtree",
            RuleKind::Chain => "Chain",
            RuleKind::Star3Star => "Star3Star",
            RuleKind::ThreeOneStar => "ThreeOneStar",
            RuleKind::TwoOneTwo => "TwoOneTwo",
            RuleKind::ThreeThree => "ThreeThree",
            RuleKind::ThreeTwo => "ThreeTwo",
        };
        f.write_str(name)
    }
}

/// One applied rule: what matched, what was removed, and the distance
/// offset it contributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub rule: RuleKind,
    /// Matched taxa in pattern order (the chain(s) and any extra taxon).
    pub witness: Vec<Taxon>,
    /// Taxa present before and absent after the step.
    pub removed: TaxonSet,
    /// Fresh leaf introduced by a subtree step.
    pub renamed_to: Option<Taxon>,
    pub offset: usize,
}

impl std::fmt::Display for ReductionStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let witness: Vec<&str> = self.witness.iter().map(|t| t.as_str()).collect();
        write!(
            f,
            "RULE {} witness={} removed={} offset={}",
            self.rule,
            witness.join(","),
            self.removed,
            self.offset
        )
    }
}

/// Ordered record of applied rules with the accumulated distance offset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
    pub total_offset: usize,
    /// Fresh leaf -> rooted form of the pendant subtree it replaced.
    pub label_map: BTreeMap<Taxon, String>,
}

impl ReductionTrace {
    pub fn push(&mut self, step: ReductionStep) {
        self.total_offset += step.offset;
        self.steps.push(step);
    }

    pub fn rule_count(&self, rule: RuleKind) -> usize {
        self.steps.iter().filter(|s| s.rule == rule).count()
    }

    /// Line-oriented text report: one step per line.
    pub fn render(&self) -> String {
        self.steps
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn next_fresh_label(t1: &UnrootedTree) -> Taxon {
    let mut max_index = 0usize;
    for t in &t1.taxa() {
        if let Some(rest) = t.as_str().strip_prefix("_s") {
            if let Ok(i) = rest.parse::<usize>() {
                max_index = max_index.max(i);
            }
        }
    }
    Taxon::new(format!("_s{}", max_index + 1))
}

/// Replaces the first maximal common pendant subtree (canonical order) by a
/// fresh leaf in both trees. Distance unchanged.
pub fn apply_subtree_reduction(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Option<(UnrootedTree, UnrootedTree, ReductionStep)>, ReduceError> {
    let candidates = find_common_pendant_subtrees(t1, t2)?;
    let Some(subtree) = candidates.into_iter().next() else {
        return Ok(None);
    };
    let fresh = next_fresh_label(t1);
    let keep_rep = subtree.smallest().unwrap().clone();
    let mut keep: TaxonSet = t1.taxa().difference(&subtree);
    keep.insert(keep_rep.clone());
    let mut r1 = t1.restrict(&keep)?;
    let mut r2 = t2.restrict(&keep)?;
    r1.rename_leaf(&keep_rep, fresh.clone())?;
    r2.rename_leaf(&keep_rep, fresh.clone())?;
    let step = ReductionStep {
        rule: RuleKind::Subtree,
        witness: subtree.iter().cloned().collect(),
        removed: subtree,
        renamed_to: Some(fresh),
        offset: 0,
    };
    Ok(Some((r1, r2, step)))
}

/// Rooted form of the pendant subtree on taxon set `side` of `tree`.
fn pendant_code(tree: &UnrootedTree, side: &TaxonSet) -> Option<String> {
    for (u, v) in tree.edges() {
        for (from, to) in [(u, v), (v, u)] {
            if tree.side_taxa(from, to) == *side {
                return Some(tree.rooted_side_code(from, to));
            }
        }
    }
    None
}

/// Truncates the first maximal common chain of length >= 4 to its canonical
/// 3-prefix. Distance unchanged.
pub fn apply_chain_reduction(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Option<(UnrootedTree, UnrootedTree, ReductionStep)>, ReduceError> {
    let chains = find_maximal_common_chains(t1, t2)?;
    let Some(chain) = chains.into_iter().find(|c| c.len() >= 4) else {
        return Ok(None);
    };
    let removed: TaxonSet = chain.leaves()[3..].iter().cloned().collect();
    let keep = t1.taxa().difference(&removed);
    let r1 = t1.restrict(&keep)?;
    let r2 = t2.restrict(&keep)?;
    let step = ReductionStep {
        rule: RuleKind::Chain,
        witness: chain.leaves().to_vec(),
        removed,
        renamed_to: None,
        offset: 0,
    };
    Ok(Some((r1, r2, step)))
}

fn delete_taxa(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
    removed: &TaxonSet,
) -> Result<(UnrootedTree, UnrootedTree), ReduceError> {
    let keep = t1.taxa().difference(removed);
    Ok((t1.restrict(&keep)?, t2.restrict(&keep)?))
}

/// Both role assignments of the pair, first tree as the rule's `T` first.
fn roles<'a>(
    t1: &'a UnrootedTree,
    t2: &'a UnrootedTree,
) -> [(&'a UnrootedTree, &'a UnrootedTree); 2] {
    [(t1, t2), (t2, t1)]
}

/// A common 3-chain (a,b,c) with cherry {b,c} in one tree and cherry {a,b}
/// in the other: all three taxa can be deleted, lowering the distance by 1.
pub fn apply_star3star(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Option<(UnrootedTree, UnrootedTree, ReductionStep)>, ReduceError> {
    let n = t1.taxa().len();
    if n < 7 {
        // the result must keep at least 4 taxa
        return Ok(None);
    }
    for seq in common_chains_of_length(t1, t2, 3)? {
        let (a, b, c) = (&seq[0], &seq[1], &seq[2]);
        for (t, t_prime) in roles(t1, t2) {
            if t.is_cherry(b, c) && t_prime.is_cherry(a, b) {
                let removed: TaxonSet = seq.iter().cloned().collect();
                let (r1, r2) = delete_taxa(t1, t2, &removed)?;
                let step = ReductionStep {
                    rule: RuleKind::Star3Star,
                    witness: seq.clone(),
                    removed,
                    renamed_to: None,
                    offset: 1,
                };
                return Ok(Some((r1, r2, step)));
            }
        }
    }
    Ok(None)
}

/// A common 3-chain (a,b,c) with cherry {b,c} in one tree while the other
/// gives c a cherry partner x outside the chain: x alone is deleted and the
/// distance drops by 1. Afterwards {a,b,c} is a common pendant subtree.
pub fn apply_31star(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Option<(UnrootedTree, UnrootedTree, ReductionStep)>, ReduceError> {
    let n = t1.taxa().len();
    if n < 5 {
        return Ok(None);
    }
    for seq in common_chains_of_length(t1, t2, 3)? {
        let (a, b, c) = (&seq[0], &seq[1], &seq[2]);
        for (t, t_prime) in roles(t1, t2) {
            if !t_prime.is_cherry(b, c) {
                continue;
            }
            // cherry partner of c in t, if any
            let Some(p) = t.parent_of_leaf(c) else { continue };
            let partner = t
                .neighbors(p)
                .iter()
                .filter_map(|&v| t.label(v))
                .find(|x| *x != c);
            let Some(x) = partner else { continue };
            if seq.contains(x) {
                continue;
            }
            let removed: TaxonSet = [x.clone()].into_iter().collect();
            let (r1, r2) = delete_taxa(t1, t2, &removed)?;
            let mut witness = seq.clone();
            witness.push(x.clone());
            let step = ReductionStep {
                rule: RuleKind::ThreeOneStar,
                witness,
                removed,
                renamed_to: None,
                offset: 1,
            };
            let _ = a;
            return Ok(Some((r1, r2, step)));
        }
    }
    Ok(None)
}

/// Two common 2-chains (a,b), (c,d) and a taxon x with cherries {b,x},{c,d}
/// in one tree and {a,b},{d,x} in the other: x is deleted, distance drops
/// by 1. Afterwards {a,b} and {c,d} are common pendant subtrees.
pub fn apply_212(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Option<(UnrootedTree, UnrootedTree, ReductionStep)>, ReduceError> {
    let n = t1.taxa().len();
    if n < 5 {
        return Ok(None);
    }
    let twos = common_chains_of_length(t1, t2, 2)?;
    for c1 in &twos {
        for c2 in &twos {
            let (a, b) = (&c1[0], &c1[1]);
            let (c, d) = (&c2[0], &c2[1]);
            let distinct: TaxonSet = [a, b, c, d].into_iter().cloned().collect();
            if distinct.len() != 4 {
                continue;
            }
            for (t, t_prime) in roles(t1, t2) {
                if !(t.is_cherry(c, d) && t_prime.is_cherry(a, b)) {
                    continue;
                }
                // x must be b's cherry partner in t and d's in t_prime
                let partner = |tree: &UnrootedTree, leaf: &Taxon| -> Option<Taxon> {
                    let p = tree.parent_of_leaf(leaf)?;
                    tree.neighbors(p)
                        .iter()
                        .filter_map(|&v| tree.label(v))
                        .find(|x| **x != *leaf)
                        .cloned()
                };
                let (Some(x1), Some(x2)) = (partner(t, b), partner(t_prime, d)) else {
                    continue;
                };
                if x1 != x2 || distinct.contains(&x1) {
                    continue;
                }
                let removed: TaxonSet = [x1.clone()].into_iter().collect();
                let (r1, r2) = delete_taxa(t1, t2, &removed)?;
                let witness = vec![a.clone(), b.clone(), c.clone(), d.clone(), x1];
                let step = ReductionStep {
                    rule: RuleKind::TwoOneTwo,
                    witness,
                    removed,
                    renamed_to: None,
                    offset: 1,
                };
                return Ok(Some((r1, r2, step)));
            }
        }
    }
    Ok(None)
}

/// Two common 3-chains (a,b,c), (x,y,z) with cherries {b,c},{x,y} in one
/// tree while the other concatenates them into a 6-chain: x and y are
/// deleted, distance unchanged.
pub fn apply_33(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Option<(UnrootedTree, UnrootedTree, ReductionStep)>, ReduceError> {
    let threes = common_chains_of_length(t1, t2, 3)?;
    for c1 in &threes {
        for c2 in &threes {
            if c1
                .iter()
                .any(|t| c2.contains(t))
            {
                continue;
            }
            let (b, c) = (&c1[1], &c1[2]);
            let (x, y) = (&c2[0], &c2[1]);
            for (t, t_prime) in roles(t1, t2) {
                if !(t.is_cherry(b, c) && t.is_cherry(x, y)) {
                    continue;
                }
                let mut six = c1.clone();
                six.extend(c2.iter().cloned());
                if chain_walk(t_prime, &six).is_none() {
                    continue;
                }
                let removed: TaxonSet = [x.clone(), y.clone()].into_iter().collect();
                let (r1, r2) = delete_taxa(t1, t2, &removed)?;
                let step = ReductionStep {
                    rule: RuleKind::ThreeThree,
                    witness: six,
                    removed,
                    renamed_to: None,
                    offset: 0,
                };
                return Ok(Some((r1, r2, step)));
            }
        }
    }
    Ok(None)
}

/// A common 3-chain (a,b,c) and 2-chain (y,z) with cherries {b,c},{y,z} in
/// one tree while the other concatenates them into a 5-chain: y is deleted,
/// distance unchanged.
pub fn apply_32(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Option<(UnrootedTree, UnrootedTree, ReductionStep)>, ReduceError> {
    let threes = common_chains_of_length(t1, t2, 3)?;
    let twos = common_chains_of_length(t1, t2, 2)?;
    for c1 in &threes {
        for c2 in &twos {
            if c1.iter().any(|t| c2.contains(t)) {
                continue;
            }
            let (b, c) = (&c1[1], &c1[2]);
            let (y, z) = (&c2[0], &c2[1]);
            for (t, t_prime) in roles(t1, t2) {
                if !(t.is_cherry(b, c) && t.is_cherry(y, z)) {
                    continue;
                }
                let mut five = c1.clone();
                five.extend(c2.iter().cloned());
                if chain_walk(t_prime, &five).is_none() {
                    continue;
                }
                let removed: TaxonSet = [y.clone()].into_iter().collect();
                let (r1, r2) = delete_taxa(t1, t2, &removed)?;
                let step = ReductionStep {
                    rule: RuleKind::ThreeTwo,
                    witness: five,
                    removed,
                    renamed_to: None,
                    offset: 0,
                };
                return Ok(Some((r1, r2, step)));
            }
        }
    }
    Ok(None)
}

/// Applies rules to a fixed point with priority Subtree > Chain > (*,3,*) >
/// (3,1,*) > (2,1,2) > (3,3) > (3,2), restarting from the top after every
/// application. The output pair admits no rule; the original distance is
/// the reduced distance plus the trace's total offset.
pub fn exhaustively_reduce(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<(UnrootedTree, UnrootedTree, ReductionTrace), ReduceError> {
    let taxa = t1.taxa();
    if taxa != t2.taxa() {
        return Err(TreeError::TaxonSetMismatch.into());
    }
    if taxa.len() < 4 {
        return Err(ReduceError::DegenerateInput(taxa.len()));
    }
    let mut cur1 = t1.clone();
    let mut cur2 = t2.clone();
    let mut trace = ReductionTrace::default();
    loop {
        let before = cur1.taxa().len();
        let matched = apply_next(&cur1, &cur2)?;
        let Some((r1, r2, step)) = matched else { break };
        assert!(r1.taxa().len() < before, "every step removes taxa");
        if step.rule == RuleKind::Subtree {
            let code = pendant_code(&cur1, &step.removed).expect("matched pendant subtree");
            trace
                .label_map
                .insert(step.renamed_to.clone().unwrap(), code);
        }
        trace.push(step);
        cur1 = r1;
        cur2 = r2;
    }
    Ok((cur1, cur2, trace))
}

fn apply_next(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Option<(UnrootedTree, UnrootedTree, ReductionStep)>, ReduceError> {
    if let Some(hit) = apply_subtree_reduction(t1, t2)? {
        return Ok(Some(hit));
    }
    if let Some(hit) = apply_chain_reduction(t1, t2)? {
        return Ok(Some(hit));
    }
    if let Some(hit) = apply_star3star(t1, t2)? {
        return Ok(Some(hit));
    }
    if let Some(hit) = apply_31star(t1, t2)? {
        return Ok(Some(hit));
    }
    if let Some(hit) = apply_212(t1, t2)? {
        return Ok(Some(hit));
    }
    if let Some(hit) = apply_33(t1, t2)? {
        return Ok(Some(hit));
    }
    if let Some(hit) = apply_32(t1, t2)? {
        return Ok(Some(hit));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::maf_bruteforce;
    use crate::newick::{parse, serialize};

    fn taxa(list: &[&str]) -> TaxonSet {
        list.iter().copied().collect()
    }

    fn distance(t1: &UnrootedTree, t2: &UnrootedTree) -> usize {
        maf_bruteforce(t1, t2).unwrap().0 - 1
    }

    #[test]
    fn subtree_reduction_on_identical_quartet() {
        let t = parse("((a,b),(c,d));").unwrap();
        let (r1, r2, step) = apply_subtree_reduction(&t, &t).unwrap().unwrap();
        assert_eq!(step.removed, taxa(&["a", "b"]));
        assert_eq!(step.renamed_to, Some("_s1".into()));
        assert_eq!(r1.leaf_count(), 3);
        assert!(r1.isomorphic(&r2));
    }

    #[test]
    fn subtree_reduction_no_match_on_conflicting_quartets() {
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,c),(b,d));").unwrap();
        assert!(apply_subtree_reduction(&t1, &t2).unwrap().is_none());
    }

    #[test]
    fn subtree_reduction_replaces_common_triple() {
        let t1 = parse("((a,(b,c)),(d,(e,f)));").unwrap();
        let t2 = parse("(((a,b),c),(d,(e,f)));").unwrap();
        let (r1, r2, step) = apply_subtree_reduction(&t1, &t2).unwrap().unwrap();
        assert_eq!(step.removed, taxa(&["d", "e", "f"]));
        assert_eq!(r1.taxa(), r2.taxa());
        assert!(r1.taxa().contains(&"_s1".into()));
        // distance is unchanged by the replacement
        assert_eq!(distance(&t1, &t2), distance(&r1, &r2));
    }

    #[test]
    fn chain_reduction_truncates_identical_caterpillars() {
        let t = parse("((a,b),(c,(d,(e,f))));").unwrap();
        let (r1, _r2, step) = apply_chain_reduction(&t, &t).unwrap().unwrap();
        assert_eq!(step.rule, RuleKind::Chain);
        assert_eq!(r1.leaf_count(), 3);
    }

    #[test]
    fn chain_reduction_no_match_on_three_chain() {
        let t1 = parse("((a,b),(c,(d,e)));").unwrap();
        let t2 = parse("((e,b),(c,(d,a)));").unwrap();
        assert!(apply_chain_reduction(&t1, &t2).unwrap().is_none());
    }

    #[test]
    fn chain_reduction_preserves_distance_on_five_chain() {
        // both trees carry the 5-chain (p,q,r,s,t); elsewhere they differ
        let t1 = parse("((x,(y,z)),(p,(q,(r,(s,t)))));").unwrap();
        let t2 = parse("(((x,y),z),(p,(q,(r,(s,t)))));").unwrap();
        let before = distance(&t1, &t2);
        let (r1, r2, step) = apply_chain_reduction(&t1, &t2).unwrap().unwrap();
        assert_eq!(step.removed.len(), 2);
        assert_eq!(distance(&r1, &r2), before);
    }

    #[test]
    fn star3star_drops_distance_by_one() {
        let t1 = parse("((a,(b,c)),((d,e),(f,g)));").unwrap();
        let t2 = parse("(((a,b),c),((d,f),(e,g)));").unwrap();
        let before = distance(&t1, &t2);
        assert_eq!(before, 2);
        let (r1, r2, step) = apply_star3star(&t1, &t2).unwrap().unwrap();
        assert_eq!(step.removed, taxa(&["a", "b", "c"]));
        assert_eq!(distance(&r1, &r2), before - 1);
    }

    #[test]
    fn star3star_no_match_on_conflict_pair_or_identical() {
        let t1 = parse("((a,b),(c,(d,e)));").unwrap();
        let t2 = parse("((e,b),(c,(d,a)));").unwrap();
        assert!(apply_star3star(&t1, &t2).unwrap().is_none());
        let t = parse("((a,(b,c)),((d,e),(f,g)));").unwrap();
        assert!(apply_star3star(&t, &t).unwrap().is_none());
    }

    #[test]
    fn three_one_star_deletes_x() {
        let t1 = parse("((a,(b,(c,x))),(r,(p,q)));").unwrap();
        let t2 = parse("((a,(b,c)),(x,(p,(q,r))));").unwrap();
        let before = distance(&t1, &t2);
        let (r1, r2, step) = apply_31star(&t1, &t2).unwrap().unwrap();
        assert_eq!(step.removed, taxa(&["x"]));
        assert_eq!(distance(&r1, &r2), before - 1);
        // the chain becomes a common pendant subtree
        let pend = find_common_pendant_subtrees(&r1, &r2).unwrap();
        assert!(pend.contains(&taxa(&["a", "b", "c"])));
    }

    #[test]
    fn three_one_star_requires_outside_partner() {
        // cherry partner inside the chain: no match
        let t1 = parse("((a,(b,c)),(r,(p,q)));").unwrap();
        let t2 = parse("((a,(b,c)),(r,(p,q)));").unwrap();
        assert!(apply_31star(&t1, &t2).unwrap().is_none());
    }

    #[test]
    fn two_one_two_deletes_x() {
        let t1 = parse("(((a,(b,x)),(p,q)),((c,d),(r,s)));").unwrap();
        let t2 = parse("(((a,b),(p,r)),((c,(d,x)),(q,s)));").unwrap();
        let before = distance(&t1, &t2);
        let (r1, r2, step) = apply_212(&t1, &t2).unwrap().unwrap();
        assert_eq!(step.rule, RuleKind::TwoOneTwo);
        assert_eq!(step.removed, taxa(&["x"]));
        assert_eq!(distance(&r1, &r2), before - 1);
        let pend = find_common_pendant_subtrees(&r1, &r2).unwrap();
        assert!(pend.contains(&taxa(&["a", "b"])));
        assert!(pend.contains(&taxa(&["c", "d"])));
    }

    #[test]
    fn two_one_two_needs_all_four_cherries() {
        // {d,x} cherry absent in the second tree
        let t1 = parse("(((a,(b,x)),(p,q)),((c,d),(r,s)));").unwrap();
        let t2 = parse("(((a,b),(p,r)),((c,d),(x,(q,s))));").unwrap();
        assert!(apply_212(&t1, &t2).unwrap().is_none());
    }

    #[test]
    fn three_three_deletes_two_and_preserves_distance() {
        let t1 = parse("((a,(b,c)),(((x,y),z),(p,(q,r))));").unwrap();
        let t2 = parse("(p,(q,(r,(a,(b,(c,(x,(y,z))))))));").unwrap();
        let before = distance(&t1, &t2);
        let (r1, r2, step) = apply_33(&t1, &t2).unwrap().unwrap();
        assert_eq!(step.rule, RuleKind::ThreeThree);
        assert_eq!(step.removed, taxa(&["x", "y"]));
        assert_eq!(distance(&r1, &r2), before);
    }

    #[test]
    fn three_three_needs_the_cherry() {
        // no cherry {x,y} in the first tree
        let t1 = parse("((a,(b,c)),((x,(y,z)),(p,(q,r))));").unwrap();
        let t2 = parse("(p,(q,(r,(a,(b,(c,(x,(y,z))))))));").unwrap();
        assert!(apply_33(&t1, &t2).unwrap().is_none());
    }

    #[test]
    fn three_two_deletes_one_and_preserves_distance() {
        let t1 = parse("((a,(b,c)),((y,z),(p,(q,r))));").unwrap();
        let t2 = parse("(p,(q,(r,(a,(b,(c,(y,z)))))));").unwrap();
        let before = distance(&t1, &t2);
        let (r1, r2, step) = apply_32(&t1, &t2).unwrap().unwrap();
        assert_eq!(step.rule, RuleKind::ThreeTwo);
        assert_eq!(step.removed, taxa(&["y"]));
        assert_eq!(distance(&r1, &r2), before);
    }

    #[test]
    fn driver_reduces_identical_trees_to_triple() {
        let t = parse("(((a,b),c),((d,e),f));").unwrap();
        let (r1, r2, trace) = exhaustively_reduce(&t, &t).unwrap();
        assert!(trace.steps.iter().all(|s| s.rule == RuleKind::Subtree));
        assert_eq!(trace.total_offset, 0);
        assert!(r1.leaf_count() <= 3);
        assert!(r1.isomorphic(&r2));
    }

    #[test]
    fn driver_leaves_conflict_pair_untouched() {
        let t1 = parse("((a,b),(c,(d,e)));").unwrap();
        let t2 = parse("((e,b),(c,(d,a)));").unwrap();
        let (r1, r2, trace) = exhaustively_reduce(&t1, &t2).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(serialize(&r1), serialize(&t1));
        assert_eq!(serialize(&r2), serialize(&t2));
    }

    #[test]
    fn driver_follows_212_with_two_subtree_steps() {
        let t1 = parse("(((a,(b,x)),(p,q)),((c,d),(r,s)));").unwrap();
        let t2 = parse("(((a,b),(p,r)),((c,(d,x)),(q,s)));").unwrap();
        let (_r1, _r2, trace) = exhaustively_reduce(&t1, &t2).unwrap();
        assert_eq!(trace.rule_count(RuleKind::TwoOneTwo), 1);
        assert_eq!(trace.rule_count(RuleKind::Subtree), 2);
        let first = trace.steps.first().unwrap();
        assert_eq!(first.rule, RuleKind::TwoOneTwo);
    }

    #[test]
    fn driver_offset_matches_oracle() {
        let t1 = parse("((a,(b,c)),((d,e),(f,g)));").unwrap();
        let t2 = parse("(((a,b),c),((d,f),(e,g)));").unwrap();
        let (r1, r2, trace) = exhaustively_reduce(&t1, &t2).unwrap();
        let lhs = distance(&t1, &t2);
        let rhs = distance(&r1, &r2) + trace.total_offset;
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn trace_renders_line_per_step() {
        let t = parse("((a,b),(c,d));").unwrap();
        let (_, _, trace) = exhaustively_reduce(&t, &t).unwrap();
        let text = trace.render();
        assert!(text.starts_with("RULE Subtree witness=a,b removed=a,b offset=0"));
    }
}
