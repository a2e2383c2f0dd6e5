//! Chain preservation inside maximum agreement forests: component taxonomy
//! (inside-outside, straddling, bypass) and the constructive transformation
//! that rewrites a maximum agreement forest into one of equal size in which
//! every eligible chain is preserved.
//!
//! Eligible chains are common chains of length >= 3, and common 2-chains
//! that are pendant in at least one tree.

use crate::chain::{chain_walk, Chain};
use crate::forest::{
    agreement_violation, chain_status, AgreementForest, ChainStatus, ForestError,
};
use crate::search::{maf_search, SearchOutcome};
use crate::taxa::TaxonSet;
use crate::tree::UnrootedTree;

/// Per-component flags with respect to one chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentFlags {
    pub component: TaxonSet,
    /// Contains chain taxa and non-chain taxa.
    pub inside_outside: bool,
    /// Has taxa on both sides of the chain in the first tree. Always false
    /// when the chain is pendant there (no sides exist).
    pub straddles_first: bool,
    pub straddles_second: bool,
    /// Disjoint from the chain yet straddling it in the first tree.
    pub bypass_in_first: bool,
    pub bypass_in_second: bool,
}

/// Taxonomy of all forest components with respect to one chain.
#[derive(Debug, Clone)]
pub struct ComponentTaxonomy {
    pub chain_taxa: TaxonSet,
    pub status: ChainStatus,
    pub pendant_in_first: bool,
    pub pendant_in_second: bool,
    pub components: Vec<ComponentFlags>,
}

impl ComponentTaxonomy {
    pub fn bypass_components(&self) -> impl Iterator<Item = &ComponentFlags> {
        self.components
            .iter()
            .filter(|c| c.bypass_in_first || c.bypass_in_second)
    }

    pub fn inside_outside_components(&self) -> impl Iterator<Item = &ComponentFlags> {
        self.components.iter().filter(|c| c.inside_outside)
    }
}

/// The two leaf sets obtained by deleting a non-pendant chain from the tree:
/// the side beyond the first parent, then the side beyond the last. `None`
/// when the chain is pendant in this tree.
fn chain_sides(tree: &UnrootedTree, seq: &[crate::taxa::Taxon]) -> Option<(TaxonSet, TaxonSet)> {
    let n = seq.len();
    if n < 2 {
        return None;
    }
    let walk = chain_walk(tree, seq)?;
    if walk.pendant {
        return None;
    }
    let first_leaf = tree.leaf_vertex(&seq[0]).unwrap();
    let last_leaf = tree.leaf_vertex(&seq[n - 1]).unwrap();
    let p_first = walk.parents[0];
    let p_last = walk.parents[n - 1];
    let out_first = *tree
        .neighbors(p_first)
        .iter()
        .find(|&&v| v != first_leaf && v != walk.parents[1])
        .expect("non-pendant chain has an outward neighbor");
    let out_last = *tree
        .neighbors(p_last)
        .iter()
        .find(|&&v| v != last_leaf && v != walk.parents[n - 2])
        .expect("non-pendant chain has an outward neighbor");
    Some((
        tree.side_taxa(p_first, out_first),
        tree.side_taxa(p_last, out_last),
    ))
}

/// Flags every forest component with respect to `chain`. Straddle flags are
/// reported as absent for trees in which the chain is pendant.
pub fn classify_components(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
    forest: &AgreementForest,
    chain: &Chain,
) -> Result<ComponentTaxonomy, ForestError> {
    let seq = chain.leaves();
    let (w1, w2) = match (chain_walk(t1, seq), chain_walk(t2, seq)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(ForestError::NotACommonChain),
    };
    let ctaxa = chain.taxa();
    let sides1 = chain_sides(t1, seq);
    let sides2 = chain_sides(t2, seq);
    let straddles = |b: &TaxonSet, sides: &Option<(TaxonSet, TaxonSet)>| {
        sides
            .as_ref()
            .map(|(l, r)| !b.is_disjoint(l) && !b.is_disjoint(r))
            .unwrap_or(false)
    };
    let components = forest
        .components()
        .iter()
        .map(|b| {
            let meets_chain = !b.is_disjoint(&ctaxa);
            let s1 = straddles(b, &sides1);
            let s2 = straddles(b, &sides2);
            ComponentFlags {
                component: b.clone(),
                inside_outside: meets_chain && !b.difference(&ctaxa).is_empty(),
                straddles_first: s1,
                straddles_second: s2,
                bypass_in_first: !meets_chain && s1,
                bypass_in_second: !meets_chain && s2,
            }
        })
        .collect();
    Ok(ComponentTaxonomy {
        chain_taxa: ctaxa,
        status: chain_status(forest, chain),
        pendant_in_first: w1.pendant,
        pendant_in_second: w2.pendant,
        components,
    })
}

/// Rewrites a maximum agreement forest into one of equal size preserving
/// every chain in `chains`. The chains must be mutually taxa-disjoint,
/// eligible common chains; the forest must be maximum (spot-checked against
/// the bounded search).
pub fn enforce_chain_preservation(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
    chains: &[Chain],
    forest: &AgreementForest,
) -> Result<AgreementForest, ForestError> {
    for chain in chains {
        if chain_walk(t1, chain.leaves()).is_none() || chain_walk(t2, chain.leaves()).is_none() {
            return Err(ForestError::NotACommonChain);
        }
        if !chain.is_eligible() {
            return Err(ForestError::IneligibleChain(format!(
                "{chain} has length {} and is pendant in neither tree",
                chain.len()
            )));
        }
    }
    for (i, a) in chains.iter().enumerate() {
        for b in chains.iter().skip(i + 1) {
            if !a.taxa().is_disjoint(&b.taxa()) {
                return Err(ForestError::IneligibleChain(format!(
                    "{a} and {b} share taxa"
                )));
            }
        }
    }
    if agreement_violation(t1, t2, forest)?.is_some() {
        return Err(ForestError::NotMaximum);
    }
    match maf_search(t1, t2, forest.size().saturating_sub(1))? {
        SearchOutcome::Found { size, .. } if size == forest.size() => {}
        _ => return Err(ForestError::NotMaximum),
    }

    let mut current = forest.clone();
    let mut rounds = 0;
    loop {
        let split = chains
            .iter()
            .find(|c| chain_status(&current, c) != ChainStatus::Preserved);
        let Some(chain) = split else { break };
        assert!(
            rounds < chains.len(),
            "preservation loop exceeded the chain count"
        );
        rounds += 1;
        let previous = current.clone();
        current = preserve_one(t1, t2, chain, &previous);
        // chains preserved before the round must stay preserved
        for c in chains {
            if c != chain && chain_status(&previous, c) == ChainStatus::Preserved {
                assert_eq!(
                    chain_status(&current, c),
                    ChainStatus::Preserved,
                    "round on {chain} split the previously preserved {c}"
                );
            }
        }
    }

    assert_eq!(
        current.size(),
        forest.size(),
        "transformation changed the forest size"
    );
    assert!(
        agreement_violation(t1, t2, &current)?.is_none(),
        "transformation produced an invalid forest"
    );
    for chain in chains {
        assert_eq!(
            chain_status(&current, chain),
            ChainStatus::Preserved,
            "chain {chain} not preserved after transformation"
        );
    }
    Ok(current)
}

/// One round of the transformation: makes `chain` preserved without growing
/// the forest or splitting other disjoint chains.
fn preserve_one(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
    chain: &Chain,
    forest: &AgreementForest,
) -> AgreementForest {
    let seq = chain.leaves();
    let ctaxa = chain.taxa();
    let comps: Vec<TaxonSet> = forest.components().to_vec();
    let sides1 = chain_sides(t1, seq);
    let sides2 = chain_sides(t2, seq);
    let straddles = |b: &TaxonSet, sides: &Option<(TaxonSet, TaxonSet)>| {
        sides
            .as_ref()
            .map(|(l, r)| !b.is_disjoint(l) && !b.is_disjoint(r))
            .unwrap_or(false)
    };
    let in_j = |b: &TaxonSet| !b.is_disjoint(&ctaxa);

    let bypass: Vec<&TaxonSet> = comps
        .iter()
        .filter(|b| !in_j(b) && (straddles(b, &sides1) || straddles(b, &sides2)))
        .collect();

    let mut next: Vec<TaxonSet> = Vec::new();
    if !bypass.is_empty() {
        // the chain is atomized whenever a bypass component exists
        for t in &ctaxa {
            assert_eq!(
                forest.component_of(t).map(|c| c.len()),
                Some(1),
                "bypass present but chain not atomized"
            );
        }
        for b in &comps {
            if b.len() == 1 && b.is_subset(&ctaxa) {
                continue;
            }
            if bypass.iter().any(|x| *x == b) {
                continue;
            }
            next.push(b.clone());
        }
        for b in &bypass {
            let s1 = straddles(b, &sides1);
            let s2 = straddles(b, &sides2);
            if s1 && s2 {
                assert_eq!(bypass.len(), 1, "a two-tree bypass must be unique");
                let (l1, r1) = sides1.as_ref().unwrap();
                let (l2, r2) = sides2.as_ref().unwrap();
                let quads = [
                    b.intersection(l1).intersection(l2),
                    b.intersection(l1).intersection(r2),
                    b.intersection(r1).intersection(l2),
                    b.intersection(r1).intersection(r2),
                ];
                let nonempty: Vec<TaxonSet> =
                    quads.into_iter().filter(|q| !q.is_empty()).collect();
                assert!(
                    nonempty.len() <= 3,
                    "two compatible splits leave at most 3 nonempty intersections"
                );
                next.extend(nonempty);
            } else {
                let (l, r) = if s1 {
                    sides1.as_ref().unwrap()
                } else {
                    sides2.as_ref().unwrap()
                };
                next.push(b.intersection(l));
                next.push(b.intersection(r));
            }
        }
        next.push(ctaxa.clone());
        return AgreementForest::new(next);
    }

    let io: Vec<&TaxonSet> = comps
        .iter()
        .filter(|b| in_j(b) && !b.difference(&ctaxa).is_empty())
        .collect();
    next = comps.iter().filter(|b| !in_j(b)).cloned().collect();
    match io.len() {
        0 => {
            // all chain-touching components sit inside the chain; merging
            // them shrinks the forest, impossible for a maximum input
            next.push(ctaxa.clone());
        }
        2 => {
            next.push(io[0].union(io[1]).union(&ctaxa));
        }
        1 => {
            let b1 = io[0];
            let overlap = b1.intersection(&ctaxa);
            let straddle_tree = if straddles(b1, &sides1) {
                Some(&sides1)
            } else if straddles(b1, &sides2) {
                Some(&sides2)
            } else {
                None
            };
            if overlap.len() >= 2 {
                match straddle_tree {
                    Some(_) => {
                        // shrinks the forest; unreachable for a maximum input
                        next.push(b1.union(&ctaxa));
                    }
                    None => {
                        next.push(b1.difference(&ctaxa));
                        next.push(ctaxa.clone());
                    }
                }
            } else {
                match straddle_tree {
                    Some(sides) => {
                        let (l, r) = sides.as_ref().unwrap();
                        if ctaxa.len() >= 3 {
                            for part in [b1.intersection(l), b1.intersection(r)] {
                                if !part.is_empty() {
                                    next.push(part);
                                }
                            }
                            next.push(ctaxa.clone());
                        } else {
                            // 2-chain with one taxon inside the straddling
                            // component: fold the whole chain into its side
                            let x = overlap.smallest().unwrap().clone();
                            let mut left = b1.intersection(l);
                            left.insert(x);
                            for t in &ctaxa {
                                left.insert(t.clone());
                            }
                            next.push(left);
                            let right = b1.intersection(r);
                            if !right.is_empty() {
                                next.push(right);
                            }
                        }
                    }
                    None => {
                        next.push(b1.difference(&ctaxa));
                        next.push(ctaxa.clone());
                    }
                }
            }
        }
        more => unreachable!("a chain admits at most 2 inside-outside components, found {more}"),
    }
    AgreementForest::new(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::find_maximal_common_chains;
    use crate::forest::{enumerate_mafs, is_agreement_forest};
    use crate::newick::parse;

    fn taxa(list: &[&str]) -> TaxonSet {
        list.iter().copied().collect()
    }

    fn forest(parts: &[&[&str]]) -> AgreementForest {
        AgreementForest::new(parts.iter().map(|p| p.iter().copied().collect()).collect())
    }

    fn conflict_pair() -> (UnrootedTree, UnrootedTree) {
        (
            parse("((a,b),(c,(d,e)));").unwrap(),
            parse("((e,b),(c,(d,a)));").unwrap(),
        )
    }

    fn bcd_chain(t1: &UnrootedTree, t2: &UnrootedTree) -> Chain {
        find_maximal_common_chains(t1, t2)
            .unwrap()
            .into_iter()
            .find(|c| c.taxa() == taxa(&["b", "c", "d"]))
            .unwrap()
    }

    #[test]
    fn classify_inside_outside_component() {
        let (t1, t2) = conflict_pair();
        let chain = bcd_chain(&t1, &t2);
        let f = forest(&[&["a"], &["b"], &["c", "d", "e"]]);
        assert!(is_agreement_forest(&t1, &t2, &f).unwrap());
        let tax = classify_components(&t1, &t2, &f, &chain).unwrap();
        assert_eq!(tax.status, ChainStatus::Split);
        let cde = tax
            .components
            .iter()
            .find(|c| c.component == taxa(&["c", "d", "e"]))
            .unwrap();
        assert!(cde.inside_outside);
        assert!(!cde.straddles_first && !cde.straddles_second);
        assert_eq!(tax.bypass_components().count(), 0);
    }

    #[test]
    fn enforce_is_idempotent_on_preserving_forest() {
        let (t1, t2) = conflict_pair();
        let chain = bcd_chain(&t1, &t2);
        let f = forest(&[&["a"], &["e"], &["b", "c", "d"]]);
        let out = enforce_chain_preservation(&t1, &t2, &[chain], &f).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn enforce_fixes_split_chain_via_inside_outside_case() {
        let (t1, t2) = conflict_pair();
        let chain = bcd_chain(&t1, &t2);
        let f = forest(&[&["a"], &["b"], &["c", "d", "e"]]);
        let out = enforce_chain_preservation(&t1, &t2, &[chain.clone()], &f).unwrap();
        assert_eq!(out.size(), f.size());
        assert_eq!(chain_status(&out, &chain), ChainStatus::Preserved);
        assert!(is_agreement_forest(&t1, &t2, &out).unwrap());
        assert_eq!(out, forest(&[&["a"], &["e"], &["b", "c", "d"]]));
    }

    #[test]
    fn enforce_rejects_non_maximum_forest() {
        let (t1, t2) = conflict_pair();
        let chain = bcd_chain(&t1, &t2);
        let f = forest(&[&["a"], &["b"], &["c"], &["d"], &["e"]]);
        assert_eq!(
            enforce_chain_preservation(&t1, &t2, &[chain], &f).unwrap_err(),
            ForestError::NotMaximum
        );
    }

    #[test]
    fn enforce_rejects_ineligible_chain() {
        let (t1, t2) = conflict_pair();
        // (a,c) is a common 2-chain pendant in neither tree
        let ac = Chain::common(&t1, &t2, &["a".into(), "c".into()]).unwrap();
        assert!(!ac.is_eligible());
        let f = forest(&[&["a"], &["e"], &["b", "c", "d"]]);
        assert!(matches!(
            enforce_chain_preservation(&t1, &t2, &[ac], &f),
            Err(ForestError::IneligibleChain(_))
        ));
    }

    #[test]
    fn every_maf_transformable_on_the_five_leaf_pair() {
        let (t1, t2) = conflict_pair();
        let chain = bcd_chain(&t1, &t2);
        for f in enumerate_mafs(&t1, &t2).unwrap() {
            let out = enforce_chain_preservation(&t1, &t2, &[chain.clone()], &f).unwrap();
            assert_eq!(out.size(), f.size());
            assert_eq!(chain_status(&out, &chain), ChainStatus::Preserved);
        }
    }
}
