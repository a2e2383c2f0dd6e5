//! Unrooted binary phylogenetic trees and the structural queries used by the
//! reduction rules and agreement-forest machinery.
//!
//! A tree stores an adjacency list over opaque vertex ids. Leaves carry taxon
//! labels; internal vertices are unlabeled and have degree 3. All equality is
//! label-based: vertex ids are never serialized and never compared across
//! trees.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::taxa::{Taxon, TaxonSet};

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("unknown taxon: {0}")]
    UnknownTaxon(Taxon),
    #[error("expected exactly {expected} taxa, got {got}")]
    WrongCardinality { expected: usize, got: usize },
    #[error("operation requires at least {required} taxa, got {got}")]
    TooFewTaxa { required: usize, got: usize },
    #[error("trees are not on the same taxon set")]
    TaxonSetMismatch,
}

/// First violated structural invariant, reported as data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Disconnected,
    HasCycle,
    NotSimple,
    /// An internal (unlabeled) vertex whose degree is not 3.
    InternalDegree(VertexId, usize),
    /// A labeled vertex whose degree is not 1.
    LabeledDegree(VertexId, usize),
    /// Leaf/label bijection broken: duplicate label or unlabeled leaf.
    LabelBijection,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Disconnected => write!(f, "graph is disconnected"),
            Violation::HasCycle => write!(f, "graph contains a cycle"),
            Violation::NotSimple => write!(f, "graph has a loop or parallel edge"),
            Violation::InternalDegree(v, d) => {
                write!(f, "internal degree != 3 (vertex {v} has degree {d})")
            }
            Violation::LabeledDegree(v, d) => {
                write!(f, "labeled vertex {v} has degree {d}, expected 1")
            }
            Violation::LabelBijection => write!(f, "label bijection violated"),
        }
    }
}

/// A resolved quartet topology on four distinct taxa, canonicalized so that
/// `ab|cd` and `cd|ab` compare equal. The smallest taxon always sits first in
/// the first pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quartet {
    pair_a: (Taxon, Taxon),
    pair_b: (Taxon, Taxon),
}

impl Quartet {
    pub fn new(a: (Taxon, Taxon), b: (Taxon, Taxon)) -> Self {
        let mut pa = if a.0 <= a.1 { a } else { (a.1, a.0) };
        let mut pb = if b.0 <= b.1 { b } else { (b.1, b.0) };
        if pb.0 < pa.0 {
            std::mem::swap(&mut pa, &mut pb);
        }
        let all: BTreeSet<&Taxon> = [&pa.0, &pa.1, &pb.0, &pb.1].into_iter().collect();
        assert_eq!(all.len(), 4, "quartet taxa must be distinct");
        Quartet { pair_a: pa, pair_b: pb }
    }

    pub fn pairs(&self) -> (&(Taxon, Taxon), &(Taxon, Taxon)) {
        (&self.pair_a, &self.pair_b)
    }

    /// True if `x` and `y` lie on the same side of the split.
    pub fn same_side(&self, x: &Taxon, y: &Taxon) -> bool {
        let a = (&self.pair_a.0 == x || &self.pair_a.1 == x)
            && (&self.pair_a.0 == y || &self.pair_a.1 == y);
        let b = (&self.pair_b.0 == x || &self.pair_b.1 == x)
            && (&self.pair_b.0 == y || &self.pair_b.1 == y);
        a || b
    }
}

impl std::fmt::Display for Quartet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{},{}|{},{}",
            self.pair_a.0, self.pair_a.1, self.pair_b.0, self.pair_b.1
        )
    }
}

/// An unrooted binary phylogenetic tree on a set of taxa.
///
/// Invariants (checked by [`UnrootedTree::validate`]): simple, connected,
/// acyclic; every vertex has degree 1 (labeled leaf) or degree 3 (unlabeled);
/// a single labeled vertex for the one-taxon case.
#[derive(Debug, Clone)]
pub struct UnrootedTree {
    adj: Vec<Vec<VertexId>>,
    labels: Vec<Option<Taxon>>,
    leaf_of: BTreeMap<Taxon, VertexId>,
}

/// Incremental construction helper; `finish` compacts ids and checks nothing
/// beyond the label map, so callers normally follow it with `validate`.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    adj: Vec<Vec<VertexId>>,
    labels: Vec<Option<Taxon>>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_internal(&mut self) -> VertexId {
        self.adj.push(Vec::new());
        self.labels.push(None);
        self.adj.len() - 1
    }

    pub fn add_leaf(&mut self, taxon: impl Into<Taxon>) -> VertexId {
        self.adj.push(Vec::new());
        self.labels.push(Some(taxon.into()));
        self.adj.len() - 1
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) {
        self.adj[u].push(v);
        self.adj[v].push(u);
    }

    pub fn finish(self) -> UnrootedTree {
        let mut leaf_of = BTreeMap::new();
        for (v, label) in self.labels.iter().enumerate() {
            if let Some(t) = label {
                leaf_of.insert(t.clone(), v);
            }
        }
        UnrootedTree { adj: self.adj, labels: self.labels, leaf_of }
    }
}

impl UnrootedTree {
    /// Single-taxon tree: one labeled vertex, no edges.
    pub fn singleton(taxon: impl Into<Taxon>) -> Self {
        let mut b = TreeBuilder::new();
        b.add_leaf(taxon);
        b.finish()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn label(&self, v: VertexId) -> Option<&Taxon> {
        self.labels[v].as_ref()
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.labels[v].is_some()
    }

    pub fn leaf_vertex(&self, taxon: &Taxon) -> Option<VertexId> {
        self.leaf_of.get(taxon).copied()
    }

    /// The unique neighbor of a leaf; `None` for the one-vertex tree.
    pub fn parent_of_leaf(&self, taxon: &Taxon) -> Option<VertexId> {
        let v = self.leaf_of.get(taxon)?;
        self.adj[*v].first().copied()
    }

    pub fn taxa(&self) -> TaxonSet {
        self.leaf_of.keys().cloned().collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_of.len()
    }

    /// All edges as normalized `(min, max)` pairs, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.adj.len()
    }

    /// Checks every structural invariant; reports the first violation found.
    pub fn validate(&self) -> Result<(), Violation> {
        let n = self.adj.len();
        if n == 0 {
            return Err(Violation::LabelBijection);
        }
        // simplicity
        for (u, nbrs) in self.adj.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &v in nbrs {
                if v == u || !seen.insert(v) {
                    return Err(Violation::NotSimple);
                }
            }
        }
        // connectivity
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    stack.push(v);
                }
            }
        }
        if visited != n {
            return Err(Violation::Disconnected);
        }
        let edge_count: usize = self.adj.iter().map(|a| a.len()).sum::<usize>() / 2;
        if edge_count != n - 1 {
            return Err(Violation::HasCycle);
        }
        // degrees and labels
        if n == 1 {
            if self.labels[0].is_none() {
                return Err(Violation::LabelBijection);
            }
        } else {
            for v in 0..n {
                match (self.labels[v].is_some(), self.adj[v].len()) {
                    (true, 1) => {}
                    (false, 3) => {}
                    (true, d) => return Err(Violation::LabeledDegree(v, d)),
                    (false, d) => return Err(Violation::InternalDegree(v, d)),
                }
            }
        }
        // bijection: every label distinct (map construction already dedups,
        // so compare counts), every leaf labeled (checked above)
        let label_count = self.labels.iter().filter(|l| l.is_some()).count();
        if label_count != self.leaf_of.len() {
            return Err(Violation::LabelBijection);
        }
        Ok(())
    }

    /// Vertices on the unique path from `u` to `v`, inclusive.
    pub fn path(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        let mut prev = vec![usize::MAX; self.adj.len()];
        let mut stack = vec![u];
        prev[u] = u;
        while let Some(w) = stack.pop() {
            if w == v {
                break;
            }
            for &x in &self.adj[w] {
                if prev[x] == usize::MAX {
                    prev[x] = w;
                    stack.push(x);
                }
            }
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != u {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Vertex set of the minimal subtree connecting `subset` (no suppression).
    pub fn embedding_vertices(&self, subset: &TaxonSet) -> Result<BTreeSet<VertexId>, TreeError> {
        if subset.is_empty() {
            return Err(TreeError::TooFewTaxa { required: 1, got: 0 });
        }
        let marks = self.embedding_marks(subset)?;
        Ok(marks
            .iter()
            .enumerate()
            .filter_map(|(v, &m)| if m { Some(v) } else { None })
            .collect())
    }

    /// Boolean mask over vertex ids for the embedding of `subset`.
    pub(crate) fn embedding_marks(&self, subset: &TaxonSet) -> Result<Vec<bool>, TreeError> {
        let mut in_subset = vec![false; self.adj.len()];
        for t in subset {
            let v = self
                .leaf_vertex(t)
                .ok_or_else(|| TreeError::UnknownTaxon(t.clone()))?;
            in_subset[v] = true;
        }
        // Repeatedly strip non-subset leaves of the current induced subtree.
        let mut keep = vec![true; self.adj.len()];
        let mut deg: Vec<usize> = self.adj.iter().map(|a| a.len()).collect();
        let mut queue: Vec<VertexId> = (0..self.adj.len())
            .filter(|&v| deg[v] <= 1 && !in_subset[v])
            .collect();
        while let Some(v) = queue.pop() {
            if !keep[v] || in_subset[v] {
                continue;
            }
            if deg[v] <= 1 {
                keep[v] = false;
                for &u in &self.adj[v] {
                    if keep[u] {
                        deg[u] -= 1;
                        if deg[u] <= 1 && !in_subset[u] {
                            queue.push(u);
                        }
                    }
                }
            }
        }
        Ok(keep)
    }

    /// The restriction of the tree to `subset`: minimal connecting subtree
    /// with degree-2 vertices suppressed.
    pub fn restrict(&self, subset: &TaxonSet) -> Result<UnrootedTree, TreeError> {
        if subset.is_empty() {
            return Err(TreeError::TooFewTaxa { required: 1, got: 0 });
        }
        let keep = self.embedding_marks(subset)?;
        let mut b = TreeBuilder::new();
        let mut id_map = vec![usize::MAX; self.adj.len()];
        for v in 0..self.adj.len() {
            if keep[v] {
                id_map[v] = match &self.labels[v] {
                    Some(t) => b.add_leaf(t.clone()),
                    None => b.add_internal(),
                };
            }
        }
        for (u, v) in self.edges() {
            if keep[u] && keep[v] {
                b.add_edge(id_map[u], id_map[v]);
            }
        }
        let mut tree = b.finish();
        tree.suppress_degree_two();
        Ok(tree)
    }

    /// Removes each unlabeled degree-2 vertex, joining its two neighbors.
    /// Also drops unlabeled degree-0/1 debris left by edge deletions.
    pub(crate) fn suppress_degree_two(&mut self) {
        loop {
            let mut changed = false;
            for v in 0..self.adj.len() {
                if self.labels[v].is_none() && self.adj[v].len() == 2 {
                    let (a, b) = (self.adj[v][0], self.adj[v][1]);
                    self.adj[v].clear();
                    self.adj[a].retain(|&x| x != v);
                    self.adj[b].retain(|&x| x != v);
                    self.adj[a].push(b);
                    self.adj[b].push(a);
                    changed = true;
                } else if self.labels[v].is_none()
                    && self.adj[v].len() == 1
                    && self.adj.len() > 1
                {
                    let a = self.adj[v][0];
                    self.adj[v].clear();
                    self.adj[a].retain(|&x| x != v);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.compact();
    }

    /// Drops isolated unlabeled vertices and renumbers.
    fn compact(&mut self) {
        let n = self.adj.len();
        let mut id_map = vec![usize::MAX; n];
        let mut next = 0;
        for v in 0..n {
            if self.labels[v].is_some() || !self.adj[v].is_empty() {
                id_map[v] = next;
                next += 1;
            }
        }
        let mut adj = vec![Vec::new(); next];
        let mut labels = vec![None; next];
        for v in 0..n {
            if id_map[v] == usize::MAX {
                continue;
            }
            labels[id_map[v]] = self.labels[v].take();
            adj[id_map[v]] = self.adj[v].iter().map(|&u| id_map[u]).collect();
        }
        let mut leaf_of = BTreeMap::new();
        for (v, label) in labels.iter().enumerate() {
            if let Some(t) = label {
                leaf_of.insert(t.clone(), v);
            }
        }
        self.adj = adj;
        self.labels = labels;
        self.leaf_of = leaf_of;
    }

    /// The quartet topology induced on four taxa: `ab|cd` when the `a`-`b`
    /// path avoids the `c`-`d` path.
    pub fn quartet_topology(&self, four: &TaxonSet) -> Result<Quartet, TreeError> {
        if four.len() != 4 {
            return Err(TreeError::WrongCardinality { expected: 4, got: four.len() });
        }
        let ts: Vec<&Taxon> = four.iter().collect();
        let vs: Vec<VertexId> = ts
            .iter()
            .map(|t| {
                self.leaf_vertex(t)
                    .ok_or_else(|| TreeError::UnknownTaxon((*t).clone()))
            })
            .collect::<Result<_, _>>()?;
        // Try ab|cd, then ac|bd; by trichotomy the remaining case is ad|bc.
        let disjoint = |p: &[VertexId], q: &[VertexId]| {
            let ps: BTreeSet<_> = p.iter().collect();
            q.iter().all(|v| !ps.contains(v))
        };
        let p01 = self.path(vs[0], vs[1]);
        let p23 = self.path(vs[2], vs[3]);
        if disjoint(&p01, &p23) {
            return Ok(Quartet::new(
                (ts[0].clone(), ts[1].clone()),
                (ts[2].clone(), ts[3].clone()),
            ));
        }
        let p02 = self.path(vs[0], vs[2]);
        let p13 = self.path(vs[1], vs[3]);
        if disjoint(&p02, &p13) {
            return Ok(Quartet::new(
                (ts[0].clone(), ts[2].clone()),
                (ts[1].clone(), ts[3].clone()),
            ));
        }
        Ok(Quartet::new(
            (ts[0].clone(), ts[3].clone()),
            (ts[1].clone(), ts[2].clone()),
        ))
    }

    /// All cherries: unordered leaf pairs adjacent to a common vertex,
    /// canonically ordered within and across pairs.
    pub fn cherries(&self) -> Vec<(Taxon, Taxon)> {
        let mut out = Vec::new();
        for v in 0..self.adj.len() {
            if self.labels[v].is_some() {
                continue;
            }
            let mut leaves: Vec<&Taxon> = self.adj[v]
                .iter()
                .filter_map(|&u| self.labels[u].as_ref())
                .collect();
            leaves.sort();
            for i in 0..leaves.len() {
                for j in (i + 1)..leaves.len() {
                    out.push((leaves[i].clone(), leaves[j].clone()));
                }
            }
        }
        out.sort();
        out
    }

    /// True if the two taxa form a cherry.
    pub fn is_cherry(&self, a: &Taxon, b: &Taxon) -> bool {
        match (self.parent_of_leaf(a), self.parent_of_leaf(b)) {
            (Some(pa), Some(pb)) => pa == pb,
            _ => false,
        }
    }

    /// Label-respecting graph isomorphism, decided via a canonical code
    /// rooted at the smallest taxon's leaf.
    pub fn isomorphic(&self, other: &UnrootedTree) -> bool {
        if self.taxa() != other.taxa() {
            return false;
        }
        self.canonical_code() == other.canonical_code()
    }

    /// Canonical structural code; equal codes iff isomorphic (for trees on
    /// the same taxon set).
    pub fn canonical_code(&self) -> String {
        fn encode(tree: &UnrootedTree, v: VertexId, from: Option<VertexId>) -> String {
            if let Some(t) = &tree.labels[v] {
                return format!("l{t}");
            }
            let mut parts: Vec<String> = tree.adj[v]
                .iter()
                .filter(|&&u| Some(u) != from)
                .map(|&u| encode(tree, u, Some(v)))
                .collect();
            parts.sort();
            format!("({})", parts.join(","))
        }
        let Some(min_taxon) = self.leaf_of.keys().next() else {
            return String::new();
        };
        let root = self.leaf_of[min_taxon];
        match self.adj[root].first() {
            None => format!("l{min_taxon}"),
            Some(&p) => format!("l{min_taxon}:{}", encode(self, p, Some(root))),
        }
    }

    /// Relabels one leaf in place. The new label must be fresh.
    pub fn rename_leaf(&mut self, old: &Taxon, new: Taxon) -> Result<(), TreeError> {
        let v = self
            .leaf_of
            .remove(old)
            .ok_or_else(|| TreeError::UnknownTaxon(old.clone()))?;
        assert!(
            !self.leaf_of.contains_key(&new),
            "rename target {new} already labels a leaf"
        );
        self.labels[v] = Some(new.clone());
        self.leaf_of.insert(new, v);
        Ok(())
    }

    /// Leaf set on the far side of the directed edge `from -> to`.
    pub fn side_taxa(&self, from: VertexId, to: VertexId) -> TaxonSet {
        let mut out = TaxonSet::new();
        let mut seen = vec![false; self.adj.len()];
        seen[from] = true;
        seen[to] = true;
        let mut stack = vec![to];
        if let Some(t) = &self.labels[to] {
            out.insert(t.clone());
        }
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    if let Some(t) = &self.labels[v] {
                        out.insert(t.clone());
                    }
                    stack.push(v);
                }
            }
        }
        out
    }

    /// Canonical rooted form of the pendant subtree on the far side of
    /// `from -> to`, rooted at `to` (the attachment side endpoint).
    pub fn rooted_side_code(&self, from: VertexId, to: VertexId) -> String {
        fn encode(tree: &UnrootedTree, v: VertexId, from: VertexId) -> String {
            if let Some(t) = &tree.labels[v] {
                return t.as_str().to_string();
            }
            let mut parts: Vec<String> = tree.adj[v]
                .iter()
                .filter(|&&u| u != from)
                .map(|&u| encode(tree, u, v))
                .collect();
            parts.sort();
            format!("({})", parts.join(","))
        }
        encode(self, to, from)
    }
}

/// Maximal common pendant subtrees of the pair: taxon sets `S` with
/// `2 <= |S| <= n-2` that are the leaf set of a pendant subtree in both trees
/// with equal shape when rooted at the attachment point. Sorted canonically.
pub fn find_common_pendant_subtrees(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
) -> Result<Vec<TaxonSet>, TreeError> {
    let taxa = t1.taxa();
    if taxa != t2.taxa() {
        return Err(TreeError::TaxonSetMismatch);
    }
    let n = taxa.len();
    if n < 4 {
        return Ok(Vec::new());
    }
    // side taxon set -> rooted code, per tree
    let sides = |t: &UnrootedTree| -> BTreeMap<TaxonSet, String> {
        let mut m = BTreeMap::new();
        for (u, v) in t.edges() {
            for (from, to) in [(u, v), (v, u)] {
                let s = t.side_taxa(from, to);
                if s.len() >= 2 && s.len() <= n - 2 {
                    m.insert(s, t.rooted_side_code(from, to));
                }
            }
        }
        m
    };
    let s1 = sides(t1);
    let s2 = sides(t2);
    let mut common: Vec<TaxonSet> = s1
        .iter()
        .filter(|(set, code)| s2.get(*set) == Some(code))
        .map(|(set, _)| set.clone())
        .collect();
    // keep only inclusion-maximal sets
    let mut maximal: Vec<TaxonSet> = Vec::new();
    for s in &common {
        if !common.iter().any(|t| t != s && s.is_subset(t)) {
            maximal.push(s.clone());
        }
    }
    common = maximal;
    common.sort();
    Ok(common)
}

/// Yields every unrooted binary tree on `taxa` exactly once; the count is
/// `(2n-5)!!`. Trees are produced by inserting taxa in canonical order into
/// every edge of every smaller tree, decoded lazily from a mixed-radix index.
pub fn enumerate_trees(taxa: &TaxonSet) -> Result<TreeEnumeration, TreeError> {
    if taxa.len() < 3 {
        return Err(TreeError::TooFewTaxa { required: 3, got: taxa.len() });
    }
    Ok(TreeEnumeration { taxa: taxa.clone(), next: 0, total: tree_count(taxa.len()) })
}

/// `(2n-5)!!` for `n >= 3`.
pub fn tree_count(n: usize) -> u128 {
    let mut c: u128 = 1;
    for j in 3..n {
        c *= (2 * j - 3) as u128;
    }
    c
}

pub struct TreeEnumeration {
    taxa: TaxonSet,
    next: u128,
    total: u128,
}

impl Iterator for TreeEnumeration {
    type Item = UnrootedTree;

    fn next(&mut self) -> Option<UnrootedTree> {
        if self.next >= self.total {
            return None;
        }
        let t = tree_from_index(&self.taxa, self.next);
        self.next += 1;
        Some(t)
    }
}

impl ExactSizeIterator for TreeEnumeration {
    fn len(&self) -> usize {
        (self.total - self.next) as usize
    }
}

/// Decodes tree number `index` (mixed-radix over edge choices) on `taxa`.
/// Every index in `0..tree_count(n)` yields a distinct tree.
pub fn tree_from_index(taxa: &TaxonSet, mut index: u128) -> UnrootedTree {
    let labels: Vec<&Taxon> = taxa.iter().collect();
    assert!(labels.len() >= 3);
    let mut digits = Vec::new();
    for j in 3..labels.len() {
        let radix = (2 * j - 3) as u128;
        digits.push((index % radix) as usize);
        index /= radix;
    }
    build_by_insertion(&labels, &digits)
}

/// Builds the 3-leaf star on the first three labels, then attaches each
/// further label to the edge selected by the matching digit.
pub(crate) fn build_by_insertion(labels: &[&Taxon], digits: &[usize]) -> UnrootedTree {
    let mut b = TreeBuilder::new();
    let center = b.add_internal();
    for t in &labels[..3] {
        let leaf = b.add_leaf((*t).clone());
        b.add_edge(center, leaf);
    }
    let mut tree = b.finish();
    for (i, t) in labels[3..].iter().enumerate() {
        let edges = tree.edges();
        let (u, v) = edges[digits[i]];
        tree = attach_leaf(&tree, (*t).clone(), (u, v));
    }
    tree
}

/// Subdivides edge `(u, v)` and hangs a new leaf off the new vertex.
pub fn attach_leaf(tree: &UnrootedTree, taxon: Taxon, edge: (VertexId, VertexId)) -> UnrootedTree {
    let (u, v) = edge;
    let mut b = TreeBuilder::new();
    for w in tree.vertices() {
        match tree.label(w) {
            Some(t) => b.add_leaf(t.clone()),
            None => b.add_internal(),
        };
    }
    for (x, y) in tree.edges() {
        if (x, y) != (u.min(v), u.max(v)) {
            b.add_edge(x, y);
        }
    }
    let mid = b.add_internal();
    let leaf = b.add_leaf(taxon);
    b.add_edge(u, mid);
    b.add_edge(mid, v);
    b.add_edge(mid, leaf);
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse;

    fn taxa(list: &[&str]) -> TaxonSet {
        list.iter().copied().collect()
    }

    #[test]
    fn validate_smallest_legal_tree() {
        let t = parse("((a,b),(c,d));").unwrap();
        assert_eq!(t.validate(), Ok(()));
    }

    #[test]
    fn validate_rejects_degree_two_internal() {
        // path a - v - b with deg(v) = 2
        let mut b = TreeBuilder::new();
        let a = b.add_leaf("a");
        let v = b.add_internal();
        let b2 = b.add_leaf("b");
        b.add_edge(a, v);
        b.add_edge(v, b2);
        let t = b.finish();
        assert!(matches!(t.validate(), Err(Violation::InternalDegree(_, 2))));
    }

    #[test]
    fn validate_rejects_duplicate_label() {
        let mut b = TreeBuilder::new();
        let c = b.add_internal();
        let x = b.add_leaf("a");
        let y = b.add_leaf("a");
        let z = b.add_leaf("b");
        b.add_edge(c, x);
        b.add_edge(c, y);
        b.add_edge(c, z);
        let t = b.finish();
        assert_eq!(t.validate(), Err(Violation::LabelBijection));
    }

    #[test]
    fn restrict_caterpillar_to_three() {
        let t = parse("((a,b),(c,(d,e)));").unwrap();
        let r = t.restrict(&taxa(&["a", "b", "c"])).unwrap();
        assert_eq!(r.validate(), Ok(()));
        // the unique 3-leaf tree on {a,b,c}
        assert!(r.isomorphic(&parse("(a,b,c);").unwrap()));
    }

    #[test]
    fn restrict_to_all_taxa_is_identity() {
        let t = parse("((a,b),(c,(d,e)));").unwrap();
        let r = t.restrict(&t.taxa()).unwrap();
        assert!(r.isomorphic(&t));
    }

    #[test]
    fn restrict_drops_b() {
        // derived by path checks: dropping b re-hangs a next to c
        let t = parse("((a,b),(c,(d,e)));").unwrap();
        let r = t.restrict(&taxa(&["a", "c", "d", "e"])).unwrap();
        assert!(r.isomorphic(&parse("((a,c),(d,e));").unwrap()));
    }

    #[test]
    fn embedding_singleton_is_leaf() {
        let t = parse("((a,b),(c,d));").unwrap();
        let e = t.embedding_vertices(&taxa(&["a"])).unwrap();
        assert_eq!(e.len(), 1);
        assert!(t.is_leaf(*e.iter().next().unwrap()));
    }

    #[test]
    fn embeddings_of_opposite_cherries_are_disjoint() {
        let t = parse("((a,b),(c,d));").unwrap();
        let e1 = t.embedding_vertices(&taxa(&["a", "b"])).unwrap();
        let e2 = t.embedding_vertices(&taxa(&["c", "d"])).unwrap();
        assert!(e1.is_disjoint(&e2));
    }

    #[test]
    fn embeddings_of_crossing_pairs_intersect() {
        // in ((a,c),(b,d)), paths a-b and c-d share the central edge
        let t = parse("((a,c),(b,d));").unwrap();
        let e1 = t.embedding_vertices(&taxa(&["a", "b"])).unwrap();
        let e2 = t.embedding_vertices(&taxa(&["c", "d"])).unwrap();
        assert!(!e1.is_disjoint(&e2));
    }

    #[test]
    fn quartet_of_quartet_tree() {
        let t = parse("((a,b),(c,d));").unwrap();
        let q = t.quartet_topology(&taxa(&["a", "b", "c", "d"])).unwrap();
        assert_eq!(q, Quartet::new(("a".into(), "b".into()), ("c".into(), "d".into())));
    }

    #[test]
    fn quartet_of_caterpillar_subset() {
        // caterpillar a-b-c-d-e: {a,b,d,e} -> ab|de
        let t = parse("((a,b),(c,(d,e)));").unwrap();
        let q = t.quartet_topology(&taxa(&["a", "b", "d", "e"])).unwrap();
        assert_eq!(q, Quartet::new(("a".into(), "b".into()), ("d".into(), "e".into())));
    }

    #[test]
    fn quartet_trichotomy() {
        let abcd = taxa(&["a", "b", "c", "d"]);
        let all: Vec<Quartet> = enumerate_trees(&abcd)
            .unwrap()
            .map(|t| t.quartet_topology(&abcd).unwrap())
            .collect();
        let distinct: BTreeSet<&Quartet> = all.iter().collect();
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn cherries_of_quartet() {
        let t = parse("((a,b),(c,d));").unwrap();
        assert_eq!(
            t.cherries(),
            vec![("a".into(), "b".into()), ("c".into(), "d".into())]
        );
    }

    #[test]
    fn cherries_of_caterpillar() {
        let t = parse("((a,b),(c,(d,e)));").unwrap();
        assert_eq!(
            t.cherries(),
            vec![("a".into(), "b".into()), ("d".into(), "e".into())]
        );
    }

    #[test]
    fn cherries_of_three_leaf_tree() {
        let t = parse("(a,b,c);").unwrap();
        assert_eq!(t.cherries().len(), 3);
    }

    #[test]
    fn isomorphic_ignores_rotation_and_order() {
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((c,d),(b,a));").unwrap();
        assert!(t1.isomorphic(&t2));
    }

    #[test]
    fn distinct_quartets_not_isomorphic() {
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,c),(b,d));").unwrap();
        assert!(!t1.isomorphic(&t2));
    }

    #[test]
    fn three_leaf_trees_unique() {
        let t1 = parse("(a,b,c);").unwrap();
        let t2 = parse("(c,a,b);").unwrap();
        assert!(t1.isomorphic(&t2));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_trees(&taxa(&["a", "b", "c", "d"])).unwrap().count(), 3);
        assert_eq!(
            enumerate_trees(&taxa(&["a", "b", "c", "d", "e"])).unwrap().count(),
            15
        );
        assert_eq!(
            enumerate_trees(&taxa(&["a", "b", "c", "d", "e", "f"])).unwrap().count(),
            105
        );
    }

    #[test]
    fn enumeration_yields_valid_distinct_trees() {
        for n in 4..=6 {
            let labels: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
            let ts: TaxonSet = labels.iter().map(|s| Taxon::new(s.clone())).collect();
            let mut codes = BTreeSet::new();
            for t in enumerate_trees(&ts).unwrap() {
                assert_eq!(t.validate(), Ok(()));
                assert!(codes.insert(t.canonical_code()), "duplicate tree in enumeration");
            }
            assert_eq!(codes.len() as u128, tree_count(n));
        }
    }

    #[test]
    fn restriction_composes() {
        let t = parse("(((a,b),c),((d,e),f));").unwrap();
        let big = taxa(&["a", "b", "d", "e", "f"]);
        let small = taxa(&["a", "d", "f"]);
        let r1 = t.restrict(&big).unwrap().restrict(&small).unwrap();
        let r2 = t.restrict(&small).unwrap();
        assert!(r1.isomorphic(&r2));
    }

    #[test]
    fn common_pendant_subtrees_of_identical_quartet() {
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,b),(c,d));").unwrap();
        let found = find_common_pendant_subtrees(&t1, &t2).unwrap();
        assert_eq!(found, vec![taxa(&["a", "b"]), taxa(&["c", "d"])]);
    }

    #[test]
    fn common_pendant_subtree_needs_equal_rooted_shape() {
        let t1 = parse("((a,(b,c)),(d,(e,f)));").unwrap();
        let t2 = parse("(((a,b),c),(d,(e,f)));").unwrap();
        let found = find_common_pendant_subtrees(&t1, &t2).unwrap();
        assert_eq!(found, vec![taxa(&["d", "e", "f"])]);
    }

    #[test]
    fn conflicting_quartets_share_no_pendant_subtree() {
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,c),(b,d));").unwrap();
        assert!(find_common_pendant_subtrees(&t1, &t2).unwrap().is_empty());
    }
}
