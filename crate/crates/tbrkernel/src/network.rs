//! Unrooted binary phylogenetic networks, display testing, and generators
//! (the cubic multigraph backbones underlying networks).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::taxa::{Taxon, TaxonSet};
use crate::tree::{TreeBuilder, TreeError, UnrootedTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("network is disconnected")]
    Disconnected,
    #[error("display search guarded to reticulation number {max}, got {got}")]
    TooLarge { got: usize, max: usize },
    #[error("generator extraction requires reticulation number >= 2, got {0}")]
    Degenerate(usize),
    #[error("network is not binary: vertex {vertex} has degree {degree}")]
    BadDegree { vertex: usize, degree: usize },
    #[error("network has a loop or parallel edge after leaf attachment")]
    NotSimple,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// An unrooted binary phylogenetic network: a connected multigraph whose
/// labeled vertices have degree 1 and unlabeled vertices degree 3. After
/// leaf attachment the graph must be simple.
#[derive(Debug, Clone)]
pub struct UnrootedNetwork {
    edges: Vec<(usize, usize)>,
    labels: Vec<Option<Taxon>>,
}

impl UnrootedNetwork {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>, labels: Vec<(usize, Taxon)>) -> Self {
        let mut label_vec = vec![None; vertex_count];
        for (v, t) in labels {
            label_vec[v] = Some(t);
        }
        UnrootedNetwork { edges, labels: label_vec }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn label(&self, v: usize) -> Option<&Taxon> {
        self.labels[v].as_ref()
    }

    pub fn taxa(&self) -> TaxonSet {
        self.labels.iter().flatten().cloned().collect()
    }

    fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.labels.len()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        if self.labels.is_empty() {
            return false;
        }
        let mut adj = vec![Vec::new(); self.labels.len()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.labels.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.labels.len()
    }

    /// Structural check: connected, simple, degree 1 labeled / 3 unlabeled.
    pub fn validate(&self) -> Result<(), NetworkError> {
        if !self.is_connected() {
            return Err(NetworkError::Disconnected);
        }
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &(u, v) in &self.edges {
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                return Err(NetworkError::NotSimple);
            }
        }
        for (v, deg) in self.degrees().iter().enumerate() {
            match (self.labels[v].is_some(), deg) {
                (true, 1) | (false, 3) => {}
                (_, &d) => return Err(NetworkError::BadDegree { vertex: v, degree: d }),
            }
        }
        Ok(())
    }

    /// `|E| - (|V| - 1)`: the number of edges beyond a spanning tree.
    pub fn reticulation_number(&self) -> Result<usize, NetworkError> {
        if !self.is_connected() {
            return Err(NetworkError::Disconnected);
        }
        Ok(self.edges.len() + 1 - self.labels.len())
    }

    /// The tree obtained by deleting the given edge indices, pruning
    /// unlabeled leaves, and suppressing degree-2 vertices; `None` if the
    /// result is disconnected.
    pub fn tree_after_deleting(&self, deleted: &BTreeSet<usize>) -> Option<UnrootedTree> {
        let mut b = TreeBuilder::new();
        for label in &self.labels {
            match label {
                Some(t) => b.add_leaf(t.clone()),
                None => b.add_internal(),
            };
        }
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if !deleted.contains(&i) {
                b.add_edge(u, v);
            }
        }
        let mut tree = b.finish();
        tree.suppress_degree_two();
        if tree.vertex_count() == 0 {
            return None;
        }
        tree.validate().ok().map(|_| tree)
    }

    /// True if some subtree of the network, after suppression, is the given
    /// tree. Exact search over cycle-breaking edge deletions; guarded to
    /// reticulation number 6.
    pub fn displays(&self, tree: &UnrootedTree) -> Result<bool, NetworkError> {
        if self.taxa() != tree.taxa() {
            return Err(NetworkError::Tree(TreeError::TaxonSetMismatch));
        }
        let r = self.reticulation_number()?;
        if r > 6 {
            return Err(NetworkError::TooLarge { got: r, max: 6 });
        }
        let target = tree.canonical_code();
        let mut visited: BTreeSet<Vec<usize>> = BTreeSet::new();
        Ok(self.display_dfs(&mut BTreeSet::new(), r, &target, &mut visited))
    }

    fn display_dfs(
        &self,
        deleted: &mut BTreeSet<usize>,
        remaining: usize,
        target: &str,
        visited: &mut BTreeSet<Vec<usize>>,
    ) -> bool {
        if !visited.insert(deleted.iter().copied().collect()) {
            return false;
        }
        match self.find_cycle(deleted) {
            None => {
                // spanning structure is a tree (or forest: rejected below)
                match self.tree_after_deleting(deleted) {
                    Some(t) => t.canonical_code() == target,
                    None => false,
                }
            }
            Some(cycle_edges) => {
                if remaining == 0 {
                    return false;
                }
                for e in cycle_edges {
                    deleted.insert(e);
                    if self.display_dfs(deleted, remaining - 1, target, visited) {
                        deleted.remove(&e);
                        return true;
                    }
                    deleted.remove(&e);
                }
                false
            }
        }
    }

    /// Edge indices of one cycle in the graph minus `deleted`, if any.
    fn find_cycle(&self, deleted: &BTreeSet<usize>) -> Option<Vec<usize>> {
        let n = self.labels.len();
        let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if deleted.contains(&i) {
                continue;
            }
            if u == v {
                return Some(vec![i]);
            }
            incident[u].push((v, i));
            incident[v].push((u, i));
        }
        struct Dfs<'a> {
            incident: &'a [Vec<(usize, usize)>],
            color: Vec<u8>,
            parent: Vec<Option<(usize, usize)>>,
        }
        impl Dfs<'_> {
            fn run(&mut self, u: usize, entry: Option<usize>) -> Option<Vec<usize>> {
                self.color[u] = 1;
                for &(w, e) in &self.incident[u] {
                    if Some(e) == entry {
                        continue;
                    }
                    if self.color[w] == 1 {
                        // back edge: close the cycle along parent pointers
                        let mut cycle = vec![e];
                        let mut cur = u;
                        while cur != w {
                            let (p, pe) = self.parent[cur].expect("on the DFS path");
                            cycle.push(pe);
                            cur = p;
                        }
                        return Some(cycle);
                    }
                    if self.color[w] == 0 {
                        self.parent[w] = Some((u, e));
                        if let Some(c) = self.run(w, Some(e)) {
                            return Some(c);
                        }
                    }
                }
                self.color[u] = 2;
                None
            }
        }
        let mut dfs = Dfs { incident: &incident, color: vec![0; n], parent: vec![None; n] };
        for start in 0..n {
            if dfs.color[start] == 0 {
                if let Some(c) = dfs.run(start, None) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Line-oriented edge-list form: one `u v` line per edge, then one
    /// `u LABEL=x` line per leaf.
    pub fn render_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        for (v, label) in self.labels.iter().enumerate() {
            if let Some(t) = label {
                out.push_str(&format!("{v} LABEL={t}\n"));
            }
        }
        out
    }
}

/// A connected cubic multigraph with `k = |E| - (|V| - 1) >= 2`; its edges
/// are called sides. Every such graph has exactly `3(k-1)` sides.
#[derive(Debug, Clone)]
pub struct Generator {
    vertex_count: usize,
    sides: Vec<(usize, usize)>,
}

impl Generator {
    pub fn new(vertex_count: usize, sides: Vec<(usize, usize)>) -> Result<Self, NetworkError> {
        let g = Generator { vertex_count, sides };
        g.validate()?;
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn sides(&self) -> &[(usize, usize)] {
        &self.sides
    }

    pub fn side_count(&self) -> usize {
        self.sides.len()
    }

    pub fn reticulation_number(&self) -> usize {
        self.sides.len() + 1 - self.vertex_count
    }

    fn validate(&self) -> Result<(), NetworkError> {
        // a loop contributes 2 to its vertex: both endpoint increments land
        // on the same entry
        let mut deg = vec![0usize; self.vertex_count];
        for &(u, v) in &self.sides {
            deg[u] += 1;
            deg[v] += 1;
        }
        for (v, &d) in deg.iter().enumerate() {
            if d != 3 {
                return Err(NetworkError::BadDegree { vertex: v, degree: d });
            }
        }
        // connectivity over the multigraph
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.sides {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if count != self.vertex_count {
            return Err(NetworkError::Disconnected);
        }
        if self.reticulation_number() < 2 {
            return Err(NetworkError::Degenerate(self.reticulation_number()));
        }
        Ok(())
    }

    /// Builds a network by attaching `leaves[i]` (in order) along side `i`.
    /// Every loop and parallel side pair needs at least one leaf somewhere
    /// on it for the result to be simple.
    pub fn attach(&self, leaves: &[Vec<Taxon>]) -> Result<UnrootedNetwork, NetworkError> {
        assert_eq!(leaves.len(), self.sides.len());
        let mut labels: Vec<Option<Taxon>> = vec![None; self.vertex_count];
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut next = self.vertex_count;
        for (&(u, v), attach) in self.sides.iter().zip(leaves) {
            let mut prev = u;
            for taxon in attach {
                let mid = next;
                labels.push(None);
                next += 1;
                let leaf = next;
                labels.push(Some(taxon.clone()));
                next += 1;
                edges.push((prev, mid));
                edges.push((mid, leaf));
                prev = mid;
            }
            edges.push((prev, v));
        }
        let net = UnrootedNetwork { edges, labels };
        net.validate()?;
        Ok(net)
    }

    /// Unlabeled multigraph isomorphism by permutation search; generators
    /// are tiny so brute force suffices.
    pub fn isomorphic(&self, other: &Generator) -> bool {
        if self.vertex_count != other.vertex_count || self.sides.len() != other.sides.len() {
            return false;
        }
        let matrix = |g: &Generator| -> BTreeMap<(usize, usize), usize> {
            let mut m = BTreeMap::new();
            for &(u, v) in &g.sides {
                *m.entry((u.min(v), u.max(v))).or_insert(0) += 1;
            }
            m
        };
        let mine = matrix(self);
        let theirs = matrix(other);
        let n = self.vertex_count;
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let mapped: BTreeMap<(usize, usize), usize> = mine
                .iter()
                .map(|(&(u, v), &c)| {
                    let (a, b) = (perm[u], perm[v]);
                    ((a.min(b), a.max(b)), c)
                })
                .collect();
            if mapped == theirs {
                return true;
            }
            if !next_permutation(&mut perm) {
                return false;
            }
        }
    }
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Strips a network down to its underlying generator: repeatedly delete
/// (labeled and unlabeled) leaves and suppress degree-2 vertices.
pub fn extract_generator(network: &UnrootedNetwork) -> Result<Generator, NetworkError> {
    let r = network.reticulation_number()?;
    if r < 2 {
        return Err(NetworkError::Degenerate(r));
    }
    // work on a mutable multigraph edge list
    let mut alive: Vec<bool> = vec![true; network.vertex_count()];
    let mut edges: Vec<(usize, usize)> = network.edges().to_vec();
    loop {
        let mut deg = vec![0usize; alive.len()];
        for &(u, v) in &edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        // delete leaves
        let leaves: Vec<usize> = (0..alive.len())
            .filter(|&v| alive[v] && deg[v] <= 1)
            .collect();
        if !leaves.is_empty() {
            for &v in &leaves {
                alive[v] = false;
            }
            edges.retain(|&(u, v)| alive[u] && alive[v]);
            continue;
        }
        // suppress a degree-2 vertex (loops keep their vertex at degree 2
        // only when isolated, which cannot happen while connected)
        let suppress = (0..alive.len()).find(|&v| {
            alive[v] && deg[v] == 2 && !edges.iter().any(|&(a, b)| a == v && b == v)
        });
        let Some(v) = suppress else { break };
        let mut endpoints = Vec::new();
        edges.retain(|&(a, b)| {
            if a == v || b == v {
                endpoints.push(if a == v { b } else { a });
                false
            } else {
                true
            }
        });
        assert_eq!(endpoints.len(), 2);
        edges.push((endpoints[0], endpoints[1]));
        alive[v] = false;
    }
    // compact ids
    let mut id = vec![usize::MAX; alive.len()];
    let mut next = 0;
    for (v, &a) in alive.iter().enumerate() {
        if a {
            id[v] = next;
            next += 1;
        }
    }
    let sides: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (id[u], id[v])).collect();
    Generator::new(next, sides)
}

/// The theta graph: two vertices joined by three parallel edges (k = 2).
pub fn theta_generator() -> Generator {
    Generator { vertex_count: 2, sides: vec![(0, 1), (0, 1), (0, 1)] }
}

/// Two loops joined by a bridge (k = 2).
pub fn dumbbell_generator() -> Generator {
    Generator { vertex_count: 2, sides: vec![(0, 0), (1, 1), (0, 1)] }
}

/// The complete graph on four vertices (k = 3).
pub fn k4_generator() -> Generator {
    Generator {
        vertex_count: 4,
        sides: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
    }
}

/// The necklace with `k - 1` beads: bead `i` is a pair of vertices joined
/// by two parallel sides, and single connector sides close the cycle of
/// beads. For `k = 2` this degenerates to the theta graph.
pub fn necklace_generator(k: usize) -> Generator {
    assert!(k >= 2);
    let beads = k - 1;
    let x = |i: usize| 2 * i;
    let y = |i: usize| 2 * i + 1;
    let mut sides = Vec::new();
    for i in 0..beads {
        sides.push((x(i), y(i)));
        sides.push((x(i), y(i)));
    }
    for i in 0..beads {
        sides.push((y(i), x((i + 1) % beads)));
    }
    Generator { vertex_count: 2 * beads, sides }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse;
    use crate::tbr::tbr_distance_exact;

    fn tx(s: &str) -> Taxon {
        Taxon::from(s)
    }

    #[test]
    fn tree_as_network_has_r_zero() {
        let t = parse("((a,b),(c,d));").unwrap();
        let mut labels = Vec::new();
        for v in t.vertices() {
            if let Some(l) = t.label(v) {
                labels.push((v, l.clone()));
            }
        }
        let net = UnrootedNetwork::new(t.vertex_count(), t.edges(), labels);
        assert_eq!(net.reticulation_number().unwrap(), 0);
        assert!(net.displays(&t).unwrap());
        let other = parse("((a,c),(b,d));").unwrap();
        assert!(!net.displays(&other).unwrap());
    }

    /// Quartet ab|cd with one extra edge joining the a-branch to the
    /// c-branch; displays both ab|cd and ac|bd but not ad|bc.
    fn one_reticulation_network() -> UnrootedNetwork {
        // vertices: 0=u, 1=w internal; 2=a 3=b 4=c 5=d leaves; 6=s1, 7=s2
        UnrootedNetwork::new(
            8,
            vec![
                (2, 6),
                (6, 0),
                (0, 3),
                (0, 1),
                (1, 5),
                (1, 7),
                (7, 4),
                (6, 7),
            ],
            vec![(2, tx("a")), (3, tx("b")), (4, tx("c")), (5, tx("d"))],
        )
    }

    #[test]
    fn hand_built_r1_network_displays_two_quartets() {
        let net = one_reticulation_network();
        assert_eq!(net.reticulation_number().unwrap(), 1);
        assert!(net.displays(&parse("((a,b),(c,d));").unwrap()).unwrap());
        assert!(net.displays(&parse("((a,c),(b,d));").unwrap()).unwrap());
        assert!(!net.displays(&parse("((a,d),(b,c));").unwrap()).unwrap());
    }

    #[test]
    fn displaying_network_bounds_distance() {
        let net = one_reticulation_network();
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("((a,c),(b,d));").unwrap();
        let d = tbr_distance_exact(&t1, &t2).unwrap();
        assert!(net.reticulation_number().unwrap() >= d);
        assert_eq!(d, 1);
    }

    #[test]
    fn generator_side_counts() {
        for (g, k) in [
            (theta_generator(), 2),
            (dumbbell_generator(), 2),
            (k4_generator(), 3),
            (necklace_generator(3), 3),
            (necklace_generator(4), 4),
        ] {
            assert_eq!(g.reticulation_number(), k);
            assert_eq!(g.side_count(), 3 * (k - 1));
        }
    }

    #[test]
    fn attach_and_extract_round_trip() {
        for g in [theta_generator(), k4_generator(), necklace_generator(3), necklace_generator(4)] {
            let leaves: Vec<Vec<Taxon>> = (0..g.side_count())
                .map(|i| vec![Taxon::new(format!("l{i:02}"))])
                .collect();
            let net = g.attach(&leaves).unwrap();
            assert_eq!(
                net.reticulation_number().unwrap(),
                g.reticulation_number()
            );
            let back = extract_generator(&net).unwrap();
            assert!(back.isomorphic(&g), "round trip lost the generator");
        }
    }

    #[test]
    fn dumbbell_needs_loop_leaves() {
        let g = dumbbell_generator();
        // leaves on the loops make it binary; none on the bridge
        let net = g
            .attach(&[vec![tx("a"), tx("b")], vec![tx("c"), tx("d")], vec![]])
            .unwrap();
        assert_eq!(net.reticulation_number().unwrap(), 2);
        let back = extract_generator(&net).unwrap();
        assert!(back.isomorphic(&g));
        // empty loops would leave the multigraph non-simple
        assert!(g.attach(&[vec![], vec![tx("c")], vec![tx("a")]]).is_err());
    }

    #[test]
    fn theta_and_dumbbell_differ() {
        assert!(!theta_generator().isomorphic(&dumbbell_generator()));
    }

    #[test]
    fn edge_list_rendering() {
        let net = one_reticulation_network();
        let text = net.render_edge_list();
        assert!(text.contains("2 LABEL=a"));
        assert!(text.lines().count() == net.edge_count() + 4);
    }
}
