//! The end-to-end TBR distance pipeline, the TBR-move neighborhood, the
//! breadth-first operational oracle over tree space, and the metric audit.
//!
//! Pipeline: kernelize with the reduction rules, solve the kernel exactly by
//! the bounded agreement-forest search, and add the trace's offset back.
//! The distance equals the kernel's minimum agreement-forest size minus one
//! plus the offset.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::forest::{AgreementForest, ForestError};
use crate::newick::serialize;
use crate::reduce::{exhaustively_reduce, ReduceError, ReductionTrace};
use crate::search::{maf_search, SearchOutcome};
use crate::taxa::TaxonSet;
use crate::tree::{TreeBuilder, TreeError, UnrootedTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TbrError {
    #[error("instance too large: {n} taxa (guard {max})")]
    TooLarge { n: usize, max: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// Exact distance with its certificate: the reduction trace, the reduced
/// pair, and a maximum agreement forest of that kernel. The distance always
/// equals `witness.size() - 1 + trace.total_offset`.
#[derive(Debug, Clone)]
pub struct DistanceResult {
    pub distance: usize,
    pub trace: ReductionTrace,
    pub kernel: (UnrootedTree, UnrootedTree),
    pub witness: AgreementForest,
}

#[derive(Debug, Clone)]
pub enum DistanceOutcome {
    Exact(DistanceResult),
    /// The distance exceeds the supplied budget.
    BudgetExceeded,
}

impl DistanceOutcome {
    pub fn exact(self) -> Option<DistanceResult> {
        match self {
            DistanceOutcome::Exact(r) => Some(r),
            DistanceOutcome::BudgetExceeded => None,
        }
    }
}

/// Kernelize, solve, add the offset. With a budget, `BudgetExceeded` is
/// returned exactly when the true distance is larger. Pairs on fewer than
/// 4 taxa have a unique topology and distance 0.
pub fn tbr_distance(
    t1: &UnrootedTree,
    t2: &UnrootedTree,
    budget: Option<usize>,
) -> Result<DistanceOutcome, TbrError> {
    let taxa = t1.taxa();
    if taxa != t2.taxa() {
        return Err(TreeError::TaxonSetMismatch.into());
    }
    let (kernel1, kernel2, trace) = if taxa.len() < 4 {
        (t1.clone(), t2.clone(), ReductionTrace::default())
    } else {
        exhaustively_reduce(t1, t2)?
    };
    let offset = trace.total_offset;
    let kernel_budget = match budget {
        Some(b) if b < offset => return Ok(DistanceOutcome::BudgetExceeded),
        Some(b) => b - offset,
        // enough for any pair: the all-singletons forest needs n - 1 cuts
        None => kernel1.taxa().len(),
    };
    match maf_search(&kernel1, &kernel2, kernel_budget)? {
        SearchOutcome::Found { size, witness } => Ok(DistanceOutcome::Exact(DistanceResult {
            distance: size - 1 + offset,
            trace,
            kernel: (kernel1, kernel2),
            witness,
        })),
        SearchOutcome::BudgetExceeded => Ok(DistanceOutcome::BudgetExceeded),
    }
}

/// Shorthand for the unbudgeted exact distance.
pub fn tbr_distance_exact(t1: &UnrootedTree, t2: &UnrootedTree) -> Result<usize, TbrError> {
    Ok(tbr_distance(t1, t2, None)?
        .exact()
        .expect("unbudgeted search always finds the distance")
        .distance)
}

/// All trees reachable by one TBR operation: delete an edge, suppress,
/// reattach the two parts by a new edge between subdivided edges (or at an
/// isolated part directly). Deduplicated by canonical form; the input
/// itself appears when a move is a no-op.
pub fn tbr_neighbors(tree: &UnrootedTree) -> Result<Vec<UnrootedTree>, TbrError> {
    let taxa = tree.taxa();
    if taxa.len() < 4 {
        return Err(TreeError::TooFewTaxa { required: 4, got: taxa.len() }.into());
    }
    let mut out: BTreeMap<String, UnrootedTree> = BTreeMap::new();
    for (u, v) in tree.edges() {
        let side_a = tree.side_taxa(v, u);
        let side_b = tree.side_taxa(u, v);
        let part_a = tree.restrict(&side_a)?;
        let part_b = tree.restrict(&side_b)?;
        for joined in rejoin_all(&part_a, &part_b) {
            debug_assert_eq!(joined.validate(), Ok(()));
            out.insert(joined.canonical_code(), joined);
        }
    }
    Ok(out.into_values().collect())
}

/// Every tree obtained by subdividing one edge (or taking the sole vertex)
/// in each part and joining the two attachment points.
fn rejoin_all(part_a: &UnrootedTree, part_b: &UnrootedTree) -> Vec<UnrootedTree> {
    let mut out = Vec::new();
    let a_edges = attachment_points(part_a);
    let b_edges = attachment_points(part_b);
    for pa in &a_edges {
        for pb in &b_edges {
            out.push(join_parts(part_a, *pa, part_b, *pb));
        }
    }
    out
}

/// Edges of the part, or a single vertex marker when the part has no edge.
fn attachment_points(part: &UnrootedTree) -> Vec<Option<(usize, usize)>> {
    let edges = part.edges();
    if edges.is_empty() {
        vec![None]
    } else {
        edges.into_iter().map(Some).collect()
    }
}

fn join_parts(
    part_a: &UnrootedTree,
    at_a: Option<(usize, usize)>,
    part_b: &UnrootedTree,
    at_b: Option<(usize, usize)>,
) -> UnrootedTree {
    let mut b = TreeBuilder::new();
    let mut map_a = Vec::with_capacity(part_a.vertex_count());
    for v in part_a.vertices() {
        map_a.push(match part_a.label(v) {
            Some(t) => b.add_leaf(t.clone()),
            None => b.add_internal(),
        });
    }
    let mut map_b = Vec::with_capacity(part_b.vertex_count());
    for v in part_b.vertices() {
        map_b.push(match part_b.label(v) {
            Some(t) => b.add_leaf(t.clone()),
            None => b.add_internal(),
        });
    }
    let attach = |b: &mut TreeBuilder,
                  part: &UnrootedTree,
                  map: &[usize],
                  at: Option<(usize, usize)>|
     -> usize {
        for (x, y) in part.edges() {
            if at != Some((x, y)) {
                b.add_edge(map[x], map[y]);
            }
        }
        match at {
            None => map[0],
            Some((x, y)) => {
                let mid = b.add_internal();
                b.add_edge(map[x], mid);
                b.add_edge(mid, map[y]);
                mid
            }
        }
    };
    let va = attach(&mut b, part_a, &map_a, at_a);
    let vb = attach(&mut b, part_b, &map_b, at_b);
    b.add_edge(va, vb);
    let mut tree = b.finish();
    tree.suppress_degree_two();
    tree
}

/// Exact operational distance by breadth-first search over tree space,
/// keyed by canonical form. Guarded to at most 7 taxa (space size 945).
pub fn tbr_bfs_distance(t1: &UnrootedTree, t2: &UnrootedTree) -> Result<usize, TbrError> {
    let taxa = t1.taxa();
    if taxa != t2.taxa() {
        return Err(TreeError::TaxonSetMismatch.into());
    }
    let n = taxa.len();
    if !(4..=7).contains(&n) {
        return Err(TbrError::TooLarge { n, max: 7 });
    }
    let target = t2.canonical_code();
    if t1.canonical_code() == target {
        return Ok(0);
    }
    let mut dist: HashMap<String, usize> = HashMap::new();
    dist.insert(t1.canonical_code(), 0);
    let mut queue = VecDeque::new();
    queue.push_back(t1.clone());
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur.canonical_code()];
        for nbr in tbr_neighbors(&cur)? {
            let code = nbr.canonical_code();
            if code == target {
                return Ok(d + 1);
            }
            if !dist.contains_key(&code) {
                dist.insert(code, d + 1);
                queue.push_back(nbr);
            }
        }
    }
    unreachable!("tree space is connected under TBR moves");
}

/// Report of a metric audit over sampled (or exhaustive) triples.
#[derive(Debug, Clone, Default)]
pub struct MetricReport {
    pub identity_checks: usize,
    pub positivity_checks: usize,
    pub symmetry_checks: usize,
    pub triangle_checks: usize,
    pub violations: Vec<String>,
}

impl MetricReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits the metric axioms with the pipeline distance. `samples == 0`
/// checks every triple of trees on `taxa` (feasible for 4 or 5 taxa);
/// otherwise that many seeded random triples are drawn.
pub fn audit_metric(taxa: &TaxonSet, samples: usize, seed: u64) -> Result<MetricReport, TbrError> {
    use rand::{Rng, SeedableRng};
    let n = taxa.len();
    if !(4..=6).contains(&n) {
        return Err(TbrError::TooLarge { n, max: 6 });
    }
    let trees: Vec<UnrootedTree> = crate::tree::enumerate_trees(taxa)
        .map_err(TbrError::from)?
        .collect();
    let triples: Vec<[usize; 3]> = if samples == 0 {
        let mut all = Vec::new();
        for i in 0..trees.len() {
            for j in 0..trees.len() {
                for k in 0..trees.len() {
                    all.push([i, j, k]);
                }
            }
        }
        all
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                [
                    rng.gen_range(0..trees.len()),
                    rng.gen_range(0..trees.len()),
                    rng.gen_range(0..trees.len()),
                ]
            })
            .collect()
    };

    // distance matrix over the indices actually used
    let mut used: BTreeSet<usize> = BTreeSet::new();
    for t in &triples {
        used.extend(t.iter().copied());
    }
    let used: Vec<usize> = used.into_iter().collect();
    let mut dist: HashMap<(usize, usize), usize> = HashMap::new();
    for &i in &used {
        for &j in &used {
            dist.insert((i, j), tbr_distance_exact(&trees[i], &trees[j])?);
        }
    }

    let mut report = MetricReport::default();
    for [i, j, k] in triples {
        report.identity_checks += 1;
        if dist[&(i, i)] != 0 {
            report.violations.push(format!("d(T{i},T{i}) != 0"));
        }
        report.positivity_checks += 1;
        if i != j && !trees[i].isomorphic(&trees[j]) && dist[&(i, j)] == 0 {
            report
                .violations
                .push(format!("d(T{i},T{j}) = 0 for non-isomorphic trees"));
        }
        report.symmetry_checks += 1;
        if dist[&(i, j)] != dist[&(j, i)] {
            report.violations.push(format!("d(T{i},T{j}) != d(T{j},T{i})"));
        }
        report.triangle_checks += 1;
        if dist[&(i, k)] > dist[&(i, j)] + dist[&(j, k)] {
            report.violations.push(format!(
                "d(T{i},T{k}) > d(T{i},T{j}) + d(T{j},T{k})"
            ));
        }
    }
    Ok(report)
}

/// Canonical serialization of a pair for reports.
pub fn pair_digest(t1: &UnrootedTree, t2: &UnrootedTree) -> String {
    format!("{} {}", serialize(t1), serialize(t2))
}
