//! Batch selection for a small subgraph.
//!
//! Live vertices are bucketed by their estimated ancestor-edge count. Buckets
//! are swept from the largest down; each sweep samples vertices uniformly
//! without replacement and tests them exactly against the batch built so far.
//! A vertex is *fresh* when more than a `gamma` fraction of both its ancestor
//! vertices and its ancestor edges are new to the batch. A bucket is abandoned
//! after `stale_limit` consecutive stale samples. After each sweep, a pruning
//! pass re-estimates ancestries with the batch's ancestors removed and drops
//! every bucketed vertex whose surviving fraction is at most `2 gamma`.

use alloc::vec::Vec;

use hashbrown::HashSet;
use rand::Rng;
use thiserror::Error;

use crate::ancestry::{AncestryExplorer, AncestryResult};
use crate::dag::{Dag, EdgeId, Vertex};
use crate::estimation::{estimate_ancestry, AncestryEstimates};
use crate::sketch::{HashFamilySpec, SketchError, SketchParams};
use crate::view::SubgraphView;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BatchError {
    #[error("vertex {vertex} has more than {limit} ancestors in a subgraph that must be small")]
    PreconditionViolated { vertex: Vertex, limit: usize },
    #[error(transparent)]
    Sketch(#[from] SketchError),
}

/// Default fresh/stale threshold: `min(1 / sqrt(ln rho), 0.2)`.
pub fn default_gamma(rho: u64) -> f64 {
    let ln = libm::log(rho as f64);
    if ln <= 0.0 {
        return 0.2;
    }
    (1.0 / libm::sqrt(ln)).min(0.2)
}

/// Consecutive stale samples that abandon a bucket:
/// `ceil(constant * ln max(n, 3))`.
pub fn stale_limit(n: usize, constant: f64) -> usize {
    (libm::ceil(constant * libm::log(n.max(3) as f64)) as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchParams {
    pub rho: u64,
    pub gamma: f64,
    pub stale_limit: usize,
    pub sketch: SketchParams,
}

impl BatchParams {
    /// Largest ancestor set a small subgraph may contain.
    pub fn ancestor_limit(&self) -> usize {
        (2 * self.rho) as usize
    }
}

/// Roots of a batch and the exact union of their ancestries.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    roots: Vec<Vertex>,
    root_ancestry: Vec<Vec<Vertex>>,
    root_edges: Vec<usize>,
    anc_vertices: HashSet<Vertex>,
    anc_vertex_list: Vec<Vertex>,
    anc_edges: HashSet<EdgeId>,
}

impl Batch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Roots in insertion order.
    pub fn roots(&self) -> &[Vertex] {
        &self.roots
    }

    /// `Anc(root)` of the `i`-th root in topological order, as recorded when
    /// it joined the batch.
    pub fn root_ancestry(&self, i: usize) -> &[Vertex] {
        &self.root_ancestry[i]
    }

    /// `|E(Anc(root))|` of the `i`-th root.
    pub fn root_edge_count(&self, i: usize) -> usize {
        self.root_edges[i]
    }

    #[inline]
    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.anc_vertices.contains(&v)
    }

    #[inline]
    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.anc_edges.contains(&e)
    }

    /// `Anc(B)` in insertion order.
    pub fn ancestor_vertices(&self) -> &[Vertex] {
        &self.anc_vertex_list
    }

    pub fn ancestor_vertex_count(&self) -> usize {
        self.anc_vertex_list.len()
    }

    pub fn ancestor_edge_count(&self) -> usize {
        self.anc_edges.len()
    }

    /// `sum |Anc(v)|` over roots.
    pub fn root_vertex_total(&self) -> usize {
        self.root_ancestry.iter().map(Vec::len).sum()
    }

    /// `sum |E(Anc(v))|` over roots.
    pub fn root_edge_total(&self) -> usize {
        self.root_edges.iter().sum()
    }

    /// Adds `root` with its exact ancestry.
    pub fn add_root(&mut self, dag: &Dag, root: Vertex, ancestry: &AncestryResult) {
        let mut anc = ancestry.vertices.clone();
        anc.sort_unstable_by_key(|&v| dag.topo_rank(v));
        for &v in &anc {
            if self.anc_vertices.insert(v) {
                self.anc_vertex_list.push(v);
            }
        }
        self.anc_edges.extend(ancestry.edges.iter().copied());
        self.roots.push(root);
        self.root_ancestry.push(anc);
        self.root_edges.push(ancestry.edges.len());
    }

    /// `|Anc(B)| > gamma * sum |Anc(v)|` and the edge analogue, the latter
    /// holding vacuously when no root has ancestor edges.
    pub fn is_gamma_unique(&self, gamma: f64) -> bool {
        let vertices_ok = self.is_empty() || self.ancestor_vertex_count() as f64 > gamma * self.root_vertex_total() as f64;
        let edge_total = self.root_edge_total();
        let edges_ok = edge_total == 0 || self.ancestor_edge_count() as f64 > gamma * edge_total as f64;
        vertices_ok && edges_ok
    }
}

/// The exact fresh test. A vertex without ancestor edges passes the edge
/// half vacuously.
pub fn is_fresh(ancestry: &AncestryResult, gamma: f64) -> bool {
    let vertices = ancestry.vertices.len() as f64;
    let edges = ancestry.edges.len();
    ancestry.new_vertex_count as f64 > gamma * vertices
        && (edges == 0 || ancestry.new_edge_count as f64 > gamma * edges as f64)
}

/// Buckets `K_i = { v : 2^i <= ê_E(v) < 2^(i+1) }`; vertices with fewer than
/// two estimated edges (including sources) share bucket 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BucketSet {
    buckets: Vec<Vec<Vertex>>,
}

impl BucketSet {
    pub fn bucket_index(edge_estimate: f64) -> usize {
        if edge_estimate < 2.0 {
            0
        } else {
            libm::floor(libm::log2(edge_estimate)) as usize
        }
    }

    /// Buckets every live vertex of `view`.
    pub fn from_estimates(view: &SubgraphView<'_>, estimates: &AncestryEstimates) -> Self {
        let mut buckets: Vec<Vec<Vertex>> = Vec::new();
        for v in view.live_vertices() {
            let i = Self::bucket_index(estimates.edges(view, v));
            if buckets.len() <= i {
                buckets.resize_with(i + 1, Vec::new);
            }
            buckets[i].push(v);
        }
        Self { buckets }
    }

    /// Number of bucket slots `k`, including empty ones.
    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn bucket(&self, i: usize) -> &[Vertex] {
        &self.buckets[i]
    }

    pub fn total(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.iter().all(Vec::is_empty)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.buckets.iter().any(|b| b.contains(&v))
    }

    fn take_random<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) -> Option<Vertex> {
        let b = &mut self.buckets[i];
        if b.is_empty() {
            return None;
        }
        let at = rng.random_range(0..b.len());
        Some(b.swap_remove(at))
    }

    /// Removes a specific vertex, if bucketed.
    pub fn remove(&mut self, v: Vertex) -> bool {
        for b in &mut self.buckets {
            if let Some(at) = b.iter().position(|&x| x == v) {
                b.swap_remove(at);
                return true;
            }
        }
        false
    }
}

/// `numerator / denominator`, where an empty denominator (a vertex with no
/// ancestor edges in `H`) yields 1 so the edge half of the prune test never
/// fires on it.
pub fn survival_ratio(numerator: f64, denominator: f64) -> f64 {
    if denominator == 0.0 {
        1.0
    } else {
        numerator / denominator
    }
}

/// The pruning pass. `before` must hold estimates of the current view taken
/// with the same hash families. Tombstones `Anc(B)`, re-estimates, restores,
/// then removes every bucketed vertex with `X <= 2 gamma` or `Y <= 2 gamma`.
/// Survivors keep their buckets. Returns the pruned vertices.
pub fn prune(
    view: &mut SubgraphView<'_>,
    batch: &Batch,
    buckets: &mut BucketSet,
    gamma: f64,
    before: &AncestryEstimates,
    spec_vertices: &HashFamilySpec,
    spec_edges: &HashFamilySpec,
) -> Vec<Vertex> {
    view.remove_all(batch.ancestor_vertices());
    let after = estimate_ancestry(view, spec_vertices, spec_edges);
    view.restore_all(batch.ancestor_vertices());

    let mut pruned = Vec::new();
    for bucket in buckets.buckets.iter_mut().rev() {
        bucket.retain(|&v| {
            let (hv, he) = before.get(view, v);
            let (rv, re) = after.get(view, v);
            let x = survival_ratio(rv, hv);
            let y = survival_ratio(re, he);
            let drop = x <= 2.0 * gamma || y <= 2.0 * gamma;
            if drop {
                pruned.push(v);
            }
            !drop
        });
    }
    pruned
}

/// One sampled vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleEvent {
    /// Sweep index, starting at 0.
    pub round: usize,
    pub bucket: usize,
    pub vertex: Vertex,
    pub fresh: bool,
    /// First sample of a sweep, taken from the largest non-empty bucket.
    pub first_in_round: bool,
}

/// Per-sweep counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundTrace {
    pub sampled: usize,
    pub fresh: usize,
    pub stale: usize,
    pub pruned: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FindBatchStats {
    pub rounds: Vec<RoundTrace>,
    /// Edges touched by exact enumeration.
    pub work: u64,
}

/// Hooks into [`find_batch`], used by tests and tracing.
pub trait BatchObserver {
    fn on_sample(&mut self, _event: &SampleEvent) {}
    /// Called after every pruning pass with the batch as it stood then.
    fn on_prune(&mut self, _view: &SubgraphView<'_>, _batch: &Batch, _pruned: &[Vertex]) {}
}

impl BatchObserver for () {}

/// Builds one batch over the live vertices of `view`.
///
/// Every live vertex must have at most `2 rho` ancestors; the first sampled
/// vertex found to exceed that yields [`BatchError::PreconditionViolated`].
/// `view` is mutated during pruning but restored before returning.
pub fn find_batch<R: Rng + ?Sized, O: BatchObserver + ?Sized>(
    view: &mut SubgraphView<'_>,
    explorer: &mut AncestryExplorer,
    params: &BatchParams,
    rng: &mut R,
    observer: &mut O,
) -> Result<(Batch, FindBatchStats), BatchError> {
    let dag = view.dag();
    let spec_vertices = HashFamilySpec::new(dag.vertex_count() as u64, &params.sketch, rng.random())?;
    let spec_edges = HashFamilySpec::new(dag.edge_count() as u64, &params.sketch, rng.random())?;
    let estimates = estimate_ancestry(view, &spec_vertices, &spec_edges);
    let mut buckets = BucketSet::from_estimates(view, &estimates);

    let mut batch = Batch::new();
    let mut stats = FindBatchStats::default();
    let work_before = explorer.work;
    let limit = params.ancestor_limit();

    while !buckets.is_empty() {
        let round = stats.rounds.len();
        let mut trace = RoundTrace::default();
        for i in (0..buckets.bucket_count()).rev() {
            let mut stale_run = 0;
            while stale_run < params.stale_limit {
                let Some(v) = buckets.take_random(i, rng) else { break };
                let anc = explorer
                    .ancestry_bounded(view, v, &batch, limit)
                    .ok_or(BatchError::PreconditionViolated { vertex: v, limit })?;
                let fresh = is_fresh(&anc, params.gamma);
                observer.on_sample(&SampleEvent { round, bucket: i, vertex: v, fresh, first_in_round: trace.sampled == 0 });
                trace.sampled += 1;
                if fresh {
                    batch.add_root(dag, v, &anc);
                    trace.fresh += 1;
                    stale_run = 0;
                } else {
                    trace.stale += 1;
                    stale_run += 1;
                }
            }
        }
        let pruned = prune(view, &batch, &mut buckets, params.gamma, &estimates, &spec_vertices, &spec_edges);
        observer.on_prune(view, &batch, &pruned);
        trace.pruned = pruned.len();
        stats.rounds.push(trace);
    }
    stats.work = explorer.work - work_before;
    Ok((batch, stats))
}
