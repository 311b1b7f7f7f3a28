//! Small-subgraph scheduling and the phase-peeling driver for general graphs.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use crate::ancestry::AncestryExplorer;
use crate::batching::{default_gamma, find_batch, stale_limit, BatchError, BatchObserver, BatchParams, RoundTrace};
use crate::dag::{Dag, Vertex};
use crate::schedule::{list_schedule_batch, Entry, Schedule};
use crate::seed::{derive_seed, rng_for, STREAM_BATCH, STREAM_PEEL, STREAM_RESEED};
use crate::sketch::{CardinalitySketch, HashFamilySpec, SketchError, SketchParams};
use crate::view::SubgraphView;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error("small-subgraph precondition still violated after {attempts} attempts: {last}")]
    ReseedLimit { attempts: u32, last: BatchError },
}

/// How the fresh/stale threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaRule {
    /// `min(1 / sqrt(ln rho), 0.2)`.
    InverseSqrtLnRho,
    /// `min(1 / sqrt(rho), 0.2)`.
    InverseSqrtRho,
    /// A fixed value in `(0, 1/4)`.
    Fixed(f64),
}

impl GammaRule {
    pub fn resolve(&self, rho: u64) -> Result<f64, EngineError> {
        match *self {
            GammaRule::InverseSqrtLnRho => Ok(default_gamma(rho)),
            GammaRule::InverseSqrtRho => Ok((1.0 / libm::sqrt(rho as f64)).min(0.2)),
            GammaRule::Fixed(g) if g > 0.0 && g < 0.25 => Ok(g),
            GammaRule::Fixed(_) => Err(EngineError::InvalidParams("gamma must lie in (0, 1/4)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub machines: u32,
    pub rho: u64,
    pub gamma: GammaRule,
    /// `c` in the stale-run limit `ceil(c ln n)`.
    pub stale_constant: f64,
    pub sketch: SketchParams,
    /// Fresh seeds tried when a peeled subgraph turns out not to be small.
    pub max_reseeds: u32,
}

impl EngineConfig {
    pub fn new(machines: u32, rho: u64) -> Self {
        Self {
            machines,
            rho,
            gamma: GammaRule::InverseSqrtLnRho,
            stale_constant: 3.0,
            sketch: SketchParams::default(),
            max_reseeds: 8,
        }
    }

    pub fn check(&self) -> Result<(), EngineError> {
        if self.machines < 1 {
            return Err(EngineError::InvalidParams("need at least one machine"));
        }
        if self.rho < 2 {
            return Err(EngineError::InvalidParams("communication delay must be an integer > 1"));
        }
        if self.stale_constant.is_nan() || self.stale_constant <= 0.0 {
            return Err(EngineError::InvalidParams("stale constant must be positive"));
        }
        self.sketch.validate()?;
        self.gamma.resolve(self.rho).map(|_| ())
    }

    pub fn batch_params(&self, vertex_count: usize) -> Result<BatchParams, EngineError> {
        Ok(BatchParams {
            rho: self.rho,
            gamma: self.gamma.resolve(self.rho)?,
            stale_limit: stale_limit(vertex_count, self.stale_constant),
            sketch: self.sketch,
        })
    }
}

/// `log_{1/(4 gamma)}(2 rho)`.
pub fn log_inv_4gamma(rho: u64, gamma: f64) -> f64 {
    libm::log(2.0 * rho as f64) / libm::log(1.0 / (4.0 * gamma))
}

/// High-probability cap on the batches needed for one small subgraph:
/// `4 log_{1/(4 gamma)}(2 rho)`.
pub fn batch_count_bound(rho: u64, gamma: f64) -> f64 {
    4.0 * log_inv_4gamma(rho, gamma)
}

/// `|V_H| / (gamma M) + 12 rho log_{1/(4 gamma)}(2 rho)`.
pub fn subgraph_makespan_bound(vertices: usize, machines: u32, rho: u64, gamma: f64) -> f64 {
    vertices as f64 / (gamma * machines as f64) + 12.0 * rho as f64 * log_inv_4gamma(rho, gamma)
}

/// `|V| / (gamma M) + L * 12 rho log_{1/(4 gamma)}(2 rho)`.
pub fn makespan_bound(vertices: usize, machines: u32, rho: u64, gamma: f64, phases: usize) -> f64 {
    vertices as f64 / (gamma * machines as f64) + phases as f64 * 12.0 * rho as f64 * log_inv_4gamma(rho, gamma)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchRecord {
    pub roots: usize,
    /// `sum |Anc(v)|` over roots.
    pub root_vertex_total: usize,
    /// `sum |E(Anc(v))|` over roots.
    pub root_edge_total: usize,
    /// `|Anc(B)|`.
    pub ancestor_vertices: usize,
    /// `|E(Anc(B))|`.
    pub ancestor_edges: usize,
    pub time_base: u64,
    pub finish: u64,
    pub rounds: Vec<RoundTrace>,
    pub work: u64,
}

impl BatchRecord {
    /// Both uniqueness inequalities; the edge one is vacuous without edges.
    pub fn is_gamma_unique(&self, gamma: f64) -> bool {
        self.ancestor_vertices as f64 > gamma * self.root_vertex_total as f64
            && (self.root_edge_total == 0 || self.ancestor_edges as f64 > gamma * self.root_edge_total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRecord {
    /// Vertices peeled into this phase, in peeling order.
    pub members: Vec<Vertex>,
    pub vertices: usize,
    pub edges: usize,
    pub start: u64,
    pub finish: u64,
    pub batches: Vec<BatchRecord>,
}

/// Per-phase and per-batch accounting of one engine run.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLog {
    pub machines: u32,
    pub rho: u64,
    pub gamma: f64,
    pub phases: Vec<PhaseRecord>,
    /// Runs restarted because a peeled subgraph was not small.
    pub reseeds: u32,
}

impl PhaseLog {
    /// `L`.
    pub fn phase_count(&self) -> usize {
        self.phases.len()
    }

    pub fn batch_count(&self) -> usize {
        self.phases.iter().map(|p| p.batches.len()).sum()
    }

    pub fn batches(&self) -> impl Iterator<Item = &BatchRecord> {
        self.phases.iter().flat_map(|p| p.batches.iter())
    }

    /// Entries a schedule built from this log must contain.
    pub fn scheduled_copies(&self) -> usize {
        self.batches().map(|b| b.root_vertex_total).sum()
    }

    pub fn makespan_bound(&self, vertices: usize) -> f64 {
        makespan_bound(vertices, self.machines, self.rho, self.gamma, self.phase_count())
    }
}

/// Result of scheduling one small subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallSubgraphOutcome {
    /// Completion time of the last batch (`time_base` if the view was empty).
    pub finish: u64,
    pub batches: Vec<BatchRecord>,
}

/// Schedules every live vertex of `view` in batches starting at `time_base`.
///
/// Consecutive batches are separated by `rho` idle slots; no delay trails the
/// last batch. Batch `i` draws its randomness from `(seed, i)`. The view is
/// emptied.
#[allow(clippy::too_many_arguments)]
pub fn schedule_small_subgraph<O: BatchObserver + ?Sized>(
    view: &mut SubgraphView<'_>,
    explorer: &mut AncestryExplorer,
    params: &BatchParams,
    machines: u32,
    seed: u64,
    time_base: u64,
    out: &mut Vec<Entry>,
    observer: &mut O,
) -> Result<SmallSubgraphOutcome, BatchError> {
    let mut base = time_base;
    let mut finish = time_base;
    let mut batches = Vec::new();
    while !view.is_empty() {
        let mut rng = rng_for(seed, &[STREAM_BATCH, batches.len() as u64]);
        let (batch, stats) = find_batch(view, explorer, params, &mut rng, observer)?;
        finish = list_schedule_batch(&batch, machines, base, out);
        batches.push(BatchRecord {
            roots: batch.roots().len(),
            root_vertex_total: batch.root_vertex_total(),
            root_edge_total: batch.root_edge_total(),
            ancestor_vertices: batch.ancestor_vertex_count(),
            ancestor_edges: batch.ancestor_edge_count(),
            time_base: base,
            finish,
            rounds: stats.rounds,
            work: stats.work,
        });
        view.remove_all(batch.ancestor_vertices());
        view.compact();
        if !view.is_empty() {
            base = finish + params.rho;
        }
    }
    Ok(SmallSubgraphOutcome { finish, batches })
}

/// Schedules `dag` on `config.machines` machines under delay `config.rho`.
pub fn schedule_general(dag: &Dag, config: &EngineConfig, seed: u64) -> Result<(Schedule, PhaseLog), EngineError> {
    schedule_general_observed(dag, config, seed, &mut ())
}

/// [`schedule_general`] with a hook into every batch search.
pub fn schedule_general_observed<O: BatchObserver + ?Sized>(
    dag: &Dag,
    config: &EngineConfig,
    seed: u64,
    observer: &mut O,
) -> Result<(Schedule, PhaseLog), EngineError> {
    config.check()?;
    let mut last = None;
    for attempt in 0..=config.max_reseeds {
        let run_seed = if attempt == 0 { seed } else { derive_seed(seed, &[STREAM_RESEED, attempt as u64]) };
        match run_phases(dag, config, run_seed, observer) {
            Ok((schedule, mut log)) => {
                log.reseeds = attempt;
                return Ok((schedule, log));
            }
            Err(RunError::Batch(e @ BatchError::PreconditionViolated { .. })) => last = Some(e),
            Err(RunError::Batch(BatchError::Sketch(e))) | Err(RunError::Sketch(e)) => return Err(e.into()),
            Err(RunError::Engine(e)) => return Err(e),
        }
    }
    Err(EngineError::ReseedLimit { attempts: config.max_reseeds + 1, last: last.expect("at least one attempt") })
}

enum RunError {
    Batch(BatchError),
    Sketch(SketchError),
    Engine(EngineError),
}

fn run_phases<O: BatchObserver + ?Sized>(
    dag: &Dag,
    config: &EngineConfig,
    seed: u64,
    observer: &mut O,
) -> Result<(Schedule, PhaseLog), RunError> {
    let n = dag.vertex_count();
    let params = config.batch_params(n).map_err(RunError::Engine)?;
    let cutoff = 4.0 * config.rho as f64 / 3.0;

    let mut residual = SubgraphView::full(dag);
    let mut small = SubgraphView::empty(dag);
    let mut explorer = AncestryExplorer::new(n);
    // Unmarked live predecessors; reaching zero makes a vertex eligible.
    let mut waiting: Vec<u32> = (0..n as Vertex).map(|v| dag.preds(v).len() as u32).collect();
    let mut sources: Vec<Vertex> = dag.topo_order().iter().copied().filter(|&v| waiting[v as usize] == 0).collect();

    let mut schedule = Schedule::new(config.machines);
    let mut log =
        PhaseLog { machines: config.machines, rho: config.rho, gamma: params.gamma, phases: Vec::new(), reseeds: 0 };
    let mut time_base = 0u64;

    while !residual.is_empty() {
        let phase = log.phases.len() as u64;
        let spec = HashFamilySpec::new(n as u64, &config.sketch, derive_seed(seed, &[STREAM_PEEL, phase]))
            .map_err(RunError::Sketch)?;

        let mut queue: VecDeque<Vertex> = sources.drain(..).collect();
        let mut sketches: HashMap<Vertex, (CardinalitySketch<'_>, u32)> = HashMap::new();
        let mut members = Vec::new();
        while let Some(v) = queue.pop_front() {
            let mut sketch = CardinalitySketch::new(&spec);
            sketch.insert(v as u64).expect("vertex id inside universe");
            for (u, _) in residual.live_preds(v) {
                let (pred, pending) = sketches.get_mut(&u).expect("eligible vertex has marked predecessors");
                sketch.merge_from(pred).expect("shared family");
                *pending -= 1;
                if *pending == 0 {
                    sketches.remove(&u);
                }
            }
            if sketch.estimate() <= cutoff {
                members.push(v);
                let mut consumers = 0;
                for (w, _) in residual.live_succs(v) {
                    consumers += 1;
                    let slot = &mut waiting[w as usize];
                    *slot -= 1;
                    if *slot == 0 {
                        queue.push_back(w);
                    }
                }
                if consumers > 0 {
                    sketches.insert(v, (sketch, consumers));
                }
            } else {
                sources.push(v);
            }
        }
        drop(sketches);

        small.reassign(members.iter().copied());
        let (vertices, edges) = (small.live_vertex_count(), small.live_edge_count());
        let outcome = schedule_small_subgraph(
            &mut small,
            &mut explorer,
            &params,
            config.machines,
            derive_seed(seed, &[STREAM_BATCH, phase]),
            time_base,
            &mut schedule.entries,
            observer,
        )
        .map_err(RunError::Batch)?;
        log.phases.push(PhaseRecord { members: Vec::new(), vertices, edges, start: time_base, finish: outcome.finish, batches: outcome.batches });

        residual.remove_all(&members);
        if !residual.is_empty() {
            time_base = outcome.finish + config.rho;
        }
        log.phases.last_mut().expect("phase just pushed").members = members;
        // Rejected vertices had every live predecessor in this phase, so they
        // are exactly the sources of the next residual graph.
        sources.sort_unstable_by_key(|&v| dag.topo_rank(v));
    }
    schedule.normalize();
    Ok((schedule, log))
}
