//! Reference scheduler using exact ancestor sets throughout.
//!
//! Phases peel every residual vertex with at most `peel_limit` exact
//! ancestors. Inside a phase each batch is built greedily: live vertices are
//! visited in decreasing order of ancestor-edge count (ties in random order)
//! and every fresh one becomes a root. There is no sampling and no pruning.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ancestry::AncestryExplorer;
use crate::batching::{is_fresh, Batch};
use crate::dag::{Dag, Vertex};
use crate::engine::EngineError;
use crate::schedule::{list_schedule_batch, Schedule};
use crate::view::SubgraphView;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub machines: u32,
    pub rho: u64,
    pub gamma: f64,
    /// Largest exact ancestor count admitted to a phase; `2 rho` by default.
    pub peel_limit: usize,
}

impl BaselineConfig {
    pub fn new(machines: u32, rho: u64, gamma: f64) -> Self {
        Self { machines, rho, gamma, peel_limit: (2 * rho) as usize }
    }
}

/// Schedules `dag` with exact ancestries; feasible by construction.
pub fn baseline_lepere_rapine<R: Rng + ?Sized>(
    dag: &Dag,
    config: &BaselineConfig,
    rng: &mut R,
) -> Result<Schedule, EngineError> {
    if config.machines < 1 {
        return Err(EngineError::InvalidParams("need at least one machine"));
    }
    if config.rho < 2 {
        return Err(EngineError::InvalidParams("communication delay must be an integer > 1"));
    }
    if !(config.gamma > 0.0 && config.gamma < 0.25) {
        return Err(EngineError::InvalidParams("gamma must lie in (0, 1/4)"));
    }
    if config.peel_limit < 1 {
        return Err(EngineError::InvalidParams("peel limit must admit sources"));
    }

    let n = dag.vertex_count();
    let mut residual = SubgraphView::full(dag);
    let mut small = SubgraphView::empty(dag);
    let mut explorer = AncestryExplorer::new(n);
    let mut rejected = vec![false; n];
    let mut schedule = Schedule::new(config.machines);
    let mut time_base = 0u64;
    let none = Batch::new();

    while !residual.is_empty() {
        let mut members = Vec::new();
        let mut touched = Vec::new();
        for v in residual.live_vertices() {
            // Any rejected ancestor already puts v over the limit.
            let over = residual.live_preds(v).any(|(u, _)| rejected[u as usize])
                || explorer.ancestry_bounded(&residual, v, &none, config.peel_limit).is_none();
            if over {
                rejected[v as usize] = true;
                touched.push(v);
            } else {
                members.push(v);
            }
        }
        for v in touched {
            rejected[v as usize] = false;
        }

        small.reassign(members.iter().copied());
        while !small.is_empty() {
            let mut order: Vec<(usize, Vertex)> = small
                .live_vertices()
                .map(|v| (explorer.ancestry(&small, v, &none).edges.len(), v))
                .collect();
            order.shuffle(rng);
            order.sort_by_key(|&(edges, _)| core::cmp::Reverse(edges));

            let mut batch = Batch::new();
            for &(_, v) in &order {
                let anc = explorer.ancestry(&small, v, &batch);
                if is_fresh(&anc, config.gamma) {
                    batch.add_root(dag, v, &anc);
                }
            }
            let finish = list_schedule_batch(&batch, config.machines, time_base, &mut schedule.entries);
            small.remove_all(batch.ancestor_vertices());
            small.compact();
            time_base = finish + config.rho;
        }
        residual.remove_all(&members);
    }
    schedule.normalize();
    Ok(schedule)
}
