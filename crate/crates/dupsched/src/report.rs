//! Machine-readable run reports.

use std::fmt::Write as _;
use std::time::Duration;

use dupsched_core::ancestry::AncestryExplorer;
use dupsched_core::batching::Batch;
use dupsched_core::engine::{batch_count_bound, subgraph_makespan_bound, PhaseLog};
use dupsched_core::estimation::estimate_ancestry;
use dupsched_core::seed::{derive_seed, STREAM_ESTIMATE};
use dupsched_core::sketch::{HashFamilySpec, SketchError, SketchParams};
use dupsched_core::{Dag, Schedule, SubgraphView};
use serde_json::{json, Value};

/// Phase log as JSON. Wall time is included only when given, so reports stay
/// reproducible by default.
pub fn phase_log_json(dag: &Dag, schedule: &Schedule, log: &PhaseLog, seed: u64, wall: Option<Duration>) -> Value {
    let n = dag.vertex_count();
    let phases: Vec<Value> = log
        .phases
        .iter()
        .map(|p| {
            json!({
                "vertices": p.vertices,
                "edges": p.edges,
                "start": p.start,
                "finish": p.finish,
                "batches": p.batches.len(),
                "makespan_bound": subgraph_makespan_bound(p.vertices, log.machines, log.rho, log.gamma),
                "batches_detail": p.batches.iter().map(|b| json!({
                    "roots": b.roots,
                    "root_vertex_total": b.root_vertex_total,
                    "root_edge_total": b.root_edge_total,
                    "ancestor_vertices": b.ancestor_vertices,
                    "ancestor_edges": b.ancestor_edges,
                    "time_base": b.time_base,
                    "finish": b.finish,
                    "rounds": b.rounds.len(),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut out = json!({
        "vertices": n,
        "edges": dag.edge_count(),
        "machines": log.machines,
        "rho": log.rho,
        "gamma": log.gamma,
        "seed": seed,
        "makespan": schedule.makespan(),
        "entries": schedule.entries.len(),
        "phases": log.phase_count(),
        "batches": log.batch_count(),
        "batch_bound_per_phase": batch_count_bound(log.rho, log.gamma),
        "makespan_bound": log.makespan_bound(n),
        "lower_bound": n.div_ceil(log.machines as usize),
        "reseeds": log.reseeds,
        "phase_detail": phases,
    });
    if let Some(wall) = wall {
        out["wall_time_ms"] = json!(wall.as_secs_f64() * 1e3);
    }
    out
}

/// Per-round sampling counters of every batch search.
pub fn round_trace_csv(log: &PhaseLog) -> String {
    let mut out = String::from("phase,batch,round,sampled,fresh,stale,pruned\n");
    for (p, phase) in log.phases.iter().enumerate() {
        for (b, batch) in phase.batches.iter().enumerate() {
            for (r, t) in batch.rounds.iter().enumerate() {
                writeln!(out, "{p},{b},{r},{},{},{},{}", t.sampled, t.fresh, t.stale, t.pruned).unwrap();
            }
        }
    }
    out
}

/// Ancestor-count estimates for every vertex, optionally beside the exact
/// counts.
pub fn estimate_csv(dag: &Dag, params: &SketchParams, seed: u64, with_exact: bool) -> Result<String, SketchError> {
    let view = SubgraphView::full(dag);
    let spec_v = HashFamilySpec::new(dag.vertex_count() as u64, params, derive_seed(seed, &[STREAM_ESTIMATE, 0]))?;
    let spec_e = HashFamilySpec::new(dag.edge_count() as u64, params, derive_seed(seed, &[STREAM_ESTIMATE, 1]))?;
    let est = estimate_ancestry(&view, &spec_v, &spec_e);
    let mut out = String::new();
    if with_exact {
        out.push_str("vertex,exact_V,est_V,exact_E,est_E\n");
        let mut explorer = AncestryExplorer::new(dag.vertex_count());
        let none = Batch::new();
        for v in 0..dag.vertex_count() as u32 {
            let (ev, ee) = est.get(&view, v);
            let a = explorer.ancestry(&view, v, &none);
            writeln!(out, "{v},{},{ev},{},{ee}", a.vertices.len(), a.edges.len()).unwrap();
        }
    } else {
        out.push_str("vertex,est_V,est_E\n");
        for v in 0..dag.vertex_count() as u32 {
            let (ev, ee) = est.get(&view, v);
            writeln!(out, "{v},{ev},{ee}").unwrap();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dupsched_core::engine::{schedule_general, EngineConfig};
    use dupsched_core::generate::{generate_dag, DagShape};

    #[test]
    fn short_chain_estimates_are_exact() {
        let g = generate_dag(&DagShape::Chain { n: 20 }, 0).unwrap();
        let csv = estimate_csv(&g, &SketchParams::default(), 3, true).unwrap();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "vertex,exact_V,est_V,exact_E,est_E");
        assert_eq!(rows.len(), 21);
        for row in &rows[1..] {
            let c: Vec<&str> = row.split(',').collect();
            assert_eq!(c[1], c[2]);
            assert_eq!(c[3], c[4]);
        }
        assert_eq!(rows[20], "19,20,20,19,19");
    }

    #[test]
    fn json_has_expected_fields() {
        let g = generate_dag(&DagShape::Layered { layers: 5, width: 6, p: 0.3 }, 1).unwrap();
        let (s, log) = schedule_general(&g, &EngineConfig::new(2, 4), 5).unwrap();
        let j = phase_log_json(&g, &s, &log, 5, None);
        assert_eq!(j["phases"], json!(log.phase_count()));
        assert_eq!(j["makespan"], json!(s.makespan()));
        assert!(j.get("wall_time_ms").is_none());
        assert!(phase_log_json(&g, &s, &log, 5, Some(Duration::from_millis(3))).get("wall_time_ms").is_some());
        let trace = round_trace_csv(&log);
        assert!(trace.lines().count() > log.batch_count());
    }
}
