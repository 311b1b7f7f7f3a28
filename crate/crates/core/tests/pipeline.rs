use std::collections::HashSet;

use dupsched_core::baseline::{baseline_lepere_rapine, BaselineConfig};
use dupsched_core::brute::brute_force_opt;
use dupsched_core::engine::{schedule_general, subgraph_makespan_bound, EngineConfig};
use dupsched_core::generate::{generate_dag, DagShape};
use dupsched_core::seed::{rng_for, STREAM_BASELINE};
use dupsched_core::validate::validate;
use dupsched_core::{Dag, Entry, Schedule, SubgraphView, Vertex};
use proptest::prelude::*;

/// Ancestors of `v` among the live vertices of `view`, by plain DFS.
fn ancestors(view: &SubgraphView<'_>, v: Vertex) -> HashSet<Vertex> {
    let mut seen = HashSet::from([v]);
    let mut stack = vec![v];
    while let Some(w) = stack.pop() {
        for &(u, _) in view.dag().preds(w) {
            if view.is_alive(u) && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    seen
}

#[test]
fn peeled_subgraphs_are_small() {
    let mut checked = 0;
    let mut over = 0;
    for seed in 0..12 {
        let g = generate_dag(&DagShape::Layered { layers: 30, width: 25, p: 0.12 }, seed).unwrap();
        for rho in [4, 16] {
            let (_, log) = schedule_general(&g, &EngineConfig::new(4, rho), seed).unwrap();
            for phase in &log.phases {
                let view = SubgraphView::with_members(&g, phase.members.iter().copied());
                for &v in &phase.members {
                    checked += 1;
                    if ancestors(&view, v).len() > 2 * rho as usize {
                        over += 1;
                    }
                }
            }
        }
    }
    assert_eq!(over, 0, "{over} of {checked} vertices exceed 2 rho ancestors");
}

#[test]
fn phases_partition_and_respect_their_bound() {
    let mut phases = 0;
    let mut within = 0;
    for seed in 0..10 {
        let g = generate_dag(&DagShape::ErDag { n: 400, p: 0.01 }, seed).unwrap();
        let (s, log) = schedule_general(&g, &EngineConfig::new(3, 8), seed).unwrap();
        let mut all: Vec<Vertex> = log.phases.iter().flat_map(|p| p.members.iter().copied()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..400).collect::<Vec<_>>());
        let mut prev_finish = None;
        for p in &log.phases {
            if let Some(f) = prev_finish {
                assert_eq!(p.start, f + 8, "phases are separated by exactly rho");
            }
            prev_finish = Some(p.finish);
            phases += 1;
            if (p.finish - p.start) as f64 <= subgraph_makespan_bound(p.vertices, 3, 8, log.gamma) {
                within += 1;
            }
        }
        assert_eq!(s.makespan(), prev_finish.unwrap());
    }
    assert!(within * 100 >= phases * 95);
}

// The baseline peels with the engine's cutoff so both face the same phases;
// with its default 2 rho limit it needs fewer phases on long chains.
#[test]
fn engine_and_baseline_agree_within_factor() {
    let shapes = [
        DagShape::Layered { layers: 20, width: 30, p: 0.1 },
        DagShape::ErDag { n: 800, p: 0.004 },
        DagShape::Chain { n: 300 },
        DagShape::Antichain { n: 500 },
        DagShape::Layered { layers: 40, width: 20, p: 0.05 },
    ];
    let mut worst = 1.0f64;
    for i in 0..30u64 {
        let shape = shapes[i as usize % shapes.len()];
        let g = generate_dag(&shape, i).unwrap();
        let rho = [4, 8, 16][i as usize % 3];
        let machines = [2, 4, 8][(i as usize / 3) % 3];
        let (engine, log) = schedule_general(&g, &EngineConfig::new(machines, rho), i).unwrap();
        let base = baseline_lepere_rapine(
            &g,
            &BaselineConfig { peel_limit: (4 * rho / 3) as usize, ..BaselineConfig::new(machines, rho, log.gamma) },
            &mut rng_for(i, &[STREAM_BASELINE]),
        )
        .unwrap();
        assert!(validate(&g, &base, rho).is_empty());
        let (a, b) = (engine.makespan() as f64, base.makespan() as f64);
        worst = worst.max(a / b).max(b / a);
        assert!(a <= 1.5 * b && b <= 1.5 * a, "instance {i} {shape:?}: engine {a}, baseline {b}");
    }
    eprintln!("worst engine/baseline ratio {worst:.3}");
}

#[test]
fn engine_never_beats_the_optimum() {
    let diamond = Dag::from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
    let opt = brute_force_opt(&diamond, 2, 2, None).unwrap();
    for seed in 0..20 {
        let (s, _) = schedule_general(&diamond, &EngineConfig::new(2, 2), seed).unwrap();
        assert!(s.makespan() >= opt);
    }
    let fork = Dag::from_edges(7, (1..7).map(|c| (0, c))).unwrap();
    for m in 1..=3 {
        let opt = brute_force_opt(&fork, m, 3, None).unwrap();
        assert!(opt >= 7u64.div_ceil(m as u64));
        let (s, _) = schedule_general(&fork, &EngineConfig::new(m, 3), 1).unwrap();
        assert!(s.makespan() >= opt);
    }
}

fn small_dag() -> impl Strategy<Value = Dag> {
    (1usize..40).prop_flat_map(|n| {
        proptest::collection::vec((0..n as u64, 0..n as u64), 0..3 * n).prop_map(move |pairs| {
            let mut edges: Vec<(u64, u64)> =
                pairs.into_iter().filter(|(u, v)| u != v).map(|(u, v)| (u.min(v), u.max(v))).collect();
            edges.sort_unstable();
            edges.dedup();
            Dag::from_edges(n, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn engine_schedules_are_feasible(g in small_dag(), m in 1u32..5, rho in 2u64..20, seed in any::<u64>()) {
        let (s, log) = schedule_general(&g, &EngineConfig::new(m, rho), seed).unwrap();
        prop_assert!(validate(&g, &s, rho).is_empty());
        prop_assert!(s.makespan() as usize >= g.vertex_count().div_ceil(m as usize));
        prop_assert!(s.makespan() as usize >= g.longest_path_len());
        prop_assert!(log.batches().all(|b| b.is_gamma_unique(log.gamma)));
    }

    #[test]
    fn validation_ignores_entry_order(g in small_dag(), rho in 2u64..6, seed in any::<u64>(), shift in any::<usize>()) {
        let (mut s, _) = schedule_general(&g, &EngineConfig::new(2, rho), seed).unwrap();
        let before = validate(&g, &s, rho);
        let k = shift % s.entries.len().max(1);
        s.entries.rotate_left(k);
        s.entries.reverse();
        prop_assert_eq!(before, validate(&g, &s, rho));
    }

    #[test]
    fn delaying_a_sink_copy_keeps_feasibility(g in small_dag(), rho in 2u64..6, seed in any::<u64>()) {
        let (s, _) = schedule_general(&g, &EngineConfig::new(3, rho), seed).unwrap();
        let end = s.makespan();
        let mut moved = s.clone();
        for e in moved.entries.iter_mut() {
            if g.succs(e.job).is_empty() && e.start + 1 == end {
                *e = Entry::new(e.machine, e.job, end + rho);
            }
        }
        prop_assert!(validate(&g, &moved, rho).is_empty());
        let dropped = Schedule { machines: 3, entries: s.entries.iter().copied().filter(|e| e.job != 0).collect() };
        prop_assert!(!validate(&g, &dropped, rho).is_empty());
    }
}
