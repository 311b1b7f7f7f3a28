//! Scaling benchmark over a ladder of edge counts.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use dupsched_core::engine::{schedule_general, EngineConfig, EngineError};
use dupsched_core::generate::{generate_dag, DagShape};
use dupsched_core::Dag;

pub const DEFAULT_LADDER: [usize; 4] = [10_000, 20_000, 40_000, 80_000];

const WIDTH: usize = 64;
const MEAN_IN_DEGREE: f64 = 4.0;

/// Layered instance with about `target_edges` edges: width 64, expected
/// in-degree 4 between consecutive layers.
pub fn ladder_instance(target_edges: usize, seed: u64) -> Dag {
    let per_gap = WIDTH as f64 * MEAN_IN_DEGREE;
    let layers = (target_edges as f64 / per_gap).round() as usize + 1;
    generate_dag(&DagShape::Layered { layers, width: WIDTH, p: MEAN_IN_DEGREE / WIDTH as f64 }, seed)
        .expect("valid ladder parameters")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub target_edges: usize,
    pub vertices: usize,
    pub edges: usize,
    pub seed: u64,
    /// Median over repetitions.
    pub wall: Duration,
    pub makespan: u64,
    pub bound: f64,
    pub phases: usize,
    pub batches: usize,
}

impl BenchRow {
    pub fn within_bound(&self) -> bool {
        self.makespan as f64 <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of ln(median wall time) against ln(edges).
    pub slope: f64,
}

impl BenchReport {
    pub fn bound_rate(&self) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        self.rows.iter().filter(|r| r.within_bound()).count() as f64 / self.rows.len() as f64
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("target_edges,vertices,edges,seed,wall_ms,makespan,bound,makespan_over_bound,phases,batches\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{:.3},{},{:.3},{:.4},{},{}",
                r.target_edges,
                r.vertices,
                r.edges,
                r.seed,
                r.wall.as_secs_f64() * 1e3,
                r.makespan,
                r.bound,
                r.makespan as f64 / r.bound,
                r.phases,
                r.batches
            )
            .unwrap();
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "runs: {}\nlog-log slope of wall time vs edges: {:.3}\nmakespan within bound: {:.1}%\n",
            self.rows.len(),
            self.slope,
            100.0 * self.bound_rate()
        )
    }
}

/// Ordinary least squares slope of `ln y` on `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Runs the engine `repetitions` times per (size, seed) pair.
pub fn run_bench(config: &EngineConfig, sizes: &[usize], seeds: &[u64], repetitions: usize) -> Result<BenchReport, EngineError> {
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &target in sizes {
        let mut per_size = Vec::new();
        for &seed in seeds {
            let dag = ladder_instance(target, seed);
            let mut times = Vec::new();
            let mut last = None;
            for _ in 0..repetitions.max(1) {
                let t0 = Instant::now();
                let result = schedule_general(&dag, config, seed)?;
                times.push(t0.elapsed());
                last = Some(result);
            }
            let (schedule, log) = last.expect("at least one repetition");
            let wall = median(times);
            per_size.push(wall);
            rows.push(BenchRow {
                target_edges: target,
                vertices: dag.vertex_count(),
                edges: dag.edge_count(),
                seed,
                wall,
                makespan: schedule.makespan(),
                bound: log.makespan_bound(dag.vertex_count()),
                phases: log.phase_count(),
                batches: log.batch_count(),
            });
        }
        let edges = rows.iter().rev().take(seeds.len()).map(|r| r.edges as f64).sum::<f64>() / seeds.len() as f64;
        points.push((edges, median(per_size).as_secs_f64().max(1e-9)));
    }
    let slope = if points.len() >= 2 { log_log_slope(&points) } else { f64::NAN };
    Ok(BenchReport { rows, slope })
}
