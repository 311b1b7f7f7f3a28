//! Edge-list and schedule text formats.
//!
//! A graph file starts with `n m` and is followed by `m` lines `u v`, one per
//! edge `u -> v`. A schedule file starts with `M rho makespan` and is followed
//! by one `machine vertex start` line per job copy, sorted by machine and
//! start time. Blank lines are ignored in both.

use std::fmt::Write as _;

use dupsched_core::{Dag, DagError, Entry, Schedule, Vertex};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagParseError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("graph contains a cycle through vertex {vertex}")]
    CycleDetected { vertex: Vertex },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ScheduleParseError {
    pub line: usize,
    pub reason: String,
}

/// Non-blank lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn fields<const K: usize>(line: &str) -> Result<[u64; K], String> {
    let mut out = [0u64; K];
    let mut it = line.split_whitespace();
    for slot in out.iter_mut() {
        let tok = it.next().ok_or_else(|| format!("expected {K} integers, got {line:?}"))?;
        *slot = tok.parse().map_err(|_| format!("{tok:?} is not a non-negative integer"))?;
    }
    if it.next().is_some() {
        return Err(format!("expected {K} integers, got {line:?}"));
    }
    Ok(out)
}

pub fn parse_dag(text: &str) -> Result<Dag, DagParseError> {
    let mut it = lines(text);
    let (hline, header) = it.next().ok_or(DagParseError::Format { line: 1, reason: "missing \"n m\" header".into() })?;
    let [n, m] = fields::<2>(header).map_err(|reason| DagParseError::Format { line: hline, reason })?;
    let mut edges = Vec::with_capacity(m.min(1 << 24) as usize);
    let mut line_of = Vec::with_capacity(edges.capacity());
    for (line, l) in it {
        let [u, v] = fields::<2>(l).map_err(|reason| DagParseError::Format { line, reason })?;
        edges.push((u, v));
        line_of.push(line);
    }
    if edges.len() as u64 != m {
        return Err(DagParseError::Format { line: hline, reason: format!("header declares {m} edges, found {}", edges.len()) });
    }
    let n = usize::try_from(n).map_err(|_| DagParseError::Format { line: hline, reason: "vertex count too large".into() })?;
    Dag::from_edges(n, edges).map_err(|e| match e {
        DagError::CycleDetected { vertex } => DagParseError::CycleDetected { vertex },
        DagError::VertexOutOfRange { index, .. } | DagError::SelfLoop { index, .. } | DagError::DuplicateEdge { index, .. } => {
            DagParseError::Format { line: line_of[index], reason: e.to_string() }
        }
        DagError::TooLarge(_) => DagParseError::Format { line: hline, reason: e.to_string() },
    })
}

/// Canonical form: edges sorted by `(source, target)`.
pub fn write_dag(dag: &Dag) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", dag.vertex_count(), dag.edge_count()).unwrap();
    for (u, v) in dag.sorted_edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn write_schedule(schedule: &Schedule, rho: u64) -> String {
    let mut entries = schedule.entries.clone();
    entries.sort_unstable();
    let mut out = String::new();
    writeln!(out, "{} {} {}", schedule.machines, rho, schedule.makespan()).unwrap();
    for e in entries {
        writeln!(out, "{} {} {}", e.machine, e.job, e.start).unwrap();
    }
    out
}

/// A parsed schedule file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleFile {
    pub schedule: Schedule,
    pub rho: u64,
    /// Makespan stated in the header.
    pub makespan: u64,
}

pub fn parse_schedule(text: &str) -> Result<ScheduleFile, ScheduleParseError> {
    let mut it = lines(text);
    let (hline, header) =
        it.next().ok_or(ScheduleParseError { line: 1, reason: "missing \"M rho makespan\" header".into() })?;
    let [machines, rho, makespan] = fields::<3>(header).map_err(|reason| ScheduleParseError { line: hline, reason })?;
    let machines = u32::try_from(machines).map_err(|_| ScheduleParseError { line: hline, reason: "too many machines".into() })?;
    let mut schedule = Schedule::new(machines);
    for (line, l) in it {
        let [m, v, t] = fields::<3>(l).map_err(|reason| ScheduleParseError { line, reason })?;
        let (Ok(m), Ok(v)) = (u32::try_from(m), Vertex::try_from(v)) else {
            return Err(ScheduleParseError { line, reason: "machine or vertex id out of range".into() });
        };
        schedule.entries.push(Entry::new(m, v, t));
    }
    if schedule.makespan() != makespan {
        return Err(ScheduleParseError {
            line: hline,
            reason: format!("header makespan {makespan} disagrees with entries ({})", schedule.makespan()),
        });
    }
    Ok(ScheduleFile { schedule, rho, makespan })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_chain() {
        let g = parse_dag("3 2\n0 1\n1 2").unwrap();
        assert_eq!(g.topo_order(), &[0, 1, 2]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn single_vertex() {
        let g = parse_dag("1 0\n").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
    }

    #[test]
    fn rejects_cycle() {
        assert!(matches!(parse_dag("2 2\n0 1\n1 0"), Err(DagParseError::CycleDetected { .. })));
    }

    #[test]
    fn format_errors_carry_line_numbers() {
        let cases = [
            ("", 1),
            ("2 1\n0 x", 2),
            ("2 1\n0 1 2", 2),
            ("2 1\n0 5", 2),
            ("2 2\n0 1\n\n0 1", 4),
            ("2 1\n1 1", 2),
            ("2 2\n0 1", 1),
        ];
        for (text, line) in cases {
            match parse_dag(text) {
                Err(DagParseError::Format { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn canonical_roundtrip() {
        let g = parse_dag("4 3\n2 3\n0 2\n0 1\n").unwrap();
        let text = write_dag(&g);
        assert_eq!(text, "4 3\n0 1\n0 2\n2 3\n");
        assert_eq!(write_dag(&parse_dag(&text).unwrap()), text);
    }

    #[test]
    fn schedule_roundtrip() {
        let s = Schedule { machines: 2, entries: vec![Entry::new(1, 3, 4), Entry::new(0, 0, 0), Entry::new(0, 1, 1)] };
        let text = write_schedule(&s, 3);
        assert_eq!(text, "2 3 5\n0 0 0\n0 1 1\n1 3 4\n");
        let back = parse_schedule(&text).unwrap();
        assert_eq!(back.rho, 3);
        assert_eq!(back.makespan, 5);
        assert_eq!(write_schedule(&back.schedule, back.rho), text);
    }

    #[test]
    fn schedule_header_must_match() {
        assert!(parse_schedule("1 2 9\n0 0 0\n").is_err());
        assert!(parse_schedule("1 2\n").is_err());
    }
}
