//! Feasibility checking of duplication-allowing schedules.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dag::{Dag, Vertex};
use crate::schedule::{Entry, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// Two copies occupy the same machine slot.
    MachineConflict,
    /// A copy has no predecessor copy that finished in time on its machine or
    /// elsewhere, and a local predecessor copy exists but finishes too late.
    PrecedenceSameMachine,
    /// A copy relies on a remote predecessor copy that finishes less than
    /// `rho` slots before it starts.
    PrecedenceCrossMachine,
    /// A job has no copy, or a copy names an unknown job or machine.
    MissingJob,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub entries: Vec<Entry>,
    pub detail: String,
}

/// Earliest finish of a copy of each job, overall and per machine.
struct Finishes {
    global: Vec<Option<u64>>,
    // Sorted (job, machine, earliest finish).
    local: Vec<(Vertex, u32, u64)>,
}

impl Finishes {
    fn copies(&self, job: Vertex) -> &[(Vertex, u32, u64)] {
        let lo = self.local.partition_point(|&(j, _, _)| j < job);
        let hi = self.local.partition_point(|&(j, _, _)| j <= job);
        &self.local[lo..hi]
    }

    fn local(&self, job: Vertex, machine: u32) -> Option<u64> {
        self.local.binary_search_by(|&(j, m, _)| (j, m).cmp(&(job, machine))).ok().map(|i| self.local[i].2)
    }
}

/// Every violation of feasibility under delay `rho`; empty iff `schedule` is
/// feasible and complete.
///
/// Copy `(m, v, t)` is satisfied for predecessor `u` if some copy of `u` runs
/// on `m` and finishes by `t`, or runs elsewhere and finishes by `t - rho`.
pub fn validate(dag: &Dag, schedule: &Schedule, rho: u64) -> Vec<Violation> {
    let n = dag.vertex_count();
    let mut out = Vec::new();

    let mut entries = schedule.entries.clone();
    entries.sort_unstable();
    for pair in entries.windows(2) {
        if pair[0].machine == pair[1].machine && pair[0].start == pair[1].start {
            out.push(Violation {
                kind: ViolationKind::MachineConflict,
                entries: pair.to_vec(),
                detail: format!("machine {} runs two jobs at time {}", pair[0].machine, pair[0].start),
            });
        }
    }

    let mut global = vec![None; n];
    let mut local = Vec::with_capacity(entries.len());
    for e in &entries {
        if e.job as usize >= n || e.machine >= schedule.machines {
            out.push(Violation {
                kind: ViolationKind::MissingJob,
                entries: vec![*e],
                detail: format!("job {} on machine {} is outside the instance", e.job, e.machine),
            });
            continue;
        }
        let f = e.start + 1;
        let g: &mut Option<u64> = &mut global[e.job as usize];
        *g = Some(g.map_or(f, |x: u64| x.min(f)));
        local.push((e.job, e.machine, f));
    }
    local.sort_unstable();
    local.dedup_by(|b, a| a.0 == b.0 && a.1 == b.1);
    let finishes = Finishes { global, local };

    for (v, f) in finishes.global.iter().enumerate() {
        if f.is_none() {
            out.push(Violation {
                kind: ViolationKind::MissingJob,
                entries: Vec::new(),
                detail: format!("job {v} is never scheduled"),
            });
        }
    }

    for e in &entries {
        if e.job as usize >= n || e.machine >= schedule.machines {
            continue;
        }
        for &(u, _) in dag.preds(e.job) {
            let here = finishes.local(u, e.machine);
            if here.is_some_and(|f| f <= e.start) {
                continue;
            }
            let Some(anywhere) = finishes.global[u as usize] else {
                // Reported as missing already.
                continue;
            };
            // Cheapest remote copy: the earliest finish on another machine.
            let remote = finishes
                .copies(u)
                .iter()
                .filter(|&&(_, m, _)| m != e.machine)
                .map(|&(_, _, f)| f)
                .min();
            if remote.is_some_and(|f| f + rho <= e.start) {
                continue;
            }
            let (kind, detail) = match (here, remote) {
                (Some(f), _) => (
                    ViolationKind::PrecedenceSameMachine,
                    format!("job {} starts at {} on machine {} before its predecessor {u} finishes there at {f}", e.job, e.start, e.machine),
                ),
                (None, _) => (
                    ViolationKind::PrecedenceCrossMachine,
                    format!(
                        "job {} starts at {} on machine {} but predecessor {u} finishes remotely at {anywhere}, delay {rho}",
                        e.job, e.start, e.machine
                    ),
                ),
            };
            out.push(Violation { kind, entries: vec![*e], detail });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Dag {
        Dag::from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn sched(machines: u32, entries: &[(u32, Vertex, u64)]) -> Schedule {
        Schedule { machines, entries: entries.iter().map(|&(m, v, t)| Entry::new(m, v, t)).collect() }
    }

    #[test]
    fn sequential_diamond_is_feasible() {
        let s = sched(1, &[(0, 0, 0), (0, 1, 1), (0, 2, 2), (0, 3, 3)]);
        assert!(validate(&diamond(), &s, 5).is_empty());
    }

    #[test]
    fn duplicated_source_is_feasible() {
        let s = sched(2, &[(0, 0, 0), (0, 1, 1), (1, 0, 0), (1, 2, 1), (0, 3, 4)]);
        assert!(validate(&diamond(), &s, 2).is_empty());
        // With delay 3 the remote copy of 2 (finish 2) arrives at 5.
        let v = validate(&diamond(), &s, 3);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::PrecedenceCrossMachine);
    }

    #[test]
    fn same_machine_too_early() {
        let s = sched(1, &[(0, 0, 0), (0, 1, 1), (0, 2, 3), (0, 3, 2)]);
        let v = validate(&diamond(), &s, 2);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::PrecedenceSameMachine);
    }

    #[test]
    fn conflict_and_missing() {
        let s = sched(1, &[(0, 0, 0), (0, 1, 1), (0, 2, 1)]);
        let kinds: Vec<ViolationKind> = validate(&diamond(), &s, 2).iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::MachineConflict));
        assert!(kinds.contains(&ViolationKind::MissingJob));
    }

    #[test]
    fn out_of_range_machine() {
        let g = Dag::from_edges(1, []).unwrap();
        let v = validate(&g, &sched(1, &[(3, 0, 0)]), 2);
        assert!(v.iter().all(|x| x.kind == ViolationKind::MissingJob));
        assert_eq!(v.len(), 2);
    }
}
