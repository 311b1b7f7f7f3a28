//! Schedules and list scheduling of duplicated ancestor sets.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::batching::Batch;
use crate::dag::Vertex;

/// One job copy: `job` runs on `machine` during slot `[start, start + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entry {
    pub machine: u32,
    pub start: u64,
    pub job: Vertex,
}

impl Entry {
    pub fn new(machine: u32, job: Vertex, start: u64) -> Self {
        Self { machine, start, job }
    }
}

/// A duplication-allowing schedule on `machines` identical machines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub machines: u32,
    pub entries: Vec<Entry>,
}

impl Schedule {
    pub fn new(machines: u32) -> Self {
        Self { machines, entries: Vec::new() }
    }

    /// Completion time of the last copy; 0 for an empty schedule.
    pub fn makespan(&self) -> u64 {
        self.entries.iter().map(|e| e.start + 1).max().unwrap_or(0)
    }

    /// Sorts entries by `(machine, start)`.
    pub fn normalize(&mut self) {
        self.entries.sort_unstable();
    }
}

/// Greedy list scheduling of independent chains on identical machines.
///
/// Each chain goes, in order, to the machine with the smallest current load
/// (ties to the lowest index). All machines start at `time_base`.
/// Returns the batch finish time.
pub fn list_schedule<'a, I>(chains: I, machines: u32, time_base: u64, out: &mut Vec<Entry>) -> u64
where
    I: IntoIterator<Item = &'a [Vertex]>,
{
    assert!(machines >= 1, "need at least one machine");
    let mut finish = time_base;
    let mut place = |machine: u32, load: u64, chain: &[Vertex], out: &mut Vec<Entry>| {
        for (k, &v) in chain.iter().enumerate() {
            out.push(Entry::new(machine, v, time_base + load + k as u64));
        }
        let end = load + chain.len() as u64;
        finish = finish.max(time_base + end);
        end
    };

    let mut chains = chains.into_iter();
    // While idle machines remain, the least-loaded one is the next index.
    let mut heap = BinaryHeap::new();
    for machine in 0..machines {
        let Some(chain) = chains.next() else { return finish };
        let end = place(machine, 0, chain, out);
        heap.push(Reverse((end, machine)));
    }
    for chain in chains {
        let Reverse((load, machine)) = heap.pop().expect("at least one machine");
        let end = place(machine, load, chain, out);
        heap.push(Reverse((end, machine)));
    }
    finish
}

/// List-schedules every root's full ancestor set of `batch` as one chain,
/// duplicating shared ancestors. Returns the batch finish time.
pub fn list_schedule_batch(batch: &Batch, machines: u32, time_base: u64, out: &mut Vec<Entry>) -> u64 {
    list_schedule((0..batch.roots().len()).map(|i| batch.root_ancestry(i)), machines, time_base, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn more_machines_than_jobs() {
        let jobs: Vec<Vec<Vertex>> = (0..5).map(|v| vec![v]).collect();
        let mut out = Vec::new();
        let finish = list_schedule(jobs.iter().map(Vec::as_slice), 8, 0, &mut out);
        assert_eq!(finish, 1);
        let machines: Vec<u32> = out.iter().map(|e| e.machine).collect();
        assert_eq!(machines, vec![0, 1, 2, 3, 4]);
        assert!(out.iter().all(|e| e.start == 0));
    }

    #[test]
    fn graham_on_three_equal_jobs() {
        // Loads go 3 | 3, then the third chain lands on machine 0 (tie to
        // the lowest index): finish 6 <= 9/2 + 3.
        let jobs = [vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]];
        let mut out = Vec::new();
        let finish = list_schedule(jobs.iter().map(Vec::as_slice), 2, 10, &mut out);
        assert_eq!(finish, 16);
        assert!((finish - 10) as f64 <= 9.0 / 2.0 + 3.0);
        let m0: Vec<(u64, Vertex)> = out.iter().filter(|e| e.machine == 0).map(|e| (e.start, e.job)).collect();
        assert_eq!(m0, vec![(10, 0), (11, 1), (12, 2), (13, 6), (14, 7), (15, 8)]);
    }

    #[test]
    fn empty_input_finishes_at_base() {
        let mut out = Vec::new();
        assert_eq!(list_schedule(core::iter::empty(), 3, 7, &mut out), 7);
        assert!(out.is_empty());
        assert_eq!(Schedule::new(3).makespan(), 0);
    }
}
