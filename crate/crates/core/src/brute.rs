//! Exact optimum for tiny instances by breadth-first search over time.
//!
//! A state at a slot boundary records, per machine, the set of jobs that have
//! a copy there, and per job the time since its earliest copy finished
//! (capped at `rho`, after which the job is usable everywhere). Machines are
//! interchangeable, so their sets are kept sorted. A state reached again at a
//! later time is dominated and skipped.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashSet;
use thiserror::Error;

use crate::dag::Dag;

pub const MAX_JOBS: usize = 8;
pub const MAX_MACHINES: u32 = 3;
pub const MAX_RHO: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BruteError {
    #[error("instance too large for exhaustive search: n = {n}, M = {machines}, rho = {rho}")]
    InstanceTooLarge { n: usize, machines: u32, rho: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("no complete schedule within horizon {0}")]
    HorizonExceeded(u64),
}

const NOT_DONE: u64 = 7;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    masks: [u8; MAX_MACHINES as usize],
    ages: [u8; MAX_JOBS],
}

/// Minimum makespan over all feasible duplication-allowing schedules.
///
/// `horizon` defaults to `n + n * rho`.
pub fn brute_force_opt(dag: &Dag, machines: u32, rho: u64, horizon: Option<u64>) -> Result<u64, BruteError> {
    let n = dag.vertex_count();
    if n > MAX_JOBS || machines > MAX_MACHINES || rho > MAX_RHO {
        return Err(BruteError::InstanceTooLarge { n, machines, rho });
    }
    if machines < 1 {
        return Err(BruteError::InvalidParams("need at least one machine"));
    }
    if n == 0 {
        return Ok(0);
    }
    let horizon = horizon.unwrap_or(n as u64 + n as u64 * rho);
    let m = machines as usize;
    let pred_mask: Vec<u8> = (0..n as u32).map(|v| dag.preds(v).iter().fold(0u8, |a, &(u, _)| a | 1 << u)).collect();

    let start = State { masks: [0; 3], ages: [NOT_DONE as u8; MAX_JOBS] };
    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(start);
    let mut layer = vec![start];
    let mut choices: Vec<Vec<Option<usize>>> = vec![Vec::new(); m];

    for t in 0..horizon {
        let mut next = Vec::new();
        for state in &layer {
            let remote = (0..n).filter(|&j| state.ages[j] as u64 >= rho && state.ages[j] as u64 != NOT_DONE).fold(0u8, |a, j| a | 1 << j);
            for (k, opts) in choices.iter_mut().enumerate() {
                opts.clear();
                opts.push(None);
                let usable = state.masks[k] | remote;
                for (j, &preds) in pred_mask.iter().enumerate() {
                    if usable & (1 << j) == 0 && preds & !usable == 0 {
                        opts.push(Some(j));
                    }
                }
            }
            let mut pick = vec![0usize; m];
            loop {
                let mut succ = *state;
                for k in 0..n {
                    if succ.ages[k] as u64 != NOT_DONE {
                        succ.ages[k] = (succ.ages[k] + 1).min(rho as u8);
                    }
                }
                for k in 0..m {
                    if let Some(j) = choices[k][pick[k]] {
                        succ.masks[k] |= 1 << j;
                        if state.ages[j] as u64 == NOT_DONE {
                            succ.ages[j] = 0;
                        }
                    }
                }
                if succ.ages[..n].iter().all(|&a| a as u64 != NOT_DONE) {
                    return Ok(t + 1);
                }
                succ.masks[..m].sort_unstable();
                if seen.insert(succ) {
                    next.push(succ);
                }
                // Odometer over the per-machine choices.
                let mut k = 0;
                while k < m {
                    pick[k] += 1;
                    if pick[k] < choices[k].len() {
                        break;
                    }
                    pick[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
        }
        layer = next;
    }
    Err(BruteError::HorizonExceeded(horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_dag, DagShape};

    #[test]
    fn single_vertex() {
        let g = Dag::from_edges(1, []).unwrap();
        for m in 1..=3 {
            for rho in 0..=3 {
                assert_eq!(brute_force_opt(&g, m, rho, None), Ok(1));
            }
        }
    }

    #[test]
    fn chain_of_three_stays_on_one_machine() {
        let g = generate_dag(&DagShape::Chain { n: 3 }, 0).unwrap();
        assert_eq!(brute_force_opt(&g, 2, 2, None), Ok(3));
    }

    #[test]
    fn diamond_with_unit_delay() {
        // 0 on both machines at 0, then 1 and 2 in parallel at 1, then 3 must
        // wait for the remote copy: it finishes at 2, usable at 3, so OPT = 4.
        // Serial also gives 4.
        let g = Dag::from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(brute_force_opt(&g, 2, 1, None), Ok(4));
        assert_eq!(brute_force_opt(&g, 2, 0, None), Ok(3));
    }

    #[test]
    fn one_machine_is_serial() {
        let g = generate_dag(&DagShape::ErDag { n: 7, p: 0.3 }, 4).unwrap();
        assert_eq!(brute_force_opt(&g, 1, 3, None), Ok(7));
    }

    #[test]
    fn antichain_spreads() {
        let g = generate_dag(&DagShape::Antichain { n: 7 }, 0).unwrap();
        assert_eq!(brute_force_opt(&g, 3, 3, None), Ok(3));
    }

    #[test]
    fn duplication_helps_fork() {
        // Source 0 with six children on 3 machines, rho = 3: duplicating 0 on
        // every machine finishes at 3 instead of 1 + 6 serially.
        let g = Dag::from_edges(7, (1..7).map(|c| (0, c))).unwrap();
        assert_eq!(brute_force_opt(&g, 3, 3, None), Ok(3));
    }

    #[test]
    fn too_large() {
        let g = generate_dag(&DagShape::Antichain { n: 9 }, 0).unwrap();
        assert!(matches!(brute_force_opt(&g, 2, 2, None), Err(BruteError::InstanceTooLarge { .. })));
        let g = generate_dag(&DagShape::Antichain { n: 2 }, 0).unwrap();
        assert!(brute_force_opt(&g, 4, 2, None).is_err());
        assert!(brute_force_opt(&g, 2, 4, None).is_err());
    }
}
