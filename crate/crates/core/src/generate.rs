//! Seeded instance generators.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dag::{Dag, DagError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DagShape {
    /// Path `0 -> 1 -> ... -> n-1`.
    Chain { n: usize },
    /// `n` isolated vertices.
    Antichain { n: usize },
    /// `layers` layers of `width` vertices (ids layer-major); every pair of
    /// vertices in consecutive layers is joined with probability `p`.
    Layered { layers: usize, width: usize, p: f64 },
    /// Erdős–Rényi pairs oriented from the lower to the higher id.
    ErDag { n: usize, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Graph(#[from] DagError),
}

fn check_probability(p: f64) -> Result<(), GenError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GenError::InvalidParams("edge probability must lie in [0, 1]"))
    }
}

/// Deterministic for a fixed `(shape, seed)`.
pub fn generate_dag(shape: &DagShape, seed: u64) -> Result<Dag, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, edges): (usize, Vec<(u64, u64)>) = match *shape {
        DagShape::Chain { n } => (n, (1..n as u64).map(|v| (v - 1, v)).collect()),
        DagShape::Antichain { n } => (n, Vec::new()),
        DagShape::Layered { layers, width, p } => {
            if layers == 0 || width == 0 {
                return Err(GenError::InvalidParams("layered graphs need at least one layer of width >= 1"));
            }
            check_probability(p)?;
            let mut edges = Vec::new();
            for layer in 1..layers {
                let lo = ((layer - 1) * width) as u64;
                let hi = (layer * width) as u64;
                for u in lo..lo + width as u64 {
                    for v in hi..hi + width as u64 {
                        if rng.random_bool(p) {
                            edges.push((u, v));
                        }
                    }
                }
            }
            (layers * width, edges)
        }
        DagShape::ErDag { n, p } => {
            check_probability(p)?;
            let mut edges = Vec::new();
            for u in 0..n as u64 {
                for v in u + 1..n as u64 {
                    if rng.random_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            (n, edges)
        }
    };
    Ok(Dag::from_edges(n, edges)?)
}
