//! Scheduling of precedence-constrained unit jobs on `M` identical machines
//! under a uniform communication delay `rho`, with job duplication.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the whole algorithmic
//! pipeline:
//!
//! * [`dag`]: the immutable task graph, tombstoning subgraph views and exact
//!   ancestor enumeration.
//! * [`sketch`]: a mergeable bottom-`t` count-distinct estimator.
//! * [`estimation`]: ancestor vertex / edge count estimates for every vertex
//!   of a subgraph, obtained by merging predecessor sketches in topological
//!   order.
//! * [`batching`]: bucketed sampling with an exact fresh/stale test plus
//!   sketch-based pruning, producing batches whose ancestor sets overlap
//!   little.
//! * [`engine`]: list scheduling of duplicated ancestor sets, small-subgraph
//!   scheduling and the phase-peeling driver for general graphs.
//! * [`validate`], [`baseline`], [`brute`]: a feasibility checker, an
//!   exact-ancestry reference scheduler and an exhaustive optimum for tiny
//!   instances.
//!
//! ```
//! use dupsched_core::{engine::{schedule_general, EngineConfig}, generate::{generate_dag, DagShape}, validate::validate};
//!
//! let dag = generate_dag(&DagShape::Layered { layers: 6, width: 8, p: 0.3 }, 1).unwrap();
//! let config = EngineConfig::new(4, 8);
//! let (schedule, log) = schedule_general(&dag, &config, 42).unwrap();
//! assert!(validate(&dag, &schedule, 8).is_empty());
//! assert!(log.phase_count() >= 1);
//! ```

#![no_std]

extern crate alloc;

pub mod ancestry;
pub mod baseline;
pub mod batching;
pub mod brute;
pub mod dag;
pub mod engine;
pub mod estimation;
pub mod generate;
pub mod schedule;
pub mod seed;
pub mod sketch;
pub mod validate;
pub mod view;

pub use dag::{Dag, DagError, EdgeId, Vertex};
pub use schedule::{Entry, Schedule};
pub use view::SubgraphView;
