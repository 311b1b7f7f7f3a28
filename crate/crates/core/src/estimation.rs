//! Sketch-based estimates of `|Anc(v)|` and `|E(Anc(v))|` for every live
//! vertex of a view.
//!
//! Vertices are visited in topological order. The vertex sketch of `w` is the
//! merge of its live predecessors' vertex sketches plus `w` itself; the edge
//! sketch of `w` is the merge of its live predecessors' edge sketches plus the
//! ids of `w`'s live in-edges. Every induced edge `(x, y)` of `Anc(w)` is
//! inserted at `y` and then propagates to `w`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dag::Vertex;
use crate::sketch::{CardinalitySketch, HashFamilySpec};
use crate::view::SubgraphView;

/// Whether per-vertex sketches are dropped once every live successor has
/// merged them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReleasePolicy {
    Eager,
    Retain,
}

/// Per-vertex estimates, indexed by the view's member slots.
#[derive(Debug, Clone, PartialEq)]
pub struct AncestryEstimates {
    est_vertices: Vec<f64>,
    est_edges: Vec<f64>,
    layout: u64,
    /// Largest number of vertices holding sketches at the same time.
    pub peak_live_sketches: usize,
}

impl AncestryEstimates {
    /// Layout tag of the view the estimates were computed on.
    pub fn layout(&self) -> u64 {
        self.layout
    }

    /// `(ê_V(v), ê_E(v))`; `(0, 0)` for tombstoned or foreign vertices.
    ///
    /// # Panics
    /// If the view was compacted or reassigned since the estimates were taken.
    pub fn get(&self, view: &SubgraphView<'_>, v: Vertex) -> (f64, f64) {
        assert_eq!(view.layout(), self.layout, "estimates are stale for this view layout");
        match view.position(v) {
            Some(p) => (self.est_vertices[p], self.est_edges[p]),
            None => (0.0, 0.0),
        }
    }

    pub fn vertices(&self, view: &SubgraphView<'_>, v: Vertex) -> f64 {
        self.get(view, v).0
    }

    pub fn edges(&self, view: &SubgraphView<'_>, v: Vertex) -> f64 {
        self.get(view, v).1
    }
}

/// Vertex and edge sketch of one vertex.
pub type SketchPair<'s> = (CardinalitySketch<'s>, CardinalitySketch<'s>);

/// Estimates for every live vertex of `view`, releasing sketches eagerly.
pub fn estimate_ancestry(
    view: &SubgraphView<'_>,
    spec_vertices: &HashFamilySpec,
    spec_edges: &HashFamilySpec,
) -> AncestryEstimates {
    estimate_ancestry_with(view, spec_vertices, spec_edges, ReleasePolicy::Eager).0
}

/// Like [`estimate_ancestry`]; with [`ReleasePolicy::Retain`] the sketches of
/// every live vertex are returned too, indexed by member slot.
pub fn estimate_ancestry_with<'s>(
    view: &SubgraphView<'_>,
    spec_vertices: &'s HashFamilySpec,
    spec_edges: &'s HashFamilySpec,
    policy: ReleasePolicy,
) -> (AncestryEstimates, Vec<Option<SketchPair<'s>>>) {
    let slots = view.members().len();
    let mut est_vertices = vec![0.0; slots];
    let mut est_edges = vec![0.0; slots];
    let mut pending = vec![0u32; slots];
    let mut sketches: Vec<Option<SketchPair<'s>>> = (0..slots).map(|_| None).collect();
    let mut live = 0usize;
    let mut peak = 0usize;

    for (pos, &w) in view.members().iter().enumerate() {
        if !view.is_alive(w) {
            continue;
        }
        let mut vs = CardinalitySketch::new(spec_vertices);
        let mut es = CardinalitySketch::new(spec_edges);
        vs.insert(w as u64).expect("vertex id inside universe");
        live += 1;
        peak = peak.max(live);
        for (u, e) in view.live_preds(w) {
            let up = view.position(u).expect("live predecessor is a member");
            es.insert(e as u64).expect("edge id inside universe");
            let (pv, pe) = sketches[up].as_ref().expect("predecessor sketch released too early");
            vs.merge_from(pv).expect("shared vertex family");
            es.merge_from(pe).expect("shared edge family");
            pending[up] -= 1;
            if pending[up] == 0 && policy == ReleasePolicy::Eager {
                sketches[up] = None;
                live -= 1;
            }
        }
        est_vertices[pos] = vs.estimate();
        est_edges[pos] = es.estimate();
        pending[pos] = view.live_succs(w).count() as u32;
        if pending[pos] == 0 && policy == ReleasePolicy::Eager {
            live -= 1;
        } else {
            sketches[pos] = Some((vs, es));
        }
    }

    let estimates = AncestryEstimates { est_vertices, est_edges, layout: view.layout(), peak_live_sketches: peak };
    (estimates, sketches)
}
