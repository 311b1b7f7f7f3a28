//! Exact ancestor enumeration.

use alloc::vec;
use alloc::vec::Vec;

use crate::batching::Batch;
use crate::dag::{EdgeId, Vertex};
use crate::view::SubgraphView;

/// Exact ancestor set of one vertex inside a view, and how much of it is not
/// yet covered by a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AncestryResult {
    /// `Anc(v)`, including `v` itself, in discovery order.
    pub vertices: Vec<Vertex>,
    /// Ids of the live edges induced by `vertices`.
    pub edges: Vec<EdgeId>,
    /// `|Anc(v) \ Anc(B)|`.
    pub new_vertex_count: usize,
    /// `|E(Anc(v)) \ E(Anc(B))|`.
    pub new_edge_count: usize,
}

/// Depth-first ancestor enumeration with reusable visit marks.
///
/// Marks are epoch-stamped so a call costs `O(|Anc(v)| + |E(Anc(v))|)`
/// regardless of the parent graph's size.
#[derive(Debug, Clone)]
pub struct AncestryExplorer {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<Vertex>,
    /// Edges examined across all calls.
    pub work: u64,
}

impl AncestryExplorer {
    pub fn new(vertex_count: usize) -> Self {
        Self { stamp: vec![0; vertex_count], epoch: 0, stack: Vec::new(), work: 0 }
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// Enumerates `Anc(v)` and `E(Anc(v))` along live predecessor edges and
    /// counts the elements missing from `batch`.
    ///
    /// # Panics
    /// If `v` is not alive in `view`.
    pub fn ancestry(&mut self, view: &SubgraphView<'_>, v: Vertex, batch: &Batch) -> AncestryResult {
        self.enumerate(view, v, batch, usize::MAX).expect("unbounded enumeration")
    }

    /// Like [`AncestryExplorer::ancestry`], but gives up and returns `None` as
    /// soon as more than `limit` ancestors have been found.
    pub fn ancestry_bounded(
        &mut self,
        view: &SubgraphView<'_>,
        v: Vertex,
        batch: &Batch,
        limit: usize,
    ) -> Option<AncestryResult> {
        self.enumerate(view, v, batch, limit)
    }

    fn enumerate(&mut self, view: &SubgraphView<'_>, v: Vertex, batch: &Batch, limit: usize) -> Option<AncestryResult> {
        assert!(view.is_alive(v), "vertex {v} is not alive in the view");
        self.next_epoch();
        let epoch = self.epoch;
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut new_vertex_count = 0;
        let mut new_edge_count = 0;

        self.stamp[v as usize] = epoch;
        self.stack.clear();
        self.stack.push(v);
        while let Some(x) = self.stack.pop() {
            vertices.push(x);
            if !batch.contains_vertex(x) {
                new_vertex_count += 1;
            }
            if vertices.len() > limit {
                return None;
            }
            for (u, e) in view.live_preds(x) {
                self.work += 1;
                edges.push(e);
                if !batch.contains_edge(e) {
                    new_edge_count += 1;
                }
                if self.stamp[u as usize] != epoch {
                    self.stamp[u as usize] = epoch;
                    self.stack.push(u);
                }
            }
        }
        Some(AncestryResult { vertices, edges, new_vertex_count, new_edge_count })
    }
}

/// One-shot convenience wrapper around [`AncestryExplorer::ancestry`].
pub fn exact_ancestry(view: &SubgraphView<'_>, v: Vertex, batch: &Batch) -> AncestryResult {
    AncestryExplorer::new(view.dag().vertex_count()).ancestry(view, v, batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::Dag;
    use crate::generate::{generate_dag, DagShape};

    fn diamond() -> Dag {
        Dag::from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn sorted<T: Ord + Clone>(x: &[T]) -> Vec<T> {
        let mut x = x.to_vec();
        x.sort();
        x
    }

    #[test]
    fn diamond_sink_sees_everything() {
        let g = diamond();
        let view = SubgraphView::full(&g);
        let r = exact_ancestry(&view, 3, &Batch::new());
        assert_eq!(sorted(&r.vertices), vec![0, 1, 2, 3]);
        assert_eq!(sorted(&r.edges), vec![0, 1, 2, 3]);
        assert_eq!((r.new_vertex_count, r.new_edge_count), (4, 4));
    }

    #[test]
    fn covered_source_has_nothing_new() {
        let g = diamond();
        let view = SubgraphView::full(&g);
        let mut explorer = AncestryExplorer::new(4);
        let mut batch = Batch::new();
        let anc = explorer.ancestry(&view, 3, &batch);
        batch.add_root(&g, 3, &anc);
        let r = explorer.ancestry(&view, 0, &batch);
        assert_eq!(r.vertices, vec![0]);
        assert_eq!((r.new_vertex_count, r.new_edge_count), (0, 0));
    }

    #[test]
    fn dead_vertices_cut_the_search() {
        let g = diamond();
        let mut view = SubgraphView::full(&g);
        view.remove(1);
        let r = exact_ancestry(&view, 3, &Batch::new());
        assert_eq!(sorted(&r.vertices), vec![0, 2, 3]);
        assert_eq!(sorted(&r.edges), vec![1, 3]);
    }

    #[test]
    fn bounded_enumeration_stops_early() {
        let g = Dag::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let view = SubgraphView::full(&g);
        let mut explorer = AncestryExplorer::new(5);
        assert!(explorer.ancestry_bounded(&view, 4, &Batch::new(), 4).is_none());
        assert_eq!(explorer.ancestry_bounded(&view, 4, &Batch::new(), 5).unwrap().vertices.len(), 5);
    }

    /// Reverse reachability by repeated squaring of the boolean adjacency
    /// relation (reflexive), independent of the DFS path.
    fn closure_oracle(g: &Dag) -> Vec<Vec<bool>> {
        let n = g.vertex_count();
        let mut reach = vec![vec![false; n]; n];
        for (v, row) in reach.iter_mut().enumerate() {
            row[v] = true;
        }
        for &(u, v) in g.edges() {
            reach[u as usize][v as usize] = true;
        }
        let mut steps = 1;
        while steps < n {
            let mut next = reach.clone();
            for (i, row) in reach.iter().enumerate() {
                for (k, _) in row.iter().enumerate().filter(|&(_, &r)| r) {
                    for j in 0..n {
                        if reach[k][j] {
                            next[i][j] = true;
                        }
                    }
                }
            }
            reach = next;
            steps *= 2;
        }
        reach
    }

    #[test]
    fn matches_transitive_closure_on_random_dag() {
        let g = generate_dag(&DagShape::ErDag { n: 200, p: 0.02 }, 11).unwrap();
        let reach = closure_oracle(&g);
        let view = SubgraphView::full(&g);
        let mut explorer = AncestryExplorer::new(g.vertex_count());
        let empty = Batch::new();
        for v in 0..200u32 {
            let r = explorer.ancestry(&view, v, &empty);
            let expect: Vec<Vertex> = (0..200u32).filter(|&u| reach[u as usize][v as usize]).collect();
            assert_eq!(sorted(&r.vertices), expect, "vertex {v}");
            let expect_edges: Vec<EdgeId> = g
                .edges()
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| reach[a as usize][v as usize] && reach[b as usize][v as usize])
                .map(|(i, _)| i as EdgeId)
                .collect();
            assert_eq!(sorted(&r.edges), expect_edges, "vertex {v}");
            let again = explorer.ancestry(&view, v, &empty);
            assert_eq!(again, r);
        }
    }
}
