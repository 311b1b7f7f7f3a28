//! Immutable task graph.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Dense vertex id in `[0, n)`.
pub type Vertex = u32;
/// Dense edge id in `[0, m)`, assigned in input order.
pub type EdgeId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagError {
    #[error("edge #{index} references vertex {vertex}, but the graph has {n} vertices")]
    VertexOutOfRange { index: usize, vertex: u64, n: usize },
    #[error("edge #{index} is a self-loop on vertex {vertex}")]
    SelfLoop { index: usize, vertex: Vertex },
    #[error("edge #{index} ({tail} -> {head}) is a duplicate")]
    DuplicateEdge {
        index: usize,
        tail: Vertex,
        head: Vertex,
    },
    #[error("graph contains a cycle through vertex {vertex}")]
    CycleDetected { vertex: Vertex },
    #[error("graph too large: {0} exceeds the 32-bit id space")]
    TooLarge(usize),
}

/// Compressed adjacency: the neighbours of `v` are
/// `adj[offsets[v]..offsets[v + 1]]`, each paired with the connecting edge id.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Adjacency {
    offsets: Vec<u32>,
    adj: Vec<(Vertex, EdgeId)>,
}

impl Adjacency {
    fn build(n: usize, edges: &[(Vertex, Vertex)], key: impl Fn((Vertex, Vertex)) -> (Vertex, Vertex)) -> Self {
        let mut offsets = vec![0u32; n + 1];
        for &e in edges {
            offsets[key(e).0 as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut adj = vec![(0, 0); edges.len()];
        for (id, &e) in edges.iter().enumerate() {
            let (owner, other) = key(e);
            let slot = &mut cursor[owner as usize];
            adj[*slot as usize] = (other, id as EdgeId);
            *slot += 1;
        }
        Self { offsets, adj }
    }

    #[inline]
    fn of(&self, v: Vertex) -> &[(Vertex, EdgeId)] {
        let v = v as usize;
        &self.adj[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }
}

/// A directed acyclic graph over dense vertex ids with a fixed topological
/// order. Edges are identified by their position in the construction input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    edges: Vec<(Vertex, Vertex)>,
    preds: Adjacency,
    succs: Adjacency,
    topo_order: Vec<Vertex>,
    topo_rank: Vec<u32>,
}

impl Dag {
    /// Builds a graph on `n` vertices. Rejects out-of-range ids, self-loops,
    /// duplicate edges and cycles.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, DagError>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        if n > u32::MAX as usize {
            return Err(DagError::TooLarge(n));
        }
        let mut list: Vec<(Vertex, Vertex)> = Vec::new();
        for (index, (u, v)) in edges.into_iter().enumerate() {
            for x in [u, v] {
                if x >= n as u64 {
                    return Err(DagError::VertexOutOfRange { index, vertex: x, n });
                }
            }
            if u == v {
                return Err(DagError::SelfLoop { index, vertex: u as Vertex });
            }
            list.push((u as Vertex, v as Vertex));
        }
        if list.len() > u32::MAX as usize {
            return Err(DagError::TooLarge(list.len()));
        }

        let mut sorted: Vec<(Vertex, Vertex, usize)> =
            list.iter().enumerate().map(|(i, &(u, v))| (u, v, i)).collect();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                let index = w[0].2.max(w[1].2);
                return Err(DagError::DuplicateEdge { index, tail: w[0].0, head: w[0].1 });
            }
        }

        let succs = Adjacency::build(n, &list, |(u, v)| (u, v));
        let preds = Adjacency::build(n, &list, |(u, v)| (v, u));

        // Kahn's algorithm, sources seeded in id order.
        let mut indeg: Vec<u32> = (0..n).map(|v| preds.of(v as Vertex).len() as u32).collect();
        let mut queue: VecDeque<Vertex> = (0..n as Vertex).filter(|&v| indeg[v as usize] == 0).collect();
        let mut topo_order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            topo_order.push(u);
            for &(w, _) in succs.of(u) {
                let d = &mut indeg[w as usize];
                *d -= 1;
                if *d == 0 {
                    queue.push_back(w);
                }
            }
        }
        if topo_order.len() != n {
            let vertex = indeg.iter().position(|&d| d > 0).unwrap_or(0) as Vertex;
            return Err(DagError::CycleDetected { vertex });
        }
        let mut topo_rank = vec![0u32; n];
        for (rank, &v) in topo_order.iter().enumerate() {
            topo_rank[v as usize] = rank as u32;
        }

        Ok(Self { edges: list, preds, succs, topo_order, topo_rank })
    }

    pub fn vertex_count(&self) -> usize {
        self.topo_order.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in id order.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> (Vertex, Vertex) {
        self.edges[id as usize]
    }

    /// Immediate predecessors of `v`, each with the id of the edge into `v`.
    #[inline]
    pub fn preds(&self, v: Vertex) -> &[(Vertex, EdgeId)] {
        self.preds.of(v)
    }

    /// Immediate successors of `v`, each with the id of the edge out of `v`.
    #[inline]
    pub fn succs(&self, v: Vertex) -> &[(Vertex, EdgeId)] {
        self.succs.of(v)
    }

    pub fn topo_order(&self) -> &[Vertex] {
        &self.topo_order
    }

    /// Position of `v` in [`Dag::topo_order`].
    #[inline]
    pub fn topo_rank(&self, v: Vertex) -> u32 {
        self.topo_rank[v as usize]
    }

    /// Edges sorted by `(source, target)`.
    pub fn sorted_edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    /// Number of vertices on a longest path.
    pub fn longest_path_len(&self) -> usize {
        let mut depth = vec![0usize; self.vertex_count()];
        let mut best = 0;
        for &v in &self.topo_order {
            let d = 1 + self.preds(v).iter().map(|&(u, _)| depth[u as usize]).max().unwrap_or(0);
            depth[v as usize] = d;
            best = best.max(d);
        }
        best
    }
}
