//! Tombstoning subgraph views over a [`Dag`].

use alloc::vec;
use alloc::vec::Vec;

use crate::dag::{Dag, EdgeId, Vertex};

const NOT_MEMBER: u32 = u32::MAX;

/// An induced subgraph of a [`Dag`], represented by alive bits over the
/// parent's vertex ids.
///
/// The view owns a member list kept in topological order. Removing a vertex
/// only clears its alive bit, so member positions stay stable until
/// [`SubgraphView::compact`] or [`SubgraphView::reassign`] is called; both bump
/// [`SubgraphView::layout`]. An edge is live iff both endpoints are alive.
#[derive(Debug, Clone)]
pub struct SubgraphView<'g> {
    dag: &'g Dag,
    alive: Vec<bool>,
    position: Vec<u32>,
    members: Vec<Vertex>,
    live_vertices: usize,
    live_edges: usize,
    layout: u64,
}

impl<'g> SubgraphView<'g> {
    /// View containing every vertex of `dag`.
    pub fn full(dag: &'g Dag) -> Self {
        let mut view = Self::empty(dag);
        view.reassign(dag.topo_order().iter().copied());
        view
    }

    /// View with no vertices.
    pub fn empty(dag: &'g Dag) -> Self {
        let n = dag.vertex_count();
        Self {
            dag,
            alive: vec![false; n],
            position: vec![NOT_MEMBER; n],
            members: Vec::new(),
            live_vertices: 0,
            live_edges: 0,
            layout: 0,
        }
    }

    /// View induced by `members`.
    pub fn with_members(dag: &'g Dag, members: impl IntoIterator<Item = Vertex>) -> Self {
        let mut view = Self::empty(dag);
        view.reassign(members);
        view
    }

    /// Replaces the vertex set, reusing the per-vertex buffers. Cost is
    /// proportional to the old and new member lists plus their degrees.
    pub fn reassign(&mut self, members: impl IntoIterator<Item = Vertex>) {
        for &v in &self.members {
            self.alive[v as usize] = false;
            self.position[v as usize] = NOT_MEMBER;
        }
        self.members.clear();
        self.members.extend(members);
        let dag = self.dag;
        self.members.sort_unstable_by_key(|&v| dag.topo_rank(v));
        self.members.dedup();
        for (i, &v) in self.members.iter().enumerate() {
            self.alive[v as usize] = true;
            self.position[v as usize] = i as u32;
        }
        self.live_vertices = self.members.len();
        self.live_edges = self
            .members
            .iter()
            .map(|&v| dag.preds(v).iter().filter(|&&(u, _)| self.alive[u as usize]).count())
            .sum();
        self.layout += 1;
    }

    pub fn dag(&self) -> &'g Dag {
        self.dag
    }

    #[inline]
    pub fn is_alive(&self, v: Vertex) -> bool {
        self.alive[v as usize]
    }

    pub fn live_vertex_count(&self) -> usize {
        self.live_vertices
    }

    pub fn live_edge_count(&self) -> usize {
        self.live_edges
    }

    pub fn is_empty(&self) -> bool {
        self.live_vertices == 0
    }

    /// Changes whenever member positions may have moved.
    pub fn layout(&self) -> u64 {
        self.layout
    }

    /// Member slots in topological order, including tombstoned ones.
    pub fn members(&self) -> &[Vertex] {
        &self.members
    }

    /// Slot of `v` in [`SubgraphView::members`], if `v` is a member.
    #[inline]
    pub fn position(&self, v: Vertex) -> Option<usize> {
        match self.position[v as usize] {
            NOT_MEMBER => None,
            p => Some(p as usize),
        }
    }

    /// Live vertices in topological order.
    pub fn live_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.members.iter().copied().filter(move |&v| self.alive[v as usize])
    }

    #[inline]
    pub fn live_preds(&self, v: Vertex) -> impl Iterator<Item = (Vertex, EdgeId)> + '_ {
        self.dag.preds(v).iter().copied().filter(move |&(u, _)| self.alive[u as usize])
    }

    #[inline]
    pub fn live_succs(&self, v: Vertex) -> impl Iterator<Item = (Vertex, EdgeId)> + '_ {
        self.dag.succs(v).iter().copied().filter(move |&(w, _)| self.alive[w as usize])
    }

    /// Live edges in topological order of their targets.
    pub fn live_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.live_vertices().flat_map(move |v| self.live_preds(v).map(|(_, e)| e))
    }

    /// Tombstones `v`. Returns `false` if it was not alive.
    pub fn remove(&mut self, v: Vertex) -> bool {
        if !self.alive[v as usize] {
            return false;
        }
        let degree = self.live_preds(v).count() + self.live_succs(v).count();
        self.alive[v as usize] = false;
        self.live_vertices -= 1;
        self.live_edges -= degree;
        true
    }

    /// Revives a tombstoned member. Returns `false` if `v` is already alive.
    ///
    /// # Panics
    /// If `v` is not a member slot of the current layout.
    pub fn restore(&mut self, v: Vertex) -> bool {
        assert!(self.position(v).is_some(), "vertex {v} is not a member of this view");
        if self.alive[v as usize] {
            return false;
        }
        self.alive[v as usize] = true;
        let degree = self.live_preds(v).count() + self.live_succs(v).count();
        self.live_vertices += 1;
        self.live_edges += degree;
        true
    }

    pub fn remove_all(&mut self, vs: &[Vertex]) {
        for &v in vs {
            self.remove(v);
        }
    }

    pub fn restore_all(&mut self, vs: &[Vertex]) {
        for &v in vs {
            self.restore(v);
        }
    }

    /// Drops tombstoned member slots.
    pub fn compact(&mut self) {
        if self.members.len() == self.live_vertices {
            return;
        }
        let alive = &self.alive;
        let position = &mut self.position;
        self.members.retain(|&v| {
            let keep = alive[v as usize];
            if !keep {
                position[v as usize] = NOT_MEMBER;
            }
            keep
        });
        for (i, &v) in self.members.iter().enumerate() {
            self.position[v as usize] = i as u32;
        }
        self.layout += 1;
    }
}
