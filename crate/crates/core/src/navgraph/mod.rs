//! Sparse navigation graph built incrementally from local traversability maps.

mod sdf;
mod update;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

pub use sdf::{compute_sdf, SdfPair};
pub use update::{
    build_edges, sample_new_nodes, update_frontier_nodes, update_navigation_graph, update_nodes,
    UpdateStats,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub r_f_max: f64,
    pub n_samples: usize,
    pub r_trav: f64,
    pub r_edge: f64,
    pub n_bins: usize,
    pub s_def: f64,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            r_f_max: 4.0,
            n_samples: 1000,
            r_trav: 0.5,
            r_edge: 8.0,
            n_bins: 16,
            s_def: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NavNode {
    pub id: NodeId,
    pub position: Vec2,
    pub free_radius: f64,
    pub explored_radius: f64,
    /// World-frame positions of unknown cells this node is responsible for.
    pub frontier_points: Vec<Vec2>,
    pub scores: Vec<f64>,
    /// Distance from the robot at the time the scores were written.
    pub score_distance: f64,
    /// Frontier status at the previous scoring pass.
    pub was_frontier: bool,
}

impl NavNode {
    pub fn new(id: NodeId, position: Vec2, free_radius: f64, explored_radius: f64, params: &GraphParams) -> Self {
        Self {
            id,
            position,
            free_radius,
            explored_radius,
            frontier_points: Vec::new(),
            scores: vec![params.s_def; params.n_bins],
            score_distance: f64::INFINITY,
            was_frontier: false,
        }
    }

    pub fn is_frontier(&self) -> bool {
        !self.frontier_points.is_empty()
    }

    pub fn max_score(&self) -> f64 {
        self.scores.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NavGraph {
    nodes: BTreeMap<NodeId, NavNode>,
    edges: BTreeMap<(NodeId, NodeId), f64>,
    next_id: u32,
}

fn edge_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl NavGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&NavNode> {
        self.nodes.get(&id)
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut NavNode> {
        self.nodes.get_mut(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NavNode> {
        self.nodes.values()
    }

    pub fn nodes_mut(&mut self) -> impl Iterator<Item = &mut NavNode> {
        self.nodes.values_mut()
    }

    pub fn ids(&self) -> Vec<NodeId> {
        self.nodes.keys().copied().collect()
    }

    pub fn next_id(&self) -> NodeId {
        NodeId(self.next_id)
    }

    /// Inserts a node, assigning the next insertion-ordered id.
    pub fn insert(&mut self, position: Vec2, free_radius: f64, explored_radius: f64, params: &GraphParams) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes
            .insert(id, NavNode::new(id, position, free_radius, explored_radius, params));
        id
    }

    /// Adds nodes produced by [`sample_new_nodes`], keeping their ids.
    pub fn extend(&mut self, nodes: Vec<NavNode>) {
        for n in nodes {
            self.next_id = self.next_id.max(n.id.0 + 1);
            self.nodes.insert(n.id, n);
        }
    }

    pub fn remove(&mut self, id: NodeId) -> Option<NavNode> {
        let n = self.nodes.remove(&id)?;
        self.edges.retain(|(a, b), _| *a != id && *b != id);
        Some(n)
    }

    /// Returns false if either endpoint is missing or the edge is a loop.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId, length: f64) -> bool {
        if a == b || !self.nodes.contains_key(&a) || !self.nodes.contains_key(&b) {
            return false;
        }
        self.edges.insert(edge_key(a, b), length);
        true
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edges.contains_key(&edge_key(a, b))
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.edges.iter().map(|((a, b), l)| (*a, *b, *l))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacency(&self) -> BTreeMap<NodeId, Vec<(NodeId, f64)>> {
        let mut adj: BTreeMap<NodeId, Vec<(NodeId, f64)>> =
            self.nodes.keys().map(|id| (*id, Vec::new())).collect();
        for ((a, b), l) in &self.edges {
            adj.get_mut(a).unwrap().push((*b, *l));
            adj.get_mut(b).unwrap().push((*a, *l));
        }
        adj
    }

    pub fn frontier_ids(&self) -> Vec<NodeId> {
        self.nodes
            .values()
            .filter(|n| n.is_frontier())
            .map(|n| n.id)
            .collect()
    }

    /// Nearest node to `p`; ties go to the lowest id.
    pub fn nearest(&self, p: &Vec2) -> Option<NodeId> {
        let mut best: Option<(f64, NodeId)> = None;
        for n in self.nodes.values() {
            let d = (n.position - p).norm();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, n.id));
            }
        }
        best.map(|(_, id)| id)
    }

    pub fn snapshot(&self, tick: usize) -> GraphSnapshot<'_> {
        GraphSnapshot {
            tick,
            nodes: self.nodes.values().collect(),
            edges: self.edges().map(|(a, b, l)| (a, b, l)).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GraphSnapshot<'a> {
    pub tick: usize,
    pub nodes: Vec<&'a NavNode>,
    pub edges: Vec<(NodeId, NodeId, f64)>,
}

impl GraphSnapshot<'_> {
    /// One JSON object per line. Infinite score distances serialize as null.
    pub fn write_jsonl(&self, mut w: impl Write) -> crate::Result<()> {
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n").map_err(|e| crate::Error::io("<snapshot>", e))?;
        Ok(())
    }
}
