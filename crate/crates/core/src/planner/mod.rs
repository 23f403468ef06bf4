//! High-level planning over the scored graph, local goal extraction and the
//! kinematic stepper that moves the robot toward it.

mod coarse;
mod stepper;

use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;
use crate::navgraph::{NavGraph, NodeId};
use crate::scoring::ScoreContext;

pub use coarse::{build_coarse_grid, safe_distance, CoarseGrid};
pub use stepper::{step_robot, StepResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub alpha: f64,
    /// Offset inside the logarithm of the score scaling.
    pub z_eps: f64,
    pub log_base: f64,
    pub coarse_resolution: f64,
    pub d_local: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            alpha: 20.0,
            z_eps: 1e-6,
            log_base: std::f64::consts::E,
            coarse_resolution: 2.0,
            d_local: 5.0,
        }
    }
}

/// `1 - alpha * log(s + eps)`.
pub fn z_scale(s: f64, alpha: f64, eps: f64, log_base: f64) -> f64 {
    1.0 - alpha * (s + eps).ln() / log_base.ln()
}

/// How frontier-to-goal edges are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Heuristic {
    /// Scale by the node's score for the goal heading.
    Scored,
    /// Scale every edge by the same factor.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanResult {
    /// Graph nodes from the start node to the exit (or goal-side) node.
    pub path: Vec<NodeId>,
    pub cost: f64,
    pub exit: Option<NodeId>,
    pub bin: Option<usize>,
    pub aux_cost: f64,
    /// True when the goal lies in mapped free space and no auxiliary edge
    /// is used.
    pub direct: bool,
    /// Robot position, path nodes, then the exit frontier point or the goal.
    pub polyline: Vec<Vec2>,
    pub local_goal: Vec2,
}

impl PlanResult {
    pub fn path_length(&self) -> f64 {
        self.polyline.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("navigation graph is empty")]
    EmptyGraph,
    #[error("no reachable frontier and goal not in mapped free space")]
    NoFrontier,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, NodeId);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

fn dijkstra(graph: &NavGraph, start: NodeId) -> (BTreeMap<NodeId, f64>, BTreeMap<NodeId, NodeId>) {
    let adj = graph.adjacency();
    let mut dist = BTreeMap::new();
    let mut prev = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start, 0.0);
    heap.push(Entry(0.0, start));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[&u] {
            continue;
        }
        for (v, l) in &adj[&u] {
            let nd = d + l;
            if dist.get(v).map_or(true, |old| nd < *old) {
                dist.insert(*v, nd);
                prev.insert(*v, u);
                heap.push(Entry(nd, *v));
            }
        }
    }
    (dist, prev)
}

fn trace(prev: &BTreeMap<NodeId, NodeId>, start: NodeId, end: NodeId) -> Vec<NodeId> {
    let mut path = vec![end];
    while *path.last().unwrap() != start {
        path.push(prev[path.last().unwrap()]);
    }
    path.reverse();
    path
}

/// Point at arc length `d` along the polyline, or its end.
pub fn point_along(polyline: &[Vec2], d: f64) -> Vec2 {
    let mut left = d;
    for w in polyline.windows(2) {
        let seg = (w[1] - w[0]).norm();
        if seg >= left && seg > 0.0 {
            return w[0] + (w[1] - w[0]) * (left / seg);
        }
        left -= seg;
    }
    *polyline.last().expect("empty polyline")
}

/// First point of the polyline that lies `d` away from its start, or its end
/// when the whole polyline stays closer. Stretches that double back toward
/// the start are skipped over.
pub fn local_goal_on(polyline: &[Vec2], d: f64) -> Vec2 {
    let c = polyline[0];
    for w in polyline.windows(2) {
        let (a, b) = (w[0] - c, w[1] - c);
        if b.norm() < d {
            continue;
        }
        let ab = b - a;
        let qa = ab.norm_squared();
        if qa == 0.0 {
            return w[1];
        }
        let qb = 2.0 * a.dot(&ab);
        let qc = a.norm_squared() - d * d;
        let t = ((-qb + (qb * qb - 4.0 * qa * qc).max(0.0).sqrt()) / (2.0 * qa)).clamp(0.0, 1.0);
        return w[0] + (w[1] - w[0]) * t;
    }
    *polyline.last().expect("empty polyline")
}

pub fn plan(
    graph: &NavGraph,
    robot: &Vec2,
    goal: &Vec2,
    params: &PlannerParams,
    ctx: &ScoreContext,
    heuristic: Heuristic,
) -> Result<PlanResult, PlanError> {
    let start = graph.nearest(robot).ok_or(PlanError::EmptyGraph)?;
    let (dist, prev) = dijkstra(graph, start);
    let finish = |path: Vec<NodeId>, tail: Vec2, cost, exit, bin, aux_cost, direct| {
        let mut polyline = vec![*robot];
        polyline.extend(path.iter().map(|id| graph.node(*id).unwrap().position));
        polyline.push(tail);
        let local_goal = local_goal_on(&polyline, params.d_local);
        PlanResult {
            path,
            cost,
            exit,
            bin,
            aux_cost,
            direct,
            polyline,
            local_goal,
        }
    };

    if graph.nodes().any(|n| (n.position - goal).norm() < n.free_radius) {
        if let Some(near) = graph.nearest(goal).filter(|id| dist.contains_key(id)) {
            let tail = (goal - graph.node(near).unwrap().position).norm();
            let path = trace(&prev, start, near);
            return Ok(finish(path, *goal, dist[&near] + tail, None, None, 0.0, true));
        }
    }

    let coarse = build_coarse_grid(graph, goal, params.coarse_resolution);
    let mut best: Option<(f64, NodeId, usize, f64)> = None;
    for n in graph.nodes().filter(|n| n.is_frontier()) {
        let Some(d) = dist.get(&n.id) else { continue };
        let to_goal = goal - n.position;
        let bin = ctx.bin_of(&to_goal);
        let z = match heuristic {
            Heuristic::Scored => z_scale(n.scores[bin], params.alpha, params.z_eps, params.log_base),
            Heuristic::Constant(c) => c,
        };
        let aux = z * safe_distance(n, goal, &coarse);
        let total = d + aux;
        if best.map_or(true, |(b, id, _, _)| total < b || (total == b && n.id < id)) {
            best = Some((total, n.id, bin, aux));
        }
    }
    let (cost, exit, bin, aux) = best.ok_or(PlanError::NoFrontier)?;
    let node = graph.node(exit).unwrap();
    let tail = node
        .frontier_points
        .iter()
        .min_by(|a, b| (*a - goal).norm().total_cmp(&(*b - goal).norm()))
        .copied()
        .unwrap_or(node.position);
    let path = trace(&prev, start, exit);
    Ok(finish(path, tail, cost, Some(exit), Some(bin), aux, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navgraph::GraphParams;
    use approx::assert_relative_eq;

    #[test]
    fn z_point_values() {
        assert_relative_eq!(z_scale(1.0, 20.0, 1e-6, std::f64::consts::E), 1.0, epsilon = 1e-4);
        assert_relative_eq!(
            z_scale(0.3, 20.0, 1e-6, std::f64::consts::E),
            1.0 - 20.0 * 0.300001f64.ln(),
            epsilon = 1e-12
        );
        assert!((z_scale(0.3, 20.0, 1e-6, std::f64::consts::E) - 25.08).abs() < 0.01);
        assert!(z_scale(0.9, 20.0, 1e-6, std::f64::consts::E) < z_scale(0.3, 20.0, 1e-6, std::f64::consts::E));
    }

    #[test]
    fn point_along_clamps_to_end() {
        let pl = [Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), Vec2::new(3.0, 4.0)];
        assert_relative_eq!(point_along(&pl, 5.0), Vec2::new(3.0, 2.0));
        assert_relative_eq!(point_along(&pl, 50.0), Vec2::new(3.0, 4.0));
        assert_relative_eq!(point_along(&pl, 0.0), Vec2::new(0.0, 0.0));
    }

    #[test]
    fn local_goal_skips_backtrack() {
        let pl = [Vec2::new(0.0, 0.0), Vec2::new(-2.0, 0.0), Vec2::new(10.0, 0.0)];
        assert_relative_eq!(local_goal_on(&pl, 5.0), Vec2::new(5.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(local_goal_on(&pl, 50.0), Vec2::new(10.0, 0.0));
        let straight = [Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), Vec2::new(3.0, 4.0)];
        assert_relative_eq!(local_goal_on(&straight, 5.0), Vec2::new(3.0, 4.0), epsilon = 1e-12);
    }

    /// Start node at the origin and two frontier nodes symmetric about the
    /// goal direction.
    fn fork(score_left: f64, score_right: f64) -> (NavGraph, NodeId, NodeId) {
        let p = GraphParams::default();
        let mut g = NavGraph::new();
        let s = g.insert(Vec2::new(0.0, 0.0), 1.0, 1.0, &p);
        let l = g.insert(Vec2::new(3.0, 3.0), 1.0, 1.0, &p);
        let r = g.insert(Vec2::new(3.0, -3.0), 1.0, 1.0, &p);
        g.add_edge(s, l, 18f64.sqrt());
        g.add_edge(s, r, 18f64.sqrt());
        for (id, s) in [(l, score_left), (r, score_right)] {
            let n = g.node_mut(id).unwrap();
            n.frontier_points.push(n.position + Vec2::new(1.0, 0.0));
            n.scores = vec![s; 16];
        }
        (g, l, r)
    }

    #[test]
    fn higher_score_wins() {
        let (g, l, r) = fork(0.9, 0.3);
        let goal = Vec2::new(30.0, 0.0);
        let ctx = ScoreContext::default();
        let pr = PlannerParams::default();
        let res = plan(&g, &Vec2::zeros(), &goal, &pr, &ctx, Heuristic::Scored).unwrap();
        assert_eq!(res.exit, Some(l));
        let (g, _, _) = fork(0.3, 0.9);
        let res = plan(&g, &Vec2::zeros(), &goal, &pr, &ctx, Heuristic::Scored).unwrap();
        assert_eq!(res.exit, Some(r));
        assert_eq!(res.path.len(), 2);
        assert!(!res.direct);
    }

    #[test]
    fn goal_in_free_space_is_direct() {
        let (g, l, _) = fork(0.3, 0.3);
        let goal = Vec2::new(3.5, 3.0);
        let res = plan(&g, &Vec2::zeros(), &goal, &PlannerParams::default(), &ScoreContext::default(), Heuristic::Scored).unwrap();
        assert!(res.direct);
        assert_eq!(res.path.last(), Some(&l));
        assert_eq!(*res.polyline.last().unwrap(), goal);
        assert!(res.exit.is_none());
    }

    #[test]
    fn no_frontier_is_an_error() {
        let p = GraphParams::default();
        let mut g = NavGraph::new();
        g.insert(Vec2::zeros(), 1.0, 1.0, &p);
        let e = plan(&g, &Vec2::zeros(), &Vec2::new(20.0, 0.0), &PlannerParams::default(), &ScoreContext::default(), Heuristic::Scored);
        assert_eq!(e.unwrap_err(), PlanError::NoFrontier);
        let e = plan(&NavGraph::new(), &Vec2::zeros(), &Vec2::new(20.0, 0.0), &PlannerParams::default(), &ScoreContext::default(), Heuristic::Scored);
        assert_eq!(e.unwrap_err(), PlanError::EmptyGraph);
    }

    #[test]
    fn local_goal_is_on_polyline() {
        let (g, _, _) = fork(0.3, 0.9);
        let res = plan(&g, &Vec2::zeros(), &Vec2::new(30.0, 0.0), &PlannerParams::default(), &ScoreContext::default(), Heuristic::Scored).unwrap();
        assert_relative_eq!(res.local_goal, local_goal_on(&res.polyline, 5.0));
        assert!((res.local_goal - Vec2::zeros()).norm() <= 5.0 + 1e-9);
    }
}
