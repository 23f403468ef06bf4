use std::collections::BTreeSet;

use rand::Rng;

use super::{compute_sdf, GraphParams, NavGraph, NavNode, NodeId, SdfPair};
use crate::grid::Cell;
use crate::sensors::{CellState, TraversabilityGrid};

/// Refreshes the radii of nodes inside the current map and removes nodes that
/// now sit on an obstacle. Nodes on unknown cells (shadowed or at the window
/// edge) keep their previous radii. Returns the removed ids.
pub fn update_nodes(graph: &mut NavGraph, sdf: &SdfPair, grid: &TraversabilityGrid, params: &GraphParams) -> Vec<NodeId> {
    let mut removed = Vec::new();
    for node in graph.nodes_mut() {
        let c = grid.cell_of(&node.position);
        if !grid.contains(c) || grid.state(c) == CellState::Unknown {
            continue;
        }
        let obs = sdf.obstacle_at(c).unwrap();
        let unk = sdf.unknown_at(c).unwrap();
        node.free_radius = obs.min(unk).min(params.r_f_max);
        node.explored_radius = node.explored_radius.max(unk);
        if node.free_radius <= 0.0 {
            removed.push(node.id);
        }
    }
    for id in &removed {
        graph.remove(*id);
    }
    removed
}

/// Draws `params.n_samples` cells uniformly from the free region and keeps
/// those with enough clearance that fall outside every existing free disc.
/// Samples accepted earlier in the same batch also reject later ones.
pub fn sample_new_nodes(
    grid: &TraversabilityGrid,
    sdf: &SdfPair,
    graph: &NavGraph,
    params: &GraphParams,
    rng: &mut impl Rng,
) -> Vec<NavNode> {
    let free: Vec<Cell> = grid
        .iter()
        .filter(|(_, s)| *s == CellState::Free)
        .map(|(c, _)| c)
        .collect();
    if free.is_empty() {
        return Vec::new();
    }
    let res = grid.resolution;
    let mut next = graph.next_id().0;
    let mut accepted: Vec<NavNode> = Vec::new();
    for _ in 0..params.n_samples {
        let c = free[rng.gen_range(0..free.len())];
        let clearance = sdf.clearance(c).unwrap();
        if clearance <= params.r_trav {
            continue;
        }
        let p = c.center(res);
        let outside = |n: &NavNode| (p - n.position).norm() > n.free_radius;
        if !graph.nodes().all(outside) || !accepted.iter().all(outside) {
            continue;
        }
        let r_f = clearance.min(params.r_f_max);
        let r_e = sdf.unknown_at(c).unwrap();
        accepted.push(NavNode::new(NodeId(next), p, r_f, r_e, params));
        next += 1;
    }
    accepted
}

/// Unknown cells that are 4-adjacent to a free cell the robot could stand
/// on, i.e. one whose obstacle clearance exceeds `min_clearance`. Slivers of
/// unknown space in pockets narrower than the robot are not frontiers.
pub(crate) fn boundary_cells(grid: &TraversabilityGrid, sdf: &SdfPair, min_clearance: f64) -> Vec<Cell> {
    grid.iter()
        .filter(|(c, s)| {
            *s == CellState::Unknown
                && c.neighbors4().iter().any(|n| {
                    grid.contains(*n)
                        && grid.state(*n) == CellState::Free
                        && sdf.obstacle_at(*n).is_some_and(|d| d > min_clearance)
                })
        })
        .map(|(c, _)| c)
        .collect()
}

pub fn update_frontier_nodes(grid: &TraversabilityGrid, sdf: &SdfPair, graph: &mut NavGraph, params: &GraphParams) {
    let res = grid.resolution;
    for node in graph.nodes_mut() {
        node.frontier_points.retain(|p| {
            let c = grid.cell_of(p);
            !(grid.contains(c) && grid.state(c).is_known())
        });
    }

    let mut owned: BTreeSet<Cell> = graph
        .nodes()
        .flat_map(|n| n.frontier_points.iter().map(|p| grid.cell_of(p)))
        .collect();
    let candidates: Vec<(NodeId, Cell, nalgebra::Vector2<f64>)> = graph
        .nodes()
        .filter_map(|n| {
            let c = grid.cell_of(&n.position);
            (grid.state(c) == CellState::Free).then_some((n.id, c, n.position))
        })
        .collect();
    let explored: Vec<_> = graph.nodes().map(|n| (n.position, n.explored_radius)).collect();

    let mut assignments: Vec<(NodeId, Cell)> = Vec::new();
    for cf in boundary_cells(grid, sdf, params.r_trav) {
        if owned.contains(&cf) {
            continue;
        }
        let p = cf.center(res);
        if explored.iter().any(|(q, r_e)| (p - q).norm() < *r_e) {
            continue;
        }
        let mut order: Vec<(f64, NodeId, Cell)> = candidates
            .iter()
            .map(|(id, c, q)| ((p - q).norm(), *id, *c))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, id, _)) = order.into_iter().find(|(_, _, c)| grid.line_free_to(*c, cf)) {
            assignments.push((id, cf));
            owned.insert(cf);
        }
    }
    for (id, cf) in assignments {
        graph.node_mut(id).unwrap().frontier_points.push(cf.center(res));
    }
}

/// Pairs within `r_edge` whose connecting Bresenham line is entirely free in
/// the current window. Existing edges are not returned again.
pub fn build_edges(graph: &NavGraph, grid: &TraversabilityGrid, params: &GraphParams) -> Vec<(NodeId, NodeId, f64)> {
    let inside: Vec<(NodeId, Cell, nalgebra::Vector2<f64>)> = graph
        .nodes()
        .filter_map(|n| {
            let c = grid.cell_of(&n.position);
            (grid.state(c) == CellState::Free).then_some((n.id, c, n.position))
        })
        .collect();
    let mut out = Vec::new();
    for (i, (a, ca, pa)) in inside.iter().enumerate() {
        for (b, cb, pb) in &inside[i + 1..] {
            let d = (pa - pb).norm();
            if d <= params.r_edge && !graph.has_edge(*a, *b) && grid.line_free(*ca, *cb) {
                out.push((*a, *b, d));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateStats {
    pub removed: Vec<NodeId>,
    pub added: Vec<NodeId>,
    pub new_edges: usize,
}

pub fn update_navigation_graph(
    graph: &mut NavGraph,
    grid: &TraversabilityGrid,
    params: &GraphParams,
    rng: &mut impl Rng,
) -> UpdateStats {
    let sdf = compute_sdf(grid);
    let removed = update_nodes(graph, &sdf, grid, params);
    let new_nodes = sample_new_nodes(grid, &sdf, graph, params, rng);
    let added = new_nodes.iter().map(|n| n.id).collect();
    graph.extend(new_nodes);
    update_frontier_nodes(grid, &sdf, graph, params);
    let edges = build_edges(graph, grid, params);
    let new_edges = edges.len();
    for (a, b, l) in edges {
        graph.add_edge(a, b, l);
    }
    UpdateStats {
        removed,
        added,
        new_edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Pose, Vec2};
    use crate::sensors::sense_geometric;
    use crate::world::{Terrain, WorldGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_free(side: usize, res: f64) -> TraversabilityGrid {
        TraversabilityGrid::from_states(Cell::new(0, 0), side, res, side as f64 * res, vec![CellState::Free; side * side])
    }

    fn with(grid: &mut TraversabilityGrid, f: impl Fn(Cell) -> Option<CellState>) {
        let cells: Vec<Cell> = grid.iter().map(|(c, _)| c).collect();
        for c in cells {
            if let Some(s) = f(c) {
                grid.set(c, s);
            }
        }
    }

    #[test]
    fn radii_follow_sdf_with_monotone_explored_radius() {
        let grid = all_free(200, 0.1);
        let mut sdf = compute_sdf(&grid);
        let p = GraphParams::default();
        let mut g = NavGraph::new();
        let id = g.insert(Vec2::new(10.05, 10.05), 1.0, 5.0, &p);
        let c = grid.cell_of(&Vec2::new(10.05, 10.05));
        let i = (c.y as usize) * 200 + c.x as usize;
        sdf.obstacle[i] = 2.5;
        sdf.unknown[i] = 6.0;
        update_nodes(&mut g, &sdf, &grid, &p);
        assert_eq!(g.node(id).unwrap().free_radius, 2.5);
        assert_eq!(g.node(id).unwrap().explored_radius, 6.0);
        sdf.unknown[i] = 3.0;
        g.node_mut(id).unwrap().explored_radius = 5.0;
        update_nodes(&mut g, &sdf, &grid, &p);
        assert_eq!(g.node(id).unwrap().explored_radius, 5.0);
        assert_eq!(g.node(id).unwrap().free_radius, 2.5);
    }

    #[test]
    fn engulfed_node_is_removed_with_edges() {
        let mut grid = all_free(50, 0.1);
        let p = GraphParams::default();
        let mut g = NavGraph::new();
        let a = g.insert(Vec2::new(1.05, 1.05), 0.5, 0.5, &p);
        let b = g.insert(Vec2::new(3.05, 1.05), 0.5, 0.5, &p);
        g.add_edge(a, b, 2.0);
        grid.set(Cell::new(10, 10), CellState::Obstacle);
        let sdf = compute_sdf(&grid);
        assert_eq!(update_nodes(&mut g, &sdf, &grid, &p), vec![a]);
        assert!(g.node(a).is_none());
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn sampling_in_open_map_accepts_and_respects_rejection() {
        let grid = all_free(100, 0.1);
        let sdf = compute_sdf(&grid);
        let p = GraphParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = NavGraph::new();
        let nodes = sample_new_nodes(&grid, &sdf, &g, &p, &mut rng);
        assert!(!nodes.is_empty());
        for (i, a) in nodes.iter().enumerate() {
            assert!(a.free_radius > p.r_trav && a.free_radius <= p.r_f_max);
            for b in &nodes[..i] {
                assert!((a.position - b.position).norm() > b.free_radius);
            }
        }
    }

    #[test]
    fn sample_inside_existing_disc_is_rejected() {
        let grid = all_free(100, 0.1);
        let sdf = compute_sdf(&grid);
        let p = GraphParams::default();
        let mut g = NavGraph::new();
        // One node whose free disc covers the whole window.
        g.insert(Vec2::new(5.0, 5.0), 100.0, 0.0, &p);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(sample_new_nodes(&grid, &sdf, &g, &p, &mut rng).is_empty());
    }

    #[test]
    fn no_free_cells_gives_no_samples() {
        let grid = TraversabilityGrid::unknown(Cell::new(10, 10), 1.0, 0.1);
        let sdf = compute_sdf(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(sample_new_nodes(&grid, &sdf, &NavGraph::new(), &GraphParams::default(), &mut rng).is_empty());
    }

    #[test]
    fn fully_known_map_clears_frontiers() {
        let grid = all_free(60, 0.1);
        let p = GraphParams::default();
        let mut g = NavGraph::new();
        let id = g.insert(Vec2::new(3.05, 3.05), 1.0, 0.0, &p);
        g.node_mut(id).unwrap().frontier_points.push(Vec2::new(1.05, 1.05));
        update_frontier_nodes(&grid, &compute_sdf(&grid), &mut g, &p);
        assert!(g.frontier_ids().is_empty());
    }

    #[test]
    fn frontier_point_goes_to_nearest_collision_free_node() {
        // Free 2.1 m strip with one unknown cell at x=50; nodes 2 m and 3 m away.
        let mut grid = all_free(60, 0.1);
        with(&mut grid, |c| {
            if c == Cell::new(50, 30) {
                Some(CellState::Unknown)
            } else if (c.y - 30).abs() > 10 && c.x >= 10 {
                Some(CellState::Obstacle)
            } else {
                None
            }
        });
        let sdf = compute_sdf(&grid);
        let p = GraphParams::default();
        let mut g = NavGraph::new();
        let far = g.insert(Cell::new(20, 30).center(0.1), 1.0, 0.0, &p);
        let near = g.insert(Cell::new(30, 30).center(0.1), 1.0, 0.0, &p);
        update_frontier_nodes(&grid, &sdf, &mut g, &p);
        // Boundary cells on the window edge are Free here, so only the
        // interior unknown cell is a frontier.
        assert_eq!(g.node(near).unwrap().frontier_points.len(), 1);
        assert!(g.node(far).unwrap().frontier_points.is_empty());

        // Within the explored radius of some node: skipped.
        let mut g2 = NavGraph::new();
        g2.insert(Cell::new(30, 30).center(0.1), 1.0, 2.5, &p);
        update_frontier_nodes(&grid, &sdf, &mut g2, &p);
        assert!(g2.frontier_ids().is_empty());
    }

    #[test]
    fn edges_connect_clear_pairs_within_radius() {
        let mut grid = all_free(120, 0.1);
        let p = GraphParams::default();
        let mut g = NavGraph::new();
        let a = g.insert(Vec2::new(1.05, 6.05), 1.0, 0.0, &p);
        let b = g.insert(Vec2::new(5.05, 6.05), 1.0, 0.0, &p);
        let c = g.insert(Vec2::new(9.05, 6.05), 1.0, 0.0, &p);
        let e = build_edges(&g, &grid, &p);
        let pairs: Vec<_> = e.iter().map(|(x, y, _)| (*x, *y)).collect();
        assert_eq!(pairs, vec![(a, b), (a, c), (b, c)]);
        assert!((e[0].2 - 4.0).abs() < 1e-12 && (e[1].2 - 8.0).abs() < 1e-12);

        with(&mut grid, |c| (c.x == 70).then_some(CellState::Obstacle));
        let pairs: Vec<_> = build_edges(&g, &grid, &p).iter().map(|(x, y, _)| (*x, *y)).collect();
        assert_eq!(pairs, vec![(a, b)]);
    }

    #[test]
    fn first_tick_in_open_field() {
        let mut world = WorldGrid::new(400, 400, 0.1).unwrap();
        world.paint(Terrain::Ground, |_| true);
        let pose = Pose::new(20.0, 20.0, 0.0);
        let grid = sense_geometric(&world, &pose, 10.0);
        let p = GraphParams::default();
        let mut g = NavGraph::new();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        update_navigation_graph(&mut g, &grid, &p, &mut rng);
        assert!(!g.is_empty());
        let frontier: Vec<_> = g.nodes().flat_map(|n| n.frontier_points.clone()).collect();
        assert!(!frontier.is_empty());
        for f in &frontier {
            let r = (f - pose.position).norm();
            assert!(r > 9.5 && r < 10.5, "frontier at range {r}");
        }
        for n in g.nodes() {
            assert_eq!(n.is_frontier(), !n.frontier_points.is_empty());
        }

        // Same grid again: no duplicate frontier points.
        let before = frontier.len();
        update_navigation_graph(&mut g, &grid, &p, &mut rng);
        let mut cells: Vec<Cell> = g
            .nodes()
            .flat_map(|n| n.frontier_points.iter().map(|f| grid.cell_of(f)))
            .collect();
        let total = cells.len();
        cells.sort();
        cells.dedup();
        assert_eq!(cells.len(), total);
        assert!(total <= before);
    }
}
