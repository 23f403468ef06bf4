use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::grid::{supercover, Cell, NEIGHBORS8};
use crate::navgraph::{NavGraph, NavNode};

/// Coarse explored/unexplored occupancy used to lower-bound the remaining
/// distance from a frontier to the goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseGrid {
    /// Cell (0, 0) of this grid has world cell index `origin`.
    pub origin: Cell,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    explored: Vec<bool>,
}

fn disc_hits_cell(c: Cell, res: f64, center: &Vec2, radius: f64) -> bool {
    let lo = Vec2::new(c.x as f64 * res, c.y as f64 * res);
    let nearest = Vec2::new(
        center.x.clamp(lo.x, lo.x + res),
        center.y.clamp(lo.y, lo.y + res),
    );
    (nearest - center).norm() <= radius
}

impl CoarseGrid {
    pub fn index(&self, c: Cell) -> Option<usize> {
        let (x, y) = (c.x - self.origin.x, c.y - self.origin.y);
        (x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height)
            .then(|| y as usize * self.width + x as usize)
    }

    pub fn cell_of(&self, p: &Vec2) -> Cell {
        Cell::from_point(p, self.resolution)
    }

    pub fn is_explored(&self, c: Cell) -> bool {
        self.index(c).map_or(false, |i| self.explored[i])
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height as i32).flat_map(move |y| (0..self.width as i32).map(move |x| self.origin.offset(x, y)))
    }

    pub fn explored_count(&self) -> usize {
        self.explored.iter().filter(|e| **e).count()
    }

    /// Penalty for a goal that cannot be reached through unexplored cells.
    pub fn penalty(&self) -> f64 {
        10.0 * 2.0 * (self.width + self.height) as f64 * self.resolution
    }

    fn disc_cells(&self, center: &Vec2, radius: f64) -> Vec<Cell> {
        let r = self.resolution;
        let lo = Cell::from_point(&(center - Vec2::new(radius, radius)), r).offset(-1, -1);
        let hi = Cell::from_point(&(center + Vec2::new(radius, radius)), r).offset(1, 1);
        let mut out = Vec::new();
        for y in lo.y..=hi.y {
            for x in lo.x..=hi.x {
                let c = Cell::new(x, y);
                if self.index(c).is_some() && disc_hits_cell(c, r, center, radius) {
                    out.push(c);
                }
            }
        }
        out
    }
}

/// Bounds cover every explored disc and the goal with a two-cell margin.
pub fn build_coarse_grid(graph: &NavGraph, goal: &Vec2, resolution: f64) -> CoarseGrid {
    let mut lo = *goal;
    let mut hi = *goal;
    for n in graph.nodes() {
        let r = Vec2::new(n.explored_radius, n.explored_radius);
        lo = lo.inf(&(n.position - r));
        hi = hi.sup(&(n.position + r));
    }
    let a = Cell::from_point(&lo, resolution).offset(-2, -2);
    let b = Cell::from_point(&hi, resolution).offset(2, 2);
    let width = (b.x - a.x + 1) as usize;
    let height = (b.y - a.y + 1) as usize;
    let mut grid = CoarseGrid {
        origin: a,
        resolution,
        width,
        height,
        explored: vec![false; width * height],
    };
    for n in graph.nodes() {
        for c in grid.disc_cells(&n.position, n.explored_radius) {
            let i = grid.index(c).unwrap();
            grid.explored[i] = true;
        }
    }
    grid
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

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

/// Shortest path length from the frontier node to the goal through cells
/// not explored by other nodes, never below the straight-line distance.
/// The node's own disc and the cells around the goal are always passable.
pub fn safe_distance(node: &NavNode, goal: &Vec2, grid: &CoarseGrid) -> f64 {
    let euclid = (goal - node.position).norm();
    let res = grid.resolution;
    let n = grid.width * grid.height;
    let mut passable: Vec<bool> = grid.explored.iter().map(|e| !e).collect();
    for c in grid.disc_cells(&node.position, node.explored_radius) {
        passable[grid.index(c).unwrap()] = true;
    }
    let gc = grid.cell_of(goal);
    for dy in -1..=1 {
        for dx in -1..=1 {
            if let Some(i) = grid.index(gc.offset(dx, dy)) {
                passable[i] = true;
            }
        }
    }
    let (Some(src), Some(dst)) = (grid.index(grid.cell_of(&node.position)), grid.index(gc)) else {
        return grid.penalty().max(euclid);
    };
    passable[src] = true;

    let cell_at = |i: usize| grid.origin.offset((i % grid.width) as i32, (i / grid.width) as i32);
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry(0.0, src));
    while let Some(Entry(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        if i == dst {
            break;
        }
        let c = cell_at(i);
        for (dx, dy) in NEIGHBORS8 {
            let Some(j) = grid.index(c.offset(dx, dy)) else { continue };
            if !passable[j] {
                continue;
            }
            let nd = d + if dx != 0 && dy != 0 { res * std::f64::consts::SQRT_2 } else { res };
            if nd < dist[j] {
                dist[j] = nd;
                prev[j] = i;
                heap.push(Entry(nd, j));
            }
        }
    }
    if dist[dst].is_infinite() {
        return grid.penalty().max(euclid);
    }

    // Pull the cell path taut through passable cells.
    let mut cells = vec![dst];
    while *cells.last().unwrap() != src {
        cells.push(prev[*cells.last().unwrap()]);
    }
    cells.reverse();
    let mut pts: Vec<Vec2> = cells.iter().map(|i| cell_at(*i).center(res)).collect();
    pts[0] = node.position;
    *pts.last_mut().unwrap() = *goal;
    let clear = |a: &Vec2, b: &Vec2| {
        supercover(a, b, res)
            .into_iter()
            .all(|c| grid.index(c).map_or(false, |i| passable[i]))
    };
    let mut length = 0.0;
    let mut at = 0;
    while at + 1 < pts.len() {
        let mut next = at + 1;
        for j in (at + 2..pts.len()).rev() {
            if clear(&pts[at], &pts[j]) {
                next = j;
                break;
            }
        }
        length += (pts[next] - pts[at]).norm();
        at = next;
    }
    length.max(euclid)
}
