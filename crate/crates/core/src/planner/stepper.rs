use std::collections::BinaryHeap;

use crate::geom::{Pose, Vec2};
use crate::grid::{supercover, Cell, NEIGHBORS8};
use crate::sensors::{CellState, TraversabilityGrid};
use crate::world::{Terrain, WorldGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub pose: Pose,
    pub moved: f64,
    /// No progress was possible toward a goal that has not been reached.
    pub blocked: bool,
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

/// Moves up to `speed` metres toward `g_local` over cells that are Free in
/// the local map and Ground in the world. If `g_local` is unreachable the
/// robot heads for the reachable cell closest to it.
pub fn step_robot(world: &WorldGrid, grid: &TraversabilityGrid, pose: &Pose, g_local: &Vec2, speed: f64) -> StepResult {
    let stay = |blocked| StepResult {
        pose: *pose,
        moved: 0.0,
        blocked,
    };
    if (g_local - pose.position).norm() < 1e-9 {
        return stay(false);
    }
    let res = grid.resolution;
    let passable = |c: Cell| grid.state(c) == CellState::Free && world.terrain(c) == Terrain::Ground;
    let start = grid.cell_of(&pose.position);
    let Some(src) = grid.index(start) else {
        return stay(true);
    };

    let n = grid.side * grid.side;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry(0.0, src));
    let mut best = (f64::INFINITY, f64::INFINITY, src);
    while let Some(Entry(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let c = grid.cell_at(i);
        let to_goal = (c.center(res) - g_local).norm();
        if (to_goal, d) < (best.0, best.1) {
            best = (to_goal, d, i);
        }
        for (dx, dy) in NEIGHBORS8 {
            let nc = c.offset(dx, dy);
            let Some(j) = grid.index(nc) else { continue };
            if !passable(nc) {
                continue;
            }
            if dx != 0 && dy != 0 && !(passable(c.offset(dx, 0)) && passable(c.offset(0, dy))) {
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

    let target = best.2;
    let goal_cell = grid.cell_of(g_local);
    let mut cells = vec![target];
    while *cells.last().unwrap() != src {
        cells.push(prev[*cells.last().unwrap()]);
    }
    cells.reverse();
    let mut pts: Vec<Vec2> = cells.iter().map(|i| grid.cell_at(*i).center(res)).collect();
    pts[0] = pose.position;
    if grid.cell_at(target) == goal_cell {
        if pts.len() == 1 {
            pts.push(*g_local);
        } else {
            *pts.last_mut().unwrap() = *g_local;
        }
    }
    if pts.len() < 2 {
        return stay(true);
    }

    let clear = |a: &Vec2, b: &Vec2| supercover(a, b, res).into_iter().all(passable);
    let mut smooth = vec![pts[0]];
    let mut at = 0;
    while at + 1 < pts.len() {
        let mut next = at + 1;
        for j in (at + 2..pts.len()).rev() {
            if clear(&pts[at], &pts[j]) {
                next = j;
                break;
            }
        }
        smooth.push(pts[next]);
        at = next;
    }

    let mut left = speed;
    let mut pos = pose.position;
    for p in &smooth[1..] {
        let seg = (p - pos).norm();
        if seg >= left {
            pos += (p - pos) * (left / seg);
            left = 0.0;
            break;
        }
        left -= seg;
        pos = *p;
    }
    let moved = speed - left;
    if moved < 1e-9 {
        return stay(true);
    }
    let dir = pos - pose.position;
    StepResult {
        pose: Pose {
            position: pos,
            heading: dir.y.atan2(dir.x),
        },
        moved,
        blocked: false,
    }
}
