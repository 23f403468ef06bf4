use serde::{Deserialize, Serialize};

use crate::geom::{Pose, Vec2};
use crate::grid::{bresenham, Cell, NEIGHBORS8};
use crate::world::{Terrain, WorldGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Free,
    Obstacle,
    Unknown,
}

impl CellState {
    pub fn is_known(self) -> bool {
        self != CellState::Unknown
    }
}

/// Robot-centred square window of world cells. The outermost ring of the
/// window always lies beyond `radius` and therefore stays `Unknown`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraversabilityGrid {
    pub center: Cell,
    pub origin: Cell,
    pub side: usize,
    pub resolution: f64,
    pub radius: f64,
    cells: Vec<CellState>,
}

impl TraversabilityGrid {
    /// All-unknown window around `center` large enough for `radius`.
    pub fn unknown(center: Cell, radius: f64, resolution: f64) -> Self {
        let n = (radius / resolution).ceil() as i32 + 1;
        let side = (2 * n + 1) as usize;
        Self {
            center,
            origin: center.offset(-n, -n),
            side,
            resolution,
            radius,
            cells: vec![CellState::Unknown; side * side],
        }
    }

    /// Build a window from explicit states laid out row-major from `origin`.
    pub fn from_states(
        origin: Cell,
        side: usize,
        resolution: f64,
        radius: f64,
        states: Vec<CellState>,
    ) -> Self {
        assert_eq!(states.len(), side * side, "state count must be side^2");
        let half = (side / 2) as i32;
        Self {
            center: origin.offset(half, half),
            origin,
            side,
            resolution,
            radius,
            cells: states,
        }
    }

    pub fn index(&self, c: Cell) -> Option<usize> {
        let lx = c.x - self.origin.x;
        let ly = c.y - self.origin.y;
        if lx < 0 || ly < 0 || lx as usize >= self.side || ly as usize >= self.side {
            None
        } else {
            Some(ly as usize * self.side + lx as usize)
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.index(c).is_some()
    }

    pub fn contains_point(&self, p: &Vec2) -> bool {
        self.contains(self.cell_of(p))
    }

    pub fn cell_of(&self, p: &Vec2) -> Cell {
        Cell::from_point(p, self.resolution)
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        self.origin
            .offset((index % self.side) as i32, (index / self.side) as i32)
    }

    /// State of a world cell; cells outside the window are `Unknown`.
    pub fn state(&self, c: Cell) -> CellState {
        self.index(c)
            .map(|i| self.cells[i])
            .unwrap_or(CellState::Unknown)
    }

    pub fn state_at(&self, p: &Vec2) -> CellState {
        self.state(self.cell_of(p))
    }

    pub fn set(&mut self, c: Cell, s: CellState) {
        if let Some(i) = self.index(c) {
            self.cells[i] = s;
        }
    }

    pub fn states(&self) -> &[CellState] {
        &self.cells
    }

    /// `(cell, state)` pairs in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Cell, CellState)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, s)| (self.cell_at(i), *s))
    }

    pub fn center_point(&self) -> Vec2 {
        self.center.center(self.resolution)
    }

    /// True when every cell on the Bresenham line `a -> b` is `Free`.
    pub fn line_free(&self, a: Cell, b: Cell) -> bool {
        bresenham(a, b).all(|c| self.state(c) == CellState::Free)
    }

    /// Like [`line_free`](Self::line_free) but the final cell may be anything.
    pub fn line_free_to(&self, a: Cell, b: Cell) -> bool {
        bresenham(a, b)
            .take_while(|c| *c != b)
            .all(|c| self.state(c) == CellState::Free)
    }

    pub fn count(&self, s: CellState) -> usize {
        self.cells.iter().filter(|c| **c == s).count()
    }
}

/// Ray-cast the ground truth from the robot cell to every cell within
/// `r_max`. A cell is observed when no obstacle lies strictly between it and
/// the robot on the Bresenham line. Hazards read as `Free`. Obstacle bodies
/// are seen whole (as in a height map): every in-range obstacle cell
/// 8-connected to an observed one is known.
pub fn sense_geometric(world: &WorldGrid, pose: &Pose, r_max: f64) -> TraversabilityGrid {
    let res = world.resolution;
    let center = world.cell_of(&pose.position);
    let mut grid = TraversabilityGrid::unknown(center, r_max, res);
    let r_cells2 = (r_max / res) * (r_max / res);
    for i in 0..grid.side * grid.side {
        let c = grid.cell_at(i);
        if (c.dist2(&center) as f64) > r_cells2 + 1e-9 {
            continue;
        }
        let occluded = bresenham(center, c)
            .take_while(|p| *p != c)
            .skip(1)
            .any(|p| world.terrain(p) == Terrain::Obstacle);
        if occluded {
            continue;
        }
        grid.cells[i] = match world.terrain(c) {
            Terrain::Obstacle => CellState::Obstacle,
            Terrain::Ground | Terrain::Hazard => CellState::Free,
        };
    }
    // The tops of obstacles are seen: an observed obstacle reveals every
    // obstacle cell in range that is connected to it.
    let in_range = |c: Cell| (c.dist2(&center) as f64) <= r_cells2 + 1e-9;
    let mut stack: Vec<Cell> = (0..grid.side * grid.side)
        .filter(|&i| grid.cells[i] == CellState::Obstacle)
        .map(|i| grid.cell_at(i))
        .collect();
    while let Some(c) = stack.pop() {
        for (dx, dy) in NEIGHBORS8 {
            let n = c.offset(dx, dy);
            let Some(j) = grid.index(n) else { continue };
            if grid.cells[j] == CellState::Unknown && in_range(n) && world.terrain(n) == Terrain::Obstacle {
                grid.cells[j] = CellState::Obstacle;
                stack.push(n);
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_world(w: usize, h: usize, res: f64) -> WorldGrid {
        WorldGrid::new(w, h, res).unwrap()
    }

    #[test]
    fn open_world_is_free_inside_radius() {
        let world = open_world(300, 300, 0.1);
        let pose = Pose::new(15.05, 15.05, 0.0);
        let g = sense_geometric(&world, &pose, 10.0);
        for (c, s) in g.iter() {
            let d = (c.center(0.1) - g.center_point()).norm();
            if d <= 10.0 - 1e-9 {
                assert_eq!(s, CellState::Free, "{c:?} at {d}");
            } else if d > 10.0 + 1e-9 {
                assert_eq!(s, CellState::Unknown);
            }
        }
    }

    #[test]
    fn wall_casts_shadow() {
        let mut world = open_world(300, 300, 0.1);
        // Wall 5 m ahead (east) of the robot, 2 m long.
        world.paint(Terrain::Obstacle, |p| (20.0..20.1).contains(&p.x) && (14.0..16.0).contains(&p.y));
        let pose = Pose::new(15.05, 15.05, 0.0);
        let g = sense_geometric(&world, &pose, 10.0);
        assert_eq!(g.state_at(&Vec2::new(20.05, 15.05)), CellState::Obstacle);
        assert_eq!(g.state_at(&Vec2::new(22.05, 15.05)), CellState::Unknown);
        assert_eq!(g.state_at(&Vec2::new(19.95, 15.05)), CellState::Free);
    }

    #[test]
    fn thick_obstacle_bodies_are_known() {
        let mut world = open_world(200, 200, 0.25);
        let c = Vec2::new(25.0, 25.0);
        world.paint(Terrain::Obstacle, move |p| ((p - c).norm() - 6.0).abs() <= 0.25);
        let g = sense_geometric(&world, &Pose::new(25.1, 17.1, 0.0), 10.0);
        let center = g.center_point();
        for (cell, s) in g.iter() {
            let p = cell.center(0.25);
            if (p - center).norm() < 9.5 && world.terrain(cell) == Terrain::Obstacle {
                assert_eq!(s, CellState::Obstacle, "{cell:?}");
            }
        }
        // Ground inside the ring stays hidden.
        assert_eq!(g.state_at(&Vec2::new(25.1, 25.1)), CellState::Unknown);
    }

    #[test]
    fn hazard_reads_free() {
        let mut world = open_world(100, 100, 0.1);
        world.paint(Terrain::Hazard, |p| (5.1..5.2).contains(&p.x));
        let g = sense_geometric(&world, &Pose::new(5.05, 5.05, 0.0), 3.0);
        assert_eq!(g.state_at(&Vec2::new(5.15, 5.05)), CellState::Free);
    }

    #[test]
    fn outside_world_is_obstacle() {
        let world = open_world(50, 50, 0.1);
        let g = sense_geometric(&world, &Pose::new(0.55, 2.55, 0.0), 2.0);
        assert_eq!(g.state_at(&Vec2::new(-0.05, 2.55)), CellState::Obstacle);
        assert_eq!(g.state_at(&Vec2::new(-0.15, 2.55)), CellState::Obstacle);
        assert_eq!(g.state_at(&Vec2::new(-1.55, 2.55)), CellState::Unknown);
    }
}
