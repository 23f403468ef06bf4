//! Exact Euclidean distance transform (Felzenszwalb and Huttenlocher's
//! lower-envelope method) over the local traversability grid.

use serde::{Deserialize, Serialize};

use crate::grid::Cell;
use crate::sensors::{CellState, TraversabilityGrid};

/// Distances in metres from each local cell to the nearest obstacle and the
/// nearest unknown cell. Cells beyond the window count as unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdfPair {
    pub origin: Cell,
    pub side: usize,
    pub resolution: f64,
    pub obstacle: Vec<f64>,
    pub unknown: Vec<f64>,
}

impl SdfPair {
    fn index(&self, c: Cell) -> Option<usize> {
        let lx = c.x - self.origin.x;
        let ly = c.y - self.origin.y;
        (lx >= 0 && ly >= 0 && (lx as usize) < self.side && (ly as usize) < self.side)
            .then(|| ly as usize * self.side + lx as usize)
    }

    pub fn obstacle_at(&self, c: Cell) -> Option<f64> {
        self.index(c).map(|i| self.obstacle[i])
    }

    pub fn unknown_at(&self, c: Cell) -> Option<f64> {
        self.index(c).map(|i| self.unknown[i])
    }

    /// `min(SDF_obs, SDF_unk)` at a cell inside the window.
    pub fn clearance(&self, c: Cell) -> Option<f64> {
        self.index(c).map(|i| self.obstacle[i].min(self.unknown[i]))
    }

    pub fn cap(&self) -> f64 {
        self.side as f64 * std::f64::consts::SQRT_2 * self.resolution
    }
}

/// Squared distance transform of a sampled function along one line.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        if f[q].is_infinite() {
            continue;
        }
        if f[v[0]].is_infinite() {
            // First finite sample replaces the placeholder.
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            k = 0;
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0: q dominates the whole envelope.
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    if f[v[0]].is_infinite() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared cell distance to the nearest `true` entry (infinite if none).
pub(crate) fn squared_edt(feature: &[bool], width: usize, height: usize) -> Vec<f64> {
    let n = width.max(height);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut grid: Vec<f64> = feature
        .iter()
        .map(|b| if *b { 0.0 } else { f64::INFINITY })
        .collect();
    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        edt_1d(&f[..height], &mut out[..height], &mut v, &mut z);
        for y in 0..height {
            grid[y * width + x] = out[y];
        }
    }
    for y in 0..height {
        f[..width].copy_from_slice(&grid[y * width..(y + 1) * width]);
        edt_1d(&f[..width], &mut out[..width], &mut v, &mut z);
        grid[y * width..(y + 1) * width].copy_from_slice(&out[..width]);
    }
    grid
}

pub fn compute_sdf(grid: &TraversabilityGrid) -> SdfPair {
    let side = grid.side;
    let res = grid.resolution;
    let cap = side as f64 * std::f64::consts::SQRT_2 * res;
    let states = grid.states();

    let obs_feature: Vec<bool> = states.iter().map(|s| *s == CellState::Obstacle).collect();
    let obstacle = if obs_feature.iter().any(|b| *b) {
        squared_edt(&obs_feature, side, side)
            .into_iter()
            .map(|d2| d2.sqrt() * res)
            .collect()
    } else {
        vec![cap; side * side]
    };

    // Pad with a ring of unknown cells so the window edge counts as unknown.
    let ps = side + 2;
    let mut unk_feature = vec![true; ps * ps];
    for y in 0..side {
        for x in 0..side {
            unk_feature[(y + 1) * ps + x + 1] = states[y * side + x] == CellState::Unknown;
        }
    }
    let padded = squared_edt(&unk_feature, ps, ps);
    let mut unknown = vec![0.0; side * side];
    for y in 0..side {
        for x in 0..side {
            unknown[y * side + x] = padded[(y + 1) * ps + x + 1].sqrt() * res;
        }
    }

    SdfPair {
        origin: grid.origin,
        side,
        resolution: res,
        obstacle,
        unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_of(side: usize, f: impl Fn(usize, usize) -> CellState) -> TraversabilityGrid {
        let states = (0..side * side).map(|i| f(i % side, i / side)).collect();
        TraversabilityGrid::from_states(Cell::new(0, 0), side, 0.1, 1.0, states)
    }

    #[test]
    fn all_free_grid() {
        let g = grid_of(9, |_, _| CellState::Free);
        let sdf = compute_sdf(&g);
        assert!(sdf.obstacle.iter().all(|d| *d == sdf.cap()));
        // Distance to the virtual unknown ring just outside the window.
        assert!((sdf.unknown_at(Cell::new(0, 4)).unwrap() - 0.1).abs() < 1e-12);
        assert!((sdf.unknown_at(Cell::new(4, 4)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_obstacle_cell() {
        let g = grid_of(7, |x, y| if (x, y) == (3, 3) { CellState::Obstacle } else { CellState::Free });
        let sdf = compute_sdf(&g);
        assert_eq!(sdf.obstacle_at(Cell::new(3, 3)), Some(0.0));
        for c in Cell::new(3, 3).neighbors4() {
            assert!((sdf.obstacle_at(c).unwrap() - 0.1).abs() < 1e-12);
        }
        assert!((sdf.obstacle_at(Cell::new(4, 4)).unwrap() - 0.1 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_exactly_on_class_cells() {
        let g = grid_of(12, |x, y| match (x * 7 + y * 3) % 5 {
            0 => CellState::Obstacle,
            1 => CellState::Unknown,
            _ => CellState::Free,
        });
        let sdf = compute_sdf(&g);
        for (i, s) in g.states().iter().enumerate() {
            assert_eq!(sdf.obstacle[i] == 0.0, *s == CellState::Obstacle);
            assert_eq!(sdf.unknown[i] == 0.0, *s == CellState::Unknown);
        }
    }
}
