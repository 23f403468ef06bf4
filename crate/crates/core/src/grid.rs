//! Integer cell addressing and line traversals shared by the sensor, graph
//! and stepper code.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

/// World cell index; cell `(x, y)` covers `[x*res, (x+1)*res) x [y*res, (y+1)*res)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn from_point(p: &Vec2, resolution: f64) -> Self {
        Self {
            x: (p.x / resolution).floor() as i32,
            y: (p.y / resolution).floor() as i32,
        }
    }

    pub fn center(&self, resolution: f64) -> Vec2 {
        Vec2::new(
            (self.x as f64 + 0.5) * resolution,
            (self.y as f64 + 0.5) * resolution,
        )
    }

    pub fn offset(&self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn dist2(&self, other: &Cell) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }

    pub fn neighbors4(&self) -> [Cell; 4] {
        [
            self.offset(1, 0),
            self.offset(-1, 0),
            self.offset(0, 1),
            self.offset(0, -1),
        ]
    }
}

pub const NEIGHBORS8: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Bresenham line from `a` to `b`, both endpoints included.
pub fn bresenham(a: Cell, b: Cell) -> BresenhamIter {
    let dx = (b.x - a.x).abs();
    let dy = -(b.y - a.y).abs();
    BresenhamIter {
        cur: a,
        end: b,
        dx,
        dy,
        sx: if a.x < b.x { 1 } else { -1 },
        sy: if a.y < b.y { 1 } else { -1 },
        err: dx + dy,
        done: false,
    }
}

#[derive(Debug, Clone)]
pub struct BresenhamIter {
    cur: Cell,
    end: Cell,
    dx: i32,
    dy: i32,
    sx: i32,
    sy: i32,
    err: i32,
    done: bool,
}

impl Iterator for BresenhamIter {
    type Item = Cell;

    fn next(&mut self) -> Option<Cell> {
        if self.done {
            return None;
        }
        let out = self.cur;
        if self.cur == self.end {
            self.done = true;
            return Some(out);
        }
        let e2 = 2 * self.err;
        if e2 >= self.dy {
            self.err += self.dy;
            self.cur.x += self.sx;
        }
        if e2 <= self.dx {
            self.err += self.dx;
            self.cur.y += self.sy;
        }
        Some(out)
    }
}

/// Every cell the segment `p0 -> p1` passes through (grid traversal in the
/// style of Amanatides and Woo). Corner crossings include both side cells.
pub fn supercover(p0: &Vec2, p1: &Vec2, resolution: f64) -> Vec<Cell> {
    let mut cell = Cell::from_point(p0, resolution);
    let end = Cell::from_point(p1, resolution);
    let mut out = vec![cell];
    if cell == end {
        return out;
    }
    let d = p1 - p0;
    let step_x = if d.x > 0.0 { 1 } else { -1 };
    let step_y = if d.y > 0.0 { 1 } else { -1 };
    let next_boundary = |c: i32, step: i32| {
        if step > 0 {
            (c + 1) as f64 * resolution
        } else {
            c as f64 * resolution
        }
    };
    let mut t_max_x = if d.x.abs() < 1e-15 {
        f64::INFINITY
    } else {
        (next_boundary(cell.x, step_x) - p0.x) / d.x
    };
    let mut t_max_y = if d.y.abs() < 1e-15 {
        f64::INFINITY
    } else {
        (next_boundary(cell.y, step_y) - p0.y) / d.y
    };
    let t_dx = if d.x.abs() < 1e-15 {
        f64::INFINITY
    } else {
        resolution / d.x.abs()
    };
    let t_dy = if d.y.abs() < 1e-15 {
        f64::INFINITY
    } else {
        resolution / d.y.abs()
    };
    let max_steps = ((cell.x - end.x).abs() + (cell.y - end.y).abs()) as usize * 2 + 4;
    for _ in 0..max_steps {
        if (t_max_x - t_max_y).abs() < 1e-12 {
            // Exact corner crossing: count both side cells.
            out.push(cell.offset(step_x, 0));
            out.push(cell.offset(0, step_y));
            cell = cell.offset(step_x, step_y);
            t_max_x += t_dx;
            t_max_y += t_dy;
        } else if t_max_x < t_max_y {
            cell.x += step_x;
            t_max_x += t_dx;
        } else {
            cell.y += step_y;
            t_max_y += t_dy;
        }
        out.push(cell);
        if cell == end || t_max_x.min(t_max_y) > 1.0 + 1e-12 {
            break;
        }
    }
    if *out.last().unwrap() != end {
        out.push(end);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bresenham_includes_endpoints() {
        let cells: Vec<_> = bresenham(Cell::new(0, 0), Cell::new(5, 2)).collect();
        assert_eq!(cells.first(), Some(&Cell::new(0, 0)));
        assert_eq!(cells.last(), Some(&Cell::new(5, 2)));
        assert_eq!(cells.len(), 6);
        let single: Vec<_> = bresenham(Cell::new(3, 3), Cell::new(3, 3)).collect();
        assert_eq!(single, vec![Cell::new(3, 3)]);
    }

    #[test]
    fn bresenham_steps_are_8_connected() {
        let cells: Vec<_> = bresenham(Cell::new(-4, 7), Cell::new(9, -3)).collect();
        for w in cells.windows(2) {
            assert!((w[0].x - w[1].x).abs() <= 1 && (w[0].y - w[1].y).abs() <= 1);
        }
    }

    #[test]
    fn supercover_is_4_connected_and_covers_samples() {
        let p0 = Vec2::new(0.05, 0.12);
        let p1 = Vec2::new(1.93, 0.71);
        let cells = supercover(&p0, &p1, 0.1);
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            let p = p0 + (p1 - p0) * t;
            assert!(cells.contains(&Cell::from_point(&p, 0.1)), "missing {p:?}");
        }
        assert_eq!(cells.last(), Some(&Cell::from_point(&p1, 0.1)));
    }
}
