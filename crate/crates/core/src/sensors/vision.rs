//! Oracle renderer for the three per-pixel maps a vision model would emit:
//! traversability, frontier confidence and the object mask.
//!
//! Each image column is a vertical slice along one azimuth. The slice is
//! ray-cast through the ground truth once and every pixel of the column is
//! filled from that trace.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geom::{CameraPose, Intrinsics, Pose, Vec2};
use crate::grid::{Cell, NEIGHBORS8};
use crate::world::{Terrain, WorldGrid};

use super::camera::{ground_pixel_to_range, CameraRig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisionFrame {
    pub camera: CameraPose,
    pub intrinsics: Intrinsics,
    pub tick: usize,
    /// Visual traversability, row-major `H x W`, values in `[0, 1]`.
    pub t_vis: Vec<f64>,
    /// Visual frontier confidence, `[0, 1]`.
    pub f_vis: Vec<f64>,
    /// Object mask for the current query.
    pub s_vis: Vec<bool>,
    /// Horizontal range to the surface seen by each mask pixel (NaN elsewhere).
    pub mask_range: Vec<f64>,
}

impl VisionFrame {
    pub fn width(&self) -> usize {
        self.intrinsics.width
    }

    pub fn height(&self) -> usize {
        self.intrinsics.height
    }

    pub fn idx(&self, u: usize, v: usize) -> usize {
        v * self.intrinsics.width + u
    }

    pub fn mask_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.intrinsics.width;
        self.s_vis
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn mask_area(&self) -> usize {
        self.s_vis.iter().filter(|m| **m).count()
    }

    /// Unit ground-plane direction of column `u` in the world frame.
    pub fn column_direction(&self, u: usize) -> Vec2 {
        column_direction(&self.camera, &self.intrinsics, u as f64)
    }

    /// World ground point of a mask pixel, from its recorded range.
    pub fn mask_ground_point(&self, u: usize, v: usize) -> Option<Vec2> {
        let r = self.mask_range[self.idx(u, v)];
        if r.is_finite() {
            let c = self.camera.center();
            Some(Vec2::new(c.x, c.y) + self.column_direction(u) * r)
        } else {
            None
        }
    }
}

pub(crate) fn column_direction(cam: &CameraPose, k: &Intrinsics, u: f64) -> Vec2 {
    let a = (u - k.cx) / k.fx;
    let f = cam.forward();
    let r = cam.right();
    Vec2::new(f.x + a * r.x, f.y + a * r.y).normalize()
}

/// Terrain as the cameras see it: the map is a crop of a larger scene, so
/// ground continues past its edges.
fn seen_terrain(world: &WorldGrid, c: Cell) -> Terrain {
    if world.in_bounds(c) {
        world.terrain(c)
    } else {
        Terrain::Ground
    }
}

fn seen_terrain_at(world: &WorldGrid, p: &Vec2) -> Terrain {
    seen_terrain(world, world.cell_of(p))
}

/// Entry distance of the first obstacle cell along a ground ray, or infinity
/// when none is met before `max_t`.
fn first_obstacle(world: &WorldGrid, origin: &Vec2, dir: &Vec2, max_t: f64) -> f64 {
    let res = world.resolution;
    let mut cell = Cell::from_point(origin, res);
    let step_x = if dir.x >= 0.0 { 1 } else { -1 };
    let step_y = if dir.y >= 0.0 { 1 } else { -1 };
    let boundary = |c: i32, s: i32| if s > 0 { (c + 1) as f64 * res } else { c as f64 * res };
    let mut t_max_x = if dir.x.abs() < 1e-12 {
        f64::INFINITY
    } else {
        (boundary(cell.x, step_x) - origin.x) / dir.x
    };
    let mut t_max_y = if dir.y.abs() < 1e-12 {
        f64::INFINITY
    } else {
        (boundary(cell.y, step_y) - origin.y) / dir.y
    };
    let t_dx = res / dir.x.abs();
    let t_dy = res / dir.y.abs();
    let mut t_enter = 0.0;
    loop {
        if seen_terrain(world, cell) == Terrain::Obstacle {
            return t_enter;
        }
        if t_max_x < t_max_y {
            t_enter = t_max_x;
            t_max_x += t_dx;
            cell.x += step_x;
        } else {
            t_enter = t_max_y;
            t_max_y += t_dy;
            cell.y += step_y;
        }
        if t_enter > max_t {
            return f64::INFINITY;
        }
    }
}

/// First intersection distance of a ground ray with a circle, if any.
pub(crate) fn ray_circle(origin: &Vec2, dir: &Vec2, center: &Vec2, radius: f64) -> Option<f64> {
    let f = origin - center;
    let b = f.dot(dir);
    let c = f.dot(&f) - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t >= 0.0).then_some(t)
}

struct ColumnTrace {
    /// Obstacle entry distance (infinite if none within reach).
    t_obstacle: f64,
    /// Farthest row whose ground point is visible and traversable.
    last_row: Option<usize>,
    last_range: f64,
    reaches_horizon: bool,
}

fn trace_column(
    world: &WorldGrid,
    rig: &CameraRig,
    cam: &CameraPose,
    u: usize,
    t_vis: &mut [f64],
) -> ColumnTrace {
    let k = &rig.intrinsics;
    let hv = rig.visual_horizon;
    let res = world.resolution;
    let c3 = cam.center();
    let origin = Vec2::new(c3.x, c3.y);
    let dir = column_direction(cam, k, u as f64);
    let t_obstacle = first_obstacle(world, &origin, &dir, hv + 2.0 * res);

    let mut last_row = None;
    let mut last_range = 0.0;
    let mut horizon_row = None;
    for v in 0..k.height {
        let Some(g) = ground_pixel_to_range(u as f64, v as f64, k, rig.mount_height) else {
            continue;
        };
        let rho = g.horizontal_range();
        if rho > hv {
            continue;
        }
        if horizon_row.is_none() {
            horizon_row = Some(v);
        }
        let p = origin + dir * rho;
        if rho < t_obstacle && seen_terrain_at(world, &p) == Terrain::Ground {
            t_vis[v * k.width + u] = 1.0;
            if last_row.is_none() {
                last_row = Some(v);
                last_range = rho;
            }
        }
    }
    let beyond = origin + dir * (hv + res);
    let reaches_horizon = t_obstacle > hv + res
        && last_row.is_some()
        && last_row == horizon_row
        && seen_terrain_at(world, &beyond) == Terrain::Ground;
    ColumnTrace {
        t_obstacle,
        last_row,
        last_range,
        reaches_horizon,
    }
}

/// Columns whose farthest traversable point is a visual frontier: either the
/// ground runs on past the visual horizon, or the column looks through an
/// opening (depth jump larger than the robot, at least one robot wide).
fn frontier_columns(traces: &[ColumnTrace], rig: &CameraRig, world: &WorldGrid, cam: &CameraPose) -> Vec<bool> {
    let k = &rig.intrinsics;
    let w = traces.len();
    let d = rig.robot_diameter;
    let hv = rig.visual_horizon;
    let extent: Vec<f64> = traces.iter().map(|t| t.t_obstacle.min(hv)).collect();
    let azimuth = |u: f64| ((u - k.cx) / k.fx).atan();
    let mut marked: Vec<bool> = traces.iter().map(|t| t.reaches_horizon).collect();
    let mut memo = HashMap::new();
    for u in 0..w.saturating_sub(1) {
        let (near, far, step) = if extent[u] + d < extent[u + 1] {
            (u, u + 1, 1isize)
        } else if extent[u + 1] + d < extent[u] {
            (u + 1, u, -1isize)
        } else {
            continue;
        };
        let t_near = extent[near];
        let mut run = Vec::new();
        let mut c = far as isize;
        while c >= 0 && (c as usize) < w && extent[c as usize] > t_near + d {
            run.push(c as usize);
            c += step;
        }
        let (first, last) = (run[0] as f64, *run.last().unwrap() as f64);
        let span = (azimuth(first) - azimuth(last)).abs() + (azimuth(first + 1.0) - azimuth(first)).abs();
        if span * t_near >= d {
            for c in run {
                if traces[c].last_row.is_some()
                    && traces[c].last_range > t_near
                    && continues_unseen(world, rig, cam, &extent, c, traces[c].last_range, &mut memo)
                {
                    marked[c] = true;
                }
            }
        }
    }
    marked
}

/// Whether the farthest visible point of column `u` opens onto ground this
/// camera cannot see, and that unseen ground forms a connected patch of at
/// least `continuation_area`. Smaller patches are pockets, not frontiers.
/// Only ground inside this camera's field of view takes part; the
/// neighbouring cameras cover the rest.
/// `memo` caches the verdict per unseen cell for the current frame.
fn continues_unseen(
    world: &WorldGrid,
    rig: &CameraRig,
    cam: &CameraPose,
    extent: &[f64],
    u: usize,
    range: f64,
    memo: &mut HashMap<Cell, bool>,
) -> bool {
    let k = &rig.intrinsics;
    let res = world.resolution;
    let c3 = cam.center();
    let origin = Vec2::new(c3.x, c3.y);
    let p = origin + column_direction(cam, k, u as f64) * range;
    let unseen = |c: Cell| {
        if seen_terrain(world, c) != Terrain::Ground {
            return false;
        }
        let q = c.center(res);
        let local = cam.to_camera(&crate::geom::Vec3::new(q.x, q.y, c3.z));
        if local.z <= 1e-9 {
            return false;
        }
        let col = (k.cx + k.fx * local.x / local.z).floor();
        if col < 0.0 || col >= k.width as f64 {
            return false;
        }
        (q - origin).norm() > extent[col as usize] + res
    };
    let reachable = |q: &Vec2| {
        let steps = ((q - p).norm() / (0.5 * res)).ceil() as usize;
        (0..=steps).all(|i| seen_terrain_at(world, &(p + (q - p) * (i as f64 / steps.max(1) as f64))) == Terrain::Ground)
    };
    let seeds: Vec<Cell> = (0..16)
        .map(|i| {
            let a = i as f64 * std::f64::consts::TAU / 16.0;
            p + Vec2::new(a.cos(), a.sin()) * rig.robot_diameter
        })
        .filter(|q| reachable(q))
        .map(|q| world.cell_of(&q))
        .filter(|c| unseen(*c))
        .collect();
    let need = (rig.continuation_area / (res * res)).ceil() as usize;
    for seed in seeds {
        if let Some(v) = memo.get(&seed) {
            if *v {
                return true;
            }
            continue;
        }
        let mut seen = vec![seed];
        let mut queue = VecDeque::from([seed]);
        let mut visited = std::collections::HashSet::from([seed]);
        let mut found = None;
        while let Some(c) = queue.pop_front() {
            if visited.len() >= need {
                found = Some(true);
                break;
            }
            for &(dx, dy) in &NEIGHBORS8[..4] {
                let n = Cell::new(c.x + dx, c.y + dy);
                if let Some(v) = memo.get(&n) {
                    if *v {
                        found = Some(true);
                        break;
                    }
                    continue;
                }
                if !visited.contains(&n) && unseen(n) {
                    visited.insert(n);
                    seen.push(n);
                    queue.push_back(n);
                }
            }
            if found.is_some() {
                break;
            }
        }
        let ok = found.unwrap_or(false);
        for c in seen {
            memo.insert(c, ok);
        }
        if ok {
            return true;
        }
    }
    false
}

/// Render one frame per camera for the robot at `pose`.
///
/// An unknown query label simply yields empty masks.
pub fn render_vision(
    world: &WorldGrid,
    rig: &CameraRig,
    pose: &Pose,
    query: Option<&str>,
    tick: usize,
) -> Vec<VisionFrame> {
    rig.camera_poses(pose)
        .into_iter()
        .map(|cam| render_frame(world, rig, cam, query, tick))
        .collect()
}

fn render_frame(
    world: &WorldGrid,
    rig: &CameraRig,
    cam: CameraPose,
    query: Option<&str>,
    tick: usize,
) -> VisionFrame {
    let k = rig.intrinsics;
    let n = k.pixel_count();
    let mut t_vis = vec![0.0; n];
    let mut f_vis = vec![0.0; n];
    let mut s_vis = vec![false; n];
    let mut mask_range = vec![f64::NAN; n];

    let traces: Vec<ColumnTrace> = (0..k.width)
        .map(|u| trace_column(world, rig, &cam, u, &mut t_vis))
        .collect();

    let marked = frontier_columns(&traces, rig, world, &cam);
    for (u, trace) in traces.iter().enumerate() {
        let Some(row) = trace.last_row else { continue };
        let lo = u.saturating_sub(2);
        let hi = (u + 2).min(k.width - 1);
        let conf = (lo..=hi)
            .filter(|m| marked[*m])
            .map(|m| 1.0 - (m as f64 - u as f64).abs() / 3.0)
            .fold(0.0, f64::max);
        f_vis[row * k.width + u] = conf;
    }

    if let Some(label) = query {
        let c3 = cam.center();
        let origin = Vec2::new(c3.x, c3.y);
        for (u, trace) in traces.iter().enumerate() {
            let dir = column_direction(&cam, &k, u as f64);
            let first = world
                .targets
                .iter()
                .filter_map(|t| ray_circle(&origin, &dir, &t.position, t.radius).map(|d| (d, t)))
                .min_by(|a, b| a.0.total_cmp(&b.0));
            let Some((range, target)) = first else { continue };
            if target.label != label || range >= trace.t_obstacle || range > rig.visual_horizon {
                continue;
            }
            // Pinhole depth of the hit along the optical axis.
            let a = (u as f64 - k.cx) / k.fx;
            let depth = (range / (1.0 + a * a).sqrt()).max(1e-6);
            let half = k.fy * target.height / depth / 2.0;
            let lo = (k.cy - half).floor().max(0.0) as usize;
            let hi = (k.cy + half).floor().min(k.height as f64 - 1.0);
            if hi < 0.0 {
                continue;
            }
            for v in lo..=hi as usize {
                let i = v * k.width + u;
                s_vis[i] = true;
                mask_range[i] = range;
            }
        }
    }

    VisionFrame {
        camera: cam,
        intrinsics: k,
        tick,
        t_vis,
        f_vis,
        s_vis,
        mask_range,
    }
}
