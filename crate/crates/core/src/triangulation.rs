//! Beyond-horizon goal localization from similarity masks seen at several
//! poses, plus the policy that decides which goal the planner follows.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{CameraPose, Intrinsics, Vec2, Vec3};
use crate::sensors::VisionFrame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangulationParams {
    pub n_particles: usize,
    pub d_min: f64,
    pub d_max: f64,
    /// Added to ray distances before inverting.
    pub epsilon: f64,
    pub max_views: usize,
    /// Geometric sensing range; closer targets are localized directly.
    pub r_max: f64,
}

impl Default for TriangulationParams {
    fn default() -> Self {
        Self {
            n_particles: 1000,
            d_min: 1.0,
            d_max: 100.0,
            epsilon: 0.1,
            max_views: 32,
            r_max: 10.0,
        }
    }
}

/// A similarity mask stored sparsely as its pixel list.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewRecord {
    pub pixels: Vec<(u32, u32)>,
    pub camera: CameraPose,
    pub intrinsics: Intrinsics,
    pub tick: usize,
}

impl ViewRecord {
    /// `None` when the frame's mask is empty.
    pub fn from_frame(frame: &VisionFrame) -> Option<Self> {
        let pixels: Vec<(u32, u32)> = frame.mask_pixels().map(|(u, v)| (u as u32, v as u32)).collect();
        (!pixels.is_empty()).then(|| Self {
            pixels,
            camera: frame.camera,
            intrinsics: frame.intrinsics,
            tick: frame.tick,
        })
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.pixels.len() as f64;
        let (su, sv) = self
            .pixels
            .iter()
            .fold((0.0, 0.0), |(a, b), (u, v)| (a + *u as f64, b + *v as f64));
        (su / n, sv / n)
    }

    /// World-frame unit direction of the ray through the mask centroid.
    pub fn centroid_ray(&self) -> (Vec3, Vec3) {
        let (u, v) = self.centroid();
        let d = self.camera.rotation * self.intrinsics.unproject(u, v);
        (self.camera.center(), d.normalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub position: Vec3,
    pub view: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalEstimate {
    pub position: Vec3,
    pub weight: f64,
    pub views: usize,
    pub tick: usize,
}

pub fn project_particles(
    views: &[ViewRecord],
    n_particles: usize,
    d_min: f64,
    d_max: f64,
    rng: &mut impl Rng,
) -> Vec<Particle> {
    let mut out = Vec::with_capacity(views.len() * n_particles);
    for (i, view) in views.iter().enumerate() {
        if view.pixels.is_empty() {
            continue;
        }
        for _ in 0..n_particles {
            let (u, v) = view.pixels[rng.gen_range(0..view.pixels.len())];
            let d = rng.gen_range(d_min..=d_max);
            let p_cam = view.intrinsics.unproject(u as f64, v as f64) * d;
            out.push(Particle {
                position: view.camera.to_world(&p_cam),
                view: i,
            });
        }
    }
    out
}

/// Distance from `p` to the half-line starting at `origin` along unit `dir`.
pub fn ray_distance(p: &Vec3, origin: &Vec3, dir: &Vec3) -> f64 {
    let w = p - origin;
    let t = w.dot(dir).max(0.0);
    (w - dir * t).norm()
}

/// Weighted mean of the particles, each weighted by its summed inverse
/// distance to every view's centroid ray. `None` without particles or views.
pub fn ray_weighted_triangulation(particles: &[Particle], views: &[ViewRecord], epsilon: f64) -> Option<GoalEstimate> {
    if particles.is_empty() || views.is_empty() {
        return None;
    }
    let rays: Vec<(Vec3, Vec3)> = views.iter().map(|v| v.centroid_ray()).collect();
    let mut total = 0.0;
    let mut acc = Vec3::zeros();
    for p in particles {
        let w: f64 = rays
            .iter()
            .map(|(o, d)| 1.0 / (ray_distance(&p.position, o, d) + epsilon))
            .sum();
        total += w;
        acc += p.position * w;
    }
    Some(GoalEstimate {
        position: acc / total,
        weight: total,
        views: views.len(),
        tick: views.iter().map(|v| v.tick).max().unwrap_or(0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalSource {
    Prior,
    Triangulated,
    Localized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangulationLogRow {
    pub tick: usize,
    pub views: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub weight: f64,
}

/// Keeps the view store and publishes the active 2D goal.
#[derive(Debug, Clone)]
pub struct GoalTracker {
    params: TriangulationParams,
    prior: Vec2,
    views: VecDeque<ViewRecord>,
    estimate: Option<GoalEstimate>,
    active: Vec2,
    source: GoalSource,
    log: Vec<TriangulationLogRow>,
}

impl GoalTracker {
    pub fn new(prior: Vec2, params: TriangulationParams) -> Self {
        Self {
            params,
            prior,
            views: VecDeque::new(),
            estimate: None,
            active: prior,
            source: GoalSource::Prior,
            log: Vec::new(),
        }
    }

    pub fn active_goal(&self) -> Vec2 {
        self.active
    }

    pub fn prior(&self) -> Vec2 {
        self.prior
    }

    pub fn source(&self) -> GoalSource {
        self.source
    }

    pub fn estimate(&self) -> Option<&GoalEstimate> {
        self.estimate.as_ref()
    }

    pub fn view_count(&self) -> usize {
        self.views.len()
    }

    pub fn log(&self) -> &[TriangulationLogRow] {
        &self.log
    }

    pub fn update(&mut self, frames: &[VisionFrame], tick: usize, rng: &mut impl Rng) -> Vec2 {
        let mut added = false;
        for f in frames {
            if let Some(v) = ViewRecord::from_frame(f) {
                self.views.push_back(v);
                added = true;
            }
        }
        while self.views.len() > self.params.max_views {
            self.views.pop_front();
        }

        let in_range: Vec<Vec2> = frames
            .iter()
            .flat_map(|f| {
                f.mask_pixels()
                    .filter(|(u, v)| f.mask_range[f.idx(*u, *v)] < self.params.r_max)
                    .filter_map(|(u, v)| f.mask_ground_point(u, v))
                    .collect::<Vec<_>>()
            })
            .collect();
        if !in_range.is_empty() {
            self.active = coordinate_median(&in_range);
            self.source = GoalSource::Localized;
            return self.active;
        }
        if self.source == GoalSource::Localized {
            return self.active;
        }

        if added && self.views.len() >= 2 {
            let views: Vec<ViewRecord> = self.views.iter().cloned().collect();
            let particles = project_particles(&views, self.params.n_particles, self.params.d_min, self.params.d_max, rng);
            if let Some(mut est) = ray_weighted_triangulation(&particles, &views, self.params.epsilon) {
                est.tick = tick;
                self.log.push(TriangulationLogRow {
                    tick,
                    views: est.views,
                    x: est.position.x,
                    y: est.position.y,
                    z: est.position.z,
                    weight: est.weight,
                });
                self.active = Vec2::new(est.position.x, est.position.y);
                self.source = GoalSource::Triangulated;
                self.estimate = Some(est);
            }
        }
        self.active
    }

    pub fn write_log_csv(&self, w: impl std::io::Write) -> crate::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for row in &self.log {
            wtr.serialize(row)?;
        }
        wtr.flush().map_err(|e| crate::Error::io("<triangulation log>", e))?;
        Ok(())
    }
}

/// Per-coordinate median (lower middle for even counts is averaged).
pub fn coordinate_median(points: &[Vec2]) -> Vec2 {
    let med = |mut xs: Vec<f64>| {
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        if n % 2 == 1 {
            xs[n / 2]
        } else {
            0.5 * (xs[n / 2 - 1] + xs[n / 2])
        }
    };
    Vec2::new(
        med(points.iter().map(|p| p.x).collect()),
        med(points.iter().map(|p| p.y).collect()),
    )
}
