//! Cross-modal frontier scoring: geometric frontier nodes are projected into
//! the vision frames and scored per heading bin.

mod mcip;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{CameraPose, Intrinsics, Pose, Vec2, Vec3};
use crate::navgraph::{NavGraph, NodeId};
use crate::sensors::VisionFrame;

pub use mcip::{mcip, PixelGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreContext {
    pub tau_trav: f64,
    pub tau_front: f64,
    pub s_def: f64,
    pub d_score_max: f64,
    pub n_bins: usize,
    /// Added to T_vis in the pixel weight.
    pub pixel_eps: f64,
    /// Search radius when the projected node is not on a traversable pixel.
    pub snap_radius: usize,
}

impl Default for ScoreContext {
    fn default() -> Self {
        Self {
            tau_trav: 0.9,
            tau_front: 0.6,
            s_def: 0.3,
            d_score_max: 9.0,
            n_bins: 16,
            pixel_eps: 0.05,
            snap_radius: 5,
        }
    }
}

impl ScoreContext {
    pub fn bin_width(&self) -> f64 {
        std::f64::consts::TAU / self.n_bins as f64
    }

    /// Unit heading at the centre of bin `k`; bin 0 is centred on +x.
    pub fn bin_heading(&self, k: usize) -> Vec2 {
        let a = k as f64 * self.bin_width();
        Vec2::new(a.cos(), a.sin())
    }

    pub fn bin_index(&self, angle: f64) -> usize {
        let w = self.bin_width();
        let k = ((angle + 0.5 * w) / w).floor() as i64;
        k.rem_euclid(self.n_bins as i64) as usize
    }

    pub fn bin_of(&self, dir: &Vec2) -> usize {
        self.bin_index(dir.y.atan2(dir.x))
    }
}

/// Pixel of a ground-plane node, or `None` when it is behind the camera,
/// off the image, or not closer than `d_score_max` to the robot.
pub fn project_node(
    node: &Vec2,
    camera: &CameraPose,
    k: &Intrinsics,
    robot: &Vec2,
    d_score_max: f64,
) -> Option<(usize, usize)> {
    if !((node - robot).norm() < d_score_max) {
        return None;
    }
    let (u, v) = camera.project(k, &Vec3::new(node.x, node.y, 0.0))?;
    let (u, v) = (u.floor(), v.floor());
    (u >= 0.0 && v >= 0.0 && u < k.width as f64 && v < k.height as f64).then_some((u as usize, v as usize))
}

/// Ground-plane heading of the ray through image point `(u, v)`.
pub fn pixel_heading(u: f64, v: f64, k: &Intrinsics, camera: &CameraPose) -> Option<Vec2> {
    let r = camera.rotation * k.unproject(u, v);
    let h = Vec2::new(r.x, r.y);
    let n = h.norm();
    (n > 1e-12).then(|| h / n)
}

pub fn goal_conf(u: f64, v: f64, k: &Intrinsics, camera: &CameraPose, h_goal: &Vec2) -> f64 {
    let dot = pixel_heading(u, v, k, camera).map_or(0.0, |h| h.dot(h_goal));
    (3.0 + dot) / 4.0
}

pub fn r_conf(cost: f64, height: usize, width: usize) -> f64 {
    if cost.is_infinite() {
        0.0
    } else {
        1.0 - (cost / (height + width) as f64).tanh()
    }
}

pub fn f_conf(f_vis: f64, tau_front: f64) -> f64 {
    if f_vis > tau_front {
        f_vis
    } else {
        0.0
    }
}

/// Per-frame data shared by every node scored in that frame.
struct FramePrep<'a> {
    frame: &'a VisionFrame,
    graph: PixelGraph,
    /// Pixels with a nonzero frontier confidence.
    front: Vec<(usize, f64)>,
    front_mask: Vec<bool>,
    /// Goal confidence of each frontier pixel per bin.
    g_conf: Vec<Vec<f64>>,
}

impl<'a> FramePrep<'a> {
    fn new(frame: &'a VisionFrame, ctx: &ScoreContext) -> Self {
        let (w, h) = (frame.width(), frame.height());
        let graph = PixelGraph::new(&frame.t_vis, w, h, ctx.tau_trav, ctx.pixel_eps);
        let front: Vec<(usize, f64)> = (0..w * h)
            .filter(|i| graph.is_traversable(*i))
            .map(|i| (i, f_conf(frame.f_vis[i], ctx.tau_front)))
            .filter(|(_, f)| *f > 0.0)
            .collect();
        let mut front_mask = vec![false; w * h];
        for (i, _) in &front {
            front_mask[*i] = true;
        }
        let headings: Vec<Vec2> = (0..ctx.n_bins).map(|k| ctx.bin_heading(k)).collect();
        let g_conf = front
            .iter()
            .map(|(i, _)| {
                let (u, v) = ((i % w) as f64, (i / w) as f64);
                headings
                    .iter()
                    .map(|hk| goal_conf(u, v, &frame.intrinsics, &frame.camera, hk))
                    .collect()
            })
            .collect();
        Self {
            frame,
            graph,
            front,
            front_mask,
            g_conf,
        }
    }

    /// Bin scores for a node projected to pixel `(u, v)`.
    fn score(&self, u: usize, v: usize, ctx: &ScoreContext) -> Vec<f64> {
        let mut s = vec![0.0; ctx.n_bins];
        let Some(src) = self.graph.snap(u, v, ctx.snap_radius) else {
            return s;
        };
        if self.front.is_empty() {
            return s;
        }
        let cost = mcip(&self.graph, src, Some(&self.front_mask));
        let (h, w) = (self.frame.height(), self.frame.width());
        for ((i, f), g) in self.front.iter().zip(&self.g_conf) {
            let rf = r_conf(cost[*i], h, w) * f;
            if rf <= 0.0 {
                continue;
            }
            for (sk, gk) in s.iter_mut().zip(g) {
                *sk = sk.max(gk * rf);
            }
        }
        s
    }
}

enum Outcome {
    Default,
    Scored(Vec<f64>, f64),
    Keep,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreStats {
    pub scored: usize,
    pub defaulted: usize,
    pub kept: usize,
}

/// Updates the score vectors and score distances of frontier nodes.
pub fn score_graph(graph: &mut NavGraph, frames: &[VisionFrame], robot: &Pose, ctx: &ScoreContext) -> ScoreStats {
    let preps: Vec<FramePrep> = frames.iter().map(|f| FramePrep::new(f, ctx)).collect();
    let todo: Vec<(NodeId, Vec2, bool, f64)> = graph
        .nodes()
        .filter(|n| n.is_frontier())
        .map(|n| (n.id, n.position, !n.was_frontier, n.score_distance))
        .collect();
    let outcomes: Vec<(NodeId, Outcome)> = todo
        .par_iter()
        .map(|(id, pos, newly, d_prev)| {
            let d = (pos - robot.position).norm();
            let hits: Vec<(usize, (usize, usize))> = preps
                .iter()
                .enumerate()
                .filter_map(|(fi, p)| {
                    project_node(pos, &p.frame.camera, &p.frame.intrinsics, &robot.position, ctx.d_score_max)
                        .map(|px| (fi, px))
                })
                .collect();
            let out = if hits.is_empty() {
                if *newly {
                    Outcome::Default
                } else {
                    Outcome::Keep
                }
            } else if *newly || d < *d_prev {
                let mut s = vec![0.0; ctx.n_bins];
                for (fi, (u, v)) in hits {
                    for (a, b) in s.iter_mut().zip(preps[fi].score(u, v, ctx)) {
                        *a = f64::max(*a, b);
                    }
                }
                Outcome::Scored(s, d)
            } else {
                Outcome::Keep
            };
            (*id, out)
        })
        .collect();

    let mut stats = ScoreStats::default();
    for (id, out) in outcomes {
        let n = graph.node_mut(id).unwrap();
        match out {
            Outcome::Default => {
                n.scores = vec![ctx.s_def; ctx.n_bins];
                n.score_distance = f64::INFINITY;
                stats.defaulted += 1;
            }
            Outcome::Scored(s, d) => {
                n.scores = s;
                n.score_distance = d;
                stats.scored += 1;
            }
            Outcome::Keep => stats.kept += 1,
        }
    }
    for n in graph.nodes_mut() {
        n.was_frontier = n.is_frontier();
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navgraph::GraphParams;
    use approx::assert_relative_eq;

    fn cam() -> (CameraPose, Intrinsics) {
        (
            CameraPose::level(Vec2::zeros(), 0.5, 0.0),
            Intrinsics {
                fx: 80.0,
                fy: 240.0,
                cx: 80.0,
                cy: 12.0,
                width: 160,
                height: 96,
            },
        )
    }

    #[test]
    fn projection_validity() {
        let (c, k) = cam();
        let (u, v) = project_node(&Vec2::new(5.0, 0.0), &c, &k, &Vec2::zeros(), 9.0).unwrap();
        assert_eq!(u, 80);
        assert_eq!(v, 36);
        assert!(project_node(&Vec2::new(-5.0, 0.0), &c, &k, &Vec2::zeros(), 9.0).is_none());
        assert!(project_node(&Vec2::new(9.5, 0.0), &c, &k, &Vec2::zeros(), 9.0).is_none());
    }

    #[test]
    fn goal_conf_point_values() {
        let (c, k) = cam();
        let x = Vec2::new(1.0, 0.0);
        assert_relative_eq!(goal_conf(80.0, 50.0, &k, &c, &x), 1.0, epsilon = 1e-12);
        assert_relative_eq!(goal_conf(80.0, 50.0, &k, &c, &-x), 0.5, epsilon = 1e-12);
        assert_relative_eq!(goal_conf(80.0, 50.0, &k, &c, &Vec2::new(0.0, 1.0)), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn r_and_f_conf() {
        assert_eq!(r_conf(0.0, 96, 160), 1.0);
        assert_relative_eq!(r_conf(256.0, 96, 160), 1.0 - 1f64.tanh(), epsilon = 1e-12);
        assert_eq!(r_conf(f64::INFINITY, 96, 160), 0.0);
        assert_eq!(f_conf(0.7, 0.6), 0.7);
        assert_eq!(f_conf(0.6, 0.6), 0.0);
        assert_eq!(f_conf(0.0, 0.6), 0.0);
    }

    #[test]
    fn bins_are_centred_on_x_axis() {
        let ctx = ScoreContext::default();
        assert_eq!(ctx.bin_index(0.0), 0);
        assert_eq!(ctx.bin_index(-0.1), 0);
        assert_eq!(ctx.bin_index(std::f64::consts::PI), 8);
        assert_eq!(ctx.bin_index(-std::f64::consts::FRAC_PI_2), 12);
        for k in 0..16 {
            assert_eq!(ctx.bin_of(&ctx.bin_heading(k)), k);
        }
    }

    fn frame_with(f: impl Fn(usize, usize) -> (f64, f64)) -> VisionFrame {
        let (c, k) = cam();
        let n = k.pixel_count();
        let mut t_vis = vec![0.0; n];
        let mut f_vis = vec![0.0; n];
        for v in 0..k.height {
            for u in 0..k.width {
                let (t, fv) = f(u, v);
                t_vis[v * k.width + u] = t;
                f_vis[v * k.width + u] = fv;
            }
        }
        VisionFrame {
            camera: c,
            intrinsics: k,
            tick: 0,
            t_vis,
            f_vis,
            s_vis: vec![false; n],
            mask_range: vec![f64::INFINITY; n],
        }
    }

    fn one_frontier_node(pos: Vec2) -> (NavGraph, NodeId) {
        let mut g = NavGraph::new();
        let id = g.insert(pos, 1.0, 1.0, &GraphParams::default());
        g.node_mut(id).unwrap().frontier_points.push(pos + Vec2::new(1.0, 0.0));
        (g, id)
    }

    #[test]
    fn zero_frontier_confidence_gives_zero_scores() {
        let frame = frame_with(|_, v| (if v > 12 { 1.0 } else { 0.0 }, 0.0));
        let (mut g, id) = one_frontier_node(Vec2::new(5.0, 0.0));
        score_graph(&mut g, &[frame], &Pose::new(0.0, 0.0, 0.0), &ScoreContext::default());
        let n = g.node(id).unwrap();
        assert!(n.scores.iter().all(|s| *s == 0.0));
        assert_relative_eq!(n.score_distance, 5.0);
    }

    #[test]
    fn single_aligned_frontier_pixel_at_source() {
        // Node projects to (80, 36); that pixel is the only frontier pixel.
        let frame = frame_with(|u, v| {
            let t = if v > 12 { 1.0 } else { 0.0 };
            (t, if (u, v) == (80, 36) { 1.0 } else { 0.0 })
        });
        let (mut g, id) = one_frontier_node(Vec2::new(5.0, 0.0));
        let ctx = ScoreContext::default();
        score_graph(&mut g, &[frame], &Pose::new(0.0, 0.0, 0.0), &ctx);
        let n = g.node(id).unwrap();
        assert_relative_eq!(n.scores[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(n.scores[8], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn farther_robot_keeps_scores() {
        let frame = frame_with(|_, v| (if v > 12 { 1.0 } else { 0.0 }, 0.0));
        let (mut g, id) = one_frontier_node(Vec2::new(5.0, 0.0));
        {
            let n = g.node_mut(id).unwrap();
            n.was_frontier = true;
            n.score_distance = 4.0;
            n.scores = vec![0.42; 16];
        }
        // Robot 6 m from the node and facing it.
        score_graph(&mut g, &[frame], &Pose::new(-1.0, 0.0, 0.0), &ScoreContext::default());
        assert_eq!(g.node(id).unwrap().scores, vec![0.42; 16]);
        assert_eq!(g.node(id).unwrap().score_distance, 4.0);
    }

    #[test]
    fn unprojectable_new_frontier_gets_default() {
        let frame = frame_with(|_, _| (1.0, 1.0));
        let (mut g, id) = one_frontier_node(Vec2::new(-5.0, 0.0));
        g.node_mut(id).unwrap().scores = vec![0.9; 16];
        score_graph(&mut g, &[frame], &Pose::new(0.0, 0.0, 0.0), &ScoreContext::default());
        let n = g.node(id).unwrap();
        assert_eq!(n.scores, vec![0.3; 16]);
        assert!(n.score_distance.is_infinite());
        assert!(n.was_frontier);
    }
}
