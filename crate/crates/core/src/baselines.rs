//! Comparison policies: a memoryless angular-bin frontier follower in the
//! style of LRN, and graph planning with uniform frontier edge weighting.

use serde::{Deserialize, Serialize};

use crate::geom::{Pose, Vec2};
use crate::navgraph::NavGraph;
use crate::planner::{plan, Heuristic, PlanError, PlanResult, PlannerParams};
use crate::scoring::{f_conf, pixel_heading, ScoreContext};
use crate::sensors::VisionFrame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrnState {
    pub heading: Vec2,
    pub n_bins: usize,
}

impl LrnState {
    pub fn new(start: &Pose, n_bins: usize) -> Self {
        Self {
            heading: start.direction(),
            n_bins,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrnDecision {
    pub bin: usize,
    pub heading: Vec2,
    /// Per-bin frontier score after the cross-camera max.
    pub frontier: Vec<f64>,
    /// No bin had any frontier evidence; the previous heading was kept.
    pub no_frontier: bool,
}

fn alignment(a: &Vec2, b: &Vec2) -> f64 {
    (3.0 + a.dot(b)) / 4.0
}

/// Per-bin frontier score for one frame: thresholded F_vis summed per bin
/// and divided by the number of image columns falling in that bin.
fn frame_bins(frame: &VisionFrame, ctx: &ScoreContext) -> Vec<f64> {
    let (w, h) = (frame.width(), frame.height());
    let k = &frame.intrinsics;
    let column_bin: Vec<Option<usize>> = (0..w)
        .map(|u| pixel_heading(u as f64, (h - 1) as f64, k, &frame.camera).map(|d| ctx.bin_of(&d)))
        .collect();
    let mut capacity = vec![0usize; ctx.n_bins];
    for b in column_bin.iter().flatten() {
        capacity[*b] += 1;
    }
    let mut sum = vec![0.0; ctx.n_bins];
    for v in 0..h {
        for u in 0..w {
            let f = f_conf(frame.f_vis[frame.idx(u, v)], ctx.tau_front);
            if f > 0.0 {
                if let Some(b) = column_bin[u] {
                    sum[b] += f;
                }
            }
        }
    }
    sum.iter()
        .zip(&capacity)
        .map(|(s, c)| if *c > 0 { s / *c as f64 } else { 0.0 })
        .collect()
}

pub fn lrn_select_heading(frames: &[VisionFrame], goal: &Vec2, pose: &Pose, state: &mut LrnState, ctx: &ScoreContext) -> LrnDecision {
    let mut frontier = vec![0.0; ctx.n_bins];
    for f in frames {
        for (a, b) in frontier.iter_mut().zip(frame_bins(f, ctx)) {
            *a = f64::max(*a, b);
        }
    }
    let to_goal = goal - pose.position;
    let goal_dir = if to_goal.norm() > 1e-12 {
        to_goal.normalize()
    } else {
        state.heading
    };
    let mut best: Option<(f64, usize)> = None;
    for (k, f) in frontier.iter().enumerate() {
        if *f <= 0.0 {
            continue;
        }
        let hk = ctx.bin_heading(k);
        let s = f * alignment(&hk, &goal_dir) * alignment(&hk, &state.heading);
        if best.map_or(true, |(b, _)| s > b) {
            best = Some((s, k));
        }
    }
    match best {
        Some((_, bin)) => {
            state.heading = ctx.bin_heading(bin);
            LrnDecision {
                bin,
                heading: state.heading,
                frontier,
                no_frontier: false,
            }
        }
        None => LrnDecision {
            bin: ctx.bin_of(&state.heading),
            heading: state.heading,
            frontier,
            no_frontier: true,
        },
    }
}

/// Short-range goal at the edge of the local costmap, or the goal itself
/// once it is inside the costmap.
pub fn lrn_local_goal(pose: &Pose, heading: &Vec2, goal: &Vec2, costmap_radius: f64) -> Vec2 {
    if (goal - pose.position).norm() < costmap_radius {
        *goal
    } else {
        pose.position + heading * costmap_radius
    }
}

/// Graph planning with every frontier-to-goal edge at twice its length.
pub fn vanilla_plan(
    graph: &NavGraph,
    pose: &Pose,
    goal: &Vec2,
    params: &PlannerParams,
    ctx: &ScoreContext,
) -> Result<PlanResult, PlanError> {
    plan(graph, &pose.position, goal, params, ctx, Heuristic::Constant(2.0))
}
