//! Randomized invariant checks shared by the property tests and the
//! acceptance run. Each check drives a proptest runner for `cases` inputs.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scoutnav::geom::{CameraPose, Pose, Vec2, Vec3};
use scoutnav::grid::bresenham;
use scoutnav::harness::{run_episode, EpisodeOptions, Policy, RunConfig};
use scoutnav::navgraph::{update_navigation_graph, GraphParams, NavGraph};
use scoutnav::planner::{build_coarse_grid, safe_distance};
use scoutnav::scoring::{goal_conf, r_conf, f_conf, score_graph, ScoreContext};
use scoutnav::sensors::{render_vision, sense_geometric, CameraRig, TraversabilityGrid};
use scoutnav::triangulation::{project_particles, ray_weighted_triangulation, ViewRecord};
use scoutnav::world::{Scenario, Terrain, WorldGrid};

pub const CASES: u32 = 100;

pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

/// Obstacle and hazard rectangles scattered over an open square field.
#[derive(Debug, Clone)]
pub struct WorldSpec {
    pub size: f64,
    pub obstacles: Vec<(f64, f64, f64, f64)>,
    pub hazards: Vec<(f64, f64, f64, f64)>,
    pub seed: u64,
}

const RES: f64 = 0.25;

pub fn world_spec() -> impl Strategy<Value = WorldSpec> {
    let rect = (0.0..1.0f64, 0.0..1.0f64, 0.3..4.0f64, 0.3..4.0f64);
    (
        16.0..28.0f64,
        prop::collection::vec(rect.clone(), 0..10),
        prop::collection::vec(rect, 0..3),
        any::<u64>(),
    )
        .prop_map(|(size, obstacles, hazards, seed)| WorldSpec {
            size,
            obstacles,
            hazards,
            seed,
        })
}

impl WorldSpec {
    pub fn start(&self) -> Vec2 {
        Vec2::new(self.size / 2.0, self.size / 2.0)
    }

    pub fn build(&self) -> WorldGrid {
        let n = (self.size / RES).round() as usize;
        let mut w = WorldGrid::new(n, n, RES).unwrap();
        w.paint(Terrain::Ground, |_| true);
        let s = self.size;
        for (terrain, list) in [(Terrain::Obstacle, &self.obstacles), (Terrain::Hazard, &self.hazards)] {
            for &(fx, fy, rw, rh) in list {
                let (x0, y0) = (fx * s, fy * s);
                w.paint(terrain, move |p| p.x >= x0 && p.x <= x0 + rw && p.y >= y0 && p.y <= y0 + rh);
            }
        }
        let c = self.start();
        w.paint(Terrain::Ground, move |p| (p - c).norm() <= 1.5);
        w
    }
}

/// Robot poses of a short random walk over ground cells.
pub fn walk(world: &WorldGrid, start: Vec2, steps: usize, seed: u64) -> Vec<Pose> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pose = Pose::new(start.x, start.y, 0.0);
    let mut out = vec![pose];
    for _ in 1..steps {
        let a: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let d: f64 = rng.gen_range(0.5..2.0);
        let next = pose.position + Vec2::new(a.cos(), a.sin()) * d;
        if world.contains_point(&next) && world.terrain_at(&next) == Terrain::Ground {
            pose = Pose::new(next.x, next.y, a);
        }
        out.push(pose);
    }
    out
}

pub struct WalkTrace {
    pub world: WorldGrid,
    pub poses: Vec<Pose>,
    pub grids: Vec<TraversabilityGrid>,
    pub graphs: Vec<NavGraph>,
}

pub fn run_walk(spec: &WorldSpec, steps: usize) -> WalkTrace {
    let world = spec.build();
    let poses = walk(&world, spec.start(), steps, spec.seed);
    let params = GraphParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut graph = NavGraph::new();
    let mut grids = Vec::new();
    let mut graphs = Vec::new();
    for pose in &poses {
        let grid = sense_geometric(&world, pose, 10.0);
        update_navigation_graph(&mut graph, &grid, &params, &mut rng);
        grids.push(grid);
        graphs.push(graph.clone());
    }
    WalkTrace {
        world,
        poses,
        grids,
        graphs,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

/// Confidence terms stay in their ranges and every bin score of a scored
/// graph lies in [0, 1].
pub fn score_bounds(cases: u32) -> Result<(), String> {
    let rig = CameraRig::default();
    let k = rig.intrinsics;
    run(
        cases,
        (world_spec(), 0.0..160.0f64, 0.0..96.0f64, -3.2..3.2f64, 0.0..1e4f64, 0.0..1.0f64),
        |(spec, u, v, a, cost, fv)| {
            let cam = CameraPose::level(Vec2::zeros(), 0.5, 0.3);
            let g = goal_conf(u, v, &k, &cam, &Vec2::new(a.cos(), a.sin()));
            ensure((0.5..=1.0).contains(&g), || format!("G = {g}"))?;
            let r = r_conf(cost, k.height, k.width);
            ensure((0.0..=1.0).contains(&r), || format!("R = {r}"))?;
            let f = f_conf(fv, 0.6);
            ensure((0.0..=1.0).contains(&f), || format!("F = {f}"))?;

            let mut trace = run_walk(&spec, 2);
            let pose = *trace.poses.last().unwrap();
            let mut graph = trace.graphs.pop().unwrap();
            let frames = render_vision(&trace.world, &rig, &pose, None, 0);
            let ctx = ScoreContext::default();
            score_graph(&mut graph, &frames, &pose, &ctx);
            for n in graph.nodes() {
                ensure(n.scores.len() == ctx.n_bins, || "bin count".into())?;
                for s in &n.scores {
                    ensure((0.0..=1.0).contains(s), || format!("node {:?} score {s}", n.id))?;
                }
                let lo = n.scores.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = n.max_score();
                ensure(hi <= 2.0 * lo + 1e-12, || format!("node {:?} bins {lo}..{hi}", n.id))?;
            }
            Ok(())
        },
    )
}

/// Explored radii of surviving nodes never shrink, and free radii stay in
/// (0, r_f_max].
pub fn explored_radius_monotone(cases: u32) -> Result<(), String> {
    let r_f_max = GraphParams::default().r_f_max;
    run(cases, world_spec(), |spec| {
        let trace = run_walk(&spec, 6);
        for pair in trace.graphs.windows(2) {
            for n in pair[1].nodes() {
                ensure(n.free_radius > 0.0 && n.free_radius <= r_f_max, || format!("r_f = {}", n.free_radius))?;
                ensure(n.explored_radius >= 0.0, || "negative r_e".into())?;
                if let Some(old) = pair[0].node(n.id) {
                    ensure(n.explored_radius >= old.explored_radius, || {
                        format!("node {:?}: r_e {} -> {}", n.id, old.explored_radius, n.explored_radius)
                    })?;
                }
            }
        }
        Ok(())
    })
}

/// After each update no frontier point sits on a known cell of the window
/// that produced it, and no node sits on one of its obstacle cells.
pub fn frontier_soundness(cases: u32) -> Result<(), String> {
    run(cases, world_spec(), |spec| {
        let trace = run_walk(&spec, 6);
        ensure(!trace.graphs.last().unwrap().is_empty(), || "walk built no graph".into())?;
        for (grid, graph) in trace.grids.iter().zip(&trace.graphs) {
            for n in graph.nodes() {
                ensure(
                    grid.state_at(&n.position) != scoutnav::sensors::CellState::Obstacle,
                    || format!("node {:?} on an obstacle", n.id),
                )?;
                for p in &n.frontier_points {
                    ensure(!grid.contains_point(p) || !grid.state_at(p).is_known(), || {
                        format!("frontier point {p:?} of node {:?} is known", n.id)
                    })?;
                }
            }
        }
        Ok(())
    })
}

/// Every stored edge, re-drawn on the ground-truth map, avoids obstacles.
pub fn edge_safety(cases: u32) -> Result<(), String> {
    run(cases, world_spec(), |spec| {
        let trace = run_walk(&spec, 6);
        let graph = trace.graphs.last().unwrap();
        for (a, b, _) in graph.edges() {
            let pa = graph.node(a).unwrap().position;
            let pb = graph.node(b).unwrap().position;
            let ca = trace.world.cell_of(&pa);
            let cb = trace.world.cell_of(&pb);
            for c in bresenham(ca, cb) {
                ensure(trace.world.terrain(c) != Terrain::Obstacle, || {
                    format!("edge {a:?}-{b:?} crosses obstacle cell {c:?}")
                })?;
            }
        }
        Ok(())
    })
}

/// The weighted estimate is a convex combination of the particles: along
/// every probe direction it lies between the particles' extremes.
pub fn estimate_in_hull(cases: u32) -> Result<(), String> {
    let k = CameraRig::default().intrinsics;
    let view = (
        -50.0..50.0f64,
        -50.0..50.0f64,
        -3.2..3.2f64,
        prop::collection::vec((0u32..160, 0u32..96), 1..20),
    );
    run(
        cases,
        (prop::collection::vec(view, 1..5), 1usize..200, 0.01..5.0f64, any::<u64>()),
        |(views, n_p, eps, seed)| {
            let views: Vec<ViewRecord> = views
                .into_iter()
                .enumerate()
                .map(|(i, (x, y, yaw, pixels))| ViewRecord {
                    pixels,
                    camera: CameraPose::level(Vec2::new(x, y), 0.5, yaw),
                    intrinsics: k,
                    tick: i,
                })
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let particles = project_particles(&views, n_p, 1.0, 100.0, &mut rng);
            let est = ray_weighted_triangulation(&particles, &views, eps).unwrap();
            ensure(est.weight > 0.0, || "non-positive total weight".into())?;
            let mut dirs = vec![Vec3::x(), Vec3::y(), Vec3::z()];
            for _ in 0..29 {
                let d = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if d.norm() > 1e-6 {
                    dirs.push(d.normalize());
                }
            }
            for d in dirs {
                let proj = est.position.dot(&d);
                let (lo, hi) = particles.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let t = p.position.dot(&d);
                    (lo.min(t), hi.max(t))
                });
                let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
                ensure(proj >= lo - tol && proj <= hi + tol, || {
                    format!("estimate {proj} outside [{lo}, {hi}] along {d:?}")
                })?;
            }
            Ok(())
        },
    )
}

/// The coarse safe distance never undercuts the straight-line distance.
pub fn safe_distance_bound(cases: u32) -> Result<(), String> {
    let node = (0.0..40.0f64, 0.0..40.0f64, 0.0..6.0f64);
    run(
        cases,
        (prop::collection::vec(node, 1..25), (-10.0..50.0f64, -10.0..50.0f64), prop_oneof![Just(1.0), Just(2.0), Just(3.0)]),
        |(nodes, (gx, gy), res)| {
            let params = GraphParams::default();
            let mut g = NavGraph::new();
            for (x, y, re) in nodes {
                g.insert(Vec2::new(x, y), 0.5, re, &params);
            }
            let goal = Vec2::new(gx, gy);
            let coarse = build_coarse_grid(&g, &goal, res);
            for n in g.nodes() {
                let d = safe_distance(n, &goal, &coarse);
                let e = (goal - n.position).norm();
                ensure(d >= e - 1e-9, || format!("node {:?}: d~ {d} < euclid {e}", n.id))?;
            }
            Ok(())
        },
    )
}

/// Same seed and inputs give the same graph at every tick and the same
/// episode log.
pub fn determinism(cases: u32) -> Result<(), String> {
    let policy = prop_oneof![Just(Policy::Wildos), Just(Policy::Vanilla), Just(Policy::Lrn)];
    run(cases, (world_spec(), policy, any::<u64>()), |(spec, policy, seed)| {
        let a = run_walk(&spec, 3);
        let b = run_walk(&spec, 3);
        for (ga, gb) in a.graphs.iter().zip(&b.graphs) {
            ensure(ga == gb, || "graph differs between identical runs".into())?;
        }

        let start = spec.start();
        let scenario = Scenario {
            name: "prop".into(),
            world: a.world,
            start,
            start_heading_deg: 0.0,
            goal: Vec2::new(spec.size - 1.0, start.y),
            query: None,
            budget: 3,
            seed,
            regions: Vec::new(),
        };
        let cfg = RunConfig {
            policy,
            ..RunConfig::default()
        };
        let la = run_episode(&scenario, &cfg, seed, EpisodeOptions::default()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let lb = run_episode(&scenario, &cfg, seed, EpisodeOptions::default()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure(format!("{la:?}") == format!("{lb:?}"), || "episode logs differ".into())
    })
}

pub type Check = fn(u32) -> Result<(), String>;

pub const INVARIANTS: [(&str, Check); 7] = [
    ("score bounds", score_bounds),
    ("explored radius monotone", explored_radius_monotone),
    ("frontier soundness", frontier_soundness),
    ("edge safety", edge_safety),
    ("estimate in hull", estimate_in_hull),
    ("safe distance >= euclidean", safe_distance_bound),
    ("determinism", determinism),
];
