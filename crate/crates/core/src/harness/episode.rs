use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Policy, RunConfig};
use super::metrics;
use crate::baselines::{lrn_local_goal, lrn_select_heading, vanilla_plan};
use crate::error::Result;
use crate::geom::{Pose, Vec2};
use crate::navgraph::{update_navigation_graph, NavGraph};
use crate::planner::{plan, step_robot, Heuristic};
use crate::scoring::score_graph;
use crate::sensors::{render_vision, sense_geometric};
use crate::triangulation::{GoalSource, GoalTracker, TriangulationLogRow};
use crate::world::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    BudgetExhausted,
    Stuck,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::BudgetExhausted => "budget_exhausted",
            Outcome::Stuck => "stuck",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub goal_x: f64,
    pub goal_y: f64,
    pub goal_source: GoalSource,
    pub goal_error: f64,
    pub exit: Option<u32>,
    pub bin: Option<usize>,
    pub aux_cost: Option<f64>,
    pub plan_cost: Option<f64>,
    pub path_length: Option<f64>,
    pub local_x: f64,
    pub local_y: f64,
    pub nodes: usize,
    pub edges: usize,
    pub frontier_nodes: usize,
    pub moved: f64,
    pub blocked: bool,
    pub no_frontier: bool,
}

/// Node data kept for drawing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeView {
    pub position: Vec2,
    pub explored_radius: f64,
    pub frontier: bool,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphFrame {
    pub tick: usize,
    pub nodes: Vec<NodeView>,
    pub edges: Vec<(Vec2, Vec2)>,
    pub plan: Vec<Vec2>,
}

impl GraphFrame {
    fn capture(tick: usize, graph: &NavGraph, plan: Vec<Vec2>) -> Self {
        Self {
            tick,
            nodes: graph
                .nodes()
                .map(|n| NodeView {
                    position: n.position,
                    explored_radius: n.explored_radius,
                    frontier: n.is_frontier(),
                    scores: n.scores.clone(),
                })
                .collect(),
            edges: graph
                .edges()
                .map(|(a, b, _)| (graph.node(a).unwrap().position, graph.node(b).unwrap().position))
                .collect(),
            plan,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeOptions {
    /// Keep a drawable copy of the graph every tick.
    pub record_graph: bool,
    /// Keep a JSON-lines snapshot of the graph every tick.
    pub dump_snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeLog {
    pub scenario: String,
    pub policy: Policy,
    pub seed: u64,
    pub outcome: Outcome,
    pub tick_count: usize,
    pub trajectory_length: f64,
    /// Start pose followed by the pose after every tick.
    pub trajectory: Vec<Vec2>,
    pub ticks: Vec<TickRecord>,
    pub exit_switches: usize,
    /// Re-entries into each scenario region after leaving it.
    pub region_revisits: Vec<(String, usize)>,
    pub final_goal_error: f64,
    #[serde(skip)]
    pub graph_frames: Vec<GraphFrame>,
    #[serde(skip)]
    pub snapshots: Vec<String>,
    #[serde(skip)]
    pub triangulation: Vec<TriangulationLogRow>,
}

impl EpisodeLog {
    pub fn revisits(&self, region: &str) -> usize {
        self.region_revisits
            .iter()
            .find(|(n, _)| n == region)
            .map_or(0, |(_, c)| *c)
    }

    pub fn write_ticks_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for t in &self.ticks {
            wtr.serialize(t)?;
        }
        wtr.flush().map_err(|e| crate::Error::io("<episode csv>", e))?;
        Ok(())
    }
}

pub fn run_episode(scenario: &Scenario, config: &RunConfig, seed: u64, options: EpisodeOptions) -> Result<EpisodeLog> {
    config.validate()?;
    scenario.validate()?;
    let world = &scenario.world;
    let rig = config.camera_rig();
    rig.validate(config.r_max)?;
    let gp = config.graph_params();
    let ctx = config.score_context();
    let pp = config.planner_params();
    let policy = config.policy;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pose = scenario.start_pose();
    let mut graph = NavGraph::new();
    let mut tracker = GoalTracker::new(scenario.goal, config.triangulation_params());
    let mut lrn = config.lrn_state(&pose);
    let true_goal = scenario.true_goal();
    let query = scenario.query.as_deref();

    let mut trajectory = vec![pose.position];
    let mut ticks = Vec::new();
    let mut graph_frames = Vec::new();
    let mut snapshots = Vec::new();
    let mut blocked_run = 0usize;
    let mut outcome = Outcome::BudgetExhausted;

    for tick in 0..scenario.budget {
        if scenario.reach_distance(&pose.position) <= config.d_reach {
            outcome = Outcome::Success;
            break;
        }
        let grid = sense_geometric(world, &pose, config.r_max);
        if policy != Policy::Lrn {
            update_navigation_graph(&mut graph, &grid, &gp, &mut rng);
        }
        let frames = if policy == Policy::Vanilla {
            Vec::new()
        } else {
            render_vision(world, &rig, &pose, query, tick)
        };
        let goal = if policy == Policy::Wildos {
            tracker.update(&frames, tick, &mut rng)
        } else {
            scenario.goal
        };

        let mut rec = TickRecord {
            tick,
            x: pose.position.x,
            y: pose.position.y,
            heading: pose.heading,
            goal_x: goal.x,
            goal_y: goal.y,
            goal_source: if policy == Policy::Wildos { tracker.source() } else { GoalSource::Prior },
            goal_error: (goal - true_goal).norm(),
            exit: None,
            bin: None,
            aux_cost: None,
            plan_cost: None,
            path_length: None,
            local_x: pose.position.x,
            local_y: pose.position.y,
            nodes: 0,
            edges: 0,
            frontier_nodes: 0,
            moved: 0.0,
            blocked: false,
            no_frontier: false,
        };

        let mut drawn_plan = Vec::new();
        let local_goal = match policy {
            Policy::Lrn => {
                let d = lrn_select_heading(&frames, &goal, &pose, &mut lrn, &ctx);
                rec.bin = Some(d.bin);
                rec.no_frontier = d.no_frontier;
                lrn_local_goal(&pose, &d.heading, &goal, config.r_max)
            }
            Policy::Wildos | Policy::Vanilla => {
                let result = if policy == Policy::Wildos {
                    score_graph(&mut graph, &frames, &pose, &ctx);
                    plan(&graph, &pose.position, &goal, &pp, &ctx, Heuristic::Scored)
                } else {
                    vanilla_plan(&graph, &pose, &goal, &pp, &ctx)
                };
                rec.nodes = graph.len();
                rec.edges = graph.edge_count();
                rec.frontier_nodes = graph.frontier_ids().len();
                match result {
                    Ok(p) => {
                        rec.exit = p.exit.map(|id| id.0);
                        rec.bin = p.bin;
                        rec.aux_cost = Some(p.aux_cost);
                        rec.plan_cost = Some(p.cost);
                        rec.path_length = Some(p.path_length());
                        drawn_plan = p.polyline.clone();
                        p.local_goal
                    }
                    Err(_) => {
                        rec.no_frontier = true;
                        ticks.push(rec);
                        outcome = Outcome::Stuck;
                        break;
                    }
                }
            }
        };
        rec.local_x = local_goal.x;
        rec.local_y = local_goal.y;
        if options.record_graph {
            graph_frames.push(GraphFrame::capture(tick, &graph, drawn_plan));
        }
        if options.dump_snapshots {
            let mut buf = Vec::new();
            graph.snapshot(tick).write_jsonl(&mut buf)?;
            snapshots.push(String::from_utf8(buf).expect("json is utf-8"));
        }

        let step = step_robot(world, &grid, &pose, &local_goal, config.speed);
        rec.moved = step.moved;
        rec.blocked = step.blocked || step.moved < 1e-6;
        pose = Pose {
            position: step.pose.position,
            heading: if step.moved > 0.0 { step.pose.heading } else { pose.heading },
        };
        trajectory.push(pose.position);
        ticks.push(rec);

        blocked_run = if ticks.last().unwrap().blocked { blocked_run + 1 } else { 0 };
        if blocked_run >= config.stuck_ticks {
            outcome = Outcome::Stuck;
            break;
        }
    }
    if outcome == Outcome::BudgetExhausted && scenario.reach_distance(&pose.position) <= config.d_reach {
        outcome = Outcome::Success;
    }

    let trajectory_length = trajectory.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let exits: Vec<Option<u32>> = ticks.iter().map(|t| t.exit).collect();
    let region_revisits = scenario
        .regions
        .iter()
        .map(|r| (r.name.clone(), metrics::revisit_cycles(&trajectory, r)))
        .collect();
    let final_goal_error = ticks.last().map_or((scenario.goal - true_goal).norm(), |t| t.goal_error);
    Ok(EpisodeLog {
        scenario: scenario.name.clone(),
        policy,
        seed,
        outcome,
        tick_count: ticks.len(),
        trajectory_length,
        trajectory,
        ticks,
        exit_switches: metrics::exit_switches(&exits),
        region_revisits,
        final_goal_error,
        graph_frames,
        snapshots,
        triangulation: tracker.log().to_vec(),
    })
}
