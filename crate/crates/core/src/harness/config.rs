use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::LrnState;
use crate::error::{Error, Result};
use crate::navgraph::GraphParams;
use crate::planner::PlannerParams;
use crate::scoring::ScoreContext;
use crate::sensors::CameraRig;
use crate::triangulation::TriangulationParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Wildos,
    Lrn,
    Vanilla,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Wildos, Policy::Lrn, Policy::Vanilla];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Wildos => "wildos",
            Policy::Lrn => "lrn",
            Policy::Vanilla => "vanilla",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wildos" => Ok(Policy::Wildos),
            "lrn" => Ok(Policy::Lrn),
            "vanilla" | "graphnav" | "vanilla_graphnav" => Ok(Policy::Vanilla),
            other => Err(Error::UnknownPolicy(other.to_string())),
        }
    }
}

/// Every tunable of an episode. Keys in config files use the names given by
/// [`RunConfig::KEYS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub r_max: f64,
    pub r_f_max: f64,
    pub n_samples: usize,
    pub r_trav: f64,
    pub r_edge: f64,
    /// Kept for completeness; oracle masks are already binary.
    pub tau_sim: f64,
    pub tau_trav: f64,
    pub tau_front: f64,
    pub n_particles: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub s_def: f64,
    pub d_score_max: f64,
    pub n_bins: usize,
    pub d_local: f64,
    pub alpha: f64,
    pub d_reach: f64,
    pub z_eps: f64,
    pub log_base: f64,
    pub pixel_eps: f64,
    pub tri_eps: f64,
    pub max_views: usize,
    pub coarse_resolution: f64,
    pub speed: f64,
    pub stuck_ticks: usize,
    pub visual_horizon: f64,
    pub policy: Policy,
    pub seeds: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            r_max: 10.0,
            r_f_max: 4.0,
            n_samples: 1000,
            r_trav: 0.5,
            r_edge: 8.0,
            tau_sim: 0.09,
            tau_trav: 0.9,
            tau_front: 0.6,
            n_particles: 1000,
            d_min: 1.0,
            d_max: 100.0,
            s_def: 0.3,
            d_score_max: 9.0,
            n_bins: 16,
            d_local: 5.0,
            alpha: 20.0,
            d_reach: 0.5,
            z_eps: 1e-6,
            log_base: std::f64::consts::E,
            pixel_eps: 0.05,
            tri_eps: 0.1,
            max_views: 32,
            coarse_resolution: 2.0,
            speed: 1.0,
            stuck_ticks: 50,
            visual_horizon: 40.0,
            policy: Policy::Wildos,
            seeds: vec![0],
        }
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 28] = [
        "r_max",
        "r_f_max",
        "N_samples",
        "r_trav",
        "r_edge",
        "tau_sim",
        "tau_trav",
        "tau_front",
        "N_p",
        "d_min",
        "d_max",
        "s_def",
        "d_score_max",
        "N_bins",
        "d_local",
        "alpha",
        "d_reach",
        "z_eps",
        "log_base",
        "pixel_eps",
        "tri_eps",
        "max_views",
        "coarse_resolution",
        "speed",
        "stuck_ticks",
        "H_v",
        "policy",
        "seeds",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::invalid(key, format!("cannot parse {v:?}")))
        }
        let v = value.trim();
        match key.trim() {
            "r_max" => self.r_max = num(key, v)?,
            "r_f_max" => self.r_f_max = num(key, v)?,
            "N_samples" => self.n_samples = num(key, v)?,
            "r_trav" => self.r_trav = num(key, v)?,
            "r_edge" => self.r_edge = num(key, v)?,
            "tau_sim" => self.tau_sim = num(key, v)?,
            "tau_trav" => self.tau_trav = num(key, v)?,
            "tau_front" => self.tau_front = num(key, v)?,
            "N_p" => self.n_particles = num(key, v)?,
            "d_min" => self.d_min = num(key, v)?,
            "d_max" => self.d_max = num(key, v)?,
            "s_def" => self.s_def = num(key, v)?,
            "d_score_max" => self.d_score_max = num(key, v)?,
            "N_bins" => self.n_bins = num(key, v)?,
            "d_local" => self.d_local = num(key, v)?,
            "alpha" => self.alpha = num(key, v)?,
            "d_reach" => self.d_reach = num(key, v)?,
            "z_eps" => self.z_eps = num(key, v)?,
            "log_base" => {
                self.log_base = if v == "e" { std::f64::consts::E } else { num(key, v)? }
            }
            "pixel_eps" => self.pixel_eps = num(key, v)?,
            "tri_eps" => self.tri_eps = num(key, v)?,
            "max_views" => self.max_views = num(key, v)?,
            "coarse_resolution" => self.coarse_resolution = num(key, v)?,
            "speed" => self.speed = num(key, v)?,
            "stuck_ticks" => self.stuck_ticks = num(key, v)?,
            "H_v" => self.visual_horizon = num(key, v)?,
            "policy" => self.policy = v.parse()?,
            "seeds" => {
                self.seeds = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| num(key, s))
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::invalid(other, "unknown config key")),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn apply(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::invalid(assignment, "expected key=value"))?;
        self.set(k, v)
    }

    /// Flat `key = value` text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, "expected key = value"))?;
            cfg.set(k, v).map_err(|e| Error::parse(n + 1, e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        let vals: [String; 28] = [
            self.r_max.to_string(),
            self.r_f_max.to_string(),
            self.n_samples.to_string(),
            self.r_trav.to_string(),
            self.r_edge.to_string(),
            self.tau_sim.to_string(),
            self.tau_trav.to_string(),
            self.tau_front.to_string(),
            self.n_particles.to_string(),
            self.d_min.to_string(),
            self.d_max.to_string(),
            self.s_def.to_string(),
            self.d_score_max.to_string(),
            self.n_bins.to_string(),
            self.d_local.to_string(),
            self.alpha.to_string(),
            self.d_reach.to_string(),
            self.z_eps.to_string(),
            self.log_base.to_string(),
            self.pixel_eps.to_string(),
            self.tri_eps.to_string(),
            self.max_views.to_string(),
            self.coarse_resolution.to_string(),
            self.speed.to_string(),
            self.stuck_ticks.to_string(),
            self.visual_horizon.to_string(),
            self.policy.to_string(),
            seeds.join(","),
        ];
        Self::KEYS
            .iter()
            .zip(vals)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r_max", self.r_max),
            ("r_f_max", self.r_f_max),
            ("r_trav", self.r_trav),
            ("r_edge", self.r_edge),
            ("d_min", self.d_min),
            ("d_score_max", self.d_score_max),
            ("d_local", self.d_local),
            ("alpha", self.alpha),
            ("d_reach", self.d_reach),
            ("z_eps", self.z_eps),
            ("pixel_eps", self.pixel_eps),
            ("tri_eps", self.tri_eps),
            ("coarse_resolution", self.coarse_resolution),
            ("speed", self.speed),
            ("H_v", self.visual_horizon),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(k, "must be positive"));
            }
        }
        if !(self.log_base > 0.0 && self.log_base != 1.0) {
            return Err(Error::invalid("log_base", "must be positive and not 1"));
        }
        if self.d_max <= self.d_min {
            return Err(Error::invalid("d_max", "must exceed d_min"));
        }
        if self.r_max >= self.visual_horizon {
            return Err(Error::invalid("r_max", "must be below H_v"));
        }
        if self.n_bins < 4 {
            return Err(Error::invalid("N_bins", "need at least 4 bins"));
        }
        if self.n_samples == 0 || self.n_particles == 0 || self.max_views == 0 || self.stuck_ticks == 0 {
            return Err(Error::invalid("counts", "N_samples, N_p, max_views and stuck_ticks must be positive"));
        }
        for (k, v) in [("s_def", self.s_def), ("tau_trav", self.tau_trav), ("tau_front", self.tau_front)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(k, "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn graph_params(&self) -> GraphParams {
        GraphParams {
            r_f_max: self.r_f_max,
            n_samples: self.n_samples,
            r_trav: self.r_trav,
            r_edge: self.r_edge,
            n_bins: self.n_bins,
            s_def: self.s_def,
        }
    }

    pub fn score_context(&self) -> ScoreContext {
        ScoreContext {
            tau_trav: self.tau_trav,
            tau_front: self.tau_front,
            s_def: self.s_def,
            d_score_max: self.d_score_max,
            n_bins: self.n_bins,
            pixel_eps: self.pixel_eps,
            ..ScoreContext::default()
        }
    }

    pub fn planner_params(&self) -> PlannerParams {
        PlannerParams {
            alpha: self.alpha,
            z_eps: self.z_eps,
            log_base: self.log_base,
            coarse_resolution: self.coarse_resolution,
            d_local: self.d_local,
        }
    }

    pub fn triangulation_params(&self) -> TriangulationParams {
        TriangulationParams {
            n_particles: self.n_particles,
            d_min: self.d_min,
            d_max: self.d_max,
            epsilon: self.tri_eps,
            max_views: self.max_views,
            r_max: self.r_max,
        }
    }

    pub fn camera_rig(&self) -> CameraRig {
        CameraRig {
            visual_horizon: self.visual_horizon,
            ..CameraRig::default()
        }
    }

    pub fn lrn_state(&self, start: &crate::geom::Pose) -> LrnState {
        LrnState::new(start, self.n_bins)
    }
}
