use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Policy, RunConfig};
use super::episode::{run_episode, EpisodeLog, EpisodeOptions, Outcome};
use crate::error::Result;
use crate::geom::Vec2;
use crate::world::{Region, Scenario};

/// Number of times the chosen exit frontier changes between consecutive
/// planned ticks.
pub fn exit_switches(exits: &[Option<u32>]) -> usize {
    let planned: Vec<u32> = exits.iter().flatten().copied().collect();
    planned.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Re-entries into `region` after having left it.
pub fn revisit_cycles(trajectory: &[Vec2], region: &Region) -> usize {
    let mut entries = 0usize;
    let mut inside = false;
    for p in trajectory {
        let now = region.contains(p);
        if now && !inside {
            entries += 1;
        }
        inside = now;
    }
    entries.saturating_sub(1)
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub scenario: String,
    pub policy: Policy,
    pub seed: u64,
    pub outcome: Outcome,
    pub ticks: usize,
    pub length: f64,
    pub exit_switches: usize,
    pub revisit_cycles: usize,
    pub no_frontier_ticks: usize,
    pub final_goal_error: f64,
}

impl RunRow {
    pub fn from_log(log: &EpisodeLog) -> Self {
        Self {
            scenario: log.scenario.clone(),
            policy: log.policy,
            seed: log.seed,
            outcome: log.outcome,
            ticks: log.tick_count,
            length: log.trajectory_length,
            exit_switches: log.exit_switches,
            revisit_cycles: log.region_revisits.iter().map(|(_, c)| *c).sum(),
            no_frontier_ticks: log.ticks.iter().filter(|t| t.no_frontier).count(),
            final_goal_error: log.final_goal_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub policy: Policy,
    pub runs: usize,
    pub success_rate: f64,
    pub mean_length: f64,
    pub std_length: f64,
    pub mean_ticks: f64,
    pub std_ticks: f64,
    pub mean_exit_switches: f64,
    pub mean_revisit_cycles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub rows: Vec<RunRow>,
    pub summary: Vec<SummaryRow>,
}

impl SuiteResult {
    pub fn summary_for(&self, scenario: &str, policy: Policy) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.scenario == scenario && s.policy == policy)
    }

    pub fn write_rows_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush().map_err(|e| crate::Error::io("<suite csv>", e))?;
        Ok(())
    }

    pub fn write_summary_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for r in &self.summary {
            wtr.serialize(r)?;
        }
        wtr.flush().map_err(|e| crate::Error::io("<summary csv>", e))?;
        Ok(())
    }

    /// Fixed-width table for terminals.
    pub fn summary_table(&self) -> String {
        let mut s = format!(
            "{:<16} {:<8} {:>4} {:>7} {:>16} {:>16} {:>8} {:>8}\n",
            "scenario", "policy", "runs", "success", "length", "ticks", "switches", "revisits"
        );
        for r in &self.summary {
            s.push_str(&format!(
                "{:<16} {:<8} {:>4} {:>7.2} {:>9.1} ± {:<5.1} {:>9.1} ± {:<5.1} {:>8.1} {:>8.1}\n",
                r.scenario,
                r.policy.name(),
                r.runs,
                r.success_rate,
                r.mean_length,
                r.std_length,
                r.mean_ticks,
                r.std_ticks,
                r.mean_exit_switches,
                r.mean_revisit_cycles
            ));
        }
        s
    }
}

pub fn summarize(rows: &[RunRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, Policy)> = rows.iter().map(|r| (r.scenario.clone(), r.policy)).collect();
    keys.dedup();
    let mut seen = Vec::new();
    for k in keys {
        if !seen.contains(&k) {
            seen.push(k);
        }
    }
    seen.into_iter()
        .map(|(scenario, policy)| {
            let group: Vec<&RunRow> = rows
                .iter()
                .filter(|r| r.scenario == scenario && r.policy == policy)
                .collect();
            let n = group.len();
            let lengths: Vec<f64> = group.iter().map(|r| r.length).collect();
            let ticks: Vec<f64> = group.iter().map(|r| r.ticks as f64).collect();
            let (mean_length, std_length) = mean_std(&lengths);
            let (mean_ticks, std_ticks) = mean_std(&ticks);
            SummaryRow {
                scenario,
                policy,
                runs: n,
                success_rate: group.iter().filter(|r| r.outcome == Outcome::Success).count() as f64 / n as f64,
                mean_length,
                std_length,
                mean_ticks,
                std_ticks,
                mean_exit_switches: group.iter().map(|r| r.exit_switches as f64).sum::<f64>() / n as f64,
                mean_revisit_cycles: group.iter().map(|r| r.revisit_cycles as f64).sum::<f64>() / n as f64,
            }
        })
        .collect()
}

/// Runs every (scenario, policy, seed) combination in parallel. Rows come
/// back in scenario, policy, seed order.
pub fn run_suite(scenarios: &[Scenario], policies: &[Policy], seeds: &[u64], base: &RunConfig) -> Result<SuiteResult> {
    let jobs: Vec<(usize, Policy, u64)> = (0..scenarios.len())
        .flat_map(|s| policies.iter().flat_map(move |p| seeds.iter().map(move |seed| (s, *p, *seed))))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|(s, p, seed)| {
            let mut cfg = base.clone();
            cfg.policy = *p;
            run_episode(&scenarios[*s], &cfg, *seed, EpisodeOptions::default()).map(|log| RunRow::from_log(&log))
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&rows);
    Ok(SuiteResult { rows, summary })
}
