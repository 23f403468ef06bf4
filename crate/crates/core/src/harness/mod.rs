//! Closed-loop episodes, suites, metrics, drawings and built-in scenarios.

mod config;
mod episode;
mod metrics;
mod render;
pub mod scenarios;

pub use config::{Policy, RunConfig};
pub use episode::{run_episode, EpisodeLog, EpisodeOptions, GraphFrame, NodeView, Outcome, TickRecord};
pub use metrics::{exit_switches, mean_std, revisit_cycles, run_suite, summarize, RunRow, SuiteResult, SummaryRow};
pub use render::{render_episode, write_svgs};
