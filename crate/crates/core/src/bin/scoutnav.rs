use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scoutnav::harness::{self, scenarios, EpisodeOptions, Policy, RunConfig};
use scoutnav::world::{load_scenario, Scenario};
use scoutnav::{Error, Result};

#[derive(Parser)]
#[command(name = "scoutnav", version, about = "Exploration and goal-reaching simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode.
    Run {
        /// Scenario file, or the name of a built-in scenario.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "wildos")]
        policy: Policy,
        #[arg(long)]
        seed: Option<u64>,
        /// key=value parameter file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Parameter override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Write one SVG per tick here.
        #[arg(long)]
        render_dir: Option<PathBuf>,
        /// Write graph snapshots (JSON lines) and the triangulation log.
        #[arg(long)]
        dump_frames: bool,
        /// Output directory for the per-tick CSV and dumps.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every scenario in a directory under several policies and seeds.
    Suite {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "wildos,vanilla,lrn")]
        policies: Vec<Policy>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        seeds: Vec<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the built-in scenario library as text files.
    Scenarios {
        #[arg(long, default_value = "scenarios")]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in overrides {
        cfg.apply(kv)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_scenario(arg: &str) -> Result<Scenario> {
    let p = Path::new(arg);
    if p.exists() {
        return load_scenario(p);
    }
    scenarios::by_name(arg).ok_or_else(|| Error::invalid("scenario", format!("no file or built-in named `{arg}`")))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            policy,
            seed,
            config,
            set,
            render_dir,
            dump_frames,
            out,
        } => {
            let mut cfg = load_config(config.as_deref(), &set)?;
            cfg.policy = policy;
            let sc = resolve_scenario(&scenario)?;
            let seed = seed.unwrap_or(sc.seed);
            let opts = EpisodeOptions {
                record_graph: render_dir.is_some(),
                dump_snapshots: dump_frames,
            };
            let log = harness::run_episode(&sc, &cfg, seed, opts)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let stem = format!("{}_{}_{}", sc.name, policy.name(), seed);
            log.write_ticks_csv(create(&out.join(format!("{stem}.csv")))?)?;
            if dump_frames {
                let p = out.join(format!("{stem}_graph.jsonl"));
                let mut f = create(&p)?;
                for line in &log.snapshots {
                    f.write_all(line.as_bytes()).map_err(|e| Error::io(&p, e))?;
                }
                let p = out.join(format!("{stem}_goal.csv"));
                let mut wtr = csv::Writer::from_writer(create(&p)?);
                for row in &log.triangulation {
                    wtr.serialize(row)?;
                }
                wtr.flush().map_err(|e| Error::io(&p, e))?;
            }
            if let Some(dir) = render_dir {
                harness::write_svgs(&dir, &harness::render_episode(&sc, &log))?;
            }
            println!(
                "{} {} seed {}: {:?} after {} ticks, {:.1} m, goal error {:.2} m",
                sc.name,
                policy.name(),
                seed,
                log.outcome,
                log.tick_count,
                log.trajectory_length,
                log.final_goal_error
            );
        }
        Command::Suite {
            scenarios: dir,
            policies,
            seeds,
            config,
            set,
            out,
        } => {
            let cfg = load_config(config.as_deref(), &set)?;
            let scs = scenario_files(&dir)?
                .iter()
                .map(load_scenario)
                .collect::<Result<Vec<_>>>()?;
            let result = harness::run_suite(&scs, &policies, &seeds, &cfg)?;
            result.write_rows_csv(create(&out)?)?;
            let summary = out.with_extension("summary.csv");
            result.write_summary_csv(create(&summary)?)?;
            print!("{}", result.summary_table());
        }
        Command::Scenarios { out } => {
            for p in scenarios::write_library(&out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
