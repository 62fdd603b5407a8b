use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swarm_manifold::io::config::{PipelineConfig, Source, Track, OUT_DIR_ENV};
use swarm_manifold::io::csv::{embedding_csv, residual_csv, save_trajectory_csv, write_text};
use swarm_manifold::io::pipeline::{acquire_dataset, isomap_frames, metric_for};
use swarm_manifold::io::{load_trajectory_csv, run_analysis, run_pipeline};
use swarm_manifold::manifold::isomap_configurations;
use swarm_manifold::mapping::track;
use swarm_manifold::Result;

#[derive(Parser)]
#[command(name = "swarm-manifold", version, about = "Phase segmentation and Isomap analysis of collective motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its trajectory CSV.
    Simulate(Options),
    /// Observables, distance image and segmentation (no Isomap).
    Analyze(Options),
    /// Full pipeline including per-segment Isomap.
    Run(Options),
    /// Isomap over every configuration of a trajectory.
    Isomap(Options),
}

#[derive(Args)]
struct Options {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario name: speed-switch, noise-switch or split-rejoin.
    #[arg(long)]
    scenario: Option<String>,
    /// Trajectory CSV to analyze instead of simulating.
    #[arg(long, conflicts_with = "scenario")]
    input: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    xi1: Option<f64>,
    #[arg(long)]
    xi2: Option<f64>,
    /// all_pairs or nearest_neighbor.
    #[arg(long)]
    epsilon_mode: Option<String>,
    /// Isomap neighbour count.
    #[arg(long)]
    k: Option<usize>,
    /// Largest embedding dimension tried.
    #[arg(long)]
    dmax: Option<usize>,
    /// Residual-variance threshold for d*.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    min_len: Option<usize>,
    #[arg(long)]
    merge_tol: Option<f64>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Extra `key=value` settings (repeatable), e.g. `--set noise_high=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Options {
    fn into_config(self) -> Result<PipelineConfig> {
        let mut config = PipelineConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        // source first so scenario keys given with --set can be checked
        if let Some(s) = &self.scenario {
            if let Some(Source::Input(_)) = config.source {
                config.source = None;
            }
            config.set("scenario", s)?;
        }
        if let Some(p) = &self.input {
            if let Some(Source::Scenario(_)) = config.source {
                config.source = None;
            }
            config.set("input", &p.to_string_lossy())?;
        }
        let flags: [(&str, Option<String>); 9] = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("xi1", self.xi1.map(|v| v.to_string())),
            ("xi2", self.xi2.map(|v| v.to_string())),
            ("epsilon_mode", self.epsilon_mode.clone()),
            ("k", self.k.map(|v| v.to_string())),
            ("dmax", self.dmax.map(|v| v.to_string())),
            ("threshold", self.threshold.map(|v| v.to_string())),
            ("min_len", self.min_len.map(|v| v.to_string())),
            ("merge_tol", self.merge_tol.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        for entry in &self.set {
            let Some((k, v)) = entry.split_once('=') else {
                return Err(swarm_manifold::Error::Config {
                    key: entry.clone(),
                    reason: "expected KEY=VALUE".into(),
                });
            };
            config.set(k.trim(), v)?;
        }
        if let Some(out) = self.out {
            config.out_dir = out;
        }
        Ok(config)
    }
}

fn simulate_cmd(config: &PipelineConfig) -> Result<()> {
    config.validate()?;
    if config.scenario().is_none() {
        return Err(swarm_manifold::Error::config("scenario", "simulate needs a scenario"));
    }
    let mut wrapped = config.clone();
    wrapped.track = Track::Wrapped;
    let seed = config.seed.to_string();
    let name = config.scenario().map(|s| s.name().to_string()).unwrap_or_default();
    let extra = [("scenario", name), ("seed", seed)];
    let path = config.out_dir.join("trajectory.csv");
    save_trajectory_csv(&acquire_dataset(config)?, &path, &extra)?;
    let wrapped_path = config.out_dir.join("trajectory_wrapped.csv");
    save_trajectory_csv(&acquire_dataset(&wrapped)?, &wrapped_path, &extra)?;
    println!("{}\n{}", path.display(), wrapped_path.display());
    Ok(())
}

fn isomap_cmd(config: &PipelineConfig) -> Result<()> {
    config.validate()?;
    let dataset = match &config.source {
        Some(Source::Input(p)) => load_trajectory_csv(p)?,
        _ => acquire_dataset(config)?,
    };
    let frames = if config.canonical_order && dataset.frame_count() >= 2 {
        let tracking = track(&dataset, metric_for(&dataset))?;
        isomap_frames(&dataset, &tracking, true)
    } else {
        dataset.frames().to_vec()
    };
    let report = isomap_configurations(&frames, &config.isomap)?;
    write_text(&config.out_dir.join("residual.csv"), &residual_csv(&report))?;
    write_text(
        &config.out_dir.join("embedding.csv"),
        &embedding_csv(&report.coordinates(report.dimension)),
    )?;
    println!("points: {}", report.point_count());
    println!("k: {}", report.k);
    for (d, r) in report.residuals.iter().enumerate() {
        println!("r({}) = {:.6}", d + 1, r);
    }
    println!("d*: {}", report.dimension);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, options) = match cli.command {
        Command::Simulate(o) => ("simulate", o),
        Command::Analyze(o) => ("analyze", o),
        Command::Run(o) => ("run", o),
        Command::Isomap(o) => ("isomap", o),
    };
    let result = options.into_config().and_then(|config| match command {
        "simulate" => simulate_cmd(&config),
        "analyze" => run_analysis(&config).map(|o| print!("{}", o.summary)),
        "run" => run_pipeline(&config).map(|o| print!("{}", o.summary)),
        _ => isomap_cmd(&config),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
