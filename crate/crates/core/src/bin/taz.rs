use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use taz::objectives::Scenario;
use taz::pipeline::{run_multilevel, run_pipeline, run_sweep, run_synth, run_validate, PipelineConfig, RunReport};
use taz::Error;

#[derive(Parser)]
#[command(
    name = "taz",
    version,
    about = "Regionalize spatial units into traffic autonomous zones"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect, extend and evaluate one scheme.
    Run(Common),
    /// Evaluate a parameter grid; write Pareto flags and scales.
    Sweep(Common),
    /// Build nested schemes by method 1, 2 or 3.
    Multilevel {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        method: Option<u8>,
    },
    /// Write a synthetic city (units.geojson, od.csv).
    Synth(Common),
    /// Validate inputs and any partition files in the output directory.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self, synth_default: bool) -> Result<PipelineConfig, Error> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig {
                synth: synth_default,
                ..Default::default()
            },
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if let Some(s) = &self.scenario {
            c.scenario = s.parse::<Scenario>()?;
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        Ok(c)
    }
}

fn dispatch(cli: Cli) -> Result<RunReport, Error> {
    match cli.command {
        Command::Run(c) => run_pipeline(&c.config(false)?),
        Command::Sweep(c) => run_sweep(&c.config(false)?),
        Command::Multilevel { common, method } => {
            let mut c = common.config(false)?;
            if let Some(m) = method {
                c.method = m;
            }
            c.validate()?;
            run_multilevel(&c, c.method)
        }
        Command::Synth(c) => run_synth(&c.config(true)?),
        Command::Validate(c) => run_validate(&c.config(false)?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(report) => {
            print!("{}", report.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut report = json!({"error": e.kind(), "message": e.to_string()});
            if let Some(p) = e.path() {
                report["path"] = json!(p.display().to_string());
            }
            eprintln!("{report}");
            ExitCode::from(2)
        }
    }
}
