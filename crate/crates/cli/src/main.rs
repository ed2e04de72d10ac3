//! `freeferm`: runs simulator experiments from a config file plus flag
//! overrides and writes each run to a timestamped directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical
//! consistency failure, 1 other failures (I/O, serialization),
//! 64 usage errors (unknown subcommand).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use freeferm::experiments::{complete_run, CompletedRun, ExperimentConfig, RunManifest};
use freeferm::Error;

#[derive(Parser)]
#[command(
    name = "freeferm",
    version,
    about = "Free-fermion circuit simulator and projected-ensemble analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// W1 distance vs measured-block size under one global rotation
    #[command(name = "w1-global")]
    W1Global(RunArgs),
    /// W1 distance vs brickwork depth per block size
    #[command(name = "w1-local")]
    W1Local(RunArgs),
    /// W1 distance of entropy observables vs depth, with plateaus
    #[command(name = "w1-entropy")]
    W1Entropy(RunArgs),
    /// Entanglement mean and variance across cuts vs the reference law
    #[command(name = "page-curve")]
    PageCurve(RunArgs),
    /// Operator-spreading site profile and width
    Diffusion(RunArgs),
    /// Dump the reference observable CDF
    #[command(name = "ghe-cdf")]
    GheCdf(RunArgs),
    /// Per-instance moment-difference terms against the reference
    #[command(name = "design-distance")]
    DesignDistance(RunArgs),
    /// Deviation exceedance against the concentration bound
    Concentration(RunArgs),
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::W1Global(a) => ("w1-global", a),
            Command::W1Local(a) => ("w1-local", a),
            Command::W1Entropy(a) => ("w1-entropy", a),
            Command::PageCurve(a) => ("page-curve", a),
            Command::Diffusion(a) => ("diffusion", a),
            Command::GheCdf(a) => ("ghe-cdf", a),
            Command::DesignDistance(a) => ("design-distance", a),
            Command::Concentration(a) => ("concentration", a),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// manifest.json from a previous run; re-runs its exact config
    #[arg(long, value_name = "FILE", conflicts_with = "config")]
    manifest: Option<PathBuf>,

    /// Total chain length L
    #[arg(long = "L", value_name = "MODES")]
    l: Option<usize>,

    /// Unmeasured subsystem size L_A
    #[arg(long = "la", alias = "LA", value_name = "MODES")]
    la: Option<usize>,

    /// Measured-block sizes, comma separated
    #[arg(long = "lb", alias = "LB-list", value_name = "LIST", value_delimiter = ',')]
    lb_list: Option<Vec<usize>>,

    /// Depth checkpoints, comma separated
    #[arg(long = "t", alias = "t-list", value_name = "LIST", value_delimiter = ',')]
    t_list: Option<Vec<usize>>,

    /// Shots per empirical CDF
    #[arg(long = "shots", alias = "R", value_name = "COUNT")]
    r: Option<usize>,

    /// Circuit instances
    #[arg(long = "instances", alias = "N", value_name = "COUNT")]
    n: Option<usize>,

    /// Renyi order for entropy observables
    #[arg(long)]
    alpha: Option<f64>,

    /// Observable: corr:i,j | npoint:i,j,... | vn:1..k | renyi:a:1..k;
    /// for design-distance and concentration, index groups like "1,2|3,4"
    #[arg(long)]
    observable: Option<String>,

    /// Monte Carlo draws for empirical reference ensembles
    #[arg(long = "ghe-budget", alias = "ghe_budget", value_name = "COUNT")]
    ghe_budget: Option<usize>,

    /// Master seed; outputs are a pure function of (config, seed)
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory root
    #[arg(long = "out-dir", alias = "out_dir", value_name = "DIR")]
    out_dir: Option<String>,

    /// Grid points for analytic CDF dumps
    #[arg(long)]
    grid: Option<usize>,
}

impl RunArgs {
    fn as_flags(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: String::new(),
            l: self.l,
            la: self.la,
            lb_list: self.lb_list.clone(),
            t_list: self.t_list.clone(),
            r: self.r,
            n: self.n,
            alpha: self.alpha,
            observable: self.observable.clone(),
            ghe_budget: self.ghe_budget,
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            grid: self.grid,
        }
    }
}

fn execute(name: &str, args: &RunArgs) -> Result<CompletedRun, Error> {
    let base = if let Some(path) = &args.manifest {
        RunManifest::from_json(&fs::read_to_string(path)?)?.config
    } else if let Some(path) = &args.config {
        ExperimentConfig::from_toml(&fs::read_to_string(path)?)?
    } else {
        ExperimentConfig::default()
    };
    if !base.experiment.is_empty() && base.experiment != name {
        return Err(Error::Config(format!(
            "config is for experiment {:?} but the {name} subcommand was invoked",
            base.experiment
        )));
    }
    let mut config = base.merged_with(&args.as_flags());
    config.experiment = name.to_string();
    complete_run(&config)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Argument(_) | Error::SizeLimit(_) => 2,
        Error::Numerical(_) => 3,
        Error::Io(_) | Error::Json(_) => 1,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                ErrorKind::InvalidSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    eprint!("{e}");
                    ExitCode::from(64)
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(2)
                }
            };
        }
    };
    let (name, args) = cli.command.parts();
    match execute(name, args) {
        Ok(run) => {
            println!("{}", run.dir.display());
            for (key, value) in &run.manifest.summary {
                println!("{key} = {value}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
