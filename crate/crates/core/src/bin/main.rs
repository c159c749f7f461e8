use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nonprob_extend::cli::{run_command, AlphaChoice, Command, OutputFormat, RunConfig};
use nonprob_extend::tuning::{DEFAULT_FOLDS, DEFAULT_GRID};
use nonprob_extend::NormScope;

#[derive(Parser)]
#[command(name = "nonprob-extend", version, about = "Extend a probability sample with screened non-probability observations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Screen the non-probability sample and fit the extended sample.
    Extend(DataArgs),
    /// Like `extend`, with the levels chosen by cross-validation.
    Cv(DataArgs),
    /// Like `extend`, plus bootstrap standard errors.
    Bootstrap(DataArgs),
    /// Screen the probability sample against itself and refit on the kept rows.
    Robustify(DataArgs),
    /// Run a simulation study from a scenario file.
    Simulate(SimArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    Full,
    Slopes,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Level for the studentized-residual gate.
    #[arg(long, default_value_t = 0.05)]
    alpha_st: f64,
    /// Level for the coefficient-change gate.
    #[arg(long, default_value_t = 0.05)]
    alpha_ch: f64,
    /// Choose both levels by k-fold cross-validation.
    #[arg(long)]
    cv: bool,
    #[arg(long, value_enum, default_value_t = Norm::Full)]
    norm: Norm,
    /// Number of cross-validation folds.
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    k: usize,
    /// Comma-separated grid of levels for cross-validation.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Search the full (alpha_st, alpha_ch) square instead of alpha_st = alpha_ch.
    #[arg(long)]
    full_grid: bool,
    /// Bootstrap replications.
    #[arg(long)]
    n_boot: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct DataArgs {
    /// Probability sample CSV.
    #[arg(long)]
    prob: PathBuf,
    /// Non-probability sample CSV (not used by robustify).
    #[arg(long)]
    nonprob: Option<PathBuf>,
    /// Name of the response column.
    #[arg(long)]
    response: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SimArgs {
    /// Scenario config file.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 100)]
    n_datasets: usize,
    #[command(flatten)]
    common: Common,
}

fn build(command: Command, common: Common) -> RunConfig {
    let mut cfg = RunConfig::new(command, common.out);
    cfg.alphas = if common.cv {
        AlphaChoice::CrossValidated
    } else {
        AlphaChoice::Fixed {
            alpha_st: common.alpha_st,
            alpha_ch: common.alpha_ch,
        }
    };
    cfg.norm_scope = match common.norm {
        Norm::Full => NormScope::FullCoefficients,
        Norm::Slopes => NormScope::SlopesOnly,
    };
    cfg.k = common.k;
    cfg.grid = common.grid.unwrap_or_else(|| DEFAULT_GRID.to_vec());
    cfg.full_grid = common.full_grid;
    cfg.n_boot = common.n_boot;
    cfg.seed = common.seed;
    cfg.format = match common.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    cfg
}

fn config_from(cli: Cli) -> RunConfig {
    let (command, data) = match cli.command {
        Cmd::Extend(a) => (Command::Extend, a),
        Cmd::Cv(a) => (Command::Cv, a),
        Cmd::Bootstrap(a) => (Command::Bootstrap, a),
        Cmd::Robustify(a) => (Command::Robustify, a),
        Cmd::Simulate(a) => {
            let mut cfg = build(Command::Simulate, a.common);
            cfg.scenario = Some(a.scenario);
            cfg.n_datasets = a.n_datasets;
            return cfg;
        }
    };
    let mut cfg = build(command, data.common);
    cfg.prob = Some(data.prob);
    cfg.nonprob = data.nonprob;
    cfg.response = Some(data.response);
    cfg
}

fn main() -> ExitCode {
    let config = config_from(Cli::parse());
    match run_command(&config) {
        Ok(out) => {
            for f in out.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let message = e.to_string().replace('"', "'");
            eprintln!("error code={} origin={} message=\"{}\"", e.code(), e.origin(), message);
            ExitCode::FAILURE
        }
    }
}
