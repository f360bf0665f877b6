//! `sgfif`: build, evaluate and analyse fractal interpolation functions on
//! products of Sierpiński gaskets.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{exit, CliError, EXIT_CODE_HELP};

#[derive(Debug, Parser)]
#[command(name = "sgfif", version, about, after_help = EXIT_CODE_HELP)]
struct Cli {
    /// Worker threads for parallel kernels (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Model config file (JSON).
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a config, build the model and print its derived constants.
    #[command(after_help = EXIT_CODE_HELP)]
    Build {
        #[command(flatten)]
        cfg: ConfigArg,
    },
    /// Evaluate f at a point pair (truncated, with error bound) or a vertex pair (exact).
    #[command(after_help = EXIT_CODE_HELP)]
    Eval {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Plane points t = (tX, tY) and s = (sX, sY).
        #[arg(long, num_args = 4, value_names = ["T_X", "T_Y", "S_X", "S_Y"],
              allow_negative_numbers = true, conflicts_with = "address", required_unless_present = "address")]
        point: Option<Vec<f64>>,
        /// Vertex addresses such as "12@3" "1@2".
        #[arg(long, num_args = 2, value_names = ["ADDR_T", "ADDR_S"])]
        address: Option<Vec<String>>,
        /// Unrolling steps k for --point.
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Write f at every depth-m product vertex as CSV.
    #[command(after_help = EXIT_CODE_HELP)]
    Grid {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Vertex depth m (a multiple of N).
        #[arg(long)]
        depth: usize,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write a PPM heatmap of the values.
        #[arg(long)]
        ppm: Option<PathBuf>,
    },
    /// Sample the graph by random iteration and write CSV.
    #[command(after_help = EXIT_CODE_HELP)]
    Chaos {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        burn_in: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Box-count the graph over a range of levels and estimate its dimension.
    #[command(after_help = EXIT_CODE_HELP)]
    Dim {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, default_value_t = 2)]
        min_level: usize,
        #[arg(long, default_value_t = 6)]
        max_level: usize,
        #[arg(long, default_value_t = sgfif::analysis::DEFAULT_SAMPLES_PER_CELL)]
        samples_per_cell: usize,
        /// Write the per-level box counts as CSV.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Predict the Hölder exponent and compare it with an oscillation fit.
    #[command(after_help = EXIT_CODE_HELP)]
    Holder {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, default_value_t = 3)]
        min_level: usize,
        #[arg(long, default_value_t = 6)]
        max_level: usize,
        #[arg(long, default_value_t = sgfif::analysis::DEFAULT_SAMPLES_PER_CELL)]
        samples_per_cell: usize,
        /// Write the prediction and fit as key=value text.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite against the model.
    #[command(after_help = EXIT_CODE_HELP)]
    Check {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturb one shift corner value, "ω|η:i,j:delta".
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Build { .. } => "build",
            Command::Eval { .. } => "eval",
            Command::Grid { .. } => "grid",
            Command::Chaos { .. } => "chaos",
            Command::Dim { .. } => "dim",
            Command::Holder { .. } => "holder",
            Command::Check { .. } => "check",
        }
    }
}

/// What a successful command hands back for the run report.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    /// `Some(false)` for a failed check or verdict.
    pub verdict: Option<bool>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    command: &'a str,
    parameters: Value,
    wall_time_ms: f64,
    outputs: Vec<String>,
    validation: Validation,
}

#[derive(Debug, Serialize)]
struct Validation {
    status: &'static str,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
    summary: Value,
}

fn emit(report: &RunReport) {
    eprintln!("{}", serde_json::to_string(report).expect("report serializes"));
}

fn parameters(cli: &Cli) -> Value {
    let mut p = match &cli.command {
        Command::Build { cfg } => json!({ "config": cfg.config }),
        Command::Eval { cfg, point, address, depth } => {
            json!({ "config": cfg.config, "point": point, "address": address, "depth": depth })
        }
        Command::Grid { cfg, depth, out, ppm } => {
            json!({ "config": cfg.config, "depth": depth, "out": out, "ppm": ppm })
        }
        Command::Chaos { cfg, points, seed, burn_in, out } => {
            json!({ "config": cfg.config, "points": points, "seed": seed, "burn_in": burn_in, "out": out })
        }
        Command::Dim { cfg, min_level, max_level, samples_per_cell, out } => json!({
            "config": cfg.config, "min_level": min_level, "max_level": max_level,
            "samples_per_cell": samples_per_cell, "out": out
        }),
        Command::Holder { cfg, min_level, max_level, samples_per_cell, out } => json!({
            "config": cfg.config, "min_level": min_level, "max_level": max_level,
            "samples_per_cell": samples_per_cell, "out": out
        }),
        Command::Check { cfg, seed, inject_fault } => {
            json!({ "config": cfg.config, "seed": seed, "inject_fault": inject_fault })
        }
    };
    p["threads"] = json!(cli.threads);
    p
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Build { cfg } => commands::build(&cfg.config),
        Command::Eval { cfg, point, address, depth } => {
            commands::eval(&cfg.config, point.as_deref(), address.as_deref(), *depth)
        }
        Command::Grid { cfg, depth, out, ppm } => commands::grid(&cfg.config, *depth, out, ppm.as_deref()),
        Command::Chaos { cfg, points, seed, burn_in, out } => {
            commands::chaos(&cfg.config, *points, *seed, *burn_in, out)
        }
        Command::Dim { cfg, min_level, max_level, samples_per_cell, out } => {
            commands::dim(&cfg.config, *min_level, *max_level, *samples_per_cell, out.as_deref())
        }
        Command::Holder { cfg, min_level, max_level, samples_per_cell, out } => {
            commands::holder(&cfg.config, *min_level, *max_level, *samples_per_cell, out.as_deref())
        }
        Command::Check { cfg, seed, inject_fault } => commands::check(&cfg.config, *seed, inject_fault.as_deref()),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            if informational {
                return ExitCode::SUCCESS;
            }
            emit(&RunReport {
                command: "usage",
                parameters: json!({ "args": std::env::args().skip(1).collect::<Vec<_>>() }),
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
                outputs: vec![],
                validation: Validation {
                    status: "error",
                    exit_code: exit::USAGE,
                    error: Some(e.kind().to_string()),
                    warnings: vec![],
                    summary: Value::Null,
                },
            });
            return ExitCode::from(exit::USAGE);
        }
    };

    let params = parameters(&cli);
    let (code, outputs, validation) = match run(&cli) {
        Ok(o) => {
            let (status, code) = match o.verdict {
                Some(false) => ("fail", exit::FAIL),
                _ => ("ok", exit::OK),
            };
            let outputs = o.outputs.iter().map(|p| p.display().to_string()).collect();
            let v = Validation {
                status,
                exit_code: code,
                error: None,
                warnings: o.warnings,
                summary: o.summary,
            };
            (code, outputs, v)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            let v = Validation {
                status: "error",
                exit_code: code,
                error: Some(e.to_string()),
                warnings: vec![],
                summary: Value::Null,
            };
            (code, vec![], v)
        }
    };
    emit(&RunReport {
        command: cli.command.name(),
        parameters: params,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        outputs,
        validation,
    });
    ExitCode::from(code)
}
