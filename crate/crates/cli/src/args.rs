use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use switchbif_core::config::{eval_expr, RunOptions};

fn real(s: &str) -> Result<f64, String> {
    eval_expr(s)
}

#[derive(Debug, Parser)]
#[command(name = "switchbif", version, about = "Simulate quadrant-switched planar systems and track their periodic-orbit bifurcation")]
pub struct Cli {
    /// TOML configuration document.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write output files into this directory instead of standard output.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// On failure, print a JSON error object to standard error.
    #[arg(long, global = true)]
    pub error_json: bool,

    #[command(subcommand)]
    pub command: TopLevel,
}

#[derive(Debug, Clone, Subcommand)]
pub enum TopLevel {
    #[command(flatten)]
    Run(Command),
    /// Run a subcommand on the built-in benchmark system.
    PaperExample {
        #[command(subcommand)]
        command: Command,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the configured system against the model assumptions.
    Validate,
    /// Integrate one trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Evaluate the numerical return map at given x1 values.
    Poincare(PoincareArgs),
    /// Classify the origin from the closed-form return index.
    Classify(ClassifyArgs),
    /// Tabulate Δ(λ) and Δ'(λ) over a parameter range.
    DeltaSweep(SweepArgs),
    /// Locate the critical parameter and the bifurcation direction.
    Bifurcate(BifurcateArgs),
    /// Continue the periodic-orbit branch over a list of λ values.
    Branch(BranchArgs),
    /// Sample the global existence conditions.
    VerifyGlobal(GlobalArgs),
    /// Print the configuration in canonical form.
    EmitConfig,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = real)]
    pub lambda: Option<f64>,
    /// Initial state as "x1,x2".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = real, num_args = 1)]
    pub x0: Option<Vec<f64>>,
    /// Stop at this time (takes precedence over --events).
    #[arg(long, allow_hyphen_values = true, value_parser = real)]
    pub t_max: Option<f64>,
    /// Stop after this many switching events (default 4).
    #[arg(long)]
    pub events: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PoincareArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = real)]
    pub lambda: Option<f64>,
    /// Comma-separated entry points on the positive x1 axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = real)]
    pub x1: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = real)]
    pub lambda: Option<f64>,
    /// Tolerance on |Δ - 1| for PeriodicFamily.
    #[arg(long, value_parser = real)]
    pub delta_eps: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = real)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true, value_parser = real)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BifurcateArgs {
    /// Search interval "lo,hi" for Δ(λ) = 1 (default: the λ domain).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = real, num_args = 1)]
    pub bracket: Option<Vec<f64>>,
    #[arg(long, value_parser = real)]
    pub expansion_x_max: Option<f64>,
    #[arg(long)]
    pub expansion_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BranchArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = real)]
    pub lambdas: Option<Vec<f64>>,
    /// "previous" (sequential) or "scaling-law" (parallel).
    #[arg(long)]
    pub seeding: Option<String>,
    #[arg(long, value_parser = real)]
    pub scan_x_min: Option<f64>,
    #[arg(long, value_parser = real)]
    pub scan_x_max: Option<f64>,
    #[arg(long)]
    pub scan_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = real)]
    pub lambda: Option<f64>,
    /// Radius M outside which decay is required (default 10).
    #[arg(long, value_parser = real)]
    pub radius_m: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

fn set<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
    if src.is_some() {
        *dst = src.clone();
    }
}

fn pair(v: &Option<Vec<f64>>) -> Option<[f64; 2]> {
    v.as_ref().map(|v| [v[0], v.get(1).copied().unwrap_or(f64::NAN)])
}

impl Command {
    /// Folds command-line flags over the `[run]` options of the config.
    pub fn apply_to(&self, run: &mut RunOptions) {
        match self {
            Command::Simulate(a) => {
                set(&mut run.lambda, &a.lambda);
                set(&mut run.x0, &pair(&a.x0));
                set(&mut run.t_max, &a.t_max);
                set(&mut run.events, &a.events);
            }
            Command::Poincare(a) => {
                set(&mut run.lambda, &a.lambda);
                set(&mut run.x1, &a.x1);
            }
            Command::Classify(a) => {
                set(&mut run.lambda, &a.lambda);
                set(&mut run.delta_eps, &a.delta_eps);
            }
            Command::DeltaSweep(a) => {
                if a.from.is_some() || a.to.is_some() {
                    let cur = run.sweep.unwrap_or([f64::NAN, f64::NAN]);
                    run.sweep = Some([a.from.unwrap_or(cur[0]), a.to.unwrap_or(cur[1])]);
                }
                set(&mut run.sweep_points, &a.points);
            }
            Command::Bifurcate(a) => {
                set(&mut run.bracket, &pair(&a.bracket));
                set(&mut run.expansion_x_max, &a.expansion_x_max);
                set(&mut run.expansion_points, &a.expansion_points);
            }
            Command::Branch(a) => {
                set(&mut run.lambdas, &a.lambdas);
                set(&mut run.seeding, &a.seeding);
                set(&mut run.scan_x_min, &a.scan_x_min);
                set(&mut run.scan_x_max, &a.scan_x_max);
                set(&mut run.scan_points, &a.scan_points);
            }
            Command::VerifyGlobal(a) => {
                set(&mut run.lambda, &a.lambda);
                set(&mut run.radius_m, &a.radius_m);
                set(&mut run.n_samples, &a.samples);
            }
            Command::Validate | Command::EmitConfig => {}
        }
    }

    /// Checks on flag shapes that clap cannot express.
    pub fn check_shapes(&self) -> Result<(), String> {
        let two = |name: &str, v: &Option<Vec<f64>>| match v {
            Some(v) if v.len() != 2 => Err(format!("--{name} expects two comma-separated values, got {}", v.len())),
            _ => Ok(()),
        };
        match self {
            Command::Simulate(a) => two("x0", &a.x0),
            Command::Bifurcate(a) => two("bracket", &a.bracket),
            _ => Ok(()),
        }
    }
}
