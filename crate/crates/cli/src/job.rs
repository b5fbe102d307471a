use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use kappa_core::sdpcore::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    StateMeasure,
    ChannelMeasure,
    OneShot,
    Sweep,
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    EKappa,
    #[serde(rename = "e_n")]
    #[value(name = "e_n")]
    EN,
    ZUpper,
    OneShot,
    QTheta,
    ClosedForm,
    Gaussian,
    SequentialBounds,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::EKappa => "e_kappa",
            Quantity::EN => "e_n",
            Quantity::ZUpper => "z_upper",
            Quantity::OneShot => "one_shot",
            Quantity::QTheta => "q_theta",
            Quantity::ClosedForm => "closed_form",
            Quantity::Gaussian => "gaussian",
            Quantity::SequentialBounds => "sequential_bounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "kappa-cost", version, about = "Exact PPT entanglement cost of states and channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measures of a bipartite state.
    StateMeasure(CommonArgs),
    /// Measures of a channel (finite-dimensional or Gaussian).
    ChannelMeasure(CommonArgs),
    /// One-shot exact cost of a state or a channel.
    OneShot(CommonArgs),
    /// Parameter sweep; without an input, the amplitude-damping curve.
    Sweep(SweepArgs),
    /// Runs every invariant suite.
    Selftest(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON file, or inline JSON starting with '{'.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub quantities: Vec<Quantity>,
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, env = "KAPPA_COST_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, env = "KAPPA_COST_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Include witness operators in the report.
    #[arg(long)]
    pub witnesses: bool,
    #[arg(long, env = "KAPPA_COST_GAP_TOL")]
    pub gap_tol: Option<f64>,
    #[arg(long, env = "KAPPA_COST_FEAS_TOL")]
    pub feas_tol: Option<f64>,
    #[arg(long, env = "KAPPA_COST_MAX_ITERS")]
    pub max_iters: Option<usize>,
    /// Number of channel uses for sequential bounds.
    #[arg(long, default_value_t = 1)]
    pub uses: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Parameter to sweep (defaults to `r` for the amplitude-damping curve).
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param_name: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl SweepSpec {
    /// Evenly spaced grid including both ends.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Fully resolved job, echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub command: CommandKind,
    pub input: Option<String>,
    pub quantities: Vec<Quantity>,
    pub sweep: Option<SweepSpec>,
    pub output: Option<String>,
    pub format: Format,
    pub seed: u64,
    pub jobs: usize,
    pub witnesses: bool,
    pub uses: usize,
    pub solver: SolverConfig,
}

impl JobSpec {
    pub fn from_cli(cli: Cli) -> Self {
        let (command, args, sweep) = match cli.command {
            Command::StateMeasure(a) => (CommandKind::StateMeasure, a, None),
            Command::ChannelMeasure(a) => (CommandKind::ChannelMeasure, a, None),
            Command::OneShot(a) => (CommandKind::OneShot, a, None),
            Command::Selftest(a) => (CommandKind::Selftest, a, None),
            Command::Sweep(s) => {
                let sw = SweepSpec {
                    param_name: s.param.unwrap_or_else(|| "r".into()),
                    lo: s.lo,
                    hi: s.hi,
                    steps: s.steps,
                };
                (CommandKind::Sweep, s.common, Some(sw))
            }
        };
        let mut solver = SolverConfig::default();
        if let Some(v) = args.gap_tol {
            solver.gap_tol = v;
        }
        if let Some(v) = args.feas_tol {
            solver.feas_tol = v;
        }
        if let Some(v) = args.max_iters {
            solver.max_iters = v;
        }
        JobSpec {
            command,
            input: args.input,
            quantities: args.quantities,
            sweep,
            output: args.output,
            format: args.format,
            seed: args.seed,
            jobs: args.jobs,
            witnesses: args.witnesses,
            uses: args.uses,
            solver,
        }
    }
}
