use std::collections::BTreeMap;

use kappa_core::batch::par_map_jobs;
use kappa_core::channel_measures::{
    build_parallel_simulation, closed_form_channel, e_kappa_channel_with, gaussian_cost,
    one_shot_channel_cost_with, q_theta_with, sequential_bounds, GaussianCost,
};
use kappa_core::channels::{GaussianChannelParams, QuantumChannel};
use kappa_core::io::{operator_to_pairs, ChannelInput, IoError, ObjectSpec};
use kappa_core::sdpcore::SolverConfig;
use kappa_core::selftest;
use kappa_core::state_measures::{
    binegativity_holds, build_dilution_channel, closed_form_state, e_kappa_primal_with, log_negativity,
    one_shot_ppt_cost_with, z_upper, MeasureError,
};
use kappa_core::states::DensityMatrix;

use crate::job::{CommandKind, Format, JobSpec, Quantity};
use crate::report::{agrees, ErrorKind, QuantityError, QuantityResult, Report, SweepRow};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Parse(String),
    Dimension(String),
    Solver(String),
    Selftest(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Dimension(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Selftest(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Dimension(m) => write!(f, "dimension error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Selftest(m) => write!(f, "selftest failure: {m}"),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        if e.is_dimension() {
            CliError::Dimension(e.to_string())
        } else {
            CliError::Parse(e.to_string())
        }
    }
}

/// Completed job: the report, its rendering, and the process exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub rendered: String,
    pub exit_code: i32,
}

const STATE_KINDS: &[&str] = &[
    "isotropic",
    "werner",
    "max_correlated",
    "omega_hat",
    "rho_v",
    "bell_mix",
    "max_entangled",
    "random",
    "random_pure",
];

enum Input {
    State(DensityMatrix),
    Channel(ChannelInput),
}

fn is_state_spec(spec: &ObjectSpec) -> bool {
    STATE_KINDS.contains(&spec.kind.as_str()) || (spec.kind == "explicit" && spec.matrix.is_some())
}

pub fn load_input(raw: &str) -> Result<ObjectSpec, CliError> {
    let text = if raw.trim_start().starts_with('{') {
        raw.to_string()
    } else {
        std::fs::read_to_string(raw).map_err(|e| CliError::Parse(format!("cannot read {raw}: {e}")))?
    };
    Ok(ObjectSpec::parse(&text)?)
}

fn build(spec: &ObjectSpec, want_state: Option<bool>) -> Result<Input, CliError> {
    let state = want_state.unwrap_or_else(|| is_state_spec(spec));
    if state {
        Ok(Input::State(spec.to_state()?))
    } else {
        Ok(Input::Channel(spec.to_channel()?))
    }
}

fn err_result(q: Quantity, kind: ErrorKind, message: String) -> QuantityResult {
    QuantityResult {
        quantity: Some(q),
        error: Some(QuantityError { kind, message }),
        ..Default::default()
    }
}

fn solver_err(q: Quantity, e: MeasureError) -> QuantityResult {
    let kind = match e {
        MeasureError::Sdp(_) | MeasureError::Bisect(_) => ErrorKind::Solver,
        MeasureError::Infeasible(_) => ErrorKind::Solver,
        MeasureError::State(_) | MeasureError::Channel(_) => ErrorKind::Dimension,
    };
    err_result(q, kind, e.to_string())
}

fn unsupported(q: Quantity, what: &str) -> QuantityResult {
    err_result(q, ErrorKind::Unsupported, format!("{} is not available for {what}", q.name()))
}

fn value(q: Quantity, v: f64) -> QuantityResult {
    QuantityResult {
        quantity: Some(q),
        value_bits: Some(v),
        ..Default::default()
    }
}

fn with_closed_form(mut r: QuantityResult, closed: Option<f64>) -> QuantityResult {
    if let (Some(v), Some(c)) = (r.value_bits, closed) {
        r.closed_form_bits = Some(c);
        r.agrees = Some(agrees(v, c));
    }
    r
}

fn state_quantity(rho: &DensityMatrix, q: Quantity, job: &JobSpec) -> QuantityResult {
    let cfg = &job.solver;
    match q {
        Quantity::EKappa => match e_kappa_primal_with(rho, cfg) {
            Ok(m) => {
                let mut r = value(q, m.value_bits);
                r.details.insert("primal_bits".into(), m.primal_bits);
                r.details.insert("dual_bits".into(), m.dual_bits);
                r.details.insert("gap".into(), m.gap);
                r.solver_iterations = Some(m.solver_iterations);
                if job.witnesses {
                    let mut w = BTreeMap::new();
                    w.insert("S".into(), operator_to_pairs(&m.witness_primal));
                    if let Some((v, ww)) = &m.witness_dual {
                        w.insert("V".into(), operator_to_pairs(v));
                        w.insert("W".into(), operator_to_pairs(ww));
                    }
                    r.witnesses = Some(w);
                }
                with_closed_form(r, closed_form_state(rho.family()))
            }
            Err(e) => solver_err(q, e),
        },
        Quantity::EN => {
            let mut r = value(q, log_negativity(rho));
            r.details
                .insert("binegativity".into(), if binegativity_holds(rho) { 1.0 } else { 0.0 });
            r
        }
        Quantity::ZUpper => value(q, z_upper(rho)),
        Quantity::ClosedForm => match closed_form_state(rho.family()) {
            Some(v) => value(q, v),
            None => unsupported(q, "states without a closed form"),
        },
        Quantity::OneShot => match one_shot_ppt_cost_with(rho, cfg) {
            Ok(o) => {
                let mut r = value(q, o.cost_bits);
                r.details.insert("m_real".into(), o.m_real);
                r.details.insert("m_integer".into(), o.m_integer as f64);
                r.details.insert("e_kappa_bits".into(), o.e_kappa_bits);
                r.details.insert("sandwich_lo_bits".into(), o.sandwich.0);
                r.details.insert("sandwich_hi_bits".into(), o.sandwich.1);
                match build_dilution_channel(rho, o.m_integer, &o.g_integer) {
                    Ok(d) => {
                        r.details.insert("dilution_all_pass".into(), if d.report.all_pass() { 1.0 } else { 0.0 });
                        r.details.insert("dilution_error".into(), d.report.reproduction_error);
                    }
                    Err(e) => {
                        r.error = Some(QuantityError {
                            kind: ErrorKind::Solver,
                            message: format!("dilution channel: {e}"),
                        })
                    }
                }
                if job.witnesses {
                    let mut w = BTreeMap::new();
                    w.insert("G".into(), operator_to_pairs(o.g_witness.op()));
                    w.insert("G_integer".into(), operator_to_pairs(o.g_integer.op()));
                    r.witnesses = Some(w);
                }
                r
            }
            Err(e) => solver_err(q, e),
        },
        Quantity::QTheta | Quantity::Gaussian | Quantity::SequentialBounds => unsupported(q, "states"),
    }
}

fn channel_quantity(n: &QuantumChannel, q: Quantity, job: &JobSpec) -> QuantityResult {
    let cfg = &job.solver;
    match q {
        Quantity::EKappa => match e_kappa_channel_with(n, cfg) {
            Ok(m) => {
                let mut r = value(q, m.value_bits);
                r.details.insert("primal_bits".into(), m.primal_bits);
                r.details.insert("dual_bits".into(), m.dual_bits);
                r.details.insert("gap".into(), m.gap);
                r.solver_iterations = Some(m.solver_iterations);
                if job.witnesses {
                    let mut w = BTreeMap::new();
                    w.insert("Q".into(), operator_to_pairs(&m.q_witness));
                    w.insert("V".into(), operator_to_pairs(&m.dual_witness.0));
                    w.insert("W".into(), operator_to_pairs(&m.dual_witness.1));
                    w.insert("rho_A".into(), operator_to_pairs(&m.dual_witness.2));
                    r.witnesses = Some(w);
                }
                with_closed_form(r, closed_form_channel(n.family()))
            }
            Err(e) => solver_err(q, e),
        },
        Quantity::QTheta => match q_theta_with(n, cfg) {
            Ok(v) => value(q, v),
            Err(e) => solver_err(q, e),
        },
        Quantity::ClosedForm => match closed_form_channel(n.family()) {
            Some(v) => value(q, v),
            None => unsupported(q, "channels without a closed form"),
        },
        Quantity::SequentialBounds => match e_kappa_channel_with(n, cfg) {
            Ok(m) => {
                let (lo, hi) = sequential_bounds(m.value_bits, job.uses);
                let mut r = value(q, m.value_bits);
                r.details.insert("uses".into(), job.uses as f64);
                r.details.insert("lo_bits".into(), lo);
                r.details.insert("hi_bits".into(), hi);
                r
            }
            Err(e) => solver_err(q, e),
        },
        Quantity::OneShot => match one_shot_channel_cost_with(n, cfg) {
            Ok(rep) => {
                let o = rep.one_shot.expect("set by one_shot_channel_cost");
                let mut r = value(q, o.one_shot_bits);
                r.details.insert("m_real".into(), o.m_real);
                r.details.insert("m_integer".into(), o.m_integer as f64);
                r.details.insert("e_kappa_bits".into(), rep.e_kappa_bits);
                r.details.insert("sandwich_lo_bits".into(), o.sandwich.0);
                r.details.insert("sandwich_hi_bits".into(), o.sandwich.1);
                if let Some(c) = rep.covariant_choi_bits {
                    r.details.insert("covariant_choi_bits".into(), c);
                }
                match build_parallel_simulation(n, o.m_integer, &o.q_integer) {
                    Ok(s) => {
                        r.details.insert("simulation_all_pass".into(), if s.report.all_pass() { 1.0 } else { 0.0 });
                        r.details.insert("simulation_error".into(), s.report.reproduction_error);
                    }
                    Err(e) => {
                        r.error = Some(QuantityError {
                            kind: ErrorKind::Solver,
                            message: format!("parallel simulation: {e}"),
                        })
                    }
                }
                if job.witnesses {
                    let mut w = BTreeMap::new();
                    w.insert("Q".into(), operator_to_pairs(&o.q_choi_witness));
                    w.insert("Q_integer".into(), operator_to_pairs(&o.q_integer));
                    r.witnesses = Some(w);
                }
                r
            }
            Err(e) => solver_err(q, e),
        },
        Quantity::EN | Quantity::ZUpper => unsupported(q, "channels"),
        Quantity::Gaussian => unsupported(q, "finite-dimensional channels"),
    }
}

fn gaussian_quantity(p: &GaussianChannelParams, q: Quantity) -> QuantityResult {
    if q != Quantity::Gaussian {
        return unsupported(q, "Gaussian channels");
    }
    match gaussian_cost(p) {
        Ok(GaussianCost::Value(v)) => value(q, v),
        Ok(GaussianCost::Zero) => QuantityResult {
            tag: Some("zero".into()),
            ..value(q, 0.0)
        },
        Ok(GaussianCost::Infinite) => QuantityResult {
            quantity: Some(q),
            tag: Some("infinite".into()),
            ..Default::default()
        },
        Ok(GaussianCost::Conjecture(v)) => QuantityResult {
            tag: Some("conjecture".into()),
            ..value(q, v)
        },
        Err(e) => solver_err(q, e),
    }
}

fn evaluate(input: &Input, quantities: &[Quantity], job: &JobSpec) -> Vec<QuantityResult> {
    quantities
        .iter()
        .map(|&q| match input {
            Input::State(rho) => state_quantity(rho, q, job),
            Input::Channel(ChannelInput::Finite(n)) => channel_quantity(n, q, job),
            Input::Channel(ChannelInput::Gaussian(p)) => gaussian_quantity(p, q),
        })
        .collect()
}

fn default_quantities(input: &Input, command: CommandKind) -> Vec<Quantity> {
    use Quantity::*;
    match (command, input) {
        (CommandKind::OneShot, _) => vec![OneShot],
        (CommandKind::Sweep, Input::State(_)) => vec![EKappa],
        (CommandKind::Sweep, Input::Channel(ChannelInput::Finite(_))) => vec![EKappa, QTheta],
        (_, Input::State(_)) => vec![EKappa, EN, ZUpper, ClosedForm],
        (_, Input::Channel(ChannelInput::Finite(_))) => vec![EKappa, QTheta, ClosedForm, SequentialBounds],
        (_, Input::Channel(ChannelInput::Gaussian(_))) => vec![Gaussian],
    }
}

fn exit_code_for(results: &[QuantityResult]) -> i32 {
    let worst = results
        .iter()
        .filter_map(|r| r.error.as_ref())
        .map(|e| match e.kind {
            ErrorKind::Solver => 4,
            ErrorKind::Dimension => 3,
            ErrorKind::Parse | ErrorKind::Unsupported => 2,
        })
        .max();
    worst.unwrap_or(0)
}

/// Runs a job. Per-quantity failures are recorded in the report and reflected
/// in the exit code; only input and setup errors return `Err`.
pub fn run(job: &JobSpec) -> Result<Outcome, CliError> {
    job.solver.validate().map_err(|e| CliError::Parse(e.to_string()))?;
    let start = std::time::Instant::now();
    let mut report = Report::new(job.clone());
    let mut exit_code = 0;
    match job.command {
        CommandKind::Selftest => {
            let suites = selftest::run_all(job.seed);
            if suites.iter().any(|s| !s.ok()) {
                exit_code = 5;
            }
            report.selftest = Some(suites);
        }
        CommandKind::StateMeasure | CommandKind::ChannelMeasure | CommandKind::OneShot => {
            let raw = job.input.as_deref().ok_or_else(|| CliError::Parse("--input is required".into()))?;
            let spec = load_input(raw)?;
            let want_state = match job.command {
                CommandKind::StateMeasure => Some(true),
                CommandKind::ChannelMeasure => Some(false),
                _ => None,
            };
            let input = build(&spec, want_state)?;
            let quantities = if job.quantities.is_empty() {
                default_quantities(&input, job.command)
            } else {
                job.quantities.clone()
            };
            report.results = evaluate(&input, &quantities, job);
            report.input = Some(spec);
            exit_code = exit_code_for(&report.results);
        }
        CommandKind::Sweep => {
            let sweep = job.sweep.clone().ok_or_else(|| CliError::Parse("missing sweep range".into()))?;
            if sweep.steps < 2 {
                return Err(CliError::Parse(format!("--steps must be at least 2, got {}", sweep.steps)));
            }
            let spec = match job.input.as_deref() {
                Some(raw) => load_input(raw)?,
                None => ObjectSpec::parse(r#"{"kind":"amplitude_damping","params":{"r":0.0}}"#)?,
            };
            if !spec.has_param(&sweep.param_name) {
                return Err(CliError::Parse(format!(
                    "sweep needs a parametric family with numeric parameter '{}'",
                    sweep.param_name
                )));
            }
            let probe = build(&spec, None)?;
            let quantities = if job.quantities.is_empty() {
                default_quantities(&probe, CommandKind::Sweep)
            } else {
                job.quantities.clone()
            };
            let grid = sweep.grid();
            let rows = par_map_jobs(&grid, job.jobs, |&x| {
                let point = spec.with_param(&sweep.param_name, x);
                match build(&point, None) {
                    Ok(input) => {
                        let res = evaluate(&input, &quantities, job);
                        let error = res
                            .iter()
                            .filter_map(|r| r.error.as_ref())
                            .map(|e| e.message.clone())
                            .reduce(|a, b| format!("{a}; {b}"));
                        SweepRow {
                            param: x,
                            values: res.iter().map(|r| r.value_bits).collect(),
                            error,
                        }
                    }
                    Err(e) => SweepRow {
                        param: x,
                        values: vec![None; quantities.len()],
                        error: Some(e.to_string()),
                    },
                }
            });
            if rows.iter().any(|r| r.error.is_some()) {
                exit_code = 4;
            }
            let mut cols = vec![sweep.param_name.clone()];
            cols.extend(quantities.iter().map(|q| format!("{}_bits", q.name())));
            report.sweep_columns = Some(cols);
            report.sweep = Some(rows);
            report.input = Some(spec);
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    let rendered = match (job.format, job.command, job.output.is_some()) {
        (Format::Csv, _, _) => report.to_csv(),
        (Format::Json, CommandKind::Selftest, false) => report.selftest_table(),
        (Format::Json, _, _) => report.to_json(),
    };
    Ok(Outcome {
        report,
        rendered,
        exit_code,
    })
}

/// Convenience for callers that only need a solver config with defaults.
pub fn default_solver() -> SolverConfig {
    SolverConfig::default()
}
