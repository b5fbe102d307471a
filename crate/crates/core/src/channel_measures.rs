//! Channel quantities: κ-entanglement of a channel, the one-shot exact
//! parallel simulation cost with its constructive simulation, sequential
//! cost bounds, the partial-transposition bound `Q_Θ`, and Gaussian closed
//! forms.

use serde::Serialize;

use crate::channels::{
    apply, apply_operator, channel_checks, is_cppt_bipartite, ChannelFamily, GaussianChannelParams,
    GaussianKind, QuantumChannel,
};
use crate::matcore::{
    gamma_operator, permute_systems, standard_operators, BipartitePartition, Complex64, ComplexMatrix,
    HermitianOperator, Subsystem,
};
use crate::sdpcore::{try_bisect_threshold, HermitianSdpBuilder, Part, Sense, SolverConfig, Term, VarId};
use crate::state_measures::{
    e_kappa_primal, inner_terms, log2_pos, pt, pt_index, MeasureError, BISECT_TOL, SLACK_TOL, WITNESS_TOL,
};
use crate::states::{max_entangled, random_pure, DensityMatrix};

/// Feasibility tolerance for `(m, Q)` in [`build_parallel_simulation`].
pub const SIMULATION_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct ChannelMeasureResult {
    pub value_bits: f64,
    pub primal_bits: f64,
    pub dual_bits: f64,
    pub gap: f64,
    /// Optimal `Q` on `R ⊗ B`.
    pub q_witness: HermitianOperator,
    /// `(V, W, ρ_A)` from the dual program.
    pub dual_witness: (HermitianOperator, HermitianOperator, HermitianOperator),
    pub solver_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct OneShotChannelCost {
    pub m_real: f64,
    pub m_integer: usize,
    pub one_shot_bits: f64,
    /// Feasible `Q` at `m_real`, with `Tr_B Q = I`.
    pub q_choi_witness: HermitianOperator,
    /// Feasible `Q` at `m_integer`, used to build the simulation.
    pub q_integer: HermitianOperator,
    /// `(log(2^E − 1), log(2^E + 1))`, the lower end reported as 0 when `E = 0`.
    pub sandwich: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct SimulationCostReport {
    pub e_kappa_bits: f64,
    pub one_shot: Option<OneShotChannelCost>,
    pub parallel_asymptotic_bits: f64,
    pub sequential_asymptotic_bits: f64,
    /// `E_κ(J/d_in)` for the covariant families.
    pub covariant_choi_bits: Option<f64>,
}

impl SimulationCostReport {
    pub fn sequential_bounds(&self, n: usize) -> (f64, f64) {
        sequential_bounds(self.e_kappa_bits, n)
    }
}

/// Terms of entry `(a, a')` of `Tr_B X` for `X` on `A ⊗ B`.
fn trace_b_terms(v: VarId, p: BipartitePartition, a: usize, a2: usize, coef: f64) -> Vec<Term> {
    (0..p.d_b)
        .map(|b| Term::real(v, a * p.d_b + b, a2 * p.d_b + b, coef))
        .collect()
}

fn complex_scaled(m: &ComplexMatrix, s: f64) -> ComplexMatrix {
    m * Complex64::new(s, 0.0)
}

pub fn e_kappa_channel(n: &QuantumChannel) -> Result<ChannelMeasureResult, MeasureError> {
    e_kappa_channel_with(n, &SolverConfig::default())
}

/// Primal: minimize `t` over `Q ⪰ 0` with `−Q^{T_B} ⪯ J^{T_B} ⪯ Q^{T_B}` and
/// `Tr_B Q ⪯ t I`. The dual program is solved separately.
pub fn e_kappa_channel_with(n: &QuantumChannel, cfg: &SolverConfig) -> Result<ChannelMeasureResult, MeasureError> {
    let p = n.partition();
    let dim = p.total();
    let j_pt = n.choi_partial_transpose();

    let mut b = HermitianSdpBuilder::new(Sense::Minimize);
    let q = b.add_psd(dim);
    let p1 = b.add_psd(dim);
    let p2 = b.add_psd(dim);
    let k = b.add_psd(p.d_a);
    let t = b.add_nonneg();
    // P1 − Q^{T_B} = −J^{T_B}, P2 − Q^{T_B} = J^{T_B}
    for (slack, sign) in [(p1, -1.0), (p2, 1.0)] {
        b.add_hermitian_equation(
            dim,
            |r, c| {
                let (r2, c2) = pt_index(p, r, c);
                vec![Term::real(slack, r, c, 1.0), Term::real(q, r2, c2, -1.0)]
            },
            &complex_scaled(j_pt.matrix(), sign),
        );
    }
    // K + Tr_B Q − t I = 0
    b.add_hermitian_equation(
        p.d_a,
        |r, c| {
            let mut terms = vec![Term::real(k, r, c, 1.0)];
            terms.extend(trace_b_terms(q, p, r, c, 1.0));
            if r == c {
                terms.push(Term::scalar(t, -1.0));
            }
            terms
        },
        &ComplexMatrix::zeros(p.d_a, p.d_a),
    );
    b.set_objective(vec![Term::scalar(t, 1.0)]);
    let sol = b.solve(cfg)?.require_optimal()?;
    let primal_bits = log2_pos(sol.primal_obj());
    let q_witness = sol.x(q);

    let dual = solve_channel_dual(n, cfg)?;
    Ok(ChannelMeasureResult {
        value_bits: primal_bits.max(0.0),
        primal_bits,
        dual_bits: dual.value_bits,
        gap: (primal_bits - dual.value_bits).abs(),
        q_witness,
        dual_witness: (dual.v, dual.w, dual.rho_a),
        solver_iterations: sol.raw.iterations + dual.iterations,
    })
}

struct ChannelDual {
    v: HermitianOperator,
    w: HermitianOperator,
    rho_a: HermitianOperator,
    value_bits: f64,
    iterations: usize,
}

/// Maximizes `Tr J^{T_B}(V − W)` over `V, W ⪰ 0`, `V^{T_B} + W^{T_B} ⪯ ρ_A ⊗ I`,
/// `Tr ρ_A = 1`.
fn solve_channel_dual(n: &QuantumChannel, cfg: &SolverConfig) -> Result<ChannelDual, MeasureError> {
    let p = n.partition();
    let dim = p.total();
    let j_pt = n.choi_partial_transpose();
    let mut b = HermitianSdpBuilder::new(Sense::Maximize);
    let v = b.add_psd(dim);
    let w = b.add_psd(dim);
    let k = b.add_psd(dim);
    let r = b.add_psd(p.d_a);
    // K + V^{T_B} + W^{T_B} − ρ_A ⊗ I = 0
    b.add_hermitian_equation(
        dim,
        |row, col| {
            let (r2, c2) = pt_index(p, row, col);
            let mut terms = vec![
                Term::real(k, row, col, 1.0),
                Term::real(v, r2, c2, 1.0),
                Term::real(w, r2, c2, 1.0),
            ];
            if row % p.d_b == col % p.d_b {
                terms.push(Term::real(r, row / p.d_b, col / p.d_b, -1.0));
            }
            terms
        },
        &ComplexMatrix::zeros(dim, dim),
    );
    b.add_complex_equation(
        (0..p.d_a).map(|i| Term::real(r, i, i, 1.0)).collect(),
        Part::Re,
        1.0,
    );
    let mut obj = inner_terms(v, &j_pt, 1.0);
    obj.extend(inner_terms(w, &j_pt, -1.0));
    b.set_objective(obj);
    let sol = b.solve(cfg)?.require_optimal()?;
    Ok(ChannelDual {
        v: sol.x(v),
        w: sol.x(w),
        rho_a: sol.x(r),
        value_bits: log2_pos(sol.primal_obj()),
        iterations: sol.raw.iterations,
    })
}

/// `log₂ Tr J^{T_B}(V − W)` when `(V, W, ρ_A)` is dual feasible within [`WITNESS_TOL`].
pub fn channel_dual_witness_value(
    n: &QuantumChannel,
    v: &HermitianOperator,
    w: &HermitianOperator,
    rho_a: &HermitianOperator,
) -> Option<f64> {
    let p = n.partition();
    let bound = rho_a.kron(&HermitianOperator::identity(p.d_b));
    let slack = bound.sub(&pt(v, p).add(&pt(w, p)));
    let ok = v.lambda_min() >= -WITNESS_TOL
        && w.lambda_min() >= -WITNESS_TOL
        && rho_a.lambda_min() >= -WITNESS_TOL
        && (rho_a.trace() - 1.0).abs() <= WITNESS_TOL
        && slack.lambda_min() >= -WITNESS_TOL;
    ok.then(|| log2_pos(n.choi_partial_transpose().inner(&v.sub(w))))
}

/// Max of the state-level `E_κ` over channel outputs for `Φ` and `trials`
/// random pure inputs on `R ⊗ A` with `R ≅ A`.
pub fn e_kappa_channel_lower_by_states(n: &QuantumChannel, trials: usize, seed: u64) -> Result<f64, MeasureError> {
    let d = n.d_in();
    let p = BipartitePartition { d_a: d, d_b: d };
    let mut best = e_kappa_primal(&apply(n, &max_entangled(d))?)?.value_bits;
    for i in 0..trials as u64 {
        let phi = random_pure(p, seed.wrapping_add(i));
        best = best.max(e_kappa_primal(&apply(n, &phi)?)?.value_bits);
    }
    Ok(best)
}

/// Inner max-slack problem at a fixed `m`: minimize `u ≥ 0` with
/// `s = (m + 1) − u`, `J^{T_B} + (m − 1) Q^{T_B} ⪰ s I`,
/// `(m + 1) Q^{T_B} − J^{T_B} ⪰ s I`, `Q ⪰ 0`, `Tr_B Q = I`.
fn channel_max_slack(
    j_pt: &HermitianOperator,
    p: BipartitePartition,
    m: f64,
    cfg: &SolverConfig,
) -> Result<(f64, HermitianOperator), MeasureError> {
    let dim = p.total();
    let c = m + 1.0;
    let mut b = HermitianSdpBuilder::new(Sense::Minimize);
    let q = b.add_psd(dim);
    let p1 = b.add_psd(dim);
    let p2 = b.add_psd(dim);
    let u = b.add_nonneg();
    let shift = ComplexMatrix::identity(dim, dim) * Complex64::new(c, 0.0);
    for (slack, coef, sign) in [(p1, m - 1.0, 1.0), (p2, m + 1.0, -1.0)] {
        b.add_hermitian_equation(
            dim,
            |r, col| {
                let (r2, c2) = pt_index(p, r, col);
                let mut t = vec![Term::real(slack, r, col, 1.0)];
                if coef != 0.0 {
                    t.push(Term::real(q, r2, c2, -coef));
                }
                if r == col {
                    t.push(Term::scalar(u, -1.0));
                }
                t
            },
            &(complex_scaled(j_pt.matrix(), sign) - &shift),
        );
    }
    b.add_hermitian_equation(
        p.d_a,
        |r, col| trace_b_terms(q, p, r, col, 1.0),
        &ComplexMatrix::identity(p.d_a, p.d_a),
    );
    b.set_objective(vec![Term::scalar(u, 1.0)]);
    let sol = b.solve(cfg)?.require_optimal()?;
    Ok((c - sol.scalar(u), sol.x(q)))
}

pub fn one_shot_channel_cost(n: &QuantumChannel) -> Result<SimulationCostReport, MeasureError> {
    one_shot_channel_cost_with(n, &SolverConfig::default())
}

/// Bisection over `m ∈ [1, min(d_in, d_out) + 2]` on the feasibility of the
/// max-slack problem, plus the asymptotic fields.
pub fn one_shot_channel_cost_with(n: &QuantumChannel, cfg: &SolverConfig) -> Result<SimulationCostReport, MeasureError> {
    let p = n.partition();
    let j_pt = n.choi_partial_transpose();
    let cap = p.min_dim() as f64 + 2.0;
    let feasible = |m: f64| -> Result<bool, MeasureError> { Ok(channel_max_slack(&j_pt, p, m, cfg)?.0 >= -SLACK_TOL) };
    let m_real = try_bisect_threshold(feasible, 1.0, cap, BISECT_TOL)?;
    let m_integer = ((m_real - BISECT_TOL).ceil() as usize).max(1);
    let q_real = channel_max_slack(&j_pt, p, m_real, cfg)?.1;
    let q_integer = channel_max_slack(&j_pt, p, m_integer as f64, cfg)?.1;
    let mut report = asymptotic_costs_with(n, cfg)?;
    let e = 2f64.powf(report.e_kappa_bits);
    let lo = if report.e_kappa_bits > 0.0 { (e - 1.0).log2() } else { 0.0 };
    report.one_shot = Some(OneShotChannelCost {
        m_real,
        m_integer,
        one_shot_bits: m_real.log2(),
        q_choi_witness: q_real,
        q_integer,
        sandwich: (lo, (e + 1.0).log2()),
    });
    Ok(report)
}

pub fn asymptotic_costs(n: &QuantumChannel) -> Result<SimulationCostReport, MeasureError> {
    asymptotic_costs_with(n, &SolverConfig::default())
}

/// Parallel and sequential asymptotic costs, both equal to `E_κ(N)`.
pub fn asymptotic_costs_with(n: &QuantumChannel, cfg: &SolverConfig) -> Result<SimulationCostReport, MeasureError> {
    let e = e_kappa_channel_with(n, cfg)?.value_bits;
    let covariant = matches!(
        n.family(),
        ChannelFamily::Identity { .. }
            | ChannelFamily::Erasure { .. }
            | ChannelFamily::Depolarizing { .. }
            | ChannelFamily::Dephasing { .. }
    );
    let covariant_choi_bits = if covariant {
        Some(crate::state_measures::e_kappa_primal_with(&n.choi_state(), cfg)?.value_bits)
    } else {
        None
    };
    Ok(SimulationCostReport {
        e_kappa_bits: e,
        one_shot: None,
        parallel_asymptotic_bits: e,
        sequential_asymptotic_bits: e,
        covariant_choi_bits,
    })
}

/// Bounds on the `n`-shot sequential cost from `E = E_κ(N)`:
/// `log(2^{nE} − 1) ≤ cost ≤ log((2^{(n+1)E} − 1)/(2^E − 1))`.
/// The lower end is clipped at 0; `E = 0` gives `(0, 0)`.
pub fn sequential_bounds(e_kappa_bits: f64, n: usize) -> (f64, f64) {
    if e_kappa_bits <= 0.0 || n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let lo = (2f64.powf(nf * e_kappa_bits) - 1.0).log2().max(0.0);
    let num = (nf + 1.0) * e_kappa_bits;
    let hi = (2f64.powf(num) - 1.0).log2() - (2f64.powf(e_kappa_bits) - 1.0).log2();
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationReport {
    pub completely_positive: bool,
    pub trace_preserving: bool,
    pub cppt: bool,
    pub reproduces_channel: bool,
    /// `max |P(Γ ⊗ Φ^m) − J^N|` entrywise.
    pub reproduction_error: f64,
}

impl SimulationReport {
    pub fn all_pass(&self) -> bool {
        self.completely_positive && self.trace_preserving && self.cppt && self.reproduces_channel
    }
}

#[derive(Debug, Clone)]
pub struct ParallelSimulation {
    /// Channel `A Â B̂ → B` with Choi on `(R_A, R_Â, R_B̂, B)`.
    pub channel: QuantumChannel,
    /// `[d_in, m, m, d_out]`.
    pub dims: [usize; 4],
    pub report: SimulationReport,
}

/// Simulation channel with Choi `J^N ⊗ Φ^m + Q ⊗ (I − Φ^m)`, rejected
/// unless `(m, Q)` is feasible within [`SIMULATION_TOL`].
pub fn build_parallel_simulation(
    n: &QuantumChannel,
    m: usize,
    q: &HermitianOperator,
) -> Result<ParallelSimulation, MeasureError> {
    let p = n.partition();
    if m == 0 || q.dim() != p.total() {
        return Err(MeasureError::Infeasible("Q must live on R ⊗ B and m ≥ 1".into()));
    }
    let mf = m as f64;
    let j_pt = n.choi_partial_transpose();
    let q_pt = pt(q, p);
    let tr_b = q.partial_trace(p, Subsystem::B).map_err(crate::channels::ChannelError::from)?;
    let violations = [
        ("Q ⪰ 0", q.lambda_min()),
        ("J^T_B + (m−1)Q^T_B ⪰ 0", j_pt.add(&q_pt.scale(mf - 1.0)).lambda_min()),
        ("(m+1)Q^T_B − J^T_B ⪰ 0", q_pt.scale(mf + 1.0).sub(&j_pt).lambda_min()),
        ("Tr_B Q = I", -tr_b.max_abs_diff(&HermitianOperator::identity(p.d_a))),
    ];
    if let Some((name, val)) = violations.iter().find(|(_, v)| *v < -SIMULATION_TOL) {
        return Err(MeasureError::Infeasible(format!("m = {m}: {name} violated by {:e}", -val)));
    }

    let phi = standard_operators(m).phi;
    let rest = HermitianOperator::identity(m * m).sub(&phi);
    let grouped = n.choi().kron(&phi).add(&q.kron(&rest));
    let dims = [p.d_a, m, m, p.d_b];
    // (R_A, B, R_Â, R_B̂) → (R_A, R_Â, R_B̂, B)
    let mat_err = |e| MeasureError::Channel(crate::channels::ChannelError::from(e));
    let choi = permute_systems(grouped.matrix(), &[p.d_a, p.d_b, m, m], &[0, 2, 3, 1]).map_err(mat_err)?;
    let choi = HermitianOperator::new(choi).map_err(mat_err)?;
    let channel = QuantumChannel::from_choi(choi, p.d_a * m * m, p.d_b)?;
    let checks = channel_checks(&channel);
    let cppt = is_cppt_bipartite(channel.choi(), &dims, &[false, false, true, true])?;
    let input = gamma_operator(p.d_a).kron(max_entangled(m).op());
    let out = apply_operator(&channel, &input, p.d_a)?;
    let err = out.max_abs_diff(n.choi());
    Ok(ParallelSimulation {
        channel,
        dims,
        report: SimulationReport {
            completely_positive: checks.cp,
            trace_preserving: checks.tp,
            cppt,
            reproduces_channel: err <= 1e-9,
            reproduction_error: err,
        },
    })
}

pub fn q_theta(n: &QuantumChannel) -> Result<f64, MeasureError> {
    q_theta_with(n, &SolverConfig::default())
}

/// `log₂ ‖N ∘ T‖_⋄` from the diamond-norm program on `K = J^{T_B}`:
/// minimize `½(t₀ + t₁)` over `[[Y₀, −K], [−K, Y₁]] ⪰ 0` with
/// `Tr_B Y_i ⪯ t_i I`.
pub fn q_theta_with(n: &QuantumChannel, cfg: &SolverConfig) -> Result<f64, MeasureError> {
    let p = n.partition();
    let dim = p.total();
    let kmat = n.choi_partial_transpose();
    let mut b = HermitianSdpBuilder::new(Sense::Minimize);
    let big = b.add_psd(2 * dim);
    let k0 = b.add_psd(p.d_a);
    let k1 = b.add_psd(p.d_a);
    let t0 = b.add_nonneg();
    let t1 = b.add_nonneg();
    for r in 0..dim {
        for c in 0..dim {
            let want = -kmat.matrix()[(r, c)];
            b.add_complex_equation(vec![Term::real(big, r, dim + c, 1.0)], Part::Re, want.re);
            b.add_complex_equation(vec![Term::real(big, r, dim + c, 1.0)], Part::Im, want.im);
        }
    }
    for (slack, offset, t) in [(k0, 0, t0), (k1, dim, t1)] {
        b.add_hermitian_equation(
            p.d_a,
            |r, c| {
                let mut terms = vec![Term::real(slack, r, c, 1.0)];
                terms.extend(
                    (0..p.d_b).map(|j| Term::real(big, offset + r * p.d_b + j, offset + c * p.d_b + j, 1.0)),
                );
                if r == c {
                    terms.push(Term::scalar(t, -1.0));
                }
                terms
            },
            &ComplexMatrix::zeros(p.d_a, p.d_a),
        );
    }
    b.set_objective(vec![Term::scalar(t0, 0.5), Term::scalar(t1, 0.5)]);
    let sol = b.solve(cfg)?.require_optimal()?;
    Ok(log2_pos(sol.primal_obj()).max(0.0))
}

/// Closed-form `E_κ(N)` in bits, or `None` for channels without one.
pub fn closed_form_channel(family: &ChannelFamily) -> Option<f64> {
    match family {
        ChannelFamily::Identity { d } => Some((*d as f64).log2()),
        ChannelFamily::Erasure { p, d } => Some((*d as f64 * (1.0 - p) + p).log2()),
        ChannelFamily::Depolarizing { p, d } => {
            let d = *d as f64;
            Some((d * (1.0 - p)).log2().max(0.0))
        }
        ChannelFamily::Dephasing { q, d: 2 } => Some((1.0 + (2.0 * q - 1.0).abs()).log2()),
        ChannelFamily::AmplitudeDamping { r } if *r == 0.0 => Some(1.0),
        ChannelFamily::AmplitudeDamping { r } if *r == 1.0 => Some(0.0),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GaussianCost {
    Value(f64),
    Zero,
    Infinite,
    /// Plausible but unproven value; never ground truth.
    Conjecture(f64),
}

impl GaussianCost {
    /// Numeric value in bits, with `Zero` as 0 and `Infinite` as `+∞`.
    pub fn bits(&self) -> f64 {
        match *self {
            GaussianCost::Value(v) | GaussianCost::Conjecture(v) => v,
            GaussianCost::Zero => 0.0,
            GaussianCost::Infinite => f64::INFINITY,
        }
    }
}

/// Exact entanglement cost of single-mode Gaussian channels.
pub fn gaussian_cost(params: &GaussianChannelParams) -> Result<GaussianCost, MeasureError> {
    // Re-validate: the fields are public.
    let params = GaussianChannelParams::new(params.kind)?;
    Ok(match params.kind {
        GaussianKind::Thermal { eta, n_b } if n_b == 0.0 => gaussian_pure_loss(eta),
        GaussianKind::Thermal { eta, n_b } if (1.0 - eta) * n_b >= eta => GaussianCost::Zero,
        GaussianKind::Thermal { eta, n_b } => {
            GaussianCost::Value(((1.0 + eta) / ((1.0 - eta) * (2.0 * n_b + 1.0))).log2())
        }
        GaussianKind::Amplifier { g, n_b } if n_b == 0.0 => gaussian_pure_amplifier(g),
        GaussianKind::Amplifier { g, n_b } if (g - 1.0) * n_b >= 1.0 => GaussianCost::Zero,
        GaussianKind::Amplifier { g, n_b } => GaussianCost::Value(((g + 1.0) / ((g - 1.0) * (2.0 * n_b + 1.0))).log2()),
        GaussianKind::AdditiveNoise { xi } if xi == 0.0 => GaussianCost::Infinite,
        GaussianKind::AdditiveNoise { xi } if xi >= 1.0 => GaussianCost::Zero,
        GaussianKind::AdditiveNoise { xi } => GaussianCost::Value((1.0 / xi).log2()),
        GaussianKind::PureLoss { eta } => gaussian_pure_loss(eta),
        GaussianKind::PureAmplifier { g } => gaussian_pure_amplifier(g),
    })
}

fn gaussian_pure_loss(eta: f64) -> GaussianCost {
    GaussianCost::Conjecture(((1.0 + eta) / (1.0 - eta)).log2())
}

fn gaussian_pure_amplifier(g: f64) -> GaussianCost {
    GaussianCost::Conjecture(((g + 1.0) / (g - 1.0)).log2())
}

/// Conjectured cost `½ log max{(1 + det X)² / det Y, 1}` of a Gaussian
/// channel with scaling matrix `X` and noise matrix `Y`.
pub fn gaussian_general_conjecture(det_x: f64, det_y: f64) -> Result<GaussianCost, MeasureError> {
    if !det_x.is_finite() || !det_y.is_finite() || det_y < 0.0 {
        return Err(MeasureError::Infeasible(format!("det X = {det_x}, det Y = {det_y}")));
    }
    if det_y == 0.0 {
        return Ok(GaussianCost::Infinite);
    }
    let v = 0.5 * ((1.0 + det_x).powi(2) / det_y).max(1.0).log2();
    Ok(GaussianCost::Conjecture(v))
}

/// `E_κ(ρ)` for a state produced by a channel, used by the amortization checks.
pub fn output_e_kappa(n: &QuantumChannel, rho: &DensityMatrix) -> Result<f64, MeasureError> {
    Ok(e_kappa_primal(&apply(n, rho)?)?.value_bits)
}
