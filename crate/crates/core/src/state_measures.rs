//! State quantities: κ-entanglement from its primal and dual SDPs,
//! logarithmic negativity, the binegativity test, the `Z` upper bound, the
//! one-shot exact PPT cost with its dilution channel, and closed forms.

use serde::Serialize;
use thiserror::Error;

use crate::channels::{is_cppt_bipartite, ChannelError, QuantumChannel};
use crate::matcore::{standard_operators, BipartitePartition, Complex64, HermitianOperator};
use crate::sdpcore::{
    try_bisect_threshold, BisectError, HermitianSdpBuilder, HermitianSolution, SdpError, Sense,
    SolverConfig, Term, VarId,
};
use crate::states::{DensityMatrix, StateError, StateFamily};

/// Tolerance on witness feasibility and primal/dual agreement in bits.
pub const WITNESS_TOL: f64 = 1e-6;
/// Inner feasibility threshold for the one-shot bisection.
pub const SLACK_TOL: f64 = 1e-8;
/// Bisection tolerance in `m`.
pub const BISECT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("one-shot search failed: {0}")]
    Bisect(String),
    #[error("infeasible simulation parameters: {0}")]
    Infeasible(String),
}

impl From<BisectError<MeasureError>> for MeasureError {
    fn from(e: BisectError<MeasureError>) -> Self {
        match e {
            BisectError::Predicate(inner) => inner,
            other => MeasureError::Bisect(other.to_string()),
        }
    }
}

/// Where a dual witness pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DualSource {
    /// Read off the multipliers of the primal solve.
    Multipliers,
    /// Solved from the dual program on its own.
    DualSolve,
}

#[derive(Debug, Clone)]
pub struct MeasureResult {
    pub value_bits: f64,
    pub primal_bits: f64,
    pub dual_bits: f64,
    /// `|primal_bits − dual_bits|`.
    pub gap: f64,
    pub witness_primal: HermitianOperator,
    pub witness_dual: Option<(HermitianOperator, HermitianOperator)>,
    pub dual_source: Option<DualSource>,
    pub solver_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct OneShotCostResult {
    pub m_real: f64,
    pub m_integer: usize,
    pub cost_bits: f64,
    /// Optimal `G` at `m_real`.
    pub g_witness: DensityMatrix,
    /// Max-slack `G` re-solved at `m_integer`, used to build the dilution channel.
    pub g_integer: DensityMatrix,
    pub e_kappa_bits: f64,
    /// `(log(2^E − 1), log(2^E + 1))`, the lower end reported as 0 for PPT states.
    pub sandwich: (f64, f64),
}

pub(crate) fn log2_pos(x: f64) -> f64 {
    x.max(f64::MIN_POSITIVE).log2()
}

/// Maps an entry `(k, l)` of `X^{T_B}` to the entry of `X` it reads.
pub(crate) fn pt_index(p: BipartitePartition, k: usize, l: usize) -> (usize, usize) {
    let db = p.d_b;
    let (i, j) = (k / db, k % db);
    let (i2, j2) = (l / db, l % db);
    (i * db + j2, i2 * db + j)
}

pub(crate) fn trace_terms(v: VarId, n: usize, coef: f64) -> Vec<Term> {
    (0..n).map(|i| Term::real(v, i, i, coef)).collect()
}

/// Objective terms for `Re Tr(M X)`.
pub(crate) fn inner_terms(v: VarId, m: &HermitianOperator, coef: f64) -> Vec<Term> {
    let n = m.dim();
    let mm = m.matrix();
    let mut out = Vec::new();
    for k in 0..n {
        for l in 0..n {
            let z = mm[(l, k)];
            if z != Complex64::new(0.0, 0.0) {
                out.push(Term::new(v, k, l, z * coef));
            }
        }
    }
    out
}

pub(crate) fn pt(op: &HermitianOperator, p: BipartitePartition) -> HermitianOperator {
    op.partial_transpose(p, crate::matcore::Subsystem::B)
        .expect("caller guarantees matching dimensions")
}

/// Projects onto the PSD cone and normalizes the trace.
pub(crate) fn clean_state(op: &HermitianOperator, p: BipartitePartition) -> Result<DensityMatrix, StateError> {
    let pos = op.map_spectrum(|v| v.max(0.0));
    let tr = pos.trace();
    DensityMatrix::new(pos.scale(1.0 / tr), p)
}

pub fn e_kappa_primal(rho: &DensityMatrix) -> Result<MeasureResult, MeasureError> {
    e_kappa_primal_with(rho, &SolverConfig::default())
}

/// Minimizes `Tr S` subject to `−S^{T_B} ⪯ ρ^{T_B} ⪯ S^{T_B}`, `S ⪰ 0`.
pub fn e_kappa_primal_with(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<MeasureResult, MeasureError> {
    let p = rho.partition();
    let n = p.total();
    let rho_pt = rho.partial_transpose();
    let mut b = HermitianSdpBuilder::new(Sense::Minimize);
    let s = b.add_psd(n);
    let p1 = b.add_psd(n);
    let p2 = b.add_psd(n);
    // P1 = S^{T_B} − ρ^{T_B}, P2 = S^{T_B} + ρ^{T_B}
    for (slack, sign) in [(p1, -1.0), (p2, 1.0)] {
        b.add_hermitian_equation(
            n,
            |k, l| {
                let (k2, l2) = pt_index(p, k, l);
                vec![Term::real(slack, k, l, 1.0), Term::real(s, k2, l2, -1.0)]
            },
            &(rho_pt.matrix() * Complex64::new(sign, 0.0)),
        );
    }
    b.set_objective(trace_terms(s, n, 1.0));
    let sol = b.solve(cfg)?.require_optimal()?;
    let primal_bits = log2_pos(sol.primal_obj());
    let witness_primal = sol.x(s);

    // Multipliers: V = Z_{P1}^{T_B}, W = Z_{P2}^{T_B}.
    let v = pt(&sol.z(p1), p);
    let w = pt(&sol.z(p2), p);
    let mut iterations = sol.raw.iterations;
    let (v, w, dual_bits, source) = match dual_witness_value(rho, &v, &w) {
        Some(val) if (log2_pos(val) - primal_bits).abs() <= WITNESS_TOL => {
            (v, w, log2_pos(val), DualSource::Multipliers)
        }
        _ => {
            let dual = solve_dual(rho, cfg)?;
            iterations += dual.iterations;
            (dual.v, dual.w, dual.value_bits, DualSource::DualSolve)
        }
    };
    Ok(MeasureResult {
        value_bits: primal_bits.max(0.0),
        primal_bits,
        dual_bits,
        gap: (primal_bits - dual_bits).abs(),
        witness_primal,
        witness_dual: Some((v, w)),
        dual_source: Some(source),
        solver_iterations: iterations,
    })
}

/// `Tr ρ(V − W)` when `(V, W)` is dual feasible within [`WITNESS_TOL`].
pub fn dual_witness_value(rho: &DensityMatrix, v: &HermitianOperator, w: &HermitianOperator) -> Option<f64> {
    let p = rho.partition();
    let n = p.total();
    let slack = HermitianOperator::identity(n).sub(&v.add(w));
    let ok = slack.lambda_min() >= -WITNESS_TOL
        && pt(v, p).lambda_min() >= -WITNESS_TOL
        && pt(w, p).lambda_min() >= -WITNESS_TOL;
    ok.then(|| rho.op().inner(&v.sub(w)))
}

struct DualSolution {
    v: HermitianOperator,
    w: HermitianOperator,
    s: HermitianOperator,
    value_bits: f64,
    bound_bits: f64,
    iterations: usize,
}

/// Maximizes `Tr ρ(V − W)` over `V + W ⪯ I`, `V^{T_B}, W^{T_B} ⪰ 0`,
/// posed in `A = V^{T_B}`, `B = W^{T_B}`.
fn solve_dual(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<DualSolution, MeasureError> {
    let p = rho.partition();
    let n = p.total();
    let rho_pt = rho.partial_transpose();
    let mut b = HermitianSdpBuilder::new(Sense::Maximize);
    let a = b.add_psd(n);
    let bb = b.add_psd(n);
    let k = b.add_psd(n);
    b.add_hermitian_equation(
        n,
        |r, c| {
            let (r2, c2) = pt_index(p, r, c);
            vec![
                Term::real(k, r, c, 1.0),
                Term::real(a, r2, c2, 1.0),
                Term::real(bb, r2, c2, 1.0),
            ]
        },
        &crate::matcore::ComplexMatrix::identity(n, n),
    );
    let mut obj = inner_terms(a, &rho_pt, 1.0);
    obj.extend(inner_terms(bb, &rho_pt, -1.0));
    b.set_objective(obj);
    let sol: HermitianSolution = b.solve(cfg)?.require_optimal()?;
    Ok(DualSolution {
        v: pt(&sol.x(a), p),
        w: pt(&sol.x(bb), p),
        s: sol.z(k),
        value_bits: log2_pos(sol.primal_obj()),
        bound_bits: log2_pos(sol.dual_obj()),
        iterations: sol.raw.iterations,
    })
}

pub fn e_kappa_dual(rho: &DensityMatrix) -> Result<MeasureResult, MeasureError> {
    e_kappa_dual_with(rho, &SolverConfig::default())
}

/// Solves the dual program on its own; the primal witness `S` is read off
/// its multipliers.
pub fn e_kappa_dual_with(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<MeasureResult, MeasureError> {
    let d = solve_dual(rho, cfg)?;
    Ok(MeasureResult {
        value_bits: d.value_bits.max(0.0),
        primal_bits: d.bound_bits,
        dual_bits: d.value_bits,
        gap: (d.bound_bits - d.value_bits).abs(),
        witness_primal: d.s,
        witness_dual: Some((d.v, d.w)),
        dual_source: Some(DualSource::DualSolve),
        solver_iterations: d.iterations,
    })
}

/// `E_PPT(ρ) = E_κ(ρ)`, computed from the primal with both witnesses.
pub fn exact_cost(rho: &DensityMatrix) -> Result<MeasureResult, MeasureError> {
    e_kappa_primal(rho)
}

/// `log₂ ‖ρ^{T_B}‖₁`.
pub fn log_negativity(rho: &DensityMatrix) -> f64 {
    rho.partial_transpose().norms().trace_norm.log2().max(0.0)
}

fn abs_pt_pt(rho: &DensityMatrix) -> HermitianOperator {
    pt(&rho.partial_transpose().norms().abs_op, rho.partition())
}

/// `|ρ^{T_B}|^{T_B} ⪰ 0` within `1e-9`.
pub fn binegativity_holds(rho: &DensityMatrix) -> bool {
    abs_pt_pt(rho).lambda_min() >= -1e-9
}

/// `log₂ Z(ρ)` with `Z = ‖ρ^{T_B}‖₁ + d_A d_B · max(0, −λ_min(|ρ^{T_B}|^{T_B}))`.
pub fn z_upper(rho: &DensityMatrix) -> f64 {
    let tn = rho.partial_transpose().norms().trace_norm;
    let lam = abs_pt_pt(rho).lambda_min();
    (tn + rho.dim() as f64 * (-lam).max(0.0)).log2()
}

/// Closed-form `E_PPT` in bits, or `None` for states without one.
pub fn closed_form_state(family: &StateFamily) -> Option<f64> {
    match family {
        StateFamily::Isotropic { t, d } => {
            let d = *d as f64;
            Some(if *t > 1.0 / d { (d * t).log2() } else { 0.0 })
        }
        StateFamily::Werner { p, d } => {
            let d = *d as f64;
            Some(if *p > 0.5 {
                ((2.0 / d) * (2.0 * p - 1.0) + 1.0).log2()
            } else {
                0.0
            })
        }
        StateFamily::MaxCorrelated { c } => Some(c.iter().map(|z| z.norm()).sum::<f64>().log2()),
        StateFamily::OmegaHat { alpha } => Some((1.0 + alpha).log2()),
        StateFamily::AntisymRhoV => Some(1.0),
        StateFamily::BellMix { weights } => {
            let w = weights.iter().copied().fold(0.0, f64::max);
            Some((2.0 * w).log2().max(0.0))
        }
        StateFamily::Explicit => None,
    }
}

/// Builder for the inner max-slack problem at a fixed `m`: minimize `u ≥ 0`
/// with `s = (m + 1) − u` and
/// `ρ^{T_B} + (m − 1) G^{T_B} ⪰ s I`, `(m + 1) G^{T_B} − ρ^{T_B} ⪰ s I`,
/// `G ⪰ 0`, `Tr G = 1`.
struct SlackProblem {
    builder: HermitianSdpBuilder,
    g: VarId,
    u: VarId,
    c: f64,
}

fn slack_problem(rho_pt: &HermitianOperator, p: BipartitePartition, m: f64) -> SlackProblem {
    let n = p.total();
    let c = m + 1.0;
    let mut b = HermitianSdpBuilder::new(Sense::Minimize);
    let g = b.add_psd(n);
    let p1 = b.add_psd(n);
    let p2 = b.add_psd(n);
    let u = b.add_nonneg();
    let ident = crate::matcore::ComplexMatrix::identity(n, n) * Complex64::new(c, 0.0);
    // P1 − (m−1) G^{T_B} − u I = ρ^{T_B} − c I
    // P2 − (m+1) G^{T_B} − u I = −ρ^{T_B} − c I
    for (slack, coef, sign) in [(p1, m - 1.0, 1.0), (p2, m + 1.0, -1.0)] {
        b.add_hermitian_equation(
            n,
            |k, l| {
                let (k2, l2) = pt_index(p, k, l);
                let mut t = vec![Term::real(slack, k, l, 1.0)];
                if coef != 0.0 {
                    t.push(Term::real(g, k2, l2, -coef));
                }
                if k == l {
                    t.push(Term::scalar(u, -1.0));
                }
                t
            },
            &(rho_pt.matrix() * Complex64::new(sign, 0.0) - &ident),
        );
    }
    b.add_complex_equation(trace_terms(g, n, 1.0), crate::sdpcore::Part::Re, 1.0);
    b.set_objective(vec![Term::scalar(u, 1.0)]);
    SlackProblem { builder: b, g, u, c }
}

struct SlackOutcome {
    slack: f64,
    g: HermitianOperator,
}

fn max_slack(rho_pt: &HermitianOperator, p: BipartitePartition, m: f64, cfg: &SolverConfig) -> Result<SlackOutcome, MeasureError> {
    let sp = slack_problem(rho_pt, p, m);
    let sol = sp.builder.solve(cfg)?.require_optimal()?;
    Ok(SlackOutcome {
        slack: sp.c - sol.scalar(sp.u),
        g: sol.x(sp.g),
    })
}

pub fn one_shot_ppt_cost(rho: &DensityMatrix) -> Result<OneShotCostResult, MeasureError> {
    one_shot_ppt_cost_with(rho, &SolverConfig::default())
}

/// Bisection over `m ∈ [1, max(2^{d_A}, min(d_A, d_B) + 1)]` on the
/// feasibility of the max-slack problem.
pub fn one_shot_ppt_cost_with(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<OneShotCostResult, MeasureError> {
    let p = rho.partition();
    let rho_pt = rho.partial_transpose();
    let cap = (2f64.powi(p.d_a as i32)).max(p.min_dim() as f64 + 1.0);
    let feasible = |m: f64| -> Result<bool, MeasureError> {
        Ok(max_slack(&rho_pt, p, m, cfg)?.slack >= -SLACK_TOL)
    };
    let m_real = try_bisect_threshold(feasible, 1.0, cap, BISECT_TOL)?;
    let m_integer = ((m_real - BISECT_TOL).ceil() as usize).max(1);
    let g_real = max_slack(&rho_pt, p, m_real, cfg)?.g;
    let g_int = max_slack(&rho_pt, p, m_integer as f64, cfg)?.g;
    let e_kappa_bits = e_kappa_primal_with(rho, cfg)?.value_bits;
    let e = 2f64.powf(e_kappa_bits);
    let lo = if e_kappa_bits > 0.0 { (e - 1.0).log2() } else { 0.0 };
    Ok(OneShotCostResult {
        m_real,
        m_integer,
        cost_bits: m_real.log2(),
        g_witness: clean_state(&g_real, p)?,
        g_integer: clean_state(&g_int, p)?,
        e_kappa_bits,
        sandwich: (lo, (e + 1.0).log2()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilutionReport {
    pub trace_preserving: bool,
    pub completely_positive: bool,
    pub cppt: bool,
    pub reproduces_target: bool,
    /// `max |P(Φ^m) − ρ|` entrywise.
    pub reproduction_error: f64,
}

impl DilutionReport {
    pub fn all_pass(&self) -> bool {
        self.trace_preserving && self.completely_positive && self.cppt && self.reproduces_target
    }
}

#[derive(Debug, Clone)]
pub struct DilutionChannel {
    /// Channel `Â B̂ → A B` with input `m × m`.
    pub channel: QuantumChannel,
    pub input: BipartitePartition,
    pub output: BipartitePartition,
    pub report: DilutionReport,
}

/// Feasibility tolerance for `(m, G)` in [`build_dilution_channel`].
pub const DILUTION_TOL: f64 = 1e-7;

/// Measure-prepare channel `P(X) = ρ Tr[Φ^m X] + G Tr[(I − Φ^m) X]`.
pub fn build_dilution_channel(rho: &DensityMatrix, m: usize, g: &DensityMatrix) -> Result<DilutionChannel, MeasureError> {
    let p = rho.partition();
    if g.partition() != p || m == 0 {
        return Err(MeasureError::Infeasible("G must share the partition of ρ and m ≥ 1".into()));
    }
    let rho_pt = rho.partial_transpose();
    let g_pt = g.partial_transpose();
    let mf = m as f64;
    let lower = rho_pt.add(&g_pt.scale(mf - 1.0)).lambda_min();
    let upper = g_pt.scale(mf + 1.0).sub(&rho_pt).lambda_min();
    if lower < -DILUTION_TOL || upper < -DILUTION_TOL {
        return Err(MeasureError::Infeasible(format!(
            "m = {m}: λ_min(ρ^T_B + (m−1)G^T_B) = {lower:e}, λ_min((m+1)G^T_B − ρ^T_B) = {upper:e}"
        )));
    }
    let phi = standard_operators(m).phi;
    let rest = HermitianOperator::identity(m * m).sub(&phi);
    let choi = phi.kron(rho.op()).add(&rest.kron(g.op()));
    let input = BipartitePartition { d_a: m, d_b: m };
    let channel = QuantumChannel::from_choi(choi, m * m, p.total())?;
    let checks = crate::channels::channel_checks(&channel);
    let cppt = is_cppt_bipartite(channel.choi(), &[m, m, p.d_a, p.d_b], &[false, true, false, true])?;
    let out = crate::channels::apply_bipartite(&channel, &crate::states::max_entangled(m), p)?;
    let err = out.op().max_abs_diff(rho.op());
    Ok(DilutionChannel {
        channel,
        input,
        output: p,
        report: DilutionReport {
            trace_preserving: checks.tp,
            completely_positive: checks.cp,
            cppt,
            reproduces_target: err <= 1e-9,
            reproduction_error: err,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{cr, ComplexMatrix};
    use crate::states::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pt_index_matches_partial_transpose() {
        let p = BipartitePartition::new(2, 3).unwrap();
        let r = random_density(p, 4);
        let rpt = r.partial_transpose();
        for k in 0..6 {
            for l in 0..6 {
                let (k2, l2) = pt_index(p, k, l);
                assert_eq!(rpt.matrix()[(k, l)], r.op().matrix()[(k2, l2)]);
            }
        }
    }

    #[test]
    fn e_kappa_of_max_entangled() {
        for m in 2..=4 {
            let r = e_kappa_primal(&max_entangled(m)).unwrap();
            assert_abs_diff_eq!(r.value_bits, (m as f64).log2(), epsilon = 1e-6);
            assert!(r.gap <= 1e-6);
        }
        let d = e_kappa_dual(&max_entangled(2)).unwrap();
        assert_abs_diff_eq!(d.value_bits, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn e_kappa_vanishes_on_ppt() {
        let r = e_kappa_primal(&make_isotropic(0.3, 3).unwrap()).unwrap();
        assert_abs_diff_eq!(r.value_bits, 0.0, epsilon = 1e-6);
        let mixed = make_isotropic(0.25, 2).unwrap();
        let d = e_kappa_dual(&mixed).unwrap();
        assert_abs_diff_eq!(d.value_bits, 0.0, epsilon = 1e-6);
        // V = I, W = 0 is dual feasible with value 1.
        let v = HermitianOperator::identity(4);
        let w = HermitianOperator::zeros(4);
        assert_abs_diff_eq!(dual_witness_value(&mixed, &v, &w).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn e_kappa_fixtures() {
        let t = non_convex_triple();
        let r = e_kappa_primal(&t.mixture).unwrap();
        assert_abs_diff_eq!(r.value_bits, 1.5f64.log2(), epsilon = 1e-6);
        let rv = e_kappa_primal(&make_rho_v()).unwrap();
        assert_abs_diff_eq!(rv.value_bits, 1.0, epsilon = 1e-6);
        assert!(rv.gap <= 1e-6);
    }

    #[test]
    fn primal_witness_is_feasible() {
        let rho = random_density(BipartitePartition::new(2, 2).unwrap(), 3);
        let r = e_kappa_primal(&rho).unwrap();
        let p = rho.partition();
        let s_pt = pt(&r.witness_primal, p);
        let rpt = rho.partial_transpose();
        assert!(s_pt.sub(&rpt).lambda_min() >= -1e-7);
        assert!(s_pt.add(&rpt).lambda_min() >= -1e-7);
        assert!(r.witness_primal.lambda_min() >= -1e-7);
        assert_abs_diff_eq!(r.witness_primal.trace().log2(), r.primal_bits, epsilon = 1e-7);
        let (v, w) = r.witness_dual.unwrap();
        let val = dual_witness_value(&rho, &v, &w).unwrap();
        assert_abs_diff_eq!(val.log2(), r.value_bits, epsilon = 1e-6);
    }

    #[test]
    fn negativity_binegativity_and_z() {
        let rv = make_rho_v();
        assert_abs_diff_eq!(log_negativity(&rv), (1.0 + 0.5f64.sqrt()).log2(), epsilon = 1e-12);
        assert!(!binegativity_holds(&rv));
        assert_abs_diff_eq!(z_upper(&rv), (1.0 + 13.0 / (4.0 * 2f64.sqrt())).log2(), epsilon = 1e-9);
        for m in 2..=4 {
            let phi = max_entangled(m);
            assert_abs_diff_eq!(log_negativity(&phi), (m as f64).log2(), epsilon = 1e-12);
            assert!(binegativity_holds(&phi));
            assert_abs_diff_eq!(z_upper(&phi), log_negativity(&phi), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(log_negativity(&make_isotropic(0.2, 3).unwrap()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_forms() {
        let c = ComplexMatrix::from_row_slice(2, 2, &[cr(0.5), cr(0.2), cr(0.2), cr(0.5)]);
        assert_abs_diff_eq!(
            closed_form_state(&StateFamily::MaxCorrelated { c }).unwrap(),
            1.4f64.log2(),
            epsilon = 1e-12
        );
        assert_eq!(closed_form_state(&StateFamily::Werner { p: 0.4, d: 3 }), Some(0.0));
        assert_abs_diff_eq!(
            closed_form_state(&StateFamily::Isotropic { t: 1.0, d: 4 }).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_eq!(closed_form_state(&StateFamily::Explicit), None);
    }

    #[test]
    fn exact_cost_matches_closed_forms() {
        let cases = [
            (make_werner(1.0, 3).unwrap(), (5.0f64 / 3.0).log2()),
            (make_isotropic(0.9, 3).unwrap(), 2.7f64.log2()),
            (make_omega_hat(0.2).unwrap(), 1.2f64.log2()),
            (make_omega_hat(0.3).unwrap(), 1.3f64.log2()),
        ];
        for (rho, want) in cases {
            let r = exact_cost(&rho).unwrap();
            assert_abs_diff_eq!(r.value_bits, want, epsilon = 1e-6);
            assert_abs_diff_eq!(closed_form_state(rho.family()).unwrap(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn one_shot_cases() {
        let ppt = make_isotropic(0.2, 2).unwrap();
        let r = one_shot_ppt_cost(&ppt).unwrap();
        assert_eq!(r.m_real, 1.0);
        assert_eq!(r.cost_bits, 0.0);
        assert_eq!(r.m_integer, 1);

        let phi = one_shot_ppt_cost(&max_entangled(2)).unwrap();
        assert!(phi.cost_bits >= -1e-4 && phi.cost_bits <= 3f64.log2() + 1e-4);

        let om = one_shot_ppt_cost(&make_omega_hat(0.4).unwrap()).unwrap();
        assert!(om.cost_bits >= 0.4f64.log2() - 1e-4);
        assert!(om.cost_bits <= 2.4f64.log2() + 1e-4);
        assert!(om.sandwich.0 <= om.cost_bits + 1e-4 && om.cost_bits <= om.sandwich.1 + 1e-4);
    }

    #[test]
    fn dilution_channel_cases() {
        let phi = max_entangled(2);
        let g = make_isotropic(0.0, 2).unwrap();
        let d = build_dilution_channel(&phi, 2, &g).unwrap();
        assert!(d.report.all_pass(), "{:?}", d.report);

        let ppt = make_isotropic(0.3, 3).unwrap();
        let d = build_dilution_channel(&ppt, 1, &ppt).unwrap();
        assert!(d.report.all_pass(), "{:?}", d.report);

        let bad = build_dilution_channel(&phi, 1, &phi).unwrap_err();
        assert!(matches!(bad, MeasureError::Infeasible(_)));
    }

    #[test]
    fn dilution_round_trip_from_one_shot() {
        let rho = make_omega_hat(0.6).unwrap();
        let r = one_shot_ppt_cost(&rho).unwrap();
        let d = build_dilution_channel(&rho, r.m_integer, &r.g_integer).unwrap();
        assert!(d.report.all_pass(), "{:?}", d.report);
    }
}
