//! Infeasible-start primal-dual path following with the HKM search direction
//! and a Mehrotra predictor-corrector step.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::{Location, SdpError, SdpProblem, SdpSolution, Sense, SolveStatus, SolverConfig};

/// Symmetric constraint matrix restricted to one block, as full entry lists.
#[derive(Debug, Clone)]
struct BlockPart {
    block: usize,
    entries: Vec<(usize, usize, f64)>,
}

struct Standardized {
    dims: Vec<usize>,
    num_psd: usize,
    c: Vec<DMatrix<f64>>,
    a: Vec<Vec<BlockPart>>,
    b: DVector<f64>,
}

fn standardize(p: &SdpProblem) -> Standardized {
    let num_psd = p.block_dims.len();
    let mut dims = p.block_dims.clone();
    dims.extend(std::iter::repeat_n(1, 2 * p.num_free));
    let locations: Vec<Location> = (0..p.num_coords())
        .map(|k| p.locate(k).expect("coordinate in range"))
        .collect();
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let to_parts = |row: &[(usize, f64)]| -> Vec<BlockPart> {
        let mut acc: std::collections::BTreeMap<(usize, usize, usize), f64> = Default::default();
        for &(k, v) in row {
            match locations[k] {
                Location::Block(b, i, j) => {
                    if i == j {
                        *acc.entry((b, i, i)).or_default() += v;
                    } else {
                        *acc.entry((b, i, j)).or_default() += 0.5 * v;
                        *acc.entry((b, j, i)).or_default() += 0.5 * v;
                    }
                }
                Location::Free(f) => {
                    *acc.entry((num_psd + 2 * f, 0, 0)).or_default() += v;
                    *acc.entry((num_psd + 2 * f + 1, 0, 0)).or_default() -= v;
                }
            }
        }
        let mut parts: Vec<BlockPart> = Vec::new();
        for ((b, i, j), v) in acc {
            if v == 0.0 {
                continue;
            }
            match parts.last_mut() {
                Some(last) if last.block == b => last.entries.push((i, j, v)),
                _ => parts.push(BlockPart {
                    block: b,
                    entries: vec![(i, j, v)],
                }),
            }
        }
        parts
    };

    let mut c: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    for part in to_parts(&p.objective) {
        for (i, j, v) in part.entries {
            c[part.block][(i, j)] += sign * v;
        }
    }
    let a = p.constraints.iter().map(|row| to_parts(&row.coeffs)).collect();
    let b = DVector::from_iterator(p.constraints.len(), p.constraints.iter().map(|r| r.rhs));
    Standardized {
        dims,
        num_psd,
        c,
        a,
        b,
    }
}

fn a_op(a: &[Vec<BlockPart>], y: &[DMatrix<f64>]) -> DVector<f64> {
    DVector::from_iterator(
        a.len(),
        a.iter().map(|parts| {
            parts
                .iter()
                .map(|p| {
                    let m = &y[p.block];
                    p.entries.iter().map(|&(i, j, v)| v * m[(i, j)]).sum::<f64>()
                })
                .sum::<f64>()
        }),
    )
}

fn at_op(a: &[Vec<BlockPart>], y: &DVector<f64>, dims: &[usize]) -> Vec<DMatrix<f64>> {
    let mut out: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    for (parts, &yi) in a.iter().zip(y.iter()) {
        if yi == 0.0 {
            continue;
        }
        for p in parts {
            let m = &mut out[p.block];
            for &(i, j, v) in &p.entries {
                m[(i, j)] += yi * v;
            }
        }
    }
    out
}

/// `M_ij = Tr(A_i X A_j Z⁻¹)`.
fn schur(a: &[Vec<BlockPart>], x: &[DMatrix<f64>], zinv: &[DMatrix<f64>]) -> DMatrix<f64> {
    let m = a.len();
    let nb = x.len();
    let mut out = DMatrix::zeros(m, m);
    let mut g: Vec<Option<DMatrix<f64>>> = vec![None; nb];
    for i in 0..m {
        for slot in g.iter_mut() {
            *slot = None;
        }
        for p in &a[i] {
            let n = x[p.block].nrows();
            let xb = &x[p.block];
            let zb = &zinv[p.block];
            // G = X A_i Z⁻¹ = Σ v X[:, r] Z⁻¹[c, :]
            let mut gm = DMatrix::zeros(n, n);
            for &(r, c, v) in &p.entries {
                for col in 0..n {
                    let zc = v * zb[(c, col)];
                    if zc == 0.0 {
                        continue;
                    }
                    for row in 0..n {
                        gm[(row, col)] += xb[(row, r)] * zc;
                    }
                }
            }
            g[p.block] = Some(gm);
        }
        for j in i..m {
            let mut s = 0.0;
            for p in &a[j] {
                if let Some(gm) = &g[p.block] {
                    // Tr(A_j G) = Σ A_j[r][c] G[c][r]
                    for &(r, c, v) in &p.entries {
                        s += v * gm[(c, r)];
                    }
                }
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// `M⁻¹` for a symmetric positive definite `M`. Falls back to a spectral
/// inverse with eigenvalues floored at `1e-14 ‖M‖` when Cholesky breaks down
/// on a numerically singular iterate.
fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(sym(ch.inverse()));
    }
    spectral_power(m, -1.0)
}

/// `M^p` through the spectrum, or `None` when `M` has a clearly negative eigenvalue.
fn spectral_power(m: &DMatrix<f64>, p: f64) -> Option<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax();
    let floor = 1e-14 * scale.max(f64::MIN_POSITIVE);
    if eig.eigenvalues.iter().any(|&v| v < -1e-8 * scale) {
        return None;
    }
    let vals = eig.eigenvalues.map(|v| v.max(floor).powf(p));
    let v = &eig.eigenvectors;
    Some(sym(v * DMatrix::from_diagonal(&vals) * v.transpose()))
}

/// Largest `α` with `X + α ΔX ⪰ 0` (infinite when ΔX keeps X inside the cone).
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let s = match Cholesky::new(x.clone()) {
        Some(chol) => {
            let l = chol.l();
            let b = l.solve_lower_triangular(dx)?;
            sym(l.solve_lower_triangular(&b.transpose())?)
        }
        None => {
            let r = spectral_power(x, -0.5)?;
            sym(&r * dx * &r)
        }
    };
    let lam_min = s
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Some(if lam_min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam_min
    })
}

fn factor_schur(m: &DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(ch);
    }
    let scale = m.diagonal().iter().copied().fold(0.0, f64::max).max(1e-300);
    let mut reg = 1e-14 * scale;
    for _ in 0..6 {
        let mut mr = m.clone();
        for i in 0..mr.nrows() {
            mr[(i, i)] += reg;
        }
        if let Some(ch) = Cholesky::new(mr) {
            return Some(ch);
        }
        reg *= 100.0;
    }
    None
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    dz: Vec<DMatrix<f64>>,
}

/// Solves a block SDP. Malformed input is an error; every other outcome,
/// including non-optimal termination, is reported through the status.
pub fn solve(p: &SdpProblem, cfg: &SolverConfig) -> Result<SdpSolution, SdpError> {
    p.validate()?;
    cfg.validate()?;
    let s = standardize(p);
    let dims = &s.dims;
    let m = s.a.len();
    let total_dim: usize = dims.iter().sum();

    // Scaled identity starting point.
    let mut x: Vec<DMatrix<f64>> = Vec::with_capacity(dims.len());
    let mut z: Vec<DMatrix<f64>> = Vec::with_capacity(dims.len());
    for (k, &n) in dims.iter().enumerate() {
        let mut max_ratio: f64 = 0.0;
        let mut max_a: f64 = 0.0;
        for (parts, &bi) in s.a.iter().zip(s.b.iter()) {
            for part in parts.iter().filter(|pt| pt.block == k) {
                let na = part.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
                max_ratio = max_ratio.max((1.0 + bi.abs()) / (1.0 + na));
                max_a = max_a.max(na);
            }
        }
        let nf = n as f64;
        let xi = 10f64.max(nf.sqrt()).max(nf * max_ratio);
        let eta = 10f64
            .max(nf.sqrt())
            .max(1.0 + max_a.max(s.c[k].norm()));
        x.push(DMatrix::identity(n, n) * xi);
        z.push(DMatrix::identity(n, n) * eta);
    }
    let mut y = DVector::zeros(m);

    let norm_b = s.b.norm();
    let norm_c = frob(&s.c);
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut pinf = f64::INFINITY;
    let mut dinf = f64::INFINITY;
    let mut pobj = 0.0;
    let mut dobj = 0.0;
    let mut gap = f64::INFINITY;
    let mut stalls = 0;
    let mut cert_history: Vec<(f64, f64)> = Vec::new();
    let mut start: Option<(f64, f64)> = None;

    for iter in 0..=cfg.max_iters {
        iterations = iter;
        let ax = a_op(&s.a, &x);
        let rp = &s.b - &ax;
        let aty = at_op(&s.a, &y, dims);
        let rd: Vec<DMatrix<f64>> = (0..dims.len()).map(|k| &s.c[k] - &z[k] - &aty[k]).collect();
        pobj = inner(&s.c, &x);
        dobj = s.b.dot(&y);
        pinf = rp.norm() / (1.0 + norm_b);
        dinf = frob(&rd) / (1.0 + norm_c);
        gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        if pinf <= cfg.feas_tol && dinf <= cfg.feas_tol && gap <= cfg.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }

        // Homogeneous certificates: dual ray (b·y → ∞ with A*y + Z bounded)
        // means primal infeasible; primal ray (<C,X> → -∞ with A(X) bounded)
        // means dual infeasible.
        let primal_cert = if dobj > 0.0 {
            let r: Vec<DMatrix<f64>> = (0..dims.len()).map(|k| &rd[k] - &s.c[k]).collect();
            frob(&r) / dobj
        } else {
            f64::INFINITY
        };
        let dual_cert = if pobj < 0.0 { ax.norm() / (-pobj) } else { f64::INFINITY };
        cert_history.push((primal_cert, dual_cert));
        if primal_cert <= cfg.feas_tol || diverging(&cert_history, |c| c.0) {
            status = SolveStatus::PrimalInfeasible;
            break;
        }
        if dual_cert <= cfg.feas_tol || diverging(&cert_history, |c| c.1) {
            status = SolveStatus::DualInfeasible;
            break;
        }
        if iter == cfg.max_iters {
            break;
        }

        let Some(zinv) = z.iter().map(spd_inverse).collect::<Option<Vec<_>>>() else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let mu = inner(&x, &z) / total_dim as f64;
        let schur_m = schur(&s.a, &x, &zinv);
        let Some(chol) = factor_schur(&schur_m) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        let x_rd_zinv: Vec<DMatrix<f64>> =
            (0..dims.len()).map(|k| &x[k] * &rd[k] * &zinv[k]).collect();
        let base_rhs = &s.b + a_op(&s.a, &x_rd_zinv);

        let direction = |sigma_mu: f64, corr: Option<&[DMatrix<f64>]>| -> Direction {
            let mut rhs = base_rhs.clone();
            if sigma_mu != 0.0 {
                rhs -= a_op(&s.a, &zinv) * sigma_mu;
            }
            if let Some(w) = corr {
                rhs += a_op(&s.a, w);
            }
            let mut dy = chol.solve(&rhs);
            // Refine against the operator itself: near the boundary the formed
            // Schur matrix loses accuracy and the primal residual drifts.
            for _ in 0..2 {
                let atdy = at_op(&s.a, &dy, dims);
                let xaz: Vec<DMatrix<f64>> = (0..dims.len()).map(|k| &x[k] * &atdy[k] * &zinv[k]).collect();
                let r = &rhs - a_op(&s.a, &xaz);
                if r.norm() <= 1e-14 * (1.0 + rhs.norm()) {
                    break;
                }
                dy += chol.solve(&r);
            }
            let atdy = at_op(&s.a, &dy, dims);
            let dz: Vec<DMatrix<f64>> = (0..dims.len()).map(|k| &rd[k] - &atdy[k]).collect();
            let dx: Vec<DMatrix<f64>> = (0..dims.len())
                .map(|k| {
                    let mut t = &zinv[k] * sigma_mu - &x[k] - &x[k] * &dz[k] * &zinv[k];
                    if let Some(w) = corr {
                        t -= &w[k];
                    }
                    sym(t)
                })
                .collect();
            Direction { dx, dy, dz }
        };

        let steps = |d: &Direction, frac: f64| -> Option<(f64, f64)> {
            let mut ap: f64 = 1.0;
            let mut ad: f64 = 1.0;
            for k in 0..dims.len() {
                ap = ap.min(frac * max_step(&x[k], &d.dx[k])?);
                ad = ad.min(frac * max_step(&z[k], &d.dz[k])?);
            }
            Some((ap, ad))
        };

        // Predictor.
        let pred = direction(0.0, None);
        let Some((ap, ad)) = steps(&pred, 1.0) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let mut mu_aff = 0.0;
        for k in 0..dims.len() {
            let xa = &x[k] + &pred.dx[k] * ap;
            let za = &z[k] + &pred.dz[k] * ad;
            mu_aff += xa.dot(&za);
        }
        mu_aff /= total_dim as f64;
        let mut sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        // Keep mu from running ahead of the residuals: once the iterates hug the
        // boundary before becoming feasible, the steps collapse.
        let (mu0, infeas0) = *start.get_or_insert((mu, pinf.max(dinf)));
        if infeas0 > 0.0 && mu / mu0 < 1e-2 * pinf.max(dinf) / infeas0 {
            sigma = sigma.max(0.5);
        }

        // Corrector.
        let w: Vec<DMatrix<f64>> = (0..dims.len())
            .map(|k| &pred.dx[k] * &pred.dz[k] * &zinv[k])
            .collect();
        let corr = direction(sigma * mu, Some(&w));
        // Step fraction adapts to how far the predictor could travel.
        let frac = cfg.step_fraction.min(0.9 + 0.09 * ap.min(ad));
        let Some((ap, ad)) = steps(&corr, frac) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        for k in 0..dims.len() {
            x[k] += &corr.dx[k] * ap;
            z[k] += &corr.dz[k] * ad;
        }
        y += &corr.dy * ad;
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 5 {
                status = SolveStatus::NumericalFailure;
                break;
            }
        } else {
            stalls = 0;
        }
    }

    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let free: Vec<f64> = (0..p.num_free)
        .map(|f| x[s.num_psd + 2 * f][(0, 0)] - x[s.num_psd + 2 * f + 1][(0, 0)])
        .collect();
    let z_blocks = z.into_iter().take(s.num_psd).collect();
    x.truncate(s.num_psd);
    Ok(SdpSolution {
        status,
        primal_obj: sign * pobj,
        dual_obj: sign * dobj,
        gap,
        x_blocks: x,
        z_blocks,
        free,
        y: y.iter().map(|v| v * sign).collect(),
        iterations,
        primal_residual: pinf,
        dual_residual: dinf,
    })
}

/// Certificate ratio shrank by six orders of magnitude over the last 30 iterations.
fn diverging(history: &[(f64, f64)], pick: impl Fn(&(f64, f64)) -> f64) -> bool {
    const WINDOW: usize = 30;
    if history.len() <= WINDOW {
        return false;
    }
    let now = pick(&history[history.len() - 1]);
    let then = pick(&history[history.len() - 1 - WINDOW]);
    now.is_finite() && then.is_finite() && now < 1e-4 && now < 1e-6 * then
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn trace_bounded_below_by_identity() {
        // min Tr X s.t. X - S = I, X, S ⪰ 0 (2x2 blocks).
        let mut p = SdpProblem::new(vec![2, 2], 0, Sense::Minimize);
        p.objective = vec![(p.coord(0, 0, 0), 1.0), (p.coord(0, 1, 1), 1.0)];
        for i in 0..2 {
            for j in i..2 {
                let rhs = if i == j { 1.0 } else { 0.0 };
                p.add_constraint(vec![(p.coord(0, i, j), 1.0), (p.coord(1, i, j), -1.0)], rhs);
            }
        }
        let sol = solve(&p, &cfg()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(sol.primal_obj, 2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.dual_obj, 2.0, epsilon = 1e-7);
        assert!(sol.gap <= 1e-8);
    }

    #[test]
    fn lp_as_scalar_blocks() {
        // min x + y s.t. x - s1 = 1, y - s2 = 2.
        let mut p = SdpProblem::new(vec![1, 1, 1, 1], 0, Sense::Minimize);
        p.objective = vec![(p.coord(0, 0, 0), 1.0), (p.coord(1, 0, 0), 1.0)];
        p.add_constraint(vec![(p.coord(0, 0, 0), 1.0), (p.coord(2, 0, 0), -1.0)], 1.0);
        p.add_constraint(vec![(p.coord(1, 0, 0), 1.0), (p.coord(3, 0, 0), -1.0)], 2.0);
        let sol = solve(&p, &cfg()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(sol.primal_obj, 3.0, epsilon = 1e-7);
    }

    #[test]
    fn maximize_with_free_variable() {
        // max t s.t. t + s = 1.5, s ⪰ 0, t free.
        let mut p = SdpProblem::new(vec![1], 1, Sense::Maximize);
        p.objective = vec![(p.free_coord(0), 1.0)];
        p.add_constraint(vec![(p.free_coord(0), 1.0), (p.coord(0, 0, 0), 1.0)], 1.5);
        let sol = solve(&p, &cfg()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(sol.primal_obj, 1.5, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.free[0], 1.5, epsilon = 1e-6);
        // weak duality in the maximization sense
        assert!(sol.dual_obj >= sol.primal_obj - 1e-7);
    }

    #[test]
    fn detects_primal_infeasibility() {
        // x - s1 = 1 and x + s2 = 0 with x, s1, s2 ≥ 0.
        let mut p = SdpProblem::new(vec![1, 1, 1], 0, Sense::Minimize);
        p.objective = vec![(p.coord(0, 0, 0), 1.0)];
        p.add_constraint(vec![(p.coord(0, 0, 0), 1.0), (p.coord(1, 0, 0), -1.0)], 1.0);
        p.add_constraint(vec![(p.coord(0, 0, 0), 1.0), (p.coord(2, 0, 0), 1.0)], 0.0);
        let sol = solve(&p, &cfg()).unwrap();
        assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
    }

    #[test]
    fn detects_dual_infeasibility() {
        // min -x s.t. x - s = 0: unbounded below.
        let mut p = SdpProblem::new(vec![1, 1], 0, Sense::Minimize);
        p.objective = vec![(p.coord(0, 0, 0), -1.0)];
        p.add_constraint(vec![(p.coord(0, 0, 0), 1.0), (p.coord(1, 0, 0), -1.0)], 0.0);
        let sol = solve(&p, &cfg()).unwrap();
        assert_eq!(sol.status, SolveStatus::DualInfeasible);
    }

    #[test]
    fn deterministic_resolve() {
        let mut p = SdpProblem::new(vec![3], 0, Sense::Minimize);
        // min <C, X> s.t. Tr X = 1 gives λ_min(C).
        let cm = [[2.0, 0.5, 0.1], [0.5, 1.0, -0.3], [0.1, -0.3, 3.0]];
        for i in 0..3 {
            for j in i..3 {
                let v = if i == j { cm[i][j] } else { 2.0 * cm[i][j] };
                p.objective.push((p.coord(0, i, j), v));
            }
        }
        p.add_constraint((0..3).map(|i| (p.coord(0, i, i), 1.0)).collect(), 1.0);
        let a = solve(&p, &cfg()).unwrap();
        let b = solve(&p, &cfg()).unwrap();
        assert!((a.primal_obj - b.primal_obj).abs() <= 10.0 * cfg().gap_tol);
        let cmat = DMatrix::from_fn(3, 3, |i, j| cm[i][j]);
        let lam = cmat.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(a.primal_obj, lam, epsilon = 1e-7);
        assert!(a.primal_obj >= a.dual_obj - 1e-7);
    }
}
