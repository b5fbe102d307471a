//! Complex Hermitian SDPs posed over real symmetric blocks.
//!
//! A Hermitian `n×n` variable `X = A + iB` is stored as the real block
//! `Y = [[A, -B], [B, A]]`. Entry functionals average the two copies of each
//! value, so every constraint and the objective are invariant under the
//! symmetry that preserves this structure and reported objectives are the
//! complex-domain values with no factor-2 rescaling left to the caller.

use nalgebra::DMatrix;

use super::{solve, SdpError, SdpProblem, SdpSolution, Sense, SolveStatus, SolverConfig};
use crate::matcore::{Complex64, ComplexMatrix, HermitianOperator};

/// `[[Re h, -Im h], [Im h, Re h]]`.
pub fn embed_hermitian(h: &HermitianOperator) -> DMatrix<f64> {
    let m = h.matrix();
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed_hermitian`], averaging the redundant copies.
pub fn deembed_hermitian(y: &DMatrix<f64>) -> HermitianOperator {
    let n = y.nrows() / 2;
    let m = ComplexMatrix::from_fn(n, n, |r, c| {
        Complex64::new(
            0.5 * (y[(r, c)] + y[(r + n, c + n)]),
            0.5 * (y[(r + n, c)] - y[(r, c + n)]),
        )
    });
    HermitianOperator::symmetrized(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Hermitian(usize),
    NonNegative,
    Free,
}

/// `coef · X[row][col]`; scalar variables use `row = col = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub var: VarId,
    pub row: usize,
    pub col: usize,
    pub coef: Complex64,
}

impl Term {
    pub fn new(var: VarId, row: usize, col: usize, coef: Complex64) -> Self {
        Self { var, row, col, coef }
    }

    pub fn real(var: VarId, row: usize, col: usize, coef: f64) -> Self {
        Self::new(var, row, col, Complex64::new(coef, 0.0))
    }

    pub fn scalar(var: VarId, coef: f64) -> Self {
        Self::real(var, 0, 0, coef)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

#[derive(Debug, Clone)]
pub struct HermitianSdpBuilder {
    vars: Vec<VarKind>,
    /// Real block index for PSD variables, free index otherwise.
    slots: Vec<usize>,
    block_dims: Vec<usize>,
    num_free: usize,
    rows: Vec<(Vec<Term>, Part, f64)>,
    objective: Vec<Term>,
    sense: Sense,
}

impl HermitianSdpBuilder {
    pub fn new(sense: Sense) -> Self {
        Self {
            vars: Vec::new(),
            slots: Vec::new(),
            block_dims: Vec::new(),
            num_free: 0,
            rows: Vec::new(),
            objective: Vec::new(),
            sense,
        }
    }

    fn push_var(&mut self, kind: VarKind) -> VarId {
        let slot = match kind {
            VarKind::Hermitian(n) => {
                self.block_dims.push(2 * n);
                self.block_dims.len() - 1
            }
            VarKind::NonNegative => {
                self.block_dims.push(1);
                self.block_dims.len() - 1
            }
            VarKind::Free => {
                self.num_free += 1;
                self.num_free - 1
            }
        };
        self.vars.push(kind);
        self.slots.push(slot);
        VarId(self.vars.len() - 1)
    }

    /// A PSD Hermitian matrix variable.
    pub fn add_psd(&mut self, n: usize) -> VarId {
        self.push_var(VarKind::Hermitian(n))
    }

    pub fn add_nonneg(&mut self) -> VarId {
        self.push_var(VarKind::NonNegative)
    }

    pub fn add_free(&mut self) -> VarId {
        self.push_var(VarKind::Free)
    }

    pub fn dim(&self, v: VarId) -> usize {
        match self.vars[v.0] {
            VarKind::Hermitian(n) => n,
            _ => 1,
        }
    }

    /// Adds the real or imaginary part of `Σ terms = rhs`.
    pub fn add_complex_equation(&mut self, terms: Vec<Term>, part: Part, rhs: f64) {
        self.rows.push((terms, part, rhs));
    }

    /// Adds `E = rhs` for an `n×n` Hermitian expression `E` whose `(k, l)`
    /// entry is given by `entry(k, l)`. Only the upper triangle is imposed.
    pub fn add_hermitian_equation(
        &mut self,
        n: usize,
        entry: impl Fn(usize, usize) -> Vec<Term>,
        rhs: &ComplexMatrix,
    ) {
        for k in 0..n {
            for l in k..n {
                let terms = entry(k, l);
                let z = rhs[(k, l)];
                if k < l {
                    self.rows.push((terms.clone(), Part::Im, z.im));
                }
                self.rows.push((terms, Part::Re, z.re));
            }
        }
    }

    /// Objective `Re Σ terms`.
    pub fn set_objective(&mut self, terms: Vec<Term>) {
        self.objective = terms;
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn real_coeffs(&self, p: &SdpProblem, terms: &[Term], part: Part) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(4 * terms.len());
        for t in terms {
            let (a, b) = (t.coef.re, t.coef.im);
            // Re(coef·x) = a·Re x − b·Im x, Im(coef·x) = a·Im x + b·Re x
            let (on_re, on_im) = match part {
                Part::Re => (a, -b),
                Part::Im => (b, a),
            };
            let slot = self.slots[t.var.0];
            match self.vars[t.var.0] {
                VarKind::Hermitian(n) => {
                    let (r, c) = (t.row, t.col);
                    assert!(r < n && c < n, "term index out of range");
                    if on_re != 0.0 {
                        out.push((p.coord(slot, r, c), 0.5 * on_re));
                        out.push((p.coord(slot, r + n, c + n), 0.5 * on_re));
                    }
                    if on_im != 0.0 && r != c {
                        out.push((p.coord(slot, r + n, c), 0.5 * on_im));
                        out.push((p.coord(slot, r, c + n), -0.5 * on_im));
                    }
                }
                VarKind::NonNegative => {
                    if on_re != 0.0 {
                        out.push((p.coord(slot, 0, 0), on_re));
                    }
                }
                VarKind::Free => {
                    if on_re != 0.0 {
                        out.push((p.free_coord(slot), on_re));
                    }
                }
            }
        }
        out
    }

    pub fn build(&self) -> SdpProblem {
        let mut p = SdpProblem::new(self.block_dims.clone(), self.num_free, self.sense);
        p.objective = self.real_coeffs(&p, &self.objective, Part::Re);
        for (terms, part, rhs) in &self.rows {
            let coeffs = self.real_coeffs(&p, terms, *part);
            p.add_constraint(coeffs, *rhs);
        }
        p
    }

    pub fn solve(&self, cfg: &SolverConfig) -> Result<HermitianSolution, SdpError> {
        let raw = solve(&self.build(), cfg)?;
        Ok(HermitianSolution {
            vars: self.vars.clone(),
            slots: self.slots.clone(),
            raw,
        })
    }
}

#[derive(Debug, Clone)]
pub struct HermitianSolution {
    vars: Vec<VarKind>,
    slots: Vec<usize>,
    pub raw: SdpSolution,
}

impl HermitianSolution {
    pub fn status(&self) -> SolveStatus {
        self.raw.status
    }

    pub fn is_optimal(&self) -> bool {
        self.raw.is_optimal()
    }

    /// Errors unless the solve reached optimality.
    pub fn require_optimal(self) -> Result<Self, SdpError> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(SdpError::from_solution(&self.raw))
        }
    }

    pub fn primal_obj(&self) -> f64 {
        self.raw.primal_obj
    }

    pub fn dual_obj(&self) -> f64 {
        self.raw.dual_obj
    }

    pub fn gap(&self) -> f64 {
        self.raw.gap
    }

    /// Primal value of a Hermitian variable.
    pub fn x(&self, v: VarId) -> HermitianOperator {
        match self.vars[v.0] {
            VarKind::Hermitian(_) => deembed_hermitian(&self.raw.x_blocks[self.slots[v.0]]),
            _ => HermitianOperator::from_real_diagonal(&[self.scalar(v)]),
        }
    }

    /// Dual slack paired with a PSD variable, in the complex domain.
    pub fn z(&self, v: VarId) -> HermitianOperator {
        match self.vars[v.0] {
            VarKind::Hermitian(_) => {
                deembed_hermitian(&self.raw.z_blocks[self.slots[v.0]]).scale(2.0)
            }
            VarKind::NonNegative => {
                HermitianOperator::from_real_diagonal(&[self.raw.z_blocks[self.slots[v.0]][(0, 0)]])
            }
            VarKind::Free => HermitianOperator::zeros(1),
        }
    }

    pub fn scalar(&self, v: VarId) -> f64 {
        match self.vars[v.0] {
            VarKind::NonNegative => self.raw.x_blocks[self.slots[v.0]][(0, 0)],
            VarKind::Free => self.raw.free[self.slots[v.0]],
            VarKind::Hermitian(_) => panic!("scalar() called on a matrix variable"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c, cr};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        HermitianOperator::symmetrized(&g + g.adjoint())
    }

    fn real_eigs(m: &DMatrix<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn identity_embeds_to_identity() {
        let e = embed_hermitian(&HermitianOperator::identity(2));
        assert_eq!(e, DMatrix::identity(4, 4));
    }

    #[test]
    fn pauli_y_embedding_spectrum() {
        let y = HermitianOperator::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)],
        ))
        .unwrap();
        let e = embed_hermitian(&y);
        let ev = real_eigs(&e);
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn embedding_preserves_min_eigenvalue_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let h = random_hermitian(3, &mut rng);
            let e = embed_hermitian(&h);
            let ev = real_eigs(&e);
            let hv = h.eigenvalues();
            assert_abs_diff_eq!(ev[0], hv[0], epsilon = 1e-10);
            for k in 0..3 {
                assert_abs_diff_eq!(ev[2 * k], hv[k], epsilon = 1e-10);
                assert_abs_diff_eq!(ev[2 * k + 1], hv[k], epsilon = 1e-10);
            }
            assert_abs_diff_eq!(e.trace(), 2.0 * h.trace(), epsilon = 1e-12);
            assert!(deembed_hermitian(&e).max_abs_diff(&h) < 1e-15);
        }
    }

    #[test]
    fn hermitian_constraint_round_trip() {
        // min Tr X s.t. X − S = H with X, S ⪰ 0: optimum Σ max(λ_i(H), 0).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(3, &mut rng);
        let mut b = HermitianSdpBuilder::new(Sense::Minimize);
        let x = b.add_psd(3);
        let s = b.add_psd(3);
        b.add_hermitian_equation(
            3,
            |k, l| vec![Term::real(x, k, l, 1.0), Term::real(s, k, l, -1.0)],
            h.matrix(),
        );
        b.set_objective((0..3).map(|i| Term::real(x, i, i, 1.0)).collect());
        let sol = b.solve(&SolverConfig::default()).unwrap().require_optimal().unwrap();
        let want: f64 = h.eigenvalues().iter().map(|v| v.max(0.0)).sum();
        assert_abs_diff_eq!(sol.primal_obj(), want, epsilon = 1e-7);
        let residual = sol.x(x).sub(&sol.x(s)).max_abs_diff(&h);
        assert!(residual < 1e-7, "residual {residual}");
        // Complementary slackness on the complex side: Z_X = I − Λ, Z_S = Λ.
        let zsum = sol.z(x).add(&sol.z(s));
        assert!(zsum.max_abs_diff(&HermitianOperator::identity(3)) < 1e-6);
    }

    #[test]
    fn complex_coefficient_rows() {
        // max Re(X01) + Im(X01) s.t. Tr X = 1 over 2×2 PSD: optimum √2 / 2.
        let mut b = HermitianSdpBuilder::new(Sense::Maximize);
        let x = b.add_psd(2);
        b.add_complex_equation(vec![Term::real(x, 0, 0, 1.0), Term::real(x, 1, 1, 1.0)], Part::Re, 1.0);
        // Re((1 − i)·X01) = Re X01 + Im X01
        b.set_objective(vec![Term::new(x, 0, 1, c(1.0, -1.0))]);
        let sol = b.solve(&SolverConfig::default()).unwrap().require_optimal().unwrap();
        assert_abs_diff_eq!(sol.primal_obj(), 0.5 * 2f64.sqrt(), epsilon = 1e-7);
    }
}
