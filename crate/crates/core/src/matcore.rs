//! Dense complex Hermitian linear algebra on small bipartite systems.
//!
//! Matrices are stored as [`nalgebra::DMatrix`] of [`Complex64`]. Product
//! bases are ordered with the last subsystem fastest, so for a bipartite
//! operator the basis vector `|i>_A |j>_B` has index `i * d_b + j`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use thiserror::Error;

pub type Complex64 = Complex<f64>;

/// Dense complex matrix.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Default relative tolerance for Hermiticity checks.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid subsystem dimensions {0:?}")]
    InvalidDims(Vec<usize>),
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex::new(re, 0.0)
}

/// Which half of a bipartite cut an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// Dimensions `(d_A, d_B)` of a bipartite cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BipartitePartition {
    pub d_a: usize,
    pub d_b: usize,
}

impl BipartitePartition {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self, MatError> {
        if d_a == 0 || d_b == 0 {
            return Err(MatError::InvalidDims(vec![d_a, d_b]));
        }
        Ok(Self { d_a, d_b })
    }

    pub fn total(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.d_a, self.d_b]
    }

    pub fn min_dim(&self) -> usize {
        self.d_a.min(self.d_b)
    }

    fn check(&self, dim: usize) -> Result<(), MatError> {
        if self.total() != dim {
            return Err(MatError::DimensionMismatch {
                expected: self.total(),
                found: dim,
            });
        }
        Ok(())
    }
}

/// Square complex matrix that is Hermitian within [`HERMITICITY_TOL`].
///
/// Construction symmetrizes the input as `(M + M†)/2`, so every stored
/// operator is exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

/// Spectral decomposition with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the same order as `values`.
    pub vectors: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct Norms {
    pub trace_norm: f64,
    pub op_norm: f64,
    pub abs_op: HermitianOperator,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, MatError> {
        Self::with_tolerance(matrix, HERMITICITY_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self, MatError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(MatError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatError::NonFinite);
        }
        let scale = max_abs(&matrix).max(1.0);
        let deviation = max_abs(&(&matrix - matrix.adjoint()));
        if deviation > tol * scale {
            return Err(MatError::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(matrix))
    }

    /// Symmetrizes without checking; for results of Hermiticity-preserving maps.
    pub(crate) fn symmetrized(matrix: ComplexMatrix) -> Self {
        let adj = matrix.adjoint();
        Self {
            matrix: (matrix + adj) * cr(0.5),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = cr(d);
        }
        Self { matrix: m }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(n, n),
        }
    }

    /// Projector `|v><v|` (not normalized).
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let m = ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: &self.matrix * cr(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::symmetrized(u * &self.matrix * u.adjoint())
    }

    /// Real part of `Tr(self * other)`.
    pub fn inner(&self, other: &Self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.matrix[(i, j)] * other.matrix[(j, i)]).re;
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn partial_transpose(
        &self,
        p: BipartitePartition,
        which: Subsystem,
    ) -> Result<Self, MatError> {
        partial_transpose(self, p, which)
    }

    pub fn partial_trace(&self, p: BipartitePartition, traced: Subsystem) -> Result<Self, MatError> {
        partial_trace(self, p, traced)
    }

    pub fn eig(&self) -> Eigen {
        hermitian_eig(self)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn norms(&self) -> Norms {
        norms(self)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        psd_check(self, tol)
    }

    /// Applies `f` to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = self.eig();
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in e.values.iter().enumerate() {
            let v = e.vectors.column(k);
            let w = f(lam);
            out += &v * v.adjoint() * cr(w);
        }
        Self::symmetrized(out)
    }
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn undigits(d: &[usize], dims: &[usize]) -> usize {
    d.iter().zip(dims).fold(0, |acc, (&x, &n)| acc * n + x)
}

fn check_dims(m: &ComplexMatrix, dims: &[usize]) -> Result<usize, MatError> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(MatError::InvalidDims(dims.to_vec()));
    }
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(MatError::DimensionMismatch {
            expected: total,
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(total)
}

/// Partial transpose over every subsystem `k` with `mask[k]` set.
pub fn partial_transpose_systems(
    m: &ComplexMatrix,
    dims: &[usize],
    mask: &[bool],
) -> Result<ComplexMatrix, MatError> {
    let total = check_dims(m, dims)?;
    if mask.len() != dims.len() {
        return Err(MatError::InvalidDims(dims.to_vec()));
    }
    let k = dims.len();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut r = vec![0; k];
    let mut s = vec![0; k];
    for row in 0..total {
        digits(row, dims, &mut r);
        for col in 0..total {
            digits(col, dims, &mut s);
            let mut rr = r.clone();
            let mut ss = s.clone();
            for q in 0..k {
                if mask[q] {
                    std::mem::swap(&mut rr[q], &mut ss[q]);
                }
            }
            out[(row, col)] = m[(undigits(&rr, dims), undigits(&ss, dims))];
        }
    }
    Ok(out)
}

/// Traces out every subsystem `k` with `keep[k]` false.
pub fn partial_trace_systems(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[bool],
) -> Result<ComplexMatrix, MatError> {
    let total = check_dims(m, dims)?;
    if keep.len() != dims.len() {
        return Err(MatError::InvalidDims(dims.to_vec()));
    }
    let kept_dims: Vec<usize> = dims
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(&d, _)| d)
        .collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    let k = dims.len();
    let mut r = vec![0; k];
    let mut s = vec![0; k];
    let mut rk = Vec::with_capacity(k);
    let mut sk = Vec::with_capacity(k);
    for row in 0..total {
        digits(row, dims, &mut r);
        for col in 0..total {
            digits(col, dims, &mut s);
            if (0..k).any(|q| !keep[q] && r[q] != s[q]) {
                continue;
            }
            rk.clear();
            sk.clear();
            for q in 0..k {
                if keep[q] {
                    rk.push(r[q]);
                    sk.push(s[q]);
                }
            }
            out[(undigits(&rk, &kept_dims), undigits(&sk, &kept_dims))] += m[(row, col)];
        }
    }
    Ok(out)
}

/// `M_1 ⊗ M_2` on `(X_1 Y_1)(X_2 Y_2)` regrouped as `(X_1 X_2)(Y_1 Y_2)`.
///
/// Used for tensor products of bipartite states and of Choi operators,
/// where `X` is the `A` or `R` factor and `Y` the `B` factor.
pub fn kron_regrouped(
    m1: &ComplexMatrix,
    dims1: [usize; 2],
    m2: &ComplexMatrix,
    dims2: [usize; 2],
) -> Result<ComplexMatrix, MatError> {
    let (x1, y1) = (dims1[0], dims1[1]);
    let (x2, y2) = (dims2[0], dims2[1]);
    if m1.nrows() != x1 * y1 || m2.nrows() != x2 * y2 {
        return Err(MatError::DimensionMismatch {
            expected: x1 * y1 * x2 * y2,
            found: m1.nrows() * m2.nrows(),
        });
    }
    permute_systems(&kron(m1, m2), &[x1, y1, x2, y2], &REGROUP_PERM)
}

/// Factor order `(X_1 Y_1 X_2 Y_2) → (X_1 X_2 Y_1 Y_2)`.
const REGROUP_PERM: [usize; 4] = [0, 2, 1, 3];

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
pub fn permute_systems(
    m: &ComplexMatrix,
    dims: &[usize],
    perm: &[usize],
) -> Result<ComplexMatrix, MatError> {
    let total = check_dims(m, dims)?;
    let k = dims.len();
    let mut seen = vec![false; k];
    if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
        return Err(MatError::InvalidDims(perm.to_vec()));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut r = vec![0; k];
    let mut s = vec![0; k];
    let mut rn = vec![0; k];
    let mut sn = vec![0; k];
    for row in 0..total {
        digits(row, dims, &mut r);
        for q in 0..k {
            rn[q] = r[perm[q]];
        }
        let new_row = undigits(&rn, &new_dims);
        for col in 0..total {
            digits(col, dims, &mut s);
            for q in 0..k {
                sn[q] = s[perm[q]];
            }
            out[(new_row, undigits(&sn, &new_dims))] = m[(row, col)];
        }
    }
    Ok(out)
}

pub fn partial_transpose(
    m: &HermitianOperator,
    p: BipartitePartition,
    which: Subsystem,
) -> Result<HermitianOperator, MatError> {
    p.check(m.dim())?;
    let mask = match which {
        Subsystem::A => [true, false],
        Subsystem::B => [false, true],
    };
    let out = partial_transpose_systems(&m.matrix, &p.dims(), &mask)?;
    Ok(HermitianOperator { matrix: out })
}

pub fn partial_trace(
    m: &HermitianOperator,
    p: BipartitePartition,
    traced: Subsystem,
) -> Result<HermitianOperator, MatError> {
    p.check(m.dim())?;
    let keep = match traced {
        Subsystem::A => [false, true],
        Subsystem::B => [true, false],
    };
    let out = partial_trace_systems(&m.matrix, &p.dims(), &keep)?;
    Ok(HermitianOperator::symmetrized(out))
}

pub fn hermitian_eig(m: &HermitianOperator) -> Eigen {
    let dec = SymmetricEigen::new(m.matrix.clone());
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[i].total_cmp(&dec.eigenvalues[j]));
    let values = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &dec.eigenvectors.column(i));
    }
    Eigen { values, vectors }
}

pub fn norms(m: &HermitianOperator) -> Norms {
    let e = m.eig();
    let trace_norm = e.values.iter().map(|l| l.abs()).sum();
    let op_norm = e.values.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let n = m.dim();
    let mut abs = ComplexMatrix::zeros(n, n);
    for (k, &lam) in e.values.iter().enumerate() {
        let v = e.vectors.column(k);
        abs += &v * v.adjoint() * cr(lam.abs());
    }
    Norms {
        trace_norm,
        op_norm,
        abs_op: HermitianOperator::symmetrized(abs),
    }
}

/// True iff `λ_min(m) ≥ -tol · max(1, ‖m‖_∞)`.
pub fn psd_check(m: &HermitianOperator, tol: f64) -> bool {
    let vals = m.eigenvalues();
    let (lo, hi) = match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return true,
    };
    let scale = lo.abs().max(hi.abs()).max(1.0);
    lo >= -tol * scale
}

/// Operators built on `C^d ⊗ C^d`.
#[derive(Debug, Clone)]
pub struct StandardOperators {
    /// Maximally entangled state `Γ/d`.
    pub phi: HermitianOperator,
    /// Unnormalized `Γ = Σ_ij |ii><jj|`.
    pub gamma: HermitianOperator,
    pub swap: HermitianOperator,
    pub proj_sym: HermitianOperator,
    pub proj_antisym: HermitianOperator,
}

pub fn standard_operators(d: usize) -> StandardOperators {
    let gamma = gamma_operator(d);
    let phi = gamma.scale(1.0 / d as f64);
    let swap = swap_operator(d);
    let id = HermitianOperator::identity(d * d);
    let proj_sym = id.add(&swap).scale(0.5);
    let proj_antisym = id.sub(&swap).scale(0.5);
    StandardOperators {
        phi,
        gamma,
        swap,
        proj_sym,
        proj_antisym,
    }
}

pub fn gamma_operator(d: usize) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = cr(1.0);
        }
    }
    HermitianOperator { matrix: m }
}

pub fn swap_operator(d: usize) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = cr(1.0);
        }
    }
    HermitianOperator { matrix: m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = ComplexMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermitianOperator::symmetrized(m)
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4, 4));
        let a = HermitianOperator::from_real_diagonal(&[1.0, 2.0]);
        let b = HermitianOperator::from_real_diagonal(&[3.0, 4.0]);
        assert_eq!(a.kron(&b), HermitianOperator::from_real_diagonal(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn zz_on_11() {
        let zz = kron(&pauli_z(), &pauli_z());
        let mut v = nalgebra::DVector::<Complex64>::zeros(4);
        v[3] = cr(1.0);
        let out = &zz * &v;
        // direct multiply: only the (3,3) entry of ZZ touches |11>
        let mut expected = nalgebra::DVector::<Complex64>::zeros(4);
        expected[3] = zz[(3, 3)];
        assert_eq!(out, expected);
        assert_eq!(out[3], cr(1.0));
    }

    #[test]
    fn partial_transpose_of_phi2_is_half_swap() {
        let ops = standard_operators(2);
        let p = BipartitePartition::new(2, 2).unwrap();
        let pt = ops.phi.partial_transpose(p, Subsystem::B).unwrap();
        assert!(pt.max_abs_diff(&ops.swap.scale(0.5)) < 1e-15);
        let vals = pt.eigenvalues();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (v, e) in vals.iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_transpose_product_and_involution() {
        let p = BipartitePartition::new(2, 3).unwrap();
        let a = random_hermitian(2, 1);
        let b = random_hermitian(3, 2);
        let prod = a.kron(&b);
        let pt = prod.partial_transpose(p, Subsystem::B).unwrap();
        let bt = HermitianOperator::symmetrized(b.matrix().transpose());
        assert!(pt.max_abs_diff(&a.kron(&bt)) < 1e-15);
        let m = random_hermitian(6, 3);
        let twice = m
            .partial_transpose(p, Subsystem::B)
            .unwrap()
            .partial_transpose(p, Subsystem::B)
            .unwrap();
        assert_eq!(twice, m);
        let ta = m.partial_transpose(p, Subsystem::A).unwrap();
        assert_abs_diff_eq!(ta.trace(), m.trace(), epsilon = 1e-14);
    }

    #[test]
    fn partial_transpose_dimension_mismatch() {
        let p = BipartitePartition::new(2, 2).unwrap();
        let m = HermitianOperator::identity(6);
        assert!(matches!(
            m.partial_transpose(p, Subsystem::B),
            Err(MatError::DimensionMismatch { .. })
        ));
        assert!(m.partial_trace(p, Subsystem::A).is_err());
    }

    #[test]
    fn partial_trace_cases() {
        let ops = standard_operators(2);
        let p = BipartitePartition::new(2, 2).unwrap();
        let marginal = ops.phi.partial_trace(p, Subsystem::B).unwrap();
        assert!(marginal.max_abs_diff(&HermitianOperator::identity(2).scale(0.5)) < 1e-15);

        let p23 = BipartitePartition::new(2, 3).unwrap();
        let a = random_hermitian(2, 7);
        let b = random_hermitian(3, 8);
        let tr_a = a.kron(&b).partial_trace(p23, Subsystem::A).unwrap();
        assert!(tr_a.max_abs_diff(&b.scale(a.trace())) < 1e-14);

        // naive index-summation oracle on a 6x6 (2x3) operator
        let m = random_hermitian(6, 9);
        let tr_b = m.partial_trace(p23, Subsystem::B).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                let mut acc = cr(0.0);
                for j in 0..3 {
                    acc += m.matrix()[(i * 3 + j, k * 3 + j)];
                }
                assert!((tr_b.matrix()[(i, k)] - acc).norm() <= 1e-12);
            }
        }
        assert_abs_diff_eq!(tr_b.trace(), m.trace(), epsilon = 1e-12);
    }

    #[test]
    fn eig_cases() {
        let z = HermitianOperator::new(pauli_z()).unwrap();
        assert_eq!(z.eig().values, vec![-1.0, 1.0]);
        for seed in 0..10 {
            let m = random_hermitian(7, seed);
            let e = m.eig();
            let sum: f64 = e.values.iter().sum();
            assert_abs_diff_eq!(sum, m.trace(), epsilon = 1e-10);
            let u = &e.vectors;
            let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                7,
                e.values.iter().map(|&v| cr(v)),
            ));
            let recon = u * d * u.adjoint();
            let scale = m.norms().op_norm;
            assert!(max_abs(&(recon - m.matrix())) <= 1e-9 * 7.0 * scale);
            assert!(max_abs(&(u.adjoint() * u - ComplexMatrix::identity(7, 7))) <= 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        assert!(matches!(HermitianOperator::new(m), Err(MatError::NotHermitian { .. })));
        let nan = ComplexMatrix::from_element(2, 2, cr(f64::NAN));
        assert_eq!(HermitianOperator::new(nan), Err(MatError::NonFinite));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(HermitianOperator::new(rect), Err(MatError::NotSquare { .. })));
    }

    #[test]
    fn norm_cases() {
        for m in 2..=5 {
            let ops = standard_operators(m);
            let p = BipartitePartition::new(m, m).unwrap();
            let pt = ops.phi.partial_transpose(p, Subsystem::B).unwrap();
            assert_abs_diff_eq!(pt.norms().trace_norm, m as f64, epsilon = 1e-12);
        }
        let id = HermitianOperator::identity(5);
        let n = id.norms();
        assert_abs_diff_eq!(n.trace_norm, 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.op_norm, 1.0, epsilon = 1e-14);
        let z = HermitianOperator::new(pauli_z()).unwrap();
        assert!(z.norms().abs_op.max_abs_diff(&HermitianOperator::identity(2)) < 1e-14);
    }

    #[test]
    fn standard_operator_identities() {
        let two = standard_operators(2);
        let rank = |h: &HermitianOperator| h.eigenvalues().iter().filter(|&&v| v > 0.5).count();
        assert_eq!(rank(&two.proj_antisym), 1);
        assert_eq!(rank(&two.proj_sym), 3);
        assert_abs_diff_eq!(standard_operators(3).proj_antisym.trace(), 3.0, epsilon = 1e-14);
        for d in 2..=4 {
            let ops = standard_operators(d);
            let n = d * d;
            let f2 = ops.swap.matrix() * ops.swap.matrix();
            assert_eq!(f2, ComplexMatrix::identity(n, n));
            let s = ops.proj_sym.matrix();
            let a = ops.proj_antisym.matrix();
            assert!(max_abs(&(s * s - s)) < 1e-14);
            assert!(max_abs(&(a * a - a)) < 1e-14);
            assert!(max_abs(&(s * a)) < 1e-14);
            assert!(max_abs(&(s + a - ComplexMatrix::identity(n, n))) < 1e-14);
            assert!(max_abs(&(s - a - ops.swap.matrix())) < 1e-14);
            assert!(ops.phi.max_abs_diff(&ops.gamma.scale(1.0 / d as f64)) < 1e-15);
        }
    }

    #[test]
    fn psd_check_cases() {
        assert!(psd_check(&HermitianOperator::identity(4), 1e-9));
        let ops = standard_operators(2);
        let p = BipartitePartition::new(2, 2).unwrap();
        let pt = ops.phi.partial_transpose(p, Subsystem::B).unwrap();
        assert!(!psd_check(&pt, 1e-9));
        assert!(psd_check(&HermitianOperator::zeros(3), 1e-9));
    }

    #[test]
    fn permute_and_multi_system_helpers() {
        let a = random_hermitian(2, 11);
        let b = random_hermitian(3, 12);
        let ab = kron(a.matrix(), b.matrix());
        let ba = permute_systems(&ab, &[2, 3], &[1, 0]).unwrap();
        assert!(max_abs(&(ba - kron(b.matrix(), a.matrix()))) < 1e-15);
        assert!(permute_systems(&ab, &[2, 3], &[0, 0]).is_err());

        let m = random_hermitian(6, 13);
        let p = BipartitePartition::new(2, 3).unwrap();
        let via_multi =
            partial_transpose_systems(m.matrix(), &[2, 3], &[false, true]).unwrap();
        let via_bi = m.partial_transpose(p, Subsystem::B).unwrap();
        assert_eq!(&via_multi, via_bi.matrix());
    }

    #[test]
    fn kron_partial_transpose_factorizes() {
        // (M ⊗ N)^{T_B T_B'} = M^{T_B} ⊗ N^{T_B'}
        let m = random_hermitian(4, 21);
        let n = random_hermitian(4, 22);
        let p = BipartitePartition::new(2, 2).unwrap();
        let lhs = partial_transpose_systems(
            &kron(m.matrix(), n.matrix()),
            &[2, 2, 2, 2],
            &[false, true, false, true],
        )
        .unwrap();
        let rhs = kron(
            m.partial_transpose(p, Subsystem::B).unwrap().matrix(),
            n.partial_transpose(p, Subsystem::B).unwrap().matrix(),
        );
        assert!(max_abs(&(lhs - rhs)) < 1e-15);
    }

    #[test]
    fn kron_regrouped_matches_index_oracle() {
        // Exhaustive over small factor dimensions, entrywise against the
        // direct index formula M1[(x1 y1),(x1' y1')] M2[(x2 y2),(x2' y2')].
        for x1 in 1..=3 {
            for y1 in 1..=3 {
                for x2 in 1..=2 {
                    for y2 in 1..=3 {
                        let n1 = x1 * y1;
                        let n2 = x2 * y2;
                        let m1 = ComplexMatrix::from_fn(n1, n1, |r, s| c(r as f64 + 0.1, s as f64));
                        let m2 = ComplexMatrix::from_fn(n2, n2, |r, s| c(1.0 + s as f64, -(r as f64)));
                        let out = kron_regrouped(&m1, [x1, y1], &m2, [x2, y2]).unwrap();
                        let idx = |a1: usize, a2: usize, b1: usize, b2: usize| {
                            ((a1 * x2 + a2) * y1 + b1) * y2 + b2
                        };
                        for a1 in 0..x1 {
                            for a2 in 0..x2 {
                                for b1 in 0..y1 {
                                    for b2 in 0..y2 {
                                        for c1 in 0..x1 {
                                            for c2 in 0..x2 {
                                                for d1 in 0..y1 {
                                                    for d2 in 0..y2 {
                                                        let want = m1[(a1 * y1 + b1, c1 * y1 + d1)]
                                                            * m2[(a2 * y2 + b2, c2 * y2 + d2)];
                                                        let got = out[(idx(a1, a2, b1, b2), idx(c1, c2, d1, d2))];
                                                        assert_eq!(got, want);
                                                    }
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        let m = ComplexMatrix::identity(4, 4);
        assert!(kron_regrouped(&m, [2, 3], &m, [2, 2]).is_err());
    }
}
