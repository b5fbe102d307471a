//! Bipartite states: validated density matrices and the named families
//! whose closed forms are evaluated downstream.
//!
//! Basis order is `|i⟩_A |j⟩_B` with `B` fastest, so index `= i·d_B + j`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::matcore::{
    cr, kron_regrouped, partial_trace_systems, permute_systems, standard_operators, BipartitePartition, Complex64,
    ComplexMatrix, HermitianOperator, MatError, Subsystem,
};

/// PSD and unit-trace tolerance for [`DensityMatrix`].
pub const STATE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("parameter {name} = {value} is out of range")]
    ParameterOutOfRange { name: &'static str, value: f64 },
    #[error("not a density matrix: {0}")]
    InvalidDensity(String),
    #[error(transparent)]
    Mat(#[from] MatError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateFamily {
    Isotropic { t: f64, d: usize },
    Werner { p: f64, d: usize },
    /// `ρ = Σ c_ij |ii⟩⟨jj|`.
    MaxCorrelated { c: ComplexMatrix },
    OmegaHat { alpha: f64 },
    AntisymRhoV,
    /// Weights on `Φ⁺, Φ⁻, Ψ⁺, Ψ⁻`.
    BellMix { weights: [f64; 4] },
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
    partition: BipartitePartition,
    family: StateFamily,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator, partition: BipartitePartition) -> Result<Self, StateError> {
        Self::with_family(op, partition, StateFamily::Explicit)
    }

    pub fn from_matrix(m: ComplexMatrix, d_a: usize, d_b: usize) -> Result<Self, StateError> {
        let p = BipartitePartition::new(d_a, d_b)?;
        if m.nrows() != p.total() {
            return Err(MatError::DimensionMismatch {
                expected: p.total(),
                found: m.nrows(),
            }
            .into());
        }
        Self::new(HermitianOperator::new(m)?, p)
    }

    fn with_family(
        op: HermitianOperator,
        partition: BipartitePartition,
        family: StateFamily,
    ) -> Result<Self, StateError> {
        if op.dim() != partition.total() {
            return Err(MatError::DimensionMismatch {
                expected: partition.total(),
                found: op.dim(),
            }
            .into());
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(StateError::InvalidDensity(format!("trace {tr}")));
        }
        let lam = op.lambda_min();
        if lam < -STATE_TOL {
            return Err(StateError::InvalidDensity(format!("minimum eigenvalue {lam}")));
        }
        Ok(Self {
            op,
            partition,
            family,
        })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn partition(&self) -> BipartitePartition {
        self.partition
    }

    pub fn family(&self) -> &StateFamily {
        &self.family
    }

    pub fn d_a(&self) -> usize {
        self.partition.d_a
    }

    pub fn d_b(&self) -> usize {
        self.partition.d_b
    }

    pub fn dim(&self) -> usize {
        self.partition.total()
    }

    /// `ρ^{T_B}`.
    pub fn partial_transpose(&self) -> HermitianOperator {
        self.op
            .partial_transpose(self.partition, Subsystem::B)
            .expect("dimensions validated at construction")
    }

    pub fn is_ppt(&self, tol: f64) -> bool {
        self.partial_transpose().is_psd(tol)
    }

    /// `ρ ⊗ ω` regrouped as `(A A') | (B B')`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let m = kron_regrouped(
            self.op.matrix(),
            self.partition.dims(),
            other.op.matrix(),
            other.partition.dims(),
        )
        .expect("dimensions validated at construction");
        let p = BipartitePartition {
            d_a: self.d_a() * other.d_a(),
            d_b: self.d_b() * other.d_b(),
        };
        DensityMatrix {
            op: HermitianOperator::symmetrized(m),
            partition: p,
            family: StateFamily::Explicit,
        }
    }

    /// Reduced state on `A` or `B`.
    pub fn reduced(&self, keep: Subsystem) -> HermitianOperator {
        let traced = match keep {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        };
        self.op
            .partial_trace(self.partition, traced)
            .expect("dimensions validated at construction")
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<(), StateError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(StateError::ParameterOutOfRange { name, value })
    }
}

fn check_dim(d: usize) -> Result<(), StateError> {
    if d >= 2 {
        Ok(())
    } else {
        Err(StateError::ParameterOutOfRange {
            name: "d",
            value: d as f64,
        })
    }
}

/// `Φ^d = |Φ⟩⟨Φ|` with `|Φ⟩ = Σ_i |ii⟩ / √d`.
pub fn max_entangled(d: usize) -> DensityMatrix {
    let p = BipartitePartition { d_a: d, d_b: d };
    DensityMatrix {
        op: standard_operators(d).phi,
        partition: p,
        family: StateFamily::Isotropic { t: 1.0, d },
    }
}

/// `t Φ^d + (1 − t)(I − Φ^d)/(d² − 1)`.
pub fn make_isotropic(t: f64, d: usize) -> Result<DensityMatrix, StateError> {
    check_unit("t", t)?;
    check_dim(d)?;
    let phi = standard_operators(d).phi;
    let n = d * d;
    let rest = HermitianOperator::identity(n).sub(&phi);
    let op = phi.scale(t).add(&rest.scale((1.0 - t) / (n as f64 - 1.0)));
    DensityMatrix::with_family(
        op,
        BipartitePartition { d_a: d, d_b: d },
        StateFamily::Isotropic { t, d },
    )
}

/// `(1 − p)·2/(d(d+1))·Π^S + p·2/(d(d−1))·Π^A`.
pub fn make_werner(p: f64, d: usize) -> Result<DensityMatrix, StateError> {
    check_unit("p", p)?;
    check_dim(d)?;
    let ops = standard_operators(d);
    let df = d as f64;
    let op = ops
        .proj_sym
        .scale((1.0 - p) * 2.0 / (df * (df + 1.0)))
        .add(&ops.proj_antisym.scale(p * 2.0 / (df * (df - 1.0))));
    DensityMatrix::with_family(
        op,
        BipartitePartition { d_a: d, d_b: d },
        StateFamily::Werner { p, d },
    )
}

/// `Σ_ij c_ij |ii⟩⟨jj|` for a `d×d` density matrix `c`.
pub fn make_max_correlated(c: &ComplexMatrix) -> Result<DensityMatrix, StateError> {
    let d = c.nrows();
    check_dim(d)?;
    let ch = HermitianOperator::new(c.clone())?;
    if (ch.trace() - 1.0).abs() > STATE_TOL || ch.lambda_min() < -STATE_TOL {
        return Err(StateError::InvalidDensity("coefficient matrix is not a state".into()));
    }
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = ch.matrix()[(i, j)];
        }
    }
    DensityMatrix::with_family(
        HermitianOperator::symmetrized(m),
        BipartitePartition { d_a: d, d_b: d },
        StateFamily::MaxCorrelated {
            c: ch.into_matrix(),
        },
    )
}

/// `α Φ² + (1 − α)/2 (|00⟩⟨00| + |11⟩⟨11|)`.
pub fn make_omega_hat(alpha: f64) -> Result<DensityMatrix, StateError> {
    check_unit("alpha", alpha)?;
    let phi = standard_operators(2).phi;
    let diag = HermitianOperator::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]);
    let op = phi.scale(alpha).add(&diag.scale(1.0 - alpha));
    DensityMatrix::with_family(
        op,
        BipartitePartition { d_a: 2, d_b: 2 },
        StateFamily::OmegaHat { alpha },
    )
}

fn ket(dim: usize, amps: &[(usize, f64)]) -> Vec<Complex64> {
    let mut v = vec![cr(0.0); dim];
    for &(i, a) in amps {
        v[i] += cr(a);
    }
    v
}

/// Rank-two state on the 3×3 antisymmetric subspace.
pub fn make_rho_v() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // |01⟩ = 1, |10⟩ = 3, |02⟩ = 2, |20⟩ = 6
    let v1 = ket(9, &[(1, s), (3, -s)]);
    let v2 = ket(9, &[(2, s), (6, -s)]);
    let op = HermitianOperator::outer(&v1)
        .add(&HermitianOperator::outer(&v2))
        .scale(0.5);
    DensityMatrix::with_family(op, BipartitePartition { d_a: 3, d_b: 3 }, StateFamily::AntisymRhoV)
        .expect("valid by construction")
}

/// Bell-diagonal two-qubit state with weights on `Φ⁺, Φ⁻, Ψ⁺, Ψ⁻`.
pub fn make_bell_mix(weights: [f64; 4]) -> Result<DensityMatrix, StateError> {
    for &w in &weights {
        check_unit("weight", w)?;
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > STATE_TOL {
        return Err(StateError::ParameterOutOfRange {
            name: "sum of weights",
            value: total,
        });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bells = [
        ket(4, &[(0, s), (3, s)]),
        ket(4, &[(0, s), (3, -s)]),
        ket(4, &[(1, s), (2, s)]),
        ket(4, &[(1, s), (2, -s)]),
    ];
    let mut op = HermitianOperator::zeros(4);
    for (w, b) in weights.iter().zip(&bells) {
        op = op.add(&HermitianOperator::outer(b).scale(*w));
    }
    DensityMatrix::with_family(
        op,
        BipartitePartition { d_a: 2, d_b: 2 },
        StateFamily::BellMix { weights },
    )
}

/// Components of the mixture used to show that `E_κ` is not convex.
#[derive(Debug, Clone)]
pub struct NonConvexTriple {
    /// `Φ²`.
    pub rho1: DensityMatrix,
    /// `(|00⟩⟨00| + |11⟩⟨11|)/2`.
    pub rho2: DensityMatrix,
    /// `(ρ₁ + ρ₂)/2`.
    pub mixture: DensityMatrix,
}

pub fn non_convex_triple() -> NonConvexTriple {
    let rho1 = max_entangled(2);
    let rho2 = make_omega_hat(0.0).expect("valid");
    let mixture = make_omega_hat(0.5).expect("valid");
    NonConvexTriple {
        rho1,
        rho2,
        mixture,
    }
}

/// Pure three-party state with its bipartite regroupings.
#[derive(Debug, Clone)]
pub struct TripartiteState {
    pub psi: Vec<Complex64>,
    pub dims: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cut {
    /// `A | BC`.
    ABc,
    /// `AB | C`.
    AbC,
    /// `AC | B`.
    AcB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pair {
    AB,
    AC,
    BC,
}

impl TripartiteState {
    pub fn operator(&self) -> HermitianOperator {
        HermitianOperator::outer(&self.psi)
    }

    /// The full pure state viewed across a bipartite cut.
    pub fn cut(&self, cut: Cut) -> DensityMatrix {
        let [a, b, c] = self.dims;
        let m = self.operator().into_matrix();
        let (m, d_a, d_b) = match cut {
            Cut::ABc => (m, a, b * c),
            Cut::AbC => (m, a * b, c),
            Cut::AcB => (
                permute_systems(&m, &self.dims, &[0, 2, 1]).expect("valid permutation"),
                a * c,
                b,
            ),
        };
        DensityMatrix::new(HermitianOperator::symmetrized(m), BipartitePartition { d_a, d_b })
            .expect("pure state is a density matrix")
    }

    /// Two-party marginal, the first named party on the `A` side.
    pub fn marginal(&self, pair: Pair) -> DensityMatrix {
        let keep = match pair {
            Pair::AB => [true, true, false],
            Pair::AC => [true, false, true],
            Pair::BC => [false, true, true],
        };
        let m = partial_trace_systems(self.operator().matrix(), &self.dims, &keep)
            .expect("valid dims");
        let kept: Vec<usize> = (0..3).filter(|&k| keep[k]).map(|k| self.dims[k]).collect();
        DensityMatrix::new(
            HermitianOperator::symmetrized(m),
            BipartitePartition {
                d_a: kept[0],
                d_b: kept[1],
            },
        )
        .expect("marginal of a state is a state")
    }
}

/// `(|000⟩ + |011⟩ + √2 |110⟩)/2`.
pub fn monogamy_triple() -> TripartiteState {
    TripartiteState {
        psi: ket(8, &[(0, 0.5), (3, 0.5), (6, std::f64::consts::FRAC_1_SQRT_2)]),
        dims: [2, 2, 2],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialKind {
    OmegaHat(f64),
    AntisymRhoV,
    NonConvexMixture,
    MonogamyTriple,
}

#[derive(Debug, Clone)]
pub enum SpecialState {
    Bipartite(DensityMatrix),
    Tripartite(TripartiteState),
}

impl SpecialState {
    pub fn bipartite(self) -> Option<DensityMatrix> {
        match self {
            SpecialState::Bipartite(d) => Some(d),
            SpecialState::Tripartite(_) => None,
        }
    }
}

pub fn make_special(kind: SpecialKind) -> Result<SpecialState, StateError> {
    Ok(match kind {
        SpecialKind::OmegaHat(alpha) => SpecialState::Bipartite(make_omega_hat(alpha)?),
        SpecialKind::AntisymRhoV => SpecialState::Bipartite(make_rho_v()),
        SpecialKind::NonConvexMixture => SpecialState::Bipartite(non_convex_triple().mixture),
        SpecialKind::MonogamyTriple => SpecialState::Tripartite(monogamy_triple()),
    })
}

/// Random state `G G† / Tr(G G†)` with `G` a matrix of standard complex
/// Gaussians drawn from ChaCha8 seeded with `seed`.
pub fn random_density(p: BipartitePartition, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.total();
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    let op = HermitianOperator::symmetrized(gg * cr(1.0 / tr));
    DensityMatrix::new(op, p).expect("G G† / Tr is a state")
}

/// Random pure state with the same seeding scheme.
pub fn random_pure(p: BipartitePartition, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> = (0..p.total())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v: Vec<Complex64> = v.into_iter().map(|z| z / norm).collect();
    DensityMatrix::new(HermitianOperator::outer(&v), p).expect("pure state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;
    use approx::assert_abs_diff_eq;

    fn entry_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        crate::matcore::max_abs(&(a - b))
    }

    #[test]
    fn isotropic_cases() {
        let phi = make_isotropic(1.0, 3).unwrap();
        assert!(phi.op().max_abs_diff(max_entangled(3).op()) < 1e-15);
        let mixed = make_isotropic(0.25, 2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.25 } else { 0.0 };
                assert_abs_diff_eq!(mixed.op().matrix()[(i, j)].re, want, epsilon = 1e-15);
            }
        }
        for d in 2..=4 {
            let edge = make_isotropic(1.0 / d as f64, d).unwrap();
            assert_abs_diff_eq!(edge.partial_transpose().lambda_min(), 0.0, epsilon = 1e-9);
        }
        assert!(make_isotropic(1.1, 2).is_err());
        assert!(make_isotropic(0.5, 1).is_err());
    }

    #[test]
    fn ppt_boundaries_flip_sign() {
        for d in 2..=4 {
            let t0 = 1.0 / d as f64;
            assert!(make_isotropic(t0 - 1e-7, d).unwrap().partial_transpose().lambda_min() > 0.0);
            assert!(make_isotropic(t0 + 1e-7, d).unwrap().partial_transpose().lambda_min() < 0.0);
            assert!(make_werner(0.5 - 1e-7, d).unwrap().partial_transpose().lambda_min() > 0.0);
            assert!(make_werner(0.5 + 1e-7, d).unwrap().partial_transpose().lambda_min() < 0.0);
        }
    }

    #[test]
    fn werner_cases() {
        let w = make_werner(0.5, 2).unwrap();
        assert_abs_diff_eq!(w.partial_transpose().lambda_min(), 0.0, epsilon = 1e-9);
        let sym = make_werner(0.0, 3).unwrap();
        let pa = standard_operators(3).proj_antisym.into_matrix();
        let proj = &pa * sym.op().matrix() * &pa;
        assert!(crate::matcore::max_abs(&proj) < 1e-14);
        let singlet = make_werner(1.0, 2).unwrap();
        let tn = singlet.partial_transpose().norms().trace_norm;
        assert_abs_diff_eq!(tn.log2(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn max_correlated_cases() {
        let plus = ComplexMatrix::from_element(2, 2, cr(0.5));
        let rho = make_max_correlated(&plus).unwrap();
        assert!(rho.op().max_abs_diff(max_entangled(2).op()) < 1e-15);
        let half = ComplexMatrix::identity(2, 2) * cr(0.5);
        let rho = make_max_correlated(&half).unwrap();
        assert!(rho.is_ppt(1e-12));
        for alpha in [0.0, 0.3, 1.0] {
            let cm = ComplexMatrix::from_row_slice(2, 2, &[cr(0.5), cr(alpha / 2.0), cr(alpha / 2.0), cr(0.5)]);
            let a = make_max_correlated(&cm).unwrap();
            let b = make_omega_hat(alpha).unwrap();
            assert!(entry_diff(a.op().matrix(), b.op().matrix()) < 1e-15);
        }
        let bad = ComplexMatrix::identity(2, 2);
        assert!(make_max_correlated(&bad).is_err());
    }

    #[test]
    fn abs_partial_transpose_is_fixed_for_max_correlated() {
        let cm = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                cr(0.5), c(0.1, 0.2), cr(0.05),
                c(0.1, -0.2), cr(0.3), c(0.0, 0.1),
                cr(0.05), c(0.0, -0.1), cr(0.2),
            ],
        );
        let rho = make_max_correlated(&cm).unwrap();
        let abs = rho.partial_transpose().norms().abs_op;
        let p = rho.partition();
        let abs_pt = abs.partial_transpose(p, Subsystem::B).unwrap();
        assert!(abs_pt.max_abs_diff(&abs) < 1e-10);
    }

    #[test]
    fn rho_v_is_antisymmetric_rank_two() {
        let r = make_rho_v();
        assert_abs_diff_eq!(r.op().trace(), 1.0, epsilon = 1e-15);
        let ev = r.op().eigenvalues();
        assert_eq!(ev.iter().filter(|v| v.abs() > 1e-12).count(), 2);
        let ps = standard_operators(3).proj_sym.into_matrix();
        let proj = &ps * r.op().matrix() * &ps;
        assert!(crate::matcore::max_abs(&proj) < 1e-15);
    }

    #[test]
    fn non_convex_mixture_is_average() {
        let t = non_convex_triple();
        let avg = t.rho1.op().add(t.rho2.op()).scale(0.5);
        assert!(avg.max_abs_diff(t.mixture.op()) < 1e-15);
        let m = make_special(SpecialKind::NonConvexMixture).unwrap().bipartite().unwrap();
        assert!(m.op().max_abs_diff(&avg) < 1e-15);
    }

    #[test]
    fn monogamy_marginals() {
        let psi = monogamy_triple();
        let norm: f64 = psi.psi.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-15);
        for pair in [Pair::AB, Pair::AC] {
            let m = psi.marginal(pair);
            let en = m.partial_transpose().norms().trace_norm.log2();
            assert_abs_diff_eq!(en, (1.5f64).log2(), epsilon = 1e-12);
        }
        let abc = psi.cut(Cut::ABc);
        assert_eq!((abc.d_a(), abc.d_b()), (2, 4));
        assert_abs_diff_eq!(abc.partial_transpose().norms().trace_norm.log2(), 1.0, epsilon = 1e-12);
        let acb = psi.cut(Cut::AcB);
        // Reduced state on B agrees between the regrouped cut and the marginal.
        let rb = acb.reduced(Subsystem::B);
        let rb2 = psi.marginal(Pair::BC).reduced(Subsystem::A);
        assert!(rb.max_abs_diff(&rb2) < 1e-14);
    }

    #[test]
    fn random_density_is_state_and_deterministic() {
        let p = BipartitePartition::new(2, 3).unwrap();
        for seed in 0..10 {
            let r = random_density(p, seed);
            assert_abs_diff_eq!(r.op().trace(), 1.0, epsilon = 1e-12);
            assert!(r.op().lambda_min() > -1e-12);
            assert_eq!(r, random_density(p, seed));
        }
        assert_ne!(random_density(p, 1), random_density(p, 2));
    }

    #[test]
    fn tensor_groups_parties() {
        let a = max_entangled(2);
        let b = make_omega_hat(0.0).unwrap();
        let t = a.tensor(&b);
        assert_eq!((t.d_a(), t.d_b()), (4, 4));
        // Reduced state on AA' is the tensor of reductions.
        let ra = t.reduced(Subsystem::A);
        let want = a.reduced(Subsystem::A).kron(&b.reduced(Subsystem::A));
        assert!(ra.max_abs_diff(&want) < 1e-15);
        // Negativity is multiplicative across the regrouped cut.
        let n = t.partial_transpose().norms().trace_norm;
        assert_abs_diff_eq!(n, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_mix_is_bell_diagonal() {
        let r = make_bell_mix([0.7, 0.1, 0.1, 0.1]).unwrap();
        let ev = r.op().eigenvalues();
        assert_abs_diff_eq!(ev[3], 0.7, epsilon = 1e-12);
        assert!(make_bell_mix([0.5, 0.5, 0.5, 0.0]).is_err());
    }
}
