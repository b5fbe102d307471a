//! Channels as Choi operators, the example channel families, and channel
//! algebra.
//!
//! The Choi operator of `N: A → B` lives on `R ⊗ B` with `R ≅ A`:
//! `J = Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)`, so `J[(i,k),(j,l)] = N(|i⟩⟨j|)[k][l]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::matcore::{
    c, cr, kron_regrouped, partial_transpose_systems, standard_operators, BipartitePartition,
    Complex64, ComplexMatrix, HermitianOperator, MatError, Subsystem,
};
use crate::states::{DensityMatrix, StateError};

/// Tolerance for the CP, TP and PPT checks.
pub const CHANNEL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("parameter {name} = {value} is out of range")]
    ParameterOutOfRange { name: &'static str, value: f64 },
    #[error("map is not trace preserving (deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },
    #[error("map is not completely positive (minimum Choi eigenvalue {lambda_min:e})")]
    NotCompletelyPositive { lambda_min: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelFamily {
    Identity { d: usize },
    /// Output dimension `d + 1`, erasure flag last.
    Erasure { p: f64, d: usize },
    Depolarizing { p: f64, d: usize },
    /// `(1 − q) ρ + q Z ρ Z†` with `Z = diag(ω^k)`; the usual qubit channel at `d = 2`.
    Dephasing { q: f64, d: usize },
    AmplitudeDamping { r: f64 },
    /// Isotropic twirl on an `m × m` bipartite system.
    IsotropicTwirl { m: usize },
    /// `X ↦ Σ_k Tr[M_k X] σ_k`.
    MeasurePrepare {
        povm: Vec<HermitianOperator>,
        states: Vec<HermitianOperator>,
    },
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianKind {
    Thermal { eta: f64, n_b: f64 },
    Amplifier { g: f64, n_b: f64 },
    AdditiveNoise { xi: f64 },
    PureLoss { eta: f64 },
    PureAmplifier { g: f64 },
}

/// Single-mode bosonic Gaussian channel parameters. These have no finite
/// Choi operator; their costs come from closed forms only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannelParams {
    pub kind: GaussianKind,
}

impl GaussianChannelParams {
    pub fn new(kind: GaussianKind) -> Result<Self, ChannelError> {
        let bad = |name, value| Err(ChannelError::ParameterOutOfRange { name, value });
        let eta_ok = |eta: f64| eta > 0.0 && eta < 1.0;
        let g_ok = |g: f64| g > 1.0 && g.is_finite();
        let n_ok = |n: f64| n >= 0.0 && n.is_finite();
        match kind {
            GaussianKind::Thermal { eta, .. } | GaussianKind::PureLoss { eta } if !eta_ok(eta) => bad("eta", eta),
            GaussianKind::Amplifier { g, .. } | GaussianKind::PureAmplifier { g } if !g_ok(g) => bad("g", g),
            GaussianKind::Thermal { n_b, .. } | GaussianKind::Amplifier { n_b, .. } if !n_ok(n_b) => bad("n_b", n_b),
            GaussianKind::AdditiveNoise { xi } if !n_ok(xi) => bad("xi", xi),
            _ => Ok(Self { kind }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    choi: HermitianOperator,
    d_in: usize,
    d_out: usize,
    family: ChannelFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelChecks {
    pub cp: bool,
    pub tp: bool,
    pub ppt_binding: bool,
}

impl QuantumChannel {
    /// Validates CP and TP of a Choi operator on `R ⊗ B`.
    pub fn from_choi(choi: HermitianOperator, d_in: usize, d_out: usize) -> Result<Self, ChannelError> {
        Self::with_family(choi, d_in, d_out, ChannelFamily::Explicit)
    }

    fn with_family(
        choi: HermitianOperator,
        d_in: usize,
        d_out: usize,
        family: ChannelFamily,
    ) -> Result<Self, ChannelError> {
        if d_in == 0 || d_out == 0 || choi.dim() != d_in * d_out {
            return Err(ChannelError::DimensionMismatch {
                expected: d_in * d_out,
                found: choi.dim(),
            });
        }
        let lambda_min = choi.lambda_min();
        if lambda_min < -CHANNEL_TOL * choi.dim().max(1) as f64 {
            return Err(ChannelError::NotCompletelyPositive { lambda_min });
        }
        let deviation = tp_deviation(&choi, d_in, d_out);
        if deviation > CHANNEL_TOL {
            return Err(ChannelError::NotTracePreserving { deviation });
        }
        Ok(Self {
            choi,
            d_in,
            d_out,
            family,
        })
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn family(&self) -> &ChannelFamily {
        &self.family
    }

    pub fn partition(&self) -> BipartitePartition {
        BipartitePartition {
            d_a: self.d_in,
            d_b: self.d_out,
        }
    }

    /// Normalized Choi state `J / d_in`.
    pub fn choi_state(&self) -> DensityMatrix {
        DensityMatrix::new(self.choi.scale(1.0 / self.d_in as f64), self.partition())
            .expect("Choi of a channel normalizes to a state")
    }

    /// `J^{T_B}`.
    pub fn choi_partial_transpose(&self) -> HermitianOperator {
        self.choi
            .partial_transpose(self.partition(), Subsystem::B)
            .expect("dimensions validated at construction")
    }

    /// Channel equality as Choi equality within [`CHANNEL_TOL`].
    pub fn approx_eq(&self, other: &QuantumChannel) -> bool {
        self.d_in == other.d_in
            && self.d_out == other.d_out
            && self.choi.max_abs_diff(&other.choi) <= CHANNEL_TOL
    }
}

fn tp_deviation(choi: &HermitianOperator, d_in: usize, d_out: usize) -> f64 {
    let p = BipartitePartition { d_a: d_in, d_b: d_out };
    let tr_b = choi.partial_trace(p, Subsystem::B).expect("dimensions checked");
    tr_b.max_abs_diff(&HermitianOperator::identity(d_in))
}

fn check_unit(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ChannelError::ParameterOutOfRange { name, value })
    }
}

fn check_dim(d: usize) -> Result<(), ChannelError> {
    if d >= 2 {
        Ok(())
    } else {
        Err(ChannelError::ParameterOutOfRange {
            name: "d",
            value: d as f64,
        })
    }
}

/// `J = Σ_ij |i⟩⟨j| ⊗ Σ_k E_k |i⟩⟨j| E_k†`.
pub fn choi_from_kraus(kraus: &[ComplexMatrix], d_in: usize, d_out: usize) -> Result<QuantumChannel, ChannelError> {
    choi_from_kraus_tagged(kraus, d_in, d_out, ChannelFamily::Explicit)
}

fn choi_from_kraus_tagged(
    kraus: &[ComplexMatrix],
    d_in: usize,
    d_out: usize,
    family: ChannelFamily,
) -> Result<QuantumChannel, ChannelError> {
    let mut sum = ComplexMatrix::zeros(d_in, d_in);
    for k in kraus {
        if k.nrows() != d_out || k.ncols() != d_in {
            return Err(ChannelError::DimensionMismatch {
                expected: d_out * d_in,
                found: k.nrows() * k.ncols(),
            });
        }
        sum += k.adjoint() * k;
    }
    let deviation = crate::matcore::max_abs(&(sum - ComplexMatrix::identity(d_in, d_in)));
    if deviation > CHANNEL_TOL {
        return Err(ChannelError::NotTracePreserving { deviation });
    }
    // |Γ⟩-vectorization: J = Σ_k vec(E_k) vec(E_k)† with vec(E)[(i,b)] = E[b][i].
    let n = d_in * d_out;
    let mut j = ComplexMatrix::zeros(n, n);
    for k in kraus {
        let v = ComplexMatrix::from_fn(n, 1, |row, _| k[(row % d_out, row / d_out)]);
        j += &v * v.adjoint();
    }
    QuantumChannel::with_family(HermitianOperator::symmetrized(j), d_in, d_out, family)
}

/// Generalized Pauli `X^a Z^b` on `C^d`.
pub fn weyl(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    ComplexMatrix::from_fn(d, d, |row, col| {
        if row == (col + a) % d {
            Complex64::from_polar(1.0, omega * (b * col) as f64)
        } else {
            cr(0.0)
        }
    })
}

fn amplitude_damping_kraus(r: f64) -> [ComplexMatrix; 2] {
    let e0 = ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - r).sqrt())]);
    let e1 = ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), cr(r.sqrt()), cr(0.0), cr(0.0)]);
    [e0, e1]
}

pub fn make_channel(family: ChannelFamily) -> Result<QuantumChannel, ChannelError> {
    match &family {
        ChannelFamily::Identity { d } => {
            let d = *d;
            if d == 0 {
                return Err(ChannelError::ParameterOutOfRange { name: "d", value: 0.0 });
            }
            QuantumChannel::with_family(crate::matcore::gamma_operator(d), d, d, family)
        }
        ChannelFamily::Erasure { p, d } => {
            let (p, d) = (*p, *d);
            check_unit("p", p)?;
            check_dim(d)?;
            let e = d + 1;
            let mut j = ComplexMatrix::zeros(d * e, d * e);
            for i in 0..d {
                for k in 0..d {
                    j[(i * e + i, k * e + k)] += cr(1.0 - p);
                }
                j[(i * e + d, i * e + d)] += cr(p);
            }
            QuantumChannel::with_family(HermitianOperator::symmetrized(j), d, e, family)
        }
        ChannelFamily::Depolarizing { p, d } => {
            let (p, d) = (*p, *d);
            check_unit("p", p)?;
            check_dim(d)?;
            let phi = standard_operators(d).phi;
            let n = (d * d) as f64;
            let rest = HermitianOperator::identity(d * d).sub(&phi);
            let j = phi.scale(1.0 - p).add(&rest.scale(p / (n - 1.0))).scale(d as f64);
            QuantumChannel::with_family(j, d, d, family)
        }
        ChannelFamily::Dephasing { q, d } => {
            let (q, d) = (*q, *d);
            check_unit("q", q)?;
            check_dim(d)?;
            let id = ComplexMatrix::identity(d, d) * cr((1.0 - q).sqrt());
            let z = weyl(d, 0, 1) * cr(q.sqrt());
            choi_from_kraus_tagged(&[id, z], d, d, family)
        }
        ChannelFamily::AmplitudeDamping { r } => {
            check_unit("r", *r)?;
            let kraus = amplitude_damping_kraus(*r);
            choi_from_kraus_tagged(&kraus, 2, 2, family)
        }
        ChannelFamily::IsotropicTwirl { m } => {
            let m = *m;
            if m == 0 {
                return Err(ChannelError::ParameterOutOfRange { name: "m", value: 0.0 });
            }
            let phi = standard_operators(m).phi;
            let n = m * m;
            let mut j = phi.kron(&phi);
            if n > 1 {
                let rest = HermitianOperator::identity(n).sub(&phi);
                j = j.add(&rest.kron(&rest).scale(1.0 / (n as f64 - 1.0)));
            }
            QuantumChannel::with_family(j, n, n, family)
        }
        ChannelFamily::MeasurePrepare { povm, states } => {
            if povm.is_empty() || povm.len() != states.len() {
                return Err(ChannelError::DimensionMismatch {
                    expected: povm.len(),
                    found: states.len(),
                });
            }
            let d_in = povm[0].dim();
            let d_out = states[0].dim();
            let mut j = HermitianOperator::zeros(d_in * d_out);
            for (mk, sk) in povm.iter().zip(states) {
                if mk.dim() != d_in || sk.dim() != d_out {
                    return Err(ChannelError::DimensionMismatch {
                        expected: d_in,
                        found: mk.dim(),
                    });
                }
                let mt = HermitianOperator::symmetrized(mk.matrix().transpose());
                j = j.add(&mt.kron(sk));
            }
            QuantumChannel::with_family(j, d_in, d_out, family)
        }
        ChannelFamily::Explicit => Err(ChannelError::ParameterOutOfRange {
            name: "explicit family has no parameters",
            value: f64::NAN,
        }),
    }
}

/// Completely dephasing map `ρ ↦ Σ_i ⟨i|ρ|i⟩ |i⟩⟨i|`.
pub fn completely_dephasing(d: usize) -> QuantumChannel {
    let proj: Vec<HermitianOperator> = (0..d)
        .map(|i| {
            let mut diag = vec![0.0; d];
            diag[i] = 1.0;
            HermitianOperator::from_real_diagonal(&diag)
        })
        .collect();
    make_channel(ChannelFamily::MeasurePrepare {
        povm: proj.clone(),
        states: proj,
    })
    .expect("valid measure-prepare channel")
}

/// `N(ρ)_{(c,b),(c',b')} = Σ_{a,a'} ρ_{(c,a),(c',a')} J_{(a,b),(a',b')}`.
fn contract(j: &ComplexMatrix, d_in: usize, d_out: usize, rho: &ComplexMatrix, d_c: usize) -> ComplexMatrix {
    let n = d_c * d_out;
    let mut out = ComplexMatrix::zeros(n, n);
    for cc in 0..d_c {
        for cp in 0..d_c {
            for a in 0..d_in {
                for ap in 0..d_in {
                    let r = rho[(cc * d_in + a, cp * d_in + ap)];
                    if r == cr(0.0) {
                        continue;
                    }
                    for b in 0..d_out {
                        for bp in 0..d_out {
                            out[(cc * d_out + b, cp * d_out + bp)] += r * j[(a * d_out + b, ap * d_out + bp)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Applies `id_C ⊗ N` to `ρ` on `C ⊗ A`.
pub fn apply(n: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
    if rho.d_b() != n.d_in {
        return Err(ChannelError::DimensionMismatch {
            expected: n.d_in,
            found: rho.d_b(),
        });
    }
    let out = contract(n.choi.matrix(), n.d_in, n.d_out, rho.op().matrix(), rho.d_a());
    Ok(DensityMatrix::new(
        HermitianOperator::symmetrized(out),
        BipartitePartition {
            d_a: rho.d_a(),
            d_b: n.d_out,
        },
    )?)
}

/// Applies a channel on the whole of `A ⊗ B` and re-splits the output as `out`.
pub fn apply_bipartite(
    n: &QuantumChannel,
    rho: &DensityMatrix,
    out: BipartitePartition,
) -> Result<DensityMatrix, ChannelError> {
    if rho.dim() != n.d_in || out.total() != n.d_out {
        return Err(ChannelError::DimensionMismatch {
            expected: n.d_in,
            found: rho.dim(),
        });
    }
    let m = contract(n.choi.matrix(), n.d_in, n.d_out, rho.op().matrix(), 1);
    Ok(DensityMatrix::new(HermitianOperator::symmetrized(m), out)?)
}

/// Applies a channel to an operator on `C ⊗ A` without state validation.
pub fn apply_operator(n: &QuantumChannel, x: &HermitianOperator, d_c: usize) -> Result<HermitianOperator, ChannelError> {
    if x.dim() != d_c * n.d_in {
        return Err(ChannelError::DimensionMismatch {
            expected: d_c * n.d_in,
            found: x.dim(),
        });
    }
    Ok(HermitianOperator::symmetrized(contract(
        n.choi.matrix(),
        n.d_in,
        n.d_out,
        x.matrix(),
        d_c,
    )))
}

/// `second ∘ first`.
pub fn compose(second: &QuantumChannel, first: &QuantumChannel) -> Result<QuantumChannel, ChannelError> {
    if first.d_out != second.d_in {
        return Err(ChannelError::DimensionMismatch {
            expected: first.d_out,
            found: second.d_in,
        });
    }
    // J^{M∘N} = (id_R ⊗ M)(J^N).
    let j = contract(second.choi.matrix(), second.d_in, second.d_out, first.choi.matrix(), first.d_in);
    QuantumChannel::from_choi(HermitianOperator::symmetrized(j), first.d_in, second.d_out)
}

/// `N ⊗ M` with Choi on `(R₁R₂)(B₁B₂)`.
pub fn tensor(n: &QuantumChannel, m: &QuantumChannel) -> Result<QuantumChannel, ChannelError> {
    let j = kron_regrouped(
        n.choi.matrix(),
        [n.d_in, n.d_out],
        m.choi.matrix(),
        [m.d_in, m.d_out],
    )?;
    QuantumChannel::from_choi(HermitianOperator::symmetrized(j), n.d_in * m.d_in, n.d_out * m.d_out)
}

pub fn channel_checks(n: &QuantumChannel) -> ChannelChecks {
    ChannelChecks {
        cp: n.choi.is_psd(CHANNEL_TOL),
        tp: tp_deviation(&n.choi, n.d_in, n.d_out) <= CHANNEL_TOL,
        ppt_binding: n.choi_partial_transpose().is_psd(CHANNEL_TOL),
    }
}

/// Partial transpose of a Choi operator over all factors flagged in
/// `bob_mask` (inputs and outputs alike) is PSD within [`CHANNEL_TOL`].
pub fn is_cppt_bipartite(choi: &HermitianOperator, dims: &[usize], bob_mask: &[bool]) -> Result<bool, ChannelError> {
    if dims.len() != bob_mask.len() {
        return Err(ChannelError::DimensionMismatch {
            expected: dims.len(),
            found: bob_mask.len(),
        });
    }
    let pt = partial_transpose_systems(choi.matrix(), dims, bob_mask)?;
    Ok(HermitianOperator::symmetrized(pt).is_psd(CHANNEL_TOL))
}

/// [`is_cppt_bipartite`] for a channel `A_in B_in → A_out B_out`.
pub fn is_cppt_channel(
    n: &QuantumChannel,
    input: BipartitePartition,
    output: BipartitePartition,
) -> Result<bool, ChannelError> {
    if input.total() != n.d_in || output.total() != n.d_out {
        return Err(ChannelError::DimensionMismatch {
            expected: n.d_in,
            found: input.total(),
        });
    }
    is_cppt_bipartite(
        &n.choi,
        &[input.d_a, input.d_b, output.d_a, output.d_b],
        &[false, true, false, true],
    )
}

/// Random channel from a Haar-like isometry with `kraus_rank` Kraus operators.
/// The rank is raised to `⌈d_in / d_out⌉` when smaller, the least that admits
/// an isometry.
pub fn random_kraus(d_in: usize, d_out: usize, kraus_rank: usize, seed: u64) -> Vec<ComplexMatrix> {
    let kraus_rank = kraus_rank.max(d_in.div_ceil(d_out.max(1)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = d_out * kraus_rank;
    let g = ComplexMatrix::from_fn(rows, d_in, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        c(re, im)
    });
    let gram = HermitianOperator::symmetrized(g.adjoint() * &g);
    let inv_sqrt = gram.map_spectrum(|v| 1.0 / v.sqrt());
    let v = g * inv_sqrt.matrix();
    (0..kraus_rank)
        .map(|k| v.rows(k * d_out, d_out).into_owned())
        .collect()
}

pub fn random_channel(d_in: usize, d_out: usize, kraus_rank: usize, seed: u64) -> QuantumChannel {
    let kraus = random_kraus(d_in, d_out, kraus_rank.max(1), seed);
    choi_from_kraus(&kraus, d_in, d_out).expect("isometry yields a channel")
}
