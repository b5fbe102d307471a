//! JSON encodings of states and channels. Complex entries are `[re, im]` pairs.
//!
//! States: `{"kind": "isotropic", "params": {"t": 0.9, "d": 3}}` or
//! `{"kind": "explicit", "dims": [dA, dB], "matrix": [[[re, im], ...], ...]}`.
//! Channels: `{"kind": "erasure", "params": {"p": 0.5, "d": 2}}` or
//! `{"kind": "explicit", "dims": [dIn, dOut], "choi": [[...]]}`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::channels::{
    completely_dephasing, make_channel, ChannelError, ChannelFamily, GaussianChannelParams, GaussianKind,
    QuantumChannel,
};
use crate::matcore::{c, ComplexMatrix, HermitianOperator};
use crate::states::{
    make_bell_mix, make_isotropic, make_max_correlated, make_omega_hat, make_rho_v, make_werner,
    max_entangled, random_density, random_pure, DensityMatrix, StateError,
};

pub type ComplexPairs = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown {what} kind '{kind}'")]
    UnknownKind { what: &'static str, kind: String },
    #[error("missing or invalid field '{0}'")]
    Field(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub fn matrix_to_pairs(m: &ComplexMatrix) -> ComplexPairs {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn pairs_to_matrix(rows: &ComplexPairs) -> Result<ComplexMatrix, IoError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(IoError::Dimension(format!("matrix must be square, found {n} rows of unequal length")));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn operator_to_pairs(h: &HermitianOperator) -> ComplexPairs {
    matrix_to_pairs(h.matrix())
}

/// Shared shape of the state and channel encodings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ComplexPairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<ComplexPairs>,
}

/// A channel input is either a finite-dimensional channel or a Gaussian parameter set.
#[derive(Debug, Clone)]
pub enum ChannelInput {
    Finite(QuantumChannel),
    Gaussian(GaussianChannelParams),
}

impl ObjectSpec {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    fn f(&self, name: &str) -> Result<f64, IoError> {
        self.params
            .get(name)
            .and_then(Value::as_f64)
            .ok_or_else(|| IoError::Field(format!("params.{name}")))
    }

    fn u(&self, name: &str) -> Result<usize, IoError> {
        self.params
            .get(name)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| IoError::Field(format!("params.{name}")))
    }

    fn u_or(&self, name: &str, default: usize) -> Result<usize, IoError> {
        if self.params.contains_key(name) {
            self.u(name)
        } else {
            Ok(default)
        }
    }

    /// Whether the object has a numeric parameter to sweep.
    pub fn has_param(&self, name: &str) -> bool {
        self.params.get(name).is_some_and(Value::is_number)
    }

    /// Copy with one numeric parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Self {
        let mut out = self.clone();
        out.params.insert(name.to_string(), Value::from(value));
        out
    }

    pub fn to_state(&self) -> Result<DensityMatrix, IoError> {
        let st = match self.kind.as_str() {
            "isotropic" => make_isotropic(self.f("t")?, self.u("d")?)?,
            "werner" => make_werner(self.f("p")?, self.u("d")?)?,
            "max_correlated" => {
                let raw = self.params.get("c").ok_or_else(|| IoError::Field("params.c".into()))?;
                let pairs: ComplexPairs = serde_json::from_value(raw.clone())?;
                make_max_correlated(&pairs_to_matrix(&pairs)?)?
            }
            "omega_hat" => make_omega_hat(self.f("alpha")?)?,
            "rho_v" => make_rho_v(),
            "bell_mix" => {
                let raw = self.params.get("weights").ok_or_else(|| IoError::Field("params.weights".into()))?;
                let w: [f64; 4] = serde_json::from_value(raw.clone())?;
                make_bell_mix(w)?
            }
            "max_entangled" => max_entangled(self.u("d")?),
            "random" | "random_pure" => {
                let p = crate::matcore::BipartitePartition::new(self.u("d_a")?, self.u("d_b")?)
                    .map_err(|e| IoError::Dimension(e.to_string()))?;
                let seed = self.u_or("seed", 0)? as u64;
                if self.kind == "random" {
                    random_density(p, seed)
                } else {
                    random_pure(p, seed)
                }
            }
            "explicit" => {
                let [da, db] = self.dims.ok_or_else(|| IoError::Field("dims".into()))?;
                let m = pairs_to_matrix(self.matrix.as_ref().ok_or_else(|| IoError::Field("matrix".into()))?)?;
                if m.nrows() != da * db {
                    return Err(IoError::Dimension(format!("matrix is {}x{}, dims give {}", m.nrows(), m.nrows(), da * db)));
                }
                DensityMatrix::from_matrix(m, da, db)?
            }
            other => {
                return Err(IoError::UnknownKind {
                    what: "state",
                    kind: other.to_string(),
                })
            }
        };
        Ok(st)
    }

    pub fn to_channel(&self) -> Result<ChannelInput, IoError> {
        let gauss = |k| Ok(ChannelInput::Gaussian(GaussianChannelParams::new(k)?));
        let fam = match self.kind.as_str() {
            "identity" => ChannelFamily::Identity { d: self.u("d")? },
            "erasure" => ChannelFamily::Erasure { p: self.f("p")?, d: self.u_or("d", 2)? },
            "depolarizing" => ChannelFamily::Depolarizing { p: self.f("p")?, d: self.u_or("d", 2)? },
            "dephasing" => ChannelFamily::Dephasing { q: self.f("q")?, d: self.u_or("d", 2)? },
            "amplitude_damping" => ChannelFamily::AmplitudeDamping { r: self.f("r")? },
            "isotropic_twirl" => ChannelFamily::IsotropicTwirl { m: self.u("m")? },
            "completely_dephasing" => return Ok(ChannelInput::Finite(completely_dephasing(self.u("d")?))),
            "thermal" => return gauss(GaussianKind::Thermal { eta: self.f("eta")?, n_b: self.f("n_b")? }),
            "amplifier" => return gauss(GaussianKind::Amplifier { g: self.f("g")?, n_b: self.f("n_b")? }),
            "additive_noise" => return gauss(GaussianKind::AdditiveNoise { xi: self.f("xi")? }),
            "pure_loss" => return gauss(GaussianKind::PureLoss { eta: self.f("eta")? }),
            "pure_amplifier" => return gauss(GaussianKind::PureAmplifier { g: self.f("g")? }),
            "explicit" => {
                let [d_in, d_out] = self.dims.ok_or_else(|| IoError::Field("dims".into()))?;
                let m = pairs_to_matrix(self.choi.as_ref().ok_or_else(|| IoError::Field("choi".into()))?)?;
                if m.nrows() != d_in * d_out {
                    return Err(IoError::Dimension(format!("Choi is {}x{}, dims give {}", m.nrows(), m.nrows(), d_in * d_out)));
                }
                let h = HermitianOperator::new(m).map_err(ChannelError::from)?;
                return Ok(ChannelInput::Finite(QuantumChannel::from_choi(h, d_in, d_out)?));
            }
            other => {
                return Err(IoError::UnknownKind {
                    what: "channel",
                    kind: other.to_string(),
                })
            }
        };
        Ok(ChannelInput::Finite(make_channel(fam)?))
    }
}

impl IoError {
    /// Dimension problems, as opposed to malformed input.
    pub fn is_dimension(&self) -> bool {
        matches!(
            self,
            IoError::Dimension(_)
                | IoError::State(StateError::Mat(_))
                | IoError::Channel(ChannelError::DimensionMismatch { .. })
                | IoError::Channel(ChannelError::Mat(_))
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_family_state() {
        let s = ObjectSpec::parse(r#"{"kind":"isotropic","params":{"t":0.9,"d":3}}"#).unwrap();
        let rho = s.to_state().unwrap();
        assert_eq!(rho.dim(), 9);
        assert_eq!(s.with_param("t", 0.5).f("t").unwrap(), 0.5);
    }

    #[test]
    fn explicit_round_trip() {
        let rho = make_rho_v();
        let spec = ObjectSpec {
            kind: "explicit".into(),
            params: Map::new(),
            dims: Some([rho.d_a(), rho.d_b()]),
            matrix: Some(operator_to_pairs(rho.op())),
            choi: None,
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back = ObjectSpec::parse(&text).unwrap();
        assert_eq!(back, spec);
        assert_abs_diff_eq!(back.to_state().unwrap().op().max_abs_diff(rho.op()), 0.0);
    }

    #[test]
    fn explicit_channel_and_errors() {
        let ad = make_channel(ChannelFamily::AmplitudeDamping { r: 0.3 }).unwrap();
        let spec = ObjectSpec {
            kind: "explicit".into(),
            params: Map::new(),
            dims: Some([2, 2]),
            matrix: None,
            choi: Some(operator_to_pairs(ad.choi())),
        };
        match spec.to_channel().unwrap() {
            ChannelInput::Finite(n) => assert!(n.approx_eq(&ad)),
            ChannelInput::Gaussian(_) => panic!("expected finite channel"),
        }
        let err = ObjectSpec::parse("{\n  \"kind\": 3\n}").unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 2, .. }), "{err}");
        let bad_dims = ObjectSpec { dims: Some([2, 3]), ..spec };
        assert!(bad_dims.to_channel().unwrap_err().is_dimension());
        let unknown = ObjectSpec::parse(r#"{"kind":"nope"}"#).unwrap();
        assert!(matches!(unknown.to_state(), Err(IoError::UnknownKind { .. })));
    }

    #[test]
    fn gaussian_input() {
        let s = ObjectSpec::parse(r#"{"kind":"thermal","params":{"eta":0.5,"n_b":0.25}}"#).unwrap();
        assert!(matches!(s.to_channel().unwrap(), ChannelInput::Gaussian(_)));
    }
}
