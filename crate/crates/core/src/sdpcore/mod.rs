//! Dense primal-dual interior-point solver for block semidefinite programs.
//!
//! Problems are posed in standard primal form
//!
//! ```text
//!   minimize (or maximize)  <c, x>
//!   subject to              <a_i, x> = b_i,   X_k ⪰ 0 for every block k
//! ```
//!
//! where `x` collects the upper-triangle entries of every real symmetric
//! block followed by free scalar variables. A coefficient `a` at coordinate
//! `(k, i, j)` contributes `a * X_k[i][j]` to the row, so off-diagonal
//! coordinates are not rescaled. Complex Hermitian problems are posed
//! through [`HermitianSdpBuilder`], which embeds every Hermitian block as a
//! real symmetric block of twice the size.

mod bisect;
mod embed;
mod solver;

pub use bisect::{bisect_threshold, try_bisect_threshold, BisectError};
pub use embed::{deembed_hermitian, embed_hermitian, HermitianSdpBuilder, HermitianSolution, Part, Term, VarId};
pub use solver::solve;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// One equality row `<coeffs, x> = rhs` in coordinate form.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub num_free: usize,
    /// Sparse objective vector over the same coordinates as the constraints.
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// `|primal_obj - dual_obj| / (1 + |primal_obj|)`.
    pub gap: f64,
    pub x_blocks: Vec<DMatrix<f64>>,
    /// PSD dual slack blocks: `C - Σ y_i A_i` when minimizing, `Σ y_i A_i - C` when maximizing.
    pub z_blocks: Vec<DMatrix<f64>>,
    pub free: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iters: 200,
            step_fraction: 0.98,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SdpError> {
        let ok = self.gap_tol > 0.0
            && self.feas_tol > 0.0
            && self.step_fraction > 0.0
            && self.step_fraction < 1.0
            && self.max_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(SdpError::InvalidConfig(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("solver stopped with status {status:?} after {iterations} iterations (gap {gap:e}, primal residual {primal_residual:e}, dual residual {dual_residual:e})")]
    NotSolved {
        status: SolveStatus,
        iterations: usize,
        gap: f64,
        primal_residual: f64,
        dual_residual: f64,
    },
}

impl SdpError {
    pub fn from_solution(sol: &SdpSolution) -> Self {
        SdpError::NotSolved {
            status: sol.status,
            iterations: sol.iterations,
            gap: sol.gap,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
        }
    }
}

impl SdpProblem {
    pub fn new(block_dims: Vec<usize>, num_free: usize, sense: Sense) -> Self {
        Self {
            block_dims,
            num_free,
            objective: Vec::new(),
            constraints: Vec::new(),
            sense,
        }
    }

    fn block_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.block_dims.len() + 1);
        let mut acc = 0;
        for &n in &self.block_dims {
            offsets.push(acc);
            acc += n * (n + 1) / 2;
        }
        offsets.push(acc);
        offsets
    }

    /// Total number of coordinates (block triangles, then free variables).
    pub fn num_coords(&self) -> usize {
        self.block_dims.iter().map(|n| n * (n + 1) / 2).sum::<usize>() + self.num_free
    }

    /// Coordinate of entry `(i, j)` of block `block`; order of `i, j` is irrelevant.
    pub fn coord(&self, block: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.block_dims[block];
        debug_assert!(j < n);
        let offset: usize = self.block_dims[..block].iter().map(|n| n * (n + 1) / 2).sum();
        offset + i * (2 * n - i + 1) / 2 + (j - i)
    }

    pub fn free_coord(&self, k: usize) -> usize {
        self.num_coords() - self.num_free + k
    }

    /// Inverse of [`coord`](Self::coord): `Block(k, i, j)` with `i <= j`, or `Free(k)`.
    pub fn locate(&self, coord: usize) -> Option<Location> {
        let offsets = self.block_offsets();
        let nblocks = self.block_dims.len();
        if coord >= offsets[nblocks] {
            let k = coord - offsets[nblocks];
            return (k < self.num_free).then_some(Location::Free(k));
        }
        let b = offsets.partition_point(|&o| o <= coord) - 1;
        let n = self.block_dims[b];
        let mut local = coord - offsets[b];
        for i in 0..n {
            let row_len = n - i;
            if local < row_len {
                return Some(Location::Block(b, i, i + local));
            }
            local -= row_len;
        }
        None
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.constraints.push(Constraint { coeffs, rhs });
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.block_dims.is_empty() && self.num_free == 0 {
            return Err(SdpError::Malformed("no variables".into()));
        }
        if self.block_dims.contains(&0) {
            return Err(SdpError::Malformed("zero-sized block".into()));
        }
        if self.constraints.is_empty() {
            return Err(SdpError::Malformed("no constraints".into()));
        }
        let n = self.num_coords();
        let bad = |row: &[(usize, f64)]| row.iter().any(|&(k, v)| k >= n || !v.is_finite());
        if bad(&self.objective) {
            return Err(SdpError::Malformed("objective coordinate out of range".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if bad(&c.coeffs) || !c.rhs.is_finite() {
                return Err(SdpError::Malformed(format!("constraint {i} is out of range or non-finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Block(usize, usize, usize),
    Free(usize),
}
