//! Convex subproblem solvers.
//!
//! Both alternating schemes reduce to log-det programs over Hermitian PSD
//! matrices: a minimum-trace problem under one variational secrecy
//! constraint, and the relaxed shared-resource problem over the radar Gram
//! matrix and the information covariance. [`barrier`] is a small
//! log-barrier interior-point engine for that family; [`min_trace`] and
//! [`overlap_inner`] assemble the two concrete programs on top of it.

pub mod barrier;
pub mod min_trace;
pub mod overlap_inner;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

pub use barrier::NewtonRecord;
pub use min_trace::{solve_min_trace_logdet, MinTraceSolution};
pub use overlap_inner::{solve_overlap_inner, OverlapInnerInput, OverlapInnerSolution};

/// Iteration limits and tolerances shared by the alternating loops and the
/// barrier solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Outer alternating-optimization iterations.
    pub max_outer_iters: usize,
    /// Outer stopping tolerance (change in `tr(Q_c)`, or relative objective change).
    pub tol: f64,
    /// Barrier parameter growth factor between centering stages.
    pub barrier_mu: f64,
    /// Centering stops once the Newton decrement (the gradient norm in the
    /// local Hessian metric) drops below this.
    pub newton_tol: f64,
    /// Newton steps allowed per centering stage.
    pub max_newton: usize,
    /// Target bound `ν/t` on the barrier duality gap.
    pub duality_gap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_outer_iters: 100,
            tol: 0.01,
            barrier_mu: 10.0,
            newton_tol: 1e-7,
            max_newton: 50,
            duality_gap: 1e-8,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str| Error::InvalidConfig {
            field,
            reason: "must be positive".to_string(),
        };
        if self.max_outer_iters == 0 {
            return Err(bad("solver.max_outer_iters"));
        }
        if !(self.tol > 0.0) {
            return Err(bad("solver.tol"));
        }
        if !(self.barrier_mu > 1.0) {
            return Err(Error::InvalidConfig {
                field: "solver.barrier_mu",
                reason: "must exceed 1".to_string(),
            });
        }
        if !(self.newton_tol > 0.0) {
            return Err(bad("solver.newton_tol"));
        }
        if self.max_newton == 0 {
            return Err(bad("solver.max_newton"));
        }
        if !(self.duality_gap > 0.0) {
            return Err(bad("solver.duality_gap"));
        }
        Ok(())
    }
}

/// A Hermitian matrix known to be PSD up to round-off.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdVariable {
    pub value: CMat,
    pub dim: usize,
}

impl PsdVariable {
    /// Validates Hermitian symmetry (1e-9) and eigenvalues `>= -1e-9 λ_max`.
    pub fn new(value: CMat) -> Result<Self> {
        linalg::ensure_psd(&value, "psd variable")?;
        let dim = value.nrows();
        Ok(Self {
            value: linalg::hermitian_part(&value),
            dim,
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            value: CMat::zeros(dim, dim),
            dim,
        }
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.value)
    }
}

/// Frobenius-nearest PSD matrix: eigenvalues clipped at zero. Already-PSD
/// input is returned unchanged.
pub fn psd_project(m: &CMat) -> Result<PsdVariable> {
    linalg::ensure_hermitian(m, "m")?;
    let (vals, _) = linalg::eigh(m);
    if vals.last().copied().unwrap_or(0.0) >= 0.0 {
        return Ok(PsdVariable {
            value: m.clone(),
            dim: m.nrows(),
        });
    }
    Ok(PsdVariable {
        value: linalg::hermitian_map(m, |v| v.max(0.0)),
        dim: m.nrows(),
    })
}

/// Gradient of `ln det(H Q H^H + σ² I)` with respect to `Q`: `H^H (H Q H^H + σ² I)^{-1} H`.
pub fn logdet_gradient(h: &CMat, q: &CMat, sigma2: f64) -> Result<CMat> {
    linalg::ensure_psd(q, "q")?;
    let inner = h * q * h.adjoint() + linalg::identity(h.nrows()).scale(sigma2);
    let x = linalg::solve_pd(&inner, h)?;
    Ok(linalg::hermitian_part(&(h.adjoint() * x)))
}
