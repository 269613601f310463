//! Radar receive processing: the unit-response spatio-temporal weight, the
//! SINR-optimal waveform direction, and SINR evaluation for both resource
//! modes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::scenario::{build_c_of_q, RadarOperators};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverMode {
    NonOverlap,
    Overlap,
}

/// Spatio-temporal weight normalized so that `s_r^H D w = 1`.
#[derive(Debug, Clone)]
pub struct ReceiverWeight {
    pub w: CVec,
    pub mode: ReceiverMode,
}

/// A radar waveform together with the power it carries.
#[derive(Debug, Clone)]
pub struct WaveformDesign {
    pub s_r: CVec,
    pub p_r: f64,
    /// `λ_max(D C^{-1} D^H)` of the operator the waveform was aligned with.
    pub lambda_max: f64,
}

fn ensure_positive_definite(c_like: &CMat) -> Result<()> {
    linalg::ensure_hermitian(c_like, "c_like")?;
    let vals = linalg::eigvalsh(c_like);
    let max = vals[0];
    let min = vals[vals.len() - 1];
    if !(max > 0.0 && min > 1e-12 * max) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

/// `w = C^{-1} D^H s / (s^H D C^{-1} D^H s)`.
pub fn optimal_weight(
    c_like: &CMat,
    d_mat: &CMat,
    s_r: &CVec,
    mode: ReceiverMode,
) -> Result<ReceiverWeight> {
    ensure_positive_definite(c_like)?;
    let dh_s = d_mat.adjoint() * s_r;
    let whitened = linalg::solve_pd(c_like, &CMat::from_column_slice(dh_s.len(), 1, dh_s.as_slice()))?;
    let whitened = whitened.column(0).into_owned();
    let denom = dh_s.dotc(&whitened);
    if denom.norm() == 0.0 {
        return Err(Error::DegenerateWaveform);
    }
    Ok(ReceiverWeight {
        w: whitened / denom,
        mode,
    })
}

/// Generalized Rayleigh quotient `|s^H D w|^2 / (w^H C w)`.
pub fn rayleigh_quotient(c_like: &CMat, d_mat: &CMat, s_r: &CVec, w: &CVec) -> f64 {
    let response = (s_r.adjoint() * d_mat * w)[(0, 0)];
    response.norm_sqr() / linalg::quad_form(c_like, w)
}

/// `s^H D M^{-1} D^H s` for a Hermitian positive-definite `M`.
fn whitened_energy(m: &CMat, d_mat: &CMat, s_r: &CVec) -> Result<f64> {
    if s_r.iter().all(|z| z.norm() == 0.0) {
        return Ok(0.0);
    }
    let chol = linalg::cholesky(m)?;
    let dh_s = d_mat.adjoint() * s_r;
    let y = chol.l().solve_lower_triangular(&dh_s).ok_or(Error::NotPositiveDefinite)?;
    Ok(y.norm_squared())
}

/// `D C^{-1} D^H`, the operator whose top eigenvector is the optimal waveform.
pub fn waveform_operator(ops: &RadarOperators) -> Result<CMat> {
    let x = linalg::solve_pd(&ops.c_mat, &ops.echo_mat())?;
    Ok(linalg::hermitian_part(&(&ops.d_mat * x)))
}

/// Non-overlapping SINR `(1/σ_r²) s^H D C^{-1} D^H s` at the optimal weight.
pub fn sinr_nonoverlap(ops: &RadarOperators, s_r: &CVec, sigma2_r: f64) -> Result<f64> {
    Ok(whitened_energy(&ops.c_mat, &ops.d_mat, s_r)? / sigma2_r)
}

/// Non-overlapping SINR evaluated for an arbitrary weight straight from the
/// operator definitions:
/// `(1/σ_r²) |w^H A_s A_d s|^2 / (||w^H A_s A^H||^2 + w^H w)`.
pub fn sinr_with_weight(ops: &RadarOperators, s_r: &CVec, w: &CVec, sigma2_r: f64) -> f64 {
    let signal = (w.adjoint() * &ops.as_mat * &ops.ad_mat * s_r)[(0, 0)].norm_sqr();
    let leak = (w.adjoint() * &ops.as_mat * ops.a_mat.adjoint()).norm_squared();
    signal / (sigma2_r * (leak + w.norm_squared()))
}

/// Waveform of power `p_r` along the top eigenvector of `D C^{-1} D^H`.
pub fn optimal_waveform(ops: &RadarOperators, p_r: f64) -> Result<WaveformDesign> {
    if !(p_r >= 0.0) {
        return Err(Error::Dimension(format!("radar power must be non-negative, got {p_r}")));
    }
    let k = waveform_operator(ops)?;
    let (lambda_max, v) = linalg::principal_eigenvector(&k);
    Ok(WaveformDesign {
        s_r: v.scale(p_r.sqrt()),
        p_r,
        lambda_max,
    })
}

/// Overlapping SINR `s^H D C(Q)^{-1} D^H s` at the optimal weight.
pub fn sinr_overlap(ops: &RadarOperators, s_r: &CVec, q_c: &CMat, sigma2_r: f64) -> Result<f64> {
    linalg::ensure_psd(q_c, "q_c")?;
    let cq = build_c_of_q(ops, q_c, sigma2_r)?;
    whitened_energy(&cq, &ops.d_mat, s_r)
}

/// Overlapping SINR for an arbitrary weight, `|w^H D^H s|^2 / (w^H C(Q) w)`.
pub fn sinr_overlap_with_weight(
    ops: &RadarOperators,
    s_r: &CVec,
    q_c: &CMat,
    sigma2_r: f64,
    w: &CVec,
) -> Result<f64> {
    let cq = build_c_of_q(ops, q_c, sigma2_r)?;
    Ok(rayleigh_quotient(&cq, &ops.d_mat, s_r, w))
}
