//! Capacities and secrecy rates.
//!
//! Per-use quantities (orthogonal resources) and per-block quantities
//! (shared resources over `L` uses) are reported in bits. The `_nats`
//! helpers return the same differences in natural-log units, which is what
//! the solvers work with internally.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// Threshold bookkeeping for the non-overlapping secrecy constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecrecyConstraintParams {
    /// Threshold in bits (per use, or per block in the overlapping case).
    pub r_m: f64,
    /// `N log2 σ_r² - M log2 σ_c²` in bits.
    pub c_a: f64,
    /// `c_a ln 2 + N`, the constant of the variational constraint, in nats.
    pub n_bar: f64,
    /// `r_m ln 2`, the threshold in nats.
    pub r_bar: f64,
}

impl SecrecyConstraintParams {
    pub fn new(r_m: f64, n_rr: usize, n_cr: usize, sigma2_r: f64, sigma2_c: f64) -> Result<Self> {
        if !(r_m.is_finite() && r_m >= 0.0) {
            return Err(Error::InvalidConfig {
                field: "r_m",
                reason: format!("threshold must be finite and non-negative, got {r_m}"),
            });
        }
        let c_a = n_rr as f64 * sigma2_r.log2() - n_cr as f64 * sigma2_c.log2();
        Ok(Self {
            r_m,
            c_a,
            n_bar: c_a * LN_2 + n_rr as f64,
            r_bar: r_m * LN_2,
        })
    }
}

/// `ln det(σ^{-2} H Q H^H + I)`.
pub fn mutual_information_nats(h: &CMat, q: &CMat, sigma2: f64) -> Result<f64> {
    let m = h.nrows();
    let k = h * q * h.adjoint();
    linalg::logdet_pd(&(k.unscale(sigma2) + linalg::identity(m)))
}

/// `log2 det(σ_c^{-2} H_c Q_c H_c^H + I_M)`.
pub fn capacity_cr(h_c: &CMat, q_c: &CMat, sigma2_c: f64) -> Result<f64> {
    linalg::ensure_psd(q_c, "q_c")?;
    Ok(mutual_information_nats(h_c, q_c, sigma2_c)? / LN_2)
}

/// `log2 det(σ_r^{-2} H_d Q_c H_d^H + I_N)`, the leakage to the radar receiver.
pub fn capacity_rr(h_d: &CMat, q_c: &CMat, sigma2_r: f64) -> Result<f64> {
    linalg::ensure_psd(q_c, "q_c")?;
    Ok(mutual_information_nats(h_d, q_c, sigma2_r)? / LN_2)
}

/// `C_c - C_r` in nats, without the clipping at zero.
pub fn secrecy_margin_nats(
    h_c: &CMat,
    h_d: &CMat,
    q_c: &CMat,
    sigma2_c: f64,
    sigma2_r: f64,
) -> Result<f64> {
    Ok(mutual_information_nats(h_c, q_c, sigma2_c)? - mutual_information_nats(h_d, q_c, sigma2_r)?)
}

/// `max(0, C_c - C_r)` in bits per channel use.
pub fn secrecy_capacity(
    h_c: &CMat,
    h_d: &CMat,
    q_c: &CMat,
    sigma2_c: f64,
    sigma2_r: f64,
) -> Result<f64> {
    linalg::ensure_psd(q_c, "q_c")?;
    Ok((secrecy_margin_nats(h_c, h_d, q_c, sigma2_c, sigma2_r)? / LN_2).max(0.0))
}

/// `ln det Y - tr(Y A) + n`: the concave lower bound on `ln det(A^{-1})`
/// that is tight at `Y = A^{-1}`.
pub fn variational_bracket(y: &CMat, a: &CMat) -> Result<f64> {
    Ok(linalg::logdet_pd(y)? - linalg::trace_product_re(y, a) + y.nrows() as f64)
}

/// Per-block capacities of the shared-resource links, bits per block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockCapacities {
    pub c_tilde_c: f64,
    pub c_tilde_d: f64,
}

fn check_block_inputs(h_c: &CMat, h_d: &CMat, s_bar: &CMat, q_c: &CMat, block_len: usize) -> Result<()> {
    linalg::ensure_psd(q_c, "q_c")?;
    let nt = h_c.ncols();
    if h_d.ncols() != nt || q_c.nrows() != nt || s_bar.nrows() != block_len * nt {
        return Err(Error::Dimension(format!(
            "block quantities need N_t = {nt}, L N_t = {}",
            block_len * nt
        )));
    }
    Ok(())
}

/// `ln det(I + H̄ (I_L ⊗ Q) H̄^H R^{-1})` with `R = H̄ S̄ H̄^H + σ² I`,
/// evaluated literally through an LU determinant of the non-Hermitian product.
fn block_information_direct(h: &CMat, s_bar: &CMat, q_c: &CMat, sigma2: f64, block_len: usize) -> Result<f64> {
    let hbar = linalg::kron_identity(block_len, h);
    let dim = hbar.nrows();
    let r = &hbar * s_bar * hbar.adjoint() + linalg::identity(dim).scale(sigma2);
    let k = &hbar * linalg::kron_identity(block_len, q_c) * hbar.adjoint();
    let r_inv = linalg::inverse_pd(&r)?;
    let det = (linalg::identity(dim) + k * r_inv).lu().determinant();
    if !(det.re > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(det.re.ln())
}

/// Block capacities for a general Gram matrix `S̄_r` in place of `s_r s_r^H`.
pub fn block_capacities_gram(
    h_c: &CMat,
    h_d: &CMat,
    s_bar: &CMat,
    q_c: &CMat,
    sigma2_c: f64,
    sigma2_r: f64,
    block_len: usize,
) -> Result<BlockCapacities> {
    check_block_inputs(h_c, h_d, s_bar, q_c, block_len)?;
    Ok(BlockCapacities {
        c_tilde_c: block_information_direct(h_c, s_bar, q_c, sigma2_c, block_len)? / LN_2,
        c_tilde_d: block_information_direct(h_d, s_bar, q_c, sigma2_r, block_len)? / LN_2,
    })
}

pub fn block_capacities(
    h_c: &CMat,
    h_d: &CMat,
    s_r: &CVec,
    q_c: &CMat,
    sigma2_c: f64,
    sigma2_r: f64,
    block_len: usize,
) -> Result<BlockCapacities> {
    block_capacities_gram(h_c, h_d, &linalg::outer(s_r, s_r), q_c, sigma2_c, sigma2_r, block_len)
}

/// Four-log-det form of `C̃_c - C̃_d` in nats for a Gram matrix `S̄_r`:
/// `ln det(R_c + H̄_c Q̄ H̄_c^H) - ln det R_c + ln det R_d - ln det(R_d + H̄_d Q̄ H̄_d^H)`.
pub fn block_secrecy_margin_nats(
    h_c: &CMat,
    h_d: &CMat,
    s_bar: &CMat,
    q_c: &CMat,
    sigma2_c: f64,
    sigma2_r: f64,
    block_len: usize,
) -> Result<f64> {
    let q_bar = linalg::kron_identity(block_len, q_c);
    let term = |h: &CMat, sigma2: f64| -> Result<f64> {
        let hbar = linalg::kron_identity(block_len, h);
        let dim = hbar.nrows();
        let r = &hbar * s_bar * hbar.adjoint() + linalg::identity(dim).scale(sigma2);
        let with_info = &r + &hbar * &q_bar * hbar.adjoint();
        Ok(linalg::logdet_pd(&with_info)? - linalg::logdet_pd(&r)?)
    };
    Ok(term(h_c, sigma2_c)? - term(h_d, sigma2_r)?)
}

/// Expanded `C̄_s` in bits per block for a rank-one waveform.
pub fn block_secrecy_expansion(
    h_c: &CMat,
    h_d: &CMat,
    s_r: &CVec,
    q_c: &CMat,
    sigma2_c: f64,
    sigma2_r: f64,
    block_len: usize,
) -> Result<f64> {
    let s_bar = linalg::outer(s_r, s_r);
    check_block_inputs(h_c, h_d, &s_bar, q_c, block_len)?;
    Ok(block_secrecy_margin_nats(h_c, h_d, &s_bar, q_c, sigma2_c, sigma2_r, block_len)? / LN_2)
}

/// `max(0, C̃_c - C̃_d)` in bits per block.
pub fn block_secrecy_rate(
    h_c: &CMat,
    h_d: &CMat,
    s_r: &CVec,
    q_c: &CMat,
    sigma2_c: f64,
    sigma2_r: f64,
    block_len: usize,
) -> Result<f64> {
    let caps = block_capacities(h_c, h_d, s_r, q_c, sigma2_c, sigma2_r, block_len)?;
    Ok((caps.c_tilde_c - caps.c_tilde_d).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, complex_gaussian, complex_gaussian_vec, eigvalsh, identity, random_psd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_constants() {
        let p = SecrecyConstraintParams::new(3.0, 4, 2, 2.0, 0.5).unwrap();
        assert!((p.c_a - (4.0 + 2.0)).abs() < 1e-12);
        assert_eq!(p.r_bar, 3.0 * LN_2);
        assert!((p.n_bar - (6.0 * LN_2 + 4.0)).abs() < 1e-12);
        assert!(SecrecyConstraintParams::new(-1.0, 4, 4, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_covariance_gives_zero_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = complex_gaussian(&mut rng, 3, 4, 1.0);
        assert_eq!(capacity_cr(&h, &CMat::zeros(4, 4), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_capacity() {
        let p = 3.0;
        let cap = capacity_cr(&identity(4), &identity(4).scale(p), 1.0).unwrap();
        assert!((cap - 4.0 * (1.0 + p).log2()).abs() < 1e-12);
    }

    #[test]
    fn capacity_matches_eigenvalue_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = complex_gaussian(&mut rng, 3, 4, 1.0);
        let q = random_psd(&mut rng, 4, 2);
        let sigma2 = 0.7;
        let oracle: f64 = eigvalsh(&(&h * &q * h.adjoint()).unscale(sigma2))
            .iter()
            .map(|l| (1.0 + l).log2())
            .sum();
        assert!((capacity_cr(&h, &q, sigma2).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn secrecy_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = complex_gaussian(&mut rng, 4, 4, 1.0);
        let q = random_psd(&mut rng, 4, 4);
        let cc = capacity_cr(&h, &q, 1.0).unwrap();
        let cs = secrecy_capacity(&h, &CMat::zeros(4, 4), &q, 1.0, 1.0).unwrap();
        assert!((cc - cs).abs() < 1e-12);
        assert_eq!(secrecy_capacity(&h, &h, &q, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn secrecy_rejects_indefinite_covariance() {
        let h = identity(2);
        let q = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(secrecy_capacity(&h, &h, &q, 1.0, 1.0).is_err());
    }

    #[test]
    fn block_capacities_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h_c = complex_gaussian(&mut rng, 3, 2, 1.0);
        let h_d = complex_gaussian(&mut rng, 3, 2, 1.0);
        let s = complex_gaussian_vec(&mut rng, 6, 1.0);
        let zero_q = CMat::zeros(2, 2);
        let caps = block_capacities(&h_c, &h_d, &CVec::zeros(6), &zero_q, 1.0, 1.0, 3).unwrap();
        assert_eq!((caps.c_tilde_c, caps.c_tilde_d), (0.0, 0.0));
        let caps = block_capacities(&h_c, &h_d, &s, &zero_q, 1.0, 1.0, 3).unwrap();
        assert!(caps.c_tilde_c.abs() < 1e-12 && caps.c_tilde_d.abs() < 1e-12);
    }

    #[test]
    fn single_use_block_collapses_to_per_use_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h_c = complex_gaussian(&mut rng, 3, 2, 1.0);
        let h_d = complex_gaussian(&mut rng, 3, 2, 1.0);
        let q = random_psd(&mut rng, 2, 2);
        let caps = block_capacities(&h_c, &h_d, &CVec::zeros(2), &q, 1.3, 1.0, 1).unwrap();
        assert!((caps.c_tilde_c - capacity_cr(&h_c, &q, 1.3).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn expansion_matches_direct_block_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h_c = complex_gaussian(&mut rng, 3, 2, 1.0);
        let h_d = complex_gaussian(&mut rng, 3, 2, 1.0);
        let s = complex_gaussian_vec(&mut rng, 6, 2.0);
        let q = random_psd(&mut rng, 2, 2);
        let caps = block_capacities(&h_c, &h_d, &s, &q, 1.0, 1.0, 3).unwrap();
        let expanded = block_secrecy_expansion(&h_c, &h_d, &s, &q, 1.0, 1.0, 3).unwrap();
        assert!((caps.c_tilde_c - caps.c_tilde_d - expanded).abs() < 1e-8);
        assert_eq!(block_secrecy_rate(&h_c, &CMat::zeros(3, 2), &s, &q, 1.0, 1.0, 3).unwrap(), caps.c_tilde_c.max(0.0));
        assert_eq!(block_secrecy_rate(&h_c, &h_c, &s, &q, 1.0, 1.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn variational_bracket_tight_at_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_psd(&mut rng, 4, 4) + identity(4);
        let y = linalg::inverse_pd(&a).unwrap();
        let target = -linalg::logdet_pd(&a).unwrap();
        assert!((variational_bracket(&y, &a).unwrap() - target).abs() < 1e-10);
    }
}
