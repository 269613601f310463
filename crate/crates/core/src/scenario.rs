//! Array geometry, deterministic radar operators and random communication
//! channels for one experiment instance.
//!
//! Signals over a block of `L` samples are stacked column by column, so an
//! `N_t x L` waveform matrix becomes a length `L*N_t` vector whose `l`-th
//! chunk is the sample at time `l`. Under that ordering every per-sample
//! operator `X` acts on the stacked vector as the block diagonal `I_L ⊗ X`.

use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex::SolverOptions;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64};

/// Physical and algorithmic parameters of one scenario.
///
/// SNRs are per element and relative to the receiver noise: the direct-path
/// gain satisfies `|gamma_d|^2 = sigma2_r * 10^(snr_direct_db/10)`, the
/// surveillance gain `|gamma_t|^2 = sigma2_r * 10^(snr_surv_db/10)` and each
/// entry of the transmitter-CR channel has variance
/// `sigma2_c * 10^(snr_comm_db/10)`. An explicit `gamma_d` / `gamma_t`
/// (`[re, im]`) overrides the SNR-derived gain; otherwise the phase is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_tx: usize,
    pub n_rr: usize,
    pub n_cr: usize,
    pub block_len: usize,
    pub theta_t: f64,
    pub theta_r: f64,
    pub theta_t0: f64,
    pub theta_r0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_d: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_t: Option<[f64; 2]>,
    #[serde(default = "unit")]
    pub sigma2_r: f64,
    #[serde(default = "unit")]
    pub sigma2_c: f64,
    pub p_total: f64,
    pub snr_direct_db: f64,
    pub snr_surv_db: f64,
    pub snr_comm_db: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

fn unit() -> f64 {
    1.0
}

impl Default for ScenarioConfig {
    /// The desk-scale setup used for the non-overlapping tradeoff curves:
    /// `N_t = M = N = 4`, `L = 10`, 30 W budget, 20/10/0 dB SNRs.
    fn default() -> Self {
        Self {
            n_tx: 4,
            n_rr: 4,
            n_cr: 4,
            block_len: 10,
            theta_t: 40.0,
            theta_r: 42.0,
            theta_t0: 30.0,
            theta_r0: 32.0,
            gamma_d: None,
            gamma_t: None,
            sigma2_r: 1.0,
            sigma2_c: 1.0,
            p_total: 30.0,
            snr_direct_db: 20.0,
            snr_surv_db: 10.0,
            snr_comm_db: 0.0,
            solver: SolverOptions::default(),
        }
    }
}

impl ScenarioConfig {
    /// The overlapping-resources setup: `N_t = 2`, `L = 3`, `M = N = 3`.
    pub fn overlap_default() -> Self {
        Self {
            n_tx: 2,
            n_rr: 3,
            n_cr: 3,
            block_len: 3,
            ..Self::default()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::ConfigParse {
            field: e.path().to_string(),
            reason: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_tx", self.n_tx),
            ("n_rr", self.n_rr),
            ("n_cr", self.n_cr),
            ("block_len", self.block_len),
        ];
        for (field, v) in counts {
            if v == 0 {
                return Err(invalid(field, "must be at least 1"));
            }
        }
        let angles = [
            ("theta_t", self.theta_t),
            ("theta_r", self.theta_r),
            ("theta_t0", self.theta_t0),
            ("theta_r0", self.theta_r0),
        ];
        for (field, a) in angles {
            if !(a.is_finite() && a > -90.0 && a < 90.0) {
                return Err(invalid(field, "angle must lie in (-90, 90) degrees"));
            }
        }
        let positives = [
            ("sigma2_r", self.sigma2_r),
            ("sigma2_c", self.sigma2_c),
            ("p_total", self.p_total),
        ];
        for (field, v) in positives {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, "must be finite and positive"));
            }
        }
        let snrs = [
            ("snr_direct_db", self.snr_direct_db),
            ("snr_surv_db", self.snr_surv_db),
            ("snr_comm_db", self.snr_comm_db),
        ];
        for (field, v) in snrs {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        for (field, g) in [("gamma_d", self.gamma_d), ("gamma_t", self.gamma_t)] {
            if let Some([re, im]) = g {
                if !(re.is_finite() && im.is_finite()) {
                    return Err(invalid(field, "components must be finite"));
                }
            }
        }
        self.solver.validate()
    }

    pub fn gamma_d(&self) -> C64 {
        self.gamma_d
            .map(|[re, im]| c(re, im))
            .unwrap_or_else(|| c((self.sigma2_r * db_to_linear(self.snr_direct_db)).sqrt(), 0.0))
    }

    pub fn gamma_t(&self) -> C64 {
        self.gamma_t
            .map(|[re, im]| c(re, im))
            .unwrap_or_else(|| c((self.sigma2_r * db_to_linear(self.snr_surv_db)).sqrt(), 0.0))
    }

    /// Per-entry variance of the transmitter-CR channel.
    pub fn comm_channel_variance(&self) -> f64 {
        self.sigma2_c * db_to_linear(self.snr_comm_db)
    }
}

fn invalid(field: &'static str, reason: &str) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.to_string(),
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Half-wavelength ULA response, element `k` equal to `exp(i π k sin θ)`.
pub fn steering_vector(theta_deg: f64, n: usize) -> CVec {
    let phase = PI * theta_deg.to_radians().sin();
    CVec::from_fn(n, |k, _| C64::from_polar(1.0, phase * k as f64))
}

/// Kronecker-structured radar matrices for one geometry.
#[derive(Debug, Clone)]
pub struct RadarOperators {
    /// `A(θ_d) = γ_d (I_L ⊗ a(θ_r) a^H(θ_t))`, `LN x LN_t`.
    pub a_mat: CMat,
    /// `A_d(θ_t) = N |γ_d|^2 (I_L ⊗ a(θ_t) a^H(θ_t))`, `LN_t x LN_t`.
    pub ad_mat: CMat,
    /// `A_s(θ_0) = γ_t (I_L ⊗ a(θ_r0) a^H(θ_t0))`, `LN x LN_t`.
    pub as_mat: CMat,
    /// `C = A_s A_d A_s^H + I`, `LN x LN`.
    pub c_mat: CMat,
    /// `D = A_d^H A_s^H`, `LN_t x LN`.
    pub d_mat: CMat,
    pub n_tx: usize,
    pub n_rr: usize,
    pub block_len: usize,
}

impl RadarOperators {
    /// `D^H = A_s A_d`, the map from the stacked waveform to the surveillance echo.
    pub fn echo_mat(&self) -> CMat {
        self.d_mat.adjoint()
    }

    /// Length of the stacked waveform, `L N_t`.
    pub fn waveform_len(&self) -> usize {
        self.block_len * self.n_tx
    }

    /// Length of the stacked surveillance snapshot, `L N`.
    pub fn snapshot_len(&self) -> usize {
        self.block_len * self.n_rr
    }
}

pub fn build_operators(cfg: &ScenarioConfig) -> RadarOperators {
    let (l, n, nt) = (cfg.block_len, cfg.n_rr, cfg.n_tx);
    let gd = cfg.gamma_d();
    let gt = cfg.gamma_t();
    let a_t = steering_vector(cfg.theta_t, nt);
    let a_r = steering_vector(cfg.theta_r, n);
    let a_t0 = steering_vector(cfg.theta_t0, nt);
    let a_r0 = steering_vector(cfg.theta_r0, n);

    let a_mat = linalg::kron_identity(l, &linalg::outer(&a_r, &a_t)) * gd;
    let ad_mat = linalg::kron_identity(l, &linalg::outer(&a_t, &a_t)) * c(n as f64 * gd.norm_sqr(), 0.0);
    let as_mat = linalg::kron_identity(l, &linalg::outer(&a_r0, &a_t0)) * gt;
    let c_mat = linalg::hermitian_part(&(&as_mat * &ad_mat * as_mat.adjoint() + linalg::identity(l * n)));
    let d_mat = ad_mat.adjoint() * as_mat.adjoint();
    RadarOperators {
        a_mat,
        ad_mat,
        as_mat,
        c_mat,
        d_mat,
        n_tx: nt,
        n_rr: n,
        block_len: l,
    }
}

/// Interference-plus-noise covariance of the overlapping case,
/// `A_s A_d (I_L ⊗ Q) A_d^H A_s^H + σ_r² I + σ_r² A_s A_d A_s^H`.
pub fn build_c_of_q(ops: &RadarOperators, q_c: &CMat, sigma2_r: f64) -> Result<CMat> {
    if q_c.shape() != (ops.n_tx, ops.n_tx) {
        return Err(Error::Dimension(format!(
            "q_c must be {0}x{0}, got {1}x{2}",
            ops.n_tx,
            q_c.nrows(),
            q_c.ncols()
        )));
    }
    linalg::ensure_hermitian(q_c, "q_c")?;
    let echo = ops.echo_mat();
    let interference = &echo * linalg::kron_identity(ops.block_len, q_c) * echo.adjoint();
    Ok(linalg::hermitian_part(&(interference + ops.c_mat.scale(sigma2_r))))
}

/// One Monte Carlo draw of the two information channels.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Transmitter-CR channel `H_c`, `M x N_t`.
    pub h_c: CMat,
    /// Direct-path channel `H_d = γ_d a(θ_r) a^H(θ_t)`, `N x N_t`.
    pub h_d: CMat,
}

pub fn direct_channel(cfg: &ScenarioConfig) -> CMat {
    let a_r = steering_vector(cfg.theta_r, cfg.n_rr);
    let a_t = steering_vector(cfg.theta_t, cfg.n_tx);
    linalg::outer(&a_r, &a_t) * cfg.gamma_d()
}

/// Draws `H_c` from a ChaCha8 stream seeded with `rng_seed`; `H_d` is fixed by geometry.
pub fn sample_channel(cfg: &ScenarioConfig, rng_seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let h_c = linalg::complex_gaussian(&mut rng, cfg.n_cr, cfg.n_tx, cfg.comm_channel_variance());
    ChannelRealization {
        h_c,
        h_d: direct_channel(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, max_abs_diff, numeric_rank};

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn steering_broadside_is_all_ones() {
        let a = steering_vector(0.0, 4);
        assert!(a.iter().all(|&z| close(z, c(1.0, 0.0))));
    }

    #[test]
    fn steering_thirty_degrees() {
        let a = steering_vector(30.0, 2);
        assert!(close(a[0], c(1.0, 0.0)));
        assert!(close(a[1], c(0.0, 1.0)));
    }

    #[test]
    fn steering_norm_and_conjugate_symmetry() {
        let a = steering_vector(40.0, 8);
        assert!((a.norm_squared() - 8.0).abs() < 1e-12);
        let b = steering_vector(-40.0, 8);
        assert!((a.conjugate() - b).norm() < 1e-12);
    }

    #[test]
    fn operator_dimensions() {
        let cfg = ScenarioConfig {
            n_tx: 5,
            ..ScenarioConfig::default()
        };
        let ops = build_operators(&cfg);
        assert_eq!(ops.c_mat.shape(), (40, 40));
        assert_eq!(ops.d_mat.shape(), (50, 40));
        assert_eq!(ops.a_mat.shape(), (40, 50));
    }

    #[test]
    fn c_eigenvalues_at_least_one() {
        let ops = build_operators(&ScenarioConfig::default());
        let min = *eigvalsh(&ops.c_mat).last().unwrap();
        assert!(min >= 1.0 - 1e-9);
    }

    #[test]
    fn d_rank_equals_block_len() {
        let cfg = ScenarioConfig {
            n_tx: 2,
            n_rr: 2,
            block_len: 3,
            theta_t: 12.5,
            theta_r: -33.0,
            theta_t0: 61.0,
            theta_r0: 5.0,
            ..ScenarioConfig::default()
        };
        let ops = build_operators(&cfg);
        assert_eq!(numeric_rank(&ops.d_mat, 1e-8), 3);
        assert_eq!(numeric_rank(&ops.ad_mat, 1e-8), 3);
    }

    #[test]
    fn c_of_zero_is_scaled_c() {
        let ops = build_operators(&ScenarioConfig::default());
        let cq = build_c_of_q(&ops, &CMat::zeros(4, 4), 2.5).unwrap();
        assert!(max_abs_diff(&cq, &ops.c_mat.scale(2.5)) < 1e-9);
    }

    #[test]
    fn c_of_q_rejects_non_hermitian() {
        let ops = build_operators(&ScenarioConfig::default());
        let mut q = CMat::identity(4, 4);
        q[(0, 1)] = c(0.3, 0.1);
        assert!(matches!(
            build_c_of_q(&ops, &q, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn c_of_q_trace_grows_with_scale() {
        let ops = build_operators(&ScenarioConfig::default());
        let q = CMat::identity(4, 4);
        let t1 = build_c_of_q(&ops, &q, 1.0).unwrap().trace().re;
        let t2 = build_c_of_q(&ops, &q.scale(2.0), 1.0).unwrap().trace().re;
        assert!(t2 >= t1);
    }

    #[test]
    fn channel_is_reproducible_and_direct_path_rank_one() {
        let cfg = ScenarioConfig::default();
        let a = sample_channel(&cfg, 11);
        let b = sample_channel(&cfg, 11);
        assert_eq!(a.h_c, b.h_c);
        assert_eq!(numeric_rank(&a.h_d, 1e-8), 1);
        let expected = linalg::outer(&steering_vector(42.0, 4), &steering_vector(40.0, 4)) * cfg.gamma_d();
        assert!(max_abs_diff(&a.h_d, &expected) == 0.0);
    }

    #[test]
    fn validation_names_the_field() {
        let cfg = ScenarioConfig {
            theta_r0: 90.0,
            ..ScenarioConfig::default()
        };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("theta_r0"));
        let cfg = ScenarioConfig {
            n_cr: 0,
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().unwrap_err().to_string().contains("n_cr"));
    }

    #[test]
    fn json_round_trip() {
        let cfg = ScenarioConfig::overlap_default();
        let back = ScenarioConfig::from_json_str(&cfg.to_json_pretty()).unwrap();
        assert_eq!(cfg, back);
        let bad = r#"{"n_tx": 2}"#;
        assert!(ScenarioConfig::from_json_str(bad).is_err());
    }
}
