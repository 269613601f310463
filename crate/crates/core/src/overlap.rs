//! Shared-resource design: waveform and information symbols occupy the same
//! resource elements, so each interferes with the other.
//!
//! The waveform enters through its Gram matrix `S̄_r = s_r s_r^H`, relaxed to
//! any PSD matrix. The SINR term and the block secrecy rate are both
//! differences of log-dets; each concave-minus-concave piece is replaced by
//! its variational minorant through the auxiliary matrices `X`, `Ȳ`, `Z`,
//! which makes every alternating step a convex program. A rank-one waveform
//! is recovered from `S̄_r` at the end by Gaussian randomization.

use std::f64::consts::LN_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convex::{self, OverlapInnerInput, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::nonoverlap::{IterationRecord, OverlapDiagnostics, SolveResult, SolveStatus, SolverKind};
use crate::radar;
use crate::scenario::{build_c_of_q, ChannelRealization, RadarOperators, ScenarioConfig};
use crate::secrecy;

/// Eigenvalue ratio below which the relaxed Gram matrix counts as rank one.
pub const RANK_ONE_TOL: f64 = 1e-6;
/// Gaussian candidates drawn when the relaxation is not tight.
pub const RANDOMIZATION_DRAWS: usize = 100;
/// Slack (bits) allowed when checking a candidate against the threshold.
pub const CANDIDATE_SLACK_BITS: f64 = 1e-9;

/// Auxiliary matrices that make the variational bounds tight at the current iterate.
#[derive(Debug, Clone)]
pub struct AuxMatrices {
    /// `C(Q)^{-1}`.
    pub x: CMat,
    /// `(H̄_d (S̄ + I_L ⊗ Q) H̄_d^H + σ_r² I)^{-1}`.
    pub ybar: CMat,
    /// `(H̄_c S̄ H̄_c^H + σ_c² I)^{-1}`.
    pub z: CMat,
}

pub fn aux_update(
    s_bar: &CMat,
    q_c: &CMat,
    ops: &RadarOperators,
    h_c: &CMat,
    h_d: &CMat,
    sigma2_c: f64,
    sigma2_r: f64,
) -> Result<AuxMatrices> {
    linalg::ensure_psd(s_bar, "s_bar")?;
    linalg::ensure_psd(q_c, "q_c")?;
    let l = ops.block_len;
    let hc = linalg::kron_identity(l, h_c);
    let hd = linalg::kron_identity(l, h_d);
    let total = s_bar + linalg::kron_identity(l, q_c);
    let x = linalg::inverse_pd(&build_c_of_q(ops, q_c, sigma2_r)?)?;
    let ybar = linalg::inverse_pd(&(&hd * &total * hd.adjoint() + linalg::identity(hd.nrows()).scale(sigma2_r)))?;
    let z = linalg::inverse_pd(&(&hc * s_bar * hc.adjoint() + linalg::identity(hc.nrows()).scale(sigma2_c)))?;
    Ok(AuxMatrices {
        x: linalg::hermitian_part(&x),
        ybar: linalg::hermitian_part(&ybar),
        z: linalg::hermitian_part(&z),
    })
}

/// `ln det(C(Q) + D^H S̄ D) - ln det C(Q)`; equals `ln(1 + SINR)` when `S̄` is rank one.
pub fn relaxed_objective(ops: &RadarOperators, s_bar: &CMat, q_c: &CMat, sigma2_r: f64) -> Result<f64> {
    let cq = build_c_of_q(ops, q_c, sigma2_r)?;
    let d = &ops.d_mat;
    Ok(linalg::logdet_pd(&(&cq + d.adjoint() * s_bar * d))? - linalg::logdet_pd(&cq)?)
}

/// `tr(D C(Q)^{-1} D^H S̄)`, the SINR of the relaxed Gram matrix.
pub fn relaxed_sinr(ops: &RadarOperators, s_bar: &CMat, q_c: &CMat, sigma2_r: f64) -> Result<f64> {
    let cq = build_c_of_q(ops, q_c, sigma2_r)?;
    let k = &ops.d_mat * linalg::solve_pd(&cq, &ops.echo_mat())?;
    Ok(linalg::trace_product_re(&linalg::hermitian_part(&k), s_bar))
}

/// Instance data for the shared-resource solver.
#[derive(Debug, Clone, Copy)]
pub struct OverlapProblem<'a> {
    pub cfg: &'a ScenarioConfig,
    pub ops: &'a RadarOperators,
    pub chan: &'a ChannelRealization,
    /// Threshold in bits per block.
    pub r_tilde: f64,
    /// Seeds the randomization stream of the rank-one extraction.
    pub seed: u64,
}

impl OverlapProblem<'_> {
    fn input<'b>(&'b self, aux: &'b AuxMatrices, start: Option<(&'b CMat, &'b CMat)>) -> OverlapInnerInput<'b> {
        OverlapInnerInput {
            ops: self.ops,
            h_c: &self.chan.h_c,
            h_d: &self.chan.h_d,
            x_mat: &aux.x,
            ybar_mat: &aux.ybar,
            z_mat: &aux.z,
            r_hat: self.r_tilde * LN_2,
            p_total: self.cfg.p_total,
            sigma2_c: self.cfg.sigma2_c,
            sigma2_r: self.cfg.sigma2_r,
            start,
        }
    }

    /// Block secrecy margin `C̃_c - C̃_d` in bits for a Gram matrix.
    fn margin_bits(&self, s_bar: &CMat, q_c: &CMat) -> Result<f64> {
        let cfg = self.cfg;
        Ok(secrecy::block_secrecy_margin_nats(
            &self.chan.h_c,
            &self.chan.h_d,
            s_bar,
            q_c,
            cfg.sigma2_c,
            cfg.sigma2_r,
            cfg.block_len,
        )? / LN_2)
    }
}

/// Outcome of the rank-one extraction.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub s_r: CVec,
    /// `λ_2/λ_1` of the relaxed Gram matrix.
    pub eig_ratio: f64,
    /// The relaxed matrix was rank one and its scaled eigenvector was returned.
    pub exact: bool,
}

fn principal_candidate(s_bar: &CMat) -> (CVec, f64) {
    let (vals, vecs) = linalg::eigh(s_bar);
    let top = vals[0].max(0.0);
    let ratio = if top > 0.0 { vals.get(1).copied().unwrap_or(0.0).max(0.0) / top } else { 0.0 };
    let v = vecs.column(0).into_owned();
    (v.scale(linalg::trace_re(s_bar).max(0.0).sqrt()), ratio)
}

/// Rank-one waveform from a relaxed Gram matrix.
///
/// A rank-one `S̄` returns its scaled principal eigenvector. Otherwise
/// [`RANDOMIZATION_DRAWS`] candidates `ξ ~ CN(0, S̄)` are drawn, rescaled to
/// power `tr S̄`, and the one with the largest `score` among those accepted
/// by `feasible` wins. When none is accepted the principal-eigenvector
/// candidate comes back inside [`Error::NoFeasibleCandidate`]'s caller path.
pub fn rank_one_extract(
    s_bar: &CMat,
    rng: &mut ChaCha8Rng,
    mut score: impl FnMut(&CVec) -> Result<f64>,
    mut feasible: impl FnMut(&CVec) -> Result<bool>,
) -> Result<Extraction> {
    linalg::ensure_psd(s_bar, "s_bar")?;
    let (principal, eig_ratio) = principal_candidate(s_bar);
    if eig_ratio < RANK_ONE_TOL {
        return Ok(Extraction {
            s_r: principal,
            eig_ratio,
            exact: true,
        });
    }
    let n = s_bar.nrows();
    let root = linalg::sqrt_psd(s_bar);
    let power = linalg::trace_re(s_bar);
    let mut best: Option<(f64, CVec)> = None;
    for _ in 0..RANDOMIZATION_DRAWS {
        let z = linalg::complex_gaussian_vec(rng, n, 1.0);
        let xi = &root * z;
        let norm = xi.norm();
        if norm == 0.0 {
            continue;
        }
        let xi = xi.scale(power.sqrt() / norm);
        if !feasible(&xi)? {
            continue;
        }
        let value = score(&xi)?;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, xi));
        }
    }
    match best {
        Some((_, s_r)) => Ok(Extraction {
            s_r,
            eig_ratio,
            exact: false,
        }),
        None => Err(Error::NoFeasibleCandidate),
    }
}

/// Fixed seed offset separating the randomization stream from the channel stream.
const EXTRACTION_STREAM: u64 = 0x005e_ed0f_ba5e;

/// Alternating optimization over `(S̄_r, Q_c)` with the auxiliary updates
/// between convex steps.
pub fn ao_overlap(prob: &OverlapProblem<'_>, opts: &SolverOptions) -> Result<SolveResult> {
    let cfg = prob.cfg;
    let ops = prob.ops;
    let (l, nt) = (cfg.block_len, cfg.n_tx);
    if !(prob.r_tilde.is_finite() && prob.r_tilde >= 0.0) {
        return Err(Error::InvalidConfig {
            field: "r_m",
            reason: format!("threshold must be finite and non-negative, got {}", prob.r_tilde),
        });
    }
    if prob.r_tilde == 0.0 {
        // The information signal is not needed and only interferes, so all
        // power goes to the radar waveform.
        let wave = radar::optimal_waveform(ops, cfg.p_total)?;
        let s_bar = linalg::outer(&wave.s_r, &wave.s_r);
        return finish(prob, s_bar, CMat::zeros(nt, nt), SolveStatus::ZeroThreshold, 0, 0, Vec::new(), 0.0);
    }

    let mut s_bar = linalg::identity(l * nt).scale(0.5 * cfg.p_total / (l * nt) as f64);
    let mut q = linalg::identity(nt).scale(0.5 * cfg.p_total / nt as f64);
    let mut prev_obj = relaxed_objective(ops, &s_bar, &q, cfg.sigma2_r)?;
    let mut history = Vec::new();
    let mut inner_total = 0usize;
    let mut max_gap = 0.0_f64;
    let mut status = SolveStatus::IterationLimit;
    let mut outer = 0usize;

    for iter in 1..=opts.max_outer_iters {
        outer = iter;
        let aux = aux_update(&s_bar, &q, ops, &prob.chan.h_c, &prob.chan.h_d, cfg.sigma2_c, cfg.sigma2_r)?;
        let input = prob.input(&aux, Some((&s_bar, &q)));
        let surrogate = convex::overlap_inner::surrogate_constraint(&input, &s_bar, &q)?;
        max_gap = max_gap.max((surrogate / LN_2 - prob.margin_bits(&s_bar, &q)?).abs());
        let sol = match convex::solve_overlap_inner(&input, opts) {
            Ok(sol) => sol,
            Err(Error::Infeasible(msg)) => {
                log::debug!("overlap infeasible at outer iteration {iter}: {msg}");
                return finish(prob, s_bar, q, SolveStatus::Infeasible, outer, inner_total, history, max_gap);
            }
            Err(Error::NotConverged(msg)) => {
                log::debug!("overlap inner solve stalled at outer iteration {iter}: {msg}");
                return finish(prob, s_bar, q, SolveStatus::InnerNotConverged, outer, inner_total, history, max_gap);
            }
            Err(e) => return Err(e),
        };
        inner_total += sol.newton_iters;
        let g = input.r_hat - convex::overlap_inner::surrogate_constraint(&input, &sol.s_bar.value, &sol.q_c.value)?;
        s_bar = sol.s_bar.value;
        q = sol.q_c.value;
        let obj = relaxed_objective(ops, &s_bar, &q, cfg.sigma2_r)?;
        history.push(IterationRecord {
            iteration: iter,
            trace_q: None,
            objective: Some(obj),
            lambda: sol.secrecy_multiplier,
            g,
            secrecy: prob.margin_bits(&s_bar, &q)?.max(0.0),
            sinr: relaxed_sinr(ops, &s_bar, &q, cfg.sigma2_r)?,
        });
        let done = (obj - prev_obj).abs() <= opts.tol * prev_obj.abs().max(f64::MIN_POSITIVE);
        prev_obj = obj;
        if done {
            status = SolveStatus::Converged;
            break;
        }
    }
    finish(prob, s_bar, q, status, outer, inner_total, history, max_gap)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    prob: &OverlapProblem<'_>,
    s_bar: CMat,
    q: CMat,
    mut status: SolveStatus,
    outer_iters: usize,
    inner_iters_total: usize,
    history: Vec<IterationRecord>,
    max_surrogate_gap: f64,
) -> Result<SolveResult> {
    let cfg = prob.cfg;
    let ops = prob.ops;
    let (l, nt) = (cfg.block_len, cfg.n_tx);
    let relaxed = relaxed_sinr(ops, &s_bar, &q, cfg.sigma2_r)?;
    let trace_s = linalg::trace_re(&s_bar);

    let mut eig_ratio = principal_candidate(&s_bar).1;
    let mut exact = false;
    let mut s_r = CVec::zeros(l * nt);
    if status.is_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(prob.seed ^ EXTRACTION_STREAM);
        let extraction = rank_one_extract(
            &s_bar,
            &mut rng,
            |xi| radar::sinr_overlap(ops, xi, &q, cfg.sigma2_r),
            |xi| Ok(prob.margin_bits(&linalg::outer(xi, xi), &q)? >= prob.r_tilde - CANDIDATE_SLACK_BITS),
        );
        match extraction {
            Ok(ex) => {
                eig_ratio = ex.eig_ratio;
                exact = ex.exact;
                s_r = ex.s_r;
                if prob.margin_bits(&linalg::outer(&s_r, &s_r), &q)? < prob.r_tilde - CANDIDATE_SLACK_BITS {
                    status = SolveStatus::NoFeasibleCandidate;
                }
            }
            Err(Error::NoFeasibleCandidate) => status = SolveStatus::NoFeasibleCandidate,
            Err(e) => return Err(e),
        }
    }

    let feasible = status.is_feasible();
    let (q_c, s_r) = if feasible {
        (q, s_r)
    } else {
        let wave = radar::optimal_waveform(ops, cfg.p_total)?;
        (CMat::zeros(nt, nt), wave.s_r)
    };
    let sinr = radar::sinr_overlap(ops, &s_r, &q_c, cfg.sigma2_r)?;
    let achieved = if feasible {
        secrecy::block_secrecy_rate(&prob.chan.h_c, &prob.chan.h_d, &s_r, &q_c, cfg.sigma2_c, cfg.sigma2_r, l)?
    } else {
        0.0
    };
    Ok(SolveResult {
        solver: SolverKind::Overlap,
        r_m: prob.r_tilde,
        p_r: s_r.norm_squared(),
        q_c,
        s_r,
        sinr,
        achieved_secrecy: achieved,
        feasible,
        status,
        outer_iters,
        inner_iters_total,
        history,
        overlap: Some(OverlapDiagnostics {
            trace_s,
            eig_ratio,
            relaxed_sinr: relaxed,
            secrecy_per_use: achieved / l as f64,
            max_surrogate_gap,
            rank_one_exact: exact,
        }),
    })
}
