//! Orthogonal-resource design: the information covariance is chosen to meet
//! the secrecy threshold with the least power, and whatever is left drives
//! the radar waveform along its SINR-optimal direction.
//!
//! Both solvers alternate between the variational auxiliary
//! `Y = (H_d Q H_d^H + σ_r² I)^{-1}` and a minimum-trace step for fixed `Y`.
//! [`algorithm1`] hands that step to the barrier solver; [`algorithm2`] uses
//! the water-filling closed form with a bisection on the multiplier.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::convex::{self, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::radar;
use crate::scenario::{ChannelRealization, RadarOperators, ScenarioConfig};
use crate::secrecy::{self, SecrecyConstraintParams};

/// Upper limit for the doubling search on the multiplier.
pub const DEFAULT_BRACKET_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Alg1,
    Alg2,
    Overlap,
}

impl SolverKind {
    pub fn tag(self) -> &'static str {
        match self {
            SolverKind::Alg1 => "alg1",
            SolverKind::Alg2 => "alg2",
            SolverKind::Overlap => "overlap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "alg1" => Some(SolverKind::Alg1),
            "alg2" => Some(SolverKind::Alg2),
            "overlap" => Some(SolverKind::Overlap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Outer stopping rule met.
    Converged,
    /// Outer iteration limit reached; the last iterate is still reported.
    IterationLimit,
    /// Zero threshold: no information power needed.
    ZeroThreshold,
    /// The secrecy constraint could not be met by the inner step.
    Infeasible,
    /// The minimum-power covariance needs more than the total budget.
    ExceedsPowerBudget,
    /// The barrier solver stopped without reaching its tolerance.
    InnerNotConverged,
    /// No rank-one waveform candidate met the secrecy constraint.
    NoFeasibleCandidate,
}

impl SolveStatus {
    pub fn is_feasible(self) -> bool {
        matches!(
            self,
            SolveStatus::Converged | SolveStatus::IterationLimit | SolveStatus::ZeroThreshold
        )
    }
}

/// One row of the outer-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `tr(Q_c)` after the inner step (orthogonal resources).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_q: Option<f64>,
    /// Surrogate objective after the inner step (shared resources).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    /// Multiplier of the secrecy constraint.
    pub lambda: f64,
    /// Threshold minus surrogate constraint value, nats (`<= 0` when met).
    pub g: f64,
    /// True secrecy rate of the iterate, bits.
    pub secrecy: f64,
    /// Radar SINR the iterate would give, linear.
    pub sinr: f64,
}

/// Extra diagnostics of the shared-resource solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapDiagnostics {
    /// `tr(S̄_r)` of the relaxed radar Gram matrix.
    pub trace_s: f64,
    /// `λ_2/λ_1` of the relaxed radar Gram matrix.
    pub eig_ratio: f64,
    /// SINR of the relaxed solution, an upper bound on the extracted one.
    pub relaxed_sinr: f64,
    /// Block secrecy rate divided by the block length.
    pub secrecy_per_use: f64,
    /// Largest surrogate-versus-true gap seen right after an auxiliary update.
    pub max_surrogate_gap: f64,
    pub rank_one_exact: bool,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solver: SolverKind,
    pub r_m: f64,
    pub q_c: CMat,
    pub p_r: f64,
    pub s_r: CVec,
    /// Linear SINR at the radar receiver.
    pub sinr: f64,
    /// Bits per use (orthogonal resources) or per block (shared resources).
    pub achieved_secrecy: f64,
    pub feasible: bool,
    pub status: SolveStatus,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub history: Vec<IterationRecord>,
    pub overlap: Option<OverlapDiagnostics>,
}

/// `(H_d Q H_d^H + σ_r² I)^{-1}`.
pub fn update_y(h_d: &CMat, q_c: &CMat, sigma2_r: f64) -> Result<CMat> {
    linalg::ensure_psd(q_c, "q_c")?;
    let n = h_d.nrows();
    let a = h_d * q_c * h_d.adjoint() + linalg::identity(n).scale(sigma2_r);
    Ok(linalg::hermitian_part(&linalg::inverse_pd(&a)?))
}

/// Minimizer of the Lagrangian over `Q ⪰ 0` for a fixed multiplier.
#[derive(Debug, Clone)]
pub struct WaterfillSolution {
    pub lambda: f64,
    /// `P = I + λ H_d^H Y H_d`.
    pub p_mat: CMat,
    /// Right singular vectors of `H_c P^{-1/2}` for the retained values.
    pub v_mat: CMat,
    /// Left singular vectors matching `v_mat`.
    pub u_mat: CMat,
    /// Singular values, descending, `min(M, N_t)` of them.
    pub d_vals: Vec<f64>,
    pub mu_vals: Vec<f64>,
    pub q_c: CMat,
}

impl WaterfillSolution {
    /// Largest off-diagonal magnitude of `U^H (G Q̃ G^H + σ_c² I) U` with
    /// `G = H_c P^{-1/2}` and `Q̃ = P^{1/2} Q P^{1/2}`, relative to its diagonal.
    pub fn hadamard_offdiag(&self, h_c: &CMat, sigma2_c: f64) -> Result<f64> {
        let p_half = linalg::sqrt_psd(&self.p_mat);
        let inv_half = linalg::inv_sqrt_pd(&self.p_mat)?;
        let g = h_c * &inv_half;
        let q_tilde = &p_half * &self.q_c * &p_half;
        let r = self.d_vals.len();
        let k = self.u_mat.adjoint() * (&g * q_tilde * g.adjoint()) * &self.u_mat + linalg::identity(r).scale(sigma2_c);
        let diag = (0..r).map(|i| k[(i, i)].norm()).fold(0.0, f64::max);
        let mut off = 0.0_f64;
        for i in 0..r {
            for j in 0..r {
                if i != j {
                    off = off.max(k[(i, j)].norm());
                }
            }
        }
        Ok(off / diag.max(1e-300))
    }
}

pub fn waterfill_qc(lambda: f64, y_mat: &CMat, h_c: &CMat, h_d: &CMat, sigma2_c: f64) -> Result<WaterfillSolution> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Dimension(format!("multiplier must be finite and non-negative, got {lambda}")));
    }
    let nt = h_c.ncols();
    let p_mat = linalg::hermitian_part(&(linalg::identity(nt) + (h_d.adjoint() * y_mat * h_d).scale(lambda)));
    let inv_half = linalg::inv_sqrt_pd(&p_mat)?;
    let g = h_c * &inv_half;
    let svd = g.svd(true, true);
    let u_full = svd.u.ok_or_else(|| Error::Dimension("svd returned no left vectors".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Dimension("svd returned no right vectors".into()))?;
    let r = h_c.nrows().min(nt);

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order.truncate(r);

    let mut v_mat = CMat::zeros(nt, r);
    let mut u_mat = CMat::zeros(h_c.nrows(), r);
    let mut d_vals = Vec::with_capacity(r);
    let mut mu_vals = Vec::with_capacity(r);
    let mut q_tilde = CMat::zeros(nt, nt);
    for (col, &k) in order.iter().enumerate() {
        let d = svd.singular_values[k];
        let v = v_t.row(k).adjoint();
        v_mat.set_column(col, &v);
        u_mat.set_column(col, &u_full.column(k));
        let mu = if d > 0.0 { (lambda - sigma2_c / (d * d)).max(0.0) } else { 0.0 };
        if mu > 0.0 {
            q_tilde += (&v * v.adjoint()).scale(mu);
        }
        d_vals.push(d);
        mu_vals.push(mu);
    }
    let q_c = linalg::hermitian_part(&(&inv_half * q_tilde * &inv_half));
    Ok(WaterfillSolution {
        lambda,
        p_mat,
        v_mat,
        u_mat,
        d_vals,
        mu_vals,
        q_c,
    })
}

/// Value of the variational constraint function at `(Y, Q)`, nats:
/// `ln det(H_c Q H_c^H + σ_c² I) - tr(Y (H_d Q H_d^H + σ_r² I)) + ln det Y + N̄`.
fn surrogate_secrecy(
    h_c: &CMat,
    h_d: &CMat,
    y_mat: &CMat,
    q_c: &CMat,
    params: &SecrecyConstraintParams,
    sigma2_c: f64,
    sigma2_r: f64,
) -> Result<f64> {
    Ok(convex::min_trace::constraint_slack(h_c, h_d, y_mat, q_c, params, sigma2_c, sigma2_r)? + params.r_bar)
}

/// `tr Q + λ (r̄ - surrogate(Y, Q))`.
#[allow(clippy::too_many_arguments)]
pub fn lagrangian(
    q_c: &CMat,
    lambda: f64,
    y_mat: &CMat,
    h_c: &CMat,
    h_d: &CMat,
    params: &SecrecyConstraintParams,
    sigma2_c: f64,
    sigma2_r: f64,
) -> Result<f64> {
    let s = surrogate_secrecy(h_c, h_d, y_mat, q_c, params, sigma2_c, sigma2_r)?;
    Ok(linalg::trace_re(q_c) + lambda * (params.r_bar - s))
}

/// Constraint violation at the water-filling covariance for `λ`.
pub fn g_lambda(
    lambda: f64,
    y_mat: &CMat,
    h_c: &CMat,
    h_d: &CMat,
    params: &SecrecyConstraintParams,
    sigma2_c: f64,
    sigma2_r: f64,
) -> Result<f64> {
    let wf = waterfill_qc(lambda, y_mat, h_c, h_d, sigma2_c)?;
    g_at(&wf.q_c, y_mat, h_c, h_d, params, sigma2_c, sigma2_r)
}

fn g_at(
    q_c: &CMat,
    y_mat: &CMat,
    h_c: &CMat,
    h_d: &CMat,
    params: &SecrecyConstraintParams,
    sigma2_c: f64,
    sigma2_r: f64,
) -> Result<f64> {
    Ok(params.r_bar - surrogate_secrecy(h_c, h_d, y_mat, q_c, params, sigma2_c, sigma2_r)?)
}

/// Stopping rules of [`bisect_lambda`].
///
/// The defaults run the bisection to round-off. Anything looser leaves noise
/// of the order of the tolerance in `tr(Q_c)`, which shows up as spurious
/// increases of the outer trace sequence once the alternation has settled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOptions {
    /// Stop once `|g| <= g_tol` on the feasible side.
    pub g_tol: f64,
    /// Stop once the bracket is narrower than `interval_tol * max(1, λ_max)`.
    pub interval_tol: f64,
    pub bracket_cap: f64,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        Self {
            g_tol: 1e-12,
            interval_tol: 1e-15,
            bracket_cap: DEFAULT_BRACKET_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BisectionOutcome {
    pub lambda: f64,
    pub g: f64,
    /// Water-filling evaluations spent, bracketing included.
    pub evaluations: usize,
    pub waterfill: WaterfillSolution,
}

/// Root of `g` by doubling from `[0, 1]` then bisecting.
///
/// Only a sign change is needed, not monotonicity. Unless `|g| <= g_tol` is
/// hit exactly, the returned point is the upper bracket end, on which
/// `g <= 0` always holds, so the returned covariance meets the surrogate
/// constraint.
#[allow(clippy::too_many_arguments)]
pub fn bisect_lambda(
    y_mat: &CMat,
    h_c: &CMat,
    h_d: &CMat,
    params: &SecrecyConstraintParams,
    sigma2_c: f64,
    sigma2_r: f64,
    opts: &BisectionOptions,
) -> Result<BisectionOutcome> {
    let mut evaluations = 0usize;
    let mut eval = |lambda: f64| -> Result<(f64, WaterfillSolution)> {
        evaluations += 1;
        let wf = waterfill_qc(lambda, y_mat, h_c, h_d, sigma2_c)?;
        let g = g_at(&wf.q_c, y_mat, h_c, h_d, params, sigma2_c, sigma2_r)?;
        Ok((g, wf))
    };

    let (g_lo, wf_lo) = eval(0.0)?;
    if g_lo <= 0.0 {
        return Ok(BisectionOutcome {
            lambda: 0.0,
            g: g_lo,
            evaluations,
            waterfill: wf_lo,
        });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let (mut g_hi, mut wf_hi) = eval(hi)?;
    while g_lo * g_hi >= 0.0 {
        if g_hi == 0.0 {
            break;
        }
        hi *= 2.0;
        if hi > opts.bracket_cap {
            return Err(Error::Infeasible(format!(
                "no sign change of the secrecy constraint up to multiplier {}",
                opts.bracket_cap
            )));
        }
        (g_hi, wf_hi) = eval(hi)?;
    }

    while g_hi.abs() > opts.g_tol && hi - lo > opts.interval_tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (g_mid, wf_mid) = eval(mid)?;
        if g_mid.abs() <= opts.g_tol && g_mid <= 0.0 {
            g_hi = g_mid;
            wf_hi = wf_mid;
            hi = mid;
            break;
        }
        if g_mid * g_hi < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            g_hi = g_mid;
            wf_hi = wf_mid;
        }
    }
    Ok(BisectionOutcome {
        lambda: hi,
        g: g_hi,
        evaluations,
        waterfill: wf_hi,
    })
}

/// Everything the orthogonal-resource solvers need for one instance.
#[derive(Debug, Clone, Copy)]
pub struct NonOverlapProblem<'a> {
    pub cfg: &'a ScenarioConfig,
    pub ops: &'a RadarOperators,
    pub chan: &'a ChannelRealization,
    pub params: SecrecyConstraintParams,
}

impl<'a> NonOverlapProblem<'a> {
    pub fn new(
        cfg: &'a ScenarioConfig,
        ops: &'a RadarOperators,
        chan: &'a ChannelRealization,
        r_m: f64,
    ) -> Result<Self> {
        let params = SecrecyConstraintParams::new(r_m, cfg.n_rr, cfg.n_cr, cfg.sigma2_r, cfg.sigma2_c)?;
        Ok(Self { cfg, ops, chan, params })
    }

    fn secrecy_bits(&self, q_c: &CMat) -> Result<f64> {
        secrecy::secrecy_capacity(&self.chan.h_c, &self.chan.h_d, q_c, self.cfg.sigma2_c, self.cfg.sigma2_r)
    }
}

/// Result of one inner step.
struct InnerStep {
    q_c: CMat,
    lambda: f64,
    iters: usize,
}

/// Radar power split and waveform for a given information covariance.
fn finalize(
    prob: &NonOverlapProblem<'_>,
    solver: SolverKind,
    q_c: CMat,
    status: SolveStatus,
    outer_iters: usize,
    inner_iters_total: usize,
    history: Vec<IterationRecord>,
) -> Result<SolveResult> {
    let p_total = prob.cfg.p_total;
    let feasible = status.is_feasible();
    let (q_c, achieved) = if feasible {
        let s = prob.secrecy_bits(&q_c)?;
        (q_c, s)
    } else {
        (CMat::zeros(prob.cfg.n_tx, prob.cfg.n_tx), 0.0)
    };
    let p_r = (p_total - linalg::trace_re(&q_c)).max(0.0);
    let wave = radar::optimal_waveform(prob.ops, p_r)?;
    let sinr = radar::sinr_nonoverlap(prob.ops, &wave.s_r, prob.cfg.sigma2_r)?;
    Ok(SolveResult {
        solver,
        r_m: prob.params.r_m,
        q_c,
        p_r,
        s_r: wave.s_r,
        sinr,
        achieved_secrecy: achieved,
        feasible,
        status,
        outer_iters,
        inner_iters_total,
        history,
        overlap: None,
    })
}

fn alternate(
    prob: &NonOverlapProblem<'_>,
    solver: SolverKind,
    opts: &SolverOptions,
    mut inner: impl FnMut(&CMat) -> Result<InnerStep>,
) -> Result<SolveResult> {
    let cfg = prob.cfg;
    let nt = cfg.n_tx;
    if prob.params.r_m == 0.0 {
        return finalize(prob, solver, CMat::zeros(nt, nt), SolveStatus::ZeroThreshold, 0, 0, Vec::new());
    }
    let lambda_max = linalg::eigvalsh(&radar::waveform_operator(prob.ops)?)[0];
    let mut q = linalg::identity(nt).scale(cfg.p_total / (2.0 * nt as f64));
    let mut prev_trace = linalg::trace_re(&q);
    let mut history = Vec::new();
    let mut inner_total = 0usize;
    let mut status = SolveStatus::IterationLimit;
    let mut outer = 0usize;

    for iter in 1..=opts.max_outer_iters {
        outer = iter;
        let y = update_y(&prob.chan.h_d, &q, cfg.sigma2_r)?;
        let step = match inner(&y) {
            Ok(step) => step,
            Err(Error::Infeasible(msg)) => {
                log::debug!("{} infeasible at outer iteration {iter}: {msg}", solver.tag());
                return finalize(prob, solver, q, SolveStatus::Infeasible, outer, inner_total, history);
            }
            Err(Error::NotConverged(msg)) => {
                log::debug!("{} inner solve stalled at outer iteration {iter}: {msg}", solver.tag());
                return finalize(prob, solver, q, SolveStatus::InnerNotConverged, outer, inner_total, history);
            }
            Err(e) => return Err(e),
        };
        inner_total += step.iters;
        q = step.q_c;
        let trace = linalg::trace_re(&q);
        let g = g_at(&q, &y, &prob.chan.h_c, &prob.chan.h_d, &prob.params, cfg.sigma2_c, cfg.sigma2_r)?;
        history.push(IterationRecord {
            iteration: iter,
            trace_q: Some(trace),
            objective: None,
            lambda: step.lambda,
            g,
            secrecy: prob.secrecy_bits(&q)?,
            sinr: (cfg.p_total - trace).max(0.0) * lambda_max / cfg.sigma2_r,
        });
        let done = (trace - prev_trace).abs() <= opts.tol;
        prev_trace = trace;
        if done {
            status = SolveStatus::Converged;
            break;
        }
    }
    if linalg::trace_re(&q) > cfg.p_total {
        status = SolveStatus::ExceedsPowerBudget;
    }
    finalize(prob, solver, q, status, outer, inner_total, history)
}

/// Alternating optimization with the water-filling inner step.
pub fn algorithm2(prob: &NonOverlapProblem<'_>, opts: &SolverOptions, bisection: &BisectionOptions) -> Result<SolveResult> {
    let (h_c, h_d) = (&prob.chan.h_c, &prob.chan.h_d);
    let (s_c, s_r) = (prob.cfg.sigma2_c, prob.cfg.sigma2_r);
    alternate(prob, SolverKind::Alg2, opts, |y| {
        let out = bisect_lambda(y, h_c, h_d, &prob.params, s_c, s_r, bisection)?;
        Ok(InnerStep {
            q_c: out.waterfill.q_c,
            lambda: out.lambda,
            iters: out.evaluations,
        })
    })
}

/// Alternating optimization with the barrier-solved inner step.
pub fn algorithm1(prob: &NonOverlapProblem<'_>, opts: &SolverOptions) -> Result<SolveResult> {
    let (h_c, h_d) = (&prob.chan.h_c, &prob.chan.h_d);
    let cfg = prob.cfg;
    alternate(prob, SolverKind::Alg1, opts, |y| {
        let sol =
            convex::solve_min_trace_logdet(h_c, h_d, y, &prob.params, cfg.sigma2_c, cfg.sigma2_r, cfg.p_total, opts)?;
        Ok(InnerStep {
            q_c: sol.q_c.value,
            lambda: sol.lambda,
            iters: sol.newton_iters,
        })
    })
}

/// Secrecy rate of `q_c` minus the threshold, bits.
pub fn secrecy_excess_bits(prob: &NonOverlapProblem<'_>, q_c: &CMat) -> Result<f64> {
    let margin = secrecy::secrecy_margin_nats(&prob.chan.h_c, &prob.chan.h_d, q_c, prob.cfg.sigma2_c, prob.cfg.sigma2_r)?;
    Ok(margin / LN_2 - prob.params.r_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, complex_gaussian, identity, random_psd};
    use crate::scenario::{build_operators, sample_channel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64) -> (ScenarioConfig, RadarOperators, ChannelRealization) {
        let cfg = ScenarioConfig::default();
        let ops = build_operators(&cfg);
        let chan = sample_channel(&cfg, seed);
        (cfg, ops, chan)
    }

    #[test]
    fn y_update_inverts_and_makes_bracket_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h_d = complex_gaussian(&mut rng, 4, 4, 1.0);
        let q = random_psd(&mut rng, 4, 2);
        let y = update_y(&h_d, &q, 1.3).unwrap();
        let a = &h_d * &q * h_d.adjoint() + identity(4).scale(1.3);
        assert!(linalg::max_abs_diff(&(&y * &a), &identity(4)) < 1e-10);
        let bracket = secrecy::variational_bracket(&y, &a).unwrap();
        assert!((bracket - linalg::logdet_pd(&y).unwrap()).abs() < 1e-10);
        assert!(linalg::max_abs_diff(&update_y(&h_d, &CMat::zeros(4, 4), 1.0).unwrap(), &identity(4)) < 1e-15);
    }

    #[test]
    fn small_multiplier_gives_zero_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h_c = complex_gaussian(&mut rng, 4, 4, 1.0);
        let h_d = complex_gaussian(&mut rng, 4, 4, 1.0);
        let y = identity(4);
        // P ⪰ I, so the singular values only shrink as λ grows and the cutoff
        // computed at λ = 0 is conservative.
        let probe = waterfill_qc(0.0, &y, &h_c, &h_d, 1.0).unwrap();
        let lam = 0.99 / probe.d_vals[0].powi(2);
        let wf = waterfill_qc(lam, &y, &h_c, &h_d, 1.0).unwrap();
        assert!(lam <= 1.0 / wf.d_vals[0].powi(2));
        assert_eq!(linalg::max_abs(&wf.q_c), 0.0);
        assert!(wf.d_vals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn scalar_closed_form() {
        let h_c = CMat::from_element(1, 1, c(0.8, -0.6));
        let h_d = CMat::from_element(1, 1, c(0.3, 0.4));
        let y = CMat::from_element(1, 1, c(0.7, 0.0));
        let lambda: f64 = 3.0;
        let sigma2_c: f64 = 0.5;
        let p = 1.0 + lambda * 0.25 * 0.7;
        let d2 = 1.0 / p;
        let expected = (lambda - sigma2_c / d2).max(0.0) / p;
        let wf = waterfill_qc(lambda, &y, &h_c, &h_d, sigma2_c).unwrap();
        assert!((wf.q_c[(0, 0)].re - expected).abs() < 1e-12);
        assert!(expected > 0.0);
    }

    #[test]
    fn waterfill_beats_random_psd_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h_c = complex_gaussian(&mut rng, 4, 4, 10.0);
        let h_d = complex_gaussian(&mut rng, 4, 4, 2.0);
        let y = update_y(&h_d, &random_psd(&mut rng, 4, 4), 1.0).unwrap();
        let params = SecrecyConstraintParams::new(3.0, 4, 4, 1.0, 1.0).unwrap();
        let lambda = 2.5;
        let wf = waterfill_qc(lambda, &y, &h_c, &h_d, 1.0).unwrap();
        let best = lagrangian(&wf.q_c, lambda, &y, &h_c, &h_d, &params, 1.0, 1.0).unwrap();
        for k in 0..1000 {
            let q = random_psd(&mut rng, 4, 1 + k % 4).scale(0.5 * (k % 7) as f64);
            let v = lagrangian(&q, lambda, &y, &h_c, &h_d, &params, 1.0, 1.0).unwrap();
            assert!(best <= v + 1e-12, "random point {v} beats water-filling {best}");
        }
        assert!(wf.hadamard_offdiag(&h_c, 1.0).unwrap() < 1e-9);
    }

    #[test]
    fn g_at_zero_matches_hand_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h_c = complex_gaussian(&mut rng, 3, 4, 1.0);
        let h_d = complex_gaussian(&mut rng, 5, 4, 1.0);
        let y = update_y(&h_d, &random_psd(&mut rng, 4, 2), 1.7).unwrap();
        let (s_c, s_r) = (0.6, 1.7);
        let params = SecrecyConstraintParams::new(2.0, 5, 3, s_r, s_c).unwrap();
        let g = g_lambda(0.0, &y, &h_c, &h_d, &params, s_c, s_r).unwrap();
        let hand = params.r_bar - linalg::logdet_pd(&y).unwrap() - params.n_bar + s_r * linalg::trace_re(&y)
            - 3.0 * s_c.ln();
        assert!((g - hand).abs() < 1e-10);
        let g2 = g_lambda(0.7, &y, &h_c, &h_d, &params, s_c, s_r).unwrap();
        let g3 = g_lambda(0.7 + 1e-6, &y, &h_c, &h_d, &params, s_c, s_r).unwrap();
        assert!((g2 - g3).abs() < 1e-3);
    }

    #[test]
    fn bisection_finds_active_constraint() {
        let (cfg, _, chan) = instance(5);
        let params = SecrecyConstraintParams::new(2.0, 4, 4, 1.0, 1.0).unwrap();
        let y = identity(4);
        let out = bisect_lambda(&y, &chan.h_c, &chan.h_d, &params, cfg.sigma2_c, cfg.sigma2_r, &BisectionOptions::default())
            .unwrap();
        assert!(out.lambda > 0.0);
        assert!(out.g.abs() <= 1e-6 && out.g <= 0.0, "g = {}", out.g);
    }

    #[test]
    fn bisection_matches_barrier_with_weak_eavesdropper() {
        let (cfg, _, mut chan) = instance(6);
        chan.h_d = chan.h_d.scale(1e-3);
        let params = SecrecyConstraintParams::new(4.0, 4, 4, 1.0, 1.0).unwrap();
        let y = update_y(&chan.h_d, &CMat::zeros(4, 4), 1.0).unwrap();
        let out =
            bisect_lambda(&y, &chan.h_c, &chan.h_d, &params, 1.0, 1.0, &BisectionOptions::default()).unwrap();
        let direct =
            convex::solve_min_trace_logdet(&chan.h_c, &chan.h_d, &y, &params, 1.0, 1.0, cfg.p_total, &SolverOptions::default())
                .unwrap();
        let t_wf = linalg::trace_re(&out.waterfill.q_c);
        assert!((t_wf - direct.q_c.trace()).abs() < 1e-5, "{t_wf} vs {}", direct.q_c.trace());
        assert!(t_wf < 1.0);
    }

    #[test]
    fn zero_threshold_uses_all_power_for_radar() {
        let (cfg, ops, chan) = instance(7);
        let prob = NonOverlapProblem::new(&cfg, &ops, &chan, 0.0).unwrap();
        let lambda_max = linalg::eigvalsh(&radar::waveform_operator(&ops).unwrap())[0];
        for res in [
            algorithm2(&prob, &cfg.solver, &BisectionOptions::default()).unwrap(),
            algorithm1(&prob, &cfg.solver).unwrap(),
        ] {
            assert!(res.feasible);
            assert_eq!(res.p_r, cfg.p_total);
            let expected = cfg.p_total * lambda_max / cfg.sigma2_r;
            assert!((res.sinr - expected).abs() <= 1e-8 * expected);
        }
    }

    #[test]
    fn algorithms_agree_and_meet_threshold() {
        let (cfg, ops, chan) = instance(8);
        let prob = NonOverlapProblem::new(&cfg, &ops, &chan, 2.0).unwrap();
        let a2 = algorithm2(&prob, &cfg.solver, &BisectionOptions::default()).unwrap();
        let a1 = algorithm1(&prob, &cfg.solver).unwrap();
        assert!(a1.feasible && a2.feasible);
        let (t1, t2) = (linalg::trace_re(&a1.q_c), linalg::trace_re(&a2.q_c));
        assert!((t1 - t2).abs() < 1e-3, "{t1} vs {t2}");
        for res in [&a1, &a2] {
            assert!((res.achieved_secrecy - 2.0).abs() <= 1e-3, "{}", res.achieved_secrecy);
            assert!((res.p_r + linalg::trace_re(&res.q_c) - cfg.p_total).abs() < 1e-9);
            let traces: Vec<f64> = res.history.iter().map(|r| r.trace_q.unwrap()).collect();
            assert!(traces.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{traces:?}");
        }
    }
}
