//! Relaxed shared-resource subproblem for fixed auxiliary matrices:
//!
//! `max ln det(C(Q) + D^H S̄ D) - tr(X C(Q))` over `S̄ ⪰ 0, Q ⪰ 0` subject to
//! the linearized block secrecy constraint `g(S̄, Q) >= r̂` and the power
//! budget `tr S̄ + tr Q <= P_T`.

use super::barrier::{self, AffineHermitian, BarrierProblem, ConcaveFn, HermitianLayout, NewtonRecord};
use super::{PsdVariable, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scenario::{build_c_of_q, RadarOperators};

/// Everything the subproblem depends on.
#[derive(Debug, Clone, Copy)]
pub struct OverlapInnerInput<'a> {
    pub ops: &'a RadarOperators,
    pub h_c: &'a CMat,
    pub h_d: &'a CMat,
    /// `X = C(Q)^{-1}` at the previous iterate.
    pub x_mat: &'a CMat,
    /// `Ȳ`, the leakage-side auxiliary matrix.
    pub ybar_mat: &'a CMat,
    /// `Z`, the legitimate-side auxiliary matrix.
    pub z_mat: &'a CMat,
    /// Threshold in nats per block.
    pub r_hat: f64,
    pub p_total: f64,
    pub sigma2_c: f64,
    pub sigma2_r: f64,
    /// Optional warm start `(S̄, Q)`, typically the previous alternating iterate.
    pub start: Option<(&'a CMat, &'a CMat)>,
}

/// Weight kept on the warm start; the rest goes to the default interior
/// point so the start stays strictly inside the cones and the power budget.
const WARM_START_WEIGHT: f64 = 0.99;

#[derive(Debug, Clone)]
pub struct OverlapInnerSolution {
    pub s_bar: PsdVariable,
    pub q_c: PsdVariable,
    pub objective: f64,
    /// Multiplier of the secrecy constraint.
    pub secrecy_multiplier: f64,
    /// Multiplier of the power budget.
    pub power_multiplier: f64,
    /// Larger of the duality-gap bound and the relative Lagrangian-gradient norm.
    pub kkt_residual: f64,
    pub newton_iters: usize,
    pub trace: Vec<NewtonRecord>,
}

fn kron(block_len: usize, m: &CMat) -> CMat {
    linalg::kron_identity(block_len, m)
}

/// `ln det(C(Q) + D^H S̄ D) - tr(X C(Q))`.
pub fn surrogate_objective(input: &OverlapInnerInput<'_>, s_bar: &CMat, q_c: &CMat) -> Result<f64> {
    let cq = build_c_of_q(input.ops, q_c, input.sigma2_r)?;
    let d = &input.ops.d_mat;
    let total = &cq + d.adjoint() * s_bar * d;
    Ok(linalg::logdet_pd(&total)? - linalg::trace_product_re(input.x_mat, &cq))
}

/// Linearized block secrecy expression in nats (before subtracting `r̂`).
pub fn surrogate_constraint(input: &OverlapInnerInput<'_>, s_bar: &CMat, q_c: &CMat) -> Result<f64> {
    let l = input.ops.block_len;
    let hc = kron(l, input.h_c);
    let hd = kron(l, input.h_d);
    let (lm, ln) = (hc.nrows(), hd.nrows());
    let total = s_bar + kron(l, q_c);
    let eye_m = linalg::identity(lm);
    let eye_n = linalg::identity(ln);
    let comm_all = &hc * &total * hc.adjoint() + eye_m.scale(input.sigma2_c);
    let radar_all = &hd * &total * hd.adjoint() + eye_n.scale(input.sigma2_r);
    let radar_wave = &hd * s_bar * hd.adjoint() + eye_n.scale(input.sigma2_r);
    let comm_wave = &hc * s_bar * hc.adjoint() + eye_m.scale(input.sigma2_c);
    Ok(linalg::logdet_pd(&comm_all)? + linalg::logdet_pd(input.ybar_mat)?
        - linalg::trace_product_re(input.ybar_mat, &radar_all)
        + ln as f64
        + linalg::logdet_pd(&radar_wave)?
        + linalg::logdet_pd(input.z_mat)?
        - linalg::trace_product_re(input.z_mat, &comm_wave)
        + lm as f64)
}

fn check_dims(input: &OverlapInnerInput<'_>) -> Result<()> {
    let ops = input.ops;
    let l = ops.block_len;
    let ok = input.h_c.ncols() == ops.n_tx
        && input.h_d.shape() == (ops.n_rr, ops.n_tx)
        && input.x_mat.shape() == (l * ops.n_rr, l * ops.n_rr)
        && input.ybar_mat.shape() == (l * ops.n_rr, l * ops.n_rr)
        && input.z_mat.shape() == (l * input.h_c.nrows(), l * input.h_c.nrows());
    if !ok {
        return Err(Error::Dimension("overlap subproblem inputs have inconsistent sizes".into()));
    }
    if !(input.r_hat >= 0.0) || !(input.p_total > 0.0) {
        return Err(Error::Dimension("need r_hat >= 0 and p_total > 0".into()));
    }
    for (m, name) in [
        (input.x_mat, "x_mat"),
        (input.ybar_mat, "ybar_mat"),
        (input.z_mat, "z_mat"),
    ] {
        linalg::ensure_psd(m, name)?;
    }
    Ok(())
}

/// Solves the relaxed subproblem from the interior point
/// `S̄ = P_T/(20 L N_t) I`, `Q = P_T/(20 N_t) I`, or from a blend of that
/// point with the warm start when one is given.
pub fn solve_overlap_inner(input: &OverlapInnerInput<'_>, opts: &SolverOptions) -> Result<OverlapInnerSolution> {
    check_dims(input)?;
    let ops = input.ops;
    let (l, nt) = (ops.block_len, ops.n_tx);
    let lnt = l * nt;
    let hc = kron(l, input.h_c);
    let hd = kron(l, input.h_d);
    let (lm, ln) = (hc.nrows(), hd.nrows());
    let d = &ops.d_mat;
    let echo = ops.echo_mat();
    let (s_blk, q_blk) = (0, 1);
    let layout = HermitianLayout::new(&[lnt, nt]);

    // Objective.
    let mut obj_ld = AffineHermitian::constant(ops.c_mat.scale(input.sigma2_r));
    obj_ld.add_block_map(&layout, s_blk, |e| d.adjoint() * e * d);
    obj_ld.add_block_map(&layout, q_blk, |e| &echo * kron(l, e) * echo.adjoint());
    let mut objective = ConcaveFn::new(layout.len());
    objective.logdets.push(obj_ld);
    let x_pulled = d * input.x_mat * &echo;
    objective.linear = -layout.inner_product_vector(q_blk, &fold_blocks(&x_pulled, l, nt));
    objective.constant = -input.sigma2_r * linalg::trace_product_re(input.x_mat, &ops.c_mat);

    // Linearized secrecy constraint minus r̂.
    let mut comm_all = AffineHermitian::constant(linalg::identity(lm).scale(input.sigma2_c));
    comm_all.add_block_map(&layout, s_blk, |e| &hc * e * hc.adjoint());
    comm_all.add_block_map(&layout, q_blk, |e| &hc * kron(l, e) * hc.adjoint());
    let mut radar_wave = AffineHermitian::constant(linalg::identity(ln).scale(input.sigma2_r));
    radar_wave.add_block_map(&layout, s_blk, |e| &hd * e * hd.adjoint());
    let mut constraint = ConcaveFn::new(layout.len());
    constraint.logdets.push(comm_all);
    constraint.logdets.push(radar_wave);
    let y_pulled = hd.adjoint() * input.ybar_mat * &hd;
    let z_pulled = hc.adjoint() * input.z_mat * &hc;
    constraint.linear = -layout.inner_product_vector(s_blk, &(&y_pulled + &z_pulled))
        - layout.inner_product_vector(q_blk, &fold_blocks(&y_pulled, l, nt));
    constraint.constant = linalg::logdet_pd(input.ybar_mat)? - input.sigma2_r * linalg::trace_re(input.ybar_mat)
        + ln as f64
        + linalg::logdet_pd(input.z_mat)?
        - input.sigma2_c * linalg::trace_re(input.z_mat)
        + lm as f64
        - input.r_hat;

    let power = layout.trace_vector(s_blk) + layout.trace_vector(q_blk);
    let problem = BarrierProblem {
        objective,
        constraints: vec![constraint],
        linear: vec![(power, input.p_total)],
        layout,
    };
    let mut s0 = linalg::identity(lnt).scale(input.p_total / (20.0 * lnt as f64));
    let mut q0 = linalg::identity(nt).scale(input.p_total / (20.0 * nt as f64));
    if let Some((s_prev, q_prev)) = input.start {
        if s_prev.shape() != (lnt, lnt) || q_prev.shape() != (nt, nt) {
            return Err(Error::Dimension("warm start has the wrong block sizes".into()));
        }
        let w = WARM_START_WEIGHT;
        let budget = linalg::trace_re(s_prev) + linalg::trace_re(q_prev);
        // Pull an over-budget start back onto the budget before blending.
        let shrink = if budget > input.p_total { input.p_total / budget } else { 1.0 };
        s0 = linalg::hermitian_part(&(s_prev.scale(w * shrink) + s0.scale(1.0 - w)));
        q0 = linalg::hermitian_part(&(q_prev.scale(w * shrink) + q0.scale(1.0 - w)));
    }
    let x0 = problem.layout.pack(&[&s0, &q0]);
    let sol = barrier::solve(&problem, &x0, opts)?;
    let s_bar = problem.layout.unpack_block(&sol.x, s_blk);
    let q_c = problem.layout.unpack_block(&sol.x, q_blk);
    Ok(OverlapInnerSolution {
        s_bar: PsdVariable { value: s_bar, dim: lnt },
        q_c: PsdVariable { value: q_c, dim: nt },
        objective: sol.objective,
        secrecy_multiplier: sol.multipliers[0],
        power_multiplier: sol.linear_multipliers[0],
        kkt_residual: sol.gap_bound.max(sol.stationarity),
        newton_iters: sol.newton_iters,
        trace: sol.trace,
    })
}

/// `Σ_l G_ll` for an `L n x L n` matrix: the adjoint of `Q -> I_L ⊗ Q`
/// under the trace inner product.
fn fold_blocks(g: &CMat, block_len: usize, n: usize) -> CMat {
    let mut out = CMat::zeros(n, n);
    for l in 0..block_len {
        out += g.view((l * n, l * n), (n, n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, random_psd};
    use crate::scenario::{build_operators, sample_channel, ScenarioConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn folding_is_the_kron_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_psd(&mut rng, 6, 6);
        let q = random_psd(&mut rng, 2, 2);
        let lhs = linalg::trace_product_re(&g, &kron(3, &q));
        let rhs = linalg::trace_product_re(&fold_blocks(&g, 3, 2), &q);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    struct Fixture {
        cfg: ScenarioConfig,
        ops: RadarOperators,
        h_c: CMat,
        h_d: CMat,
        x: CMat,
        y: CMat,
        z: CMat,
    }

    fn fixture() -> Fixture {
        let cfg = ScenarioConfig::overlap_default();
        let ops = build_operators(&cfg);
        let ch = sample_channel(&cfg, 11);
        let l = cfg.block_len;
        let x = linalg::inverse_pd(&build_c_of_q(&ops, &CMat::zeros(2, 2), 1.0).unwrap()).unwrap();
        Fixture {
            y: identity(l * cfg.n_rr),
            z: identity(l * cfg.n_cr),
            x,
            h_c: ch.h_c,
            h_d: ch.h_d,
            ops,
            cfg,
        }
    }

    fn input<'a>(f: &'a Fixture, r_hat: f64, p_total: f64) -> OverlapInnerInput<'a> {
        OverlapInnerInput {
            ops: &f.ops,
            h_c: &f.h_c,
            h_d: &f.h_d,
            x_mat: &f.x,
            ybar_mat: &f.y,
            z_mat: &f.z,
            r_hat,
            p_total,
            sigma2_c: f.cfg.sigma2_c,
            sigma2_r: f.cfg.sigma2_r,
            start: None,
        }
    }

    #[test]
    fn assembled_program_matches_direct_evaluation() {
        let f = fixture();
        let inp = input(&f, 0.0, 1.0);
        let sol = solve_overlap_inner(&inp, &SolverOptions::default()).unwrap();
        let direct = surrogate_objective(&inp, &sol.s_bar.value, &sol.q_c.value).unwrap();
        assert!((direct - sol.objective).abs() < 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn beats_random_feasible_points_under_tiny_budget() {
        let f = fixture();
        let p = 0.05;
        let inp = input(&f, 0.0, p);
        let sol = solve_overlap_inner(&inp, &SolverOptions::default()).unwrap();
        assert!(sol.kkt_residual < 1e-5, "kkt {}", sol.kkt_residual);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let s = random_psd(&mut rng, 6, 3);
            let q = random_psd(&mut rng, 2, 2);
            let scale = p / (linalg::trace_re(&s) + linalg::trace_re(&q));
            let (s, q) = (s.scale(scale), q.scale(scale));
            if surrogate_constraint(&inp, &s, &q).unwrap() < 0.0 {
                continue;
            }
            assert!(surrogate_objective(&inp, &s, &q).unwrap() <= sol.objective + 1e-9);
        }
    }

    #[test]
    fn inactive_constraint_has_vanishing_multiplier() {
        let f = fixture();
        let inp = input(&f, 0.0, 30.0);
        let sol = solve_overlap_inner(&inp, &SolverOptions::default()).unwrap();
        let slack = surrogate_constraint(&inp, &sol.s_bar.value, &sol.q_c.value).unwrap();
        if slack > 1e-3 {
            assert!(sol.secrecy_multiplier < 1e-5);
        }
        assert!(sol.s_bar.trace() + sol.q_c.trace() <= 30.0 + 1e-6);
    }
}
