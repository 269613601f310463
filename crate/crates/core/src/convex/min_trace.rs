//! Minimum-power information covariance under the variational secrecy
//! constraint:
//!
//! `min tr Q  s.t.  ln det(H_c Q H_c^H + σ_c² I) - tr(Y (H_d Q H_d^H + σ_r² I))
//!  + ln det Y + N̄ >= r̄,  Q ⪰ 0`.

use super::barrier::{self, AffineHermitian, BarrierProblem, ConcaveFn, HermitianLayout, NewtonRecord};
use super::{PsdVariable, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::secrecy::SecrecyConstraintParams;

/// Power cap used to bound the feasibility search.
pub const POWER_CAP: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct MinTraceSolution {
    pub q_c: PsdVariable,
    /// Multiplier of the secrecy constraint.
    pub lambda: f64,
    pub gap_bound: f64,
    pub newton_iters: usize,
    pub trace: Vec<NewtonRecord>,
}

/// Value of the variational constraint function minus `r̄` (nats).
pub fn constraint_slack(
    h_c: &CMat,
    h_d: &CMat,
    y: &CMat,
    q_c: &CMat,
    params: &SecrecyConstraintParams,
    sigma2_c: f64,
    sigma2_r: f64,
) -> Result<f64> {
    let m = h_c.nrows();
    let n = h_d.nrows();
    let comm = h_c * q_c * h_c.adjoint() + linalg::identity(m).scale(sigma2_c);
    let radar = h_d * q_c * h_d.adjoint() + linalg::identity(n).scale(sigma2_r);
    Ok(linalg::logdet_pd(&comm)? - linalg::trace_product_re(y, &radar) + linalg::logdet_pd(y)? + params.n_bar
        - params.r_bar)
}

/// Solves the minimum-trace program for fixed `Y` by the barrier method,
/// starting from `Q = P_T/(10 N_t) I`.
pub fn solve_min_trace_logdet(
    h_c: &CMat,
    h_d: &CMat,
    y: &CMat,
    params: &SecrecyConstraintParams,
    sigma2_c: f64,
    sigma2_r: f64,
    p_total: f64,
    opts: &SolverOptions,
) -> Result<MinTraceSolution> {
    let nt = h_c.ncols();
    let (m, n) = (h_c.nrows(), h_d.nrows());
    if h_d.ncols() != nt || y.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "expected H_d with {nt} columns and Y of size {n}x{n}"
        )));
    }
    linalg::ensure_hermitian(y, "y")?;

    let layout = HermitianLayout::new(&[nt]);
    let mut objective = ConcaveFn::new(layout.len());
    objective.linear = -layout.trace_vector(0);

    let mut comm = AffineHermitian::constant(linalg::identity(m).scale(sigma2_c));
    comm.add_block_map(&layout, 0, |e| h_c * e * h_c.adjoint());
    let mut constraint = ConcaveFn::new(layout.len());
    constraint.logdets.push(comm);
    let leak = h_d.adjoint() * y * h_d;
    constraint.linear = -layout.inner_product_vector(0, &leak);
    constraint.constant = -sigma2_r * linalg::trace_re(y) + linalg::logdet_pd(y)? + params.n_bar - params.r_bar;

    let problem = BarrierProblem {
        objective,
        constraints: vec![constraint],
        linear: vec![(layout.trace_vector(0), POWER_CAP)],
        layout,
    };
    let start = linalg::identity(nt).scale(p_total / (10.0 * nt as f64));
    let x0 = problem.layout.pack(&[&start]);
    let sol = barrier::solve(&problem, &x0, opts)?;
    let q = problem.layout.unpack_block(&sol.x, 0);
    Ok(MinTraceSolution {
        q_c: PsdVariable { value: q, dim: nt },
        lambda: sol.multipliers[0],
        gap_bound: sol.gap_bound,
        newton_iters: sol.newton_iters,
        trace: sol.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, identity};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// With `H_c = I`, no leakage (`H_d = 0`) and `Y = I/σ_r²`, the constraint is
    /// `Σ ln(q_i + 1) >= r̄`, whose minimum-trace solution is `q_i = e^{r̄/n} - 1`.
    #[test]
    fn isotropic_closed_form() {
        let nt = 3;
        let params = SecrecyConstraintParams::new(3.0, nt, nt, 1.0, 1.0).unwrap();
        let sol = solve_min_trace_logdet(
            &identity(nt),
            &CMat::zeros(nt, nt),
            &identity(nt),
            &params,
            1.0,
            1.0,
            30.0,
            &SolverOptions::default(),
        )
        .unwrap();
        let q = (params.r_bar / nt as f64).exp() - 1.0;
        assert!(linalg::max_abs_diff(&sol.q_c.value, &identity(nt).scale(q)) < 1e-6);
        // Multiplier solves 1 = λ/(q+1).
        assert!((sol.lambda - (q + 1.0)).abs() < 1e-5);
    }

    #[test]
    fn constraint_is_active_at_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h_c = complex_gaussian(&mut rng, 4, 4, 1.0);
        let h_d = complex_gaussian(&mut rng, 4, 4, 0.3);
        let y = identity(4);
        let params = SecrecyConstraintParams::new(2.0, 4, 4, 1.0, 1.0).unwrap();
        let sol =
            solve_min_trace_logdet(&h_c, &h_d, &y, &params, 1.0, 1.0, 30.0, &SolverOptions::default()).unwrap();
        let slack = constraint_slack(&h_c, &h_d, &y, &sol.q_c.value, &params, 1.0, 1.0).unwrap();
        assert!(slack > -1e-9 && slack < 1e-6, "slack {slack}");
        assert!(sol.lambda > 0.0);
    }
}
