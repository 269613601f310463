//! Log-barrier interior-point method for concave log-det programs.
//!
//! Variables are a list of Hermitian blocks packed into one real vector
//! (diagonal entries first, then the real and imaginary parts of each
//! strictly upper entry). Every concave function handled here is a sum of
//! `ln det(base + Σ_j x_j C_j)` terms, a linear term and a constant, so
//! gradients and Hessians come out in closed form:
//! `∂_j = Re tr(G_j)` and `∂_jk = -Re tr(G_j G_k)` with
//! `G_j = L^{-1} C_j L^{-H}` for the Cholesky factor `L` of the argument.
//!
//! The solver maximizes `f_0(x)` subject to `f_i(x) >= 0`, all blocks PSD,
//! and linear inequalities `a^T x <= b`. An infeasible start triggers a
//! phase I that maximizes the violated constraint until it turns positive.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::SolverOptions;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

type RVec = DVector<f64>;
type RMat = DMatrix<f64>;

/// Constraint value a feasibility search aims for before optimizing.
const PHASE_ONE_MARGIN: f64 = 1e-3;

/// Newton decrement below which full steps are taken unconditionally.
const QUADRATIC_REGION: f64 = 0.25;

/// Packing of a list of Hermitian blocks into a real parameter vector.
#[derive(Debug, Clone)]
pub struct HermitianLayout {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
}

impl HermitianLayout {
    pub fn new(dims: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut len = 0;
        for &d in dims {
            offsets.push(len);
            len += d * d;
        }
        Self {
            dims: dims.to_vec(),
            offsets,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn block_range(&self, k: usize) -> Range<usize> {
        let d = self.dims[k];
        self.offsets[k]..self.offsets[k] + d * d
    }

    /// Basis matrices of block `k` in parameter order.
    pub fn basis(&self, k: usize) -> Vec<CMat> {
        let n = self.dims[k];
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            let mut e = CMat::zeros(n, n);
            e[(i, i)] = c(1.0, 0.0);
            out.push(e);
        }
        for i in 0..n {
            for j in i + 1..n {
                let mut re = CMat::zeros(n, n);
                re[(i, j)] = c(1.0, 0.0);
                re[(j, i)] = c(1.0, 0.0);
                out.push(re);
                let mut im = CMat::zeros(n, n);
                im[(i, j)] = c(0.0, 1.0);
                im[(j, i)] = c(0.0, -1.0);
                out.push(im);
            }
        }
        out
    }

    pub fn pack(&self, blocks: &[&CMat]) -> RVec {
        let mut x = RVec::zeros(self.len);
        for (k, m) in blocks.iter().enumerate() {
            let n = self.dims[k];
            let mut p = self.offsets[k];
            for i in 0..n {
                x[p] = m[(i, i)].re;
                p += 1;
            }
            for i in 0..n {
                for j in i + 1..n {
                    let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
                    x[p] = z.re;
                    x[p + 1] = z.im;
                    p += 2;
                }
            }
        }
        x
    }

    pub fn unpack_block(&self, x: &RVec, k: usize) -> CMat {
        let n = self.dims[k];
        let mut m = CMat::zeros(n, n);
        let mut p = self.offsets[k];
        for i in 0..n {
            m[(i, i)] = c(x[p], 0.0);
            p += 1;
        }
        for i in 0..n {
            for j in i + 1..n {
                m[(i, j)] = c(x[p], x[p + 1]);
                m[(j, i)] = c(x[p], -x[p + 1]);
                p += 2;
            }
        }
        m
    }

    /// Coefficient vector of `tr(X_k)`.
    pub fn trace_vector(&self, k: usize) -> RVec {
        let mut v = RVec::zeros(self.len);
        for i in 0..self.dims[k] {
            v[self.offsets[k] + i] = 1.0;
        }
        v
    }

    /// Coefficient vector of `Re tr(G X_k)` for Hermitian `G`.
    pub fn inner_product_vector(&self, k: usize, g: &CMat) -> RVec {
        let mut v = RVec::zeros(self.len);
        for (idx, e) in self.basis(k).iter().enumerate() {
            v[self.offsets[k] + idx] = linalg::trace_product_re(g, e);
        }
        v
    }
}

/// `M(x) = base + Σ_j x_j C_j` with Hermitian coefficients.
#[derive(Debug, Clone)]
pub struct AffineHermitian {
    base: CMat,
    coeffs: Vec<(usize, CMat)>,
}

impl AffineHermitian {
    pub fn constant(base: CMat) -> Self {
        Self {
            base,
            coeffs: Vec::new(),
        }
    }

    /// Adds the dependence `map(X_k)` for a linear map on block `k`.
    pub fn add_block_map(&mut self, layout: &HermitianLayout, k: usize, map: impl Fn(&CMat) -> CMat) {
        let start = layout.block_range(k).start;
        for (idx, e) in layout.basis(k).iter().enumerate() {
            self.coeffs.push((start + idx, linalg::hermitian_part(&map(e))));
        }
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    pub fn eval(&self, x: &RVec) -> CMat {
        let mut m = self.base.clone();
        for (j, cj) in &self.coeffs {
            if x[*j] != 0.0 {
                m += cj.scale(x[*j]);
            }
        }
        m
    }
}

/// `Σ ln det M_i(x) + a^T x + b`.
#[derive(Debug, Clone)]
pub struct ConcaveFn {
    pub logdets: Vec<AffineHermitian>,
    pub linear: RVec,
    pub constant: f64,
}

struct Derivs {
    value: f64,
    grad: RVec,
    hess: RMat,
}

impl ConcaveFn {
    pub fn new(len: usize) -> Self {
        Self {
            logdets: Vec::new(),
            linear: RVec::zeros(len),
            constant: 0.0,
        }
    }

    /// `None` outside the domain (some log-det argument not positive definite).
    pub fn value(&self, x: &RVec) -> Option<f64> {
        let mut v = self.linear.dot(x) + self.constant;
        for term in &self.logdets {
            let chol = linalg::cholesky(&term.eval(x)).ok()?;
            v += linalg::logdet_from_cholesky(&chol);
        }
        v.is_finite().then_some(v)
    }

    fn derivs(&self, x: &RVec) -> Option<Derivs> {
        let n = x.len();
        let mut value = self.linear.dot(x) + self.constant;
        let mut grad = self.linear.clone();
        let mut hess = RMat::zeros(n, n);
        for term in &self.logdets {
            let m = term.eval(x);
            let chol = linalg::cholesky(&m).ok()?;
            value += linalg::logdet_from_cholesky(&chol);
            let l_inv = chol
                .l()
                .solve_lower_triangular(&linalg::identity(m.nrows()))?;
            let dim = m.nrows();
            // Rows of `flat` hold [Re G_j, Im G_j] so that F F^T = Re tr(G_j G_k).
            let mut flat = RMat::zeros(term.coeffs.len(), 2 * dim * dim);
            for (row, (j, cj)) in term.coeffs.iter().enumerate() {
                let g = &l_inv * cj * l_inv.adjoint();
                grad[*j] += linalg::trace_re(&g);
                for (p, z) in g.iter().enumerate() {
                    flat[(row, 2 * p)] = z.re;
                    flat[(row, 2 * p + 1)] = z.im;
                }
            }
            let gram = &flat * flat.transpose();
            for (a, (ja, _)) in term.coeffs.iter().enumerate() {
                for (b, (jb, _)) in term.coeffs.iter().enumerate() {
                    hess[(*ja, *jb)] -= gram[(a, b)];
                }
            }
        }
        value.is_finite().then_some(Derivs { value, grad, hess })
    }
}

/// `ln det X_k` for block `k`, the PSD barrier of one variable.
pub fn block_logdet(layout: &HermitianLayout, k: usize) -> ConcaveFn {
    let d = layout.dims()[k];
    let mut term = AffineHermitian::constant(CMat::zeros(d, d));
    term.add_block_map(layout, k, |e| e.clone());
    let mut f = ConcaveFn::new(layout.len());
    f.logdets.push(term);
    f
}

/// `maximize f_0 s.t. f_i >= 0, a_l^T x <= b_l, X_k ⪰ 0`.
#[derive(Debug, Clone)]
pub struct BarrierProblem {
    pub layout: HermitianLayout,
    pub objective: ConcaveFn,
    pub constraints: Vec<ConcaveFn>,
    pub linear: Vec<(RVec, f64)>,
}

/// One accepted Newton step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonRecord {
    /// 1 for the feasibility phase, 2 for the optimality phase.
    pub phase: u8,
    pub stage: usize,
    pub iter: usize,
    pub t: f64,
    pub barrier_value: f64,
    pub objective: f64,
    pub min_slack: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct BarrierSolution {
    pub x: RVec,
    pub objective: f64,
    /// Final barrier parameter.
    pub t: f64,
    /// `1 / (t f_i(x))` for each concave constraint.
    pub multipliers: Vec<f64>,
    /// `1 / (t (b_l - a_l^T x))` for each linear constraint.
    pub linear_multipliers: Vec<f64>,
    /// Bound `ν/t` on the duality gap.
    pub gap_bound: f64,
    /// Lagrangian gradient `∇φ_t / t` at the last iterate, measured in the
    /// dual norm of the scaled Hessian `∇²φ_t / t` (the Newton decrement over `√t`).
    pub stationarity: f64,
    pub newton_iters: usize,
    pub trace: Vec<NewtonRecord>,
}

struct Barrier<'a> {
    objective: &'a ConcaveFn,
    constraints: Vec<&'a ConcaveFn>,
    psd: Vec<ConcaveFn>,
    linear: &'a [(RVec, f64)],
}

impl Barrier<'_> {
    fn nu(&self, layout: &HermitianLayout) -> f64 {
        (layout.dims().iter().sum::<usize>() + self.constraints.len() + self.linear.len()) as f64
    }

    fn value(&self, x: &RVec, t: f64) -> Option<f64> {
        let mut phi = -t * self.objective.value(x)?;
        for f in &self.constraints {
            let v = f.value(x)?;
            if !(v > 0.0) {
                return None;
            }
            phi -= v.ln();
        }
        for f in &self.psd {
            phi -= f.value(x)?;
        }
        for (a, b) in self.linear {
            let s = b - a.dot(x);
            if !(s > 0.0) {
                return None;
            }
            phi -= s.ln();
        }
        phi.is_finite().then_some(phi)
    }

    fn derivs(&self, x: &RVec, t: f64) -> Option<(f64, RVec, RMat)> {
        let f0 = self.objective.derivs(x)?;
        let mut phi = -t * f0.value;
        let mut grad = -f0.grad * t;
        let mut hess = -f0.hess * t;
        for f in &self.constraints {
            let d = f.derivs(x)?;
            if !(d.value > 0.0) {
                return None;
            }
            phi -= d.value.ln();
            grad -= &d.grad / d.value;
            hess -= &d.hess / d.value;
            hess += (&d.grad * d.grad.transpose()) / (d.value * d.value);
        }
        for f in &self.psd {
            let d = f.derivs(x)?;
            phi -= d.value;
            grad -= &d.grad;
            hess -= &d.hess;
        }
        for (a, b) in self.linear {
            let s = b - a.dot(x);
            if !(s > 0.0) {
                return None;
            }
            phi -= s.ln();
            grad += a / s;
            hess += (a * a.transpose()) / (s * s);
        }
        Some((phi, grad, hess))
    }

    fn min_slack(&self, x: &RVec) -> f64 {
        let mut m = f64::INFINITY;
        for f in &self.constraints {
            m = m.min(f.value(x).unwrap_or(f64::NEG_INFINITY));
        }
        for (a, b) in self.linear {
            m = m.min(b - a.dot(x));
        }
        m
    }
}

fn newton_direction(hess: &RMat, grad: &RVec) -> Option<RVec> {
    let n = grad.len();
    let scale = (0..n).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..20 {
        let mut h = hess.clone();
        for i in 0..n {
            h[(i, i)] += shift;
        }
        if let Some(ch) = h.cholesky() {
            let d = ch.solve(&(-grad));
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { shift * 100.0 };
    }
    None
}

/// Outcome of one centering run.
enum Centering {
    Done,
    /// Phase I early exit: the target constraint became positive.
    Reached,
    /// A damped Newton step no longer lowers `φ`: the computed direction is
    /// dominated by round-off, so larger `t` cannot be centered either.
    Stalled,
}

struct Engine<'a> {
    layout: &'a HermitianLayout,
    opts: &'a SolverOptions,
    trace: Vec<NewtonRecord>,
    newton_iters: usize,
}

impl Engine<'_> {
    fn center(
        &mut self,
        barrier: &Barrier<'_>,
        x: &mut RVec,
        t: f64,
        phase: u8,
        stage: usize,
        stop_when_positive: bool,
    ) -> Result<Centering> {
        let mut last_decrement = f64::INFINITY;
        for iter in 0..self.opts.max_newton {
            let (phi, grad, hess) = barrier
                .derivs(x, t)
                .ok_or_else(|| Error::NotConverged("iterate left the barrier domain".into()))?;
            let dir = newton_direction(&hess, &grad)
                .ok_or_else(|| Error::NotConverged("singular Newton system".into()))?;
            let slope = grad.dot(&dir);
            let decrement = (-slope).max(0.0).sqrt();
            if decrement <= self.opts.newton_tol {
                return Ok(Centering::Done);
            }
            // Inside the quadratic-convergence region the decrease in φ sinks
            // below its round-off, so full steps are taken with only a domain
            // check; progress is then judged by the decrement itself.
            let quadratic = decrement < QUADRATIC_REGION;
            if quadratic && decrement >= last_decrement {
                return Ok(Centering::Done);
            }
            last_decrement = decrement;
            let mut step = 1.0;
            let accepted = loop {
                let trial = &*x + &dir * step;
                if let Some(v) = barrier.value(&trial, t) {
                    if quadratic || v <= phi + 1e-4 * step * slope {
                        break Some((trial, v));
                    }
                }
                step *= 0.5;
                if step < 1e-14 {
                    break None;
                }
            };
            let Some((trial, value)) = accepted else {
                return Ok(Centering::Stalled);
            };
            if !quadratic && !(value < phi) {
                return Ok(Centering::Stalled);
            }
            *x = trial;
            self.newton_iters += 1;
            let objective = barrier.objective.value(x).unwrap_or(f64::NAN);
            self.trace.push(NewtonRecord {
                phase,
                stage,
                iter,
                t,
                barrier_value: value,
                objective,
                min_slack: barrier.min_slack(x),
                step,
            });
            if stop_when_positive && objective > PHASE_ONE_MARGIN {
                return Ok(Centering::Reached);
            }
        }
        Err(Error::NotConverged(format!(
            "centering exceeded {} Newton steps at t = {t:.3e}",
            self.opts.max_newton
        )))
    }

    /// Runs barrier stages from `t = 1` until `ν/t` meets the gap target.
    /// Returns the final `t`, or `None` if a phase I run reached positivity.
    fn run(&mut self, barrier: &Barrier<'_>, x: &mut RVec, phase: u8) -> Result<Option<f64>> {
        let nu = barrier.nu(self.layout);
        let mut t = 1.0;
        let mut stage = 0;
        loop {
            match self.center(barrier, x, t, phase, stage, phase == 1)? {
                Centering::Reached => return Ok(None),
                Centering::Stalled => {
                    log::debug!("barrier stalled at t = {t:.3e}, gap bound {:.3e}", nu / t);
                    return Ok(Some(t));
                }
                Centering::Done => {}
            }
            if nu / t <= self.opts.duality_gap {
                return Ok(Some(t));
            }
            t *= self.opts.barrier_mu;
            stage += 1;
        }
    }
}

/// Solves `problem` from `x0`, which must lie strictly inside the PSD cones and
/// the linear constraints. Concave constraints may be violated at `x0`.
pub fn solve(problem: &BarrierProblem, x0: &RVec, opts: &SolverOptions) -> Result<BarrierSolution> {
    opts.validate()?;
    let layout = &problem.layout;
    if x0.len() != layout.len() {
        return Err(Error::Dimension(format!(
            "start point has length {}, layout needs {}",
            x0.len(),
            layout.len()
        )));
    }
    let psd: Vec<ConcaveFn> = (0..layout.dims().len()).map(|k| block_logdet(layout, k)).collect();
    let mut x = x0.clone();
    if psd.iter().any(|f| f.value(&x).is_none())
        || problem.linear.iter().any(|(a, b)| !(b - a.dot(&x) > 0.0))
    {
        return Err(Error::Dimension(
            "start point must be strictly inside the cone and linear constraints".into(),
        ));
    }
    let mut engine = Engine {
        layout,
        opts,
        trace: Vec::new(),
        newton_iters: 0,
    };

    // Phase I: raise each constraint that starts below the margin while
    // keeping the others strictly positive. Starting phase II right at the
    // boundary leaves the Newton system too ill-conditioned to move.
    let mut settled = vec![false; problem.constraints.len()];
    loop {
        let values: Vec<Option<f64>> = problem.constraints.iter().map(|f| f.value(&x)).collect();
        let Some(target) = (0..values.len())
            .find(|&i| !settled[i] && !matches!(values[i], Some(v) if v > PHASE_ONE_MARGIN))
        else {
            break;
        };
        settled[target] = true;
        if values[target].is_none() {
            return Err(Error::Dimension("start point outside a constraint's domain".into()));
        }
        let others: Vec<&ConcaveFn> = problem
            .constraints
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != target && matches!(values[*i], Some(v) if v > 0.0))
            .map(|(_, f)| f)
            .collect();
        let barrier = Barrier {
            objective: &problem.constraints[target],
            constraints: others,
            psd: psd.clone(),
            linear: &problem.linear,
        };
        if engine.run(&barrier, &mut x, 1)?.is_some() {
            let best = problem.constraints[target].value(&x).unwrap_or(f64::NEG_INFINITY);
            if !(best > 0.0) {
                return Err(Error::Infeasible(format!(
                    "constraint {target} has maximum {best:.3e} over the feasible set"
                )));
            }
        }
    }
    if problem.constraints.iter().any(|f| !matches!(f.value(&x), Some(v) if v > 0.0)) {
        return Err(Error::Infeasible("constraints have no common strictly feasible point".into()));
    }

    let barrier = Barrier {
        objective: &problem.objective,
        constraints: problem.constraints.iter().collect(),
        psd,
        linear: &problem.linear,
    };
    let t = engine.run(&barrier, &mut x, 2)?.expect("phase II never exits early");
    let (_, grad, hess) = barrier
        .derivs(&x, t)
        .ok_or_else(|| Error::NotConverged("final iterate left the barrier domain".into()))?;
    let decrement = newton_direction(&hess, &grad).map_or(f64::INFINITY, |d| (-grad.dot(&d)).max(0.0).sqrt());
    let objective = problem
        .objective
        .value(&x)
        .ok_or_else(|| Error::NotConverged("objective undefined at the solution".into()))?;
    let multipliers = problem
        .constraints
        .iter()
        .map(|f| 1.0 / (t * f.value(&x).unwrap_or(f64::NAN)))
        .collect();
    let linear_multipliers = problem
        .linear
        .iter()
        .map(|(a, b)| 1.0 / (t * (b - a.dot(&x))))
        .collect();
    Ok(BarrierSolution {
        objective,
        t,
        multipliers,
        linear_multipliers,
        gap_bound: barrier.nu(layout) / t,
        stationarity: decrement / t.sqrt(),
        newton_iters: engine.newton_iters,
        trace: engine.trace,
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, identity, max_abs_diff, random_psd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pack_unpack_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_psd(&mut rng, 3, 2);
        let b = random_psd(&mut rng, 2, 2);
        let layout = HermitianLayout::new(&[3, 2]);
        let x = layout.pack(&[&a, &b]);
        assert_eq!(x.len(), 13);
        assert!(max_abs_diff(&layout.unpack_block(&x, 0), &a) < 1e-15);
        assert!(max_abs_diff(&layout.unpack_block(&x, 1), &b) < 1e-15);
        let g = random_psd(&mut rng, 3, 3);
        let v = layout.inner_product_vector(0, &g);
        assert!((v.dot(&x) - linalg::trace_product_re(&g, &a)).abs() < 1e-12);
        assert!((layout.trace_vector(1).dot(&x) - linalg::trace_re(&b)).abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layout = HermitianLayout::new(&[3]);
        let h = complex_gaussian(&mut rng, 2, 3, 1.0);
        let mut term = AffineHermitian::constant(identity(2));
        term.add_block_map(&layout, 0, |e| &h * e * h.adjoint());
        let mut f = ConcaveFn::new(layout.len());
        f.logdets.push(term);
        let x = layout.pack(&[&random_psd(&mut rng, 3, 3)]);
        let d = f.derivs(&x).unwrap();
        let eps = 1e-5;
        for j in 0..x.len() {
            let mut xp = x.clone();
            xp[j] += eps;
            let mut xm = x.clone();
            xm[j] -= eps;
            let fd = (f.value(&xp).unwrap() - f.value(&xm).unwrap()) / (2.0 * eps);
            assert!((fd - d.grad[j]).abs() < 1e-6, "grad {j}");
            let dp = f.derivs(&xp).unwrap();
            let dm = f.derivs(&xm).unwrap();
            for k in 0..x.len() {
                let fd = (dp.grad[k] - dm.grad[k]) / (2.0 * eps);
                assert!((fd - d.hess[(j, k)]).abs() < 1e-5, "hess {j},{k}");
            }
        }
    }

    /// `max ln det X s.t. tr X <= 3` has the solution `X = I`.
    #[test]
    fn max_det_under_trace_budget() {
        let layout = HermitianLayout::new(&[3]);
        let problem = BarrierProblem {
            objective: block_logdet(&layout, 0),
            constraints: vec![],
            linear: vec![(layout.trace_vector(0), 3.0)],
            layout,
        };
        let x0 = problem.layout.pack(&[&identity(3).scale(0.1)]);
        let sol = solve(&problem, &x0, &SolverOptions::default()).unwrap();
        let x = problem.layout.unpack_block(&sol.x, 0);
        assert!(max_abs_diff(&x, &identity(3)) < 1e-6);
        // The trace multiplier equals 1 at the optimum (gradient of ln det is X^{-1}).
        assert!((sol.linear_multipliers[0] - 1.0).abs() < 1e-6);
    }

    /// `min tr X s.t. ln det X >= 0` has the solution `X = I` with multiplier 1.
    #[test]
    fn phase_one_recovers_from_infeasible_start() {
        let layout = HermitianLayout::new(&[2]);
        let mut objective = ConcaveFn::new(layout.len());
        objective.linear = -layout.trace_vector(0);
        let problem = BarrierProblem {
            objective,
            constraints: vec![block_logdet(&layout, 0)],
            linear: vec![(layout.trace_vector(0), 100.0)],
            layout,
        };
        let x0 = problem.layout.pack(&[&identity(2).scale(0.01)]);
        let sol = solve(&problem, &x0, &SolverOptions::default()).unwrap();
        let x = problem.layout.unpack_block(&sol.x, 0);
        assert!(max_abs_diff(&x, &identity(2)) < 1e-6);
        assert!((sol.multipliers[0] - 1.0).abs() < 1e-5);
        assert!(sol.trace.iter().any(|r| r.phase == 1));
        assert!(sol.gap_bound <= 1e-8);
    }

    #[test]
    fn infeasible_problem_is_reported() {
        let layout = HermitianLayout::new(&[2]);
        // ln det X >= 0 cannot hold with tr X <= 1.
        let problem = BarrierProblem {
            objective: ConcaveFn::new(layout.len()),
            constraints: vec![block_logdet(&layout, 0)],
            linear: vec![(layout.trace_vector(0), 1.0)],
            layout,
        };
        let x0 = problem.layout.pack(&[&identity(2).scale(0.1)]);
        let err = solve(&problem, &x0, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
    }

    #[test]
    fn bad_start_rejected() {
        let layout = HermitianLayout::new(&[2]);
        let problem = BarrierProblem {
            objective: block_logdet(&layout, 0),
            constraints: vec![],
            linear: vec![(layout.trace_vector(0), 1.0)],
            layout,
        };
        let x0 = problem.layout.pack(&[&identity(2)]);
        assert!(solve(&problem, &x0, &SolverOptions::default()).is_err());
    }
}
