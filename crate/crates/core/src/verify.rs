//! Quick self-checks behind the `verify` subcommand.
//!
//! Each check recomputes a quantity two independent ways on a handful of
//! seeded instances. The full-size suites live in the integration tests;
//! these are sized to finish in seconds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::experiments::{self, SweepSpec};
use crate::linalg::{self, CMat};
use crate::nonoverlap::{self, BisectionOptions, NonOverlapProblem, SolverKind};
use crate::overlap::{self, OverlapProblem};
use crate::radar;
use crate::scenario::{build_operators, sample_channel, ScenarioConfig};
use crate::secrecy::{self, SecrecyConstraintParams};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tol,
        detail: format!("worst {worst:.3e}, tolerance {tol:.1e}"),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// The log-det bracket is tight at `Y = A^{-1}` and below it elsewhere.
fn variational_bracket() -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let h = linalg::complex_gaussian(&mut rng, 4, 4, 1.0);
        let q = linalg::random_psd(&mut rng, 4, 4);
        let a = &h * &q * h.adjoint() + linalg::identity(4);
        let y = linalg::inverse_pd(&a)?;
        let exact = -linalg::logdet_pd(&a)?;
        worst = worst.max(rel(secrecy::variational_bracket(&y, &a)?, exact));
        for _ in 0..10 {
            let bump = linalg::random_psd(&mut rng, 4, 1).scale(0.1);
            let excess = secrecy::variational_bracket(&(&y + bump), &a)? - exact;
            worst = worst.max(excess);
        }
    }
    Ok(outcome("variational bracket", worst, 1e-9))
}

/// Water-filling beats random feasible points on the Lagrangian and
/// diagonalizes the channel Gram matrix.
fn waterfilling() -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = SecrecyConstraintParams::new(1.0, 4, 4, 1.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let h_c = linalg::complex_gaussian(&mut rng, 4, 4, 1.0);
        let h_d = linalg::complex_gaussian(&mut rng, 4, 4, 1.0);
        let y = linalg::inverse_pd(&(linalg::random_psd(&mut rng, 4, 4) + linalg::identity(4)))?;
        let lambda = 2.0;
        let wf = nonoverlap::waterfill_qc(lambda, &y, &h_c, &h_d, 1.0)?;
        let best = nonoverlap::lagrangian(&wf.q_c, lambda, &y, &h_c, &h_d, &params, 1.0, 1.0)?;
        for _ in 0..200 {
            let q = linalg::random_psd(&mut rng, 4, 4).scale(0.5);
            let other = nonoverlap::lagrangian(&q, lambda, &y, &h_c, &h_d, &params, 1.0, 1.0)?;
            worst = worst.max(best - other);
        }
        worst = worst.max(wf.hadamard_offdiag(&h_c, 1.0)?);
    }
    Ok(outcome("water-filling optimality", worst, 1e-9))
}

/// `r = 0` gives `P_T λ_max / σ_r²` for every solver.
fn zero_threshold() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for cfg in [ScenarioConfig::default(), ScenarioConfig::overlap_default()] {
        let ops = build_operators(&cfg);
        let k = radar::waveform_operator(&ops)?;
        let expected = cfg.p_total * linalg::eigvalsh(&k)[0] / cfg.sigma2_r;
        for solver in [SolverKind::Alg1, SolverKind::Alg2, SolverKind::Overlap] {
            let res = experiments::solve_one(&cfg, &ops, solver, 0.0, 5)?;
            worst = worst.max((res.sinr - expected).abs() / expected);
        }
    }
    Ok(outcome("zero-threshold closed form", worst, 1e-8))
}

/// The closed-form SINR against the ratio evaluated at the optimal weight,
/// and the four-log-det secrecy form against the literal determinant ratio.
fn identities() -> Result<CheckOutcome> {
    let cfg = ScenarioConfig::overlap_default();
    let ops = build_operators(&cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let nt = cfg.n_tx;
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let s = linalg::complex_gaussian_vec(&mut rng, cfg.block_len * nt, 1.0);
        let closed = radar::sinr_nonoverlap(&ops, &s, cfg.sigma2_r)?;
        let w = radar::optimal_weight(&ops.c_mat, &ops.d_mat, &s, radar::ReceiverMode::NonOverlap)?.w;
        let direct = radar::sinr_with_weight(&ops, &s, &w, cfg.sigma2_r);
        worst = worst.max((closed - direct).abs() / closed);

        let chan = sample_channel(&cfg, seed);
        let q: CMat = linalg::random_psd(&mut rng, nt, nt);
        let caps = secrecy::block_capacities(&chan.h_c, &chan.h_d, &s, &q, cfg.sigma2_c, cfg.sigma2_r, cfg.block_len)?;
        let expanded =
            secrecy::block_secrecy_expansion(&chan.h_c, &chan.h_d, &s, &q, cfg.sigma2_c, cfg.sigma2_r, cfg.block_len)?;
        let literal = caps.c_tilde_c - caps.c_tilde_d;
        worst = worst.max(rel(expanded, literal));
    }
    Ok(outcome("SINR and determinant identities", worst, 1e-8))
}

/// Both non-overlapping solvers reach the same trace and meet the threshold.
fn algorithm_agreement() -> Result<CheckOutcome> {
    let cfg = ScenarioConfig::default();
    let ops = build_operators(&cfg);
    let mut worst: f64 = 0.0;
    for seed in 0..2 {
        let chan = sample_channel(&cfg, seed);
        let prob = NonOverlapProblem::new(&cfg, &ops, &chan, 2.0)?;
        let a1 = nonoverlap::algorithm1(&prob, &cfg.solver)?;
        let a2 = nonoverlap::algorithm2(&prob, &cfg.solver, &BisectionOptions::default())?;
        if !(a1.feasible && a2.feasible) {
            continue;
        }
        worst = worst
            .max((linalg::trace_re(&a1.q_c) - linalg::trace_re(&a2.q_c)).abs())
            .max((a1.achieved_secrecy - 2.0).abs())
            .max((a2.achieved_secrecy - 2.0).abs());
    }
    Ok(outcome("algorithm agreement", worst, 1e-3))
}

/// The shared-resource solver keeps its budget and its secrecy threshold.
fn overlap_solution() -> Result<CheckOutcome> {
    let cfg = ScenarioConfig::overlap_default();
    let ops = build_operators(&cfg);
    let chan = sample_channel(&cfg, 0);
    let prob = OverlapProblem {
        cfg: &cfg,
        ops: &ops,
        chan: &chan,
        r_tilde: 3.0,
        seed: 0,
    };
    let res = overlap::ao_overlap(&prob, &cfg.solver)?;
    let power = res.s_r.norm_squared() + linalg::trace_re(&res.q_c);
    let worst = if res.feasible {
        (3.0 - res.achieved_secrecy).max(0.0).max(power / cfg.p_total - 1.0)
    } else {
        f64::INFINITY
    };
    Ok(outcome("shared-resource feasibility", worst, 1e-3))
}

/// Two identical sweeps write identical files.
fn determinism() -> Result<CheckOutcome> {
    let mut cfg = ScenarioConfig::default();
    cfg.block_len = 2;
    let spec = SweepSpec::new(cfg, vec![0.0, 2.0], 2, 9, vec![SolverKind::Alg2]);
    let dirs = [std::env::temp_dir().join("radcom-verify-a"), std::env::temp_dir().join("radcom-verify-b")];
    let mut bytes = Vec::new();
    for dir in &dirs {
        let out = experiments::run_sweep(&spec)?;
        let paths = experiments::emit_csv(&out.points, &out.records, dir)?;
        let read = |p: &std::path::Path| std::fs::read(p).unwrap_or_default();
        bytes.push((read(&paths.summary), read(&paths.runs)));
        let _ = std::fs::remove_dir_all(dir);
    }
    let same = bytes[0] == bytes[1] && !bytes[0].0.is_empty();
    Ok(CheckOutcome {
        name: "sweep determinism",
        passed: same,
        detail: if same { "byte-identical".into() } else { "outputs differ".into() },
    })
}

/// Runs every check; a check that errors counts as a failure.
pub fn run_all() -> Vec<CheckOutcome> {
    let checks: [(&'static str, fn() -> Result<CheckOutcome>); 7] = [
        ("variational bracket", variational_bracket),
        ("water-filling optimality", waterfilling),
        ("zero-threshold closed form", zero_threshold),
        ("SINR and determinant identities", identities),
        ("algorithm agreement", algorithm_agreement),
        ("shared-resource feasibility", overlap_solution),
        ("sweep determinism", determinism),
    ];
    checks
        .into_iter()
        .map(|(name, check)| {
            check().unwrap_or_else(|e| CheckOutcome {
                name,
                passed: false,
                detail: format!("error: {e}"),
            })
        })
        .collect()
}
