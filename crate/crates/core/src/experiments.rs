//! Monte Carlo threshold sweeps and their CSV outputs.
//!
//! Run `i` of a sweep draws its channel from seed `base_seed + i`, so every
//! solver and every threshold sees the same realizations. Runs fan out over
//! a rayon pool and are sorted by `(solver, threshold, seed)` before
//! aggregation, which keeps the output independent of scheduling.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonoverlap::{self, BisectionOptions, NonOverlapProblem, SolveResult, SolverKind};
use crate::overlap::{self, OverlapProblem};
use crate::scenario::{build_operators, sample_channel, RadarOperators, ScenarioConfig};

/// dB value written for a zero SINR.
pub const ZERO_SINR_DB: f64 = -300.0;

pub const SUMMARY_HEADER: [&str; 6] = ["solver", "r_m", "mean_sinr_db", "mean_secrecy_bits", "feasible_fraction", "runs"];
pub const RUNS_HEADER: [&str; 8] = [
    "solver",
    "r_m",
    "seed",
    "sinr_db",
    "secrecy_bits",
    "feasible",
    "outer_iters",
    "runtime_ms",
];
pub const DIAGNOSTICS_HEADER: [&str; 10] = [
    "solver",
    "r_m",
    "seed",
    "status",
    "secrecy_bits_per_use",
    "inner_iters",
    "eig_ratio",
    "relaxed_sinr_db",
    "max_surrogate_gap",
    "monotonicity_violation",
];

/// What an infeasible run contributes to the averages.
///
/// Either way its secrecy counts as zero and the raw feasibility flag is
/// kept in the per-run file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InfeasibleAccounting {
    /// The run contributes zero SINR: no admissible design was found.
    #[default]
    ZeroSinr,
    /// The run contributes the SINR of `Q_c = 0`, `P_r = P_T`.
    FullRadarPower,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub config: ScenarioConfig,
    /// Thresholds in bits (per use for the orthogonal solvers, per block for the shared one).
    pub thresholds: Vec<f64>,
    pub n_runs: usize,
    pub base_seed: u64,
    pub solvers: Vec<SolverKind>,
    pub accounting: InfeasibleAccounting,
    /// Record wall-clock time per run; off by default to keep outputs reproducible.
    pub timing: bool,
}

impl SweepSpec {
    pub fn new(config: ScenarioConfig, thresholds: Vec<f64>, n_runs: usize, base_seed: u64, solvers: Vec<SolverKind>) -> Self {
        Self {
            config,
            thresholds,
            n_runs,
            base_seed,
            solvers,
            accounting: InfeasibleAccounting::default(),
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.thresholds.is_empty() {
            return Err(Error::InvalidConfig {
                field: "thresholds",
                reason: "at least one threshold is required".into(),
            });
        }
        if let Some(bad) = self.thresholds.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidConfig {
                field: "thresholds",
                reason: format!("thresholds must be finite and non-negative, got {bad}"),
            });
        }
        if self.n_runs == 0 {
            return Err(Error::InvalidConfig {
                field: "runs",
                reason: "at least one run is required".into(),
            });
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidConfig {
                field: "solvers",
                reason: "at least one solver is required".into(),
            });
        }
        Ok(())
    }
}

/// Averages for one `(solver, threshold)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub solver: SolverKind,
    pub r_m: f64,
    /// `10 log10` of the mean linear SINR.
    pub mean_sinr_db: f64,
    pub mean_achieved_secrecy: f64,
    pub feasible_fraction: f64,
    pub runs: usize,
    /// Total wall-clock time of the runs, zero unless timing was requested.
    pub runtime_ms: f64,
}

/// One solve inside a sweep, after the infeasibility accounting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub solver: SolverKind,
    pub r_m: f64,
    pub seed: u64,
    pub sinr_db: f64,
    pub secrecy_bits: f64,
    pub feasible: bool,
    pub outer_iters: usize,
    pub runtime_ms: f64,
    /// Solve status, or `error` when the solver returned an error.
    pub status: String,
    pub secrecy_bits_per_use: f64,
    pub inner_iters: usize,
    pub eig_ratio: Option<f64>,
    pub relaxed_sinr_db: Option<f64>,
    pub max_surrogate_gap: Option<f64>,
    /// Worst step against the expected direction of the outer sequence,
    /// see [`monotonicity_violation`].
    pub monotonicity_violation: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub points: Vec<TradeoffPoint>,
    pub records: Vec<RunRecord>,
}

impl SweepOutcome {
    pub fn error_count(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

pub fn sinr_to_db(sinr: f64) -> f64 {
    if sinr > 0.0 {
        (10.0 * sinr.log10()).max(ZERO_SINR_DB)
    } else {
        ZERO_SINR_DB
    }
}

/// Inverse of [`sinr_to_db`], mapping the sentinel back to zero.
pub fn db_to_sinr(db: f64) -> f64 {
    if db <= ZERO_SINR_DB {
        0.0
    } else {
        10f64.powf(db / 10.0)
    }
}

/// Nine significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

/// `x` as it reads back from the CSV.
fn rounded(x: f64) -> f64 {
    fmt_num(x).parse().expect("formatted float parses")
}

/// Runs one solver on one channel realization.
pub fn solve_one(
    cfg: &ScenarioConfig,
    ops: &RadarOperators,
    solver: SolverKind,
    r_m: f64,
    seed: u64,
) -> Result<SolveResult> {
    let chan = sample_channel(cfg, seed);
    match solver {
        SolverKind::Alg1 | SolverKind::Alg2 => {
            let prob = NonOverlapProblem::new(cfg, ops, &chan, r_m)?;
            if solver == SolverKind::Alg1 {
                nonoverlap::algorithm1(&prob, &cfg.solver)
            } else {
                nonoverlap::algorithm2(&prob, &cfg.solver, &BisectionOptions::default())
            }
        }
        SolverKind::Overlap => {
            let prob = OverlapProblem {
                cfg,
                ops,
                chan: &chan,
                r_tilde: r_m,
                seed,
            };
            overlap::ao_overlap(&prob, &cfg.solver)
        }
    }
}

/// Largest relative step against the direction the outer loop should move:
/// a rise of `tr(Q_c)` for the orthogonal solvers, a drop of the relaxed
/// objective for the shared-resource solver. `None` with fewer than two
/// recorded iterates.
pub fn monotonicity_violation(res: &SolveResult) -> Option<f64> {
    let (seq, sign): (Vec<f64>, f64) = match res.solver {
        SolverKind::Overlap => (res.history.iter().filter_map(|h| h.objective).collect(), -1.0),
        _ => (res.history.iter().filter_map(|h| h.trace_q).collect(), 1.0),
    };
    if seq.len() < 2 {
        return None;
    }
    let worst = seq
        .windows(2)
        .map(|w| sign * (w[1] - w[0]) / w[0].abs().max(1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    Some(worst.max(0.0))
}

fn status_tag(result: &SolveResult) -> String {
    serde_json::to_value(result.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_else(|| format!("{:?}", result.status))
}

fn record_for(
    spec: &SweepSpec,
    solver: SolverKind,
    r_m: f64,
    seed: u64,
    outcome: Result<SolveResult>,
    runtime_ms: f64,
    full_power_sinr: f64,
) -> RunRecord {
    let l = spec.config.block_len as f64;
    match outcome {
        Ok(res) => {
            let sinr = if res.feasible {
                res.sinr
            } else {
                match spec.accounting {
                    InfeasibleAccounting::ZeroSinr => 0.0,
                    InfeasibleAccounting::FullRadarPower => full_power_sinr,
                }
            };
            let secrecy = if res.feasible { res.achieved_secrecy } else { 0.0 };
            let per_use = match solver {
                SolverKind::Overlap => secrecy / l,
                _ => secrecy,
            };
            let diag = res.overlap.as_ref();
            RunRecord {
                solver,
                r_m,
                seed,
                sinr_db: rounded(sinr_to_db(sinr)),
                secrecy_bits: rounded(secrecy),
                feasible: res.feasible,
                outer_iters: res.outer_iters,
                runtime_ms,
                status: status_tag(&res),
                secrecy_bits_per_use: rounded(per_use),
                inner_iters: res.inner_iters_total,
                eig_ratio: diag.map(|d| d.eig_ratio),
                relaxed_sinr_db: diag.map(|d| sinr_to_db(d.relaxed_sinr)),
                max_surrogate_gap: diag.map(|d| d.max_surrogate_gap),
                monotonicity_violation: monotonicity_violation(&res),
                error: None,
            }
        }
        Err(e) => {
            log::warn!("{} r_m={r_m} seed={seed}: {e}", solver.tag());
            let sinr = match spec.accounting {
                InfeasibleAccounting::ZeroSinr => 0.0,
                InfeasibleAccounting::FullRadarPower => full_power_sinr,
            };
            RunRecord {
                solver,
                r_m,
                seed,
                sinr_db: rounded(sinr_to_db(sinr)),
                secrecy_bits: 0.0,
                feasible: false,
                outer_iters: 0,
                runtime_ms,
                status: "error".into(),
                secrecy_bits_per_use: 0.0,
                inner_iters: 0,
                eig_ratio: None,
                relaxed_sinr_db: None,
                max_surrogate_gap: None,
                monotonicity_violation: None,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Averages per `(solver, threshold)`, computed from the values exactly as
/// they are written to the per-run file.
pub fn aggregate(records: &[RunRecord]) -> Vec<TradeoffPoint> {
    let mut points: Vec<TradeoffPoint> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let head = &records[start];
        let end = records[start..]
            .iter()
            .position(|r| r.solver != head.solver || r.r_m != head.r_m)
            .map_or(records.len(), |k| start + k);
        let group = &records[start..end];
        let n = group.len() as f64;
        let mean_sinr = group.iter().map(|r| db_to_sinr(r.sinr_db)).sum::<f64>() / n;
        points.push(TradeoffPoint {
            solver: head.solver,
            r_m: head.r_m,
            mean_sinr_db: sinr_to_db(mean_sinr),
            mean_achieved_secrecy: group.iter().map(|r| r.secrecy_bits).sum::<f64>() / n,
            feasible_fraction: group.iter().filter(|r| r.feasible).count() as f64 / n,
            runs: group.len(),
            runtime_ms: group.iter().map(|r| r.runtime_ms).sum(),
        });
        start = end;
    }
    points
}

/// Runs the sweep on the current rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let cfg = &spec.config;
    let ops = build_operators(cfg);
    let full_power_sinr = {
        let wave = crate::radar::optimal_waveform(&ops, cfg.p_total)?;
        crate::radar::sinr_nonoverlap(&ops, &wave.s_r, cfg.sigma2_r)?
    };
    let mut solvers = spec.solvers.clone();
    solvers.sort_by_key(|s| *s as u8);
    solvers.dedup();

    let tasks: Vec<(SolverKind, usize, u64)> = solvers
        .iter()
        .flat_map(|&s| {
            (0..spec.thresholds.len()).flat_map(move |t| (0..spec.n_runs as u64).map(move |i| (s, t, i)))
        })
        .collect();
    let mut records: Vec<(usize, RunRecord)> = tasks
        .par_iter()
        .enumerate()
        .map(|(k, &(solver, t, i))| {
            let r_m = spec.thresholds[t];
            let seed = spec.base_seed.wrapping_add(i);
            let clock = Instant::now();
            let outcome = solve_one(cfg, &ops, solver, r_m, seed);
            let runtime_ms = if spec.timing { clock.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            (k, record_for(spec, solver, r_m, seed, outcome, runtime_ms, full_power_sinr))
        })
        .collect();
    records.sort_by_key(|(k, _)| *k);
    let records: Vec<RunRecord> = records.into_iter().map(|(_, r)| r).collect();
    Ok(SweepOutcome {
        points: aggregate(&records),
        records,
    })
}

/// Runs the sweep on a dedicated pool of `jobs` threads.
pub fn run_sweep_with_jobs(spec: &SweepSpec, jobs: usize) -> Result<SweepOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig {
            field: "jobs",
            reason: e.to_string(),
        })?;
    pool.install(|| run_sweep(spec))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Output paths of [`emit_csv`].
#[derive(Debug, Clone)]
pub struct CsvPaths {
    pub summary: PathBuf,
    pub runs: PathBuf,
    pub diagnostics: PathBuf,
}

impl CsvPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            summary: dir.join("summary.csv"),
            runs: dir.join("runs.csv"),
            diagnostics: dir.join("diagnostics.csv"),
        }
    }
}

/// Writes the summary, per-run and diagnostics files into `dir`.
pub fn emit_csv(points: &[TradeoffPoint], records: &[RunRecord], dir: &Path) -> Result<CsvPaths> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let paths = CsvPaths::in_dir(dir);
    write_rows(
        &paths.summary,
        &SUMMARY_HEADER,
        points.iter().map(|p| {
            vec![
                p.solver.tag().to_string(),
                fmt_num(p.r_m),
                fmt_num(p.mean_sinr_db),
                fmt_num(p.mean_achieved_secrecy),
                fmt_num(p.feasible_fraction),
                p.runs.to_string(),
            ]
        }),
    )?;
    write_rows(
        &paths.runs,
        &RUNS_HEADER,
        records.iter().map(|r| {
            vec![
                r.solver.tag().to_string(),
                fmt_num(r.r_m),
                r.seed.to_string(),
                fmt_num(r.sinr_db),
                fmt_num(r.secrecy_bits),
                u8::from(r.feasible).to_string(),
                r.outer_iters.to_string(),
                fmt_num(r.runtime_ms),
            ]
        }),
    )?;
    write_rows(
        &paths.diagnostics,
        &DIAGNOSTICS_HEADER,
        records.iter().map(|r| {
            vec![
                r.solver.tag().to_string(),
                fmt_num(r.r_m),
                r.seed.to_string(),
                r.status.clone(),
                fmt_num(r.secrecy_bits_per_use),
                r.inner_iters.to_string(),
                opt_num(r.eig_ratio),
                opt_num(r.relaxed_sinr_db),
                opt_num(r.max_surrogate_gap),
                opt_num(r.monotonicity_violation),
            ]
        }),
    )?;
    Ok(paths)
}

/// A per-run row as read back from `runs.csv`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RunRow {
    pub solver: String,
    pub r_m: f64,
    pub seed: u64,
    pub sinr_db: f64,
    pub secrecy_bits: f64,
    pub feasible: u8,
    pub outer_iters: usize,
    pub runtime_ms: f64,
}

/// A summary row as read back from `summary.csv`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SummaryRow {
    pub solver: String,
    pub r_m: f64,
    pub mean_sinr_db: f64,
    pub mean_secrecy_bits: f64,
    pub feasible_fraction: f64,
    pub runs: usize,
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec(solvers: Vec<SolverKind>, thresholds: Vec<f64>) -> SweepSpec {
        let mut cfg = ScenarioConfig::default();
        cfg.block_len = 2;
        SweepSpec::new(cfg, thresholds, 3, 11, solvers)
    }

    #[test]
    fn db_round_trip_and_sentinel() {
        assert_eq!(sinr_to_db(0.0), ZERO_SINR_DB);
        assert_eq!(db_to_sinr(ZERO_SINR_DB), 0.0);
        assert!((db_to_sinr(sinr_to_db(123.4)) - 123.4).abs() < 1e-10);
        assert_eq!(fmt_num(1234.5), "1.23450000e3");
    }

    #[test]
    fn zero_threshold_sweep_is_closed_form() {
        let spec = tiny_spec(vec![SolverKind::Alg2, SolverKind::Alg1, SolverKind::Overlap], vec![0.0]);
        let out = run_sweep(&spec).unwrap();
        let ops = build_operators(&spec.config);
        let k = crate::radar::waveform_operator(&ops).unwrap();
        let expected = sinr_to_db(spec.config.p_total * crate::linalg::eigvalsh(&k)[0] / spec.config.sigma2_r);
        assert_eq!(out.points.len(), 3);
        for p in &out.points {
            assert_eq!(p.feasible_fraction, 1.0);
            assert_eq!(p.mean_achieved_secrecy, 0.0);
            assert!((p.mean_sinr_db - expected).abs() < 1e-7);
        }
        // Sorted by solver, whatever the requested order.
        assert_eq!(out.points[0].solver, SolverKind::Alg1);
    }

    #[test]
    fn summary_matches_recomputation_from_runs_file() {
        let spec = tiny_spec(vec![SolverKind::Alg2], vec![2.0, 30.0]);
        let out = run_sweep(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_csv(&out.points, &out.records, dir.path()).unwrap();
        let runs: Vec<RunRow> = read_csv(&paths.runs).unwrap();
        let summary: Vec<SummaryRow> = read_csv(&paths.summary).unwrap();
        assert_eq!(runs.len(), 6);
        for s in &summary {
            let group: Vec<&RunRow> = runs.iter().filter(|r| r.solver == s.solver && r.r_m == s.r_m).collect();
            let n = group.len() as f64;
            let sinr = sinr_to_db(group.iter().map(|r| db_to_sinr(r.sinr_db)).sum::<f64>() / n);
            let sec = group.iter().map(|r| r.secrecy_bits).sum::<f64>() / n;
            assert!((sinr - s.mean_sinr_db).abs() <= 1e-9 * sinr.abs().max(1.0));
            assert!((sec - s.mean_secrecy_bits).abs() <= 1e-9 * sec.abs().max(1.0));
            assert_eq!(s.runs, group.len());
        }
        // The 30-bit threshold is out of reach: zero secrecy and zero SINR.
        let top = summary.iter().find(|s| s.r_m == 30.0).unwrap();
        assert_eq!(top.feasible_fraction, 0.0);
        assert_eq!(top.mean_sinr_db, ZERO_SINR_DB);
    }

    #[test]
    fn empty_outputs_are_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_csv(&[], &[], dir.path()).unwrap();
        assert_eq!(fs::read_to_string(&paths.summary).unwrap(), SUMMARY_HEADER.join(",") + "\n");
        assert_eq!(fs::read_to_string(&paths.runs).unwrap(), RUNS_HEADER.join(",") + "\n");
    }

    #[test]
    fn bad_spec_is_rejected() {
        let spec = tiny_spec(vec![SolverKind::Alg2], vec![]);
        assert!(run_sweep(&spec).unwrap_err().to_string().contains("thresholds"));
        let spec = tiny_spec(vec![SolverKind::Alg2], vec![-1.0]);
        assert!(run_sweep(&spec).is_err());
    }
}
