use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use radcom::experiments::{self, InfeasibleAccounting, SweepSpec};
use radcom::nonoverlap::{SolveResult, SolverKind};
use radcom::scenario::{build_operators, ScenarioConfig};
use radcom::{verify, Error};

const EXIT_SOLVER: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Radar SINR versus secrecy-rate tradeoff solvers.
///
/// SNRs in the config are per element: |gamma_d|^2 = sigma2_r 10^(snr_direct_db/10),
/// |gamma_t|^2 = sigma2_r 10^(snr_surv_db/10), and each communication channel
/// entry has variance sigma2_c 10^(snr_comm_db/10). Log level comes from
/// RADCOM_LOG_LEVEL (error, info or debug).
#[derive(Debug, Parser)]
#[command(name = "radcom", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo sweep over secrecy thresholds; writes summary.csv, runs.csv and diagnostics.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated thresholds in bits.
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated subset of alg1, alg2, overlap.
        #[arg(long, value_delimiter = ',', value_parser = parse_solver, default_value = "alg2")]
        solvers: Vec<SolverKind>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Record wall-clock time per run (makes runs.csv non-reproducible).
        #[arg(long)]
        timing: bool,
        /// What an infeasible run contributes to the mean SINR.
        #[arg(long, value_enum, default_value_t = InfeasibleAccounting::ZeroSinr)]
        infeasible_accounting: InfeasibleAccounting,
    },
    /// Solve a single seeded instance and print the result as JSON.
    SolveOne {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "r-m")]
        r_m: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_solver, default_value = "alg2")]
        solver: SolverKind,
    },
    /// Run the built-in consistency checks.
    Verify,
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    SolverKind::parse(s).ok_or_else(|| format!("unknown solver `{s}` (expected alg1, alg2 or overlap)"))
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig, ExitCode> {
    ScenarioConfig::from_json_file(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_USAGE)
    })
}

fn complex_json<'a>(values: impl Iterator<Item = &'a radcom::linalg::C64>) -> (Vec<f64>, Vec<f64>) {
    values.map(|z| (z.re, z.im)).unzip()
}

fn result_json(res: &SolveResult) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = res
        .q_c
        .row_iter()
        .map(|row| {
            let (re, im) = complex_json(row.iter());
            json!({ "re": re, "im": im })
        })
        .collect();
    let (s_re, s_im) = complex_json(res.s_r.iter());
    json!({
        "solver": res.solver.tag(),
        "r_m": res.r_m,
        "feasible": res.feasible,
        "status": res.status,
        "sinr": res.sinr,
        "sinr_db": experiments::sinr_to_db(res.sinr),
        "achieved_secrecy": res.achieved_secrecy,
        "p_r": res.p_r,
        "trace_q_c": radcom::linalg::trace_re(&res.q_c),
        "q_c": rows,
        "s_r": { "re": s_re, "im": s_im },
        "outer_iters": res.outer_iters,
        "inner_iters_total": res.inner_iters_total,
        "history": res.history,
        "overlap": res.overlap,
    })
}

fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Sweep {
            config,
            thresholds,
            runs,
            seed,
            solvers,
            out,
            jobs,
            timing,
            infeasible_accounting,
        } => {
            let cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(code) => return code,
            };
            let mut spec = SweepSpec::new(cfg, thresholds, runs, seed, solvers);
            spec.accounting = infeasible_accounting;
            spec.timing = timing;
            let outcome = match jobs {
                Some(j) => experiments::run_sweep_with_jobs(&spec, j),
                None => experiments::run_sweep(&spec),
            };
            let outcome = match outcome {
                Ok(o) => o,
                Err(e @ (Error::InvalidConfig { .. } | Error::ConfigParse { .. })) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_USAGE);
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_SOLVER);
                }
            };
            if let Err(e) = experiments::emit_csv(&outcome.points, &outcome.records, &out) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_SOLVER);
            }
            for p in &outcome.points {
                log::info!(
                    "{} r_m={} sinr={:.3} dB secrecy={:.4} feasible={:.2}",
                    p.solver.tag(),
                    p.r_m,
                    p.mean_sinr_db,
                    p.mean_achieved_secrecy,
                    p.feasible_fraction
                );
            }
            let errors = outcome.error_count();
            if errors > 0 {
                eprintln!("{errors} run(s) failed; see diagnostics.csv");
                return ExitCode::from(EXIT_SOLVER);
            }
            ExitCode::SUCCESS
        }
        Command::SolveOne { config, r_m, seed, solver } => {
            let cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(code) => return code,
            };
            if !(r_m.is_finite() && r_m >= 0.0) {
                eprintln!("error: --r-m must be finite and non-negative");
                return ExitCode::from(EXIT_USAGE);
            }
            let ops = build_operators(&cfg);
            match experiments::solve_one(&cfg, &ops, solver, r_m, seed) {
                Ok(res) => {
                    let text = serde_json::to_string_pretty(&result_json(&res)).expect("JSON value serializes");
                    // A closed pipe on stdout is not a solver failure.
                    let _ = writeln!(std::io::stdout(), "{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_SOLVER)
                }
            }
        }
        Command::Verify => {
            let outcomes = verify::run_all();
            for o in &outcomes {
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_SOLVER)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RADCOM_LOG_LEVEL", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    run(cli)
}
