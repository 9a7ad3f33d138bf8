//! Command-line front end.
//!
//! Every subcommand produces a [`RunReport`]; `--json` prints it as a single
//! JSON document, otherwise a human-readable rendering is printed with six
//! significant digits. Exit status is 0 on success, 1 on input errors and 2
//! when the solver or a reproduction check does not succeed.

mod gradcheck;
mod reproduce;
mod text;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::decoupled::{decoupled_candidates, theorem5_solve, DecoupledCandidates, DecoupledSolution};
use crate::format::{instance_digest, load_instance};
use crate::instance::{PrimalPoint, ProblemInstance, SYMMETRY_REPORT_TOL};
use crate::oracle::{brute_force_solve, OracleConfig, Subproblem};
use crate::solver::{solve, Certificate, SolveReport, SolverConfig};

pub use gradcheck::{gradcheck, GradcheckReport};
pub use reproduce::{reproduce, ExampleCheck, FieldCheck, ReproduceReport};
pub use text::fmt_g;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CERTIFIED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "canodual", version, about = "Canonical dual solver for fixed-charge quartic problems")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Print the report as JSON
    #[arg(long, global = true)]
    pub json: bool,
    /// Gap tolerance for certification (gradcheck: pass threshold; oracle: descent tolerance)
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol: Option<f64>,
    /// Random starts per subproblem for the oracle
    #[arg(long, global = true, value_name = "INT")]
    pub starts: Option<usize>,
    /// Seed for every randomized component
    #[arg(long, global = true, value_name = "INT", default_value_t = 0)]
    pub seed: u64,
    /// Print additional diagnostics
    #[arg(long, global = true)]
    pub verbose: bool,
    /// Omit the wall-clock time from the report
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximize the dual and certify the recovered primal point
    Solve { path: PathBuf },
    /// Brute-force minimum over all binary v
    Oracle { path: PathBuf },
    /// Closed-form analysis of a diagonal instance
    Decoupled { path: PathBuf },
    /// Re-run the embedded reference examples (1..8 or "all")
    Reproduce { which: String },
    /// Compare analytic dual derivatives with finite differences
    Gradcheck {
        path: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_digest: Option<String>,
    pub report: Report,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Solve(SolveReport),
    Oracle(OracleReport),
    Decoupled(DecoupledReport),
    Reproduce(ReproduceReport),
    Gradcheck(GradcheckReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub primal: PrimalPoint,
    pub value: f64,
    pub n_starts: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subproblems: Option<Vec<Subproblem>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoupledReport {
    pub candidates: DecoupledCandidates,
    pub closed_form_applies: bool,
    pub solution: Option<DecoupledSolution>,
}

impl Report {
    fn exit_code(&self) -> i32 {
        match self {
            Report::Solve(r) if r.certificate != Certificate::GlobalOptimal => EXIT_NOT_CERTIFIED,
            Report::Reproduce(r) if !r.pass => EXIT_NOT_CERTIFIED,
            Report::Gradcheck(r) if !r.pass => EXIT_INPUT,
            _ => EXIT_OK,
        }
    }
}

struct Loaded {
    inst: ProblemInstance,
    digest: String,
}

fn load(path: &PathBuf) -> Result<Loaded, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let inst = load_instance(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let digest = instance_digest(&text).map_err(|e| e.to_string())?;
    Ok(Loaded { inst, digest })
}

fn solver_config(flags: &Flags) -> SolverConfig {
    let mut cfg = SolverConfig {
        seed: flags.seed,
        ..SolverConfig::default()
    };
    if let Some(t) = flags.tol {
        cfg.gap_tol = t;
    }
    cfg
}

fn oracle_config(flags: &Flags) -> OracleConfig {
    let mut cfg = OracleConfig {
        seed: flags.seed,
        ..OracleConfig::default()
    };
    if let Some(s) = flags.starts {
        cfg.n_starts = s;
    }
    if let Some(t) = flags.tol {
        cfg.descent_tol = t;
    }
    cfg
}

/// Runs one command and returns its report, or an error message for input
/// problems.
pub fn execute(cli: &Cli) -> Result<RunReport, String> {
    let flags = &cli.flags;
    let started = Instant::now();
    let (name, digest, report) = match &cli.command {
        Command::Solve { path } => {
            let l = load(path)?;
            let r = solve(&l.inst, &solver_config(flags)).map_err(|e| e.to_string())?;
            ("solve", Some(l.digest), Report::Solve(r))
        }
        Command::Oracle { path } => {
            let l = load(path)?;
            let cfg = oracle_config(flags);
            let r = brute_force_solve(&l.inst, &cfg).map_err(|e| e.to_string())?;
            let report = OracleReport {
                primal: r.primal,
                value: r.value,
                n_starts: cfg.n_starts,
                seed: cfg.seed,
                subproblems: flags.verbose.then_some(r.subproblems),
            };
            ("oracle", Some(l.digest), Report::Oracle(report))
        }
        Command::Decoupled { path } => {
            let l = load(path)?;
            let candidates = decoupled_candidates(&l.inst).map_err(|e| e.to_string())?;
            let solution = theorem5_solve(&l.inst).map_err(|e| e.to_string())?;
            let report = DecoupledReport {
                closed_form_applies: candidates.theorem5_holds(),
                candidates,
                solution,
            };
            ("decoupled", Some(l.digest), Report::Decoupled(report))
        }
        Command::Reproduce { which } => {
            let ids: Vec<usize> = if which == "all" {
                (1..=8).collect()
            } else {
                match which.parse::<usize>() {
                    Ok(k) if (1..=8).contains(&k) => vec![k],
                    _ => return Err(format!("unknown example `{which}` (expected 1..8 or all)")),
                }
            };
            let r = reproduce(&ids, &solver_config(flags)).map_err(|e| e.to_string())?;
            ("reproduce", None, Report::Reproduce(r))
        }
        Command::Gradcheck { path, samples } => {
            let l = load(path)?;
            let threshold = flags.tol.unwrap_or(gradcheck::DEFAULT_THRESHOLD);
            let r = gradcheck(&l.inst, *samples, flags.seed, threshold).map_err(|e| e.to_string())?;
            ("gradcheck", Some(l.digest), Report::Gradcheck(r))
        }
    };
    let wall_time_ms = (!flags.no_timing).then(|| started.elapsed().as_millis() as u64);
    Ok(RunReport {
        command: name.to_string(),
        instance_digest: digest,
        report,
        wall_time_ms,
    })
}

/// Parses `args` (including the program name), runs the command and writes
/// to `out` / `err`. Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    if let Some(path) = match &cli.command {
        Command::Solve { path } | Command::Oracle { path } | Command::Decoupled { path } => Some(path),
        Command::Gradcheck { path, .. } => Some(path),
        Command::Reproduce { .. } => None,
    } {
        if let Ok(l) = load(path) {
            if l.inst.symmetry_correction() > SYMMETRY_REPORT_TOL {
                let _ = writeln!(
                    err,
                    "warning: input matrices were symmetrized (largest entry change {})",
                    fmt_g(l.inst.symmetry_correction())
                );
            }
        }
    }
    match execute(&cli) {
        Ok(report) => {
            let rendered = if cli.flags.json {
                serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
            } else {
                text::render(&report, cli.flags.verbose)
            };
            let _ = out.write_all(rendered.as_bytes());
            if let Report::Gradcheck(g) = &report.report {
                if !g.pass {
                    let _ = writeln!(err, "gradcheck failed; worst point: {}", text::worst_point(g));
                }
            }
            report.report.exit_code()
        }
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}
