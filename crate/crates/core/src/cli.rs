//! Command-line front end. Exit codes are a stable contract:
//!
//! | command     | 0            | 1                 | 2                 | 3               | 4         |
//! |-------------|--------------|-------------------|-------------------|-----------------|-----------|
//! | noiseless   | success      | input error       | retries exhausted |                 |           |
//! | protectable | PROTECTABLE  | input error       |                   | NOT_PROTECTABLE | UNDECIDED |
//! | qec-check   | pass         | input error       |                   | fail            |           |
//! | gen         | files written| unknown name/param|                   |                 |           |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::algebra::OperatorSet;
use crate::instances::{
    budget_exhausting, collective, planted_infeasible, planted_noiseless, planted_protectable,
    planted_similarity, repetition3, shor9_bitflip_sample, InfeasibleKind,
};
use crate::io::{self, matrix_to_json, GroundTruth, IoError};
use crate::linalg::{on_qubit, pauli_z, CMatrix, LinalgError, Tolerance};
use crate::noiseless::{find_noiseless, NoiselessError, NoiselessOptions};
use crate::protectable::{
    check_protectable, verify_error_correcting, ProtectError, ProtectOptions, SolverBudget, Verdict,
};
use crate::report::{NoiselessOutput, ProtectOutput, QecOutput, RunInfo};

#[derive(Debug, Parser)]
#[command(
    name = "subsys",
    version,
    about = "Noiseless, protectable and error-correcting subsystem analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, clap::Args)]
pub struct TolArgs {
    /// Residual tolerance for verification checks.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, default_value_t = 1e-12)]
    pub rank_tolerance: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
}

impl TolArgs {
    fn tolerance(&self) -> Result<Tolerance, LinalgError> {
        Tolerance::new(
            self.rank_tolerance,
            self.tolerance,
            Tolerance::default().max_retries,
        )
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose the error algebra and list noiseless subsystems.
    Noiseless {
        ops: PathBuf,
        #[arg(long, env = "SUBSYS_SEED", default_value_t = 0)]
        seed: u64,
        /// Complete the errors to a quantum operation with weight λ first.
        #[arg(long)]
        cptp_lambda: Option<f64>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Decide whether an encoded subsystem can be protected by an initialization.
    Protectable {
        ops: PathBuf,
        enc: PathBuf,
        /// Solver restarts before the search gives up with UNDECIDED.
        #[arg(long, default_value_t = SolverBudget::default().restarts)]
        budget: usize,
        /// Iterations per restart.
        #[arg(long, default_value_t = SolverBudget::default().iterations)]
        iterations: usize,
        #[arg(long, env = "SUBSYS_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Operator error-correction condition for an encoding.
    QecCheck {
        ops: PathBuf,
        enc: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Write example instances: collective, repetition3, shor9-bitflip-sample, planted.
    Gen {
        /// Instance name, optionally with a leading argument: `collective(4)`, `planted(42)`.
        name: String,
        /// key=value parameters, e.g. `n=3` or `seed=42 mults=2,1 irreps=2,2`.
        params: Vec<String>,
        #[arg(short = 'o', long = "out", default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("invalid tolerance: {0}")]
    Tolerance(#[from] LinalgError),
    #[error(transparent)]
    Noiseless(#[from] NoiselessError),
    #[error(transparent)]
    Protect(#[from] ProtectError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Noiseless(NoiselessError::RetriesExhausted { .. }) => 2,
            _ => 1,
        }
    }
}

pub fn run(cli: Cli) -> ExitCode {
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit<T: serde::Serialize>(format: OutputFormat, value: &T, text: impl FnOnce(&T) -> String) {
    match format {
        OutputFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(value).expect("reports serialize")
        ),
        OutputFormat::Text => print!("{}", text(value)),
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Noiseless {
            ops,
            seed,
            cptp_lambda,
            tol,
        } => {
            let tolerance = tol.tolerance()?;
            let errs = io::load_operators(&ops)?;
            let opts = NoiselessOptions {
                seed,
                tol: tolerance,
                cptp_lambda,
            };
            let report = find_noiseless(&errs, &opts)?;
            let out = NoiselessOutput::new(
                RunInfo::new("noiseless", Some(seed), &tolerance),
                errs.dim(),
                &report,
            );
            emit(tol.output, &out, NoiselessOutput::to_text);
            Ok(0)
        }
        Command::Protectable {
            ops,
            enc,
            budget,
            iterations,
            seed,
            tol,
        } => {
            let tolerance = tol.tolerance()?;
            let errs = io::load_operators(&ops)?;
            let encoding = io::load_encoding(&enc, &tolerance)?;
            let budget = SolverBudget {
                restarts: budget,
                iterations,
            };
            let opts = ProtectOptions {
                seed,
                budget,
                tol: tolerance,
            };
            let report = check_protectable(&encoding, &errs, &opts)?;
            let out = ProtectOutput::new(
                RunInfo::new("protectable", Some(seed), &tolerance),
                budget,
                &report,
            );
            emit(tol.output, &out, ProtectOutput::to_text);
            Ok(match report.verdict {
                Verdict::Protectable(_) => 0,
                Verdict::NotProtectable(_) => 3,
                Verdict::Undecided { .. } => 4,
            })
        }
        Command::QecCheck { ops, enc, tol } => {
            let tolerance = tol.tolerance()?;
            let errs = io::load_operators(&ops)?;
            let encoding = io::load_encoding(&enc, &tolerance)?;
            if encoding.dim() != errs.dim() {
                return Err(CliError::Usage(format!(
                    "encoding acts on ℂ^{}, errors on ℂ^{}",
                    encoding.dim(),
                    errs.dim()
                )));
            }
            let check = verify_error_correcting(&encoding, &errs, &tolerance);
            let out = QecOutput::new(RunInfo::new("qec-check", None, &tolerance), &errs, &check);
            emit(tol.output, &out, QecOutput::to_text);
            Ok(if check.passed { 0 } else { 3 })
        }
        Command::Gen { name, params, out } => {
            for path in generate(&name, &params, &out)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}

/// Parsed `key=value` parameters; `name(x)` supplies `x` for `leading`.
struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    fn parse(name: &str, raw: &[String], leading: &str) -> Result<(String, Self), CliError> {
        let mut values = BTreeMap::new();
        let base = match name.split_once('(') {
            Some((base, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(|| {
                    CliError::Usage(format!("unbalanced parentheses in {name:?}"))
                })?;
                if !inner.trim().is_empty() {
                    values.insert(leading.to_string(), inner.trim().to_string());
                }
                base.to_string()
            }
            None => name.to_string(),
        };
        for p in raw {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("parameter {p:?} is not key=value")))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok((base, Self { values }))
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    CliError::Usage(format!("{key}={v} is not a non-negative integer"))
                })
            })
            .unwrap_or(Ok(default))
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64, CliError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    CliError::Usage(format!("{key}={v} is not a non-negative integer"))
                })
            })
            .unwrap_or(Ok(default))
    }

    fn list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .trim_matches(|c| c == '[' || c == ']')
                .split(',')
                .map(|x| {
                    x.trim().parse().map_err(|_| {
                        CliError::Usage(format!("{key}={v} is not a comma-separated list"))
                    })
                })
                .collect(),
        }
    }

    /// Rejects keys outside `allowed` so a typo never falls back to a default.
    fn only(&self, what: &str, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Usage(format!(
                "{what} does not take {k:?}; accepted: {}",
                if allowed.is_empty() {
                    "none".to_string()
                } else {
                    allowed.join(", ")
                }
            ))),
            None => Ok(()),
        }
    }

    fn str<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.values.get(key).map(String::as_str).unwrap_or(default)
    }
}

fn leading_param(name: &str) -> &'static str {
    if name.starts_with("collective") {
        "n"
    } else {
        "seed"
    }
}

/// Writes the named instance into `dir` and returns the files written.
pub fn generate(name: &str, raw: &[String], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (base, p) = Params::parse(name, raw, leading_param(name))?;
    std::fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let ops_file =
        |file: &str, set: &OperatorSet, written: &mut Vec<PathBuf>| -> Result<(), CliError> {
            let path = dir.join(file);
            io::save_operators(&path, set)?;
            written.push(path);
            Ok(())
        };
    match base.as_str() {
        "collective" => {
            p.only("collective", &["n"])?;
            let n = p.usize("n", 3)?;
            if !(1..=10).contains(&n) {
                return Err(CliError::Usage(format!("collective needs 1 ≤ n ≤ 10, got {n}")));
            }
            ops_file(&format!("collective{n}.json"), &collective(n), &mut written)?;
        }
        "repetition3" => {
            p.only("repetition3", &[])?;
            let rc = repetition3();
            ops_file("repetition3_ops.json", &rc.errors, &mut written)?;
            let z1 = OperatorSet::new(
                8,
                vec![("I".into(), CMatrix::identity(8, 8)), ("Z1".into(), on_qubit(&pauli_z(), 0, 3))],
            )
            .expect("8-dim operators");
            ops_file("repetition3_phase_ops.json", &z1, &mut written)?;
            for (file, enc) in [("repetition3_enc.json", &rc.logical_syndrome), ("repetition3_code.json", &rc.code)] {
                let path = dir.join(file);
                io::save_encoding(&path, enc)?;
                written.push(path);
            }
        }
        "shor9-bitflip-sample" => {
            p.only("shor9-bitflip-sample", &[])?;
            let (errs, enc) = shor9_bitflip_sample();
            ops_file("shor9_ops.json", &errs, &mut written)?;
            let path = dir.join("shor9_code.json");
            io::save_encoding(&path, &enc)?;
            written.push(path);
        }
        "planted" => {
            let seed = p.u64("seed", 0)?;
            let (errs, enc, truth) = planted(&p, seed)?;
            ops_file("planted_ops.json", &errs, &mut written)?;
            if let Some(enc) = enc {
                let path = dir.join("planted_enc.json");
                io::save_encoding(&path, &enc)?;
                written.push(path);
            }
            let path = dir.join("planted_truth.json");
            io::write_json(&path, &truth)?;
            written.push(path);
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown instance {other:?}; expected collective, repetition3, shor9-bitflip-sample or planted"
            )))
        }
    }
    Ok(written)
}

type Planted = (
    OperatorSet,
    Option<crate::noiseless::SubsystemEncoding>,
    GroundTruth,
);

fn planted(p: &Params, seed: u64) -> Result<Planted, CliError> {
    match p.str("kind", "noiseless") {
        "noiseless" => {
            p.only("planted noiseless", &["kind", "seed", "mults", "irreps", "ops"])?;
            let mults = p.list("mults", &[2, 1])?;
            let irreps = match p.values.get("irreps") {
                Some(_) => p.list("irreps", &[])?,
                None => vec![2; mults.len()],
            };
            if mults.len() != irreps.len() || mults.is_empty() || mults.iter().chain(&irreps).any(|&x| x == 0) {
                return Err(CliError::Usage("mults and irreps must be equally long lists of positive integers".into()));
            }
            let plant = planted_noiseless(seed, &mults, &irreps, p.usize("ops", 2)?);
            let profile = plant.profile();
            let max_n = profile.iter().map(|&(m, _)| m).max().unwrap_or(0);
            let truth = GroundTruth::Noiseless {
                seed,
                profile,
                max_n,
                w: matrix_to_json(&plant.w),
            };
            Ok((plant.errors, None, truth))
        }
        "similarity" => {
            p.only("planted similarity", &["kind", "seed", "mult", "irrep"])?;
            let (mult, irrep) = (p.usize("mult", 2)?, p.usize("irrep", 2)?);
            if mult == 0 || irrep == 0 {
                return Err(CliError::Usage("mult and irrep must be positive".into()));
            }
            let plant = planted_similarity(seed, mult, irrep);
            let truth = GroundTruth::Similarity {
                seed,
                mult,
                irrep,
                factorization: matrix_to_json(&plant.factorization),
            };
            Ok((plant.errors, None, truth))
        }
        "protectable" => {
            p.only("planted protectable", &["kind", "seed", "d", "n", "s", "extra", "errors"])?;
            let (d, n, s) = (p.usize("d", 8)?, p.usize("n", 2)?, p.usize("s", 2)?);
            let (extra, count) = (p.usize("extra", 2)?, p.usize("errors", 3)?);
            if n == 0 || s == 0 || count == 0 || n * s > d || n + extra > d {
                return Err(CliError::Usage(format!("need n·s ≤ d and n + extra ≤ d, got d={d} n={n} s={s} extra={extra}")));
            }
            let plant = planted_protectable(seed, d, n, s, extra, count);
            let truth = GroundTruth::Protectable {
                seed,
                code: matrix_to_json(&plant.code),
                alphas: matrix_to_json(&plant.alphas),
            };
            Ok((plant.errors, Some(plant.encoding), truth))
        }
        "infeasible" => {
            p.only("planted infeasible", &["kind", "seed", "variant"])?;
            let (kind, reason) = match p.str("variant", "small-preimage") {
                "small-preimage" => (InfeasibleKind::SmallPreimage, "preimage smaller than N"),
                "forced-zero" => (InfeasibleKind::ForcedZero, "constraints force every α to vanish"),
                other => return Err(CliError::Usage(format!("unknown infeasible variant {other:?}"))),
            };
            let (errs, enc) = planted_infeasible(seed, kind);
            let truth = GroundTruth::NotProtectable {
                seed,
                reason: reason.into(),
            };
            Ok((errs, Some(enc), truth))
        }
        "undecided" => {
            p.only("planted undecided", &["kind", "seed"])?;
            let (errs, enc) = budget_exhausting(seed);
            Ok((errs, Some(enc), GroundTruth::Undecidable { seed }))
        }
        other => Err(CliError::Usage(format!(
            "unknown planted kind {other:?}; expected noiseless, similarity, protectable, infeasible or undecided"
        ))),
    }
}
