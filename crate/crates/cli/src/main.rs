//! Command line front end: construct switch processes, validate process
//! files, run batched causal-order violation searches, and scan amplitude
//! combinations of two operators for unitarity.
//!
//! Every run emits a single JSON report embedding the echoed configuration,
//! the library version, and the full result matrices, so reports double as
//! regression fixtures. Runs are deterministic: identical configuration and
//! seed reproduce every byte of the report except the `duration_ms` field.
//! Exit status separates verdicts from plumbing: 0 for a successful run
//! whose verdict is positive, 1 for a negative verdict (an invalid process,
//! or a batch that failed to certify every violation), 2 for usage and
//! input errors.

use std::fs;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use procmat::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use procmat::channels::{linear_combination_unitarity, AmplitudeGrid};
use procmat::linalg::CMatrix;
use procmat::nogo::{batch_chain_witnesses, batch_witnesses};
use procmat::process::{
    is_valid_process, superpose, switch3, switch4, Process, ProcessJson, ProcessMatrix,
    ProcessVector, ValidityOptions, ValidityReport,
};
use procmat::tensor::{pauli, LabeledOperator, LabeledVector};

const EXIT_INVALID: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "procmat",
    version,
    about = "Process toolkit: switch constructors, validity checks, and causal-order witness searches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a process file for validity (positivity, normalization, unit
    /// probability on deterministic operation tuples).
    Validate(ValidateArgs),
    /// Emit a coherent order-switch process vector.
    Switch(SwitchArgs),
    /// Witness search over random superposed two-party contexts.
    NogoBatch(NogoBatchArgs),
    /// Witness search over random pairs of oppositely ordered chains.
    NogoChains(NogoChainsArgs),
    /// Scan amplitude combinations of two operators for unitarity.
    UnitarySuperpose(SuperposeArgs),
}

#[derive(Args, Serialize)]
struct ValidateArgs {
    /// Process JSON (a process envelope, a report wrapping one under
    /// `results.process`, or a superposition payload); standard input when
    /// omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Permitted deviation of probabilities and trace from their targets.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Permitted negative slack on the smallest eigenvalue.
    #[arg(long, default_value_t = 1e-10)]
    psd_tol: f64,
    /// Permitted Hermiticity residual.
    #[arg(long, default_value_t = 1e-10)]
    hermiticity_tol: f64,
    /// Haar-sampled CPTP tuples for the randomized cross-check.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Seed of the sampled route.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SwitchArgs {
    /// 4: source releases the control and the sink receives it back;
    /// 3: fixed target state, the control lives only at the sink.
    #[arg(long, value_parser = clap::value_parser!(u8).range(3..=4))]
    variant: u8,
    /// Target dimension (variant 3 with the default basis state).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Target amplitudes for variant 3 as JSON `[re, im]` pairs,
    /// e.g. `[[0.6, 0], [0, 0.8]]`.
    #[arg(long)]
    psi: Option<String>,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct NogoBatchArgs {
    /// Wire dimension of the chain unitaries (at least 2).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Number of random contexts.
    #[arg(long)]
    trials: usize,
    /// Master seed; per-trial sub-seeds are drawn from it.
    #[arg(long)]
    seed: u64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct NogoChainsArgs {
    /// Number of intermediate parties per chain (at least 2).
    #[arg(long)]
    parties: usize,
    /// Wire dimension of the chain unitaries (at least 2).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Number of random chain pairs.
    #[arg(long)]
    trials: usize,
    /// Master seed; per-trial sub-seeds are drawn from it.
    #[arg(long)]
    seed: u64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SuperposeArgs {
    /// First operator: a token (id, sx, sy, sz, h, ladder) or a JSON matrix
    /// of `[re, im]` pairs.
    #[arg(long)]
    u1: String,
    /// Second operator, same formats.
    #[arg(long)]
    u2: String,
    /// Fixed alpha as a JSON pair `[re, im]`; both amplitudes omitted scans
    /// the default real grid.
    #[arg(long)]
    alpha: Option<String>,
    /// Fixed beta as a JSON pair `[re, im]`.
    #[arg(long)]
    beta: Option<String>,
    /// Unitarity acceptance tolerance on the max-norm residual.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Operational failure: bad arguments, unreadable files, malformed JSON.
#[derive(Debug)]
struct CliError(String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<procmat::Error> for CliError {
    fn from(e: procmat::Error) -> Self {
        CliError(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    match cli.command {
        Command::Validate(args) => run_validate(args, started),
        Command::Switch(args) => run_switch(args, started),
        Command::NogoBatch(args) => run_nogo_batch(args, started),
        Command::NogoChains(args) => run_nogo_chains(args, started),
        Command::UnitarySuperpose(args) => run_superpose(args, started),
    }
}

/// Envelope shared by every subcommand's report. `duration_ms` is the only
/// field allowed to differ between identically configured runs.
#[derive(Serialize)]
struct ReportDocument<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    config: &'a C,
    version: &'a str,
    results: &'a R,
    duration_ms: f64,
}

fn emit<C: Serialize, R: Serialize>(
    command: &str,
    config: &C,
    results: &R,
    started: Instant,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let doc = ReportDocument {
        command,
        config,
        version: procmat::VERSION,
        results,
        duration_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| CliError(format!("cannot write `{}`: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidateResults<'a> {
    verdict: &'static str,
    report: &'a ValidityReport,
}

fn run_validate(args: ValidateArgs, started: Instant) -> Result<ExitCode, CliError> {
    if args.tol <= 0.0 || args.psd_tol <= 0.0 || args.hermiticity_tol <= 0.0 {
        return Err(CliError("tolerances must be positive".into()));
    }
    let text = read_input(args.input.as_deref())?;
    let w = parse_process_payload(&text)?;
    let options = ValidityOptions {
        psd_tol: args.psd_tol,
        norm_tol: args.tol,
        hermiticity_tol: args.hermiticity_tol,
        random_tuples: args.samples,
        seed: args.seed,
    };
    let report = is_valid_process(&w, &options)?;
    let verdict = if report.is_valid { "valid" } else { "invalid" };
    emit(
        "validate",
        &args,
        &ValidateResults { verdict, report: &report },
        started,
        args.out.as_deref(),
    )?;
    Ok(if report.is_valid { ExitCode::SUCCESS } else { ExitCode::from(EXIT_INVALID) })
}

#[derive(Serialize)]
struct SwitchResults<'a> {
    process: &'a ProcessVector,
}

fn run_switch(args: SwitchArgs, started: Instant) -> Result<ExitCode, CliError> {
    let process = match args.variant {
        4 => switch4(),
        _ => switch3(&parse_psi(&args)?)?,
    };
    emit("switch", &args, &SwitchResults { process: &process }, started, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_nogo_batch(args: NogoBatchArgs, started: Instant) -> Result<ExitCode, CliError> {
    if args.dim < 2 {
        return Err(CliError("--dim must be at least 2".into()));
    }
    let batch = batch_witnesses(args.dim, args.trials, args.seed)?;
    emit("nogo-batch", &args, &batch, started, args.out.as_deref())?;
    Ok(if batch.all_violate { ExitCode::SUCCESS } else { ExitCode::from(EXIT_INVALID) })
}

fn run_nogo_chains(args: NogoChainsArgs, started: Instant) -> Result<ExitCode, CliError> {
    if args.dim < 2 {
        return Err(CliError("--dim must be at least 2".into()));
    }
    if args.parties < 2 {
        return Err(CliError("--parties must be at least 2".into()));
    }
    let batch = batch_chain_witnesses(args.parties, args.dim, args.trials, args.seed)?;
    emit("nogo-chains", &args, &batch, started, args.out.as_deref())?;
    Ok(if batch.all_violate { ExitCode::SUCCESS } else { ExitCode::from(EXIT_INVALID) })
}

fn run_superpose(args: SuperposeArgs, started: Instant) -> Result<ExitCode, CliError> {
    if args.tol <= 0.0 {
        return Err(CliError("--tol must be positive".into()));
    }
    let u1 = parse_gate(&args.u1)?;
    let u2 = parse_gate(&args.u2)?;
    let grid = match (&args.alpha, &args.beta) {
        (Some(a), Some(b)) => AmplitudeGrid::singleton(parse_complex(a)?, parse_complex(b)?),
        (None, None) => AmplitudeGrid::default_real(),
        _ => return Err(CliError("provide both --alpha and --beta, or neither".into())),
    };
    let scan = linear_combination_unitarity(&u1, &u2, &grid, args.tol)?;
    emit("unitary-superpose", &args, &scan, started, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| CliError(format!("cannot read `{}`: {e}", p.display()))),
        None => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError(format!("cannot read standard input: {e}")))?;
            Ok(text)
        }
    }
}

/// Two process vectors with superposition amplitudes, as stored on disk.
#[derive(Deserialize)]
struct SuperpositionFile {
    alpha: (f64, f64),
    beta: (f64, f64),
    processes: Vec<ProcessJson>,
}

/// Accepts a bare process envelope, a report wrapping one under
/// `results.process`, or a superposition payload, and returns the process
/// matrix to validate.
fn parse_process_payload(text: &str) -> Result<ProcessMatrix, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError(format!("malformed JSON: {e}")))?;
    let value = match value.get("results") {
        Some(results) => results
            .get("process")
            .cloned()
            .ok_or_else(|| CliError("report has no `results.process` field".into()))?,
        None => value,
    };
    if value.get("kind").is_some() {
        let envelope: ProcessJson = serde_json::from_value(value)
            .map_err(|e| CliError(format!("process envelope: {e}")))?;
        return Ok(envelope.into_process()?.to_matrix());
    }
    if value.get("processes").is_some() {
        let file: SuperpositionFile = serde_json::from_value(value)
            .map_err(|e| CliError(format!("superposition payload: {e}")))?;
        let mut terms = file.processes;
        if terms.len() != 2 {
            return Err(CliError(format!(
                "superposition payload needs exactly 2 processes, got {}",
                terms.len()
            )));
        }
        let second = as_vector(terms.pop().expect("len 2"))?;
        let first = as_vector(terms.pop().expect("len 1"))?;
        let alpha = C64::new(file.alpha.0, file.alpha.1);
        let beta = C64::new(file.beta.0, file.beta.1);
        return Ok(superpose(alpha, &first, beta, &second)?.to_matrix());
    }
    Err(CliError(
        "input is neither a process envelope (`kind`) nor a superposition payload (`processes`)"
            .into(),
    ))
}

fn as_vector(envelope: ProcessJson) -> Result<ProcessVector, CliError> {
    match envelope.into_process()? {
        Process::Vector(w) => Ok(w),
        Process::Matrix(_) => {
            Err(CliError("superposition terms must be process vectors".into()))
        }
    }
}

fn parse_psi(args: &SwitchArgs) -> Result<LabeledVector, CliError> {
    match &args.psi {
        Some(text) => {
            let pairs: Vec<(f64, f64)> =
                serde_json::from_str(text).map_err(|e| CliError(format!("--psi: {e}")))?;
            let amps: Vec<C64> = pairs.iter().map(|&(re, im)| C64::new(re, im)).collect();
            Ok(LabeledVector::ket("t", amps)?)
        }
        None => Ok(LabeledVector::basis("t", args.dim, 0)?),
    }
}

fn parse_complex(text: &str) -> Result<C64, CliError> {
    let (re, im): (f64, f64) = serde_json::from_str(text)
        .map_err(|e| CliError(format!("expected a JSON pair [re, im]: {e}")))?;
    Ok(C64::new(re, im))
}

fn parse_gate(text: &str) -> Result<LabeledOperator, CliError> {
    let gate = match text {
        "id" => pauli::id(),
        "sx" => pauli::x(),
        "sy" => pauli::y(),
        "sz" => pauli::z(),
        "h" => pauli::hadamard(),
        "ladder" => ladder(),
        other if other.trim_start().starts_with('[') => {
            let rows: Vec<Vec<(f64, f64)>> = serde_json::from_str(other)
                .map_err(|e| CliError(format!("operator matrix: {e}")))?;
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(CliError(
                    "operator must be a nonempty square matrix of [re, im] pairs".into(),
                ));
            }
            let m = CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j].0, rows[i][j].1));
            LabeledOperator::gate(m)?
        }
        other => {
            return Err(CliError(format!(
                "unknown operator `{other}`; use id, sx, sy, sz, h, ladder, or a JSON matrix"
            )))
        }
    };
    Ok(gate)
}

/// `(sigma_x + i sigma_y)/sqrt(2)`: proportional to a single ladder
/// operator, not unitary on its own.
fn ladder() -> LabeledOperator {
    let (sx, sy) = (pauli::x(), pauli::y());
    let m = (sx.matrix() + sy.matrix() * C64::new(0.0, 1.0)).unscale(2f64.sqrt());
    LabeledOperator::gate(m).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_parser_accepts_bare_and_wrapped_envelopes() {
        let w = switch4();
        let bare = serde_json::to_string(&w).unwrap();
        let parsed = parse_process_payload(&bare).unwrap();
        assert_eq!(parsed.operator(), w.to_matrix().operator());

        let wrapped = format!(r#"{{"config":{{}},"results":{{"process":{bare}}}}}"#);
        let parsed = parse_process_payload(&wrapped).unwrap();
        assert_eq!(parsed.operator(), w.to_matrix().operator());
    }

    #[test]
    fn payload_parser_superposes_two_vectors() {
        use procmat::process::{default_chain_parties, markovian_unitary_process, CausalOrder};
        let parties = default_chain_parties(2, 2).unwrap();
        let gates = vec![pauli::id(), pauli::id(), pauli::id()];
        let w1 =
            markovian_unitary_process(&parties, &CausalOrder::sequential(2), &gates).unwrap();
        let w2 = markovian_unitary_process(&parties, &CausalOrder::reversed(2), &gates).unwrap();
        let text = format!(
            r#"{{"alpha":[0.6,0],"beta":[0,0.8],"processes":[{},{}]}}"#,
            serde_json::to_string(&w1).unwrap(),
            serde_json::to_string(&w2).unwrap()
        );
        let parsed = parse_process_payload(&text).unwrap();
        let direct = superpose(C64::new(0.6, 0.0), &w1, C64::new(0.0, 0.8), &w2)
            .unwrap()
            .to_matrix();
        assert_eq!(parsed.operator(), direct.operator());
    }

    #[test]
    fn gate_tokens_and_json_matrices_parse() {
        assert!(parse_gate("h").unwrap().is_unitary(1e-12));
        let m = parse_gate("[[[0,0],[1,0]],[[1,0],[0,0]]]").unwrap();
        assert_eq!(m.matrix(), pauli::x().matrix());
        assert!(parse_gate("flip").is_err());
        // The ladder operator is maximally non-unitary.
        let lad = ladder();
        assert!(!lad.is_unitary(0.5));
    }

    #[test]
    fn unknown_payloads_are_rejected() {
        assert!(parse_process_payload("{\"foo\": 1}").is_err());
        assert!(parse_process_payload("not json").is_err());
    }
}
