//! `crpoint` command line. Exit codes: 0 pass, 1 verification failure,
//! 2 input error, 3 degenerate or non-generic input.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::canon::{classify_cosquare, genericity_defect, normal_form, CosquareClass, DEFAULT_TOL};
use crate::error::Error;
use crate::homotopy::{connect_to_model, ConnectOptions, HomotopyPath, DEFAULT_ETA, DEFAULT_MARGIN, DEFAULT_SAMPLES};
use crate::json;
use crate::levi::{positivity_scan, spectra_csv, ModelKind, ScanOptions};
use crate::pairs::{act, sign_class, MatrixPair, Sign, SIGN_TOL};
use crate::selftest;
use crate::surface::{bounds, verify_no_new_complex_points, SurfaceGrid, SurfaceSpec};

#[derive(Debug, Parser)]
#[command(name = "crpoint", version, about = "Classify, normalize and deform quadratic complex points")]
pub struct Cli {
    /// Tolerance: normal-form genericity for classify, normal-form and
    /// homotopy; inequality floor for surface-check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Treat a degenerate classification as an error (exit 3).
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true, env = "CRPOINT_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sign of the block determinant and cosquare class of a pair.
    Classify { input: PathBuf },
    /// Normal form of a generic pair with its group witness.
    NormalForm { input: PathBuf },
    /// Certified path from a pair to the model of its sign.
    Homotopy(HomotopyArgs),
    /// Check the radial construction of a path for new complex points.
    SurfaceCheck(SurfaceArgs),
    /// Levi-form positivity scan of a model neighbourhood function.
    LeviScan(LeviArgs),
    /// Run the acceptance checks.
    Selftest {
        /// Cap on random cases per check (full sizes when omitted).
        #[arg(long)]
        cases: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct HomotopyArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// Path JSON as written by `homotopy`; path(0) is placed at the center.
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Exponent of the radial parameter; defaults to the computed requirement.
    #[arg(long)]
    pub n: Option<u32>,
    /// Put the path's end at the center instead (model at the center for
    /// output of `homotopy`).
    #[arg(long)]
    pub reverse: bool,
    #[arg(long, default_value_t = 64)]
    pub s_steps: usize,
    #[arg(long, default_value_t = 32)]
    pub u_steps: usize,
    #[arg(long, default_value_t = 32)]
    pub theta_steps: usize,
}

#[derive(Debug, Args)]
pub struct LeviArgs {
    #[arg(long)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0.05)]
    pub radius: f64,
    /// Points per dimension; the scan uses grid⁶ low-discrepancy points.
    #[arg(long, default_value_t = 7)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub exclusion: f64,
    #[arg(long)]
    pub include_origin: bool,
    /// Also write per-point spectra as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// A failed run: exit code plus an optional machine-readable reason.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub reason: Option<String>,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, reason: None, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, reason) = match &e {
            Error::DegenerateA => (3, Some("degenerate_A".to_string())),
            Error::DegeneratePair => (3, Some("degenerate".to_string())),
            Error::NonGeneric(r) => (3, Some(format!("non_generic:{}", r.as_str()))),
            Error::DeltaZero(_) => (3, Some("kernel_vector".to_string())),
            Error::PerturbationUncertified | Error::SearchFailed { .. } => (1, Some("uncertified".to_string())),
            _ => (2, None),
        };
        Failure { code, reason, message: e.to_string() }
    }
}

#[derive(Serialize)]
struct Rejection<'a> {
    status: &'static str,
    reason: &'a str,
    message: &'a str,
}

#[derive(Serialize)]
struct ClassifyReport {
    sign: &'static str,
    det4: f64,
    det4_normalized: f64,
    cosquare_class: Option<CosquareClass>,
    genericity_defect: f64,
}

#[derive(Serialize)]
struct SelftestReport {
    seed: u64,
    cases: Option<usize>,
    pass: bool,
    criteria: Vec<selftest::Outcome>,
}

/// Result of a subcommand: JSON text and whether verification passed.
struct Emitted {
    json: String,
    pass: bool,
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T, pass: bool) -> Result<Emitted, Failure> {
    let json = json::to_string(value).map_err(|e| Failure { code: 2, reason: None, message: e.to_string() })?;
    Ok(Emitted { json, pass })
}

fn classify(cli: &Cli, input: &Path) -> Result<Emitted, Failure> {
    let p: MatrixPair = parse(input)?;
    let class = sign_class(&p, SIGN_TOL);
    if cli.strict && class.tag == Sign::Degenerate {
        return Err(Error::DegeneratePair.into());
    }
    let n = p.normalized();
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let report = ClassifyReport {
        sign: class.tag.as_str(),
        det4: class.det4,
        det4_normalized: class.det4_normalized,
        cosquare_class: classify_cosquare(&n.a, tol).ok(),
        genericity_defect: genericity_defect(&n.a),
    };
    emit(&report, true)
}

fn normal_form_cmd(cli: &Cli, input: &Path) -> Result<Emitted, Failure> {
    let p: MatrixPair = parse(input)?;
    if sign_class(&p, SIGN_TOL).tag == Sign::Degenerate {
        return Err(Error::DegeneratePair.into());
    }
    let nf = normal_form(&p, cli.tol.unwrap_or(DEFAULT_TOL))?;
    let image = act(&nf.witness, &p)?;
    let gap = image.distance(&nf.pair());
    if gap > 1e-8 * p.scale().max(1.0) {
        return Err(Failure {
            code: 1,
            reason: Some("witness_mismatch".into()),
            message: format!("witness reproduces the normal form only to {gap:.3e}"),
        });
    }
    emit(&nf, true)
}

fn homotopy(cli: &Cli, args: &HomotopyArgs) -> Result<Emitted, Failure> {
    let p: MatrixPair = parse(&args.input)?;
    if args.samples < 2 {
        return Err(Failure::input("--samples must be at least 2"));
    }
    if !(args.margin.is_finite() && args.margin >= 0.0) {
        return Err(Failure::input("--margin must be non-negative"));
    }
    let opts = ConnectOptions {
        samples: args.samples,
        margin: args.margin,
        seed: cli.seed,
        eta: args.eta,
        tol: cli.tol.unwrap_or(DEFAULT_TOL),
        ..ConnectOptions::default()
    };
    let path = connect_to_model(&p, &opts)?;
    let pass = path.certificate.is_some_and(|c| c.pass);
    emit(&path, pass)
}

fn surface_check(cli: &Cli, args: &SurfaceArgs) -> Result<Emitted, Failure> {
    let mut path: HomotopyPath = parse(&args.input)?;
    path.validate()?;
    if args.reverse {
        path = path.reversed();
    }
    // Never trust a certificate read from a file.
    let (samples, margin) = path.certificate.map_or((DEFAULT_SAMPLES, DEFAULT_MARGIN), |c| (c.samples.max(2), c.margin));
    let cert = path.certify(samples, margin);
    if !cert.pass {
        return Err(Failure {
            code: 1,
            reason: Some("uncertified".into()),
            message: "path certificate does not pass".into(),
        });
    }
    if !path.flattened {
        path = path.flattened();
    }
    if [args.s_steps, args.u_steps, args.theta_steps].iter().any(|&s| s < 2) {
        return Err(Failure::input("grid step counts must be at least 2"));
    }
    let grid = SurfaceGrid {
        s_steps: args.s_steps,
        u_steps: args.u_steps,
        theta_steps: args.theta_steps,
    };
    let tol = cli.tol.unwrap_or(1e-9);
    let spec = SurfaceSpec::new(path, args.epsilon, args.n.unwrap_or(1))?;
    let spec = match args.n {
        Some(_) => spec,
        None => spec.with_n(bounds(&spec, &grid, tol)?.n_required)?,
    };
    let report = verify_no_new_complex_points(&spec, &grid, tol, cli.seed)?;
    emit(&report, report.pass)
}

fn levi_scan(cli: &Cli, args: &LeviArgs) -> Result<Emitted, Failure> {
    let opts = ScanOptions {
        radius: args.radius,
        gridsize: args.grid,
        exclusion: args.exclusion,
        include_origin: args.include_origin,
        seed: cli.seed,
    };
    let report = positivity_scan(args.model, &opts)?;
    if let Some(csv) = &args.csv {
        fs::write(csv, spectra_csv(&report)).map_err(|e| Failure::input(format!("{}: {e}", csv.display())))?;
    }
    let pass = report.violation_count == 0 && (args.model == ModelKind::Elliptic || report.min_trace > 0.0);
    emit(&report, pass)
}

fn selftest_cmd(cli: &Cli, cases: Option<usize>) -> Result<Emitted, Failure> {
    let cfg = selftest::Config { seed: cli.seed, cases };
    let criteria = selftest::run_all(&cfg);
    for c in &criteria {
        eprintln!("{c}");
    }
    let pass = criteria.iter().all(|c| c.pass);
    emit(&SelftestReport { seed: cli.seed, cases, pass, criteria }, pass)
}

fn dispatch(cli: &Cli) -> Result<Emitted, Failure> {
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::input(format!("--tol must be positive, got {t}")));
        }
    }
    match &cli.command {
        Command::Classify { input } => classify(cli, input),
        Command::NormalForm { input } => normal_form_cmd(cli, input),
        Command::Homotopy(args) => homotopy(cli, args),
        Command::SurfaceCheck(args) => surface_check(cli, args),
        Command::LeviScan(args) => levi_scan(cli, args),
        Command::Selftest { cases } => selftest_cmd(cli, *cases),
    }
}

fn write_output(cli: &Cli, text: &str) -> io::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    if let Some(n) = cli.threads {
        // Only fails if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match dispatch(cli) {
        Ok(out) => write_output(cli, &out.json).map(|_| if out.pass { 0 } else { 1 }),
        Err(f) => {
            eprintln!("error: {}", f.message);
            match &f.reason {
                Some(reason) => {
                    let body = Rejection { status: "rejected", reason, message: &f.message };
                    let text = json::to_string(&body).expect("plain struct serializes");
                    write_output(cli, &text).map(|_| f.code)
                }
                None => Ok(f.code),
            }
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: writing output: {e}");
        2
    })
}

/// Entry point for the binary: clap usage errors map to exit 2.
pub fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => ExitCode::from(run(&cli)),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            ExitCode::from(code)
        }
    }
}
