//! `catlab`: experiments with quantized cat maps modulo prime powers.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or validation
//! error, 3 numeric or budget error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use catlab_core::arith::PrimePowerModulus;
use catlab_core::fixtures;
use catlab_core::format::fmt_sig12;
use catlab_core::quantization::{build_propagator, egorov_residual, Observable};
use catlab_core::spectra::{decay_experiment, SpectralOptions};
use catlab_core::symplectic::{admit, good_primes, matrix_order, validate_matrix, SymplecticMatrix};
use catlab_core::verify::{
    count_q, counters, moment_identity, run_suite, saving_sweep, spectral_data, write_moments_csv, exp_sum,
    sequence_period, CongruenceCount, ExpSumRecord, RateConstants, SuiteConfig,
};
use catlab_core::CatError;

#[derive(Parser)]
#[command(name = "catlab", version, about = "Quantized cat maps modulo prime powers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a matrix is an admissible classical map.
    Validate(MatrixArgs),
    /// List good primes up to a limit.
    Primes {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long, default_value_t = 100)]
        limit: u64,
    },
    /// Order of A modulo p^k.
    Order {
        #[command(flatten)]
        target: Target,
        #[arg(short)]
        k: u32,
    },
    /// Build the propagator and report its contract checks.
    Propagator {
        #[command(flatten)]
        target: Target,
        #[arg(short)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write nonzero entries as CSV `row,col,re,im`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrepancy of an observable across moduli p^k.
    Discrepancy {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        ks: KRange,
        /// Observable JSON; defaults to cos(2 pi x_1).
        #[arg(long)]
        observable: Option<PathBuf>,
        /// Insert conjugate terms instead of rejecting a non-real observable.
        #[arg(long)]
        symmetrize: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "auto")]
        eigensolver: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count solutions of u(A^x1 + .. - A^ys) = 0 mod p^k.
    Qcount {
        #[command(flatten)]
        target: Target,
        #[arg(short)]
        k: u32,
        #[arg(short, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        u: Vec<i64>,
        #[arg(short, default_value_t = 1)]
        s: u32,
        #[arg(long, default_value = "meet-in-the-middle")]
        method: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Complete exponential sums over eigenvalue sequences, r = 1..k.
    Expsum {
        #[command(flatten)]
        target: Target,
        #[arg(short)]
        k: u32,
        /// Coefficient vector; without it every a with gcd(a, p) = 1 is swept
        /// and the largest saving per r is reported.
        #[arg(short, value_delimiter = ',', allow_hyphen_values = true)]
        a: Option<Vec<i64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moment identities for r = 1..k and 1..s, with T = ord(A, p^r).
    Moments {
        #[command(flatten)]
        target: Target,
        #[arg(short)]
        k: u32,
        #[arg(short, default_value_t = 2)]
        s: u32,
        #[arg(long, default_value = "meet-in-the-middle")]
        method: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification battery.
    Verify {
        /// Matrix JSON; defaults to [[1,4],[2,9]].
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(short, default_value_t = 5)]
        p: u64,
        #[arg(short, default_value_t = 2)]
        k: u32,
        #[arg(short, default_value_t = 2)]
        s: u32,
        #[arg(short, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
        u: Vec<i64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        assume_irreducible: bool,
        /// Corrupt the propagator before the Egorov check (testing only).
        #[arg(long)]
        fault: bool,
        #[arg(long, default_value = "meet-in-the-middle")]
        method: String,
        #[arg(long, default_value = "auto")]
        eigensolver: String,
    },
    /// Exact rate constants for dimension d.
    Rates {
        #[arg(short, default_value_t = 1)]
        d: u32,
        /// Also print eta_d(s) and d/(2s).
        #[arg(short)]
        s: Option<u64>,
    },
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    assume_irreducible: bool,
}

#[derive(Args)]
struct Target {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(short)]
    p: u64,
    /// Skip the good-prime requirement.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct KRange {
    #[arg(short, conflicts_with_all = ["k_min", "k_max"])]
    k: Option<u32>,
    #[arg(long, requires = "k_max")]
    k_min: Option<u32>,
    #[arg(long, requires = "k_min")]
    k_max: Option<u32>,
}

impl KRange {
    fn values(&self) -> Result<Vec<u32>, Failure> {
        match (self.k, self.k_min, self.k_max) {
            (Some(k), _, _) => Ok(vec![k]),
            (None, Some(lo), Some(hi)) if lo >= 1 && lo <= hi => Ok((lo..=hi).collect()),
            _ => Err(Failure::input("give -k or a range --k-min <= --k-max with k >= 1")),
        }
    }
}

/// A failed command: message for stderr plus exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<CatError> for Failure {
    fn from(e: CatError) -> Self {
        Self { code: if e.is_numeric() { 3 } else { 2 }, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::input(format!("i/o error: {e}"))
    }
}

type CmdResult = Result<u8, Failure>;

fn load_matrix(path: &Path) -> Result<SymplecticMatrix, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read matrix {}: {e}", path.display())))?;
    SymplecticMatrix::from_json(&text).map_err(|e| Failure::input(format!("invalid matrix {}: {e}", path.display())))
}

fn load_observable(path: Option<&Path>, d: usize, symmetrize: bool) -> Result<Observable, Failure> {
    let Some(path) = path else {
        return Ok(fixtures::cos_x1(d));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read observable {}: {e}", path.display())))?;
    let f = Observable::from_json(&text, symmetrize)?;
    if f.d() != d {
        return Err(Failure::input(format!("observable has d = {} but the matrix has d = {d}", f.d())));
    }
    Ok(f)
}

/// Loads the matrix, requires admission and, unless forced, a good prime.
fn load_target(t: &Target) -> Result<SymplecticMatrix, Failure> {
    let a = load_matrix(&t.matrix.matrix)?;
    check_target(&a, t.p, t.force, t.matrix.assume_irreducible)?;
    Ok(a)
}

fn check_target(a: &SymplecticMatrix, p: u64, force: bool, assume_irreducible: bool) -> Result<(), Failure> {
    let adm = admit(a, assume_irreducible)?;
    if !force && !adm.is_good_prime(p) {
        return Err(Failure::input(format!("{p} is not a good prime for this matrix (use --force to override)")));
    }
    Ok(())
}

/// Writes to `out` or stdout.
fn emit(out: Option<&Path>, body: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            io::stdout().write_all(body)?;
            Ok(())
        }
    }
}

fn cmd_validate(args: &MatrixArgs) -> CmdResult {
    let a = load_matrix(&args.matrix)?;
    let report = validate_matrix(&a);
    print!("{report}");
    if report.admitted_with(args.assume_irreducible) {
        println!("admitted");
        Ok(0)
    } else {
        println!("not admitted");
        Ok(2)
    }
}

fn cmd_primes(args: &MatrixArgs, limit: u64) -> CmdResult {
    let a = load_matrix(&args.matrix)?;
    let adm = admit(&a, args.assume_irreducible)?;
    let primes: Vec<String> = good_primes(&adm, limit).iter().map(u64::to_string).collect();
    println!("{}", primes.join(" "));
    Ok(0)
}

fn cmd_order(t: &Target, k: u32) -> CmdResult {
    let a = load_target(t)?;
    println!("{}", matrix_order(&a, t.p, k)?);
    Ok(0)
}

fn cmd_propagator(t: &Target, k: u32, seed: u64, out: Option<&Path>) -> CmdResult {
    let a = load_target(t)?;
    let ctx = PrimePowerModulus::new(t.p, k)?;
    let prop = build_propagator(&a, &ctx)?;
    let residual = egorov_residual(&prop, &a, 100, seed)?;
    println!("N={} dim={}", ctx.n(), prop.dim());
    if let Some(support) = prop.support() {
        println!("nonzeros per row: {support}");
    }
    println!("unitarity residual: {:.3e}", prop.unitarity_residual());
    println!("egorov residual: {residual:.3e}");
    if let Some(path) = out {
        let mut body = String::from("row,col,re,im\n");
        let m = prop.matrix();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m[(i, j)];
                if z.norm() > 0.0 {
                    body.push_str(&format!("{i},{j},{},{}\n", fmt_sig12(z.re), fmt_sig12(z.im)));
                }
            }
        }
        emit(Some(path), body.as_bytes())?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_discrepancy(
    t: &Target,
    ks: &KRange,
    observable: Option<&Path>,
    symmetrize: bool,
    seed: u64,
    eigensolver: &str,
    out: Option<&Path>,
) -> CmdResult {
    let a = load_target(t)?;
    let ks = ks.values()?;
    let f = load_observable(observable, a.d(), symmetrize)?;
    let opts = SpectralOptions::with_solver(eigensolver, seed)?;
    for &k in &ks {
        PrimePowerModulus::new(t.p, k)?;
        catlab_core::quantization::dense_dim(t.p.pow(k), a.d())
            .map_err(|e| Failure { code: 3, message: format!("k={k}: {e}") })?;
    }
    let exp = decay_experiment(&a, t.p, &ks, &f, &opts)?;
    let mut csv = Vec::new();
    exp.write_csv(&mut csv)?;
    emit(out, &csv)?;
    let mut summary: Box<dyn Write> = if out.is_some() { Box::new(io::stdout()) } else { Box::new(io::stderr()) };
    match exp.slope {
        Some(s) => writeln!(summary, "slope {}", fmt_sig12(s))?,
        None => writeln!(summary, "slope undefined")?,
    }
    writeln!(summary, "reference -kappa_{} = -{} = {}", a.d(), exp.kappa_text, fmt_sig12(-exp.kappa))?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_qcount(t: &Target, k: u32, u: &[i64], s: u32, method: &str, out: Option<&Path>) -> CmdResult {
    let a = load_target(t)?;
    let ctx = PrimePowerModulus::new(t.p, k)?;
    let counter = counters().get(method)?;
    let c = count_q(&a, &ctx, u, s, counter.as_ref())?;
    let body = format!("{}\n{}\n", CongruenceCount::CSV_HEADER, c.csv_row());
    emit(out, body.as_bytes())?;
    Ok(0)
}

fn cmd_expsum(t: &Target, k: u32, a_vec: Option<&[i64]>, out: Option<&Path>) -> CmdResult {
    let a = load_target(t)?;
    let sd = spectral_data(&a, t.p, k)?;
    let mut body = format!("{}\n", ExpSumRecord::CSV_HEADER);
    for r in 1..=k {
        let rec = match a_vec {
            Some(v) => {
                let t_r = sequence_period(&sd, v, r)?;
                exp_sum(&sd, v, r, t_r)?
            }
            None => {
                let sweep = saving_sweep(&sd, r)?;
                let best = sweep
                    .records
                    .iter()
                    .find(|rec| rec.a == sweep.argmax)
                    .cloned()
                    .ok_or_else(|| Failure::input("no coefficient vector with gcd(a, p) = 1"))?;
                eprintln!("r={r}: {} vectors, max saving at a={:?}", sweep.vectors, sweep.argmax);
                best
            }
        };
        body.push_str(&rec.csv_row());
        body.push('\n');
    }
    emit(out, body.as_bytes())?;
    Ok(0)
}

fn cmd_moments(t: &Target, k: u32, s_max: u32, method: &str, out: Option<&Path>) -> CmdResult {
    let a = load_target(t)?;
    let sd = spectral_data(&a, t.p, k)?;
    let counter = counters().get(method)?;
    let mut reports = Vec::new();
    for r in 1..=k {
        let order = matrix_order(&a, t.p, r)?;
        for s in 1..=s_max {
            reports.push(moment_identity(&sd, r, s, order, counter.as_ref())?);
        }
    }
    let mut csv = Vec::new();
    write_moments_csv(&reports, &mut csv)?;
    emit(out, &csv)?;
    Ok(if reports.iter().all(|r| r.matches()) { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    matrix: Option<&Path>,
    p: u64,
    k: u32,
    s: u32,
    u: Vec<i64>,
    seed: u64,
    flags: (bool, bool, bool),
    method: &str,
    eigensolver: &str,
) -> CmdResult {
    let (force, assume_irreducible, fault) = flags;
    let a = match matrix {
        Some(path) => load_matrix(path)?,
        None => fixtures::a2(),
    };
    check_target(&a, p, force, assume_irreducible)?;
    let counter = counters().get(method)?;
    let cfg = SuiteConfig {
        matrix: a,
        p,
        k_max: k,
        s_max: s,
        u,
        seed,
        fault,
        counter: counter.as_ref(),
        spectral: SpectralOptions::with_solver(eigensolver, seed)?,
    };
    let results = run_suite(&cfg);
    for r in &results {
        println!("{r}");
    }
    Ok(if results.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn cmd_rates(d: u32, s: Option<u64>) -> CmdResult {
    if d == 0 {
        return Err(Failure::input("d must be at least 1"));
    }
    let r = RateConstants::new(d);
    println!("{r}");
    if let Some(s) = s {
        if s == 0 {
            return Err(Failure::input("s must be at least 1"));
        }
        if r.eta_applies(s) {
            println!("eta({s})={}", r.eta(s));
        } else {
            println!("alt({s})={}", r.alt_exponent(s));
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Primes { matrix, limit } => cmd_primes(&matrix, limit),
        Command::Order { target, k } => cmd_order(&target, k),
        Command::Propagator { target, k, seed, out } => cmd_propagator(&target, k, seed, out.as_deref()),
        Command::Discrepancy { target, ks, observable, symmetrize, seed, eigensolver, out } => {
            cmd_discrepancy(&target, &ks, observable.as_deref(), symmetrize, seed, &eigensolver, out.as_deref())
        }
        Command::Qcount { target, k, u, s, method, out } => cmd_qcount(&target, k, &u, s, &method, out.as_deref()),
        Command::Expsum { target, k, a, out } => cmd_expsum(&target, k, a.as_deref(), out.as_deref()),
        Command::Moments { target, k, s, method, out } => cmd_moments(&target, k, s, &method, out.as_deref()),
        Command::Verify { matrix, p, k, s, u, seed, force, assume_irreducible, fault, method, eigensolver } => {
            cmd_verify(matrix.as_deref(), p, k, s, u, seed, (force, assume_irreducible, fault), &method, &eigensolver)
        }
        Command::Rates { d, s } => cmd_rates(d, s),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("catlab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
