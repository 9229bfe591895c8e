//! `nc-orlicz` command-line driver.
//!
//! Every command prints JSON lines (one record per line). Exit codes: 0 on
//! success, 1 when a check or invariant fails, 2 on input errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use nc_orlicz::counterexample::{build_example, DEFAULT_BETA, DEFAULT_N_MAX, MAX_N_MAX, NOTES};
use nc_orlicz::duality::{dual_report, SearchOptions};
use nc_orlicz::io::{parse_element, parse_nfunction, parse_trace, parse_weight};
use nc_orlicz::nfunction::log_grid;
use nc_orlicz::orlicz::{amemiya_norm, luxemburg_norm, lp_norm};
use nc_orlicz::suite::{registry, run_suite, SuiteConfig};
use nc_orlicz::weighted::isometry_check;
use nc_orlicz::{BlockElement, Error, NFunction, TraceSpec, WeightSpec, WeightedOrlicz};

#[derive(Parser)]
#[command(name = "nc-orlicz", version, about = "Noncommutative and weighted Orlicz norms on block matrix algebras")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Luxemburg, Amemiya, L_p and weighted norms of an element.
    Norm(NormArgs),
    /// Complementary N-function and sample values.
    Conjugate(ConjugateArgs),
    /// Norm of the functional x ↦ τ(xy) with its bracketing quantities.
    Dual(DualArgs),
    /// Compare the weighted norm with the Luxemburg norm of U(x).
    IsometryCheck(IsometryArgs),
    /// Table for the ℓ∞ construction separating the two weighted norms.
    Counterexample(CounterexampleArgs),
    /// Run the seeded invariant suites.
    Proptest(ProptestArgs),
}

#[derive(Args)]
struct PhiArg {
    /// N-function record, inline JSON or a file path.
    #[arg(long, default_value = r#"{"kind":"power","p":2.0}"#)]
    phi: String,
}

#[derive(Args)]
struct ElementArgs {
    /// Element record file (`-` for stdin).
    input: PathBuf,
    /// Trace record file; defaults to the standard trace (all weights 1).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct WeightArgs {
    /// Weight record file.
    #[arg(long)]
    weight: Option<PathBuf>,
    /// Overrides the weight's alpha.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    element: ElementArgs,
    #[command(flatten)]
    phi: PhiArg,
    #[command(flatten)]
    weight: WeightArgs,
    /// Also report the L_p norm.
    #[arg(long)]
    lp: Option<f64>,
}

#[derive(Args)]
struct ConjugateArgs {
    #[command(flatten)]
    phi: PhiArg,
    /// Sample points; defaults to a log grid on [1e-2, 1e2].
    #[arg(long = "at", value_delimiter = ',')]
    at: Vec<f64>,
}

#[derive(Args)]
struct DualArgs {
    #[command(flatten)]
    element: ElementArgs,
    #[command(flatten)]
    phi: PhiArg,
    /// Seed for the ascent restarts (matrix case).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
}

#[derive(Args)]
struct IsometryArgs {
    #[command(flatten)]
    element: ElementArgs,
    #[command(flatten)]
    phi: PhiArg,
    #[command(flatten)]
    weight: WeightArgs,
    /// Largest accepted relative difference.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = DEFAULT_N_MAX as u64,
          value_parser = clap::value_parser!(u64).range(2..=MAX_N_MAX as u64))]
    n_max: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ProptestArgs {
    #[arg(long, default_value_t = SuiteConfig::default().seed)]
    seed: u64,
    /// Instances per suite (overrides each suite's default).
    #[arg(long)]
    count: Option<usize>,
    /// Multiplier applied to every tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol: f64,
    /// Restrict to the named suites (repeatable).
    #[arg(long)]
    only: Vec<String>,
    /// List suite names and exit.
    #[arg(long)]
    list: bool,
}

/// Failure modes mapped to exit codes.
enum Fail {
    Input(String),
    Check(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence(_) => Fail::Check(e.to_string()),
            _ => Fail::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail::Input(e.to_string())
    }
}

type Outcome = std::result::Result<bool, Fail>;

fn read_text(path: &Path) -> std::result::Result<String, Fail> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn load_phi(arg: &PhiArg) -> std::result::Result<NFunction, Fail> {
    let text = if arg.phi.trim_start().starts_with('{') {
        arg.phi.clone()
    } else {
        read_text(Path::new(&arg.phi))?
    };
    Ok(parse_nfunction(&text)?)
}

fn load_element(args: &ElementArgs) -> std::result::Result<(BlockElement, TraceSpec), Fail> {
    let x = parse_element(&read_text(&args.input)?)?;
    let tau = match &args.trace {
        Some(p) => parse_trace(&read_text(p)?, x.shape())?,
        None => TraceSpec::standard(x.shape()),
    };
    Ok((x, tau))
}

fn load_weight(args: &WeightArgs) -> std::result::Result<Option<WeightSpec>, Fail> {
    let Some(path) = &args.weight else {
        if args.alpha.is_some() {
            return Err(Fail::Input("--alpha needs --weight".into()));
        }
        return Ok(None);
    };
    let w = parse_weight(&read_text(path)?)?;
    Ok(Some(match args.alpha {
        Some(a) => w.with_alpha(a)?,
        None => w,
    }))
}

fn emit(out: &mut dyn Write, v: &impl Serialize) -> io::Result<()> {
    writeln!(out, "{}", serde_json::to_string(v).expect("report serializes"))
}

fn norm(a: &NormArgs, out: &mut dyn Write) -> Outcome {
    let nf = load_phi(&a.phi)?;
    let (x, tau) = load_element(&a.element)?;
    let mut rec = json!({
        "command": "norm",
        "phi": nf.density,
        "luxemburg": luxemburg_norm(&nf, &tau, &x)?,
        "amemiya": amemiya_norm(&nf, &tau, &x)?,
    });
    if let Some(p) = a.lp {
        rec["lp"] = json!({ "p": p, "norm": lp_norm(&tau, &x, p)? });
    }
    if let Some(w) = load_weight(&a.weight)? {
        tau.check_shape(w.h())?;
        let wo = WeightedOrlicz::new(&nf, &w)?;
        rec["weighted"] = json!({ "alpha": w.alpha(), "result": wo.norm(&tau, &x)? });
    }
    emit(out, &rec)?;
    Ok(true)
}

fn conjugate(a: &ConjugateArgs, out: &mut dyn Write) -> Outcome {
    let nf = load_phi(&a.phi)?;
    let psi = nf.conjugate();
    let points = if a.at.is_empty() { log_grid(1e-2, 1e2, 9) } else { a.at.clone() };
    if let Some(bad) = points.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Fail::Input(format!("sample point {bad} is not a nonnegative real")));
    }
    let samples: Vec<Value> = points
        .iter()
        .map(|&s| json!({ "s": s, "psi": psi.phi(s), "q": psi.density_at(s) }))
        .collect();
    emit(
        out,
        &json!({ "command": "conjugate", "phi": nf.density, "conjugate": psi.density, "samples": samples }),
    )?;
    Ok(true)
}

fn dual(a: &DualArgs, out: &mut dyn Write) -> Outcome {
    let nf = load_phi(&a.phi)?;
    let (y, tau) = load_element(&a.element)?;
    let opts = SearchOptions {
        restarts: a.restarts,
        iterations: a.iterations,
        seed: a.seed,
    };
    let r = dual_report(&nf, &tau, &y, opts)?;
    let method = if y.shape().is_commutative() { "diagonal" } else { "search" };
    emit(out, &json!({ "command": "dual", "method": method, "report": r }))?;
    Ok(r.lower <= r.upper * (1.0 + 1e-9))
}

fn isometry(a: &IsometryArgs, out: &mut dyn Write) -> Outcome {
    let nf = load_phi(&a.phi)?;
    let (x, tau) = load_element(&a.element)?;
    let w = load_weight(&a.weight)?.ok_or_else(|| Fail::Input("isometry-check needs --weight".into()))?;
    tau.check_shape(w.h())?;
    let chk = isometry_check(&WeightedOrlicz::new(&nf, &w)?, &tau, &x)?;
    let pass = chk.relative_difference <= a.tol;
    emit(
        out,
        &json!({ "command": "isometry-check", "alpha": w.alpha(), "tol": a.tol, "pass": pass, "check": chk }),
    )?;
    Ok(pass)
}

fn counterexample(a: &CounterexampleArgs, out: &mut dyn Write) -> Outcome {
    let d = build_example(a.beta, a.n_max as usize)?;
    let rows = d.table()?;
    match a.format {
        Format::Json => {
            for r in &rows {
                emit(out, r)?;
            }
            emit(out, &json!({ "notes": NOTES }))?;
        }
        Format::Table => {
            writeln!(
                out,
                "{:>3}  {:>14}  {:>19}  {:>14}  {:>14}  {:>12}",
                "n", "modular_mu_nu", "modular_mu_mu_lower", "norm_mu_nu", "norm_mu_mu", "ratio"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>3}  {:>14.10}  {:>19.10}  {:>14.10}  {:>14.10}  {:>12.8}",
                    r.n, r.modular_mu_nu, r.modular_mu_mu_lower, r.norm_mu_nu, r.norm_mu_mu, r.ratio
                )?;
            }
            for (i, n) in NOTES.iter().enumerate() {
                writeln!(out, "note {}: {n}", i + 1)?;
            }
        }
    }
    Ok(true)
}

fn proptest(a: &ProptestArgs, out: &mut dyn Write) -> Outcome {
    let known: Vec<&str> = registry().iter().map(|i| i.name).collect();
    if a.list {
        for n in known {
            writeln!(out, "{n}")?;
        }
        return Ok(true);
    }
    if let Some(bad) = a.only.iter().find(|o| !known.contains(&o.as_str())) {
        return Err(Fail::Input(format!("unknown suite '{bad}'; see --list")));
    }
    if !(a.tol.is_finite() && a.tol > 0.0) {
        return Err(Fail::Input("--tol must be a positive multiplier".into()));
    }
    let cfg = SuiteConfig {
        seed: a.seed,
        count: a.count,
        tol_scale: a.tol,
    };
    let reports = run_suite(&cfg, &a.only);
    for r in &reports {
        emit(out, r)?;
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    emit(
        out,
        &json!({ "summary": { "seed": a.seed, "suites": reports.len(), "failed": failed } }),
    )?;
    Ok(failed == 0)
}

fn run(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Norm(a) => norm(a, out),
        Command::Conjugate(a) => conjugate(a, out),
        Command::Dual(a) => dual(a, out),
        Command::IsometryCheck(a) => isometry(a, out),
        Command::Counterexample(a) => counterexample(a, out),
        Command::Proptest(a) => proptest(a, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut buf = Vec::new();
    let outcome = run(&cli, &mut buf);
    let written = match &cli.out {
        Some(p) => fs::write(p, &buf),
        None => io::stdout().write_all(&buf),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fail::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
