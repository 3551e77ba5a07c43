use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use cstate_core::algebra::default_self_adjoint_tol;
use cstate_core::eigenstates::{default_acceptance_tol, eigenstate_for_with, is_eigenstate};
use cstate_core::expr::{eval_str, Environment};
use cstate_core::gns::{gns_construct, DEFAULT_RANK_TOL};
use cstate_core::{io, AlgebraElement, AlgebraShape, Error, FunctionSpec, VerifyConfig, C64};

const EXIT_REJECTED: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_NOT_IN_SPECTRUM: u8 = 4;
const EXIT_NOT_SELF_ADJOINT: u8 = 5;
const EXIT_ZERO_WEIGHT: u8 = 6;

/// Eigenstates of elements of finite-dimensional C*-algebras.
#[derive(Debug, Parser)]
#[command(name = "cstate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the clustered spectrum of an operator.
    Spectrum {
        file: PathBuf,
        #[arg(long)]
        cluster_tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Synthesize an eigenstate of a self-adjoint operator at a spectral point.
    Eigenstate {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Where to write the state document.
        #[arg(long)]
        out: PathBuf,
        /// Self-adjointness tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        cluster_tol: Option<f64>,
    },
    /// Decide whether a state is an eigenstate of an operator at λ.
    Check {
        op: PathBuf,
        state: PathBuf,
        /// Complex literal such as `2`, `-1.5i` or `1-2i`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Residual acceptance tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the seeded verification suite.
    Verify {
        #[arg(long, default_value = "4", value_parser = parse_shape)]
        shape: AlgebraShape,
        #[arg(long, default_value = "0xC57A", value_parser = parse_seed)]
        seed: u64,
        #[arg(long, default_value_t = cstate_core::verify::DEFAULT_TRIALS)]
        trials: usize,
        /// Mix planted eigenstates with a random state at this weight.
        #[arg(long)]
        perturb: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Summarize the GNS representation of a state.
    Gns {
        state: PathBuf,
        /// Relative rank cut for the Gram matrix.
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Compress a state by a projection.
    Compress {
        p: PathBuf,
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Projection tolerance and zero-weight threshold.
        #[arg(long, default_value_t = cstate_core::states::ZERO_WEIGHT_TOL)]
        tol: f64,
    },
    /// Apply a scalar function to a self-adjoint operator.
    Apply {
        op: PathBuf,
        /// sq, cube, exp, abs, id, witness:<λ1>:<λ2> or chebyshev:<degree>:<name>.
        #[arg(allow_hyphen_values = true)]
        function: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Self-adjointness tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evaluate a *-algebra expression over named operators.
    Eval {
        expr: String,
        /// Bindings `name=operator.json`.
        bindings: Vec<String>,
        /// Shape for expressions without bindings.
        #[arg(long, value_parser = parse_shape)]
        shape: Option<AlgebraShape>,
        #[arg(long)]
        json: bool,
    },
}

fn parse_shape(s: &str) -> Result<AlgebraShape, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

/// Outcome of a subcommand: text for stdout and an exit code.
struct Output {
    stdout: String,
    code: u8,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: 0 }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NumericalFailure(_) => EXIT_NUMERICAL,
        Error::NotInSpectrum { .. } => EXIT_NOT_IN_SPECTRUM,
        Error::NotSelfAdjoint { .. } => EXIT_NOT_SELF_ADJOINT,
        Error::ZeroWeight { .. } => EXIT_ZERO_WEIGHT,
        Error::NotAnEigenstate { .. } => EXIT_REJECTED,
        _ => EXIT_MALFORMED,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cmd: Command) -> cstate_core::Result<Output> {
    match cmd {
        Command::Spectrum { file, cluster_tol, json } => spectrum(&file, cluster_tol, json),
        Command::Eigenstate {
            file,
            lambda,
            out,
            tol,
            cluster_tol,
        } => eigenstate(&file, lambda, &out, tol, cluster_tol),
        Command::Check { op, state, lambda, tol } => check(&op, &state, &lambda, tol),
        Command::Verify {
            shape,
            seed,
            trials,
            perturb,
            json,
        } => verify(
            VerifyConfig {
                shape,
                seed,
                trials,
                perturbation: perturb,
            },
            json,
        ),
        Command::Gns { state, tol, json } => gns(&state, tol, json),
        Command::Compress { p, state, out, tol } => compress(&p, &state, out.as_deref(), tol),
        Command::Apply { op, function, out, tol } => apply(&op, &function, out.as_deref(), tol),
        Command::Eval {
            expr,
            bindings,
            shape,
            json,
        } => eval(&expr, &bindings, shape, json),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

fn fmt_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{}{}i", z.re, sign, z.im.abs())
    }
}

fn spectrum(file: &Path, cluster_tol: Option<f64>, json: bool) -> cstate_core::Result<Output> {
    let x = io::read_element(file)?;
    let report = match cluster_tol {
        Some(tol) => x.spectrum(tol)?,
        None => x.spectrum_default()?,
    };
    if json {
        return Ok(Output::ok(to_json(&report)));
    }
    let mut s = String::new();
    writeln!(s, "{:<28} multiplicity", "value").unwrap();
    for p in &report.points {
        writeln!(s, "{:<28} {}", fmt_complex(p.value), p.multiplicity).unwrap();
    }
    writeln!(s, "self-adjoint: {}", if report.is_self_adjoint { "yes" } else { "no" }).unwrap();
    writeln!(s, "cluster tolerance: {:e}", report.cluster_tolerance).unwrap();
    Ok(Output::ok(s))
}

fn eigenstate(
    file: &Path,
    lambda: f64,
    out: &Path,
    tol: Option<f64>,
    cluster_tol: Option<f64>,
) -> cstate_core::Result<Output> {
    let x = io::read_element(file)?;
    let norm = x.operator_norm()?;
    let tol = tol.unwrap_or_else(|| default_self_adjoint_tol(norm));
    let cluster_tol = cluster_tol.unwrap_or_else(|| cstate_core::algebra::default_cluster_tol(norm));
    let e = eigenstate_for_with(&x, lambda, tol, cluster_tol)?;
    let cert = is_eigenstate(&e, &x, C64::new(lambda, 0.0), default_acceptance_tol(norm))?;
    io::write_state(out, &e)?;
    Ok(Output::ok(to_json(&cert)))
}

fn check(op: &Path, state: &Path, lambda: &str, tol: Option<f64>) -> cstate_core::Result<Output> {
    let x = io::read_element(op)?;
    let e = io::read_state(state)?;
    let lambda = cstate_core::parse_scalar(lambda)?;
    let tol = tol.unwrap_or(default_acceptance_tol(x.operator_norm()?));
    let cert = is_eigenstate(&e, &x, lambda, tol)?;
    Ok(Output {
        stdout: to_json(&cert),
        code: if cert.accepted { 0 } else { EXIT_REJECTED },
    })
}

fn verify(cfg: VerifyConfig, json: bool) -> cstate_core::Result<Output> {
    let start = Instant::now();
    let report = cstate_core::run_suite(&cfg)?;
    eprintln!("wall time: {:.2}s", start.elapsed().as_secs_f64());
    let code = if report.passed { 0 } else { EXIT_REJECTED };
    if json {
        return Ok(Output {
            stdout: to_json(&report),
            code,
        });
    }
    let mut s = String::new();
    writeln!(
        s,
        "seed {:#x}  shape {}  trials {}",
        report.seed, cfg.shape, report.trials
    )
    .unwrap();
    writeln!(s, "{:<32} {:>12} {:>12}  result", "record", "max_defect", "tolerance").unwrap();
    for r in &report.records {
        writeln!(
            s,
            "{:<32} {:>12.3e} {:>12.3e}  {}",
            r.name,
            r.max_defect,
            r.tolerance,
            if r.passed { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    writeln!(s, "overall: {}", if report.passed { "PASS" } else { "FAIL" }).unwrap();
    Ok(Output { stdout: s, code })
}

fn gns(state: &Path, tol: f64, json: bool) -> cstate_core::Result<Output> {
    let e = io::read_state(state)?;
    let summary = gns_construct(&e, tol)?.summary(&e)?;
    if json {
        return Ok(Output::ok(to_json(&summary)));
    }
    Ok(Output::ok(format!(
        "hilbert_dim      {}\nfidelity_defect  {:.3e}\ncyclicity_margin {:.3e}\n",
        summary.hilbert_dim, summary.fidelity_defect, summary.cyclicity_margin
    )))
}

fn compress(p: &Path, state: &Path, out: Option<&Path>, tol: f64) -> cstate_core::Result<Output> {
    let p = io::read_element(p)?;
    let e = io::read_state(state)?;
    let pe = e.compress(&p, tol)?;
    match out {
        Some(path) => {
            io::write_state(path, &pe)?;
            Ok(Output::ok(String::new()))
        }
        None => Ok(Output::ok(io::state_to_json(&pe) + "\n")),
    }
}

fn apply(op: &Path, function: &str, out: Option<&Path>, tol: Option<f64>) -> cstate_core::Result<Output> {
    let x = io::read_element(op)?;
    let spec: FunctionSpec = function.parse()?;
    let tol = tol.unwrap_or(default_self_adjoint_tol(x.operator_norm()?));
    let fx = spec.apply(&x, tol)?;
    match out {
        Some(path) => {
            io::write_element(path, &fx)?;
            Ok(Output::ok(String::new()))
        }
        None => Ok(Output::ok(io::element_to_json(&fx) + "\n")),
    }
}

fn eval(
    src: &str,
    bindings: &[String],
    shape: Option<AlgebraShape>,
    json: bool,
) -> cstate_core::Result<Output> {
    let mut named = Vec::with_capacity(bindings.len());
    for b in bindings {
        let (name, path) = b
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("binding `{b}` is not name=file")))?;
        named.push((name, io::read_element(path)?));
    }
    let shape = match (shape, named.first()) {
        (Some(s), _) => s,
        (None, Some((_, x))) => x.shape().clone(),
        (None, None) => AlgebraShape::full(1)?,
    };
    let mut env = Environment::new(shape);
    for (name, x) in named {
        env.bind(name, x)?;
    }
    let y = eval_str(src, &env)?;
    if json {
        return Ok(Output::ok(io::element_to_json(&y) + "\n"));
    }
    Ok(Output::ok(format_element(&y)))
}

fn format_element(y: &AlgebraElement) -> String {
    let mut s = String::new();
    for (k, b) in y.blocks().iter().enumerate() {
        writeln!(s, "block {k} ({}×{}):", b.nrows(), b.ncols()).unwrap();
        for i in 0..b.nrows() {
            let row: Vec<String> = (0..b.ncols()).map(|j| format!("{:>14}", fmt_complex(b[(i, j)]))).collect();
            writeln!(s, "  {}", row.join(" ")).unwrap();
        }
    }
    s
}
