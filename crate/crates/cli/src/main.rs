use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vikit_core::algorithms::{validate_conditions, Scheme, Sequence};
use vikit_core::harness::{
    check_problem, preset, run_plan, CellStatus, ExperimentPlan, HarnessError, Overrides, ProblemSpec, TABLE1,
};

const EXIT_RUNTIME: u8 = 1;
const EXIT_VALIDATION: u8 = 2;

#[derive(Parser)]
#[command(name = "vikit", version, about = "Run and validate extragradient solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a problem x algorithm grid and write one CSV trace per cell.
    Run(RunArgs),
    /// Check parameter conditions of a preset without running anything.
    Validate(ValidateArgs),
    /// Certify a problem's solution and sample its operator properties.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem spec such as `ex1:n=100,seed=7` or `ex2:grid=101`; repeatable.
    #[arg(long = "problem", required = true)]
    problems: Vec<ProblemSpec>,
    /// Scheme name or `all`; repeatable or comma separated.
    #[arg(long = "alg", required = true, value_delimiter = ',')]
    algs: Vec<String>,
    #[arg(long, default_value = TABLE1)]
    preset: String,
    #[arg(long, default_value_t = 400)]
    max_iter: usize,
    /// Stop a run once D_k drops below this value.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    record_invariants: bool,
    /// Seeds for random initial points, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    /// Worker threads (VIKIT_THREADS overrides).
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    overrides: OverrideArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long = "alg", required = true, value_delimiter = ',')]
    algs: Vec<String>,
    #[arg(long, default_value = TABLE1)]
    preset: String,
    #[arg(long, default_value_t = 400)]
    horizon: usize,
    /// Problem whose Lipschitz constant sizes fixed steps; without it the
    /// step size itself is not checked.
    #[arg(long)]
    problem: Option<ProblemSpec>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long = "problem", required = true)]
    problems: Vec<ProblemSpec>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Default)]
struct OverrideArgs {
    /// Inertial cap.
    #[arg(long)]
    delta: Option<f64>,
    /// Fixed step size.
    #[arg(long)]
    gamma: Option<f64>,
    /// Initial adaptive step size.
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    /// Armijo initial trial step.
    #[arg(long)]
    rho: Option<f64>,
    /// Armijo shrink factor.
    #[arg(long = "shrink")]
    l: Option<f64>,
    /// Weight of F in the hybrid steepest descent step.
    #[arg(long)]
    hsd_lambda: Option<f64>,
    /// Demicontractive constant of T.
    #[arg(long)]
    lambda_t: Option<f64>,
    #[arg(long)]
    theta: Option<Sequence>,
    #[arg(long)]
    eta: Option<Sequence>,
    #[arg(long)]
    zeta: Option<Sequence>,
}

impl OverrideArgs {
    fn to_overrides(&self) -> Overrides {
        Overrides {
            delta: self.delta,
            gamma: self.gamma,
            gamma1: self.gamma1,
            phi: self.phi,
            rho: self.rho,
            l: self.l,
            hsd_lambda: self.hsd_lambda,
            lambda_t: self.lambda_t,
            theta: self.theta,
            eta: self.eta,
            zeta: self.zeta,
        }
    }
}

fn parse_schemes(names: &[String]) -> Result<Vec<Scheme>, String> {
    let mut out = Vec::new();
    for name in names {
        if name.eq_ignore_ascii_case("all") {
            out.extend(Scheme::ALL);
        } else {
            out.push(name.parse()?);
        }
    }
    out.dedup();
    Ok(out)
}

fn run(args: RunArgs) -> ExitCode {
    let schemes = match parse_schemes(&args.algs) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    let mut plan = ExperimentPlan::new(args.problems, &schemes, args.max_iter, args.out);
    plan.algorithms = schemes.iter().map(|&s| (s, args.preset.clone())).collect();
    plan.tol = args.tol;
    plan.record_invariants = args.record_invariants;
    plan.seeds = args.seeds;
    plan.threads = args.threads;
    plan.overrides = args.overrides.to_overrides();
    let report = match run_plan(&plan) {
        Ok(r) => r,
        Err(e @ (HarnessError::InvalidPlan(_) | HarnessError::ProblemSpec { .. })) => {
            return fail(EXIT_VALIDATION, &e.to_string())
        }
        Err(e) => return fail(EXIT_RUNTIME, &e.to_string()),
    };
    for cell in &report.cells {
        match cell.status {
            CellStatus::Written { .. } => println!("{cell}"),
            _ => eprintln!("{cell}"),
        }
    }
    if report.has_runtime_errors() {
        ExitCode::from(EXIT_RUNTIME)
    } else if report.has_validation_failures() {
        ExitCode::from(EXIT_VALIDATION)
    } else {
        ExitCode::SUCCESS
    }
}

fn validate(args: ValidateArgs) -> ExitCode {
    let schemes = match parse_schemes(&args.algs) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    let lipschitz = match &args.problem {
        Some(spec) => match spec.build() {
            Ok(p) => p.lipschitz,
            Err(e) => return fail(EXIT_RUNTIME, &e.to_string()),
        },
        None => None,
    };
    let overrides = args.overrides.to_overrides();
    let mut clean = true;
    for scheme in schemes {
        let mut params = match preset(&args.preset, scheme, lipschitz.or(Some(1.0))) {
            Ok(p) => p,
            Err(e) => return fail(EXIT_VALIDATION, &e),
        };
        overrides.apply(&mut params);
        let mut messages: Vec<String> = validate_conditions(&params, args.horizon)
            .iter()
            .map(|v| v.to_string())
            .collect();
        if lipschitz.is_some() {
            if let Err(e) = params.step.validate(lipschitz) {
                messages.push(e.to_string());
            }
        }
        if messages.is_empty() {
            println!("{scheme} {}: ok (horizon {})", args.preset, args.horizon);
        } else {
            clean = false;
            for m in messages {
                println!("{scheme} {}: {m}", args.preset);
            }
        }
    }
    if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VALIDATION)
    }
}

fn check(args: CheckArgs) -> ExitCode {
    let mut clean = true;
    for spec in &args.problems {
        let report = match check_problem(spec, args.samples, args.seed) {
            Ok(r) => r,
            Err(e) => return fail(EXIT_RUNTIME, &e.to_string()),
        };
        let cert = &report.certification;
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
        println!(
            "{spec}: vi_residual={} fixed_point_residual={} a_monotone={} t_demicontractive={} lipschitz={:.6e} -> {}",
            show(cert.vi_residual),
            show(cert.fixed_point_residual),
            report.a_monotone,
            report.t_demicontractive.map_or("n/a".to_string(), |b| b.to_string()),
            report.lipschitz_estimate,
            if report.passed() { "ok" } else { "FAILED" }
        );
        clean &= report.passed();
    }
    if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VALIDATION)
    }
}

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Validate(a) => validate(a),
        Command::Check(a) => check(a),
    }
}
