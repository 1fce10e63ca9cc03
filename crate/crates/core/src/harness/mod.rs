//! Experiment plans: problem × scheme × initial point grids written as CSV
//! traces, one file per cell.

mod csv;
mod presets;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use thiserror::Error;

pub use self::csv::{
    deterministic_body, emit_csv, parse_csv, render_csv, CsvError, ParseError, TraceFileHeader, BASE_COLUMNS,
};
pub use self::presets::{corrupt_presets, preset, table1, CorruptPreset, Overrides, PRESET_NAMES, TABLE1};
pub use crate::algorithms::validate_conditions;

use crate::algorithms::{solve, Scheme, SolverConfig};
use crate::problems::{
    initial_points, make_example1, make_example2, InitKind, ProblemError, ProblemInstance, PropertyReport,
    RandomSpec, RNG_ALGORITHM,
};
use crate::space::Space;

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "VIKIT_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid problem spec `{spec}`: {reason}")]
    ProblemSpec { spec: String, reason: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("cannot create output directory {}: {source}", path.display())]
    OutputDir {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Where a cell's initial points come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitChoice {
    /// One cell per plan seed, `random_uniform(seed)`.
    Seeded,
    Fixed(InitKind),
}

impl fmt::Display for InitChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitChoice::Seeded => f.write_str("seeded"),
            InitChoice::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for InitChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "seeded" | "random_uniform" => InitChoice::Seeded,
            "t_squared" => InitChoice::Fixed(InitKind::TSquared),
            "t_plus_half_cos_t" => InitChoice::Fixed(InitKind::TPlusHalfCosT),
            "zero" => InitChoice::Fixed(InitKind::Zero),
            other => return Err(format!("unknown init `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemFamily {
    Example1 { n: usize, seed: u64 },
    Example2 { grid: usize },
}

/// Plain-text problem description: `ex1:n=100,seed=7` or
/// `ex2:grid=101`, optionally with `,init=a+b` choosing the initial points
/// (`seeded`, `t_squared`, `t_plus_half_cos_t`, `zero`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub family: ProblemFamily,
    pub inits: Vec<InitChoice>,
}

impl ProblemSpec {
    pub fn example1(n: usize, seed: u64) -> Self {
        Self {
            family: ProblemFamily::Example1 { n, seed },
            inits: vec![InitChoice::Seeded],
        }
    }

    pub fn example2(grid: usize) -> Self {
        Self {
            family: ProblemFamily::Example2 { grid },
            inits: vec![
                InitChoice::Fixed(InitKind::TSquared),
                InitChoice::Fixed(InitKind::TPlusHalfCosT),
            ],
        }
    }

    pub fn with_inits(mut self, inits: Vec<InitChoice>) -> Self {
        self.inits = inits;
        self
    }

    pub fn build(&self) -> Result<ProblemInstance, ProblemError> {
        match self.family {
            ProblemFamily::Example1 { n, seed } => make_example1(&RandomSpec::new(n, seed)),
            ProblemFamily::Example2 { grid } => make_example2(grid),
        }
    }

    /// File-name fragment, e.g. `ex1-n100-seed7`.
    pub fn slug(&self) -> String {
        match self.family {
            ProblemFamily::Example1 { n, seed } => format!("ex1-n{n}-seed{seed}"),
            ProblemFamily::Example2 { grid } => format!("ex2-grid{grid}"),
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            ProblemFamily::Example1 { n, seed } => write!(f, "ex1:n={n},seed={seed}")?,
            ProblemFamily::Example2 { grid } => write!(f, "ex2:grid={grid}")?,
        }
        let names: Vec<String> = self.inits.iter().map(|i| i.to_string()).collect();
        write!(f, ",init={}", names.join("+"))
    }
}

impl FromStr for ProblemSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: String| HarnessError::ProblemSpec {
            spec: s.to_string(),
            reason,
        };
        let (family, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut n = None;
        let mut seed = None;
        let mut grid = None;
        let mut inits = None;
        for pair in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{pair}`")))?;
            let int = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("`{key}` needs an integer, got `{v}`")));
            match key.trim() {
                "n" => n = Some(int(value)? as usize),
                "seed" => seed = Some(int(value)?),
                "grid" => grid = Some(int(value)? as usize),
                "init" => {
                    inits = Some(
                        value
                            .split('+')
                            .map(|v| v.trim().parse::<InitChoice>().map_err(&bad))
                            .collect::<Result<Vec<_>, _>>()?,
                    )
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let spec = match family {
            "ex1" => {
                if grid.is_some() {
                    return Err(bad("ex1 takes n and seed".into()));
                }
                let n = n.ok_or_else(|| bad("ex1 needs n".into()))?;
                if n == 0 {
                    return Err(bad("n must be at least 1".into()));
                }
                ProblemSpec::example1(n, seed.unwrap_or(0))
            }
            "ex2" => {
                if n.is_some() || seed.is_some() {
                    return Err(bad("ex2 takes grid".into()));
                }
                ProblemSpec::example2(grid.unwrap_or(Space::DEFAULT_GRID))
            }
            other => return Err(bad(format!("unknown problem family `{other}`"))),
        };
        match inits {
            Some(v) if v.is_empty() => Err(bad("empty init list".into())),
            Some(v) => Ok(spec.with_inits(v)),
            None => Ok(spec),
        }
    }
}

/// A full experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub problems: Vec<ProblemSpec>,
    /// `(scheme, preset name)` pairs.
    pub algorithms: Vec<(Scheme, String)>,
    pub max_iter: usize,
    /// Seeds for `seeded` initial points.
    pub seeds: Vec<u64>,
    pub record_invariants: bool,
    pub output_dir: PathBuf,
    pub tol: Option<f64>,
    pub overrides: Overrides,
    /// Worker count; `VIKIT_THREADS` takes precedence, `None` means one per core.
    pub threads: Option<usize>,
}

impl ExperimentPlan {
    pub fn new(problems: Vec<ProblemSpec>, schemes: &[Scheme], max_iter: usize, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            problems,
            algorithms: schemes.iter().map(|&s| (s, TABLE1.to_string())).collect(),
            max_iter,
            seeds: vec![1],
            record_invariants: false,
            output_dir: output_dir.into(),
            tol: None,
            overrides: Overrides::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidPlan(m.to_string()));
        if self.problems.is_empty() {
            return bad("no problems");
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms");
        }
        if self.seeds.is_empty() {
            return bad("empty seed list");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return bad("tol must be positive");
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        for (_, name) in &self.algorithms {
            if !PRESET_NAMES.contains(&name.as_str()) {
                return Err(HarnessError::InvalidPlan(format!("unknown preset `{name}`")));
            }
        }
        Ok(())
    }

    fn worker_count(&self) -> Result<usize, HarnessError> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(HarnessError::InvalidPlan(format!("{THREADS_ENV}=`{v}` is not a positive integer"))),
            },
            Err(_) => Ok(self.threads.unwrap_or(0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Written { path: PathBuf, rows: usize },
    /// Parameter or problem checks failed; nothing was run.
    ValidationFailed(Vec<String>),
    RuntimeError(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub problem: String,
    pub scheme: Scheme,
    pub preset: String,
    pub init: InitKind,
    pub status: CellStatus,
}

impl fmt::Display for CellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}: ", self.problem, self.scheme, self.preset, self.init)?;
        match &self.status {
            CellStatus::Written { path, rows } => write!(f, "wrote {rows} rows to {}", path.display()),
            CellStatus::ValidationFailed(why) => write!(f, "validation failed: {}", why.join("; ")),
            CellStatus::RuntimeError(why) => write!(f, "runtime error: {why}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanReport {
    pub cells: Vec<CellOutcome>,
}

impl PlanReport {
    pub fn written(&self) -> Vec<&Path> {
        self.cells
            .iter()
            .filter_map(|c| match &c.status {
                CellStatus::Written { path, .. } => Some(path.as_path()),
                _ => None,
            })
            .collect()
    }

    pub fn has_validation_failures(&self) -> bool {
        self.cells.iter().any(|c| matches!(c.status, CellStatus::ValidationFailed(_)))
    }

    pub fn has_runtime_errors(&self) -> bool {
        self.cells.iter().any(|c| matches!(c.status, CellStatus::RuntimeError(_)))
    }
}

struct Job<'a> {
    problem: &'a ProblemInstance,
    spec: &'a ProblemSpec,
    scheme: Scheme,
    preset: &'a str,
    init: InitKind,
    seed: Option<u64>,
}

fn gate(problem: &ProblemInstance) -> Result<(), String> {
    let cert = problem.certify().map_err(|e| e.to_string())?;
    if cert.passed() {
        Ok(())
    } else {
        Err(format!(
            "solution check failed for {}: vi residual {:?}, fixed-point residual {:?}",
            problem.id, cert.vi_residual, cert.fixed_point_residual
        ))
    }
}

fn unix_time() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn run_job(plan: &ExperimentPlan, job: &Job) -> CellStatus {
    let problem = job.problem;
    let mut params = match preset(job.preset, job.scheme, problem.lipschitz) {
        Ok(p) => p,
        Err(e) => return CellStatus::ValidationFailed(vec![e]),
    };
    plan.overrides.apply(&mut params);
    let mut problems: Vec<String> = validate_conditions(&params, plan.max_iter)
        .iter()
        .map(|v| v.to_string())
        .collect();
    if let Err(e) = params.step.validate(problem.lipschitz) {
        problems.push(e.to_string());
    }
    if !problems.is_empty() {
        return CellStatus::ValidationFailed(problems);
    }
    let (x0, x1) = match initial_points(problem, job.init) {
        Ok(p) => p,
        Err(e) => return CellStatus::ValidationFailed(vec![e.to_string()]),
    };
    let header = TraceFileHeader {
        scheme: job.scheme.to_string(),
        preset: job.preset.to_string(),
        problem: problem.id.clone(),
        init: job.init.to_string(),
        seed: job.seed,
        rng: RNG_ALGORITHM.to_string(),
        dim: problem.space.dim(),
        max_iter: plan.max_iter,
        params: params.to_string(),
        tol: plan.tol,
        record_invariants: plan.record_invariants,
        timestamp: unix_time(),
    };
    let cfg = SolverConfig::new(params, x0, x1, plan.max_iter)
        .with_tol(plan.tol)
        .with_invariants(plan.record_invariants);
    let trace = match solve(problem, &cfg) {
        Ok(t) => t,
        Err(e) => return CellStatus::RuntimeError(e.to_string()),
    };
    let path = plan
        .output_dir
        .join(format!("{}__{}__{}.csv", job.spec.slug(), job.scheme, job.init.slug()));
    match emit_csv(&trace, &header, &path) {
        Ok(()) => CellStatus::Written { path, rows: trace.len() },
        Err(e) => CellStatus::RuntimeError(e.to_string()),
    }
}

/// Runs every cell of `plan` on a bounded worker pool. A failing cell is
/// recorded in the report and does not stop the others.
pub fn run_plan(plan: &ExperimentPlan) -> Result<PlanReport, HarnessError> {
    plan.validate()?;
    let threads = plan.worker_count()?;
    std::fs::create_dir_all(&plan.output_dir).map_err(|source| HarnessError::OutputDir {
        path: plan.output_dir.clone(),
        source,
    })?;

    let mut cells = Vec::new();
    let built: Vec<(&ProblemSpec, Result<ProblemInstance, String>)> = plan
        .problems
        .iter()
        .map(|spec| {
            let inst = spec.build().map_err(|e| e.to_string()).and_then(|p| gate(&p).map(|_| p));
            (spec, inst)
        })
        .collect();

    let mut jobs = Vec::new();
    for (spec, inst) in &built {
        let inits: Vec<(InitKind, Option<u64>)> = spec
            .inits
            .iter()
            .flat_map(|choice| match choice {
                InitChoice::Seeded => plan.seeds.iter().map(|&s| (InitKind::RandomUniform(s), Some(s))).collect(),
                InitChoice::Fixed(k) => vec![(*k, None)],
            })
            .collect();
        for (scheme, preset) in &plan.algorithms {
            for &(init, seed) in &inits {
                match inst {
                    Ok(problem) => jobs.push(Job {
                        problem,
                        spec,
                        scheme: *scheme,
                        preset,
                        init,
                        seed,
                    }),
                    Err(why) => cells.push(CellOutcome {
                        problem: spec.to_string(),
                        scheme: *scheme,
                        preset: preset.clone(),
                        init,
                        status: CellStatus::ValidationFailed(vec![why.clone()]),
                    }),
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let ran: Vec<CellOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|job| CellOutcome {
                problem: job.problem.id.clone(),
                scheme: job.scheme,
                preset: job.preset.to_string(),
                init: job.init,
                status: run_job(plan, job),
            })
            .collect()
    });
    cells.extend(ran);
    Ok(PlanReport { cells })
}

/// Certification plus sampled operator-class checks for `spec`.
pub fn check_problem(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<PropertyReport, HarnessError> {
    Ok(spec.build()?.check_properties(samples, seed)?)
}
