//! Seeded benchmark problems.
//!
//! * Example 1: `A x = G x + f` on `R^n` with `G = BBᵀ + S + E`, `C` the box
//!   `[−2, 5]^n`, `T = F = 0.5 I`, solution `x* = 0` (when `f = 0`).
//! * Example 2: `(Ax)(t) = max(x(t), 0)` on grid-sampled `L^2([0,1])`, `C`
//!   the unit ball, `(Tx)(t) = t ∫₀¹ x(r) dr`, `F = f = 0.5 I`, `x* = 0`.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with `seed_from_u64`; the
//! identifier [`RNG_ALGORITHM`] is written into every trace header.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::DenseMatrix;
use crate::operators::{
    check_demicontractive, check_monotone, estimate_lipschitz, MappingInfo, OperatorError, OperatorSpec,
};
use crate::projections::{FeasibleSet, ProjectionError};
use crate::space::{Space, SpaceElement, SpaceError};

pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64/rand-0.9";

/// Step used in the solution-residual check `‖x* − P_C(x* − γAx*)‖`.
pub const CERTIFY_GAMMA: f64 = 0.1;
pub const VI_RESIDUAL_TOL: f64 = 1e-8;
pub const FIXED_POINT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("offset has {got} entries, expected {expected}")]
    OffsetLength { got: usize, expected: usize },
    #[error("initial point `{kind}` needs a grid space, got {space}")]
    IncompatibleInit { kind: &'static str, space: Space },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    /// Stable identifier, e.g. `ex1:n=100,seed=7`.
    pub id: String,
    pub space: Space,
    /// Monotone Lipschitz cost operator.
    pub a: OperatorSpec,
    pub a_info: MappingInfo,
    /// Feasible set.
    pub c: FeasibleSet,
    /// Demicontractive mapping.
    pub t: OperatorSpec,
    pub t_info: MappingInfo,
    /// Strongly monotone `F` used by hybrid steepest descent.
    pub steepest: Option<OperatorSpec>,
    /// Contraction `f` used by the viscosity schemes.
    pub viscosity: Option<OperatorSpec>,
    pub x_star: Option<SpaceElement>,
    /// Lipschitz constant `L` of `A`.
    pub lipschitz: Option<f64>,
}

/// Generator inputs for Example 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    pub n: usize,
    pub seed: u64,
    /// Nonzero `f` disables the known solution.
    pub offset: Option<Vec<f64>>,
}

impl RandomSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, seed, offset: None }
    }
}

/// Builds `G = BBᵀ + S + E` with `B, E ~ U[0,2]` (E diagonal) and
/// `S = (M − Mᵀ)/2`, `M ~ U[−2,2]`. Draw order: `B` row-major, diagonal of
/// `E`, then `M` row-major.
pub fn example1_matrix(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DenseMatrix::from_row_major(n, n, (0..n * n).map(|_| rng.random_range(0.0..2.0)).collect());
    let e: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    let m = DenseMatrix::from_row_major(n, n, (0..n * n).map(|_| rng.random_range(-2.0..2.0)).collect());
    let s = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] - m[(j, i)]));
    b.matmul(&b.transpose()).add(&s).add(&DenseMatrix::from_diag(&e))
}

pub fn make_example1(spec: &RandomSpec) -> Result<ProblemInstance, ProblemError> {
    let n = spec.n;
    if n == 0 {
        return Err(ProblemError::EmptyDimension);
    }
    let space = Space::Euclidean(n);
    let matrix = example1_matrix(n, spec.seed);
    let offset = match &spec.offset {
        Some(f) if f.len() != n => {
            return Err(ProblemError::OffsetLength {
                got: f.len(),
                expected: n,
            })
        }
        Some(f) if f.iter().any(|&v| v != 0.0) => Some(SpaceElement::new(space, f.clone())?),
        _ => None,
    };
    let has_solution = offset.is_none();
    let id = if has_solution {
        format!("ex1:n={n},seed={}", spec.seed)
    } else {
        format!("ex1:n={n},seed={},offset", spec.seed)
    };
    let a = OperatorSpec::AffineMatrix { matrix, offset };
    let lipschitz = estimate_lipschitz(&a, space)?;
    Ok(ProblemInstance {
        id,
        space,
        a,
        a_info: MappingInfo {
            lipschitz_bound: Some(lipschitz),
            demicontractive_lambda: None,
            monotone: true,
        },
        c: FeasibleSet::uniform_box(n, -2.0, 5.0)?,
        t: OperatorSpec::Scale(0.5),
        t_info: MappingInfo {
            lipschitz_bound: Some(0.5),
            demicontractive_lambda: Some(0.0),
            monotone: true,
        },
        steepest: Some(OperatorSpec::Scale(0.5)),
        viscosity: Some(OperatorSpec::Scale(0.5)),
        x_star: has_solution.then(|| SpaceElement::zeros(space)),
        lipschitz: Some(lipschitz),
    })
}

pub fn make_example2(n_grid: usize) -> Result<ProblemInstance, ProblemError> {
    let space = Space::grid_l2(n_grid)?;
    Ok(ProblemInstance {
        id: format!("ex2:grid={n_grid}"),
        space,
        a: OperatorSpec::PositivePart,
        a_info: MappingInfo {
            lipschitz_bound: Some(1.0),
            demicontractive_lambda: None,
            monotone: true,
        },
        c: FeasibleSet::unit_ball(space),
        t: OperatorSpec::RankOneIntegral,
        t_info: MappingInfo {
            lipschitz_bound: None,
            demicontractive_lambda: Some(0.0),
            monotone: true,
        },
        steepest: Some(OperatorSpec::Scale(0.5)),
        viscosity: Some(OperatorSpec::Scale(0.5)),
        x_star: Some(SpaceElement::zeros(space)),
        lipschitz: Some(1.0),
    })
}

/// Recipe for the initial pair `x^0 = x^1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitKind {
    /// Coordinates uniform on `[0, 1)` from the given seed.
    RandomUniform(u64),
    /// `t ↦ t²` (grid spaces).
    TSquared,
    /// `t ↦ t + 0.5 cos t` (grid spaces).
    TPlusHalfCosT,
    /// The origin.
    Zero,
}

impl InitKind {
    pub fn slug(&self) -> String {
        match self {
            InitKind::RandomUniform(seed) => format!("seed{seed}"),
            InitKind::TSquared => "t_squared".into(),
            InitKind::TPlusHalfCosT => "t_plus_half_cos_t".into(),
            InitKind::Zero => "zero".into(),
        }
    }
}

impl std::fmt::Display for InitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitKind::RandomUniform(seed) => write!(f, "random_uniform({seed})"),
            InitKind::TSquared => f.write_str("t_squared"),
            InitKind::TPlusHalfCosT => f.write_str("t_plus_half_cos_t"),
            InitKind::Zero => f.write_str("zero"),
        }
    }
}

pub fn initial_points(
    problem: &ProblemInstance,
    kind: InitKind,
) -> Result<(SpaceElement, SpaceElement), ProblemError> {
    let space = problem.space;
    let x = match kind {
        InitKind::RandomUniform(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            SpaceElement::random_uniform(space, 0.0, 1.0, &mut rng)
        }
        InitKind::TSquared | InitKind::TPlusHalfCosT if !space.is_grid() => {
            return Err(ProblemError::IncompatibleInit {
                kind: if kind == InitKind::TSquared { "t_squared" } else { "t_plus_half_cos_t" },
                space,
            })
        }
        InitKind::TSquared => SpaceElement::from_fn(space, |t| t * t)?,
        InitKind::TPlusHalfCosT => SpaceElement::from_fn(space, |t| t + 0.5 * t.cos())?,
        InitKind::Zero => SpaceElement::zeros(space),
    };
    Ok((x.clone(), x))
}

/// Outcome of the solution checks run before any solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Certification {
    /// `‖x* − P_C(x* − 0.1 A x*)‖`.
    pub vi_residual: Option<f64>,
    /// `‖T x* − x*‖`.
    pub fixed_point_residual: Option<f64>,
}

impl Certification {
    pub fn passed(&self) -> bool {
        self.vi_residual.is_none_or(|r| r <= VI_RESIDUAL_TOL)
            && self.fixed_point_residual.is_none_or(|r| r <= FIXED_POINT_TOL)
    }
}

/// Sampling-based checks of the operator classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub certification: Certification,
    pub a_monotone: bool,
    pub t_demicontractive: Option<bool>,
    pub lipschitz_estimate: f64,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.certification.passed() && self.a_monotone && self.t_demicontractive.unwrap_or(true)
    }
}

impl ProblemInstance {
    pub fn certify(&self) -> Result<Certification, ProblemError> {
        let Some(x_star) = &self.x_star else {
            return Ok(Certification {
                vi_residual: None,
                fixed_point_residual: None,
            });
        };
        let ax = self.a.apply(x_star)?;
        let p = self.c.project(&SpaceElement::axpy(-CERTIFY_GAMMA, &ax, x_star)?)?;
        Ok(Certification {
            vi_residual: Some(x_star.dist(&p)?),
            fixed_point_residual: Some(self.t.apply(x_star)?.dist(x_star)?),
        })
    }

    /// Runs [`Self::certify`] plus monotonicity, demicontractivity and
    /// Lipschitz-estimate checks on `samples` seeded random points.
    pub fn check_properties(&self, samples: usize, seed: u64) -> Result<PropertyReport, ProblemError> {
        let certification = self.certify()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a_monotone = check_monotone(&self.a, self.space, samples, &mut rng)?;
        let t_demicontractive = match (&self.x_star, self.t_info.demicontractive_lambda) {
            (Some(p), Some(lambda)) => Some(check_demicontractive(&self.t, lambda, p, samples, &mut rng)?),
            _ => None,
        };
        let lipschitz_estimate = estimate_lipschitz(&self.a, self.space)?;
        Ok(PropertyReport {
            certification,
            a_monotone,
            t_demicontractive,
            lipschitz_estimate,
        })
    }
}
