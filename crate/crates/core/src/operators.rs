//! Concrete operators and sampling-based checks of their class properties.
//!
//! The cost operator `A` must be monotone and Lipschitz, the mapping `T`
//! demicontractive. These properties cannot be proved at runtime in general,
//! so [`check_monotone`] and [`check_demicontractive`] certify them on random
//! samples; demiclosedness of `I − T` is taken as a declared property.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::DenseMatrix;
use crate::space::{Space, SpaceElement, SpaceError};

/// Relative stopping tolerance for power iteration on `GᵀG`.
pub const POWER_ITERATION_TOL: f64 = 1e-10;
/// Iteration cap for power iteration.
pub const POWER_ITERATION_CAP: usize = 10_000;
/// Number of random pairs used by the sampling Lipschitz estimate.
pub const LIPSCHITZ_SAMPLES: usize = 1000;

const CHECK_TOL: f64 = 1e-10;
const SAMPLING_SEED: u64 = 0x0b5e_55ed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("matrix is {rows}x{cols}, expected square of size {dim}")]
    MatrixShape { rows: usize, cols: usize, dim: usize },
    #[error("{0} only acts on grid functions")]
    NeedsGrid(&'static str),
    #[error("power iteration did not converge in {iterations} iterations (best estimate {best_estimate})")]
    PowerIteration { best_estimate: f64, iterations: usize },
    #[error("point is not a fixed point: ‖Tp − p‖ = {residual}")]
    NotFixedPoint { residual: f64 },
    #[error("parameter {name} = {value} outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// An evaluable map `H → H`.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `x ↦ Gx + offset`.
    AffineMatrix {
        matrix: DenseMatrix,
        offset: Option<SpaceElement>,
    },
    /// `x ↦ max(x, 0)` coordinatewise.
    PositivePart,
    /// `x ↦ c·x`.
    Scale(f64),
    /// `x ↦ (t ↦ t · ∫₀¹ x(r) dr)` on a grid space.
    RankOneIntegral,
    /// Applies the operators in list order: `[f, g]` is `x ↦ g(f(x))`.
    Composite(Vec<OperatorSpec>),
}

/// Declared properties of a mapping.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MappingInfo {
    pub lipschitz_bound: Option<f64>,
    pub demicontractive_lambda: Option<f64>,
    pub monotone: bool,
}

impl OperatorSpec {
    pub fn identity() -> Self {
        OperatorSpec::Scale(1.0)
    }

    pub fn apply(&self, x: &SpaceElement) -> Result<SpaceElement, OperatorError> {
        match self {
            OperatorSpec::AffineMatrix { matrix, offset } => {
                let n = x.dim();
                if !matrix.is_square() || matrix.rows() != n {
                    return Err(OperatorError::MatrixShape {
                        rows: matrix.rows(),
                        cols: matrix.cols(),
                        dim: n,
                    });
                }
                let gx = SpaceElement::new(x.space(), matrix.matvec(x.coords()))?;
                match offset {
                    Some(f) => Ok(gx.add(f)?),
                    None => Ok(gx),
                }
            }
            OperatorSpec::PositivePart => Ok(x.map(|v| v.max(0.0))?),
            OperatorSpec::Scale(c) => Ok(x.scale(*c)?),
            OperatorSpec::RankOneIntegral => {
                let space = x.space();
                if !space.is_grid() {
                    return Err(OperatorError::NeedsGrid("RankOneIntegral"));
                }
                let mass = x.integral();
                Ok(SpaceElement::from_fn(space, |t| t * mass)?)
            }
            OperatorSpec::Composite(ops) => {
                let mut y = x.clone();
                for op in ops {
                    y = op.apply(&y)?;
                }
                Ok(y)
            }
        }
    }

    /// True when the operator maps 0 to 0 (linear or positively homogeneous).
    pub fn fixes_origin(&self) -> bool {
        match self {
            OperatorSpec::AffineMatrix { offset, .. } => offset.as_ref().is_none_or(|f| f.is_zero()),
            OperatorSpec::Composite(ops) => ops.iter().all(|o| o.fixes_origin()),
            _ => true,
        }
    }
}

/// Lipschitz constant of `op` on `space`.
///
/// Exact (spectral norm by power iteration) for an affine map; otherwise the
/// largest difference quotient over [`LIPSCHITZ_SAMPLES`] seeded random pairs.
pub fn estimate_lipschitz(op: &OperatorSpec, space: Space) -> Result<f64, OperatorError> {
    match op {
        OperatorSpec::AffineMatrix { matrix, .. } => matrix
            .spectral_norm(POWER_ITERATION_TOL, POWER_ITERATION_CAP)
            .map_err(|s| OperatorError::PowerIteration {
                best_estimate: s.best_estimate,
                iterations: s.iterations,
            }),
        OperatorSpec::Scale(c) => Ok(c.abs()),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
            let mut best: f64 = 0.0;
            for i in 0..LIPSCHITZ_SAMPLES {
                let x = random_probe(space, &mut rng);
                // Alternate far pairs with nearby pairs to probe local slopes.
                let y = if i % 2 == 0 {
                    random_probe(space, &mut rng)
                } else {
                    let d = SpaceElement::random_uniform(space, -1e-3, 1e-3, &mut rng);
                    x.add(&d)?
                };
                let dx = x.dist(&y)?;
                if dx == 0.0 {
                    continue;
                }
                let dy = op.apply(&x)?.dist(&op.apply(&y)?)?;
                best = best.max(dy / dx);
            }
            Ok(best)
        }
    }
}

fn random_probe<R: Rng + ?Sized>(space: Space, rng: &mut R) -> SpaceElement {
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    SpaceElement::random_uniform(space, -scale, scale, rng)
}

/// Slack of the three equivalent demicontractivity inequalities at `x`.
///
/// Returns `rhs − lhs` for, in order, `‖Tx − z‖² ≤ ‖x − z‖² + η‖x − Tx‖²`,
/// `⟨Tx − x, x − z⟩ ≤ (η − 1)/2 ‖x − Tx‖²` and
/// `⟨Tx − z, x − z⟩ ≤ ‖x − z‖² + (η − 1)/2 ‖x − Tx‖²`. Nonnegative slack
/// means the inequality holds.
pub fn demicontractive_slacks(
    op: &OperatorSpec,
    eta: f64,
    z: &SpaceElement,
    x: &SpaceElement,
) -> Result<[f64; 3], OperatorError> {
    let tx = op.apply(x)?;
    let tx_z = tx.sub(z)?;
    let x_z = x.sub(z)?;
    let x_tx = x.sub(&tx)?;
    let r2 = x_tx.norm_sq();
    let xz2 = x_z.norm_sq();
    let first = xz2 + eta * r2 - tx_z.norm_sq();
    let second = 0.5 * (eta - 1.0) * r2 - tx.sub(x)?.inner(&x_z)?;
    let third = xz2 + 0.5 * (eta - 1.0) * r2 - tx_z.inner(&x_z)?;
    Ok([first, second, third])
}

/// Certifies `‖Tx − z‖² ≤ ‖x − z‖² + λ‖(I − T)x‖²` on `samples` random points.
pub fn check_demicontractive<R: Rng + ?Sized>(
    op: &OperatorSpec,
    lambda: f64,
    fixed_point: &SpaceElement,
    samples: usize,
    rng: &mut R,
) -> Result<bool, OperatorError> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(OperatorError::Parameter {
            name: "lambda",
            value: lambda,
            range: "[0, 1)",
        });
    }
    let residual = op.apply(fixed_point)?.dist(fixed_point)?;
    if residual > CHECK_TOL {
        return Err(OperatorError::NotFixedPoint { residual });
    }
    let space = fixed_point.space();
    for _ in 0..samples {
        let x = random_probe(space, rng);
        let [slack, _, _] = demicontractive_slacks(op, lambda, fixed_point, &x)?;
        let scale = 1.0 + x.sub(fixed_point)?.norm_sq();
        if slack < -CHECK_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Certifies `⟨Ax − Ay, x − y⟩ ≥ 0` on `samples` random pairs.
pub fn check_monotone<R: Rng + ?Sized>(
    op: &OperatorSpec,
    space: Space,
    samples: usize,
    rng: &mut R,
) -> Result<bool, OperatorError> {
    for _ in 0..samples {
        let x = random_probe(space, rng);
        let y = random_probe(space, rng);
        let dx = x.sub(&y)?;
        let v = op.apply(&x)?.sub(&op.apply(&y)?)?.inner(&dx)?;
        if v < -CHECK_TOL * (1.0 + dx.norm_sq()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `T_λ x = λ T x + (1 − λ) x`.
pub fn mann_combination(
    op: &OperatorSpec,
    lambda: f64,
    x: &SpaceElement,
) -> Result<SpaceElement, OperatorError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(OperatorError::Parameter {
            name: "lambda",
            value: lambda,
            range: "(0, 1)",
        });
    }
    Ok(SpaceElement::lincomb(lambda, &op.apply(x)?, 1.0 - lambda, x)?)
}
