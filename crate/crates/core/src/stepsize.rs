//! Step-size policies: fixed, self-adaptive, and Armijo-like backtracking.

use thiserror::Error;

use crate::operators::{OperatorError, OperatorSpec};
use crate::projections::{FeasibleSet, ProjectionError};
use crate::space::{SpaceElement, SpaceError};

/// Backtracking cap for the Armijo-like search.
pub const DEFAULT_MAX_BACKTRACKS: usize = 60;

/// `‖As − Ay‖` below this multiple of `max(1, ‖As‖, ‖Ay‖)` counts as zero.
pub const ZERO_DIFFERENCE_RTOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("step parameter {name} = {value} outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: String,
    },
    #[error("Armijo search gave up after {backtracks} backtracks (last gamma {last_gamma:e}, lhs {lhs:e} > rhs {rhs:e})")]
    BacktrackLimit {
        backtracks: usize,
        last_gamma: f64,
        lhs: f64,
        rhs: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    pub gamma1: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoParams {
    pub rho: f64,
    pub l: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    /// Constant `γ ∈ (0, 1/L)`.
    Fixed { gamma: f64 },
    /// `γ_{k+1} = min(φ‖s − y‖ / ‖As − Ay‖, γ_k)`, starting from `γ₁`.
    Adaptive(AdaptiveParams),
    /// Largest `γ ∈ {ρ, ρl, ρl², …}` with `γ‖Ax − Ay‖ ≤ φ‖x − y‖`.
    Armijo(ArmijoParams),
}

fn param_err(name: &'static str, value: f64, range: impl Into<String>) -> StepError {
    StepError::Parameter {
        name,
        value,
        range: range.into(),
    }
}

impl StepPolicy {
    /// Checks parameter ranges; a fixed step is also checked against `1/L`
    /// when `lipschitz` is known.
    pub fn validate(&self, lipschitz: Option<f64>) -> Result<(), StepError> {
        let open_unit = |name, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(param_err(name, v, "(0, 1)"))
            }
        };
        match *self {
            StepPolicy::Fixed { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(param_err("gamma", gamma, "(0, inf)"));
                }
                if let Some(l) = lipschitz {
                    if l > 0.0 && !validate_fixed(gamma, l) {
                        return Err(param_err("gamma", gamma, format!("(0, 1/L) with L = {l}")));
                    }
                }
                Ok(())
            }
            StepPolicy::Adaptive(AdaptiveParams { gamma1, phi }) => {
                if !(gamma1 > 0.0 && gamma1.is_finite()) {
                    return Err(param_err("gamma1", gamma1, "(0, inf)"));
                }
                open_unit("phi", phi)
            }
            StepPolicy::Armijo(ArmijoParams { rho, l, phi }) => {
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(param_err("rho", rho, "(0, inf)"));
                }
                open_unit("l", l)?;
                open_unit("phi", phi)
            }
        }
    }

    /// Step size before the first iteration.
    pub fn initial_gamma(&self) -> f64 {
        match *self {
            StepPolicy::Fixed { gamma } => gamma,
            StepPolicy::Adaptive(p) => p.gamma1,
            StepPolicy::Armijo(p) => p.rho,
        }
    }

    pub fn phi(&self) -> Option<f64> {
        match *self {
            StepPolicy::Fixed { .. } => None,
            StepPolicy::Adaptive(p) => Some(p.phi),
            StepPolicy::Armijo(p) => Some(p.phi),
        }
    }
}

/// `0 < γ < 1/L`.
pub fn validate_fixed(gamma: f64, lipschitz: f64) -> bool {
    gamma > 0.0 && gamma * lipschitz < 1.0
}

/// Next step size of the self-adaptive rule; never exceeds `gamma_k`.
pub fn adaptive_update(
    gamma_k: f64,
    phi: f64,
    s: &SpaceElement,
    y: &SpaceElement,
    a_s: &SpaceElement,
    a_y: &SpaceElement,
) -> Result<f64, SpaceError> {
    let diff = a_s.dist(a_y)?;
    let floor = ZERO_DIFFERENCE_RTOL * 1f64.max(a_s.norm()).max(a_y.norm());
    if diff <= floor {
        return Ok(gamma_k);
    }
    Ok((phi * s.dist(y)? / diff).min(gamma_k))
}

/// Accepted trial of the Armijo-like search.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoStep {
    pub gamma: f64,
    pub y: SpaceElement,
    pub a_y: SpaceElement,
    pub backtracks: usize,
}

/// Tries `γ = ρ l^m` for `m = 0, 1, …, max_backtracks`, with
/// `y = P_C(x − γ A x)`, and returns the first trial satisfying
/// `γ‖Ax − Ay‖ ≤ φ‖x − y‖`.
pub fn armijo_search(
    params: ArmijoParams,
    x: &SpaceElement,
    a_x: &SpaceElement,
    op: &OperatorSpec,
    set: &FeasibleSet,
    max_backtracks: usize,
) -> Result<ArmijoStep, StepError> {
    let mut gamma = params.rho;
    let mut last = (0.0, 0.0);
    for m in 0..=max_backtracks {
        let y = set.project(&SpaceElement::axpy(-gamma, a_x, x)?)?;
        let a_y = op.apply(&y)?;
        let lhs = gamma * a_x.dist(&a_y)?;
        let rhs = params.phi * x.dist(&y)?;
        if lhs <= rhs {
            return Ok(ArmijoStep {
                gamma,
                y,
                a_y,
                backtracks: m,
            });
        }
        last = (lhs, rhs);
        if m < max_backtracks {
            gamma *= params.l;
        }
    }
    Err(StepError::BacktrackLimit {
        backtracks: max_backtracks,
        last_gamma: gamma,
        lhs: last.0,
        rhs: last.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::space::Space;

    fn e(v: &[f64]) -> SpaceElement {
        SpaceElement::new(Space::Euclidean(v.len()), v.to_vec()).unwrap()
    }

    #[test]
    fn adaptive_keeps_gamma_when_images_coincide() {
        let s = e(&[1.0, 0.0]);
        let y = e(&[0.0, 0.0]);
        let a = e(&[3.0, 3.0]);
        assert_eq!(adaptive_update(0.7, 0.5, &s, &y, &a, &a).unwrap(), 0.7);
    }

    #[test]
    fn adaptive_formula_and_min() {
        let s = e(&[1.0, 0.0]);
        let y = e(&[0.0, 0.0]);
        let a_s = e(&[2.0, 0.0]);
        let a_y = e(&[0.0, 0.0]);
        assert_eq!(adaptive_update(0.5, 0.5, &s, &y, &a_s, &a_y).unwrap(), 0.25);
        let a_s = e(&[1.0, 0.0]);
        assert_eq!(adaptive_update(0.1, 0.5, &s, &y, &a_s, &a_y).unwrap(), 0.1);
    }

    #[test]
    fn fixed_step_range() {
        let l = 7.0;
        assert!(validate_fixed(0.99 / l, l));
        assert!(!validate_fixed(1.0 / l, l));
        assert!(!validate_fixed(0.0, l));
        assert!(StepPolicy::Fixed { gamma: 0.2 }.validate(Some(7.0)).is_err());
        assert!(StepPolicy::Fixed { gamma: 0.1 }.validate(Some(7.0)).is_ok());
    }

    #[test]
    fn policy_validation() {
        assert!(StepPolicy::Adaptive(AdaptiveParams { gamma1: 0.5, phi: 1.0 }).validate(None).is_err());
        assert!(StepPolicy::Armijo(ArmijoParams { rho: 1.0, l: 0.5, phi: 0.4 }).validate(None).is_ok());
        assert!(StepPolicy::Armijo(ArmijoParams { rho: 1.0, l: 1.5, phi: 0.4 }).validate(None).is_err());
    }

    fn affine(m: DenseMatrix) -> OperatorSpec {
        OperatorSpec::AffineMatrix { matrix: m, offset: None }
    }

    #[test]
    fn armijo_accepts_rho_at_solution() {
        let op = affine(DenseMatrix::identity(2));
        let c = FeasibleSet::uniform_box(2, -1.0, 1.0).unwrap();
        let x = e(&[0.0, 0.0]);
        let ax = op.apply(&x).unwrap();
        let p = ArmijoParams { rho: 1.0, l: 0.5, phi: 0.4 };
        let step = armijo_search(p, &x, &ax, &op, &c, 60).unwrap();
        assert_eq!(step.gamma, 1.0);
        assert_eq!(step.backtracks, 0);
    }

    #[test]
    fn armijo_first_trial_when_rho_below_phi_over_l() {
        let m = DenseMatrix::from_row_major(2, 2, vec![4.0, 1.0, -1.0, 3.0]);
        let l = m.spectral_norm(1e-12, 10_000).unwrap();
        let op = affine(m);
        let c = FeasibleSet::uniform_box(2, -2.0, 5.0).unwrap();
        let phi = 0.4;
        let p = ArmijoParams { rho: 0.9 * phi / l, l: 0.5, phi };
        let x = e(&[1.3, -0.7]);
        let ax = op.apply(&x).unwrap();
        let step = armijo_search(p, &x, &ax, &op, &c, 60).unwrap();
        assert_eq!(step.backtracks, 0);
        assert_eq!(step.gamma, p.rho);
    }

    #[test]
    fn armijo_backtracks_on_large_rho() {
        let op = affine(DenseMatrix::from_diag(&[50.0, 10.0]));
        let c = FeasibleSet::uniform_box(2, -2.0, 5.0).unwrap();
        let p = ArmijoParams { rho: 1.0, l: 0.5, phi: 0.4 };
        let x = e(&[1.0, 1.0]);
        let ax = op.apply(&x).unwrap();
        let step = armijo_search(p, &x, &ax, &op, &c, 60).unwrap();
        assert!(step.backtracks >= 1);
        assert!(step.gamma < p.rho);
        let lhs = step.gamma * ax.dist(&step.a_y).unwrap();
        let rhs = p.phi * x.dist(&step.y).unwrap();
        assert!(lhs <= rhs);
    }

    #[test]
    fn armijo_reports_backtrack_limit() {
        let op = affine(DenseMatrix::from_diag(&[1e6, 1.0]));
        let c = FeasibleSet::uniform_box(2, -1e9, 1e9).unwrap();
        let p = ArmijoParams { rho: 1.0, l: 0.5, phi: 0.4 };
        let x = e(&[1.0, 1.0]);
        let ax = op.apply(&x).unwrap();
        let err = armijo_search(p, &x, &ax, &op, &c, 3).unwrap_err();
        assert!(matches!(err, StepError::BacktrackLimit { backtracks: 3, .. }));
    }
}
