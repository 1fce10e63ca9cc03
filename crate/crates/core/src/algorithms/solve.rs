//! The iteration driver shared by all schemes.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::schemes::{inertial_delta, step};
use super::trace::{ConvergenceTrace, TraceRow};
use super::{AlgorithmError, Correction, IterateState, Scheme, SolverConfig, StepKind};
use crate::problems::ProblemInstance;
use crate::projections::{halfspace_residual, FeasibleSet};
use crate::stepsize::StepPolicy;

/// Inequality residuals recorded with `record_invariants`. Each is
/// `lhs − rhs` of an inequality of the form `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    /// Distance-to-solution contraction of the extragradient move
    /// (needs a known solution).
    Contraction,
    /// Signed distance `⟨normal, z − anchor⟩ / ‖normal‖` of `z` outside the
    /// constructed halfspace (zero for a degenerate normal).
    HalfspaceMembership,
    /// `‖z − y‖ − c‖s − y‖` for the Tseng correction.
    TsengBound,
    /// `δ_k‖x^k − x^{k−1}‖ − ζ_k`.
    InertialBound,
}

impl ResidualKind {
    pub fn name(&self) -> &'static str {
        match self {
            ResidualKind::Contraction => "contraction",
            ResidualKind::HalfspaceMembership => "halfspace_membership",
            ResidualKind::TsengBound => "tseng_bound",
            ResidualKind::InertialBound => "inertial_bound",
        }
    }

    /// Columns recorded for `scheme` on `problem`.
    pub fn columns(scheme: Scheme, problem: &ProblemInstance, step: &StepPolicy) -> Vec<ResidualKind> {
        let mut cols = Vec::new();
        let has_factor = !matches!(step, StepPolicy::Fixed { .. }) || problem.lipschitz.is_some();
        if problem.x_star.is_some() && has_factor {
            cols.push(ResidualKind::Contraction);
        }
        match scheme.correction() {
            Correction::Subgradient => cols.push(ResidualKind::HalfspaceMembership),
            Correction::Tseng if has_factor => cols.push(ResidualKind::TsengBound),
            Correction::Tseng => {}
        }
        if scheme.is_inertial() {
            cols.push(ResidualKind::InertialBound);
        }
        cols
    }
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A failed solve with the rows recorded before the failure.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("solve failed after {} rows: {kind}", .partial.len())]
pub struct SolveError {
    #[source]
    pub kind: AlgorithmError,
    pub partial: ConvergenceTrace,
}

fn check_config(problem: &ProblemInstance, cfg: &SolverConfig) -> Result<(), AlgorithmError> {
    let p = &cfg.params;
    let scheme = p.scheme;
    let bad = |m: String| Err(AlgorithmError::Config(m));
    let kind = match p.step {
        StepPolicy::Fixed { .. } => StepKind::Fixed,
        StepPolicy::Adaptive(_) => StepKind::Adaptive,
        StepPolicy::Armijo(_) => StepKind::Armijo,
    };
    if kind != scheme.step_kind() {
        return bad(format!("{scheme} uses a {:?} step, got {:?}", scheme.step_kind(), kind));
    }
    p.step.validate(problem.lipschitz)?;
    if !(0.0..1.0).contains(&p.lambda_t) {
        return bad(format!("lambda_t = {} outside [0, 1)", p.lambda_t));
    }
    if scheme.is_inertial() {
        if !(p.delta >= 0.0 && p.delta.is_finite()) {
            return bad(format!("delta = {} must be >= 0", p.delta));
        }
        if p.zeta.is_none() {
            return bad(format!("{scheme} needs a zeta sequence"));
        }
    }
    match scheme {
        Scheme::Stegm if problem.steepest.is_none() => return bad("stegm needs a strongly monotone map F".into()),
        Scheme::Stegm if !(p.hsd_lambda > 0.0) => return bad(format!("hsd_lambda = {} must be > 0", p.hsd_lambda)),
        Scheme::Vsegm | Scheme::Vtegm if problem.viscosity.is_none() => {
            return bad(format!("{scheme} needs a viscosity map f"))
        }
        _ => {}
    }
    for (name, x) in [("x0", &cfg.x0), ("x1", &cfg.x1)] {
        if x.space() != problem.space {
            return bad(format!("{name} lives in {}, problem in {}", x.space(), problem.space));
        }
    }
    Ok(())
}

/// Factor `c` bounding `γ_k‖A s − A y‖ ≤ c‖s − y‖` in the iteration that
/// produced `next`.
fn contraction_factor(cfg: &SolverConfig, problem: &ProblemInstance, next: &IterateState) -> Option<f64> {
    match cfg.params.step {
        StepPolicy::Fixed { gamma } => problem.lipschitz.map(|l| gamma * l),
        StepPolicy::Adaptive(p) => Some(p.phi * next.gamma_used / next.gamma),
        StepPolicy::Armijo(p) => Some(p.phi),
    }
}

fn residuals(
    cols: &[ResidualKind],
    problem: &ProblemInstance,
    cfg: &SolverConfig,
    prev: &IterateState,
    next: &IterateState,
) -> Result<Vec<Option<f64>>, AlgorithmError> {
    let c = contraction_factor(cfg, problem, next);
    let scheme = cfg.scheme();
    let mut out = Vec::with_capacity(cols.len());
    for col in cols {
        let value = match col {
            ResidualKind::Contraction => match (&problem.x_star, c) {
                (Some(u), Some(c)) => {
                    let base = next.s.dist(u)?.powi(2);
                    let gap = next.s.dist(&next.y)?.powi(2);
                    match scheme.correction() {
                        Correction::Subgradient if c < 1.0 => {
                            let lhs = next.w.dist(u)?.powi(2);
                            let tail = next.w.dist(&next.y)?.powi(2);
                            Some(lhs - (base - (1.0 - c) * (gap + tail)))
                        }
                        Correction::Tseng if c < 1.0 => {
                            let lhs = next.w.dist(u)?.powi(2);
                            Some(lhs - (base - (1.0 - c * c) * gap))
                        }
                        _ => None,
                    }
                }
                _ => None,
            },
            ResidualKind::HalfspaceMembership => match &next.halfspace {
                Some(h @ FeasibleSet::HalfSpace { normal, .. }) => {
                    let scale = normal.norm();
                    Some(if scale > 0.0 { halfspace_residual(h, &next.w)? / scale } else { 0.0 })
                }
                _ => None,
            },
            ResidualKind::TsengBound => match c {
                Some(c) => Some(next.w.dist(&next.y)? - c * next.s.dist(&next.y)?),
                None => None,
            },
            ResidualKind::InertialBound => match cfg.params.zeta {
                Some(zeta) => {
                    let theta = cfg.params.theta.eval(prev.k, f64::NAN);
                    let gap = prev.x_curr.dist(&prev.x_prev)?;
                    Some(next.delta_k * gap - zeta.eval(prev.k, theta))
                }
                None => None,
            },
        };
        out.push(value);
    }
    Ok(out)
}

/// Runs `cfg` on `problem`; see [`solve_with_hook`].
pub fn solve(problem: &ProblemInstance, cfg: &SolverConfig) -> Result<ConvergenceTrace, SolveError> {
    solve_with_hook(problem, cfg, |_, _| {})
}

/// Runs the configured scheme from `(x0, x1)` for `max_iter` iterations, or
/// until `D_k < tol` when a tolerance is set.
///
/// The trace has one row per iterate `x^1, …, x^{max_iter+1}`. Row `k` holds
/// `D_k`, the `γ` and `δ` iteration `k` uses, the elapsed solver time when
/// `x^k` was reached, and (opt-in) the residuals of iteration `k`. The final
/// row carries no residuals. `hook(before, after)` runs after every
/// iteration; neither the hook nor residual recording is timed.
pub fn solve_with_hook(
    problem: &ProblemInstance,
    cfg: &SolverConfig,
    mut hook: impl FnMut(&IterateState, &IterateState),
) -> Result<ConvergenceTrace, SolveError> {
    let cols = if cfg.record_invariants {
        ResidualKind::columns(cfg.scheme(), problem, &cfg.params.step)
    } else {
        Vec::new()
    };
    let mut trace = ConvergenceTrace::new(cols.iter().map(|c| c.name().to_string()).collect());
    let fail = |kind: AlgorithmError, trace: &ConvergenceTrace| SolveError {
        kind,
        partial: trace.clone(),
    };
    check_config(problem, cfg).map_err(|e| fail(e, &trace))?;

    let distance = |x: &crate::space::SpaceElement| -> Result<Option<f64>, AlgorithmError> {
        match &problem.x_star {
            Some(u) => Ok(Some(x.dist(u)?)),
            None => Ok(None),
        }
    };

    let mut state = IterateState::initial(cfg);
    let mut elapsed = Duration::ZERO;
    for _ in 0..cfg.max_iter {
        let started = Instant::now();
        let next = step(&state, problem, cfg).map_err(|e| fail(e, &trace))?;
        let reached = elapsed;
        elapsed += started.elapsed();

        let res = if cfg.record_invariants {
            Some(residuals(&cols, problem, cfg, &state, &next).map_err(|e| fail(e, &trace))?)
        } else {
            None
        };
        trace.rows.push(TraceRow {
            k: state.k,
            error: distance(&state.x_curr).map_err(|e| fail(e, &trace))?,
            gamma: next.gamma_used,
            delta: next.delta_k,
            elapsed_seconds: reached.as_secs_f64(),
            residuals: res,
        });
        hook(&state, &next);
        state = next;
        if let (Some(tol), Some(d)) = (cfg.tol, distance(&state.x_curr).map_err(|e| fail(e, &trace))?) {
            if d < tol {
                break;
            }
        }
    }

    let delta = match (cfg.scheme().is_inertial(), cfg.params.zeta) {
        (true, Some(zeta)) => {
            let theta = cfg.params.theta.eval(state.k, f64::NAN);
            inertial_delta(cfg.params.delta, zeta.eval(state.k, theta), &state.x_curr, &state.x_prev)
                .map_err(|e| fail(e.into(), &trace))?
        }
        _ => 0.0,
    };
    trace.rows.push(TraceRow {
        k: state.k,
        error: distance(&state.x_curr).map_err(|e| fail(e, &trace))?,
        gamma: state.gamma,
        delta,
        elapsed_seconds: elapsed.as_secs_f64(),
        residuals: cfg.record_invariants.then(|| vec![None; cols.len()]),
    });
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{Parameters, Sequence};
    use crate::problems::{initial_points, make_example1, make_example2, InitKind, RandomSpec};
    use crate::stepsize::{AdaptiveParams, ArmijoParams};

    fn alg1_params() -> Parameters {
        Parameters {
            scheme: Scheme::Imsegm,
            step: StepPolicy::Adaptive(AdaptiveParams { gamma1: 0.5, phi: 0.5 }),
            delta: 0.6,
            theta: Sequence::OneOverKp1,
            eta: Sequence::HalfOneMinusTheta,
            zeta: Some(Sequence::OneOverKp1Sq),
            lambda_t: 0.0,
            hsd_lambda: 0.5,
        }
    }

    #[test]
    fn zero_iterations_give_initial_row() {
        let p = make_example1(&RandomSpec::new(10, 1)).unwrap();
        let (x0, x1) = initial_points(&p, InitKind::RandomUniform(3)).unwrap();
        let trace = solve(&p, &SolverConfig::new(alg1_params(), x0, x1.clone(), 0)).unwrap();
        assert_eq!(trace.len(), 1);
        let row = &trace.rows[0];
        assert_eq!(row.k, 1);
        assert_eq!(row.error, Some(x1.norm()));
        assert_eq!(row.elapsed_seconds, 0.0);
    }

    #[test]
    fn example1_alg1_decreases() {
        let p = make_example1(&RandomSpec::new(50, 11)).unwrap();
        let (x0, x1) = initial_points(&p, InitKind::RandomUniform(1)).unwrap();
        let trace = solve(&p, &SolverConfig::new(alg1_params(), x0, x1, 400)).unwrap();
        assert_eq!(trace.len(), 401);
        assert!(trace.is_well_ordered());
        let d = trace.errors().unwrap();
        assert!(d[400] < d[0]);
        assert!(trace.gammas().windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn example2_alg2_decreases() {
        let p = make_example2(101).unwrap();
        let (x0, x1) = initial_points(&p, InitKind::TSquared).unwrap();
        let mut params = alg1_params();
        params.scheme = Scheme::Imtegm;
        let trace = solve(&p, &SolverConfig::new(params, x0, x1, 50)).unwrap();
        let d = trace.errors().unwrap();
        assert_eq!(d.len(), 51);
        assert!(d[50] < d[0]);
    }

    #[test]
    fn tolerance_stops_early() {
        let p = make_example2(101).unwrap();
        let (x0, x1) = initial_points(&p, InitKind::TSquared).unwrap();
        let cfg = SolverConfig::new(alg1_params(), x0, x1, 500).with_tol(Some(1e-3));
        let trace = solve(&p, &cfg).unwrap();
        assert!(trace.len() < 501);
        assert!(trace.last().unwrap().error.unwrap() < 1e-3);
        let before = &trace.rows[trace.len() - 2];
        assert!(before.error.unwrap() >= 1e-3);
    }

    #[test]
    fn invariants_are_recorded_with_expected_columns() {
        let p = make_example1(&RandomSpec::new(20, 2)).unwrap();
        let (x0, x1) = initial_points(&p, InitKind::RandomUniform(2)).unwrap();
        let cfg = SolverConfig::new(alg1_params(), x0.clone(), x1.clone(), 30).with_invariants(true);
        let trace = solve(&p, &cfg).unwrap();
        assert_eq!(
            trace.residual_names,
            vec!["contraction", "halfspace_membership", "inertial_bound"]
        );
        assert!(trace.max_residual("halfspace_membership").unwrap() <= 1e-10);
        assert!(trace.max_residual("inertial_bound").unwrap() <= 1e-15);

        let mut params = alg1_params();
        params.scheme = Scheme::Stegm;
        params.step = StepPolicy::Armijo(ArmijoParams { rho: 1.0, l: 0.5, phi: 0.4 });
        params.theta = Sequence::OneOverKp1;
        params.eta = Sequence::KOver2kp1;
        let trace = solve(&p, &SolverConfig::new(params, x0, x1, 30).with_invariants(true)).unwrap();
        assert_eq!(trace.residual_names, vec!["contraction", "tseng_bound"]);
        assert!(trace.max_residual("tseng_bound").unwrap() <= 1e-10);
    }

    #[test]
    fn hook_sees_every_iteration() {
        let p = make_example2(11).unwrap();
        let (x0, x1) = initial_points(&p, InitKind::TPlusHalfCosT).unwrap();
        let mut seen = Vec::new();
        solve_with_hook(&p, &SolverConfig::new(alg1_params(), x0, x1, 7), |a, b| {
            seen.push((a.k, b.k));
        })
        .unwrap();
        assert_eq!(seen, (1..=7).map(|k| (k, k + 1)).collect::<Vec<_>>());
    }

    #[test]
    fn mismatched_step_policy_is_rejected() {
        let p = make_example1(&RandomSpec::new(5, 1)).unwrap();
        let (x0, x1) = initial_points(&p, InitKind::Zero).unwrap();
        let mut params = alg1_params();
        params.step = StepPolicy::Fixed { gamma: 1e-6 };
        let err = solve(&p, &SolverConfig::new(params, x0.clone(), x1.clone(), 5)).unwrap_err();
        assert!(matches!(err.kind, AlgorithmError::Config(_)));
        assert!(err.partial.is_empty());

        let mut params = alg1_params();
        params.scheme = Scheme::Msegm;
        params.step = StepPolicy::Fixed { gamma: 10.0 };
        let err = solve(&p, &SolverConfig::new(params, x0, x1, 5)).unwrap_err();
        assert!(matches!(err.kind, AlgorithmError::Step(_)));
    }
}
