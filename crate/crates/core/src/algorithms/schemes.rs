//! One iteration of each scheme.

use super::{AlgorithmError, Correction, IterateState, Scheme, SolverConfig};
use crate::problems::ProblemInstance;
use crate::projections::FeasibleSet;
use crate::space::{SpaceElement, SpaceError};
use crate::stepsize::{adaptive_update, armijo_search, StepPolicy};

/// `min(ζ_k / ‖x^k − x^{k−1}‖, δ)`, or `δ` when the two iterates coincide.
pub fn inertial_delta(
    delta: f64,
    zeta_k: f64,
    x_curr: &SpaceElement,
    x_prev: &SpaceElement,
) -> Result<f64, SpaceError> {
    let gap = x_curr.dist(x_prev)?;
    if gap > 0.0 {
        Ok((zeta_k / gap).min(delta))
    } else {
        Ok(delta)
    }
}

fn config_err(msg: impl Into<String>) -> AlgorithmError {
    AlgorithmError::Config(msg.into())
}

fn advance(
    state: &IterateState,
    problem: &ProblemInstance,
    cfg: &SolverConfig,
    scheme: Scheme,
) -> Result<IterateState, AlgorithmError> {
    let params = &cfg.params;
    let k = state.k;
    let theta = params.theta.eval(k, f64::NAN);
    let eta = params.eta.eval(k, theta);
    let x = &state.x_curr;

    let (base, delta_k) = if scheme.is_inertial() {
        let zeta = params
            .zeta
            .ok_or_else(|| config_err(format!("{scheme} needs a zeta sequence")))?;
        let delta_k = inertial_delta(params.delta, zeta.eval(k, theta), x, &state.x_prev)?;
        let momentum = x.sub(&state.x_prev)?;
        (SpaceElement::axpy(delta_k, &momentum, x)?, delta_k)
    } else {
        (x.clone(), 0.0)
    };

    let a_base = problem.a.apply(&base)?;
    let (gamma, y, a_y, backtracks) = match params.step {
        StepPolicy::Fixed { .. } | StepPolicy::Adaptive(_) => {
            let gamma = match params.step {
                StepPolicy::Fixed { gamma } => gamma,
                _ => state.gamma,
            };
            let y = problem.c.project(&SpaceElement::axpy(-gamma, &a_base, &base)?)?;
            let a_y = problem.a.apply(&y)?;
            (gamma, y, a_y, 0)
        }
        StepPolicy::Armijo(armijo) => {
            let found = armijo_search(armijo, &base, &a_base, &problem.a, &problem.c, cfg.max_backtracks)?;
            (found.gamma, found.y, found.a_y, found.backtracks)
        }
    };

    let (w, halfspace) = match scheme.correction() {
        Correction::Subgradient => {
            let forward = SpaceElement::axpy(-gamma, &a_base, &base)?;
            let h = FeasibleSet::halfspace(forward.sub(&y)?, y.clone())?;
            let w = h.project(&SpaceElement::axpy(-gamma, &a_y, &base)?)?;
            (w, Some(h))
        }
        Correction::Tseng => (SpaceElement::axpy(-gamma, &a_y.sub(&a_base)?, &y)?, None),
    };

    let z = if scheme == Scheme::Hsegm {
        SpaceElement::lincomb(theta, &cfg.x0, 1.0 - theta, &w)?
    } else {
        w.clone()
    };
    let tz = problem.t.apply(&z)?;
    let mann = || SpaceElement::lincomb(1.0 - eta, &z, eta, &tz);

    let mut t = z.clone();
    let x_next = match scheme {
        Scheme::Imsegm | Scheme::Imtegm | Scheme::Msegm => SpaceElement::lincomb(1.0 - theta - eta, &z, eta, &tz)?,
        Scheme::Immsegm | Scheme::Immtegm | Scheme::Mmsegm => {
            SpaceElement::lincomb((1.0 - eta) * theta, &z, eta, &tz)?
        }
        Scheme::Hsegm => SpaceElement::lincomb(eta, x, 1.0 - eta, &tz)?,
        Scheme::Vsegm | Scheme::Vtegm => {
            let f = problem
                .viscosity
                .as_ref()
                .ok_or_else(|| config_err(format!("{scheme} needs a viscosity map f")))?;
            t = mann()?;
            SpaceElement::lincomb(theta, &f.apply(x)?, 1.0 - theta, &t)?
        }
        Scheme::Stegm => {
            let f = problem
                .steepest
                .as_ref()
                .ok_or_else(|| config_err("stegm needs a strongly monotone map F"))?;
            t = mann()?;
            SpaceElement::axpy(-params.hsd_lambda * theta, &f.apply(&t)?, &t)?
        }
    };

    let gamma_next = match params.step {
        StepPolicy::Fixed { gamma } => gamma,
        StepPolicy::Adaptive(p) => adaptive_update(gamma, p.phi, &base, &y, &a_base, &a_y)?,
        StepPolicy::Armijo(_) => gamma,
    };

    Ok(IterateState {
        k: k + 1,
        x_prev: x.clone(),
        x_curr: x_next,
        s: base,
        y,
        z,
        t,
        w,
        gamma: gamma_next,
        gamma_used: gamma,
        delta_k,
        halfspace,
        backtracks,
    })
}

/// Inertial subgradient extragradient with the Mann step
/// `x^{k+1} = (1 − θ_k − η_k) z^k + η_k T z^k`.
pub fn step_alg1(
    state: &IterateState,
    problem: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<IterateState, AlgorithmError> {
    advance(state, problem, cfg, Scheme::Imsegm)
}

/// Tseng variant of [`step_alg1`]: `z^k = y^k − γ_k(A y^k − A s^k)`.
pub fn step_alg2(
    state: &IterateState,
    problem: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<IterateState, AlgorithmError> {
    advance(state, problem, cfg, Scheme::Imtegm)
}

/// Subgradient extragradient with the modified Mann step
/// `x^{k+1} = (1 − η_k) θ_k z^k + η_k T z^k`.
pub fn step_alg3(
    state: &IterateState,
    problem: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<IterateState, AlgorithmError> {
    advance(state, problem, cfg, Scheme::Immsegm)
}

/// Tseng variant of [`step_alg3`].
pub fn step_alg4(
    state: &IterateState,
    problem: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<IterateState, AlgorithmError> {
    advance(state, problem, cfg, Scheme::Immtegm)
}

/// One iteration of the baseline named by `cfg`; errors on a proposed scheme.
pub fn step_baseline(
    state: &IterateState,
    problem: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<IterateState, AlgorithmError> {
    let scheme = cfg.scheme();
    if scheme.is_inertial() {
        return Err(config_err(format!("{scheme} is not a baseline scheme")));
    }
    advance(state, problem, cfg, scheme)
}

/// One iteration of whichever scheme `cfg` names.
pub fn step(
    state: &IterateState,
    problem: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<IterateState, AlgorithmError> {
    advance(state, problem, cfg, cfg.scheme())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{Parameters, Sequence};
    use crate::matrix::DenseMatrix;
    use crate::operators::{MappingInfo, OperatorSpec};
    use crate::projections::halfspace_residual;
    use crate::space::Space;
    use crate::stepsize::{AdaptiveParams, ArmijoParams};

    type V2 = [f64; 2];

    fn e(v: &[f64]) -> SpaceElement {
        SpaceElement::new(Space::Euclidean(v.len()), v.to_vec()).unwrap()
    }

    fn toy_problem(g: [[f64; 2]; 2], t_scale: f64) -> ProblemInstance {
        let matrix = DenseMatrix::from_row_major(2, 2, vec![g[0][0], g[0][1], g[1][0], g[1][1]]);
        ProblemInstance {
            id: "toy".into(),
            space: Space::Euclidean(2),
            a: OperatorSpec::AffineMatrix { matrix, offset: None },
            a_info: MappingInfo::default(),
            c: FeasibleSet::uniform_box(2, -2.0, 5.0).unwrap(),
            t: OperatorSpec::Scale(t_scale),
            t_info: MappingInfo::default(),
            steepest: Some(OperatorSpec::Scale(0.5)),
            viscosity: Some(OperatorSpec::Scale(0.5)),
            x_star: Some(SpaceElement::zeros(Space::Euclidean(2))),
            lipschitz: None,
        }
    }

    fn params(scheme: Scheme) -> Parameters {
        let adaptive = StepPolicy::Adaptive(AdaptiveParams { gamma1: 0.5, phi: 0.5 });
        let (theta, eta, step) = match scheme {
            Scheme::Imsegm | Scheme::Imtegm => (Sequence::OneOverKp1, Sequence::HalfOneMinusTheta, adaptive),
            Scheme::Immsegm | Scheme::Immtegm => (Sequence::KOverKp1, Sequence::ThetaOver3, adaptive),
            Scheme::Msegm => (Sequence::OneOverKp1, Sequence::HalfOneMinusTheta, StepPolicy::Fixed { gamma: 0.3 }),
            Scheme::Mmsegm => (Sequence::KOverKp1, Sequence::ThetaOver3, StepPolicy::Fixed { gamma: 0.3 }),
            Scheme::Hsegm => (Sequence::OneOverKp1, Sequence::KOver2kp1, StepPolicy::Fixed { gamma: 0.3 }),
            Scheme::Vsegm | Scheme::Vtegm => (Sequence::OneOverKp1, Sequence::KOver2kp1, adaptive),
            Scheme::Stegm => (
                Sequence::OneOverKp1,
                Sequence::KOver2kp1,
                StepPolicy::Armijo(ArmijoParams { rho: 1.0, l: 0.5, phi: 0.4 }),
            ),
        };
        Parameters {
            scheme,
            step,
            delta: 0.6,
            theta,
            eta,
            zeta: Some(Sequence::OneOverKp1Sq),
            lambda_t: 0.0,
            hsd_lambda: 0.5,
        }
    }

    fn cfg(scheme: Scheme, x0: V2, x1: V2) -> SolverConfig {
        SolverConfig::new(params(scheme), e(&x0), e(&x1), 10)
    }

    // Plain-array recomputation of every scheme, written without the
    // library's vector or projection helpers.
    struct Scalar {
        g: [[f64; 2]; 2],
        t_scale: f64,
    }

    impl Scalar {
        fn a(&self, v: V2) -> V2 {
            [
                self.g[0][0] * v[0] + self.g[0][1] * v[1],
                self.g[1][0] * v[0] + self.g[1][1] * v[1],
            ]
        }

        fn run(&self, scheme: Scheme, x0: V2, x1: V2, iters: usize) -> Vec<V2> {
            let norm = |v: V2| (v[0] * v[0] + v[1] * v[1]).sqrt();
            let clamp = |v: V2| [v[0].clamp(-2.0, 5.0), v[1].clamp(-2.0, 5.0)];
            let inertial = scheme.is_inertial();
            let (mut prev, mut cur) = (x0, x1);
            let mut gamma = match scheme {
                Scheme::Msegm | Scheme::Mmsegm | Scheme::Hsegm => 0.3,
                Scheme::Stegm => 1.0,
                _ => 0.5,
            };
            let mut out = vec![cur];
            for k in 1..=iters {
                let kf = k as f64;
                let theta = match scheme {
                    Scheme::Immsegm | Scheme::Immtegm | Scheme::Mmsegm => kf / (kf + 1.0),
                    _ => 1.0 / (kf + 1.0),
                };
                let eta = match scheme {
                    Scheme::Imsegm | Scheme::Imtegm | Scheme::Msegm => 0.5 * (1.0 - theta),
                    Scheme::Immsegm | Scheme::Immtegm | Scheme::Mmsegm => theta / 3.0,
                    _ => kf / (2.0 * kf + 1.0),
                };
                let mut s = cur;
                if inertial {
                    let diff = [cur[0] - prev[0], cur[1] - prev[1]];
                    let zeta = 1.0 / ((kf + 1.0) * (kf + 1.0));
                    let d = if norm(diff) > 0.0 { (zeta / norm(diff)).min(0.6) } else { 0.6 };
                    s = [cur[0] + d * diff[0], cur[1] + d * diff[1]];
                }
                let a_s = self.a(s);
                let trial = |g: f64| clamp([s[0] - g * a_s[0], s[1] - g * a_s[1]]);
                let mut y = trial(gamma);
                if scheme == Scheme::Stegm {
                    gamma = 1.0;
                    loop {
                        y = trial(gamma);
                        let ay = self.a(y);
                        let lhs = gamma * norm([a_s[0] - ay[0], a_s[1] - ay[1]]);
                        if lhs <= 0.4 * norm([s[0] - y[0], s[1] - y[1]]) {
                            break;
                        }
                        gamma *= 0.5;
                    }
                }
                let a_y = self.a(y);
                let mut z = match scheme.correction() {
                    Correction::Tseng => [y[0] - gamma * (a_y[0] - a_s[0]), y[1] - gamma * (a_y[1] - a_s[1])],
                    Correction::Subgradient => {
                        let n = [s[0] - gamma * a_s[0] - y[0], s[1] - gamma * a_s[1] - y[1]];
                        let q = [s[0] - gamma * a_y[0], s[1] - gamma * a_y[1]];
                        let nn = n[0] * n[0] + n[1] * n[1];
                        let ex = n[0] * (q[0] - y[0]) + n[1] * (q[1] - y[1]);
                        if nn > 0.0 && ex > 0.0 {
                            [q[0] - ex / nn * n[0], q[1] - ex / nn * n[1]]
                        } else {
                            q
                        }
                    }
                };
                if scheme == Scheme::Hsegm {
                    z = [theta * x0[0] + (1.0 - theta) * z[0], theta * x0[1] + (1.0 - theta) * z[1]];
                }
                let tz = [self.t_scale * z[0], self.t_scale * z[1]];
                let mann = [(1.0 - eta) * z[0] + eta * tz[0], (1.0 - eta) * z[1] + eta * tz[1]];
                let next = match scheme {
                    Scheme::Imsegm | Scheme::Imtegm | Scheme::Msegm => {
                        let c = 1.0 - theta - eta;
                        [c * z[0] + eta * tz[0], c * z[1] + eta * tz[1]]
                    }
                    Scheme::Immsegm | Scheme::Immtegm | Scheme::Mmsegm => {
                        let c = (1.0 - eta) * theta;
                        [c * z[0] + eta * tz[0], c * z[1] + eta * tz[1]]
                    }
                    Scheme::Hsegm => [
                        eta * cur[0] + (1.0 - eta) * tz[0],
                        eta * cur[1] + (1.0 - eta) * tz[1],
                    ],
                    Scheme::Vsegm | Scheme::Vtegm => [
                        theta * 0.5 * cur[0] + (1.0 - theta) * mann[0],
                        theta * 0.5 * cur[1] + (1.0 - theta) * mann[1],
                    ],
                    Scheme::Stegm => {
                        let c = 1.0 - 0.5 * theta * 0.5;
                        [c * mann[0], c * mann[1]]
                    }
                };
                let adaptive = !matches!(
                    scheme,
                    Scheme::Msegm | Scheme::Mmsegm | Scheme::Hsegm | Scheme::Stegm
                );
                if adaptive {
                    let dd = norm([a_s[0] - a_y[0], a_s[1] - a_y[1]]);
                    if dd > 1e-14 * 1f64.max(norm(a_s)).max(norm(a_y)) {
                        gamma = (0.5 * norm([s[0] - y[0], s[1] - y[1]]) / dd).min(gamma);
                    }
                }
                prev = cur;
                cur = next;
                out.push(cur);
            }
            out
        }
    }

    fn library_run(problem: &ProblemInstance, cfg: &SolverConfig, iters: usize) -> Vec<IterateState> {
        let mut st = IterateState::initial(cfg);
        let mut out = vec![st.clone()];
        for _ in 0..iters {
            st = step(&st, problem, cfg).unwrap();
            out.push(st.clone());
        }
        out
    }

    #[test]
    fn delta_examples() {
        let a = e(&[1.0, 2.0]);
        assert_eq!(inertial_delta(0.6, 0.25, &a, &a).unwrap(), 0.6);
        let b = e(&[1.0, 3.0]);
        assert_eq!(inertial_delta(0.6, 0.25, &b, &a).unwrap(), 0.25);
        assert_eq!(inertial_delta(0.6, 10.0, &b, &a).unwrap(), 0.6);
    }

    #[test]
    fn first_alg1_iteration_by_hand() {
        let problem = toy_problem([[1.0, 0.0], [0.0, 1.0]], 0.5);
        let cfg = cfg(Scheme::Imsegm, [1.0, 1.0], [1.0, 1.0]);
        let st = step_alg1(&IterateState::initial(&cfg), &problem, &cfg).unwrap();
        assert_eq!(st.s.coords(), &[1.0, 1.0]);
        assert_eq!(st.y.coords(), &[0.5, 0.5]);
        assert_eq!(st.z.coords(), &[0.75, 0.75]);
        // (1 − 1/2 − 1/4)·0.75 + (1/4)·0.375
        assert_eq!(st.x_curr.coords(), &[0.28125, 0.28125]);
        assert_eq!(st.gamma, 0.5);
        assert_eq!(st.delta_k, 0.6);
    }

    #[test]
    fn all_schemes_match_scalar_recomputation() {
        let g = [[2.0, 1.0], [-1.0, 1.5]];
        let oracle = Scalar { g, t_scale: 0.5 };
        let problem = toy_problem(g, 0.5);
        let (x0, x1) = ([1.0, -0.5], [0.8, 0.3]);
        for scheme in Scheme::ALL {
            let cfg = cfg(scheme, x0, x1);
            let lib = library_run(&problem, &cfg, 8);
            let want = oracle.run(scheme, x0, x1, 8);
            for (st, w) in lib.iter().zip(&want) {
                for (got, want) in st.x_curr.coords().iter().zip(w) {
                    assert!(
                        (got - want).abs() <= 1e-13 * (1.0 + want.abs()),
                        "{scheme} k={}: {got} vs {want}",
                        st.k
                    );
                }
            }
        }
    }

    #[test]
    fn direct_dispatch_ignores_configured_scheme() {
        let g = [[2.0, 1.0], [-1.0, 1.5]];
        let problem = toy_problem(g, 0.5);
        let cfg1 = cfg(Scheme::Imsegm, [1.0, -0.5], [0.8, 0.3]);
        let st0 = IterateState::initial(&cfg1);
        let via_generic = step(&st0, &problem, &cfg1).unwrap();
        assert_eq!(step_alg1(&st0, &problem, &cfg1).unwrap(), via_generic);
        let mut as_alg3 = cfg1.clone();
        as_alg3.params.scheme = Scheme::Immsegm;
        assert_eq!(
            step_alg3(&st0, &problem, &cfg1).unwrap(),
            step(&st0, &problem, &as_alg3).unwrap()
        );
        assert!(step_baseline(&st0, &problem, &cfg1).is_err());
        let base = self::cfg(Scheme::Msegm, [1.0, -0.5], [0.8, 0.3]);
        assert!(step_baseline(&IterateState::initial(&base), &problem, &base).is_ok());
    }

    #[test]
    fn subgradient_iterates_lie_in_their_halfspace() {
        let problem = toy_problem([[3.0, 2.0], [-2.0, 0.5]], 0.5);
        for scheme in [Scheme::Imsegm, Scheme::Immsegm, Scheme::Msegm, Scheme::Vsegm, Scheme::Hsegm] {
            let cfg = cfg(scheme, [4.0, -1.5], [4.5, -1.0]);
            for st in library_run(&problem, &cfg, 20).iter().skip(1) {
                let h = st.halfspace.as_ref().unwrap();
                assert!(halfspace_residual(h, &st.w).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn tseng_bound_holds() {
        let problem = toy_problem([[3.0, 2.0], [-2.0, 0.5]], 0.5);
        for scheme in [Scheme::Imtegm, Scheme::Immtegm] {
            let cfg = cfg(scheme, [4.0, -1.5], [4.5, -1.0]);
            for st in library_run(&problem, &cfg, 20).iter().skip(1) {
                let lhs = st.z.dist(&st.y).unwrap();
                let rhs = 0.5 * st.gamma_used / st.gamma * st.s.dist(&st.y).unwrap();
                assert!(lhs <= rhs + 1e-10, "{scheme} k={}: {lhs} > {rhs}", st.k);
            }
        }
    }

    #[test]
    fn zero_operator_reduces_tseng_to_inertial_mann() {
        let mut problem = toy_problem([[0.0, 0.0], [0.0, 0.0]], 0.5);
        problem.a = OperatorSpec::Scale(0.0);
        let cfg = cfg(Scheme::Imtegm, [7.0, 1.0], [6.0, 3.0]);
        let st = step_alg2(&IterateState::initial(&cfg), &problem, &cfg).unwrap();
        assert_eq!(st.y, problem.c.project(&st.s).unwrap());
        assert_eq!(st.z, st.y);
    }

    #[test]
    fn identity_map_with_unit_theta_collapses() {
        let mut problem = toy_problem([[1.0, 0.5], [-0.5, 1.0]], 1.0);
        problem.t = OperatorSpec::identity();
        let mut c = cfg(Scheme::Immsegm, [1.0, 2.0], [0.5, 1.0]);
        c.params.theta = Sequence::Constant(1.0);
        let st = step_alg3(&IterateState::initial(&c), &problem, &c).unwrap();
        for (a, b) in st.x_curr.coords().iter().zip(st.z.coords()) {
            assert!((a - b).abs() <= 1e-15);
        }

        problem.a = OperatorSpec::Scale(0.0);
        let mut c4 = cfg(Scheme::Immtegm, [9.0, -4.0], [8.0, -3.0]);
        c4.params.theta = Sequence::Constant(1.0);
        let st = step_alg4(&IterateState::initial(&c4), &problem, &c4).unwrap();
        let want = problem.c.project(&st.s).unwrap();
        for (a, b) in st.x_curr.coords().iter().zip(want.coords()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn stegm_final_step_is_damped_mann_average() {
        let problem = toy_problem([[2.0, 1.0], [-1.0, 1.5]], 0.5);
        let cfg = cfg(Scheme::Stegm, [1.0, -0.5], [0.8, 0.3]);
        for st in library_run(&problem, &cfg, 10).iter().skip(1) {
            let theta = 1.0 / st.k as f64;
            let want = st.t.scale(1.0 - 0.5 * 0.5 * theta).unwrap();
            for (a, b) in st.x_curr.coords().iter().zip(want.coords()) {
                assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn origin_is_stationary_for_every_scheme() {
        let problem = toy_problem([[2.0, 1.0], [-1.0, 1.5]], 0.5);
        for scheme in Scheme::ALL {
            let cfg = cfg(scheme, [0.0, 0.0], [0.0, 0.0]);
            for st in library_run(&problem, &cfg, 15) {
                assert!(st.x_curr.is_zero(), "{scheme} left the origin");
            }
        }
    }

    #[test]
    fn missing_maps_are_configuration_errors() {
        let mut problem = toy_problem([[1.0, 0.0], [0.0, 1.0]], 0.5);
        problem.viscosity = None;
        problem.steepest = None;
        for scheme in [Scheme::Vsegm, Scheme::Stegm] {
            let cfg = cfg(scheme, [1.0, 1.0], [1.0, 1.0]);
            let err = step(&IterateState::initial(&cfg), &problem, &cfg).unwrap_err();
            assert!(matches!(err, AlgorithmError::Config(_)));
        }
        let mut cfg = cfg(Scheme::Imsegm, [1.0, 1.0], [1.0, 1.0]);
        cfg.params.zeta = None;
        assert!(step(&IterateState::initial(&cfg), &problem, &cfg).is_err());
    }
}
