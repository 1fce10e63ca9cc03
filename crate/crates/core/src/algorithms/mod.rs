//! Extragradient-Mann schemes for `VI(C, A) ∩ Fix(T)`.
//!
//! Four inertial algorithms with the self-adaptive step size
//! ([`Scheme::Imsegm`], [`Scheme::Imtegm`], [`Scheme::Immsegm`],
//! [`Scheme::Immtegm`]) and six baselines share one driver, [`solve`].
//! Every scheme performs the same core move from a base point `p`:
//!
//! ```text
//! y = P_C(p − γ A p)
//! z = P_{H}(p − γ A y)          subgradient variant, H = {x : ⟨p − γAp − y, x − y⟩ ≤ 0}
//! z = y − γ (A y − A p)         Tseng variant
//! ```
//!
//! and then differs in how `p` is formed (inertial extrapolation or the
//! current iterate) and how `z` is mixed with `T z` into the next iterate.

mod conditions;
mod schemes;
mod sequences;
mod solve;
mod trace;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::operators::OperatorError;
use crate::projections::{FeasibleSet, ProjectionError};
use crate::space::{SpaceElement, SpaceError};
use crate::stepsize::{StepError, StepPolicy, DEFAULT_MAX_BACKTRACKS};

pub use conditions::{validate_conditions, ConditionSet, Violation, ViolationKind};
pub use schemes::{
    inertial_delta, step, step_alg1, step_alg2, step_alg3, step_alg4, step_baseline,
};
pub use sequences::Sequence;
pub use solve::{solve, solve_with_hook, ResidualKind, SolveError};
pub use trace::{ConvergenceTrace, TraceRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgorithmError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// The ten iterative schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Inertial Mann-type subgradient extragradient.
    Imsegm,
    /// Inertial Mann-type Tseng extragradient.
    Imtegm,
    /// Modified inertial Mann-type subgradient extragradient.
    Immsegm,
    /// Modified inertial Mann-type Tseng extragradient.
    Immtegm,
    /// Halpern subgradient extragradient.
    Hsegm,
    /// Self-adaptive Tseng extragradient with hybrid steepest descent.
    Stegm,
    /// Mann-type subgradient extragradient.
    Msegm,
    /// Modified Mann-type subgradient extragradient.
    Mmsegm,
    /// Viscosity-type subgradient extragradient.
    Vsegm,
    /// Viscosity-type Tseng extragradient.
    Vtegm,
}

/// How the second half of the extragradient move is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    Subgradient,
    Tseng,
}

/// Step policy a scheme is defined with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Fixed,
    Adaptive,
    Armijo,
}

impl Scheme {
    pub const ALL: [Scheme; 10] = [
        Scheme::Imsegm,
        Scheme::Imtegm,
        Scheme::Immsegm,
        Scheme::Immtegm,
        Scheme::Hsegm,
        Scheme::Stegm,
        Scheme::Msegm,
        Scheme::Mmsegm,
        Scheme::Vsegm,
        Scheme::Vtegm,
    ];

    pub const PROPOSED: [Scheme; 4] = [Scheme::Imsegm, Scheme::Imtegm, Scheme::Immsegm, Scheme::Immtegm];

    pub const BASELINES: [Scheme; 6] = [
        Scheme::Hsegm,
        Scheme::Stegm,
        Scheme::Msegm,
        Scheme::Mmsegm,
        Scheme::Vsegm,
        Scheme::Vtegm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Imsegm => "imsegm",
            Scheme::Imtegm => "imtegm",
            Scheme::Immsegm => "immsegm",
            Scheme::Immtegm => "immtegm",
            Scheme::Hsegm => "hsegm",
            Scheme::Stegm => "stegm",
            Scheme::Msegm => "msegm",
            Scheme::Mmsegm => "mmsegm",
            Scheme::Vsegm => "vsegm",
            Scheme::Vtegm => "vtegm",
        }
    }

    pub fn is_inertial(&self) -> bool {
        Self::PROPOSED.contains(self)
    }

    pub fn correction(&self) -> Correction {
        match self {
            Scheme::Imtegm | Scheme::Immtegm | Scheme::Stegm | Scheme::Vtegm => Correction::Tseng,
            _ => Correction::Subgradient,
        }
    }

    pub fn step_kind(&self) -> StepKind {
        match self {
            Scheme::Hsegm | Scheme::Msegm | Scheme::Mmsegm => StepKind::Fixed,
            Scheme::Stegm => StepKind::Armijo,
            _ => StepKind::Adaptive,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == lower)
            .ok_or_else(|| format!("unknown scheme `{s}`"))
    }
}

/// Scalar parameters and parameter sequences of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub scheme: Scheme,
    pub step: StepPolicy,
    /// Inertial cap `δ` (inertial schemes only).
    pub delta: f64,
    pub theta: Sequence,
    pub eta: Sequence,
    /// Inertial budget `ζ_k` (inertial schemes only).
    pub zeta: Option<Sequence>,
    /// Demicontractive constant `λ` of `T`.
    pub lambda_t: f64,
    /// Weight multiplying `F` in the hybrid steepest descent step.
    pub hsd_lambda: f64,
}

impl fmt::Display for Parameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "theta={} eta={}", self.theta, self.eta)?;
        if self.scheme.is_inertial() {
            write!(f, " delta={}", self.delta)?;
            if let Some(z) = self.zeta {
                write!(f, " zeta={z}")?;
            }
        }
        match self.step {
            StepPolicy::Fixed { gamma } => write!(f, " step=fixed(gamma={gamma:e})")?,
            StepPolicy::Adaptive(p) => write!(f, " step=adaptive(gamma1={},phi={})", p.gamma1, p.phi)?,
            StepPolicy::Armijo(p) => write!(f, " step=armijo(rho={},l={},phi={})", p.rho, p.l, p.phi)?,
        }
        write!(f, " lambda_t={}", self.lambda_t)?;
        if self.scheme == Scheme::Stegm {
            write!(f, " hsd_lambda={}", self.hsd_lambda)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub params: Parameters,
    pub max_iter: usize,
    pub x0: SpaceElement,
    pub x1: SpaceElement,
    /// Stop early once `D_k < tol` (off by default).
    pub tol: Option<f64>,
    /// Record per-iteration inequality residuals.
    pub record_invariants: bool,
    pub max_backtracks: usize,
}

impl SolverConfig {
    pub fn new(params: Parameters, x0: SpaceElement, x1: SpaceElement, max_iter: usize) -> Self {
        Self {
            params,
            max_iter,
            x0,
            x1,
            tol: None,
            record_invariants: false,
            max_backtracks: DEFAULT_MAX_BACKTRACKS,
        }
    }

    pub fn with_invariants(mut self, on: bool) -> Self {
        self.record_invariants = on;
        self
    }

    pub fn with_tol(mut self, tol: Option<f64>) -> Self {
        self.tol = tol;
        self
    }

    pub fn scheme(&self) -> Scheme {
        self.params.scheme
    }

    pub fn conditions(&self, horizon: usize) -> Vec<Violation> {
        validate_conditions(&self.params, horizon)
    }
}

/// Iterate pair plus the intermediates of the iteration that produced it.
///
/// `k` is the index of `x_curr = x^k`; `x_prev = x^{k−1}`. The fields
/// `s, y, z, t, w`, `gamma_used`, `delta_k` and `halfspace` belong to the
/// iteration `k − 1 → k` (on the initial state they are copies of `x^1` and
/// zeros). `gamma` is the step size iteration `k` will start from.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub k: usize,
    pub x_prev: SpaceElement,
    pub x_curr: SpaceElement,
    /// Base point of the extragradient move (`x^k` for non-inertial schemes).
    pub s: SpaceElement,
    pub y: SpaceElement,
    pub z: SpaceElement,
    /// Mann average `(1 − η)z + ηTz` (STEGM); equals `z` elsewhere.
    pub t: SpaceElement,
    /// Second extragradient point before any anchoring; differs from `z`
    /// only for HSEGM.
    pub w: SpaceElement,
    pub gamma: f64,
    pub gamma_used: f64,
    pub delta_k: f64,
    /// Constructed halfspace of the subgradient variants.
    pub halfspace: Option<FeasibleSet>,
    /// Armijo backtracks spent in the last iteration.
    pub backtracks: usize,
}

impl IterateState {
    pub fn initial(cfg: &SolverConfig) -> Self {
        let x1 = cfg.x1.clone();
        Self {
            k: 1,
            x_prev: cfg.x0.clone(),
            s: x1.clone(),
            y: x1.clone(),
            z: x1.clone(),
            t: x1.clone(),
            w: x1.clone(),
            x_curr: x1,
            gamma: cfg.params.step.initial_gamma(),
            gamma_used: cfg.params.step.initial_gamma(),
            delta_k: 0.0,
            halfspace: None,
            backtracks: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("IMSEGM".parse::<Scheme>().unwrap(), Scheme::Imsegm);
        assert!("egm".parse::<Scheme>().is_err());
    }

    #[test]
    fn scheme_taxonomy() {
        assert_eq!(Scheme::Imtegm.correction(), Correction::Tseng);
        assert_eq!(Scheme::Hsegm.correction(), Correction::Subgradient);
        assert_eq!(Scheme::Stegm.step_kind(), StepKind::Armijo);
        assert_eq!(Scheme::Mmsegm.step_kind(), StepKind::Fixed);
        assert_eq!(Scheme::Vtegm.step_kind(), StepKind::Adaptive);
        assert!(Scheme::Immtegm.is_inertial() && !Scheme::Vsegm.is_inertial());
    }
}
