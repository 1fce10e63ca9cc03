//! Prefix checks of the parameter conditions each scheme relies on.
//!
//! The conditions are asymptotic, so they are verified on `k = 1..=horizon`:
//! pointwise ranges at every `k`, and trend checks (strict decrease) over the
//! last `horizon / 2` terms standing in for the limits.

use std::fmt;

use super::{Parameters, Scheme};

/// Which family of parameter conditions a scheme needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionSet {
    /// `θ_k → 0`, `Σθ_k = ∞`, `η_k ∈ (0, (1−λ)(1−θ_k))`, `ζ_k/θ_k → 0`.
    C4,
    /// `θ_k → 1`, `Σ(1−θ_k) = ∞`, `η_k ∈ (0, (1−λ)θ_k/(λ+θ_k))`, `ζ_k/(1−θ_k) → 0`.
    C5,
    /// Halpern, viscosity and hybrid-steepest-descent baselines:
    /// `θ_k → 0` and `η_k ∈ (0, 1−λ)`.
    Anchored,
}

impl fmt::Display for ConditionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionSet::C4 => "C4",
            ConditionSet::C5 => "C5",
            ConditionSet::Anchored => "anchored",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    ThetaRange,
    ThetaLimit,
    EtaInterval,
    ZetaMissing,
    ZetaPositive,
    ZetaRatioLimit,
    DeltaRange,
    LambdaRange,
}

impl ViolationKind {
    pub fn name(&self) -> &'static str {
        match self {
            ViolationKind::ThetaRange => "theta_range",
            ViolationKind::ThetaLimit => "theta_limit",
            ViolationKind::EtaInterval => "eta_interval",
            ViolationKind::ZetaMissing => "zeta_missing",
            ViolationKind::ZetaPositive => "zeta_positive",
            ViolationKind::ZetaRatioLimit => "zeta_ratio_limit",
            ViolationKind::DeltaRange => "delta_range",
            ViolationKind::LambdaRange => "lambda_range",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub set: ConditionSet,
    pub kind: ViolationKind,
    /// First offending index, when the check is indexed.
    pub k: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.set, self.kind.name())?;
        if let Some(k) = self.k {
            write!(f, " at k={k}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Lists every violated condition (at most one entry per kind). Empty means
/// the parameters pass on the evaluated prefix.
pub fn validate_conditions(params: &Parameters, horizon: usize) -> Vec<Violation> {
    let set = params.scheme.condition_set();
    let needs_zeta = params.scheme.is_inertial();
    let lambda = params.lambda_t;
    let mut out = Vec::new();
    let mut push = |kind, k, detail: String| {
        if !out.iter().any(|v: &Violation| v.kind == kind) {
            out.push(Violation { set, kind, k, detail });
        }
    };

    if !(0.0..1.0).contains(&lambda) {
        push(ViolationKind::LambdaRange, None, format!("lambda={lambda} not in [0, 1)"));
    }
    if needs_zeta && !(params.delta >= 0.0 && params.delta.is_finite()) {
        push(ViolationKind::DeltaRange, None, format!("delta={} must be >= 0", params.delta));
    }
    let zeta = match (needs_zeta, params.zeta) {
        (true, None) => {
            push(ViolationKind::ZetaMissing, None, "inertial scheme needs a zeta sequence".into());
            None
        }
        (true, z) => z,
        (false, _) => None,
    };
    if params.theta.depends_on_theta() {
        push(
            ViolationKind::ThetaRange,
            None,
            format!("theta cannot be defined through itself ({})", params.theta),
        );
        return out;
    }

    let mut thetas = Vec::with_capacity(horizon);
    let mut ratios = Vec::with_capacity(horizon);
    for k in 1..=horizon {
        let theta = params.theta.eval(k, f64::NAN);
        let eta = params.eta.eval(k, theta);
        thetas.push(theta);
        if !(theta > 0.0 && theta < 1.0) {
            push(ViolationKind::ThetaRange, Some(k), format!("theta={theta} not in (0, 1)"));
        }
        let upper = match set {
            ConditionSet::C4 => (1.0 - lambda) * (1.0 - theta),
            ConditionSet::C5 => (1.0 - lambda) * theta / (lambda + theta),
            ConditionSet::Anchored => 1.0 - lambda,
        };
        if !(eta > 0.0 && eta < upper) {
            push(
                ViolationKind::EtaInterval,
                Some(k),
                format!("eta={eta} not in (0, {upper})"),
            );
        }
        if let Some(z) = zeta {
            let zk = z.eval(k, theta);
            if !(zk > 0.0) {
                push(ViolationKind::ZetaPositive, Some(k), format!("zeta={zk} not positive"));
            }
            let gap = match set {
                ConditionSet::C5 => 1.0 - theta,
                _ => theta,
            };
            ratios.push(zk / gap);
        }
    }

    if horizon >= 2 {
        let start = horizon - horizon / 2;
        let trend = |values: &[f64]| -> Option<usize> {
            (start..horizon)
                .find(|&i| !(values[i] < values[i - 1]))
                .map(|i| i + 1)
        };
        let gaps: Vec<f64> = match set {
            ConditionSet::C5 => thetas.iter().map(|t| 1.0 - t).collect(),
            _ => thetas.clone(),
        };
        if let Some(k) = trend(&gaps) {
            let what = if set == ConditionSet::C5 { "1 - theta" } else { "theta" };
            push(
                ViolationKind::ThetaLimit,
                Some(k),
                format!("{what} not decreasing toward 0 ({} -> {})", gaps[k - 2], gaps[k - 1]),
            );
        }
        if !ratios.is_empty() {
            if let Some(k) = trend(&ratios) {
                let what = if set == ConditionSet::C5 { "zeta/(1 - theta)" } else { "zeta/theta" };
                push(
                    ViolationKind::ZetaRatioLimit,
                    Some(k),
                    format!("{what} not decreasing toward 0 ({} -> {})", ratios[k - 2], ratios[k - 1]),
                );
            }
        }
    }
    out
}

impl Scheme {
    pub fn condition_set(&self) -> ConditionSet {
        match self {
            Scheme::Imsegm | Scheme::Imtegm | Scheme::Msegm => ConditionSet::C4,
            Scheme::Immsegm | Scheme::Immtegm | Scheme::Mmsegm => ConditionSet::C5,
            Scheme::Hsegm | Scheme::Stegm | Scheme::Vsegm | Scheme::Vtegm => ConditionSet::Anchored,
        }
    }
}
