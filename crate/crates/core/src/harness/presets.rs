//! Built-in parameter settings and scalar overrides.

use crate::algorithms::{ConditionSet, Parameters, Scheme, Sequence, ViolationKind};
use crate::stepsize::{AdaptiveParams, ArmijoParams, StepPolicy};

pub const TABLE1: &str = "table1";

/// Preset names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 1] = [TABLE1];

const FIXED_STEP_FRACTION: f64 = 0.99;

/// The published settings for each scheme. Fixed-step schemes use
/// `γ = 0.99 / L` and therefore need `lipschitz`.
pub fn table1(scheme: Scheme, lipschitz: Option<f64>) -> Result<Parameters, String> {
    let adaptive = StepPolicy::Adaptive(AdaptiveParams { gamma1: 0.5, phi: 0.5 });
    let fixed = || match lipschitz {
        Some(l) if l > 0.0 && l.is_finite() => Ok(StepPolicy::Fixed {
            gamma: FIXED_STEP_FRACTION / l,
        }),
        _ => Err(format!("{scheme} needs the Lipschitz constant of A for its fixed step")),
    };
    let (theta, eta, step) = match scheme {
        Scheme::Imsegm | Scheme::Imtegm => (Sequence::OneOverKp1, Sequence::HalfOneMinusTheta, adaptive),
        Scheme::Immsegm | Scheme::Immtegm => (Sequence::KOverKp1, Sequence::ThetaOver3, adaptive),
        Scheme::Hsegm => (Sequence::OneOverKp1, Sequence::KOver2kp1, fixed()?),
        Scheme::Msegm => (Sequence::OneOverKp1, Sequence::HalfOneMinusTheta, fixed()?),
        Scheme::Mmsegm => (Sequence::KOverKp1, Sequence::ThetaOver3, fixed()?),
        Scheme::Vsegm | Scheme::Vtegm => (Sequence::OneOverKp1, Sequence::KOver2kp1, adaptive),
        Scheme::Stegm => (
            Sequence::OneOverKp1,
            Sequence::KOver2kp1,
            StepPolicy::Armijo(ArmijoParams { rho: 1.0, l: 0.5, phi: 0.4 }),
        ),
    };
    Ok(Parameters {
        scheme,
        step,
        delta: 0.6,
        theta,
        eta,
        zeta: scheme.is_inertial().then_some(Sequence::OneOverKp1Sq),
        lambda_t: 0.0,
        hsd_lambda: 0.5,
    })
}

pub fn preset(name: &str, scheme: Scheme, lipschitz: Option<f64>) -> Result<Parameters, String> {
    match name {
        TABLE1 => table1(scheme, lipschitz),
        other => Err(format!("unknown preset `{other}` (known: {})", PRESET_NAMES.join(", "))),
    }
}

/// Per-run replacements for preset values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma1: Option<f64>,
    pub phi: Option<f64>,
    pub rho: Option<f64>,
    pub l: Option<f64>,
    pub hsd_lambda: Option<f64>,
    pub lambda_t: Option<f64>,
    pub theta: Option<Sequence>,
    pub eta: Option<Sequence>,
    pub zeta: Option<Sequence>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Overrides::default()
    }

    /// Applies every override that fits the scheme's step policy; step
    /// overrides of another policy are ignored so one set can serve `all`.
    pub fn apply(&self, params: &mut Parameters) {
        if let Some(v) = self.delta {
            params.delta = v;
        }
        if let Some(v) = self.hsd_lambda {
            params.hsd_lambda = v;
        }
        if let Some(v) = self.lambda_t {
            params.lambda_t = v;
        }
        if let Some(v) = self.theta {
            params.theta = v;
        }
        if let Some(v) = self.eta {
            params.eta = v;
        }
        if let Some(v) = self.zeta {
            params.zeta = Some(v);
        }
        match &mut params.step {
            StepPolicy::Fixed { gamma } => {
                if let Some(v) = self.gamma {
                    *gamma = v;
                }
            }
            StepPolicy::Adaptive(p) => {
                if let Some(v) = self.gamma1 {
                    p.gamma1 = v;
                }
                if let Some(v) = self.phi {
                    p.phi = v;
                }
            }
            StepPolicy::Armijo(p) => {
                if let Some(v) = self.rho {
                    p.rho = v;
                }
                if let Some(v) = self.l {
                    p.l = v;
                }
                if let Some(v) = self.phi {
                    p.phi = v;
                }
            }
        }
    }
}

/// A deliberately broken setting and the violation it must trigger.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptPreset {
    pub name: &'static str,
    pub params: Parameters,
    pub expected_set: ConditionSet,
    pub expected_kind: ViolationKind,
}

pub fn corrupt_presets() -> Vec<CorruptPreset> {
    let base = |scheme| table1(scheme, None).expect("adaptive presets need no Lipschitz constant");
    let mut eta_two = base(Scheme::Imsegm);
    eta_two.eta = Sequence::Constant(2.0);
    let mut zeta_one = base(Scheme::Imsegm);
    zeta_one.zeta = Some(Sequence::Constant(1.0));
    let mut theta_vanishing = base(Scheme::Immsegm);
    theta_vanishing.theta = Sequence::OneOverKp1;
    vec![
        CorruptPreset {
            name: "imsegm-eta-constant-2",
            params: eta_two,
            expected_set: ConditionSet::C4,
            expected_kind: ViolationKind::EtaInterval,
        },
        CorruptPreset {
            name: "imsegm-zeta-constant-1",
            params: zeta_one,
            expected_set: ConditionSet::C4,
            expected_kind: ViolationKind::ZetaRatioLimit,
        },
        CorruptPreset {
            name: "immsegm-theta-one-over-kp1",
            params: theta_vanishing,
            expected_set: ConditionSet::C5,
            expected_kind: ViolationKind::ThetaLimit,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::validate_conditions;

    #[test]
    fn table1_presets_pass_the_validator() {
        for scheme in Scheme::ALL {
            let p = table1(scheme, Some(10.0)).unwrap();
            assert!(validate_conditions(&p, 400).is_empty(), "{scheme}");
            assert_eq!(p.step.validate(Some(10.0)), Ok(()));
        }
    }

    #[test]
    fn fixed_step_schemes_need_lipschitz() {
        assert!(table1(Scheme::Hsegm, None).is_err());
        assert!(table1(Scheme::Imsegm, None).is_ok());
        assert_eq!(
            table1(Scheme::Msegm, Some(4.0)).unwrap().step,
            StepPolicy::Fixed { gamma: 0.99 / 4.0 }
        );
    }

    #[test]
    fn corrupt_presets_trigger_named_violations() {
        for c in corrupt_presets() {
            let v = validate_conditions(&c.params, 400);
            assert!(
                v.iter().any(|v| v.set == c.expected_set && v.kind == c.expected_kind),
                "{}: {v:?}",
                c.name
            );
        }
    }

    #[test]
    fn overrides_replace_matching_fields() {
        let mut p = table1(Scheme::Stegm, None).unwrap();
        Overrides {
            phi: Some(0.3),
            gamma1: Some(9.0),
            hsd_lambda: Some(0.25),
            ..Default::default()
        }
        .apply(&mut p);
        assert_eq!(p.step, StepPolicy::Armijo(ArmijoParams { rho: 1.0, l: 0.5, phi: 0.3 }));
        assert_eq!(p.hsd_lambda, 0.25);
        assert!(preset("table2", Scheme::Stegm, None).is_err());
    }
}
