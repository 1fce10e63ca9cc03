//! Closed-form parameter sequences `θ_k`, `η_k`, `ζ_k`.
//!
//! Sequences are evaluated with `k ≥ 1`, the index of the iteration that
//! turns `x^k` into `x^{k+1}`. Forms that depend on `θ_k` receive it as an
//! argument.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sequence {
    /// `1 / (k + 1)`
    OneOverKp1,
    /// `k / (k + 1)`
    KOverKp1,
    /// `k / (2k + 1)`
    KOver2kp1,
    /// `0.5 (1 − θ_k)`
    HalfOneMinusTheta,
    /// `θ_k / 3`
    ThetaOver3,
    /// `1 / (k + 1)²`
    OneOverKp1Sq,
    Constant(f64),
}

impl Sequence {
    pub fn eval(&self, k: usize, theta: f64) -> f64 {
        let k = k as f64;
        match *self {
            Sequence::OneOverKp1 => 1.0 / (k + 1.0),
            Sequence::KOverKp1 => k / (k + 1.0),
            Sequence::KOver2kp1 => k / (2.0 * k + 1.0),
            Sequence::HalfOneMinusTheta => 0.5 * (1.0 - theta),
            Sequence::ThetaOver3 => theta / 3.0,
            Sequence::OneOverKp1Sq => 1.0 / ((k + 1.0) * (k + 1.0)),
            Sequence::Constant(c) => c,
        }
    }

    /// Whether the value uses `θ_k` (invalid for `θ` itself).
    pub fn depends_on_theta(&self) -> bool {
        matches!(self, Sequence::HalfOneMinusTheta | Sequence::ThetaOver3)
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequence::OneOverKp1 => f.write_str("one_over_kp1"),
            Sequence::KOverKp1 => f.write_str("k_over_kp1"),
            Sequence::KOver2kp1 => f.write_str("k_over_2kp1"),
            Sequence::HalfOneMinusTheta => f.write_str("half_one_minus_theta"),
            Sequence::ThetaOver3 => f.write_str("theta_over_3"),
            Sequence::OneOverKp1Sq => f.write_str("one_over_kp1_sq"),
            Sequence::Constant(c) => write!(f, "constant({c})"),
        }
    }
}

impl FromStr for Sequence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s {
            "one_over_kp1" => Sequence::OneOverKp1,
            "k_over_kp1" => Sequence::KOverKp1,
            "k_over_2kp1" => Sequence::KOver2kp1,
            "half_one_minus_theta" => Sequence::HalfOneMinusTheta,
            "theta_over_3" => Sequence::ThetaOver3,
            "one_over_kp1_sq" => Sequence::OneOverKp1Sq,
            _ => {
                let inner = s
                    .strip_prefix("constant(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| format!("unknown sequence form `{s}`"))?;
                let c: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad constant in `{s}`"))?;
                if !c.is_finite() {
                    return Err(format!("non-finite constant in `{s}`"));
                }
                Sequence::Constant(c)
            }
        })
    }
}
