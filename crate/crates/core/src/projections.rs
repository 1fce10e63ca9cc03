//! Metric projections onto boxes, balls and halfspaces.

use rand::Rng;
use thiserror::Error;

use crate::space::{Space, SpaceElement, SpaceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("box bounds invalid at coordinate {index}: lower {lower} > upper {upper}")]
    InvertedBounds { index: usize, lower: f64, upper: f64 },
    #[error("box has {bounds} bounds but the point has {dim} coordinates")]
    BoxDimension { bounds: usize, dim: usize },
    #[error("ball radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("operation needs a halfspace")]
    NotHalfSpace,
}

/// A closed convex set with a closed-form projection.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// `{x : lower_i <= x_i <= upper_i}`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{x : ‖x − center‖ <= radius}`.
    Ball { center: SpaceElement, radius: f64 },
    /// `{x : ⟨normal, x − anchor⟩ <= 0}`; a zero normal denotes the whole space.
    HalfSpace {
        normal: SpaceElement,
        anchor: SpaceElement,
    },
}

impl FeasibleSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ProjectionError> {
        if lower.len() != upper.len() {
            return Err(ProjectionError::BoxDimension {
                bounds: lower.len(),
                dim: upper.len(),
            });
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(ProjectionError::InvertedBounds {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// `[lo, hi]^n`.
    pub fn uniform_box(n: usize, lo: f64, hi: f64) -> Result<Self, ProjectionError> {
        Self::boxed(vec![lo; n], vec![hi; n])
    }

    pub fn ball(center: SpaceElement, radius: f64) -> Result<Self, ProjectionError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(ProjectionError::BadRadius(radius));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn unit_ball(space: Space) -> Self {
        FeasibleSet::Ball {
            center: SpaceElement::zeros(space),
            radius: 1.0,
        }
    }

    pub fn halfspace(normal: SpaceElement, anchor: SpaceElement) -> Result<Self, ProjectionError> {
        if normal.space() != anchor.space() {
            return Err(SpaceError::Mismatch {
                left: normal.space(),
                right: anchor.space(),
            }
            .into());
        }
        Ok(FeasibleSet::HalfSpace { normal, anchor })
    }

    /// Metric projection `P_C x`.
    pub fn project(&self, x: &SpaceElement) -> Result<SpaceElement, ProjectionError> {
        match self {
            FeasibleSet::Box { lower, upper } => {
                self.check_box_dim(x)?;
                let coords = x
                    .coords()
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
                    .collect();
                Ok(SpaceElement::new(x.space(), coords)?)
            }
            FeasibleSet::Ball { center, radius } => {
                let offset = x.sub(center)?;
                let dist = offset.norm();
                if dist <= *radius {
                    Ok(x.clone())
                } else {
                    Ok(SpaceElement::axpy(radius / dist, &offset, center)?)
                }
            }
            FeasibleSet::HalfSpace { normal, anchor } => {
                let nn = normal.norm_sq();
                if nn == 0.0 {
                    return Ok(x.clone());
                }
                let excess = normal.inner(&x.sub(anchor)?)?;
                if excess <= 0.0 {
                    Ok(x.clone())
                } else {
                    Ok(SpaceElement::axpy(-excess / nn, normal, x)?)
                }
            }
        }
    }

    /// Membership up to an absolute tolerance on the defining inequality.
    pub fn contains(&self, x: &SpaceElement, tol: f64) -> Result<bool, ProjectionError> {
        match self {
            FeasibleSet::Box { lower, upper } => {
                self.check_box_dim(x)?;
                Ok(x
                    .coords()
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol))
            }
            FeasibleSet::Ball { center, radius } => Ok(x.dist(center)? <= radius + tol),
            FeasibleSet::HalfSpace { .. } => Ok(halfspace_residual(self, x)? <= tol),
        }
    }

    /// Dimension of the ambient data, when the set carries it.
    pub fn space(&self) -> Option<Space> {
        match self {
            FeasibleSet::Box { .. } => None,
            FeasibleSet::Ball { center, .. } => Some(center.space()),
            FeasibleSet::HalfSpace { normal, .. } => Some(normal.space()),
        }
    }

    /// Draws a point of the set (uniform on boxes, uniform-radius in balls,
    /// a perturbed anchor pushed inside for halfspaces).
    pub fn sample_member<R: Rng + ?Sized>(&self, space: Space, rng: &mut R) -> SpaceElement {
        match self {
            FeasibleSet::Box { lower, upper } => {
                let coords = lower
                    .iter()
                    .zip(upper)
                    .map(|(&lo, &hi)| if lo < hi { rng.random_range(lo..=hi) } else { lo })
                    .collect();
                SpaceElement::new(space, coords).expect("box bounds are finite")
            }
            FeasibleSet::Ball { center, radius } => {
                let dir = SpaceElement::random_uniform(space, -1.0, 1.0, rng);
                let n = dir.norm();
                if n == 0.0 {
                    return center.clone();
                }
                let r = radius * rng.random_range(0.0..1.0);
                SpaceElement::axpy(r / n, &dir, center).expect("finite")
            }
            FeasibleSet::HalfSpace { normal, anchor } => {
                let dir = SpaceElement::random_uniform(space, -1.0, 1.0, rng);
                let p = dir.add(anchor).expect("same space");
                let p = self.project(&p).expect("same space");
                let nn = normal.norm();
                if nn == 0.0 {
                    return p;
                }
                SpaceElement::axpy(-rng.random_range(0.0..1.0) / nn, normal, &p).expect("finite")
            }
        }
    }

    fn check_box_dim(&self, x: &SpaceElement) -> Result<(), ProjectionError> {
        if let FeasibleSet::Box { lower, .. } = self {
            if lower.len() != x.dim() {
                return Err(ProjectionError::BoxDimension {
                    bounds: lower.len(),
                    dim: x.dim(),
                });
            }
        }
        Ok(())
    }
}

/// `⟨normal, x − anchor⟩` for a halfspace; nonpositive iff `x` is a member.
pub fn halfspace_residual(set: &FeasibleSet, x: &SpaceElement) -> Result<f64, ProjectionError> {
    match set {
        FeasibleSet::HalfSpace { normal, anchor } => Ok(normal.inner(&x.sub(anchor)?)?),
        _ => Err(ProjectionError::NotHalfSpace),
    }
}

/// Slow numerical projection used only to cross-check [`FeasibleSet::project`].
///
/// Works from the optimality conditions instead of the closed forms: the box
/// is minimized coordinate by coordinate with golden-section search, and the
/// ball and halfspace are solved through their single Lagrange multiplier by
/// bisection. Each restart starts the multiplier bracket (or the golden-section
/// window) from a random point; the candidate closest to `x` wins.
pub fn project_oracle<R: Rng + ?Sized>(
    set: &FeasibleSet,
    x: &SpaceElement,
    n_restarts: usize,
    rng: &mut R,
) -> Result<SpaceElement, ProjectionError> {
    let mut best: Option<(f64, SpaceElement)> = None;
    for _ in 0..n_restarts.max(1) {
        let candidate = match set {
            FeasibleSet::Box { lower, upper } => {
                set.check_box_dim(x)?;
                let coords = x
                    .coords()
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&v, (&lo, &hi))| golden_section_1d(v, lo, hi, rng))
                    .collect();
                SpaceElement::new(x.space(), coords)?
            }
            FeasibleSet::Ball { center, radius } => {
                // y(mu) = (x + mu c) / (1 + mu); feasibility ‖y(mu) − c‖ = r.
                let offset = x.sub(center)?;
                let dist = offset.norm();
                let excess = |mu: f64| dist / (1.0 + mu) - radius;
                let mu = if excess(0.0) <= 0.0 {
                    0.0
                } else {
                    bisect_decreasing(excess, rng.random_range(0.5..2.0))
                };
                SpaceElement::lincomb(1.0 / (1.0 + mu), x, mu / (1.0 + mu), center)?
            }
            FeasibleSet::HalfSpace { normal, anchor } => {
                // y(mu) = x − mu n; feasibility ⟨n, y(mu) − a⟩ = 0.
                let nn = normal.norm_sq();
                let base = normal.inner(&x.sub(anchor)?)?;
                let excess = |mu: f64| base - mu * nn;
                let mu = if nn == 0.0 || excess(0.0) <= 0.0 {
                    0.0
                } else {
                    bisect_decreasing(excess, rng.random_range(0.5..2.0))
                };
                SpaceElement::axpy(-mu, normal, x)?
            }
        };
        let d = candidate.dist(x)?;
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, candidate));
        }
    }
    Ok(best.expect("at least one restart").1)
}

/// Minimizes `(y − v)^2` over `[lo, hi]` by golden-section search.
fn golden_section_1d<R: Rng + ?Sized>(v: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    if lo == hi {
        return lo;
    }
    let f = |y: f64| (y - v) * (y - v);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    // Random shrink of the initial window toward a random interior point keeps
    // restarts distinct; the window always still contains the minimizer.
    let pivot = rng.random_range(lo..=hi);
    let (mut a, mut b) = if v <= pivot { (lo, pivot) } else { (pivot, hi) };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    // Endpoints are candidates too: the minimizer sits on the boundary when v
    // lies outside the window.
    [a, b, 0.5 * (a + b), lo, hi]
        .into_iter()
        .filter(|y| (lo..=hi).contains(y))
        .min_by(|p, q| f(*p).total_cmp(&f(*q)))
        .unwrap_or(lo)
}

/// Root of a decreasing function with `g(0) > 0`, by bracket expansion then bisection.
fn bisect_decreasing(g: impl Fn(f64) -> f64, start: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = start;
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return lo;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
