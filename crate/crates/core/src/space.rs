//! Inner-product spaces used by the solvers.
//!
//! Two spaces are supported: plain `R^n` with the dot product, and
//! `L^2([0,1])` sampled on a uniform grid `t_i = i / (n - 1)`, where the
//! inner product is the composite trapezoid rule applied to the pointwise
//! product. Every algorithm in this crate is written against
//! [`SpaceElement`], so the same code runs in both settings.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("space mismatch: {left} vs {right}")]
    Mismatch { left: Space, right: Space },
    #[error("{space} expects {expected} coordinates, got {got}")]
    Length {
        space: Space,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value {value} at coordinate {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("a grid on [0,1] needs at least 2 nodes, got {0}")]
    GridTooSmall(usize),
}

/// Which Hilbert space an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    /// `R^n` with the Euclidean inner product.
    Euclidean(usize),
    /// `L^2([0,1])` sampled at `n_grid` uniformly spaced nodes.
    GridL2(usize),
}

impl Space {
    /// Default grid resolution for discretized `L^2([0,1])`.
    pub const DEFAULT_GRID: usize = 101;

    pub fn euclidean(n: usize) -> Self {
        Space::Euclidean(n)
    }

    pub fn grid_l2(n_grid: usize) -> Result<Self, SpaceError> {
        if n_grid < 2 {
            return Err(SpaceError::GridTooSmall(n_grid));
        }
        Ok(Space::GridL2(n_grid))
    }

    /// Number of stored coordinates.
    pub fn dim(&self) -> usize {
        match *self {
            Space::Euclidean(n) | Space::GridL2(n) => n,
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, Space::GridL2(_))
    }

    /// Grid spacing `h = 1 / (n - 1)`; `None` for Euclidean spaces.
    pub fn spacing(&self) -> Option<f64> {
        match *self {
            Space::GridL2(n) => Some(1.0 / (n - 1) as f64),
            Space::Euclidean(_) => None,
        }
    }

    /// Node `t_i` of the uniform grid.
    pub fn node(&self, i: usize) -> Option<f64> {
        match *self {
            Space::GridL2(n) if i < n => {
                if i == n - 1 {
                    Some(1.0)
                } else {
                    Some(i as f64 / (n - 1) as f64)
                }
            }
            _ => None,
        }
    }

    /// Quadrature weight of coordinate `i` (1 for Euclidean spaces).
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        match *self {
            Space::Euclidean(_) => 1.0,
            Space::GridL2(n) => {
                let h = 1.0 / (n - 1) as f64;
                if i == 0 || i == n - 1 {
                    0.5 * h
                } else {
                    h
                }
            }
        }
    }

    fn check(&self, other: Space) -> Result<(), SpaceError> {
        if *self == other {
            Ok(())
        } else {
            Err(SpaceError::Mismatch {
                left: *self,
                right: other,
            })
        }
    }
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Space::Euclidean(n) => write!(f, "R^{n}"),
            Space::GridL2(n) => write!(f, "L2[0,1](grid={n})"),
        }
    }
}

/// A point of the working Hilbert space.
///
/// Entries are always finite: constructors and arithmetic reject NaN and
/// infinities instead of letting them propagate through an iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceElement {
    space: Space,
    coords: Vec<f64>,
}

fn check_finite(coords: &[f64]) -> Result<(), SpaceError> {
    match coords.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(SpaceError::NonFinite {
            index,
            value: coords[index],
        }),
        None => Ok(()),
    }
}

impl SpaceElement {
    pub fn new(space: Space, coords: Vec<f64>) -> Result<Self, SpaceError> {
        if coords.len() != space.dim() {
            return Err(SpaceError::Length {
                space,
                expected: space.dim(),
                got: coords.len(),
            });
        }
        check_finite(&coords)?;
        Ok(Self { space, coords })
    }

    pub fn zeros(space: Space) -> Self {
        Self {
            space,
            coords: vec![0.0; space.dim()],
        }
    }

    /// Samples a function of `t` on the grid; for Euclidean spaces the
    /// closure receives the coordinate index as `f64`.
    pub fn from_fn(space: Space, f: impl Fn(f64) -> f64) -> Result<Self, SpaceError> {
        let coords = (0..space.dim())
            .map(|i| f(space.node(i).unwrap_or(i as f64)))
            .collect();
        Self::new(space, coords)
    }

    /// Coordinates drawn uniformly from `[lo, hi)`.
    pub fn random_uniform<R: Rng + ?Sized>(space: Space, lo: f64, hi: f64, rng: &mut R) -> Self {
        let coords = (0..space.dim()).map(|_| rng.random_range(lo..hi)).collect();
        Self { space, coords }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&v| v == 0.0)
    }

    pub fn inner(&self, other: &SpaceElement) -> Result<f64, SpaceError> {
        self.space.check(other.space)?;
        Ok(self.inner_unchecked(other))
    }

    fn inner_unchecked(&self, other: &SpaceElement) -> f64 {
        match self.space {
            Space::Euclidean(_) => self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a * b)
                .sum(),
            Space::GridL2(n) => {
                let h = 1.0 / (n - 1) as f64;
                let a = &self.coords;
                let b = &other.coords;
                let interior: f64 = (1..n - 1).map(|i| a[i] * b[i]).sum();
                h * (interior + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
            }
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner_unchecked(self).max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `‖self − other‖`.
    pub fn dist(&self, other: &SpaceElement) -> Result<f64, SpaceError> {
        Ok(self.sub(other)?.norm())
    }

    /// `alpha · a + b`.
    pub fn axpy(alpha: f64, a: &SpaceElement, b: &SpaceElement) -> Result<SpaceElement, SpaceError> {
        Self::lincomb(alpha, a, 1.0, b)
    }

    /// `alpha · a + beta · b`.
    pub fn lincomb(
        alpha: f64,
        a: &SpaceElement,
        beta: f64,
        b: &SpaceElement,
    ) -> Result<SpaceElement, SpaceError> {
        a.space.check(b.space)?;
        let coords: Vec<f64> = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        check_finite(&coords)?;
        Ok(SpaceElement {
            space: a.space,
            coords,
        })
    }

    pub fn add(&self, other: &SpaceElement) -> Result<SpaceElement, SpaceError> {
        Self::lincomb(1.0, self, 1.0, other)
    }

    pub fn sub(&self, other: &SpaceElement) -> Result<SpaceElement, SpaceError> {
        Self::lincomb(1.0, self, -1.0, other)
    }

    pub fn scale(&self, alpha: f64) -> Result<SpaceElement, SpaceError> {
        self.map(|v| alpha * v)
    }

    /// Applies `f` to every coordinate.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<SpaceElement, SpaceError> {
        let coords: Vec<f64> = self.coords.iter().map(|&v| f(v)).collect();
        check_finite(&coords)?;
        Ok(SpaceElement {
            space: self.space,
            coords,
        })
    }

    /// Trapezoid integral over `[0,1]` (plain sum for Euclidean spaces).
    pub fn integral(&self) -> f64 {
        self.coords
            .iter()
            .enumerate()
            .map(|(i, v)| self.space.weight(i) * v)
            .sum()
    }

    pub fn bits_eq(&self, other: &SpaceElement) -> bool {
        self.space == other.space
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
