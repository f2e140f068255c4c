//! Euclidean-ball decision domains and projection.

use crate::error::{Error, Result};
use crate::linalg;

/// A Euclidean ball `{x : ||x - center|| <= radius}` used as the feasible
/// region. The shrunken copy `(1 - xi) * X` keeps the same center.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleBall {
    center: Vec<f64>,
    radius: f64,
}

impl FeasibleBall {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::NonFiniteInput("ball radius must be positive"));
        }
        if center.is_empty() || !linalg::all_finite(&center) {
            return Err(Error::NonFiniteInput("ball center"));
        }
        Ok(Self { center, radius })
    }

    /// Origin-centered ball of the given dimension.
    pub fn centered(dimension: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; dimension], radius)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    /// Diameter `D = 2R`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// The contracted ball with radius `(1 - xi) * R`, same center.
    pub fn shrink(&self, xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::XiOutOfRange);
        }
        Ok(Self {
            center: self.center.clone(),
            radius: (1.0 - xi) * self.radius,
        })
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        linalg::dist(x, &self.center) <= self.radius + slack
    }

    /// Euclidean projection onto the ball: identity inside, radial scaling
    /// outside. Idempotent.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                got: x.len(),
            });
        }
        let offset = linalg::sub(x, &self.center);
        let n = linalg::norm(&offset);
        if n <= self.radius {
            return Ok(x.to_vec());
        }
        let mut out = self.center.clone();
        linalg::axpy(&mut out, self.radius / n, &offset);
        Ok(out)
    }
}
