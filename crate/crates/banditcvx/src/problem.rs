//! Problem abstractions: constraint functions and problem instances.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::FeasibleBall;
use crate::linalg;

pub type LossQuery = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;
pub type LossFull = Arc<dyn Fn(usize, &[f64]) -> (f64, Vec<f64>) + Send + Sync>;
pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type SubgradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// The functional form of a convex constraint `g(x) <= 0`.
#[derive(Clone)]
pub enum ConstraintKind {
    /// `g(x) = a . x - b`.
    Affine { a: Vec<f64>, b: f64 },
    /// `g(x) = max_i (a_i . x - b_i)`.
    MaxOfAffine(Vec<(Vec<f64>, f64)>),
    /// Arbitrary convex callable with a subgradient oracle.
    Opaque { value: ValueFn, subgradient: SubgradFn },
}

/// A convex constraint together with a certified Lipschitz upper bound.
#[derive(Clone)]
pub struct ConstraintFn {
    pub kind: ConstraintKind,
    pub lipschitz: f64,
}

impl fmt::Debug for ConstraintFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ConstraintKind::Affine { .. } => "affine",
            ConstraintKind::MaxOfAffine(_) => "max_of_affine",
            ConstraintKind::Opaque { .. } => "opaque",
        };
        write!(f, "ConstraintFn({kind}, G={})", self.lipschitz)
    }
}

impl ConstraintFn {
    pub fn affine(a: Vec<f64>, b: f64) -> Self {
        let lipschitz = linalg::norm(&a);
        Self {
            kind: ConstraintKind::Affine { a, b },
            lipschitz,
        }
    }

    pub fn max_of_affine(pieces: Vec<(Vec<f64>, f64)>) -> Self {
        let lipschitz = pieces
            .iter()
            .map(|(a, _)| linalg::norm(a))
            .fold(0.0, f64::max);
        Self {
            kind: ConstraintKind::MaxOfAffine(pieces),
            lipschitz,
        }
    }

    pub fn opaque(value: ValueFn, subgradient: SubgradFn, lipschitz: f64) -> Self {
        Self {
            kind: ConstraintKind::Opaque { value, subgradient },
            lipschitz,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ConstraintKind::Affine { a, b } => linalg::dot(a, x) - b,
            ConstraintKind::MaxOfAffine(pieces) => pieces
                .iter()
                .map(|(a, b)| linalg::dot(a, x) - b)
                .fold(f64::NEG_INFINITY, f64::max),
            ConstraintKind::Opaque { value, .. } => value(x),
        }
    }

    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            ConstraintKind::Affine { a, .. } => a.clone(),
            ConstraintKind::MaxOfAffine(pieces) => {
                let (a, _) = pieces
                    .iter()
                    .max_by(|p, q| {
                        (linalg::dot(&p.0, x) - p.1).total_cmp(&(linalg::dot(&q.0, x) - q.1))
                    })
                    .expect("max_of_affine has at least one piece");
                a.clone()
            }
            ConstraintKind::Opaque { subgradient, .. } => subgradient(x),
        }
    }

    /// Affine pieces when the constraint is piecewise affine.
    pub fn pieces(&self) -> Option<&[(Vec<f64>, f64)]> {
        match &self.kind {
            ConstraintKind::Affine { .. } => None,
            ConstraintKind::MaxOfAffine(pieces) => Some(pieces),
            ConstraintKind::Opaque { .. } => None,
        }
    }
}

/// Exact summary of a total loss `sum_t f_t` of the form
/// `1/2 x' diag(q) x + lin . x + constant`, kept by suite generators so the
/// offline comparator can be certified.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagQuadratic {
    pub quad: Vec<f64>,
    pub lin: Vec<f64>,
    pub constant: f64,
}

impl DiagQuadratic {
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for i in 0..x.len() {
            v += 0.5 * self.quad[i] * x[i] * x[i] + self.lin[i] * x[i];
        }
        v
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len()).map(|i| self.quad[i] * x[i] + self.lin[i]).collect()
    }
}

/// A full online problem: domain, horizon, oracles, constraints, and the
/// certified Lipschitz bound F on the losses.
#[derive(Clone)]
pub struct ProblemInstance {
    pub domain: FeasibleBall,
    pub horizon: usize,
    /// Bandit oracle: round index (1-based) and query point to loss value.
    pub loss_query: LossQuery,
    /// Optional full-information oracle `(value, gradient)` for baselines and
    /// offline bookkeeping.
    pub loss_full: Option<LossFull>,
    /// One constraint per round; a single element means `g_t = g` for all t.
    pub constraints: Vec<ConstraintFn>,
    pub lipschitz_f: f64,
    pub fixed_constraints: bool,
    /// Exact total-loss summary when the generator can provide one.
    pub total_loss: Option<DiagQuadratic>,
}

impl ProblemInstance {
    pub fn constraint(&self, t: usize) -> Result<&ConstraintFn> {
        if t == 0 || t > self.horizon {
            return Err(Error::InvalidRound(t));
        }
        if self.fixed_constraints || self.constraints.len() == 1 {
            Ok(&self.constraints[0])
        } else {
            Ok(&self.constraints[t - 1])
        }
    }

    pub fn max_constraint_lipschitz(&self) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.lipschitz)
            .fold(0.0, f64::max)
    }

    pub fn query_loss(&self, t: usize, x: &[f64]) -> Result<f64> {
        let v = (self.loss_query)(t, x);
        if !v.is_finite() {
            return Err(Error::NonFiniteLoss { round: t });
        }
        Ok(v)
    }

    pub fn full_loss(&self, t: usize, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let oracle = self.loss_full.as_ref().ok_or(Error::MissingFullInfo)?;
        Ok(oracle(t, x))
    }
}
