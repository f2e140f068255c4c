//! Two-point zeroth-order gradient estimation and smoothing oracles.
//!
//! The estimator queries `x + delta u` and `x - delta u` for a uniform unit
//! vector `u` and returns `(d / 2 delta) [f(x + delta u) - f(x - delta u)] u`,
//! an unbiased estimate of the gradient of the ball-smoothed loss.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// A single two-point gradient estimate with its audit data.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    pub vector: Vec<f64>,
    pub query_points: (Vec<f64>, Vec<f64>),
    pub loss_values: (f64, f64),
}

/// Uniform sample from the unit sphere, via a normalized standard Gaussian.
pub fn sample_unit_sphere<R: Rng>(rng: &mut R, d: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if d == 1 {
        // Normalizing a 1-d Gaussian must give exactly +-1; dividing by the
        // rounded norm can miss by an ulp.
        let g = rand_distr_standard_normal(rng);
        return Ok(vec![if g < 0.0 { -1.0 } else { 1.0 }]);
    }
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| rand_distr_standard_normal(rng))
            .collect();
        let n = linalg::norm(&v);
        if n > 1e-12 {
            return Ok(linalg::scale(&v, 1.0 / n));
        }
    }
}

// Box-Muller; avoids pulling in rand_distr for one distribution.
fn rand_distr_standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniform sample from the unit ball: sphere direction times `U^{1/d}`.
pub fn sample_unit_ball<R: Rng>(rng: &mut R, d: usize) -> Result<Vec<f64>> {
    let dir = sample_unit_sphere(rng, d)?;
    let r: f64 = rng.gen::<f64>().powf(1.0 / d as f64);
    Ok(linalg::scale(&dir, r))
}

/// Two-point gradient estimate at `x` along direction `u`. Exactly two oracle
/// evaluations; non-finite losses are hard errors.
pub fn two_point_gradient(
    loss_at: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    delta: f64,
    u: &[f64],
) -> Result<GradientEstimate> {
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta);
    }
    if u.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: u.len(),
        });
    }
    let d = x.len();
    let mut plus = x.to_vec();
    linalg::axpy(&mut plus, delta, u);
    let mut minus = x.to_vec();
    linalg::axpy(&mut minus, -delta, u);
    let f_plus = loss_at(&plus);
    let f_minus = loss_at(&minus);
    if !f_plus.is_finite() || !f_minus.is_finite() {
        return Err(Error::NonFiniteInput("two-point loss evaluation"));
    }
    let coeff = (d as f64) / (2.0 * delta) * (f_plus - f_minus);
    Ok(GradientEstimate {
        vector: linalg::scale(u, coeff),
        query_points: (plus, minus),
        loss_values: (f_plus, f_minus),
    })
}

/// Monte Carlo estimate of the ball-smoothed value
/// `E_{v in B^d}[ f(x + delta v) ]`, with its standard error.
pub fn smoothed_value_mc<R: Rng>(
    loss_at: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    delta: f64,
    n: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::ZeroSamples);
    }
    let d = x.len();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let v = sample_unit_ball(rng, d)?;
        let mut p = x.to_vec();
        linalg::axpy(&mut p, delta, &v);
        let f = loss_at(&p);
        if !f.is_finite() {
            return Err(Error::NonFiniteInput("smoothed value evaluation"));
        }
        sum += f;
        sum_sq += f * f;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    let std_error = (var / n as f64).sqrt();
    Ok((mean, std_error))
}
