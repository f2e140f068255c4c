//! Learning-rate schedules and parameter validation.
//!
//! The convex schedule is `alpha_t = t^c, gamma_t = t^{c+eps}, eta_t = t^c`;
//! the strongly convex one replaces `alpha_t` by `sigma * t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FeasibleBall;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Convex,
    StronglyConvex,
}

/// All tuning constants for a run plus the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub xi: f64,
    pub mode: Mode,
    /// Strong-convexity modulus; required iff `mode == StronglyConvex`.
    pub sigma: Option<f64>,
    pub horizon: usize,
}

impl ScheduleParams {
    /// Defaults tied to the horizon: `delta = 1/T` and `xi = delta / R`.
    pub fn with_defaults(mode: Mode, sigma: Option<f64>, horizon: usize, radius: f64) -> Self {
        let delta = 1.0 / horizon.max(1) as f64;
        Self {
            c: 0.5,
            epsilon: 0.05,
            delta,
            xi: delta / radius,
            mode,
            sigma,
            horizon,
        }
    }
}

/// Per-round rates `(alpha_t, gamma_t, eta_t)`.
pub fn schedule(t: usize, p: &ScheduleParams) -> Result<(f64, f64, f64)> {
    if t == 0 {
        return Err(Error::InvalidRound(t));
    }
    let tf = t as f64;
    let gamma = tf.powf(p.c + p.epsilon);
    let eta = tf.powf(p.c);
    let alpha = match p.mode {
        Mode::Convex => eta,
        Mode::StronglyConvex => {
            let sigma = p.sigma.filter(|s| *s > 0.0).ok_or(Error::MissingSigma)?;
            sigma * tf
        }
    };
    Ok((alpha, gamma, eta))
}

/// Checks the theorem preconditions and the perturbation feasibility
/// condition `delta <= xi * R` (so that `x +- delta u` stays in the ball for
/// `x` in the shrunken domain). Reports the first violated condition.
pub fn validate(p: &ScheduleParams, ball: &FeasibleBall) -> Result<()> {
    // 1 ulp of slack so xi = delta / R passes with equality after round-trip.
    if p.delta > p.xi * ball.radius() * (1.0 + 1e-12) {
        return Err(Error::PerturbationTooLarge);
    }
    if !(p.c >= 0.5 && p.c < 1.0) {
        return Err(Error::COutOfRange);
    }
    if !(p.epsilon > 0.0) {
        return Err(Error::NonPositiveEpsilon);
    }
    if !(p.xi > 0.0 && p.xi < 1.0) {
        return Err(Error::XiOutOfRange);
    }
    if !(p.delta > 0.0) {
        return Err(Error::NonPositiveDelta);
    }
    if p.mode == Mode::StronglyConvex && !p.sigma.map_or(false, |s| s > 0.0) {
        return Err(Error::MissingSigma);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mode: Mode, sigma: Option<f64>, c: f64, epsilon: f64) -> ScheduleParams {
        ScheduleParams {
            c,
            epsilon,
            delta: 0.001,
            xi: 0.01,
            mode,
            sigma,
            horizon: 100,
        }
    }

    #[test]
    fn round_one_rates_are_unity() {
        let p = params(Mode::Convex, None, 0.5, 0.25);
        assert_eq!(schedule(1, &p).unwrap(), (1.0, 1.0, 1.0));
    }

    #[test]
    fn convex_rates_at_t4() {
        let p = params(Mode::Convex, None, 0.5, 0.25);
        let (a, g, e) = schedule(4, &p).unwrap();
        assert!((a - 2.0).abs() < 1e-12);
        assert!((g - 4.0f64.powf(0.75)).abs() < 1e-12);
        assert!((g - 2.8284271247461903).abs() < 1e-12);
        assert!((e - 2.0).abs() < 1e-12);
    }

    #[test]
    fn strongly_convex_rates_at_t3() {
        let p = params(Mode::StronglyConvex, Some(2.0), 0.5, 0.25);
        let (a, g, e) = schedule(3, &p).unwrap();
        assert!((a - 6.0).abs() < 1e-12);
        assert!((g - 2.2795070569547775).abs() < 1e-12);
        assert!((e - 1.7320508075688772).abs() < 1e-12);
    }

    #[test]
    fn rejects_round_zero_and_missing_sigma() {
        let p = params(Mode::Convex, None, 0.5, 0.25);
        assert!(schedule(0, &p).is_err());
        let p = params(Mode::StronglyConvex, None, 0.5, 0.25);
        assert!(matches!(schedule(3, &p), Err(Error::MissingSigma)));
    }

    #[test]
    fn validate_accepts_feasible_perturbation() {
        let ball = FeasibleBall::centered(2, 1.0).unwrap();
        let p = params(Mode::Convex, None, 0.5, 0.25);
        validate(&p, &ball).unwrap();
    }

    #[test]
    fn validate_rejects_large_perturbation() {
        let ball = FeasibleBall::centered(2, 1.0).unwrap();
        let mut p = params(Mode::Convex, None, 0.5, 0.25);
        p.delta = 0.1;
        assert!(matches!(
            validate(&p, &ball),
            Err(Error::PerturbationTooLarge)
        ));
    }

    #[test]
    fn validate_rejects_c_out_of_range() {
        let ball = FeasibleBall::centered(2, 1.0).unwrap();
        let p = params(Mode::Convex, None, 0.3, 0.25);
        let err = validate(&p, &ball).unwrap_err();
        assert_eq!(err.to_string(), "c outside [1/2, 1)");
    }

    #[test]
    fn defaults_pass_validation_with_equality() {
        let ball = FeasibleBall::centered(3, 2.5).unwrap();
        let p = ScheduleParams::with_defaults(Mode::Convex, None, 1000, ball.radius());
        validate(&p, &ball).unwrap();
    }
}
