//! Synthetic problem suites, the offline comparator, metrics, and
//! growth-rate estimation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::algorithm::TraceRecord;
use crate::error::{Error, Result};
use crate::geometry::FeasibleBall;
use crate::linalg;
use crate::problem::{ConstraintFn, DiagQuadratic, ProblemInstance};
use crate::solver::{solve, Subproblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `f_t(x) = c_t . x` with drifting cost vectors.
    LinearDrift,
    /// `f_t(x) = 1/2 ||x - m_t||^2`, strongly convex with sigma = 1.
    Quadratic,
    /// `f_t(x) = s_t/2 ||x||^2 + b_t . x` with per-round curvature.
    QuadraticGeneral,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::LinearDrift => "linear_drift",
            Family::Quadratic => "quadratic",
            Family::QuadraticGeneral => "quadratic_general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    FixedAffine,
    TimeVaryingAffine,
    MaxOfAffine,
}

/// Parameters of a synthetic suite. Generation is a pure function of this
/// struct: equal specs produce identical instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub family: Family,
    #[serde(default = "default_constraint_mode")]
    pub constraint_mode: ConstraintMode,
    #[serde(default = "default_dimension")]
    pub d: usize,
    #[serde(rename = "t", default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_drift_scale")]
    pub drift_scale: f64,
}

fn default_constraint_mode() -> ConstraintMode {
    ConstraintMode::FixedAffine
}
fn default_dimension() -> usize {
    2
}
fn default_horizon() -> usize {
    1000
}
fn default_drift_scale() -> f64 {
    0.1
}

impl SuiteSpec {
    pub fn new(family: Family, d: usize, horizon: usize, seed: u64) -> Self {
        Self {
            family,
            constraint_mode: default_constraint_mode(),
            d,
            horizon,
            seed,
            drift_scale: default_drift_scale(),
        }
    }
}

/// A generated instance plus the strong-convexity modulus certified by the
/// generator (None for the linear family).
pub struct GeneratedSuite {
    pub instance: ProblemInstance,
    pub sigma: Option<f64>,
}

const SUITE_RADIUS: f64 = 1.0;
// The losses pull toward 0.7 e1 while the constraints cap x1 near 0.3, so
// the constraint is active at the offline optimum and the violation metrics
// measure something real.
const TARGET_OFFSET: f64 = 0.7;
const CONSTRAINT_LEVEL: f64 = 0.3;

fn uniform_box<R: Rng>(rng: &mut R, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..=1.0) * scale).collect()
}

fn unit_e1(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v
}

/// Builds the synthetic instance for a suite spec. Deterministic in the
/// seed; carries certified Lipschitz bounds and an exact total-loss summary.
pub fn generate(spec: &SuiteSpec) -> Result<GeneratedSuite> {
    if spec.d == 0 {
        return Err(Error::InvalidSuite("dimension must be at least 1".into()));
    }
    if spec.horizon == 0 {
        return Err(Error::InvalidSuite("horizon must be at least 1".into()));
    }
    if !(spec.drift_scale >= 0.0 && spec.drift_scale <= 10.0) {
        return Err(Error::InvalidSuite(
            "drift_scale must lie in [0, 10]".into(),
        ));
    }
    let d = spec.d;
    let t_max = spec.horizon;
    let domain = FeasibleBall::centered(d, SUITE_RADIUS)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);

    // Loss parameters first, constraints second; the draw order is part of
    // the determinism contract.
    let mut base = vec![0.0; d];
    base[0] = TARGET_OFFSET;
    let targets: Vec<Vec<f64>> = (0..t_max)
        .map(|_| {
            let z = uniform_box(&mut rng, d, spec.drift_scale);
            linalg::add(&base, &z)
        })
        .collect();
    let curvatures: Vec<f64> = match spec.family {
        Family::Quadratic => vec![1.0; t_max],
        Family::QuadraticGeneral => (0..t_max).map(|_| rng.gen_range(0.5..=1.5)).collect(),
        Family::LinearDrift => Vec::new(),
    };

    let (loss_query, loss_full, lipschitz_f, sigma, total_loss): (
        crate::problem::LossQuery,
        crate::problem::LossFull,
        f64,
        Option<f64>,
        DiagQuadratic,
    ) = match spec.family {
        Family::LinearDrift => {
            // Costs point away from the feasible cap so the minimizer of the
            // running sum sits past the constraint boundary.
            let costs: Vec<Vec<f64>> = targets.iter().map(|m| linalg::scale(m, -1.0)).collect();
            let f = costs.iter().map(|c| linalg::norm(c)).fold(0.0, f64::max);
            let mut lin = vec![0.0; d];
            for c in &costs {
                linalg::axpy(&mut lin, 1.0, c);
            }
            let total = DiagQuadratic {
                quad: vec![0.0; d],
                lin,
                constant: 0.0,
            };
            let costs = Arc::new(costs);
            let cq = Arc::clone(&costs);
            let query: crate::problem::LossQuery =
                Arc::new(move |t, x| linalg::dot(&cq[t - 1], x));
            let cf = Arc::clone(&costs);
            let full: crate::problem::LossFull =
                Arc::new(move |t, x| (linalg::dot(&cf[t - 1], x), cf[t - 1].clone()));
            (query, full, f, None, total)
        }
        Family::Quadratic => {
            let f = targets
                .iter()
                .map(|m| SUITE_RADIUS + linalg::norm(m))
                .fold(0.0, f64::max);
            let mut lin = vec![0.0; d];
            let mut constant = 0.0;
            for m in &targets {
                linalg::axpy(&mut lin, -1.0, m);
                constant += 0.5 * linalg::dot(m, m);
            }
            let total = DiagQuadratic {
                quad: vec![t_max as f64; d],
                lin,
                constant,
            };
            let ms = Arc::new(targets.clone());
            let mq = Arc::clone(&ms);
            let query: crate::problem::LossQuery = Arc::new(move |t, x| {
                let diff = linalg::sub(x, &mq[t - 1]);
                0.5 * linalg::dot(&diff, &diff)
            });
            let mf = Arc::clone(&ms);
            let full: crate::problem::LossFull = Arc::new(move |t, x| {
                let diff = linalg::sub(x, &mf[t - 1]);
                (0.5 * linalg::dot(&diff, &diff), diff)
            });
            (query, full, f, Some(1.0), total)
        }
        Family::QuadraticGeneral => {
            // f_t(x) = s_t (1/2 ||x||^2 - m_t . x); gradient s_t (x - m_t).
            let f = curvatures
                .iter()
                .zip(&targets)
                .map(|(s, m)| s * (SUITE_RADIUS + linalg::norm(m)))
                .fold(0.0, f64::max);
            let sigma = curvatures.iter().copied().fold(f64::INFINITY, f64::min);
            let quad_total: f64 = curvatures.iter().sum();
            let mut lin = vec![0.0; d];
            for (s, m) in curvatures.iter().zip(&targets) {
                linalg::axpy(&mut lin, -s, m);
            }
            let total = DiagQuadratic {
                quad: vec![quad_total; d],
                lin,
                constant: 0.0,
            };
            let ms = Arc::new(targets.clone());
            let ss = Arc::new(curvatures.clone());
            let (mq, sq) = (Arc::clone(&ms), Arc::clone(&ss));
            let query: crate::problem::LossQuery = Arc::new(move |t, x| {
                sq[t - 1] * (0.5 * linalg::dot(x, x) - linalg::dot(&mq[t - 1], x))
            });
            let (mf, sf) = (Arc::clone(&ms), Arc::clone(&ss));
            let full: crate::problem::LossFull = Arc::new(move |t, x| {
                let s = sf[t - 1];
                let m = &mf[t - 1];
                let grad: Vec<f64> = x.iter().zip(m).map(|(xi, mi)| s * (xi - mi)).collect();
                (s * (0.5 * linalg::dot(x, x) - linalg::dot(m, x)), grad)
            });
            (query, full, f, Some(sigma), total)
        }
    };

    let (constraints, fixed_constraints) = match spec.constraint_mode {
        ConstraintMode::FixedAffine => (
            vec![ConstraintFn::affine(unit_e1(d), CONSTRAINT_LEVEL)],
            true,
        ),
        ConstraintMode::TimeVaryingAffine => {
            let cs = (0..t_max)
                .map(|_| {
                    let mut a = unit_e1(d);
                    let z = uniform_box(&mut rng, d, 0.2);
                    linalg::axpy(&mut a, 1.0, &z);
                    let a = linalg::scale(&a, 1.0 / linalg::norm(&a));
                    let b = CONSTRAINT_LEVEL + 0.05 * rng.gen_range(-1.0..=1.0);
                    ConstraintFn::affine(a, b)
                })
                .collect();
            (cs, false)
        }
        ConstraintMode::MaxOfAffine => {
            let mut pieces = vec![(unit_e1(d), CONSTRAINT_LEVEL)];
            for j in 1..d.min(3) {
                for sign in [1.0, -1.0] {
                    let mut a = unit_e1(d);
                    a[j] = 0.4 * sign;
                    let a = linalg::scale(&a, 1.0 / linalg::norm(&a));
                    pieces.push((a, CONSTRAINT_LEVEL + 0.05));
                }
            }
            (vec![ConstraintFn::max_of_affine(pieces)], true)
        }
    };

    Ok(GeneratedSuite {
        instance: ProblemInstance {
            domain,
            horizon: t_max,
            loss_query,
            loss_full: Some(loss_full),
            constraints,
            lipschitz_f,
            fixed_constraints,
            total_loss: Some(total_loss),
        },
        sigma,
    })
}

/// The introductory alternating-sign constraint-value sequence: -1 at odd
/// rounds, +1 at even rounds.
pub fn make_alternating_example(t_max: usize) -> Result<Vec<f64>> {
    if t_max % 2 != 0 {
        return Err(Error::InvalidSuite(
            "alternating example needs an even horizon".into(),
        ));
    }
    Ok((1..=t_max)
        .map(|t| if t % 2 == 1 { -1.0 } else { 1.0 })
        .collect())
}

/// A runnable instance realizing the alternating example: zero losses and
/// constant constraint functions with the alternating values. Any iterate
/// sequence reproduces the sequence exactly.
pub fn alternating_instance(t_max: usize, d: usize) -> Result<ProblemInstance> {
    let values = make_alternating_example(t_max)?;
    let constraints = values
        .iter()
        .map(|v| ConstraintFn::affine(vec![0.0; d], -v))
        .collect();
    Ok(ProblemInstance {
        domain: FeasibleBall::centered(d, 1.0)?,
        horizon: t_max,
        loss_query: Arc::new(|_, _| 0.0),
        loss_full: Some(Arc::new(move |_, _: &[f64]| (0.0, vec![0.0; d]))),
        constraints,
        lipschitz_f: 0.0,
        fixed_constraints: false,
        total_loss: Some(DiagQuadratic {
            quad: vec![0.0; d],
            lin: vec![0.0; d],
            constant: 0.0,
        }),
    })
}

const PENALTY_ESCALATIONS: usize = 10;
const COMPARATOR_MAX_OUTER: usize = 2000;

fn worst_constraint(instance: &ProblemInstance, x: &[f64]) -> f64 {
    instance
        .constraints
        .iter()
        .map(|g| g.value(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn pooled_constraint(instance: &ProblemInstance) -> ConstraintFn {
    if instance.constraints.len() == 1 {
        return instance.constraints[0].clone();
    }
    let cs = Arc::new(instance.constraints.clone());
    let lipschitz = instance.max_constraint_lipschitz();
    let cv = Arc::clone(&cs);
    let value: crate::problem::ValueFn = Arc::new(move |x| {
        cv.iter()
            .map(|g| g.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let cg = Arc::clone(&cs);
    let subgradient: crate::problem::SubgradFn = Arc::new(move |x| {
        let best = cg
            .iter()
            .max_by(|p, q| p.value(x).total_cmp(&q.value(x)))
            .expect("instance has at least one constraint");
        best.subgradient(x)
    });
    ConstraintFn::opaque(value, subgradient, lipschitz)
}

/// Minimizes `Phi(x) + rho [max_t g_t(x)]_+` over the domain by
/// majorize-minimize: each step solves the penalized proximal model at the
/// current point with curvature `alpha >= max_i quad_i`. Returns the final
/// point once the strong-convexity optimality certificate drops below tol
/// (or after one step when Phi is linear, where the proximal term itself
/// bounds the gap by `alpha D^2 / 2`).
fn penalized_minimize(
    total: &DiagQuadratic,
    domain: &FeasibleBall,
    constraint: &ConstraintFn,
    rho: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let lambda_max = total.quad.iter().copied().fold(0.0, f64::max);
    let sigma = total.quad.iter().copied().fold(f64::INFINITY, f64::min);
    let diameter = domain.diameter();
    if lambda_max > 0.0 && sigma <= 0.0 {
        return Err(Error::Config(
            "offline comparator requires a linear or uniformly curved total loss".into(),
        ));
    }

    let mut x = domain.center().to_vec();
    if lambda_max == 0.0 {
        // Linear total loss: one proximal solve with a tiny curvature is
        // already tol-accurate.
        let alpha = (tol / (diameter * diameter)).max(1e-12);
        let sub = Subproblem {
            gradient_est: total.lin.clone(),
            anchor: x.clone(),
            penalty_weight: rho,
            alpha,
            domain: domain.clone(),
            constraint: constraint.clone(),
        };
        return Ok(solve(&sub, tol.min(1e-10), 200_000)?.solution);
    }

    let alpha = lambda_max * (1.0 + 1e-12);
    let inner_tol = 1e-12_f64;
    for _ in 0..COMPARATOR_MAX_OUTER {
        let sub = Subproblem {
            gradient_est: total.gradient(&x),
            anchor: x.clone(),
            penalty_weight: rho,
            alpha,
            domain: domain.clone(),
            constraint: constraint.clone(),
        };
        let next = solve(&sub, inner_tol, 200_000)?.solution;
        let step = linalg::dist(&next, &x);
        // Subgradient-norm certificate for a sigma-strongly-convex objective,
        // padded for the inexact inner solve.
        let slack = (2.0 * inner_tol / alpha).sqrt();
        let grad_residual = lambda_max * step + 2.0 * alpha * slack;
        x = next;
        if grad_residual * grad_residual / (2.0 * sigma) <= 0.5 * tol {
            return Ok(x);
        }
    }
    Err(Error::Unconverged {
        gap: f64::NAN,
        tol,
        iterations: COMPARATOR_MAX_OUTER,
        best: x,
    })
}

/// Offline comparator: minimizes the total loss over the domain subject to
/// every round's constraint, via exact penalty with escalation. The result
/// satisfies `max_t g_t(x_star) <= tol`; the reported objective is the total
/// loss at `x_star`.
pub fn offline_optimum(instance: &ProblemInstance, tol: f64) -> Result<(Vec<f64>, f64)> {
    if instance.loss_full.is_none() {
        return Err(Error::MissingFullInfo);
    }
    let total = instance
        .total_loss
        .as_ref()
        .ok_or_else(|| Error::Config("offline comparator needs a total-loss summary".into()))?;
    let constraint = pooled_constraint(instance);

    let phi_lipschitz = total.quad.iter().copied().fold(0.0, f64::max)
        * instance.domain.radius()
        + linalg::norm(&total.lin);
    let mut rho = phi_lipschitz.max(1.0);
    for _ in 0..PENALTY_ESCALATIONS {
        let x = penalized_minimize(total, &instance.domain, &constraint, rho, tol)?;
        let residual = worst_constraint(instance, &x);
        if residual <= tol {
            let objective = total.value(&x);
            return Ok((x, objective));
        }
        rho *= 10.0;
    }
    // Escalation failed: decide between genuine infeasibility and a stuck
    // penalty by minimizing the violation alone.
    let zero = DiagQuadratic {
        quad: vec![0.0; instance.domain.dimension()],
        lin: vec![0.0; instance.domain.dimension()],
        constant: 0.0,
    };
    let x_feas = penalized_minimize(&zero, &instance.domain, &constraint, 1.0, tol)?;
    let residual = worst_constraint(instance, &x_feas);
    Err(Error::Infeasible { residual })
}

/// Cumulative regret and violation series, one checkpoint per round.
#[derive(Debug, Clone)]
pub struct MetricSeries {
    pub regret: Vec<(usize, f64)>,
    pub v_hard: Vec<(usize, f64)>,
    pub v_soft: Vec<(usize, f64)>,
}

impl MetricSeries {
    pub fn final_regret(&self) -> f64 {
        self.regret.last().map_or(f64::NAN, |p| p.1)
    }
    pub fn final_v_hard(&self) -> f64 {
        self.v_hard.last().map_or(0.0, |p| p.1)
    }
    pub fn final_v_soft(&self) -> f64 {
        self.v_soft.last().map_or(0.0, |p| p.1)
    }
}

/// Offline bookkeeping over a trace: cumulative regret against `x_star`
/// (via the full-information oracle) and cumulative hard/soft violations
/// from the recorded constraint values.
pub fn compute_metrics(
    trace: &[TraceRecord],
    instance: &ProblemInstance,
    x_star: Option<&[f64]>,
) -> Result<MetricSeries> {
    if trace.len() != instance.horizon {
        return Err(Error::HorizonMismatch {
            trace: trace.len(),
            instance: instance.horizon,
        });
    }
    let x_star = x_star.ok_or(Error::MissingComparator)?;
    let mut regret = Vec::with_capacity(trace.len());
    let mut v_hard = Vec::with_capacity(trace.len());
    let mut v_soft = Vec::with_capacity(trace.len());
    let (mut r, mut vh, mut vs) = (0.0, 0.0, 0.0);
    for rec in trace {
        let (f_x, _) = instance.full_loss(rec.t, &rec.x)?;
        let (f_star, _) = instance.full_loss(rec.t, x_star)?;
        r += f_x - f_star;
        vh += rec.g_at_x.max(0.0);
        vs += rec.g_at_x;
        regret.push((rec.t, r));
        v_hard.push((rec.t, vh));
        v_soft.push((rec.t, vs));
    }
    Ok(MetricSeries {
        regret,
        v_hard,
        v_soft,
    })
}

/// Least-squares slope of log(value) against log(T), with its r^2.
/// A constant series fits slope 0 exactly (r^2 = 1 by convention).
pub fn fit_growth_exponent(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::BadFitInput);
    }
    for &(t, v) in points {
        if !(t > 0.0) || !(v > 0.0) {
            return Err(Error::BadFitInput);
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::BadFitInput);
    }
    let slope = sxy / sxx;
    let ss_res: f64 = logs
        .iter()
        .map(|p| {
            let pred = mean_y + slope * (p.0 - mean_x);
            (p.1 - pred).powi(2)
        })
        .sum();
    let r_squared = if syy <= 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok((slope, r_squared))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(instance: &ProblemInstance, t: usize, x: &[f64]) -> f64 {
        (instance.loss_query)(t, x)
    }

    #[test]
    fn generate_is_deterministic() {
        let spec = SuiteSpec::new(Family::LinearDrift, 2, 10, 7);
        let a = generate(&spec).unwrap().instance;
        let b = generate(&spec).unwrap().instance;
        for t in 1..=10 {
            for x in [[0.1, -0.2], [0.5, 0.5], [-0.9, 0.3]] {
                assert_eq!(probe(&a, t, &x), probe(&b, t, &x));
            }
        }
    }

    #[test]
    fn quadratic_gradient_vanishes_at_target() {
        let spec = SuiteSpec::new(Family::Quadratic, 3, 5, 11);
        let suite = generate(&spec).unwrap();
        let inst = &suite.instance;
        for t in 1..=5 {
            // Recover m_t by one gradient step from the origin: grad(0) = -m_t.
            let (_, g0) = inst.full_loss(t, &[0.0, 0.0, 0.0]).unwrap();
            let m: Vec<f64> = g0.iter().map(|v| -v).collect();
            let (_, gm) = inst.full_loss(t, &m).unwrap();
            assert!(linalg::norm(&gm) < 1e-12);
        }
        assert_eq!(suite.sigma, Some(1.0));
    }

    #[test]
    fn fixed_affine_sets_flag_and_single_constraint() {
        let mut spec = SuiteSpec::new(Family::Quadratic, 2, 20, 3);
        spec.constraint_mode = ConstraintMode::FixedAffine;
        let inst = generate(&spec).unwrap().instance;
        assert!(inst.fixed_constraints);
        assert_eq!(inst.constraints.len(), 1);
        let g1 = inst.constraint(1).unwrap().value(&[0.5, 0.1]);
        let g20 = inst.constraint(20).unwrap().value(&[0.5, 0.1]);
        assert_eq!(g1, g20);
    }

    #[test]
    fn sampled_gradients_respect_certified_bound() {
        for family in [Family::LinearDrift, Family::Quadratic, Family::QuadraticGeneral] {
            let spec = SuiteSpec::new(family, 2, 50, 9);
            let suite = generate(&spec).unwrap();
            let inst = &suite.instance;
            let mut rng = ChaCha12Rng::seed_from_u64(1);
            for _ in 0..2000 {
                let t = rng.gen_range(1..=50);
                let x = crate::estimator::sample_unit_ball(&mut rng, 2).unwrap();
                let (_, g) = inst.full_loss(t, &x).unwrap();
                assert!(linalg::norm(&g) <= inst.lipschitz_f + 1e-12);
            }
        }
    }

    #[test]
    fn alternating_values_and_prefix_sums() {
        let v = make_alternating_example(1000).unwrap();
        let hard: f64 = v.iter().map(|g| g.max(0.0)).sum();
        let soft: f64 = v.iter().sum();
        assert_eq!(hard, 500.0);
        assert_eq!(soft, 0.0);
        let mut prefix = 0.0;
        for g in &v {
            prefix += g;
            assert!(prefix <= 0.0);
        }
        assert_eq!(make_alternating_example(2).unwrap(), vec![-1.0, 1.0]);
        assert!(make_alternating_example(3).is_err());
    }

    #[test]
    fn offline_optimum_unconstrained_case() {
        // f_t = 1/2 ||x - m||^2 with m inside the feasible region.
        let d = 2;
        let m = vec![-0.3, 0.1];
        let total = DiagQuadratic {
            quad: vec![4.0; d],
            lin: linalg::scale(&m, -4.0),
            constant: 2.0 * linalg::dot(&m, &m),
        };
        let mc = m.clone();
        let inst = ProblemInstance {
            domain: FeasibleBall::centered(d, 1.0).unwrap(),
            horizon: 4,
            loss_query: Arc::new(move |_, x| {
                let diff = linalg::sub(x, &mc);
                0.5 * linalg::dot(&diff, &diff)
            }),
            loss_full: Some(Arc::new(move |_, _: &[f64]| (0.0, vec![0.0; 2]))),
            constraints: vec![ConstraintFn::affine(vec![1.0, 0.0], 0.3)],
            lipschitz_f: 2.0,
            fixed_constraints: true,
            total_loss: Some(total),
        };
        let (x_star, _) = offline_optimum(&inst, 1e-8).unwrap();
        assert!(linalg::dist(&x_star, &m) < 1e-4);
    }

    #[test]
    fn offline_optimum_kkt_example() {
        // Total loss 1/2 ||x - (1,1)||^2, constraint x1 <= 0, ball R=10.
        let total = DiagQuadratic {
            quad: vec![1.0, 1.0],
            lin: vec![-1.0, -1.0],
            constant: 1.0,
        };
        let inst = ProblemInstance {
            domain: FeasibleBall::centered(2, 10.0).unwrap(),
            horizon: 1,
            loss_query: Arc::new(|_, x| {
                0.5 * ((x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2))
            }),
            loss_full: Some(Arc::new(|_, x: &[f64]| {
                (
                    0.5 * ((x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2)),
                    vec![x[0] - 1.0, x[1] - 1.0],
                )
            })),
            constraints: vec![ConstraintFn::affine(vec![1.0, 0.0], 0.0)],
            lipschitz_f: 20.0,
            fixed_constraints: true,
            total_loss: Some(total),
        };
        let (x_star, obj) = offline_optimum(&inst, 1e-8).unwrap();
        assert!(linalg::dist(&x_star, &[0.0, 1.0]) < 1e-4, "{x_star:?}");
        assert!((obj - 0.5).abs() < 1e-4);
        assert!(inst.constraints[0].value(&x_star) <= 1e-8);
    }

    #[test]
    fn offline_optimum_detects_infeasibility() {
        let inst = ProblemInstance {
            domain: FeasibleBall::centered(2, 1.0).unwrap(),
            horizon: 1,
            loss_query: Arc::new(|_, _| 0.0),
            loss_full: Some(Arc::new(|_, _: &[f64]| (0.0, vec![0.0, 0.0]))),
            constraints: vec![ConstraintFn::affine(vec![0.0, 0.0], -1.0)],
            lipschitz_f: 0.0,
            fixed_constraints: true,
            total_loss: Some(DiagQuadratic {
                quad: vec![0.0, 0.0],
                lin: vec![0.0, 0.0],
                constant: 0.0,
            }),
        };
        match offline_optimum(&inst, 1e-8) {
            Err(Error::Infeasible { residual }) => assert!((residual - 1.0).abs() < 1e-6),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn offline_optimum_beats_random_feasible_points() {
        let spec = SuiteSpec::new(Family::Quadratic, 2, 100, 21);
        let inst = generate(&spec).unwrap().instance;
        let total = inst.total_loss.clone().unwrap();
        let (x_star, obj) = offline_optimum(&inst, 1e-8).unwrap();
        assert!((obj - total.value(&x_star)).abs() < 1e-9);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let mut tried = 0;
        while tried < 10_000 {
            let p = crate::estimator::sample_unit_ball(&mut rng, 2).unwrap();
            if super::worst_constraint(&inst, &p) <= 0.0 {
                tried += 1;
                assert!(total.value(&p) + 1e-8 >= obj);
            }
        }
    }

    #[test]
    fn metrics_on_alternating_example() {
        use crate::algorithm::{run, RunOptions};
        use crate::schedule::{Mode, ScheduleParams};
        use rand::SeedableRng;

        let inst = alternating_instance(1000, 2).unwrap();
        let p = ScheduleParams::with_defaults(Mode::Convex, None, 1000, 1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let trace = run(&inst, &p, &[0.0, 0.0], &RunOptions::default(), &mut rng).unwrap();
        let series = compute_metrics(&trace, &inst, Some(&[0.0, 0.0])).unwrap();
        assert_eq!(series.final_v_hard(), 500.0);
        assert_eq!(series.final_v_soft(), 0.0);
        assert_eq!(series.final_regret(), 0.0);
    }

    #[test]
    fn metrics_single_round_regret() {
        let inst = ProblemInstance {
            domain: FeasibleBall::centered(1, 1.0).unwrap(),
            horizon: 1,
            loss_query: Arc::new(|_, _| 0.0),
            loss_full: Some(Arc::new(|_, x: &[f64]| {
                (if x[0] > 0.0 { 3.0 } else { 1.0 }, vec![0.0])
            })),
            constraints: vec![ConstraintFn::affine(vec![0.0], 1.0)],
            lipschitz_f: 1.0,
            fixed_constraints: true,
            total_loss: None,
        };
        let trace = vec![TraceRecord {
            t: 1,
            x: vec![0.5],
            direction: vec![1.0],
            loss_plus: 0.0,
            loss_minus: 0.0,
            grad_est: vec![0.0],
            g_at_x: -1.0,
            g_plus: 0.0,
            lambda: 0.0,
            alpha: 1.0,
            gamma: 1.0,
            eta: 1.0,
            solver_method: crate::solver::SolveMethod::ClosedForm,
            solver_gap: 0.0,
        }];
        let series = compute_metrics(&trace, &inst, Some(&[-0.5])).unwrap();
        assert_eq!(series.final_regret(), 2.0);
        assert!(matches!(
            compute_metrics(&trace, &inst, None),
            Err(Error::MissingComparator)
        ));
    }

    #[test]
    fn growth_fit_reference_cases() {
        let (s, r2) =
            fit_growth_exponent(&[(10.0, 10.0), (100.0, 100.0), (1000.0, 1000.0)]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
        let (s, _) = fit_growth_exponent(&[
            (10.0, 10f64.sqrt()),
            (100.0, 10.0),
            (1000.0, 1000f64.sqrt()),
        ])
        .unwrap();
        assert!((s - 0.5).abs() < 1e-12);
        let (s, _) = fit_growth_exponent(&[(10.0, 4.0), (100.0, 4.0), (1000.0, 4.0)]).unwrap();
        assert_eq!(s, 0.0);
        assert!(fit_growth_exponent(&[(10.0, 1.0), (100.0, 2.0)]).is_err());
        assert!(fit_growth_exponent(&[(10.0, 1.0), (100.0, -2.0), (1000.0, 3.0)]).is_err());
    }
}
