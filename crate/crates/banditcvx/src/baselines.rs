//! Reference algorithms sharing the trace schema with the main method.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithm::{update_penalty, AbortedRun, PenaltyEvalPoint, RunOptions, TraceRecord};
use crate::error::Error;
use crate::problem::ProblemInstance;
use crate::schedule::{schedule, ScheduleParams};
use crate::solver::{solve, SolveMethod, Subproblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// The penalized proximal update with the true gradient, no
    /// perturbation, on the unshrunken domain.
    FullInfoRectified,
    /// The two-point update with the penalty weight forced to zero.
    UnconstrainedTwoPoint,
    /// Plain projected online gradient descent with the true gradient.
    ProjectedOgd,
}

impl BaselineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineKind::FullInfoRectified => "full_info_rectified",
            BaselineKind::UnconstrainedTwoPoint => "unconstrained_two_point",
            BaselineKind::ProjectedOgd => "projected_ogd",
        }
    }
}

/// Runs a baseline over the same instance and schedules as the main
/// algorithm, emitting the same record schema.
pub fn run_baseline<R: Rng>(
    kind: BaselineKind,
    instance: &ProblemInstance,
    params: &ScheduleParams,
    x_init: &[f64],
    opts: &RunOptions,
    rng: &mut R,
) -> std::result::Result<Vec<TraceRecord>, Box<AbortedRun>> {
    match kind {
        BaselineKind::UnconstrainedTwoPoint => run_two_point_unconstrained(instance, params, x_init, opts, rng),
        BaselineKind::FullInfoRectified => run_full_info_rectified(instance, params, x_init, opts),
        BaselineKind::ProjectedOgd => run_projected_ogd(instance, params, x_init),
    }
}

fn run_two_point_unconstrained<R: Rng>(
    instance: &ProblemInstance,
    params: &ScheduleParams,
    x_init: &[f64],
    opts: &RunOptions,
    rng: &mut R,
) -> std::result::Result<Vec<TraceRecord>, Box<AbortedRun>> {
    use crate::estimator::{sample_unit_sphere, two_point_gradient};
    let wrap = |trace: Vec<TraceRecord>, cause: Error| Box::new(AbortedRun { trace, cause });

    crate::schedule::validate(params, &instance.domain).map_err(|e| wrap(Vec::new(), e))?;
    let shrunken = instance
        .domain
        .shrink(params.xi)
        .map_err(|e| wrap(Vec::new(), e))?;
    let mut x = shrunken.project(x_init).map_err(|e| wrap(Vec::new(), e))?;
    let mut lambda = 0.0;
    let mut trace = Vec::with_capacity(instance.horizon);

    for t in 1..=instance.horizon {
        let mut step = || -> crate::error::Result<(TraceRecord, Vec<f64>, f64)> {
            let (alpha, gamma, eta) = schedule(t, params)?;
            let u = sample_unit_sphere(&mut *rng, instance.domain.dimension())?;
            let loss = |p: &[f64]| (instance.loss_query)(t, p);
            let est = two_point_gradient(&loss, &x, params.delta, &u)?;
            let g_t = instance.constraint(t)?;
            let g_at_x = g_t.value(&x);
            let sub = Subproblem {
                gradient_est: est.vector.clone(),
                anchor: x.clone(),
                penalty_weight: 0.0,
                alpha,
                domain: shrunken.clone(),
                constraint: g_t.clone(),
            };
            let report = solve(&sub, opts.solver_tol, opts.solver_max_iter)?;
            let lambda_next = next_lambda(instance, params, t, lambda, &x, &report.solution, opts)?;
            let record = TraceRecord {
                t,
                x: x.clone(),
                direction: u,
                loss_plus: est.loss_values.0,
                loss_minus: est.loss_values.1,
                grad_est: est.vector,
                g_at_x,
                g_plus: g_at_x.max(0.0),
                lambda,
                alpha,
                gamma,
                eta,
                solver_method: report.method,
                solver_gap: report.certified_gap,
            };
            Ok((record, report.solution, lambda_next))
        };
        match step() {
            Ok((record, next_x, lambda_next)) => {
                trace.push(record);
                x = next_x;
                lambda = lambda_next;
            }
            Err(cause) => return Err(wrap(trace, cause)),
        }
    }
    Ok(trace)
}

fn next_lambda(
    instance: &ProblemInstance,
    params: &ScheduleParams,
    t: usize,
    lambda: f64,
    x_prev: &[f64],
    x_next: &[f64],
    opts: &RunOptions,
) -> crate::error::Result<f64> {
    if t >= instance.horizon {
        return Ok(lambda);
    }
    let g_next = instance.constraint(t + 1)?;
    let point = match opts.penalty_eval_point {
        PenaltyEvalPoint::Previous => x_prev,
        PenaltyEvalPoint::Current => x_next,
    };
    let (_, gamma_next, eta_next) = schedule(t + 1, params)?;
    update_penalty(lambda, g_next.value(point).max(0.0), gamma_next, eta_next)
}

fn run_full_info_rectified(
    instance: &ProblemInstance,
    params: &ScheduleParams,
    x_init: &[f64],
    opts: &RunOptions,
) -> std::result::Result<Vec<TraceRecord>, Box<AbortedRun>> {
    let wrap = |trace: Vec<TraceRecord>, cause: Error| Box::new(AbortedRun { trace, cause });
    let d = instance.domain.dimension();
    let mut x = instance
        .domain
        .project(x_init)
        .map_err(|e| wrap(Vec::new(), e))?;
    let mut lambda = 0.0;
    let mut trace = Vec::with_capacity(instance.horizon);

    for t in 1..=instance.horizon {
        let step = || -> crate::error::Result<(TraceRecord, Vec<f64>, f64)> {
            let (alpha, gamma, eta) = schedule(t, params)?;
            let (f_val, grad) = instance.full_loss(t, &x)?;
            let g_t = instance.constraint(t)?;
            let g_at_x = g_t.value(&x);
            let sub = Subproblem {
                gradient_est: grad.clone(),
                anchor: x.clone(),
                penalty_weight: lambda * gamma,
                alpha,
                domain: instance.domain.clone(),
                constraint: g_t.clone(),
            };
            let report = solve(&sub, opts.solver_tol, opts.solver_max_iter)?;
            let lambda_next = next_lambda(instance, params, t, lambda, &x, &report.solution, opts)?;
            let record = TraceRecord {
                t,
                x: x.clone(),
                direction: vec![0.0; d],
                loss_plus: f_val,
                loss_minus: f_val,
                grad_est: grad,
                g_at_x,
                g_plus: g_at_x.max(0.0),
                lambda,
                alpha,
                gamma,
                eta,
                solver_method: report.method,
                solver_gap: report.certified_gap,
            };
            Ok((record, report.solution, lambda_next))
        };
        match step() {
            Ok((record, next_x, lambda_next)) => {
                trace.push(record);
                x = next_x;
                lambda = lambda_next;
            }
            Err(cause) => return Err(wrap(trace, cause)),
        }
    }
    Ok(trace)
}

fn run_projected_ogd(
    instance: &ProblemInstance,
    params: &ScheduleParams,
    x_init: &[f64],
) -> std::result::Result<Vec<TraceRecord>, Box<AbortedRun>> {
    let wrap = |trace: Vec<TraceRecord>, cause: Error| Box::new(AbortedRun { trace, cause });
    let d = instance.domain.dimension();
    let mut x = instance
        .domain
        .project(x_init)
        .map_err(|e| wrap(Vec::new(), e))?;
    let mut trace = Vec::with_capacity(instance.horizon);

    for t in 1..=instance.horizon {
        let step = || -> crate::error::Result<(TraceRecord, Vec<f64>)> {
            let (alpha, gamma, eta) = schedule(t, params)?;
            let (f_val, grad) = instance.full_loss(t, &x)?;
            let g_t = instance.constraint(t)?;
            let g_at_x = g_t.value(&x);
            let mut stepped = x.clone();
            crate::linalg::axpy(&mut stepped, -1.0 / alpha, &grad);
            let next = instance.domain.project(&stepped)?;
            let record = TraceRecord {
                t,
                x: x.clone(),
                direction: vec![0.0; d],
                loss_plus: f_val,
                loss_minus: f_val,
                grad_est: grad,
                g_at_x,
                g_plus: g_at_x.max(0.0),
                lambda: 0.0,
                alpha,
                gamma,
                eta,
                solver_method: SolveMethod::ClosedForm,
                solver_gap: 0.0,
            };
            Ok((record, next))
        };
        match step() {
            Ok((record, next_x)) => {
                trace.push(record);
                x = next_x;
            }
            Err(cause) => return Err(wrap(trace, cause)),
        }
    }
    Ok(trace)
}
