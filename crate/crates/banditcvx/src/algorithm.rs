//! The main loop: draw a direction, query the loss twice, estimate the
//! gradient, solve the penalized proximal subproblem, observe the next
//! constraint, and update the penalty variable with its floor.

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator::{sample_unit_sphere, two_point_gradient};
use crate::geometry::FeasibleBall;
use crate::problem::ProblemInstance;
use crate::schedule::{schedule, validate, ScheduleParams};
use crate::solver::{solve, SolveMethod, Subproblem, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Where the penalty update evaluates the newly revealed constraint.
/// The update reads `[g_{t+1}(x_t)]_+` by default; `Current` evaluates at
/// the fresh iterate `x_{t+1}` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyEvalPoint {
    #[default]
    Previous,
    Current,
}

/// The learner's evolving state `(x_t, lambda_t)`.
#[derive(Debug, Clone)]
pub struct RoundState {
    pub t: usize,
    pub x: Vec<f64>,
    pub lambda: f64,
}

/// Per-round audit record; every metric derives from these.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub t: usize,
    pub x: Vec<f64>,
    pub direction: Vec<f64>,
    pub loss_plus: f64,
    pub loss_minus: f64,
    pub grad_est: Vec<f64>,
    pub g_at_x: f64,
    pub g_plus: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub eta: f64,
    pub solver_method: SolveMethod,
    pub solver_gap: f64,
}

/// Error carrying the partial trace produced before a solver failure.
#[derive(Debug)]
pub struct AbortedRun {
    pub trace: Vec<TraceRecord>,
    pub cause: Error,
}

/// Penalty update `lambda_{t+1} = max(lambda_t + gamma_{t+1} [g]_+, eta_{t+1})`.
pub fn update_penalty(
    lambda: f64,
    g_value_plus: f64,
    gamma_next: f64,
    eta_next: f64,
) -> Result<f64> {
    if !(lambda.is_finite() && g_value_plus.is_finite() && gamma_next.is_finite()
        && eta_next.is_finite())
    {
        return Err(Error::NonFiniteInput("penalty update"));
    }
    if g_value_plus < 0.0 {
        return Err(Error::NonFiniteInput(
            "penalty update requires a rectified (nonnegative) constraint value",
        ));
    }
    Ok((lambda + gamma_next * g_value_plus).max(eta_next))
}

/// Options for a run; the defaults follow the algorithm as written.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub penalty_eval_point: PenaltyEvalPoint,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            penalty_eval_point: PenaltyEvalPoint::Previous,
            solver_tol: DEFAULT_TOL,
            solver_max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// One round: sphere draw, two bandit queries at `x_t +- delta u_t`,
/// gradient estimate, penalized proximal solve over the shrunken domain,
/// constraint observation, penalty update. Returns the advanced state and
/// the completed record for round `t`.
pub fn run_round<R: Rng>(
    state: &RoundState,
    instance: &ProblemInstance,
    params: &ScheduleParams,
    shrunken: &FeasibleBall,
    opts: &RunOptions,
    rng: &mut R,
) -> Result<(RoundState, TraceRecord)> {
    let t = state.t;
    let d = instance.domain.dimension();
    let (alpha, gamma, _eta) = schedule(t, params)?;

    let u = sample_unit_sphere(rng, d)?;
    let loss = |p: &[f64]| (instance.loss_query)(t, p);
    let est = two_point_gradient(&loss, &state.x, params.delta, &u)?;

    let g_t = instance.constraint(t)?;
    let g_at_x = g_t.value(&state.x);

    let sub = Subproblem {
        gradient_est: est.vector.clone(),
        anchor: state.x.clone(),
        penalty_weight: state.lambda * gamma,
        alpha,
        domain: shrunken.clone(),
        constraint: g_t.clone(),
    };
    let report = solve(&sub, opts.solver_tol, opts.solver_max_iter)?;

    // Observe g_{t+1} and update the penalty; the final round has nothing
    // left to observe.
    let lambda_next = if t < instance.horizon {
        let g_next = instance.constraint(t + 1)?;
        let eval_point = match opts.penalty_eval_point {
            PenaltyEvalPoint::Previous => &state.x,
            PenaltyEvalPoint::Current => &report.solution,
        };
        let g_plus_next = g_next.value(eval_point).max(0.0);
        let (_, gamma_next, eta_next) = schedule(t + 1, params)?;
        update_penalty(state.lambda, g_plus_next, gamma_next, eta_next)?
    } else {
        state.lambda
    };

    let record = TraceRecord {
        t,
        x: state.x.clone(),
        direction: u,
        loss_plus: est.loss_values.0,
        loss_minus: est.loss_values.1,
        grad_est: est.vector,
        g_at_x,
        g_plus: g_at_x.max(0.0),
        lambda: state.lambda,
        alpha,
        gamma,
        eta: _eta,
        solver_method: report.method,
        solver_gap: report.certified_gap,
    };
    let next = RoundState {
        t: t + 1,
        x: report.solution,
        lambda: lambda_next,
    };
    Ok((next, record))
}

/// Full run of the algorithm: `x_1` is projected into the shrunken domain
/// so the round-1 queries stay feasible, `lambda_1 = 0`. Exactly `T`
/// records, two loss evaluations each. On solver failure the partial trace
/// is preserved in the error.
pub fn run<R: Rng>(
    instance: &ProblemInstance,
    params: &ScheduleParams,
    x_init: &[f64],
    opts: &RunOptions,
    rng: &mut R,
) -> std::result::Result<Vec<TraceRecord>, Box<AbortedRun>> {
    let wrap = |trace: Vec<TraceRecord>, cause: Error| Box::new(AbortedRun { trace, cause });
    validate(params, &instance.domain).map_err(|e| wrap(Vec::new(), e))?;
    let shrunken = instance
        .domain
        .shrink(params.xi)
        .map_err(|e| wrap(Vec::new(), e))?;
    let x1 = shrunken.project(x_init).map_err(|e| wrap(Vec::new(), e))?;

    let mut state = RoundState {
        t: 1,
        x: x1,
        lambda: 0.0,
    };
    let mut trace = Vec::with_capacity(instance.horizon);
    for _ in 0..instance.horizon {
        match run_round(&state, instance, params, &shrunken, opts, rng) {
            Ok((next, record)) => {
                trace.push(record);
                state = next;
            }
            Err(cause) => return Err(wrap(trace, cause)),
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ConstraintFn;
    use crate::schedule::Mode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::sync::Arc;

    fn linear_instance(horizon: usize, g: ConstraintFn) -> ProblemInstance {
        ProblemInstance {
            domain: FeasibleBall::centered(2, 1.0).unwrap(),
            horizon,
            loss_query: Arc::new(|_t, x: &[f64]| x[0]),
            loss_full: Some(Arc::new(|_t, x: &[f64]| (x[0], vec![1.0, 0.0]))),
            constraints: vec![g],
            lipschitz_f: 1.0,
            fixed_constraints: true,
            total_loss: None,
        }
    }

    fn params(horizon: usize) -> ScheduleParams {
        ScheduleParams::with_defaults(Mode::Convex, None, horizon, 1.0)
    }

    #[test]
    fn penalty_update_examples() {
        assert_eq!(update_penalty(0.0, 0.5, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(update_penalty(3.0, 1.0, 2.0, 1.5).unwrap(), 5.0);
        assert_eq!(update_penalty(2.0, 0.0, 7.0, 1.0).unwrap(), 2.0);
        assert!(update_penalty(1.0, -0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn never_violated_constraint_reduces_to_proximal_gradient() {
        // g = -1 everywhere: hinge vanishes, so each round is a pure
        // two-point proximal gradient step.
        let inst = linear_instance(20, ConstraintFn::affine(vec![0.0, 0.0], 1.0));
        let p = params(20);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let trace = run(&inst, &p, &[0.0, 0.0], &RunOptions::default(), &mut rng).unwrap();

        let shrunken = inst.domain.shrink(p.xi).unwrap();
        let mut rng2 = ChaCha12Rng::seed_from_u64(1);
        let mut x = shrunken.project(&[0.0, 0.0]).unwrap();
        for rec in &trace {
            assert_eq!(rec.x, x);
            let u = sample_unit_sphere(&mut rng2, 2).unwrap();
            assert_eq!(rec.direction, u);
            let est = two_point_gradient(&|p: &[f64]| p[0], &x, p.delta, &u).unwrap();
            let mut step = x.clone();
            crate::linalg::axpy(&mut step, -1.0 / rec.alpha, &est.vector);
            x = shrunken.project(&step).unwrap();
        }
    }

    #[test]
    fn trace_is_deterministic_under_seed() {
        let inst = linear_instance(15, ConstraintFn::affine(vec![1.0, 0.0], 0.2));
        let p = params(15);
        let run_once = || {
            let mut rng = ChaCha12Rng::seed_from_u64(9);
            run(&inst, &p, &[0.1, 0.1], &RunOptions::default(), &mut rng).unwrap()
        };
        let a = run_once();
        let b = run_once();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.x, rb.x);
            assert_eq!(ra.lambda, rb.lambda);
            assert_eq!(ra.grad_est, rb.grad_est);
        }
    }

    #[test]
    fn lambda_floor_and_monotonicity() {
        let inst = linear_instance(30, ConstraintFn::affine(vec![1.0, 0.0], 0.1));
        let p = params(30);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let trace = run(&inst, &p, &[0.5, 0.0], &RunOptions::default(), &mut rng).unwrap();
        assert_eq!(trace[0].lambda, 0.0);
        for w in trace.windows(2) {
            assert!(w[1].lambda >= w[0].lambda);
            assert!(w[1].lambda >= w[1].eta);
        }
    }

    #[test]
    fn iterates_and_queries_stay_feasible() {
        let inst = linear_instance(40, ConstraintFn::affine(vec![1.0, 1.0], 0.0));
        let p = params(40);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let trace = run(&inst, &p, &[0.9, 0.9], &RunOptions::default(), &mut rng).unwrap();
        let shrunk_r = (1.0 - p.xi) * inst.domain.radius();
        for rec in &trace {
            assert!(crate::linalg::norm(&rec.x) <= shrunk_r + 1e-12);
            let mut plus = rec.x.clone();
            crate::linalg::axpy(&mut plus, p.delta, &rec.direction);
            let mut minus = rec.x.clone();
            crate::linalg::axpy(&mut minus, -p.delta, &rec.direction);
            assert!(crate::linalg::norm(&plus) <= inst.domain.radius() + 1e-12);
            assert!(crate::linalg::norm(&minus) <= inst.domain.radius() + 1e-12);
        }
    }

    #[test]
    fn empty_horizon_gives_empty_trace() {
        let inst = linear_instance(0, ConstraintFn::affine(vec![1.0, 0.0], 0.0));
        let mut p = params(10);
        p.horizon = 0;
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let trace = run(&inst, &p, &[0.0, 0.0], &RunOptions::default(), &mut rng).unwrap();
        assert!(trace.is_empty());
    }

    #[test]
    fn two_loss_evaluations_per_round() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let count = Arc::new(AtomicUsize::new(0));
        let c = count.clone();
        let inst = ProblemInstance {
            domain: FeasibleBall::centered(2, 1.0).unwrap(),
            horizon: 25,
            loss_query: Arc::new(move |_t, x: &[f64]| {
                c.fetch_add(1, Ordering::Relaxed);
                x[0] + 0.5 * x[1]
            }),
            loss_full: None,
            constraints: vec![ConstraintFn::affine(vec![1.0, 0.0], 0.3)],
            lipschitz_f: 2.0,
            fixed_constraints: true,
            total_loss: None,
        };
        let p = params(25);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        run(&inst, &p, &[0.0, 0.0], &RunOptions::default(), &mut rng).unwrap();
        assert_eq!(count.load(Ordering::Relaxed), 50);
    }
}
