//! Bandit convex optimization with hard constraints under two-point feedback.
//!
//! The library implements a penalty-based proximal online algorithm: each
//! round queries the loss at two symmetric perturbations of the iterate,
//! forms a spherical gradient estimate, and advances by minimizing the
//! estimated linearization plus a rectified constraint penalty and a
//! proximal term over a shrunken ball. Supporting modules provide the
//! gradient estimator, a certified subproblem solver, baselines, synthetic
//! experiment suites, metrics, and a small CLI.

pub mod algorithm;
pub mod baselines;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod problem;
pub mod schedule;
pub mod solver;

pub use algorithm::{
    run, run_round, update_penalty, AbortedRun, PenaltyEvalPoint, RoundState, RunOptions,
    TraceRecord,
};
pub use baselines::{run_baseline, BaselineKind};
pub use error::{Error, Result};
pub use experiments::{
    compute_metrics, fit_growth_exponent, generate, offline_optimum, GeneratedSuite, MetricSeries,
    SuiteSpec,
};
pub use estimator::{
    sample_unit_ball, sample_unit_sphere, smoothed_value_mc, two_point_gradient, GradientEstimate,
};
pub use geometry::FeasibleBall;
pub use problem::{ConstraintFn, ConstraintKind, DiagQuadratic, ProblemInstance};
pub use schedule::{schedule, Mode, ScheduleParams};
pub use solver::{certify_optimality, solve, SolveMethod, SolveReport, Subproblem};
