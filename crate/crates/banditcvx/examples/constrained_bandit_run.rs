//! Runs the penalty-based bandit algorithm on a synthetic suite and reports
//! final regret and constraint violations against the offline optimum.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use banditcvx::algorithm::{run, RunOptions};
use banditcvx::experiments::{compute_metrics, generate, offline_optimum, SuiteSpec};
use banditcvx::experiments::{ConstraintMode, Family};
use banditcvx::schedule::{Mode, ScheduleParams};

fn main() {
    let spec = SuiteSpec {
        family: Family::Quadratic,
        constraint_mode: ConstraintMode::FixedAffine,
        d: 2,
        horizon: 5_000,
        seed: 0,
        drift_scale: 0.1,
    };
    let suite = generate(&spec).unwrap();
    let inst = &suite.instance;

    let params =
        ScheduleParams::with_defaults(Mode::Convex, None, inst.horizon, inst.domain.radius());
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let trace = run(inst, &params, inst.domain.center(), &RunOptions::default(), &mut rng)
        .unwrap();

    let (x_star, f_star) = offline_optimum(inst, 1e-8).unwrap();
    let metrics = compute_metrics(&trace, inst, Some(&x_star)).unwrap();

    println!("suite: {} / fixed_affine, T = {}", spec.family.as_str(), inst.horizon);
    println!("offline optimum x* = [{:.4}, {:.4}], total loss {f_star:.4}", x_star[0], x_star[1]);
    println!("final iterate     = [{:.4}, {:.4}]", trace.last().unwrap().x[0], trace.last().unwrap().x[1]);
    println!("regret   = {:.4}", metrics.final_regret());
    println!("V_hard   = {:.4}", metrics.final_v_hard());
    println!("V_soft   = {:.4}", metrics.final_v_soft());
    println!("lambda_T = {:.4}", trace.last().unwrap().lambda);
}
