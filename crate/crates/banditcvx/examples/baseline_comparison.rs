//! Compares the main algorithm against the three reference baselines on the
//! same instance: full-information rectified, unconstrained two-point, and
//! projected online gradient descent.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use banditcvx::algorithm::{run, RunOptions, TraceRecord};
use banditcvx::baselines::{run_baseline, BaselineKind};
use banditcvx::experiments::{compute_metrics, generate, offline_optimum, SuiteSpec};
use banditcvx::experiments::{ConstraintMode, Family};
use banditcvx::schedule::{Mode, ScheduleParams};

fn main() {
    let spec = SuiteSpec {
        family: Family::Quadratic,
        constraint_mode: ConstraintMode::FixedAffine,
        d: 2,
        horizon: 5_000,
        seed: 1,
        drift_scale: 0.1,
    };
    let suite = generate(&spec).unwrap();
    let inst = &suite.instance;
    let params =
        ScheduleParams::with_defaults(Mode::Convex, None, inst.horizon, inst.domain.radius());
    let opts = RunOptions::default();
    let (x_star, _) = offline_optimum(inst, 1e-8).unwrap();

    let mut rows: Vec<(&str, Vec<TraceRecord>)> = Vec::new();
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    rows.push((
        "main",
        run(inst, &params, inst.domain.center(), &opts, &mut rng).unwrap(),
    ));
    for kind in [
        BaselineKind::FullInfoRectified,
        BaselineKind::UnconstrainedTwoPoint,
        BaselineKind::ProjectedOgd,
    ] {
        let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
        rng.set_stream(1);
        let trace =
            run_baseline(kind, inst, &params, inst.domain.center(), &opts, &mut rng).unwrap();
        rows.push((kind.as_str(), trace));
    }

    println!("{:<24} {:>10} {:>10} {:>10}", "algorithm", "regret", "V_hard", "V_soft");
    for (name, trace) in &rows {
        let m = compute_metrics(trace, inst, Some(&x_star)).unwrap();
        println!(
            "{name:<24} {:>10.3} {:>10.3} {:>10.3}",
            m.final_regret(),
            m.final_v_hard(),
            m.final_v_soft()
        );
    }
}
