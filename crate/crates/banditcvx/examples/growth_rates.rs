//! Measures how regret and hard violation grow with the horizon by running
//! several seeds per horizon and fitting log-log slopes to the medians.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use banditcvx::algorithm::{run, RunOptions};
use banditcvx::experiments::{
    compute_metrics, fit_growth_exponent, generate, offline_optimum, ConstraintMode, Family,
    SuiteSpec,
};
use banditcvx::schedule::{Mode, ScheduleParams};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn main() {
    let horizons = [500usize, 1_000, 2_000, 4_000, 8_000];
    let seeds: Vec<u64> = (0..5).collect();

    let per_horizon: Vec<(usize, f64, f64)> = horizons
        .par_iter()
        .map(|&t_max| {
            let (mut regrets, mut v_hards) = (Vec::new(), Vec::new());
            for &seed in &seeds {
                let suite = generate(&SuiteSpec {
                    family: Family::Quadratic,
                    constraint_mode: ConstraintMode::FixedAffine,
                    d: 2,
                    horizon: t_max,
                    seed,
                    drift_scale: 0.1,
                })
                .unwrap();
                let inst = &suite.instance;
                let params = ScheduleParams::with_defaults(
                    Mode::Convex,
                    None,
                    t_max,
                    inst.domain.radius(),
                );
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(1);
                let trace =
                    run(inst, &params, inst.domain.center(), &RunOptions::default(), &mut rng)
                        .unwrap();
                let (x_star, _) = offline_optimum(inst, 1e-8).unwrap();
                let m = compute_metrics(&trace, inst, Some(&x_star)).unwrap();
                regrets.push(m.final_regret());
                v_hards.push(m.final_v_hard());
            }
            (t_max, median(regrets), median(v_hards))
        })
        .collect();

    println!("{:>8} {:>12} {:>12}", "T", "med regret", "med V_hard");
    for &(t, r, v) in &per_horizon {
        println!("{t:>8} {r:>12.3} {v:>12.3}");
    }

    let regret_pts: Vec<(f64, f64)> = per_horizon
        .iter()
        .map(|&(t, r, _)| (t as f64, r.max(1e-9)))
        .collect();
    let vhard_pts: Vec<(f64, f64)> = per_horizon
        .iter()
        .map(|&(t, _, v)| (t as f64, v.max(1e-9)))
        .collect();
    let (slope_r, r2_r) = fit_growth_exponent(&regret_pts).unwrap();
    let (slope_v, r2_v) = fit_growth_exponent(&vhard_pts).unwrap();
    println!("regret ~ T^{slope_r:.3} (r^2 = {r2_r:.3})");
    println!("V_hard ~ T^{slope_v:.3} (r^2 = {r2_v:.3})");
}
