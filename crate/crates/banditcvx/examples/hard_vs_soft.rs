//! Why the hard violation metric matters: with constraints that alternate
//! sign, staying at the origin accumulates zero *soft* violation (positive
//! and negative rounds cancel) but linear *hard* violation.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use banditcvx::algorithm::{run, RunOptions};
use banditcvx::experiments::{alternating_instance, make_alternating_example};
use banditcvx::schedule::{Mode, ScheduleParams};

fn main() {
    let t_max = 1_000;
    let values = make_alternating_example(t_max).unwrap();
    println!("g_t(x) = v_t with v_t alternating: {:?} ...", &values[..6]);

    let inst = alternating_instance(t_max, 2).unwrap();
    let params = ScheduleParams::with_defaults(Mode::Convex, None, t_max, 1.0);
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let trace = run(&inst, &params, &[0.0, 0.0], &RunOptions::default(), &mut rng).unwrap();

    let v_hard: f64 = trace.iter().map(|r| r.g_plus).sum();
    let v_soft: f64 = trace.iter().map(|r| r.g_at_x).sum::<f64>().max(0.0);
    println!("after T = {t_max} rounds:");
    println!("  V_soft = [sum_t g_t(x_t)]_+ = {v_soft}");
    println!("  V_hard = sum_t [g_t(x_t)]_+ = {v_hard}");
    println!("the soft metric hides {} violated rounds", t_max / 2);
}
