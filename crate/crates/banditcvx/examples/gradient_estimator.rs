//! Two-point gradient estimation on a known quadratic: compares the
//! estimator against the true smoothed gradient as delta shrinks.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use banditcvx::estimator::{sample_unit_sphere, smoothed_value_mc, two_point_gradient};
use banditcvx::linalg;

fn main() {
    let d = 4;
    let target = vec![0.3, -0.1, 0.5, 0.2];
    let loss = |x: &[f64]| 0.5 * linalg::dist(x, &target).powi(2);
    let x = vec![0.1; d];
    let true_grad = linalg::sub(&x, &target);

    let mut rng = ChaCha12Rng::seed_from_u64(0);
    println!("{:>10} {:>12} {:>12}", "delta", "mean err", "smoothed f");
    for &delta in &[0.5, 0.1, 0.02, 0.004] {
        // Average many single-round estimates; each uses two oracle calls.
        let n = 20_000;
        let mut mean = vec![0.0; d];
        for _ in 0..n {
            let u = sample_unit_sphere(&mut rng, d).unwrap();
            let est = two_point_gradient(&loss, &x, delta, &u).unwrap();
            linalg::axpy(&mut mean, 1.0 / n as f64, &est.vector);
        }
        let (smoothed, _se) = smoothed_value_mc(&loss, &x, delta, 50_000, &mut rng).unwrap();
        println!(
            "{delta:>10.3} {:>12.2e} {smoothed:>12.6}",
            linalg::dist(&mean, &true_grad)
        );
    }
    println!("true gradient: {true_grad:?}, f(x) = {:.6}", loss(&x));
}
