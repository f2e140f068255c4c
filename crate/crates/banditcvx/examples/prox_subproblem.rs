//! Solves one penalized proximal subproblem two ways (closed form and the
//! iterative path) and prints the duality-gap certificates.

use banditcvx::geometry::FeasibleBall;
use banditcvx::problem::ConstraintFn;
use banditcvx::solver::{solve_affine_closed_form, solve_generic, Subproblem};

fn main() {
    // The gradient pulls toward +x1 but the hinge max(0, x1) pushes back
    // harder, so the minimizer sits exactly on the kink.
    let sub = Subproblem {
        gradient_est: vec![-4.0, 0.0],
        anchor: vec![0.0, 0.0],
        penalty_weight: 10.0,
        alpha: 2.0,
        domain: FeasibleBall::centered(2, 10.0).unwrap(),
        constraint: ConstraintFn::affine(vec![1.0, 0.0], 0.0),
    };

    let closed = solve_affine_closed_form(&sub).unwrap().unwrap();
    println!(
        "closed form: x = {:?}, objective = {:.6}, gap = {:.2e}",
        closed.solution, closed.objective_value, closed.certified_gap
    );

    let iterative = solve_generic(&sub, 1e-10, 50_000).unwrap();
    println!(
        "iterative:   x = {:?}, objective = {:.6}, gap = {:.2e} ({} iterations)",
        iterative.solution,
        iterative.objective_value,
        iterative.certified_gap,
        iterative.iterations
    );

    // A max-of-affine constraint has no closed form; the dual path with
    // cutting planes handles it.
    let piecewise = Subproblem {
        constraint: ConstraintFn::max_of_affine(vec![
            (vec![1.0, 0.0], 0.1),
            (vec![0.0, 1.0], 0.1),
        ]),
        domain: FeasibleBall::centered(2, 1.0).unwrap(),
        gradient_est: vec![-1.0, -1.0],
        anchor: vec![0.0, 0.0],
        penalty_weight: 5.0,
        alpha: 1.0,
    };
    let report = solve_generic(&piecewise, 1e-10, 50_000).unwrap();
    println!(
        "max-of-affine: x = [{:.6}, {:.6}], gap = {:.2e}",
        report.solution[0], report.solution[1], report.certified_gap
    );
}
