//! Randomized properties of the manifold Newton iteration and of rate classification.

mod common;

use common::annulus_point;
use plqnewton::benchmarks::{self, Benchmark};
use plqnewton::certify::TAU_PD;
use plqnewton::harness::{classify_rate, RateClass, USABLE_FLOOR};
use plqnewton::linalg::{min_sym_eigenvalue, null_space, Vector};
use plqnewton::manifold::{build_manifold, manifold_contains, TAU_SC};
use plqnewton::solver::{newton_solve, solve_subproblem_enum, RestrictedState, SolveOptions, GLUING_TOL};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(19), failure_persistence: None, ..ProptestConfig::default() }
}

/// Start radius well inside the measured basin of every manifold benchmark.
const START_RADIUS: f64 = 0.05;

fn check_run(b: &Benchmark, rng: &mut StdRng) -> Result<(), TestCaseError> {
    let p = &b.problem;
    let (n, m) = (b.xbar.len(), b.ybar.len());
    let z = annulus_point(rng, n + m, START_RADIUS);
    let x0 = &b.xbar + z.rows(0, n);
    let y0 = &b.ybar + z.rows(n, m);
    let md = build_manifold(&p.h, &p.c.value(&b.xbar).unwrap()).unwrap();
    let opts = SolveOptions { reference: Some((b.xbar.clone(), b.ybar.clone())), ..SolveOptions::default() };
    let trace = newton_solve(p, &md, RestrictedState::from_xy(p, &md, x0, y0).unwrap(), &opts).unwrap();
    prop_assert!(trace.converged, "{} did not converge", b.name);

    for pair in trace.records.windows(2) {
        let (prev, rec) = (&pair[0], &pair[1]);
        let xp = Vector::from_column_slice(&prev.x);
        let yp = Vector::from_column_slice(&prev.y);
        let (x, y) = (Vector::from_column_slice(&rec.x), Vector::from_column_slice(&rec.y));

        prop_assert!(rec.gluing.unwrap() <= GLUING_TOL, "{}: gluing {:e}", b.name, rec.gluing.unwrap());
        prop_assert!(rec.mu.iter().all(|&v| v > TAU_SC), "{}: μ = {:?}", b.name, rec.mu);

        let cx = p.c.value(&xp).unwrap();
        let jac = p.c.jacobian(&xp).unwrap();
        let d = &x - &xp;
        prop_assert!(manifold_contains(&p.h, &md, &(&cx + &jac * &d)), "{}: linearized point left the manifold", b.name);

        let hess = p.c.weighted_hessian(&xp, &yp).unwrap();
        let zb = null_space(&(md.a.transpose() * &jac));
        for j in 0..md.kbar() {
            let red = zb.transpose() * (&hess + jac.transpose() * md.q_block(j) * &jac) * &zb;
            prop_assert!(min_sym_eigenvalue(&red).is_none_or(|e| e > TAU_PD), "{}: model curvature", b.name);
        }

        let best = &solve_subproblem_enum(p, &xp, &hess).unwrap()[0];
        let scale = 1.0 + x.norm() + y.norm();
        prop_assert!((&best.d - &d).norm() <= 1e-9 * scale, "{}: d {} vs {}", b.name, best.d, d);
        prop_assert!((&best.y - &y).norm() <= 1e-9 * scale, "{}: y {} vs {}", b.name, best.y, y);
    }
    Ok(())
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn newton_iterates_stay_glued_identified_and_strict(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        for b in benchmarks::manifold_suite() {
            check_run(&b, &mut rng)?;
        }
    }
}

/// Error sequences of several shapes: quadratic, linear, superlinear and unstructured.
fn error_sequence(rng: &mut StdRng) -> Vec<f64> {
    let len = rng.random_range(4..9);
    let mut e = vec![rng.random_range(1e-3..1.0)];
    let shape = rng.random_range(0..4);
    let (c, rho): (f64, f64) = (rng.random_range(0.1..5.0), rng.random_range(0.05..0.9));
    for k in 1..len {
        let prev = e[k - 1];
        let next = match shape {
            0 => c * prev * prev,
            1 => rho * prev * rng.random_range(0.8..1.25),
            2 => prev * rho.powi(k as i32),
            _ => prev * rng.random_range(0.01..3.0),
        };
        e.push(next);
    }
    e
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn rate_class_ignores_error_scale(seed in any::<u64>(), log_scale in -3.0f64..3.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let e = error_sequence(&mut rng);
        let s = 10f64.powf(log_scale);
        let scaled: Vec<f64> = e.iter().map(|v| v * s).collect();
        // Both sequences must keep the same usable errors.
        prop_assume!(e.iter().chain(&scaled).all(|&v| v > 1e3 * USABLE_FLOOR));
        let (a, b) = (classify_rate(&e).class, classify_rate(&scaled).class);
        match (a, b) {
            (RateClass::Linear { rho: r1 }, RateClass::Linear { rho: r2 }) => prop_assert!((r1 - r2).abs() <= 1e-12 * r1),
            _ => prop_assert_eq!(a, b),
        }
    }
}
