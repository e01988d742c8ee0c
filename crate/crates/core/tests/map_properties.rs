//! Randomized properties of the expression layer and of the composite problem: derivatives,
//! printing, the chain rule, constraint qualifications and multiplier sets.

mod common;

use common::{
    point_near_kinks, random_cq_instance, random_orthogonal, random_plq, random_vertex, rotated_variables, substitute,
    unit_vector,
};
use plqnewton::benchmarks;
use plqnewton::calculus::{dir_deriv_first, subdiff_hrep};
use plqnewton::composite::{cq_checks_for, multiplier_set, CompositeProblem, MultiplierStatus};
use plqnewton::expr::{parse_expr, SmoothMap};
use plqnewton::linalg::{Matrix, Vector};
use plqnewton::lp::LpOutcome;
use plqnewton::ExtReal;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(11), failure_persistence: None, ..ProptestConfig::default() }
}

/// Random expression text over `x1..xn`; divisions, logarithms and roots get arguments bounded away from
/// their singularities so every expression is smooth everywhere.
fn random_expr(rng: &mut StdRng, depth: u32, n: usize) -> String {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..3) {
            0 => format!("{}", rng.random_range(-3i32..=3)),
            1 => format!("{:.3}", rng.random_range(-2.0..2.0)),
            _ => format!("x{}", rng.random_range(1..=n)),
        };
    }
    let mut sub = || random_expr(rng, depth - 1, n);
    let (a, b) = (sub(), sub());
    match rng.random_range(0..11) {
        0 => format!("{a} + {b}"),
        1 => format!("{a} - ({b})"),
        2 => format!("({a})*({b})"),
        3 => format!("({a}) / (1 + ({b})^2)"),
        4 => format!("({a})^{}", rng.random_range(1..=3)),
        5 => format!("-({a})"),
        6 => format!("sin({a})"),
        7 => format!("cos({a}) * x1"),
        8 => format!("exp(({a})/4)"),
        9 => format!("log(1 + ({a})^2)"),
        _ => format!("sqrt(2 + cos({a}))"),
    }
}

fn random_map(rng: &mut StdRng) -> (SmoothMap, Vector, Vector) {
    let n = rng.random_range(1..=3);
    let m = rng.random_range(1..=3);
    let comps: Vec<String> = (0..m).map(|_| random_expr(rng, 4, n)).collect();
    let c = SmoothMap::parse(&comps, n).unwrap();
    let x = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let y = Vector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    (c, x, y)
}

fn central_jacobian(c: &SmoothMap, x: &Vector, h: f64) -> Matrix {
    let mut jac = Matrix::zeros(c.m(), c.n());
    for j in 0..c.n() {
        let mut e = Vector::zeros(c.n());
        e[j] = h;
        jac.set_column(j, &((c.value(&(x + &e)).unwrap() - c.value(&(x - &e)).unwrap()) / (2.0 * h)));
    }
    jac
}

fn central_hessian(c: &SmoothMap, x: &Vector, y: &Vector, h: f64) -> Matrix {
    let f = |z: Vector| c.value(&z).unwrap().dot(y);
    let n = c.n();
    Matrix::from_fn(n, n, |i, j| {
        let mut ei = Vector::zeros(n);
        let mut ej = Vector::zeros(n);
        ei[i] = h;
        ej[j] = h;
        (f(x + &ei + &ej) - f(x + &ei - &ej) - f(x - &ei + &ej) + f(x - &ei - &ej)) / (4.0 * h * h)
    })
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn automatic_derivatives_match_central_differences(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (c, x, y) = random_map(&mut rng);
        let v = c.value(&x).unwrap();
        prop_assume!(v.amax() < 1e2);
        let jac = c.jacobian(&x).unwrap();
        let dj = (&jac - central_jacobian(&c, &x, 1e-5)).amax();
        prop_assert!(dj <= 1e-6 * (1.0 + jac.amax()), "jacobian off by {dj:e} for {:?}", c.sources());
        let hess = c.weighted_hessian(&x, &y).unwrap();
        let dh = (&hess - central_hessian(&c, &x, &y, 2e-4)).amax();
        prop_assert!(dh <= 1e-5 * (1.0 + hess.amax()), "hessian off by {dh:e} for {:?}", c.sources());
    }

    #[test]
    fn weighted_hessian_is_symmetric(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (c, x, y) = random_map(&mut rng);
        let hess = c.weighted_hessian(&x, &y).unwrap();
        prop_assert!((&hess - hess.transpose()).amax() <= 1e-13 * (1.0 + hess.amax()));
    }

    #[test]
    fn printing_then_parsing_gives_the_same_tree(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.random_range(1..=3);
        let text = random_expr(&mut rng, 5, n);
        let ast = parse_expr(&text, n).unwrap();
        prop_assert_eq!(parse_expr(&ast.to_string(), n).unwrap(), ast);
    }
}

/// `Mx` plus a quadratic term, written out as expression text.
fn random_quadratic_map(rng: &mut StdRng, n: usize, m: usize) -> Vec<String> {
    (0..m)
        .map(|_| {
            let mut terms = Vec::new();
            for j in 1..=n {
                terms.push(format!("{:.3}*x{j}", rng.random_range(-2.0..2.0)));
                if rng.random_bool(0.4) {
                    let k = rng.random_range(1..=n);
                    terms.push(format!("{:.3}*x{j}*x{k}", rng.random_range(-1.0..1.0)));
                }
            }
            terms.join(" + ")
        })
        .collect()
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn chain_rule_bounds_and_support_function(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let h = random_plq(&mut rng);
        let n = rng.random_range(1..=3);
        let x = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        // Shift the constant term so that c(x) lands where the kinks of h are.
        let mut comps = random_quadratic_map(&mut rng, n, h.m());
        let target = point_near_kinks(&mut rng, h.m());
        let v = SmoothMap::parse(&comps, n).unwrap().value(&x).unwrap();
        for (i, s) in comps.iter_mut().enumerate() {
            s.push_str(&format!(" + ({:?})", target[i] - v[i]));
        }
        let p = CompositeProblem::new(h, SmoothMap::parse(&comps, n).unwrap()).unwrap();
        prop_assume!(p.value(&x).unwrap().is_finite());
        let cx = p.c.value(&x).unwrap();
        let jac = p.c.jacobian(&x).unwrap();
        let sd = subdiff_hrep(&p.h, &cx).unwrap();
        let d = unit_vector(&mut rng, n);
        let w = &jac * &d;
        let support = sd.to_lp().maximize(w.as_slice());
        match dir_deriv_first(&p.h, &cx, &w).unwrap() {
            ExtReal::Finite(d1) => {
                let LpOutcome::Optimal { value, .. } = support else {
                    return Err(TestCaseError::fail(format!("support LP: {support:?}")));
                };
                prop_assert!((value - d1).abs() <= 1e-9 * (1.0 + d1.abs()), "support {value} vs h′ {d1}");
                for _ in 0..8 {
                    if let Some(y) = random_vertex(&mut rng, &sd) {
                        prop_assert!(d1 >= (jac.transpose() * &y).dot(&d) - 1e-9);
                    }
                }
            }
            ExtReal::PlusInf => prop_assert!(matches!(support, LpOutcome::Unbounded)),
        }
    }

    #[test]
    fn qualification_conditions_are_nested(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (s, jac) = random_cq_instance(&mut rng);
        prop_assume!(!s.is_empty());
        let r = cq_checks_for(&s, &jac);
        prop_assert!(!r.sc || r.tc, "SC without TC");
        prop_assert!(!r.tc || r.bcq, "TC without BCQ");
    }
}

fn same_status(a: &MultiplierStatus, b: &MultiplierStatus) -> bool {
    match (a, b) {
        (MultiplierStatus::Singleton(u), MultiplierStatus::Singleton(v)) => {
            u.iter().zip(v).all(|(p, q)| (p - q).abs() <= 1e-8 * (1.0 + p.abs()))
        }
        _ => std::mem::discriminant(a) == std::mem::discriminant(b),
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn multiplier_status_survives_rotating_x(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        for b in benchmarks::all() {
            let u = random_orthogonal(&mut rng, b.xbar.len());
            let vars = rotated_variables(&u);
            let comps: Vec<String> = b.problem.c.sources().iter().map(|s| substitute(s, &vars)).collect();
            let rotated = CompositeProblem::new(b.problem.h.clone(), SmoothMap::parse(&comps, b.xbar.len()).unwrap()).unwrap();
            for x in [b.xbar.clone(), b.x0.clone()] {
                let xr = u.transpose() * &x;
                let s0 = multiplier_set(&b.problem, &x).unwrap().status;
                let s1 = multiplier_set(&rotated, &xr).unwrap().status;
                prop_assert!(same_status(&s0, &s1), "{}: {s0:?} vs {s1:?}", b.name);
            }
        }
    }
}
