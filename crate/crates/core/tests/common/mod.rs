//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use plqnewton::catalog;
use plqnewton::linalg::{null_space, Matrix, Vector};
use plqnewton::plq::{Piece, PlqFunction};
use plqnewton::polyhedron::PolyhedronH;
use rand::rngs::StdRng;
use rand::Rng;

fn entry(rng: &mut StdRng) -> f64 {
    // Small integers half the time so that degenerate configurations actually occur.
    if rng.random_bool(0.5) {
        f64::from(rng.random_range(-2i32..=2))
    } else {
        rng.random_range(-1.0..1.0)
    }
}

/// A random nonempty polyhedron in `R^m` together with a random `m×n` Jacobian.
pub fn random_cq_instance(rng: &mut StdRng) -> (PolyhedronH, Matrix) {
    let m = rng.random_range(1..=3usize);
    let n = rng.random_range(1..=m);
    let mut jac = Matrix::from_fn(m, n, |_, _| entry(rng));
    if n > 1 && rng.random_bool(0.2) {
        let c0 = jac.column(0).into_owned();
        jac.set_column(1, &c0);
    }
    let mut y0 = Vector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    if rng.random_bool(0.5) {
        let z = null_space(&jac.transpose());
        if z.ncols() > 0 {
            let coeff = Vector::from_fn(z.ncols(), |_, _| rng.random_range(-1.0..1.0));
            y0 = &z * coeff;
        }
    }
    let mut s = PolyhedronH::universe(m);
    for _ in 0..rng.random_range(0..m) {
        let row = Vector::from_fn(m, |_, _| entry(rng));
        if row.norm() > 0.0 {
            s.add_eq(row.clone(), row.dot(&y0));
        }
    }
    for _ in 0..rng.random_range(0..=4usize) {
        let row = Vector::from_fn(m, |_, _| entry(rng));
        if row.norm() == 0.0 {
            continue;
        }
        let slack = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) };
        s.add_le(row.clone(), row.dot(&y0) + slack);
        if slack == 0.0 && rng.random_bool(0.5) {
            s.add_le(-row.clone(), -row.dot(&y0));
        }
    }
    (s, jac)
}

/// A uniform point of the ball of radius `r` around the origin in `R^d`, kept at least `r/2` away.
pub fn annulus_point(rng: &mut StdRng, d: usize, r: f64) -> Vector {
    loop {
        let z = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let nz = z.norm();
        if (0.5..=1.0).contains(&nz) {
            return z * r;
        }
    }
}

/// A random convex PLQ function on `R^m` (`m ≤ 3`): a catalog function, scaled, plus a common
/// convex quadratic and affine term so every piece changes alike and continuity is kept.
pub fn random_plq(rng: &mut StdRng) -> PlqFunction {
    let base = match rng.random_range(0..8) {
        0 => catalog::l1_norm(1),
        1 => catalog::l1_norm(2),
        2 => catalog::l1_norm(3),
        3 => catalog::l1_plus_linear(2, &[rng.random_range(-1.0..1.0)]),
        4 => catalog::l1_squared_2d(),
        5 => catalog::max2(),
        6 => catalog::half_quadratic_ramp(),
        _ => catalog::nlp_halfspace(),
    };
    perturb(rng, &base)
}

/// `s·h + ½⟨u, Q₀u⟩ + ⟨b₀, u⟩ + β₀` with `s > 0` and `Q₀ ⪰ 0`.
pub fn perturb(rng: &mut StdRng, h: &PlqFunction) -> PlqFunction {
    let m = h.m();
    let s = rng.random_range(0.5..2.0);
    let l = Matrix::from_fn(m, m, |_, _| if rng.random_bool(0.5) { 0.0 } else { rng.random_range(-1.0..1.0) });
    let q0 = &l * l.transpose();
    let b0 = Vector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    let beta0 = rng.random_range(-1.0..1.0);
    let pieces = h
        .pieces()
        .iter()
        .map(|p| Piece { signs: p.signs.clone(), q: &p.q * s + &q0, b: &p.b * s + &b0, beta: p.beta * s + beta0 })
        .collect();
    PlqFunction::new(m, h.hyperplanes().to_vec(), pieces).expect("perturbed representation is valid")
}

/// A point of `R^m` whose coordinates land on the grid `{−1, −½, 0, ½, 1}` half the time, so
/// kinks of the catalog functions are hit often.
pub fn point_near_kinks(rng: &mut StdRng, m: usize) -> Vector {
    Vector::from_fn(m, |_, _| {
        if rng.random_bool(0.5) {
            f64::from(rng.random_range(-2i32..=2)) / 2.0
        } else {
            rng.random_range(-1.5..1.5)
        }
    })
}

pub fn unit_vector(rng: &mut StdRng, d: usize) -> Vector {
    loop {
        let z = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let nz = z.norm();
        if nz > 1e-3 && nz <= 1.0 {
            return z / nz;
        }
    }
}

/// Maximizer of a random linear objective over a bounded polyhedron.
pub fn random_vertex(rng: &mut StdRng, s: &PolyhedronH) -> Option<Vector> {
    let obj: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    s.to_lp().maximize(&obj).point().map(Vector::from_column_slice)
}

/// The average of several random vertices; generically in the relative interior.
pub fn interior_point(rng: &mut StdRng, s: &PolyhedronH) -> Option<Vector> {
    let mut sum = Vector::zeros(s.dim());
    for _ in 0..8 {
        sum += random_vertex(rng, s)?;
    }
    Some(sum / 8.0)
}

/// Functions with a nondegenerate manifold at `cbar`, perturbed by a common quadratic.
pub fn random_manifold_instance(rng: &mut StdRng) -> (PlqFunction, Vector) {
    let (h, cbar) = match rng.random_range(0..5) {
        0 => (catalog::max2(), vec![0.5, 0.5]),
        1 => (catalog::l1_norm(2), vec![0.0, 0.7]),
        2 => (catalog::l1_norm(3), vec![0.0, -0.4, 0.0]),
        3 => (catalog::l1_plus_linear(2, &[0.3]), vec![0.0, 0.0, 0.2]),
        _ => (catalog::l1_squared_2d(), vec![0.0, 1.0]),
    };
    (perturb(rng, &h), Vector::from_vec(cbar))
}

/// `(x_1, …, x_n)` written in rotated coordinates `x = U x′`, as expression text.
pub fn rotated_variables(u: &Matrix) -> Vec<String> {
    (0..u.nrows())
        .map(|i| {
            let terms: Vec<String> = (0..u.ncols()).map(|j| format!("({:?})*x{}", u[(i, j)], j + 1)).collect();
            format!("({})", terms.join(" + "))
        })
        .collect()
}

/// Substitutes `x1 … xn` in `text` by the given replacements.
pub fn substitute(text: &str, vars: &[String]) -> String {
    let mut out = String::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            let idx: usize = text[i + 1..j].parse().expect("digits");
            out.push_str(&vars[idx - 1]);
            i = j;
        } else {
            out.push(bytes[i] as char);
            i += 1;
        }
    }
    out
}

/// A random orthogonal `n×n` matrix.
pub fn random_orthogonal(rng: &mut StdRng, n: usize) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    g.qr().q()
}
