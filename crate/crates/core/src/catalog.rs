//! Ready-made PLQ functions used by examples, benchmarks and the demo page.

use crate::linalg::{Matrix, Vector};
use crate::plq::{Hyperplane, Piece, PlqFunction};

fn orthant_signs(m: usize) -> Vec<Vec<f64>> {
    (0..1usize << m).map(|p| (0..m).map(|i| if p >> i & 1 == 0 { 1.0 } else { -1.0 }).collect()).collect()
}

fn axis_hyperplanes(m: usize) -> Vec<Hyperplane> {
    (0..m)
        .map(|i| {
            let mut a = Vector::zeros(m);
            a[i] = 1.0;
            Hyperplane { a, alpha: 0.0 }
        })
        .collect()
}

/// `‖u‖₁ + ⟨lin, (u_{k+1},…)⟩`: the first `k` coordinates carry the kinks, the rest enter linearly.
pub fn l1_plus_linear(k: usize, lin: &[f64]) -> PlqFunction {
    let m = k + lin.len();
    let pieces = orthant_signs(k)
        .into_iter()
        .map(|sigma| {
            let mut b = Vector::zeros(m);
            for i in 0..k {
                b[i] = sigma[i];
            }
            for (i, l) in lin.iter().enumerate() {
                b[k + i] = *l;
            }
            Piece { signs: sigma.iter().map(|&s| if s > 0.0 { -1 } else { 1 }).collect(), q: Matrix::zeros(m, m), b, beta: 0.0 }
        })
        .collect();
    let hyperplanes = axis_hyperplanes(k)
        .into_iter()
        .map(|hp| {
            let mut a = Vector::zeros(m);
            a.rows_mut(0, k).copy_from(&hp.a);
            Hyperplane { a, alpha: 0.0 }
        })
        .collect();
    PlqFunction::new(m, hyperplanes, pieces).expect("orthant representation is valid")
}

/// `‖u‖₁` on `R^m` with one piece per orthant.
pub fn l1_norm(m: usize) -> PlqFunction {
    l1_plus_linear(m, &[])
}

/// `‖u‖₁²` on `R²`; on the orthant with signs `σ` it is `½⟨u, 2σσᵀ u⟩`.
pub fn l1_squared_2d() -> PlqFunction {
    let pieces = orthant_signs(2)
        .into_iter()
        .map(|sigma| {
            let s = Vector::from_vec(sigma.clone());
            Piece {
                signs: sigma.iter().map(|&x| if x > 0.0 { -1 } else { 1 }).collect(),
                q: &s * s.transpose() * 2.0,
                b: Vector::zeros(2),
                beta: 0.0,
            }
        })
        .collect();
    PlqFunction::new(2, axis_hyperplanes(2), pieces).expect("orthant representation is valid")
}

/// `max(u₁, u₂)`: piece 0 is `u₁ ≥ u₂`, piece 1 is `u₁ ≤ u₂`.
pub fn max2() -> PlqFunction {
    let hp = vec![Hyperplane { a: Vector::from_row_slice(&[1.0, -1.0]), alpha: 0.0 }];
    let pieces = vec![
        Piece { signs: vec![-1], q: Matrix::zeros(2, 2), b: Vector::from_row_slice(&[1.0, 0.0]), beta: 0.0 },
        Piece { signs: vec![1], q: Matrix::zeros(2, 2), b: Vector::from_row_slice(&[0.0, 1.0]), beta: 0.0 },
    ];
    PlqFunction::new(2, hp, pieces).expect("max representation is valid")
}

/// `u₀ + δ(u₁ ≤ 0)`: a linear objective with one inequality constraint.
pub fn nlp_halfspace() -> PlqFunction {
    let hp = vec![Hyperplane { a: Vector::from_row_slice(&[0.0, 1.0]), alpha: 0.0 }];
    let pieces = vec![Piece { signs: vec![1], q: Matrix::zeros(2, 2), b: Vector::from_row_slice(&[1.0, 0.0]), beta: 0.0 }];
    PlqFunction::new(2, hp, pieces).expect("halfspace representation is valid")
}

/// `½u²` on `[0,∞)`, `0` on `[−1,0]`, `+∞` below `−1`.
pub fn half_quadratic_ramp() -> PlqFunction {
    let hp = vec![
        Hyperplane { a: Vector::from_row_slice(&[1.0]), alpha: 0.0 },
        Hyperplane { a: Vector::from_row_slice(&[-1.0]), alpha: 1.0 },
    ];
    let pieces = vec![
        Piece { signs: vec![-1, 1], q: Matrix::identity(1, 1), b: Vector::zeros(1), beta: 0.0 },
        Piece { signs: vec![1, 1], q: Matrix::zeros(1, 1), b: Vector::zeros(1), beta: 0.0 },
    ];
    PlqFunction::new(1, hp, pieces).expect("ramp representation is valid")
}

/// `½‖u‖²` with a single piece and no hyperplanes.
pub fn half_squared_norm(m: usize) -> PlqFunction {
    let pieces = vec![Piece { signs: vec![], q: Matrix::identity(m, m), b: Vector::zeros(m), beta: 0.0 }];
    PlqFunction::new(m, vec![], pieces).expect("smooth representation is valid")
}
