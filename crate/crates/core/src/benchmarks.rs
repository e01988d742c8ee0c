//! Benchmark problems with known solutions.

use crate::catalog;
use crate::composite::CompositeProblem;
use crate::expr::SmoothMap;
use crate::harness::{MethodName, OptionsSpec, PointSpec, ProblemFile};
use crate::linalg::Vector;
use crate::plq::PlqFunction;

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: &'static str,
    pub problem: CompositeProblem,
    pub xbar: Vector,
    pub ybar: Vector,
    pub x0: Vector,
    pub y0: Vector,
}

fn build(name: &'static str, h: PlqFunction, c: &[&str], xbar: &[f64], ybar: &[f64], x0: &[f64], y0: &[f64]) -> Benchmark {
    let c = SmoothMap::parse(c, xbar.len()).expect("benchmark map parses");
    Benchmark {
        name,
        problem: CompositeProblem::new(h, c).expect("benchmark dimensions agree"),
        xbar: Vector::from_row_slice(xbar),
        ybar: Vector::from_row_slice(ybar),
        x0: Vector::from_row_slice(x0),
        y0: Vector::from_row_slice(y0),
    }
}

/// `max(c₁, c₂)` with `c = (x₁² + (x₂−1)², x₁² + (x₂+1)²)`; solution `x̄ = 0`, `ȳ = (½, ½)`, `k̄ = 2`.
pub fn b1_minimax() -> Benchmark {
    build(
        "b1_minimax",
        catalog::max2(),
        &["x1^2 + (x2 - 1)^2", "x1^2 + (x2 + 1)^2"],
        &[0.0, 0.0],
        &[0.5, 0.5],
        &[0.3, -0.2],
        &[0.7, 0.3],
    )
}

/// `‖c‖₁` with `c = (1 + eˣ¹ + x₂², 2x₁ + x₂² + x₁x₂)`; the second component has a kink at `x̄ = 0`,
/// `ȳ = (1, −½)`, `k̄ = 2`.
pub fn l1_kink() -> Benchmark {
    build(
        "l1_kink",
        catalog::l1_norm(2),
        &["1 + exp(x1) + x2^2", "2*x1 + x2^2 + x1*x2"],
        &[0.0, 0.0],
        &[1.0, -0.5],
        &[0.05, 0.1],
        &[1.0, -0.4],
    )
}

/// `|c₁| + |c₂| + c₃` on `R³` with both kinks active at `x̄ = 0`: four pieces meet, `ȳ = (0.3, −0.4, 1)`.
pub fn crossing4() -> Benchmark {
    build(
        "crossing4",
        catalog::l1_plus_linear(2, &[1.0]),
        &["x1 + x3^2", "x2 + x1*x3", "-0.3*x1 + 0.4*x2 + x3^2/2 + x1^2 + x2^2"],
        &[0.0, 0.0, 0.0],
        &[0.3, -0.4, 1.0],
        &[0.05, -0.05, 0.1],
        &[0.35, -0.35, 1.0],
    )
}

/// Zero-residual least squares `½‖c‖²` with `c = (x₁ − 1, 10(x₂ − x₁²))`; root `(1, 1)`.
pub fn least_squares() -> Benchmark {
    build(
        "least_squares",
        catalog::half_squared_norm(2),
        &["x1 - 1", "10*(x2 - x1^2)"],
        &[1.0, 1.0],
        &[0.0, 0.0],
        &[0.0, 0.0],
        &[-1.0, 0.0],
    )
}

/// `max(c₁, c₂)` with `c = ((x₂−1)², (x₂+1)²)`: flat in `x₁`, so second-order sufficiency fails.
pub fn flat_b1() -> Benchmark {
    build("flat_b1", catalog::max2(), &["(x2 - 1)^2", "(x2 + 1)^2"], &[0.0, 0.0], &[0.5, 0.5], &[0.3, -0.2], &[0.7, 0.3])
}

/// `max(−c₁, −c₂)` for the B1 map: the stationary point `x̄ = 0` is a maximizer along the manifold.
pub fn negated_b1() -> Benchmark {
    build(
        "negated_b1",
        catalog::max2(),
        &["-(x1^2 + (x2 - 1)^2)", "-(x1^2 + (x2 + 1)^2)"],
        &[0.0, 0.0],
        &[0.5, 0.5],
        &[0.3, -0.2],
        &[0.7, 0.3],
    )
}

/// `max(c₁, c₂)` with `c₁ = c₂ = x₁² + 1` on `R²`: constant in `x₂` and the multiplier set at `0` is a segment.
pub fn flat_degenerate() -> Benchmark {
    build("flat_degenerate", catalog::max2(), &["x1^2 + 1", "x1^2 + 1"], &[0.0, 0.0], &[0.5, 0.5], &[0.3, -0.2], &[0.7, 0.3])
}

/// The benchmarks that satisfy the hypotheses of the manifold Newton theory.
pub fn manifold_suite() -> Vec<Benchmark> {
    vec![b1_minimax(), l1_kink(), crossing4()]
}

pub fn all() -> Vec<Benchmark> {
    vec![b1_minimax(), l1_kink(), crossing4(), least_squares(), flat_b1(), negated_b1(), flat_degenerate()]
}

impl Benchmark {
    /// File form, with the reference solution and start point filled in.
    pub fn to_problem_file(&self) -> ProblemFile {
        let method = if self.problem.h.pieces().len() == 1 { MethodName::Smooth } else { MethodName::Newton };
        ProblemFile {
            name: Some(self.name.to_string()),
            n: self.problem.n(),
            m: self.problem.m(),
            h: self.problem.h.to_spec(),
            c: self.problem.c.sources().to_vec(),
            reference: Some(PointSpec { x: self.xbar.iter().copied().collect(), y: Some(self.ybar.iter().copied().collect()) }),
            start: Some(PointSpec { x: self.x0.iter().copied().collect(), y: Some(self.y0.iter().copied().collect()) }),
            options: OptionsSpec { method: Some(method), tol: Some(1e-12), max_iter: Some(50) },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks")
    }

    #[test]
    fn files_match_builders() {
        for b in all() {
            let path = dir().join(format!("{}.json", b.name));
            if std::env::var_os("PLQNEWTON_WRITE_BENCHMARKS").is_some() {
                let text = serde_json::to_string_pretty(&b.to_problem_file()).unwrap() + "\n";
                std::fs::write(&path, text).unwrap();
            }
            let text = std::fs::read_to_string(&path).unwrap();
            let file: ProblemFile = serde_json::from_str(&text).unwrap();
            assert_eq!(file, b.to_problem_file(), "{}", b.name);
        }
    }

    #[test]
    fn references_are_kkt_points() {
        for b in all() {
            let r = crate::composite::kkt_residual(&b.problem, &b.xbar, &b.ybar);
            assert!(r.total() < 1e-14, "{}: {r:?}", b.name);
        }
    }
}
