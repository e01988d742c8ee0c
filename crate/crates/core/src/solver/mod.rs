//! Local Newton-type solvers for the KKT system of `min h(c(x))`.
//!
//! * [`newton_solve`] runs the manifold-restricted Newton method, solving one square
//!   system per active piece and checking that the solutions glue together.
//! * [`quasi_newton_solve`] solves the full model subproblem by enumerating active
//!   structures, with a user-supplied Hessian approximation.
//! * [`smooth_newton_solve`] is classical Newton on `(∇cᵀy, y − Qc − b) = 0` when a
//!   single piece is active at interior points.

mod enumerate;
mod quasi;
mod restricted;
mod smooth;
mod trace;

pub use enumerate::{solve_subproblem_enum, SubproblemSolution};
pub use quasi::{quasi_newton_solve, HessianSchedule, ScheduleContext};
pub use restricted::{newton_solve, restricted_newton_step, RestrictedState};
pub use smooth::smooth_newton_solve;
pub use trace::{IterRecord, IterationTrace, Method};

use crate::linalg::Vector;

/// Gluing tolerance on accepted iterations, relative to `1 + ‖x‖ + ‖y‖`.
pub const GLUING_TOL: f64 = 1e-10;
/// Gluing violations above this abort the Newton run.
pub const GLUING_ABORT: f64 = 1e-8;
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Stop once the KKT residual is at most `tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Known solution `(x̄, ȳ)`, used for the error column.
    pub reference: Option<(Vector, Vector)>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-12, max_iter: 50, reference: None }
    }
}

impl SolveOptions {
    fn error(&self, x: &Vector, y: &Vector) -> Option<f64> {
        self.reference.as_ref().map(|(xr, yr)| (x - xr).norm() + (y - yr).norm())
    }
}

fn diverged(x: &Vector, x0: &Vector) -> bool {
    !x.iter().all(|v| v.is_finite()) || x.norm() > DIVERGENCE_FACTOR * x0.norm().max(1.0)
}
