use crate::composite::CompositeProblem;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

use super::enumerate::solve_subproblem_enum;
use super::trace::{IterRecord, IterationTrace, Method};
use super::{diverged, SolveOptions};

/// What a Hessian schedule sees when asked for `B_k`.
pub struct ScheduleContext<'a> {
    pub iter: usize,
    pub x: &'a Vector,
    pub y: &'a Vector,
    /// `∇²(yc)(x)` at the current iterate.
    pub exact_hessian: &'a Matrix,
}

/// Ready-made choices of `B_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum HessianSchedule {
    /// `B_k = ∇²(y^k c)(x^k)`: the enumeration Newton method.
    Exact,
    /// `B_k = H̄ + 2^{−k} I`.
    DecayingShift(Matrix),
    /// `B_k = B` for all `k`.
    Fixed(Matrix),
}

impl HessianSchedule {
    pub fn at(&self, ctx: &ScheduleContext<'_>) -> Matrix {
        match self {
            HessianSchedule::Exact => ctx.exact_hessian.clone(),
            HessianSchedule::DecayingShift(hbar) => {
                let n = hbar.nrows();
                hbar + Matrix::identity(n, n) * 0.5f64.powi(ctx.iter as i32)
            }
            HessianSchedule::Fixed(b) => b.clone(),
        }
    }
}

/// Quasi-Newton iteration: each step solves the model subproblem with `H = B_k` by structure
/// enumeration and takes the best consistent critical pair.
pub fn quasi_newton_solve(
    p: &CompositeProblem,
    x0: Vector,
    y0: Vector,
    schedule: &mut dyn FnMut(&ScheduleContext<'_>) -> Matrix,
    opts: &SolveOptions,
) -> Result<IterationTrace> {
    let mut trace = IterationTrace::new(Method::QuasiNewton);
    let (mut x, mut y) = (x0.clone(), y0);
    trace.records.push(IterRecord::new(p, 0, &x, &y, opts.error(&x, &y)));
    for iter in 1..=opts.max_iter {
        if trace.last().residual() <= opts.tol {
            break;
        }
        let exact = p.c.weighted_hessian(&x, &y)?;
        let b = schedule(&ScheduleContext { iter: iter - 1, x: &x, y: &y, exact_hessian: &exact });
        let sols = solve_subproblem_enum(p, &x, &b)?;
        let Some(best) = sols.into_iter().next() else {
            return Err(Error::Step(format!("the model subproblem has no consistent critical point at iteration {iter}")));
        };
        let s = &best.d;
        // Normalized first: squaring tiny steps underflows.
        let dm = (s.amax() > 0.0).then(|| {
            let u = s / s.amax();
            ((&b - &exact) * &u).norm() / u.norm()
        });
        let lin = p.c.value(&x)? + p.c.jacobian(&x)? * s;
        x += s;
        y = best.y;
        if diverged(&x, &x0) {
            return Err(Error::Divergence(format!("iterates left every bounded region at iteration {iter}")));
        }
        let mut rec = IterRecord::new(p, iter, &x, &y, opts.error(&x, &y));
        rec.dm_ratio = dm;
        rec.model_sosc = Some(best.model_sosc);
        rec.linearized_pieces = Some(p.h.containing_pieces(&lin));
        if best.segment.is_some() {
            trace.warnings.push(format!("iteration {iter}: the chosen model solution is not isolated"));
        }
        trace.records.push(rec);
    }
    trace.converged = trace.last().residual() <= opts.tol;
    Ok(trace)
}
