use crate::composite::CompositeProblem;
use crate::error::{Error, Result};
use crate::linalg::{solve_square, Matrix, Vector};
use crate::plq::PlqFunction;

use super::trace::{IterRecord, IterationTrace, Method};
use super::{diverged, SolveOptions};

/// `c` lies strictly inside `C_k`: every hyperplane row has slack beyond its activity tolerance.
fn strictly_inside(h: &PlqFunction, k: usize, c: &Vector) -> bool {
    h.hyperplanes().iter().enumerate().all(|(j, hp)| h.pieces()[k].sign(j) * hp.residual(c) < -hp.tau())
}

/// Classical Newton on `g(x, y) = (∇c(x)ᵀy, y − Q c(x) − b) = 0` for the single piece whose
/// interior holds `c(x⁰)`; every linearized point must stay in that interior.
pub fn smooth_newton_solve(p: &CompositeProblem, x0: Vector, y0: Vector, opts: &SolveOptions) -> Result<IterationTrace> {
    let (n, m) = (p.n(), p.m());
    let c0 = p.c.value(&x0)?;
    let Some(k) = (0..p.h.pieces().len()).find(|&k| strictly_inside(&p.h, k, &c0)) else {
        return Err(Error::Regime("c(x⁰) is not interior to a single piece; use the enumeration solver".into()));
    };
    let piece = &p.h.pieces()[k];
    let mut trace = IterationTrace::new(Method::Smooth);
    let (mut x, mut y) = (x0.clone(), y0);
    trace.records.push(IterRecord::new(p, 0, &x, &y, opts.error(&x, &y)));
    for iter in 1..=opts.max_iter {
        if trace.last().residual() <= opts.tol {
            break;
        }
        let cx = p.c.value(&x)?;
        let jac = p.c.jacobian(&x)?;
        let hess = p.c.weighted_hessian(&x, &y)?;
        let mut g = Vector::zeros(n + m);
        g.rows_mut(0, n).copy_from(&(jac.transpose() * &y));
        g.rows_mut(n, m).copy_from(&(&y - piece.gradient(&cx)));
        let mut dg = Matrix::zeros(n + m, n + m);
        dg.view_mut((0, 0), (n, n)).copy_from(&hess);
        dg.view_mut((0, n), (n, m)).copy_from(&jac.transpose());
        dg.view_mut((n, 0), (m, n)).copy_from(&(-(&piece.q * &jac)));
        dg.view_mut((n, n), (m, m)).copy_from(&Matrix::identity(m, m));
        let step = solve_square(&dg, &(-g)).ok_or_else(|| Error::Step(format!("∇g is singular at iteration {iter}")))?;
        let dx = step.rows(0, n).into_owned();
        let lin = &cx + &jac * &dx;
        if !strictly_inside(&p.h, k, &lin) {
            return Err(Error::Regime(format!("the linearized point left the interior of piece {k} at iteration {iter}")));
        }
        x += dx;
        y += step.rows(n, m);
        if diverged(&x, &x0) {
            return Err(Error::Divergence(format!("iterates left every bounded region at iteration {iter}")));
        }
        let mut rec = IterRecord::new(p, iter, &x, &y, opts.error(&x, &y));
        rec.linearized_pieces = Some(vec![k]);
        trace.records.push(rec);
    }
    trace.converged = trace.last().residual() <= opts.tol;
    Ok(trace)
}
