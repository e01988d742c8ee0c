use crate::certify::{assemble_restricted_kkt, TAU_PD};
use crate::composite::CompositeProblem;
use crate::error::{Error, Result};
use crate::linalg::{min_sym_eigenvalue, null_space, solve_square, Vector};
use crate::manifold::{manifold_contains, mu_formula, stack_mu, ManifoldData, TAU_SC};

use super::trace::{IterRecord, IterationTrace, Method};
use super::{diverged, SolveOptions, GLUING_ABORT, GLUING_TOL};

/// `(x, y, μ_1, …, μ_k̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedState {
    pub x: Vector,
    pub y: Vector,
    pub mu: Vec<Vector>,
}

impl RestrictedState {
    /// Starts from `(x, y)` with `μ` read off the formula at `c(x)`.
    pub fn from_xy(p: &CompositeProblem, md: &ManifoldData, x: Vector, y: Vector) -> Result<Self> {
        let mu = mu_formula(md, &p.c.value(&x)?, &y);
        Ok(RestrictedState { x, y, mu })
    }
}

/// One Newton step on the restricted KKT system of block `j`; only `μ_j` of the result is updated.
pub fn restricted_newton_step(
    p: &CompositeProblem,
    md: &ManifoldData,
    state: &RestrictedState,
    j: usize,
) -> Result<RestrictedState> {
    if j >= md.kbar() {
        return Err(Error::Argument(format!("block {j} out of range (k̄ = {})", md.kbar())));
    }
    let (n, m, l) = (p.n(), p.m(), md.ell());
    let cx = p.c.value(&state.x)?;
    let jac = p.c.jacobian(&state.x)?;
    let hess = p.c.weighted_hessian(&state.x, &state.y)?;
    let k = assemble_restricted_kkt(&hess, &jac, md.q_block(j), &md.ap(j), &md.a);
    let mut rhs = Vector::zeros(n + m + l);
    rhs.rows_mut(n, m).copy_from(&(md.q_block(j) * &cx + md.b_block(j)));
    rhs.rows_mut(n + m, l).copy_from(&(&md.a_rhs - md.a.transpose() * &cx));
    let z = solve_square(&k, &rhs)
        .ok_or_else(|| Error::Step(format!("restricted KKT matrix for piece {} is singular", md.pieces[j])))?;
    let mut mu = state.mu.clone();
    mu[j] = z.rows(n + m, l).into_owned();
    Ok(RestrictedState { x: &state.x + z.rows(0, n), y: z.rows(n, m).into_owned(), mu })
}

fn record_state(p: &CompositeProblem, iter: usize, s: &RestrictedState, opts: &SolveOptions) -> IterRecord {
    let mut r = IterRecord::new(p, iter, &s.x, &s.y, opts.error(&s.x, &s.y));
    r.mu = stack_mu(&s.mu).iter().copied().collect();
    r
}

/// Manifold-restricted Newton iteration with per-iteration gluing, identification,
/// strict-positivity and model-curvature monitors.
pub fn newton_solve(
    p: &CompositeProblem,
    md: &ManifoldData,
    start: RestrictedState,
    opts: &SolveOptions,
) -> Result<IterationTrace> {
    if !md.nondegenerate {
        return Err(Error::Regime("the manifold is degenerate (A lacks full column rank)".into()));
    }
    let mut trace = IterationTrace::new(Method::Newton);
    let x0 = start.x.clone();
    let mut state = start;
    trace.records.push(record_state(p, 0, &state, opts));
    for iter in 1..=opts.max_iter {
        if trace.last().residual() <= opts.tol {
            break;
        }
        let steps = (0..md.kbar()).map(|j| restricted_newton_step(p, md, &state, j)).collect::<Result<Vec<_>>>()?;
        let reference = steps.last().expect("kbar >= 2");
        let scale = 1.0 + reference.x.norm() + reference.y.norm();
        let gluing =
            steps.iter().map(|s| ((&s.x - &reference.x).norm() + (&s.y - &reference.y).norm()) / scale).fold(0.0, f64::max);
        if !(gluing <= GLUING_ABORT) {
            return Err(Error::Divergence(format!("restricted solutions disagree by {gluing:e} at iteration {iter}")));
        }
        if gluing > GLUING_TOL {
            trace.warnings.push(format!("iteration {iter}: gluing defect {gluing:e} above {GLUING_TOL:e}"));
        }
        let next = RestrictedState {
            x: reference.x.clone(),
            y: reference.y.clone(),
            mu: steps.iter().enumerate().map(|(j, s)| s.mu[j].clone()).collect(),
        };
        if diverged(&next.x, &x0) {
            return Err(Error::Divergence(format!("iterates left every bounded region at iteration {iter}")));
        }

        let cx = p.c.value(&state.x)?;
        let jac = p.c.jacobian(&state.x)?;
        let lin = &cx + &jac * (&next.x - &state.x);
        let on_manifold = manifold_contains(&p.h, md, &lin);
        let min_mu = next.mu.iter().flat_map(|b| b.iter().copied()).fold(f64::INFINITY, f64::min);
        if min_mu <= TAU_SC {
            trace.warnings.push(format!("iteration {iter}: block multiplier {min_mu:e} is not strictly positive"));
        }
        let hess = p.c.weighted_hessian(&state.x, &state.y)?;
        let z = null_space(&(md.a.transpose() * &jac));
        let model_sosc = (0..md.kbar()).all(|j| {
            let red = z.transpose() * (&hess + jac.transpose() * md.q_block(j) * &jac) * &z;
            min_sym_eigenvalue(&red).is_none_or(|e| e > TAU_PD)
        });

        let mut rec = record_state(p, iter, &next, opts);
        rec.gluing = Some(gluing);
        rec.on_manifold = Some(on_manifold);
        rec.min_mu = Some(min_mu);
        rec.model_sosc = Some(model_sosc);
        rec.linearized_pieces = Some(p.h.containing_pieces(&lin));
        trace.records.push(rec);
        state = next;
    }
    trace.converged = trace.last().residual() <= opts.tol;
    Ok(trace)
}
