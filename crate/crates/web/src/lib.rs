//! WebAssembly bindings behind the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns either a flat `Float64Array` or a JSON string,
//! so the page needs no generated TypeScript types.

use plqnewton::benchmarks::{self, Benchmark};
use plqnewton::calculus::subdiff_hrep;
use plqnewton::catalog;
use plqnewton::harness::{classify_rate, default_multiplier};
use plqnewton::linalg::{Matrix, Vector};
use plqnewton::manifold::build_manifold;
use plqnewton::plq::PlqFunction;
use plqnewton::solver::{newton_solve, quasi_newton_solve, HessianSchedule, IterationTrace, RestrictedState, SolveOptions};
use plqnewton::{Error, ExtReal};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Half-width of the box the subdifferential polygon is clipped to.
const POLYGON_BOUND: f64 = 3.0;

fn plq_by_name(name: &str) -> Option<PlqFunction> {
    Some(match name {
        "l1" => catalog::l1_norm(2),
        "l1_squared" => catalog::l1_squared_2d(),
        "max" => catalog::max2(),
        "halfspace" => catalog::nlp_halfspace(),
        _ => return None,
    })
}

fn benchmark_by_name(name: &str) -> Option<Benchmark> {
    match name {
        "b1_minimax" => Some(benchmarks::b1_minimax()),
        "l1_kink" => Some(benchmarks::l1_kink()),
        _ => None,
    }
}

fn point(u1: f64, u2: f64) -> Vector {
    Vector::from_row_slice(&[u1, u2])
}

/// Row-major `ny × nx` samples of `f` over the box, `NaN` where `f` is `+∞` or undefined.
fn grid(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize, f: impl Fn(Vector) -> Option<f64>) -> Vec<f64> {
    let step = |lo: f64, hi: f64, k: usize, i: usize| if k > 1 { lo + (hi - lo) * i as f64 / (k - 1) as f64 } else { lo };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(f(point(step(xmin, xmax, nx, i), step(ymin, ymax, ny, j))).unwrap_or(f64::NAN));
        }
    }
    out
}

/// Values of a catalog PLQ function on a grid; empty for an unknown name.
#[wasm_bindgen]
pub fn plq_grid(name: &str, xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Vec<f64> {
    let Some(h) = plq_by_name(name) else { return Vec::new() };
    grid(xmin, xmax, ymin, ymax, nx, ny, |u| h.value_lenient(&u).finite())
}

/// Vertices `[y1, y2, y1, y2, …]` of `∂h(u)` clipped to a box, counterclockwise; empty outside `dom h`.
#[wasm_bindgen]
pub fn subdifferential_polygon(name: &str, u1: f64, u2: f64) -> Vec<f64> {
    let Some(h) = plq_by_name(name) else { return Vec::new() };
    match subdiff_hrep(&h, &point(u1, u2)) {
        Ok(sd) => sd.polygon_2d(POLYGON_BOUND).into_iter().flatten().collect(),
        Err(_) => Vec::new(),
    }
}

/// Objective `h(c(x))` of a two-variable benchmark on a grid.
#[wasm_bindgen]
pub fn objective_grid(bench: &str, xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Vec<f64> {
    let Some(b) = benchmark_by_name(bench) else { return Vec::new() };
    grid(xmin, xmax, ymin, ymax, nx, ny, |x| b.problem.value(&x).ok().and_then(ExtReal::finite))
}

fn trace_json(trace: &IterationTrace) -> Value {
    let errors: Vec<f64> = trace.records.iter().filter_map(|r| r.error).collect();
    let verdict = classify_rate(&errors);
    json!({
        "ok": true,
        "converged": trace.converged,
        "iterates": trace.records.iter().map(|r| r.x.clone()).collect::<Vec<_>>(),
        "errors": errors,
        "rate": verdict.class.label(),
        "warnings": trace.warnings,
    })
}

fn failure(e: Error) -> String {
    json!({ "ok": false, "message": e.to_string() }).to_string()
}

fn newton_from(b: &Benchmark, x0: Vector) -> Result<IterationTrace, Error> {
    let p = &b.problem;
    let y0 = default_multiplier(p, &x0)?;
    let md = build_manifold(&p.h, &p.c.value(&b.xbar)?)?;
    let opts = SolveOptions { reference: Some((b.xbar.clone(), b.ybar.clone())), ..SolveOptions::default() };
    newton_solve(p, &md, RestrictedState::from_xy(p, &md, x0, y0)?, &opts)
}

/// Manifold Newton iterates from a clicked start, as JSON
/// `{ok, converged, iterates, errors, rate, warnings}` or `{ok: false, message}`.
#[wasm_bindgen]
pub fn newton_trajectory(bench: &str, x1: f64, x2: f64) -> String {
    let Some(b) = benchmark_by_name(bench) else { return failure(Error::Argument(format!("unknown benchmark {bench}"))) };
    match newton_from(&b, point(x1, x2)) {
        Ok(trace) => trace_json(&trace).to_string(),
        Err(e) => failure(e),
    }
}

fn quasi_from(b: &Benchmark, x0: Vector, schedule: HessianSchedule, max_iter: usize) -> Result<IterationTrace, Error> {
    let p = &b.problem;
    let y0 = default_multiplier(p, &x0)?;
    let opts = SolveOptions { tol: 0.0, max_iter, reference: Some((b.xbar.clone(), b.ybar.clone())) };
    quasi_newton_solve(p, x0, y0, &mut |ctx| schedule.at(ctx), &opts)
}

/// Error sequences of Newton and two quasi-Newton schedules from the same start, as JSON
/// `{newton, decaying, fixed}` with one trace object (or failure) each.
#[wasm_bindgen]
pub fn rate_comparison(bench: &str, x1: f64, x2: f64) -> String {
    let Some(b) = benchmark_by_name(bench) else { return failure(Error::Argument(format!("unknown benchmark {bench}"))) };
    let x0 = point(x1, x2);
    let hbar = match b.problem.c.weighted_hessian(&b.xbar, &b.ybar) {
        Ok(h) => h,
        Err(e) => return failure(e),
    };
    let as_json = |r: Result<IterationTrace, Error>| match r {
        Ok(t) => trace_json(&t),
        Err(e) => json!({ "ok": false, "message": e.to_string() }),
    };
    json!({
        "newton": as_json(newton_from(&b, x0.clone())),
        "decaying": as_json(quasi_from(&b, x0.clone(), HessianSchedule::DecayingShift(hbar.clone()), 14)),
        "fixed": as_json(quasi_from(&b, x0, HessianSchedule::Fixed(hbar + Matrix::identity(2, 2)), 30)),
    })
    .to_string()
}
