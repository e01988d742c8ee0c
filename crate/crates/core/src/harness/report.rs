use std::fmt::Write as _;
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::certify::{certify_subregularity, Conclusion, SubregularityCertificate};
use crate::composite::CompositeProblem;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::manifold::{build_manifold, ManifoldData};
use crate::plq::ValidationReport;
use crate::solver::{
    newton_solve, quasi_newton_solve, smooth_newton_solve, solve_subproblem_enum, HessianSchedule, IterationTrace,
    RestrictedState, SolveOptions,
};

use super::problem::{load_point, LoadedProblem, MethodName};
use super::rate::{classify_rate, RateClass, RateVerdict};

/// Largest AD-vs-FD Jacobian deviation accepted by `check-derivs`.
pub const JACOBIAN_TOL: f64 = 1e-6;
/// Largest AD-vs-FD weighted-Hessian deviation accepted by `check-derivs`.
pub const HESSIAN_TOL: f64 = 1e-5;
/// Random points drawn by `check-derivs --point random`.
pub const DERIV_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    Certify,
    Solve,
    Rate,
    CheckDerivs,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Certify => "certify",
            Command::Solve => "solve",
            Command::Rate => "rate",
            Command::CheckDerivs => "check-derivs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleName {
    #[default]
    Exact,
    Decay,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PointChoice {
    /// Reference solution if present, else the start point.
    #[default]
    Default,
    Random,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub method: Option<MethodName>,
    pub schedule: ScheduleName,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: u64,
    pub point: PointChoice,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            method: None,
            schedule: ScheduleName::Exact,
            tol: None,
            max_iter: None,
            seed: 42,
            point: PointChoice::Default,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub method: MethodName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleName>,
    pub converged: bool,
    pub iterations: usize,
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
    pub final_residual: f64,
    /// `distance` when a reference solution is known, else `residual-proxy`.
    pub error_measure: &'static str,
    pub errors: Vec<f64>,
    pub verdict: RateVerdict,
    /// Linearized points on the manifold at every iteration after the first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_gluing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_dm_ratio: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivSummary {
    pub points: usize,
    pub max_jacobian_deviation: f64,
    pub max_hessian_deviation: f64,
    pub max_hessian_asymmetry: f64,
    pub jacobian_tol: f64,
    pub hessian_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Command,
    pub problem: String,
    pub seed: u64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<SubregularityCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivatives: Option<DerivSummary>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub trace: Option<IterationTrace>,
}

impl Report {
    fn new(command: Command, loaded: &LoadedProblem, seed: u64) -> Self {
        Report {
            command,
            problem: loaded.name.clone(),
            seed,
            status: Status::Pass,
            validation: None,
            point: None,
            certificate: None,
            solve: None,
            derivatives: None,
            notes: Vec::new(),
            trace: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        };
        let _ = writeln!(out, "{} {}: {status} (seed {})", self.command.name(), self.problem, self.seed);
        if let Some(v) = &self.validation {
            let _ = writeln!(out, "  pieces: {}  probes: {}", v.pieces.len(), v.probes);
            let _ = writeln!(out, "  continuity residual: {:.3e}", v.continuity_max_residual);
            let _ = writeln!(out, "  convexity violation: {:.3e}", v.convexity_max_violation);
            let _ = writeln!(out, "  full-dimensional domain: {}", yes(v.full_dimensional));
            for f in &v.failures {
                let _ = writeln!(out, "  failure: {f}");
            }
            for w in &v.warnings {
                let _ = writeln!(out, "  warning: {w}");
            }
        }
        if let Some(x) = &self.point {
            let _ = writeln!(out, "  point: {}", fmt_vec(x));
        }
        if let Some(c) = &self.certificate {
            let _ = writeln!(out, "  BCQ: {}  TC: {}  SC: {}", yes(c.bcq), yes(c.tc), yes(c.sc));
            let _ = writeln!(out, "  active pieces: {}  unique multiplier: {}", c.kbar, yes(c.m_singleton));
            if let Some(ps) = &c.partial_smoothness {
                let _ = writeln!(out, "  nondegenerate: {}  k-strict: {}", yes(ps.nondegenerate), ps.k_strict.map_or("n/a", yes));
            }
            if let Some(s) = &c.sosc {
                let _ = writeln!(out, "  SOSC: {} ({:?})", yes(s.pass), s.mode);
            }
            let concl = match c.conclusion {
                Conclusion::StronglyMetricallySubregular => "strongly metrically subregular",
                Conclusion::NotCertified => "not certified",
            };
            let _ = writeln!(out, "  conclusion: {concl}");
            for r in &c.reasons {
                let _ = writeln!(out, "  reason: {r}");
            }
            for n in &c.notes {
                let _ = writeln!(out, "  note: {n}");
            }
        }
        if let Some(s) = &self.solve {
            let _ = writeln!(out, "  method: {:?}  converged: {}  iterations: {}", s.method, yes(s.converged), s.iterations);
            let _ = writeln!(out, "  x: {}", fmt_vec(&s.final_x));
            let _ = writeln!(out, "  y: {}", fmt_vec(&s.final_y));
            let _ = writeln!(out, "  residual: {:.3e}", s.final_residual);
            let _ = writeln!(out, "  errors ({}): {}", s.error_measure, fmt_vec(&s.errors));
            let _ = writeln!(out, "  rate: {}", s.verdict.class.label());
            if let Some(r) = &s.verdict.reason {
                let _ = writeln!(out, "  rate note: {r}");
            }
            if let Some(i) = s.identified {
                let _ = writeln!(out, "  manifold identified: {}", yes(i));
            }
            if let Some(g) = s.max_gluing {
                let _ = writeln!(out, "  max gluing gap: {g:.3e}");
            }
            if let Some(dm) = s.final_dm_ratio {
                let _ = writeln!(out, "  final dm ratio: {dm:.3e}");
            }
            for w in &s.warnings {
                let _ = writeln!(out, "  warning: {w}");
            }
        }
        if let Some(d) = &self.derivatives {
            let _ = writeln!(out, "  points: {}", d.points);
            let _ = writeln!(out, "  jacobian deviation: {:.3e} (tol {:.0e})", d.max_jacobian_deviation, d.jacobian_tol);
            let _ = writeln!(out, "  hessian deviation: {:.3e} (tol {:.0e})", d.max_hessian_deviation, d.hessian_tol);
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// A multiplier guess at `x`: the gradient of the first piece containing `c(x)`.
pub fn default_multiplier(p: &CompositeProblem, x: &Vector) -> Result<Vector> {
    let cx = p.c.value(x)?;
    let prof = p.h.eval_with_active(&cx)?;
    let k = *prof.active_pieces.first().ok_or(Error::Domain)?;
    Ok(p.h.pieces()[k].gradient(&cx))
}

/// The manifold used by Newton's method: at `c(x̄)` when a reference is known, else at `c(x⁰)`,
/// else at the first linearized point of the enumeration subproblem.
pub fn newton_manifold(
    p: &CompositeProblem,
    reference: Option<&Vector>,
    x0: &Vector,
    y0: &Vector,
) -> Result<(ManifoldData, &'static str)> {
    let base = reference.unwrap_or(x0);
    let label = if reference.is_some() { "reference" } else { "start" };
    match build_manifold(&p.h, &p.c.value(base)?) {
        Ok(md) => return Ok((md, label)),
        Err(Error::SmoothCase) | Err(Error::Domain) => {}
        Err(e) => return Err(e),
    }
    let hmat = p.c.weighted_hessian(x0, y0)?;
    let sols = solve_subproblem_enum(p, x0, &hmat)?;
    let Some(best) = sols.first() else {
        return Err(Error::Regime("no model critical point to build an active manifold from".into()));
    };
    let lin = p.c.value(x0)? + p.c.jacobian(x0)? * &best.d;
    match build_manifold(&p.h, &lin) {
        Ok(md) => Ok((md, "first linearized point")),
        Err(Error::SmoothCase) | Err(Error::Domain) => {
            Err(Error::Regime("fewer than two pieces are active; use the smooth or enumeration method".into()))
        }
        Err(e) => Err(e),
    }
}

fn start_point(loaded: &LoadedProblem, opts: &RunOptions) -> Result<(Vector, Vector)> {
    let p = &loaded.problem;
    let (x, y) = match &opts.point {
        PointChoice::File(path) => load_point(path, p.n(), p.m())?,
        PointChoice::Random => return Err(Error::Argument("solvers need a start point, not a random one".into())),
        PointChoice::Default => {
            loaded.start.clone().ok_or_else(|| Error::Argument("the problem file has no start point".into()))?
        }
    };
    let y = match y {
        Some(y) => y,
        None => default_multiplier(p, &x)?,
    };
    Ok((x, y))
}

fn run_solver(loaded: &LoadedProblem, opts: &RunOptions, report: &mut Report) -> Result<()> {
    let p = &loaded.problem;
    let method = opts.method.or(loaded.options.method).unwrap_or(MethodName::Newton);
    let sopts = SolveOptions {
        tol: opts.tol.or(loaded.options.tol).unwrap_or(1e-12),
        max_iter: opts.max_iter.or(loaded.options.max_iter).unwrap_or(50),
        reference: loaded.reference.clone(),
    };
    let (x0, y0) = start_point(loaded, opts)?;
    let mut schedule_used = None;
    let trace = match method {
        MethodName::Newton => {
            let (md, source) = newton_manifold(p, loaded.reference.as_ref().map(|r| &r.0), &x0, &y0)?;
            report.notes.push(format!("active manifold built at the {source} ({} pieces, {} hyperplanes)", md.kbar(), md.ell()));
            let start = RestrictedState::from_xy(p, &md, x0, y0)?;
            newton_solve(p, &md, start, &sopts)?
        }
        MethodName::Smooth => smooth_newton_solve(p, x0, y0, &sopts)?,
        MethodName::Enum | MethodName::Quasi => {
            let name = if method == MethodName::Enum { ScheduleName::Exact } else { opts.schedule };
            let schedule = match name {
                ScheduleName::Exact => HessianSchedule::Exact,
                ScheduleName::Decay | ScheduleName::Fixed => {
                    let hbar = match &loaded.reference {
                        Some((xr, yr)) => p.c.weighted_hessian(xr, yr)?,
                        None => {
                            report.notes.push("no reference solution: the schedule uses the Hessian at the start".into());
                            p.c.weighted_hessian(&x0, &y0)?
                        }
                    };
                    if name == ScheduleName::Decay {
                        HessianSchedule::DecayingShift(hbar)
                    } else {
                        let n = hbar.nrows();
                        HessianSchedule::Fixed(hbar + Matrix::identity(n, n))
                    }
                }
            };
            if method == MethodName::Quasi {
                schedule_used = Some(name);
            }
            quasi_newton_solve(p, x0, y0, &mut |ctx| schedule.at(ctx), &sopts)?
        }
    };
    let errors = trace.error_sequence();
    let verdict = classify_rate(&errors);
    let later = trace.records.iter().skip(1);
    let identified = trace
        .records
        .iter()
        .skip(1)
        .any(|r| r.on_manifold.is_some())
        .then(|| trace.records.iter().skip(1).all(|r| r.on_manifold == Some(true)));
    let max_gluing = later.clone().filter_map(|r| r.gluing).reduce(f64::max);
    let min_mu = later.filter_map(|r| r.min_mu).reduce(f64::min);
    report.status = if trace.converged { Status::Pass } else { Status::Fail };
    if !trace.uses_reference() {
        report.notes.push("no reference solution: errors are KKT residuals used as a proxy".into());
    }
    report.solve = Some(SolveSummary {
        method,
        schedule: schedule_used,
        converged: trace.converged,
        iterations: trace.iterations(),
        final_x: trace.last().x.clone(),
        final_y: trace.last().y.clone(),
        final_residual: trace.final_residual(),
        error_measure: if trace.uses_reference() { "distance" } else { "residual-proxy" },
        errors,
        verdict,
        identified,
        max_gluing,
        min_mu,
        final_dm_ratio: trace.last().dm_ratio,
        warnings: trace.warnings.clone(),
    });
    report.trace = Some(trace);
    Ok(())
}

fn check_derivs(loaded: &LoadedProblem, opts: &RunOptions, report: &mut Report) -> Result<()> {
    let p = &loaded.problem;
    let (n, m) = (p.n(), p.m());
    let mut rng = StdRng::seed_from_u64(opts.seed);
    let points: Vec<(Vector, Vector)> = match &opts.point {
        PointChoice::File(path) => {
            let (x, y) = load_point(path, n, m)?;
            let y = y.unwrap_or_else(|| Vector::from_fn(m, |_, _| rng.random_range(-1.0..1.0)));
            vec![(x, y)]
        }
        PointChoice::Random | PointChoice::Default => (0..DERIV_POINTS)
            .map(|_| {
                let x = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                let y = Vector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
                (x, y)
            })
            .collect(),
    };
    let mut summary = DerivSummary {
        points: points.len(),
        max_jacobian_deviation: 0.0,
        max_hessian_deviation: 0.0,
        max_hessian_asymmetry: 0.0,
        jacobian_tol: JACOBIAN_TOL,
        hessian_tol: HESSIAN_TOL,
    };
    for (x, y) in &points {
        let d = p.c.derivative_check(x, y)?;
        summary.max_jacobian_deviation = summary.max_jacobian_deviation.max(d.jacobian_deviation);
        summary.max_hessian_deviation = summary.max_hessian_deviation.max(d.hessian_deviation);
        summary.max_hessian_asymmetry = summary.max_hessian_asymmetry.max(d.hessian_asymmetry);
    }
    let ok = summary.max_jacobian_deviation <= JACOBIAN_TOL && summary.max_hessian_deviation <= HESSIAN_TOL;
    report.status = if ok { Status::Pass } else { Status::Fail };
    report.derivatives = Some(summary);
    Ok(())
}

fn certify(loaded: &LoadedProblem, opts: &RunOptions, report: &mut Report) -> Result<()> {
    let p = &loaded.problem;
    let x = match &opts.point {
        PointChoice::File(path) => load_point(path, p.n(), p.m())?.0,
        PointChoice::Random => return Err(Error::Argument("certify needs a candidate point, not a random one".into())),
        PointChoice::Default => match (&loaded.reference, &loaded.start) {
            (Some((x, _)), _) => x.clone(),
            (None, Some((x, _))) => x.clone(),
            (None, None) => return Err(Error::Argument("no point to certify: pass --point or add a reference".into())),
        },
    };
    let cert = certify_subregularity(p, &x, opts.seed)?;
    report.status = match cert.conclusion {
        Conclusion::StronglyMetricallySubregular => Status::Pass,
        Conclusion::NotCertified => Status::Fail,
    };
    report.point = Some(x.iter().copied().collect());
    report.certificate = Some(cert);
    Ok(())
}

/// Runs one command on a loaded problem and assembles its report.
///
/// Failing checks yield a report with [`Status::Fail`]; input, regime and step problems are errors.
pub fn run_report(loaded: &LoadedProblem, command: Command, opts: &RunOptions) -> Result<Report> {
    let mut report = Report::new(command, loaded, opts.seed);
    if !loaded.validation.full_dimensional {
        report.notes.push("dom h has empty interior: the certificate chain is not supported by the theory here".into());
    }
    match command {
        Command::Validate => {
            report.status = if loaded.validation.all_pass { Status::Pass } else { Status::Fail };
            report.validation = Some(loaded.validation.clone());
        }
        Command::Certify => certify(loaded, opts, &mut report)?,
        Command::Solve => run_solver(loaded, opts, &mut report)?,
        Command::Rate => {
            run_solver(loaded, opts, &mut report)?;
            let s = report.solve.as_ref().expect("solver ran");
            report.status = if s.verdict.class == RateClass::None { Status::Fail } else { Status::Pass };
        }
        Command::CheckDerivs => check_derivs(loaded, opts, &mut report)?,
    }
    Ok(report)
}

/// Exit status for an error: 2 for bad input, 3 for solver regime, step or divergence failures.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Regime(_) | Error::Divergence(_) | Error::Step(_) | Error::SmoothCase | Error::Evaluation { .. } => 3,
        Error::Precondition(_) => 3,
        _ => 2,
    }
}
