//! The composite problem `min h(c(x))`: multipliers, constraint qualifications,
//! non-ascent directions and the KKT residual.

use serde::Serialize;

use crate::calculus::{dir_deriv_first, subdiff_hrep};
use crate::error::{Error, Result};
use crate::expr::SmoothMap;
use crate::ext::ExtReal;
use crate::linalg::{lstsq, null_space, rank, vstack, Matrix, Vector};
use crate::lp::LinearProgram;
use crate::plq::PlqFunction;
use crate::polyhedron::PolyhedronH;

/// Interior slack used to certify relative-interior membership.
pub const DELTA_RI: f64 = 1e-7;
const NONASCENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub h: PlqFunction,
    pub c: SmoothMap,
}

impl CompositeProblem {
    pub fn new(h: PlqFunction, c: SmoothMap) -> Result<Self> {
        if h.m() != c.m() {
            return Err(Error::Dimension(format!("h acts on R^{} but c has {} components", h.m(), c.m())));
        }
        Ok(CompositeProblem { h, c })
    }

    pub fn n(&self) -> usize {
        self.c.n()
    }

    pub fn m(&self) -> usize {
        self.c.m()
    }

    /// `f(x) = h(c(x))`.
    pub fn value(&self, x: &Vector) -> Result<ExtReal> {
        self.h.value(&self.c.value(x)?)
    }

    /// `c(x)` and `∇c(x)`, failing with a domain error when `h(c(x)) = +∞`.
    fn finite_linearization(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        let cx = self.c.value(x)?;
        if !self.h.value(&cx)?.is_finite() {
            return Err(Error::Domain);
        }
        Ok((cx, self.c.jacobian(x)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "y", rename_all = "snake_case")]
pub enum MultiplierStatus {
    Empty,
    Singleton(Vec<f64>),
    Nonsingleton,
}

/// `M(x) = {y ∈ ∂h(c(x)) : ∇c(x)ᵀy = v}`, usually with `v = 0`.
#[derive(Debug, Clone)]
pub struct MultiplierSet {
    pub polyhedron: PolyhedronH,
    pub status: MultiplierStatus,
    /// False when BCQ fails, so boundedness of the set is not guaranteed.
    pub theory_supported: bool,
}

impl MultiplierSet {
    pub fn singleton(&self) -> Option<Vector> {
        match &self.status {
            MultiplierStatus::Singleton(y) => Some(Vector::from_column_slice(y)),
            _ => None,
        }
    }
}

fn classify_set(poly: &PolyhedronH) -> MultiplierStatus {
    if poly.is_empty() {
        return MultiplierStatus::Empty;
    }
    let (rows, rhs) = poly.affine_hull();
    if poly.dim() - rank(&rows) > 0 {
        return MultiplierStatus::Nonsingleton;
    }
    // A point set: the affine-hull system pins it down exactly.
    MultiplierStatus::Singleton(lstsq(&rows, &rhs).iter().copied().collect())
}

pub fn multiplier_set(p: &CompositeProblem, x: &Vector) -> Result<MultiplierSet> {
    multiplier_set_for(p, x, &Vector::zeros(p.n()))
}

/// `Y(x, v) = {y ∈ ∂h(c(x)) : ∇c(x)ᵀy = v}`.
pub fn multiplier_set_for(p: &CompositeProblem, x: &Vector, v: &Vector) -> Result<MultiplierSet> {
    if v.len() != p.n() {
        return Err(Error::Dimension(format!("v has length {}, expected {}", v.len(), p.n())));
    }
    let (cx, jac) = p.finite_linearization(x)?;
    let sd = subdiff_hrep(&p.h, &cx)?;
    let polyhedron = sd.with_equalities(&jac.transpose(), v);
    let status = classify_set(&polyhedron);
    let theory_supported = cq_checks_for(&sd, &jac).bcq;
    Ok(MultiplierSet { polyhedron, status, theory_supported })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CqReport {
    pub bcq: bool,
    pub tc: bool,
    pub sc: bool,
    /// The unique point of `Null(∇cᵀ) ∩ ri ∂h` when SC holds.
    pub sc_multiplier: Option<Vec<f64>>,
    pub m_singleton: bool,
}

/// BCQ, TC, SC and multiplier uniqueness for a nonempty polyhedron `s` standing in for `∂h(c)`
/// and a linear map `jac` standing in for `∇c`. The recession cone of `s` plays the normal cone.
pub fn cq_checks_for(s: &PolyhedronH, jac: &Matrix) -> CqReport {
    let m = s.dim();
    let jt = jac.transpose();
    let zero_n = Vector::zeros(jt.nrows());

    let bcq = s.recession_cone().with_equalities(&jt, &zero_n).is_zero_cone();

    let implicit = s.implicit_equalities();
    let (hull_rows, hull_rhs) = s.affine_hull();
    let stacked = vstack(&hull_rows, &jt);
    let tc = rank(&stacked) == m;

    let mset = s.with_equalities(&jt, &zero_n);
    let m_singleton = matches!(classify_set(&mset), MultiplierStatus::Singleton(_));

    let mut sc_multiplier = None;
    if tc {
        let mut lp = LinearProgram::new(m);
        for (r, b) in s.eq_rows() {
            lp.add_eq(r.as_slice(), *b);
        }
        for (i, (r, b)) in s.ineq_rows().iter().enumerate() {
            if implicit[i] {
                lp.add_eq(r.as_slice(), *b);
            } else {
                lp.add_le(r.as_slice(), b - DELTA_RI);
            }
        }
        for i in 0..jt.nrows() {
            let row: Vec<f64> = jt.row(i).iter().copied().collect();
            lp.add_eq(&row, 0.0);
        }
        if lp.feasible_point().is_some() {
            let mut rhs = Vector::zeros(stacked.nrows());
            rhs.rows_mut(0, hull_rhs.len()).copy_from(&hull_rhs);
            sc_multiplier = Some(lstsq(&stacked, &rhs).iter().copied().collect());
        }
    }
    CqReport { bcq, tc, sc: sc_multiplier.is_some(), sc_multiplier, m_singleton }
}

pub fn check_cqs(p: &CompositeProblem, x: &Vector) -> Result<CqReport> {
    let (cx, jac) = p.finite_linearization(x)?;
    Ok(cq_checks_for(&subdiff_hrep(&p.h, &cx)?, &jac))
}

/// `d ∈ D(x)`, i.e. `h′(c(x); ∇c(x)d) ≤ 0`, without re-checking BCQ.
pub fn nonascent_unchecked(h: &PlqFunction, cx: &Vector, jac: &Matrix, d: &Vector) -> Result<bool> {
    let w = jac * d;
    Ok(dir_deriv_first(h, cx, &w)?.le(NONASCENT_TOL * (1.0 + w.norm())))
}

pub fn nonascent_contains(p: &CompositeProblem, x: &Vector, d: &Vector) -> Result<bool> {
    if d.len() != p.n() {
        return Err(Error::Dimension(format!("d has length {}, expected {}", d.len(), p.n())));
    }
    let (cx, jac) = p.finite_linearization(x)?;
    if !cq_checks_for(&subdiff_hrep(&p.h, &cx)?, &jac).bcq {
        return Err(Error::Precondition("BCQ fails, so the non-ascent cone has no polyhedral description".into()));
    }
    nonascent_unchecked(&p.h, &cx, &jac, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktResidual {
    /// `‖∇c(x)ᵀy‖`.
    pub stationarity: f64,
    /// Largest row violation of `y ∈ ∂h(c(x))`.
    pub subdiff_violation: ExtReal,
}

impl KktResidual {
    /// Sum of both parts; `+∞` off the domain.
    pub fn total(&self) -> f64 {
        match self.subdiff_violation {
            ExtReal::Finite(v) => self.stationarity + v,
            ExtReal::PlusInf => f64::INFINITY,
        }
    }
}

pub fn kkt_residual(p: &CompositeProblem, x: &Vector, y: &Vector) -> KktResidual {
    let infeasible = KktResidual { stationarity: f64::INFINITY, subdiff_violation: ExtReal::PlusInf };
    let (Ok(cx), Ok(jac)) = (p.c.value(x), p.c.jacobian(x)) else { return infeasible };
    if y.len() != p.m() {
        return infeasible;
    }
    let stationarity = (jac.transpose() * y).norm();
    let subdiff_violation = match subdiff_hrep(&p.h, &cx) {
        Ok(sd) => ExtReal::Finite(sd.max_violation(y)),
        Err(_) => ExtReal::PlusInf,
    };
    KktResidual { stationarity, subdiff_violation }
}

/// Orthonormal basis of `Null(∇c(x)ᵀ)` in `R^m`.
pub fn multiplier_nullspace(jac: &Matrix) -> Matrix {
    null_space(&jac.transpose())
}
