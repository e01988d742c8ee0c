//! Second-order sufficiency, strong metric subregularity, and the restricted KKT matrices
//! behind the manifold Newton step.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::calculus::dir_deriv_second;
use crate::composite::{check_cqs, kkt_residual, multiplier_set, nonascent_unchecked, CompositeProblem, MultiplierStatus};
use crate::error::{Error, Result};
use crate::linalg::{columns_to_matrix, lu_nonsingular, min_sym_eigenvalue, null_space, Matrix, Vector};
use crate::manifold::{build_manifold, certify_partial_smoothness, ManifoldData, PsCertificate};
use crate::polyhedron::combinations;

/// Positive-definiteness threshold for reduced Hessians.
pub const TAU_PD: f64 = 1e-8;
const KKT_TOL: f64 = 1e-8;
const HEURISTIC_SAMPLES: usize = 1000;
const MAX_ENUMERATED_ACTIVE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SoscMode {
    /// `k̄ = 1` at an interior point of `dom h`: `Z = I`.
    Smooth,
    /// Nondegenerate manifold with SC: `D(x̄) = Null(Aᵀ∇c(x̄))`.
    CertifiedSubspace,
    /// Directions of `D(x̄)` sampled; not a proof.
    HeuristicSampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceCurvature {
    pub piece: usize,
    /// `None` when the reduced space is `{0}`.
    pub min_eigenvalue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoscReport {
    pub mode: SoscMode,
    /// Columns span the reduced space (empty in heuristic mode).
    #[serde(skip)]
    pub subspace_basis: Matrix,
    pub subspace_dim: usize,
    pub curvatures: Vec<PieceCurvature>,
    /// Heuristic mode: accepted directions and the smallest normalized curvature among them.
    pub sampled_directions: Option<usize>,
    pub sampled_min_curvature: Option<f64>,
    pub pass: bool,
}

/// `H + ∇cᵀQ∇c` reduced to the columns of `z`.
fn reduced_hessian(hess: &Matrix, jac: &Matrix, q: &Matrix, z: &Matrix) -> Matrix {
    z.transpose() * (hess + jac.transpose() * q * jac) * z
}

fn curvature_report(pieces: &[usize], qs: &[&Matrix], hess: &Matrix, jac: &Matrix, z: &Matrix) -> (Vec<PieceCurvature>, bool) {
    let curv: Vec<PieceCurvature> = pieces
        .iter()
        .zip(qs)
        .map(|(&piece, q)| PieceCurvature { piece, min_eigenvalue: min_sym_eigenvalue(&reduced_hessian(hess, jac, q, z)) })
        .collect();
    let pass = curv.iter().all(|c| c.min_eigenvalue.is_none_or(|e| e > TAU_PD));
    (curv, pass)
}

/// Second-order sufficient conditions at a KKT pair `(x̄, ȳ)`.
pub fn certify_sosc(
    p: &CompositeProblem,
    xbar: &Vector,
    ybar: &Vector,
    md: Option<&ManifoldData>,
    seed: u64,
) -> Result<SoscReport> {
    let res = kkt_residual(p, xbar, ybar);
    if !(res.total() <= KKT_TOL * (1.0 + ybar.norm())) {
        return Err(Error::Precondition(format!("(x, y) is not a KKT pair: residual {:e}", res.total())));
    }
    let cbar = p.c.value(xbar)?;
    let jac = p.c.jacobian(xbar)?;
    let hess = p.c.weighted_hessian(xbar, ybar)?;
    let n = p.n();
    let prof = p.h.eval_with_active(&cbar)?;
    let interior_smooth = prof.kbar == 1 && p.h.active_hyperplanes(&cbar).is_empty();

    if md.is_none() && interior_smooth {
        let k = prof.active_pieces[0];
        let z = Matrix::identity(n, n);
        let (curvatures, pass) = curvature_report(&[k], &[&p.h.pieces()[k].q], &hess, &jac, &z);
        return Ok(SoscReport {
            mode: SoscMode::Smooth,
            subspace_basis: z,
            subspace_dim: n,
            curvatures,
            sampled_directions: None,
            sampled_min_curvature: None,
            pass,
        });
    }
    if let Some(md) = md {
        if md.nondegenerate && check_cqs(p, xbar)?.sc {
            let z = null_space(&(md.a.transpose() * &jac));
            let qs: Vec<&Matrix> = (0..md.kbar()).map(|j| md.q_block(j)).collect();
            let (curvatures, pass) = curvature_report(&md.pieces, &qs, &hess, &jac, &z);
            return Ok(SoscReport {
                mode: SoscMode::CertifiedSubspace,
                subspace_dim: z.ncols(),
                subspace_basis: z,
                curvatures,
                sampled_directions: None,
                sampled_min_curvature: None,
                pass,
            });
        }
    }
    heuristic_sosc(p, &cbar, &jac, &hess, seed)
}

/// Samples `D(x̄)` through face subspaces `Null(A_Sᵀ∇c)` and random directions.
fn heuristic_sosc(p: &CompositeProblem, cbar: &Vector, jac: &Matrix, hess: &Matrix, seed: u64) -> Result<SoscReport> {
    let n = p.n();
    let m = p.m();
    let mut rng = StdRng::seed_from_u64(seed);
    let active = p.h.active_hyperplanes(cbar);
    let mut candidates: Vec<Vector> = Vec::new();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    if active.len() <= MAX_ENUMERATED_ACTIVE {
        for size in 0..=active.len() {
            combinations(active.len(), size, |idx| subsets.push(idx.iter().map(|&i| active[i]).collect()));
        }
    } else {
        subsets.push(Vec::new());
        subsets.push(active.clone());
    }
    for s in &subsets {
        let normals: Vec<Vector> = s.iter().map(|&j| p.h.hyperplanes()[j].a.clone()).collect();
        let a_s = columns_to_matrix(m, &normals);
        let z = if s.is_empty() { Matrix::identity(n, n) } else { null_space(&(a_s.transpose() * jac)) };
        for col in z.column_iter() {
            candidates.push(col.into_owned());
            candidates.push(-col.into_owned());
        }
        if z.ncols() > 1 {
            for _ in 0..8 {
                let w = Vector::from_fn(z.ncols(), |_, _| rng.random_range(-1.0..1.0));
                candidates.push(&z * w);
            }
        }
    }
    while candidates.len() < HEURISTIC_SAMPLES {
        candidates.push(Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)));
    }
    let mut accepted = 0;
    let mut worst = f64::INFINITY;
    for d in &candidates {
        let norm = d.norm();
        if norm < 1e-12 {
            continue;
        }
        let d = d / norm;
        if !nonascent_unchecked(&p.h, cbar, jac, &d)? {
            continue;
        }
        if let Some(h2) = dir_deriv_second(&p.h, cbar, &(jac * &d))?.finite() {
            accepted += 1;
            worst = worst.min(h2 + d.dot(&(hess * &d)));
        }
    }
    Ok(SoscReport {
        mode: SoscMode::HeuristicSampled,
        subspace_basis: Matrix::zeros(n, 0),
        subspace_dim: 0,
        curvatures: Vec::new(),
        sampled_directions: Some(accepted),
        sampled_min_curvature: worst.is_finite().then_some(worst),
        pass: worst > TAU_PD,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    StronglyMetricallySubregular,
    NotCertified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubregularityCertificate {
    pub bcq: bool,
    pub tc: bool,
    pub sc: bool,
    pub multipliers: MultiplierStatus,
    pub m_singleton: bool,
    pub kbar: usize,
    pub partial_smoothness: Option<PsCertificate>,
    pub sosc: Option<SoscReport>,
    pub conclusion: Conclusion,
    pub reasons: Vec<String>,
    pub notes: Vec<String>,
}

/// Strong metric subregularity of the KKT mapping at `x̄` via multiplier uniqueness and SOSC.
pub fn certify_subregularity(p: &CompositeProblem, xbar: &Vector, seed: u64) -> Result<SubregularityCertificate> {
    let cbar = p.c.value(xbar)?;
    let prof = p.h.eval_with_active(&cbar)?;
    if !prof.value.is_finite() {
        return Err(Error::Domain);
    }
    let cq = check_cqs(p, xbar)?;
    let ms = multiplier_set(p, xbar)?;
    let mut cert = SubregularityCertificate {
        bcq: cq.bcq,
        tc: cq.tc,
        sc: cq.sc,
        m_singleton: ms.singleton().is_some(),
        multipliers: ms.status.clone(),
        kbar: prof.kbar,
        partial_smoothness: None,
        sosc: None,
        conclusion: Conclusion::NotCertified,
        reasons: Vec::new(),
        notes: vec!["c is assumed C³; third derivatives are not checked".into()],
    };
    if prof.kbar == 1 && !p.h.active_hyperplanes(&cbar).is_empty() {
        cert.notes.push("one active piece at a boundary point of dom h: neither the manifold nor the smooth Newton theory applies; use the enumeration solver".into());
    }
    if !cq.bcq {
        cert.reasons.push("BCQ fails".into());
        return Ok(cert);
    }
    let Some(ybar) = ms.singleton() else {
        cert.reasons.push(match ms.status {
            MultiplierStatus::Empty => "multiplier set is empty: x is not stationary".into(),
            _ => "multiplier set is not a singleton".into(),
        });
        return Ok(cert);
    };
    let md = match build_manifold(&p.h, &cbar) {
        Ok(md) => Some(md),
        Err(Error::SmoothCase) => None,
        Err(e) => return Err(e),
    };
    if let Some(md) = &md {
        cert.partial_smoothness = Some(certify_partial_smoothness(&p.h, md, &cbar, &ybar));
    }
    let sosc = certify_sosc(p, xbar, &ybar, md.as_ref(), seed)?;
    if !sosc.pass {
        cert.reasons.push("second-order sufficient condition fails".into());
    } else if sosc.mode == SoscMode::HeuristicSampled {
        cert.reasons.push("second-order condition only checked on sampled directions".into());
    } else {
        cert.conclusion = Conclusion::StronglyMetricallySubregular;
    }
    cert.sosc = Some(sosc);
    Ok(cert)
}

/// `[[H, ∇cᵀ, 0], [−Q_j∇c, I, −AP_j], [Aᵀ∇c, 0, 0]]`.
pub fn assemble_restricted_kkt(hess: &Matrix, jac: &Matrix, q_j: &Matrix, ap_j: &Matrix, a: &Matrix) -> Matrix {
    let (m, n) = jac.shape();
    let l = a.ncols();
    let mut k = Matrix::zeros(n + m + l, n + m + l);
    k.view_mut((0, 0), (n, n)).copy_from(hess);
    k.view_mut((0, n), (n, m)).copy_from(&jac.transpose());
    k.view_mut((n, 0), (m, n)).copy_from(&(-(q_j * jac)));
    k.view_mut((n, n), (m, m)).copy_from(&Matrix::identity(m, m));
    k.view_mut((n, n + m), (m, l)).copy_from(&(-ap_j));
    k.view_mut((n + m, 0), (l, n)).copy_from(&(a.transpose() * jac));
    k
}

/// The restricted KKT matrix for block `j` at `(x, y)` and whether it passes the LU pivot test.
pub fn restricted_kkt_matrix(
    p: &CompositeProblem,
    md: &ManifoldData,
    x: &Vector,
    y: &Vector,
    j: usize,
) -> Result<(Matrix, bool)> {
    if j >= md.kbar() {
        return Err(Error::Argument(format!("block {j} out of range (k̄ = {})", md.kbar())));
    }
    let jac = p.c.jacobian(x)?;
    let hess = p.c.weighted_hessian(x, y)?;
    let k = assemble_restricted_kkt(&hess, &jac, md.q_block(j), &md.ap(j), &md.a);
    let ok = lu_nonsingular(&k);
    Ok((k, ok))
}
