use std::cmp::Ordering;

use crate::calculus::subdiff_hrep;
use crate::certify::{assemble_restricted_kkt, TAU_PD};
use crate::composite::CompositeProblem;
use crate::error::{Error, Result};
use crate::linalg::{columns_to_matrix, lstsq, lu_nonsingular, min_sym_eigenvalue, null_space, Matrix, Vector};
use crate::polyhedron::combinations;

const CONSISTENCY_TOL: f64 = 1e-9;
const DUPLICATE_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-12;
const FULL_ENUMERATION_LIMIT: usize = 10;

/// A critical point of the model `φ(d) = h(ĉ + ∇c d) + ½⟨d, H d⟩` found on one active structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub piece: usize,
    /// Hyperplanes held with equality.
    pub active: Vec<usize>,
    pub d: Vector,
    pub y: Vector,
    /// Multipliers on the outward normals of `piece` for the `active` hyperplanes.
    pub lambda: Vector,
    pub model_value: f64,
    /// Reduced model Hessian positive definite on this structure.
    pub model_sosc: bool,
    /// Unit direction in `d` along which the structure's solutions form a segment.
    pub segment: Option<Vector>,
}

fn structures(s: usize, m: usize) -> Vec<Vec<usize>> {
    let max_size = if s <= FULL_ENUMERATION_LIMIT { s } else { s.min(m) };
    let mut out = Vec::new();
    for size in 0..=max_size {
        combinations(s, size, |idx| out.push(idx.to_vec()));
    }
    out
}

/// All consistent critical pairs `(d, y)` of the model subproblem at `x̂` with curvature `H`,
/// sorted by model value with ties going to the lowest piece index.
///
/// For each piece `k` and hyperplane subset `S` the square system
/// `Hd + ∇cᵀy = 0`, `y = Q_k(ĉ + ∇cd) + b_k + Σ_S λ_j ω_kj a_j`, `⟨a_j, ĉ + ∇cd⟩ = α_j (j ∈ S)`
/// is solved and kept only if `λ ≥ 0`, `ĉ + ∇cd ∈ C_k` and `y ∈ ∂h(ĉ + ∇cd)`.
pub fn solve_subproblem_enum(p: &CompositeProblem, xhat: &Vector, hmat: &Matrix) -> Result<Vec<SubproblemSolution>> {
    let (n, m) = (p.n(), p.m());
    if hmat.shape() != (n, n) {
        return Err(Error::Dimension(format!("H must be {n}×{n}")));
    }
    let chat = p.c.value(xhat)?;
    let jac = p.c.jacobian(xhat)?;
    let h = &p.h;
    let mut found: Vec<SubproblemSolution> = Vec::new();
    for subset in structures(h.hyperplanes().len(), m) {
        for (k, piece) in h.pieces().iter().enumerate() {
            let l = subset.len();
            let normals: Vec<Vector> = subset.iter().map(|&j| &h.hyperplanes()[j].a * piece.sign(j)).collect();
            let nmat = columns_to_matrix(m, &normals);
            let kkt = assemble_restricted_kkt(hmat, &jac, &piece.q, &nmat, &nmat);
            let mut rhs = Vector::zeros(n + m + l);
            rhs.rows_mut(n, m).copy_from(&(&piece.q * &chat + &piece.b));
            for (i, &j) in subset.iter().enumerate() {
                let hp = &h.hyperplanes()[j];
                rhs[n + m + i] = piece.sign(j) * (hp.alpha - hp.a.dot(&chat));
            }
            let (z, segment) = if lu_nonsingular(&kkt) {
                (kkt.clone().lu().solve(&rhs).expect("nonsingular"), None)
            } else {
                let z = lstsq(&kkt, &rhs);
                if (&kkt * &z - &rhs).norm() > CONSISTENCY_TOL * (1.0 + rhs.norm()) {
                    continue;
                }
                let null = null_space(&kkt);
                let seg = null
                    .column_iter()
                    .map(|col| col.rows(0, n).into_owned())
                    .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(Ordering::Equal))
                    .filter(|dpart| dpart.norm() > 1e-8)
                    .map(|dpart| dpart.normalize());
                (z, seg)
            };
            let d = z.rows(0, n).into_owned();
            let y = z.rows(n, m).into_owned();
            let lambda = z.rows(n + m, l).into_owned();
            let scale = 1.0 + y.amax() + lambda.amax();
            if lambda.iter().any(|&v| v < -CONSISTENCY_TOL * scale) {
                continue;
            }
            let cnew = &chat + &jac * &d;
            if !h.piece_contains(k, &cnew) {
                continue;
            }
            match subdiff_hrep(h, &cnew) {
                Ok(sd) if sd.contains(&y) => {}
                Ok(_) | Err(Error::Domain) => continue,
                Err(e) => return Err(e),
            }
            let dup = found.iter().any(|f| {
                (&f.d - &d).amax() <= DUPLICATE_TOL * (1.0 + d.amax()) && (&f.y - &y).amax() <= DUPLICATE_TOL * (1.0 + y.amax())
            });
            if dup {
                continue;
            }
            let zbasis = if l == 0 { Matrix::identity(n, n) } else { null_space(&(nmat.transpose() * &jac)) };
            let red = zbasis.transpose() * (hmat + jac.transpose() * &piece.q * &jac) * &zbasis;
            let model_sosc = min_sym_eigenvalue(&red).is_none_or(|e| e > TAU_PD);
            found.push(SubproblemSolution {
                piece: k,
                active: subset.clone(),
                model_value: piece.value(&cnew) + 0.5 * d.dot(&(hmat * &d)),
                d,
                y,
                lambda,
                model_sosc,
                segment,
            });
        }
    }
    found.sort_by(|a, b| {
        if (a.model_value - b.model_value).abs() <= TIE_TOL * (1.0 + a.model_value.abs()) {
            a.piece.cmp(&b.piece)
        } else {
            a.model_value.partial_cmp(&b.model_value).unwrap_or(Ordering::Equal)
        }
    });
    Ok(found)
}
