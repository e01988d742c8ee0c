//! First- and second-order calculus of PLQ functions.

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{rows_to_matrix, Vector};
use crate::plq::{ActiveProfile, PlqFunction};
use crate::polyhedron::{cone_generators, PolyhedronH};

const TANGENT_TOL: f64 = 1e-10;
const CRITICAL_TOL: f64 = 1e-9;

fn finite_profile(h: &PlqFunction, c: &Vector) -> Result<ActiveProfile> {
    let prof = h.eval_with_active(c)?;
    if !prof.value.is_finite() {
        return Err(Error::Domain);
    }
    Ok(prof)
}

fn check_len(h: &PlqFunction, w: &Vector) -> Result<()> {
    if w.len() != h.m() {
        return Err(Error::Dimension(format!("direction has length {}, expected {}", w.len(), h.m())));
    }
    Ok(())
}

/// `w ∈ T(c|C_k)` given the hyperplanes active at `c`.
pub fn in_tangent_cone(h: &PlqFunction, k: usize, active: &[usize], w: &Vector) -> bool {
    let piece = &h.pieces()[k];
    let wn = w.norm();
    active.iter().all(|&j| {
        let a = &h.hyperplanes()[j].a;
        piece.sign(j) * a.dot(w) <= TANGENT_TOL * a.norm() * wn
    })
}

/// First active piece whose tangent cone at `c` contains `w`.
pub fn tangent_piece(h: &PlqFunction, prof: &ActiveProfile, c: &Vector, w: &Vector) -> Option<usize> {
    let active = h.active_hyperplanes(c);
    prof.active_pieces.iter().copied().find(|&k| in_tangent_cone(h, k, &active, w))
}

/// `h′(c; w)`.
pub fn dir_deriv_first(h: &PlqFunction, c: &Vector, w: &Vector) -> Result<ExtReal> {
    check_len(h, w)?;
    let prof = finite_profile(h, c)?;
    Ok(match tangent_piece(h, &prof, c, w) {
        Some(k) => ExtReal::Finite(h.pieces()[k].gradient(c).dot(w)),
        None => ExtReal::PlusInf,
    })
}

/// `h″(c; w)`.
pub fn dir_deriv_second(h: &PlqFunction, c: &Vector, w: &Vector) -> Result<ExtReal> {
    check_len(h, w)?;
    let prof = finite_profile(h, c)?;
    Ok(match tangent_piece(h, &prof, c, w) {
        Some(k) => ExtReal::Finite(w.dot(&(&h.pieces()[k].q * w))),
        None => ExtReal::PlusInf,
    })
}

/// `∂h(c) = ⋂_{k∈K(c)} {y : ⟨y − Q_k c − b_k, v⟩ ≤ 0 for all v ∈ T(c|C_k)}`, written with the
/// lineality of each tangent cone as equalities and its extreme rays as inequalities.
pub fn subdiff_hrep(h: &PlqFunction, c: &Vector) -> Result<PolyhedronH> {
    let prof = finite_profile(h, c)?;
    let m = h.m();
    let active = h.active_hyperplanes(c);
    let mut poly = PolyhedronH::universe(m);
    for &k in &prof.active_pieces {
        let piece = &h.pieces()[k];
        let g = piece.gradient(c);
        let rows: Vec<Vector> = active.iter().map(|&j| &h.hyperplanes()[j].a * piece.sign(j)).collect();
        let gens = cone_generators(&rows_to_matrix(m, &rows));
        for l in gens.lineality.column_iter() {
            let l = l.into_owned();
            let rhs = l.dot(&g);
            poly.add_eq(l, rhs);
        }
        for r in gens.rays {
            let rhs = r.dot(&g);
            poly.add_le(r, rhs);
        }
    }
    Ok(poly)
}

/// `d²h(c|y)(w)`: `h″(c;w)` on the critical cone `{w : h′(c;w) = ⟨y,w⟩}`, `+∞` off it.
pub fn second_subderivative(h: &PlqFunction, c: &Vector, y: &Vector, w: &Vector) -> Result<ExtReal> {
    check_len(h, y)?;
    let sd = subdiff_hrep(h, c)?;
    if !sd.contains(y) {
        return Err(Error::Argument("y is not a subgradient of h at c".into()));
    }
    match dir_deriv_first(h, c, w)? {
        ExtReal::Finite(d1) if (d1 - y.dot(w)).abs() <= CRITICAL_TOL * (1.0 + d1.abs() + y.norm() * w.norm()) => {
            dir_deriv_second(h, c, w)
        }
        _ => Ok(ExtReal::PlusInf),
    }
}

/// Normal cone generators and tangent cone of one piece at a point.
#[derive(Debug, Clone)]
pub struct ConePair {
    /// `ω_kj a_j` for the active `j`; the normal cone is their conic hull.
    pub normal: Vec<Vector>,
    /// `{v : ⟨ω_kj a_j, v⟩ ≤ 0}` over the active `j`.
    pub tangent: PolyhedronH,
}

impl ConePair {
    /// Largest `⟨v, w⟩` over normal generators `v` and unit tangent generators `w`.
    pub fn polarity_gap(&self) -> f64 {
        let m = self.tangent.dim();
        let rows: Vec<Vector> = self.tangent.ineq_rows().iter().map(|(r, _)| r.clone()).collect();
        let gens = cone_generators(&rows_to_matrix(m, &rows));
        let mut tangent_gens: Vec<Vector> = gens.rays;
        for l in gens.lineality.column_iter() {
            tangent_gens.push(l.into_owned());
            tangent_gens.push(-l.into_owned());
        }
        let mut gap = f64::NEG_INFINITY;
        for v in &self.normal {
            for w in &tangent_gens {
                gap = gap.max(v.dot(w) / v.norm().max(1e-300));
            }
        }
        gap.max(0.0)
    }
}

pub fn cone_pair(h: &PlqFunction, c: &Vector, k: usize) -> Result<ConePair> {
    let prof = finite_profile(h, c)?;
    if !prof.active_pieces.contains(&k) {
        return Err(Error::Argument(format!("piece {k} is not active at c")));
    }
    let piece = &h.pieces()[k];
    let normal: Vec<Vector> = h.active_hyperplanes(c).iter().map(|&j| &h.hyperplanes()[j].a * piece.sign(j)).collect();
    let mut tangent = PolyhedronH::universe(h.m());
    for v in &normal {
        tangent.add_le(v.clone(), 0.0);
    }
    Ok(ConePair { normal, tangent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    #[test]
    fn first_order_examples() {
        let l1 = catalog::l1_norm(2);
        assert_eq!(dir_deriv_first(&l1, &v(&[0.0, 0.0]), &v(&[1.0, -2.0])).unwrap(), ExtReal::Finite(3.0));
        let nlp = catalog::nlp_halfspace();
        assert_eq!(dir_deriv_first(&nlp, &v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap(), ExtReal::PlusInf);
        let ramp = catalog::half_quadratic_ramp();
        assert_eq!(dir_deriv_first(&ramp, &v(&[0.0]), &v(&[-1.0])).unwrap(), ExtReal::Finite(0.0));
        assert_eq!(dir_deriv_first(&nlp, &v(&[0.0, 1.0]), &v(&[1.0, 0.0])), Err(Error::Domain));
    }

    #[test]
    fn second_order_examples() {
        let l1 = catalog::l1_norm(2);
        assert_eq!(dir_deriv_second(&l1, &v(&[0.0, 0.0]), &v(&[0.3, -2.0])).unwrap(), ExtReal::Finite(0.0));
        let ramp = catalog::half_quadratic_ramp();
        assert_eq!(dir_deriv_second(&ramp, &v(&[0.0]), &v(&[1.0])).unwrap(), ExtReal::Finite(1.0));
        let sq = catalog::l1_squared_2d();
        assert_eq!(dir_deriv_second(&sq, &v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap(), ExtReal::Finite(8.0));
    }

    #[test]
    fn subdifferential_examples() {
        let l1 = catalog::l1_norm(2);
        let sd = subdiff_hrep(&l1, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(sd.dimension(), Some(2));
        let mut verts = sd.polygon_2d(5.0);
        verts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]];
        for (p, q) in verts.iter().zip(expect.iter()) {
            assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
        }
        assert_eq!(verts.len(), 4);

        let sq = catalog::l1_squared_2d();
        let sd = subdiff_hrep(&sq, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(sd.dimension(), Some(0));
        assert!(sd.contains(&v(&[0.0, 0.0])));

        let sd = subdiff_hrep(&l1, &v(&[1.0, 0.0])).unwrap();
        assert_eq!(sd.dimension(), Some(1));
        assert!(sd.contains(&v(&[1.0, -1.0])) && sd.contains(&v(&[1.0, 1.0])));
        assert!(!sd.contains(&v(&[1.0, 1.01])) && !sd.contains(&v(&[0.99, 0.0])));
    }

    #[test]
    fn second_subderivative_examples() {
        let l1 = catalog::l1_norm(2);
        let z = v(&[0.0, 0.0]);
        let y = v(&[1.0, 1.0]);
        assert_eq!(second_subderivative(&l1, &z, &y, &v(&[1.0, 1.0])).unwrap(), ExtReal::Finite(0.0));
        assert_eq!(second_subderivative(&l1, &z, &y, &v(&[-1.0, 0.0])).unwrap(), ExtReal::PlusInf);
        assert!(matches!(second_subderivative(&l1, &z, &v(&[2.0, 0.0]), &y), Err(Error::Argument(_))));

        let sq = catalog::l1_squared_2d();
        let c = v(&[1.0, 1.0]);
        let w = v(&[0.3, -0.7]);
        let expect = w.dot(&(&sq.pieces()[0].q * &w));
        assert_eq!(second_subderivative(&sq, &c, &v(&[4.0, 4.0]), &w).unwrap(), ExtReal::Finite(expect));
    }

    #[test]
    fn cone_polarity_on_catalog() {
        let l1 = catalog::l1_norm(2);
        for c in [v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, -2.0])] {
            let prof = l1.eval_with_active(&c).unwrap();
            for &k in &prof.active_pieces {
                assert!(cone_pair(&l1, &c, k).unwrap().polarity_gap() <= 1e-10);
            }
        }
    }
}
