//! H-represented polyhedra and polyhedral cones.

use serde::Serialize;

use crate::linalg::{null_space, range_space, rank, rows_to_matrix, vstack, Matrix, Vector};
use crate::lp::{LinearProgram, LpOutcome};

/// Uniform slack for polyhedral membership tests.
pub const MEMBER_SLACK: f64 = 1e-9;
const IMPLICIT_TOL: f64 = 1e-9;

/// `{y : E y = e, F y ≤ f}` with every nonzero row scaled to unit norm.
#[derive(Debug, Clone)]
pub struct PolyhedronH {
    dim: usize,
    eq: Vec<(Vector, f64)>,
    ineq: Vec<(Vector, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyhedronRows {
    pub dim: usize,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ineq_rows: Vec<Vec<f64>>,
    pub ineq_rhs: Vec<f64>,
}

fn normalized(row: Vector, rhs: f64) -> (Vector, f64) {
    let n = row.norm();
    if n > 0.0 {
        (row / n, rhs / n)
    } else {
        (row, rhs)
    }
}

impl PolyhedronH {
    /// The whole space `R^dim`.
    pub fn universe(dim: usize) -> Self {
        PolyhedronH { dim, eq: Vec::new(), ineq: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add_eq(&mut self, row: Vector, rhs: f64) {
        assert_eq!(row.len(), self.dim);
        self.eq.push(normalized(row, rhs));
    }

    pub fn add_le(&mut self, row: Vector, rhs: f64) {
        assert_eq!(row.len(), self.dim);
        self.ineq.push(normalized(row, rhs));
    }

    pub fn eq_rows(&self) -> &[(Vector, f64)] {
        &self.eq
    }

    pub fn ineq_rows(&self) -> &[(Vector, f64)] {
        &self.ineq
    }

    pub fn intersect(&self, other: &PolyhedronH) -> PolyhedronH {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        out.eq.extend(other.eq.iter().cloned());
        out.ineq.extend(other.ineq.iter().cloned());
        out
    }

    /// Adds `rows · y = rhs` for every row of `rows`.
    pub fn with_equalities(&self, rows: &Matrix, rhs: &Vector) -> PolyhedronH {
        let mut out = self.clone();
        for i in 0..rows.nrows() {
            let r = rows.row(i).transpose();
            if r.norm() > 0.0 || rhs[i] != 0.0 {
                out.add_eq(r, rhs[i]);
            }
        }
        out
    }

    /// The recession cone: same rows, zero right-hand sides.
    pub fn recession_cone(&self) -> PolyhedronH {
        PolyhedronH {
            dim: self.dim,
            eq: self.eq.iter().map(|(r, _)| (r.clone(), 0.0)).collect(),
            ineq: self.ineq.iter().map(|(r, _)| (r.clone(), 0.0)).collect(),
        }
    }

    /// Largest row violation; zero inside the set.
    pub fn max_violation(&self, y: &Vector) -> f64 {
        let e = self.eq.iter().map(|(r, b)| (r.dot(y) - b).abs()).fold(0.0, f64::max);
        let f = self.ineq.iter().map(|(r, b)| r.dot(y) - b).fold(0.0, f64::max);
        e.max(f)
    }

    pub fn contains(&self, y: &Vector) -> bool {
        self.max_violation(y) <= MEMBER_SLACK * (1.0 + y.amax())
    }

    pub fn to_lp(&self) -> LinearProgram {
        let mut lp = LinearProgram::new(self.dim);
        for (r, b) in &self.eq {
            lp.add_eq(r.as_slice(), *b);
        }
        for (r, b) in &self.ineq {
            lp.add_le(r.as_slice(), *b);
        }
        lp
    }

    pub fn find_point(&self) -> Option<Vector> {
        self.to_lp().feasible_point().map(Vector::from_vec)
    }

    pub fn is_empty(&self) -> bool {
        self.find_point().is_none()
    }

    /// Flags, per inequality row, whether it holds with equality on the whole set.
    /// Empty sets report every row as implicit.
    pub fn implicit_equalities(&self) -> Vec<bool> {
        let lp = self.to_lp();
        let Some(p0) = lp.feasible_point() else { return vec![true; self.ineq.len()] };
        let mut implicit: Vec<Option<bool>> = vec![None; self.ineq.len()];
        let mark_slack = |x: &[f64], implicit: &mut Vec<Option<bool>>| {
            let x = Vector::from_column_slice(x);
            for (i, (r, b)) in self.ineq.iter().enumerate() {
                if b - r.dot(&x) > IMPLICIT_TOL * (1.0 + b.abs()) {
                    implicit[i] = Some(false);
                }
            }
        };
        mark_slack(&p0, &mut implicit);
        for i in 0..self.ineq.len() {
            if implicit[i].is_some() {
                continue;
            }
            let obj: Vec<f64> = self.ineq[i].0.iter().map(|v| -v).collect();
            match lp.maximize(&obj) {
                LpOutcome::Optimal { x, value } => {
                    let slack = self.ineq[i].1 + value;
                    if slack > IMPLICIT_TOL * (1.0 + self.ineq[i].1.abs()) {
                        mark_slack(&x, &mut implicit);
                        implicit[i] = Some(false);
                    } else {
                        implicit[i] = Some(true);
                    }
                }
                LpOutcome::Unbounded => implicit[i] = Some(false),
                LpOutcome::Infeasible => implicit[i] = Some(true),
            }
        }
        implicit.into_iter().map(|v| v.unwrap_or(true)).collect()
    }

    /// Rows (and right-hand sides) whose solution set is the affine hull.
    pub fn affine_hull(&self) -> (Matrix, Vector) {
        let implicit = self.implicit_equalities();
        let mut rows: Vec<Vector> = self.eq.iter().map(|(r, _)| r.clone()).collect();
        let mut rhs: Vec<f64> = self.eq.iter().map(|(_, b)| *b).collect();
        for (i, (r, b)) in self.ineq.iter().enumerate() {
            if implicit[i] {
                rows.push(r.clone());
                rhs.push(*b);
            }
        }
        (rows_to_matrix(self.dim, &rows), Vector::from_vec(rhs))
    }

    /// Orthonormal basis of the parallel subspace `par C = aff C − aff C`.
    pub fn parallel_basis(&self) -> Matrix {
        null_space(&self.affine_hull().0)
    }

    /// Affine dimension; `None` for the empty set.
    pub fn dimension(&self) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        let (rows, _) = self.affine_hull();
        Some(self.dim - rank(&rows))
    }

    /// True iff the set (assumed to be a cone) is `{0}`.
    pub fn is_zero_cone(&self) -> bool {
        // The cone is {0} iff every coordinate vanishes on its intersection with the unit box.
        let d = self.dim;
        let mut lp = LinearProgram::new(d);
        for i in 0..d {
            lp.add_bounds(i, -1.0, 1.0);
        }
        for (r, _) in &self.eq {
            lp.add_eq(r.as_slice(), 0.0);
        }
        for (r, _) in &self.ineq {
            lp.add_le(r.as_slice(), 0.0);
        }
        (0..d).all(|i| {
            let mut obj = vec![0.0; d];
            obj[i] = 1.0;
            let hi = lp.maximize(&obj).value().unwrap_or(f64::INFINITY);
            let lo = lp.minimize(&obj).value().unwrap_or(f64::NEG_INFINITY);
            hi <= 1e-9 && lo >= -1e-9
        })
    }

    /// Vertices of a planar polyhedron clipped to `[-bound, bound]²`, in counterclockwise order.
    pub fn polygon_2d(&self, bound: f64) -> Vec<[f64; 2]> {
        assert_eq!(self.dim, 2, "polygon_2d needs a planar set");
        let mut clipped = self.clone();
        for (a, b) in [([1.0, 0.0], bound), ([-1.0, 0.0], bound), ([0.0, 1.0], bound), ([0.0, -1.0], bound)] {
            clipped.add_le(Vector::from_row_slice(&a), b);
        }
        let mut lines: Vec<(Vector, f64)> = clipped.eq.clone();
        lines.extend(clipped.ineq.iter().cloned());
        let mut pts: Vec<[f64; 2]> = Vec::new();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1) = &lines[i];
                let (a2, b2) = &lines[j];
                let det = a1[0] * a2[1] - a1[1] * a2[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let p = Vector::from_row_slice(&[(b1 * a2[1] - b2 * a1[1]) / det, (a1[0] * b2 - a2[0] * b1) / det]);
                if clipped.max_violation(&p) <= 1e-9 && !pts.iter().any(|q| (q[0] - p[0]).hypot(q[1] - p[1]) < 1e-9) {
                    pts.push([p[0], p[1]]);
                }
            }
        }
        if pts.is_empty() {
            return pts;
        }
        let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
        pts.sort_by(|p, q| {
            let ap = (p[1] - cy).atan2(p[0] - cx);
            let aq = (q[1] - cy).atan2(q[0] - cx);
            ap.total_cmp(&aq)
        });
        pts
    }

    pub fn rows(&self) -> PolyhedronRows {
        PolyhedronRows {
            dim: self.dim,
            eq_rows: self.eq.iter().map(|(r, _)| r.iter().copied().collect()).collect(),
            eq_rhs: self.eq.iter().map(|(_, b)| *b).collect(),
            ineq_rows: self.ineq.iter().map(|(r, _)| r.iter().copied().collect()).collect(),
            ineq_rhs: self.ineq.iter().map(|(_, b)| *b).collect(),
        }
    }
}

/// V-description of `{v : G v ≤ 0}`: lineality basis plus extreme rays of the pointed part.
#[derive(Debug, Clone)]
pub struct ConeGenerators {
    /// Orthonormal columns spanning the lineality space `Null(G)`.
    pub lineality: Matrix,
    /// Unit extreme rays of the cone intersected with `Null(G)^⊥`.
    pub rays: Vec<Vector>,
}

/// Calls `f` with every increasing `k`-subset of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Extreme rays by enumerating rank-deficient row subsets; exact at desk scale.
pub fn cone_generators(g: &Matrix) -> ConeGenerators {
    let dim = g.ncols();
    let lineality = null_space(g);
    let basis = range_space(&g.transpose());
    let d = basis.ncols();
    let mut rays: Vec<Vector> = Vec::new();
    if d == 0 {
        return ConeGenerators { lineality, rays };
    }
    let gs = g * &basis;
    let scale = 1.0 + gs.amax();
    let feasible = |z: &Vector| (&gs * z).iter().all(|&v| v <= 1e-10 * scale);
    let mut push = |z: Vector| {
        let r = &basis * z;
        let r = &r / r.norm();
        if !rays.iter().any(|q| (q - &r).norm() < 1e-9) {
            rays.push(r);
        }
    };
    combinations(gs.nrows(), d - 1, |subset| {
        let sub = rows_to_matrix(d, &subset.iter().map(|&i| gs.row(i).transpose()).collect::<Vec<_>>());
        let ns = null_space(&sub);
        if ns.ncols() != 1 {
            return;
        }
        let z = ns.column(0).into_owned();
        if feasible(&z) {
            push(z.clone());
        }
        let neg = -z;
        if feasible(&neg) {
            push(neg);
        }
    });
    rays.sort_by(|a, b| a.as_slice().partial_cmp(b.as_slice()).unwrap_or(std::cmp::Ordering::Equal));
    debug_assert_eq!(lineality.nrows(), dim);
    ConeGenerators { lineality, rays }
}

/// Stacks the affine-hull rows of `p` with `extra` and returns the combined matrix.
pub fn hull_with(p: &PolyhedronH, extra: &Matrix) -> Matrix {
    vstack(&p.affine_hull().0, extra)
}
