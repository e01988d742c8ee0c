//! The active manifold `M_c̄ = ri ⋂_{k∈K(c̄)} C_k`, its block operators, the block
//! multipliers `μ(c, y)`, strict complementarity and partial smoothness.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{columns_to_matrix, rank, Matrix, Vector};
use crate::lp::LinearProgram;
use crate::plq::PlqFunction;

/// Strictness threshold on block multipliers.
pub const TAU_SC: f64 = 1e-8;
const MU_NEG_TOL: f64 = 1e-9;
const RECON_TOL: f64 = 1e-10;
const PARALLEL_STEP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ManifoldData {
    pub base: Vector,
    /// `K(c̄)` ascending; the last one is the reference piece with `P = I`.
    pub pieces: Vec<usize>,
    /// Common active hyperplanes, ascending; column `p` of `A` belongs to `active[p]`.
    pub active: Vec<usize>,
    /// Columns `ω_{k̄,j} a_j`, the outward normals of the reference piece.
    pub a: Matrix,
    /// Diagonals of `P_1, …, P_k̄` as `±1` vectors.
    pub p: Vec<Vector>,
    /// `Aᵀc` on the manifold.
    pub a_rhs: Vector,
    pub nondegenerate: bool,
    m: usize,
    q: Vec<Matrix>,
    b: Vec<Vector>,
}

impl ManifoldData {
    pub fn kbar(&self) -> usize {
        self.pieces.len()
    }

    pub fn ell(&self) -> usize {
        self.active.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `A P_j` for block `j` (position in `pieces`).
    pub fn ap(&self, j: usize) -> Matrix {
        let mut out = self.a.clone();
        for (col, s) in self.p[j].iter().enumerate() {
            out.column_mut(col).scale_mut(*s);
        }
        out
    }

    pub fn q_block(&self, j: usize) -> &Matrix {
        &self.q[j]
    }

    pub fn b_block(&self, j: usize) -> &Vector {
        &self.b[j]
    }

    pub fn q_avg(&self) -> Matrix {
        self.q.iter().fold(Matrix::zeros(self.m, self.m), |acc, q| acc + q) / self.kbar() as f64
    }

    pub fn b_avg(&self) -> Vector {
        self.b.iter().fold(Vector::zeros(self.m), |acc, b| acc + b) / self.kbar() as f64
    }

    /// `λ₀(c) = Q̄c + b̄`.
    pub fn lambda0(&self, c: &Vector) -> Vector {
        self.q_avg() * c + self.b_avg()
    }

    /// `Ā = (1/k̄)[AP_1 ⋯ AP_k̄]`.
    pub fn a_avg(&self) -> Matrix {
        let (kb, l) = (self.kbar(), self.ell());
        let mut out = Matrix::zeros(self.m, kb * l);
        for j in 0..kb {
            out.view_mut((0, j * l), (self.m, l)).copy_from(&(self.ap(j) / kb as f64));
        }
        out
    }

    /// `𝒜`, block `(i, j)` equal to `AP_j − k̄ δ_ij AP_j`.
    pub fn block_a(&self) -> Matrix {
        let (kb, l, m) = (self.kbar(), self.ell(), self.m);
        let mut out = Matrix::zeros(kb * m, kb * l);
        for j in 0..kb {
            let apj = self.ap(j);
            for i in 0..kb {
                let scale = if i == j { 1.0 - kb as f64 } else { 1.0 };
                out.view_mut((i * m, j * l), (m, l)).copy_from(&(&apj * scale));
            }
        }
        out
    }

    /// Right-hand side `k̄[𝒬c + ℬ − J(Q̄c + b̄)]` of the `𝒰(c)` system.
    pub fn block_rhs(&self, c: &Vector) -> Vector {
        let (kb, m) = (self.kbar(), self.m);
        let lam = self.lambda0(c);
        let mut out = Vector::zeros(kb * m);
        for j in 0..kb {
            let blk = (&self.q[j] * c + &self.b[j] - &lam) * kb as f64;
            out.rows_mut(j * m, m).copy_from(&blk);
        }
        out
    }

    /// `ζ_p = (P_1 e_p, …, P_k̄ e_p)`, a basis of `Null(𝒜)` under nondegeneracy.
    pub fn zeta(&self, p: usize) -> Vector {
        let (kb, l) = (self.kbar(), self.ell());
        let mut out = Vector::zeros(kb * l);
        for j in 0..kb {
            out[j * l + p] = self.p[j][p];
        }
        out
    }
}

/// Builds `M_c̄` data at `cbar`.
pub fn build_manifold(h: &PlqFunction, cbar: &Vector) -> Result<ManifoldData> {
    let prof = h.eval_with_active(cbar)?;
    match prof.kbar {
        0 => return Err(Error::Domain),
        1 => return Err(Error::SmoothCase),
        _ => {}
    }
    let pieces = prof.active_pieces.clone();
    // Every piece signs every hyperplane, so the active set is shared by construction.
    let active = h.active_hyperplanes(cbar);
    let reference = &h.pieces()[*pieces.last().expect("kbar >= 2")];
    let m = h.m();
    let cols: Vec<Vector> = active.iter().map(|&j| &h.hyperplanes()[j].a * reference.sign(j)).collect();
    let a = columns_to_matrix(m, &cols);
    let a_rhs = Vector::from_iterator(active.len(), active.iter().map(|&j| reference.sign(j) * h.hyperplanes()[j].alpha));
    let p = pieces
        .iter()
        .map(|&k| Vector::from_iterator(active.len(), active.iter().map(|&j| h.pieces()[k].sign(j) * reference.sign(j))))
        .collect();
    let nondegenerate = rank(&a) == active.len();
    Ok(ManifoldData {
        base: cbar.clone(),
        q: pieces.iter().map(|&k| h.pieces()[k].q.clone()).collect(),
        b: pieces.iter().map(|&k| h.pieces()[k].b.clone()).collect(),
        pieces,
        active,
        a,
        p,
        a_rhs,
        nondegenerate,
        m,
    })
}

/// `c ∈ M_c̄`: the common hyperplanes are active and every other row of every active piece is strict.
pub fn manifold_contains(h: &PlqFunction, md: &ManifoldData, c: &Vector) -> bool {
    if c.len() != md.m {
        return false;
    }
    h.hyperplanes().iter().enumerate().all(|(j, hp)| {
        let r = hp.residual(c);
        if md.active.binary_search(&j).is_ok() {
            r.abs() <= hp.tau()
        } else {
            md.pieces.iter().all(|&k| h.pieces()[k].sign(j) * r < -hp.tau())
        }
    })
}

/// `μ_j = P_j(AᵀA)⁻¹Aᵀ(y − Q_j c − b_j)` with no membership checks.
pub fn mu_formula(md: &ManifoldData, c: &Vector, y: &Vector) -> Vec<Vector> {
    let ata = md.a.transpose() * &md.a;
    let inv = ata.clone().try_inverse().unwrap_or_else(|| ata.pseudo_inverse(1e-14).expect("pseudo-inverse"));
    (0..md.kbar())
        .map(|j| {
            let r = y - &md.q[j] * c - &md.b[j];
            (&inv * md.a.transpose() * r).component_mul(&md.p[j])
        })
        .collect()
}

/// Flattens blocks into `(μ_1, …, μ_k̄)`.
pub fn stack_mu(blocks: &[Vector]) -> Vector {
    let data: Vec<f64> = blocks.iter().flat_map(|b| b.iter().copied()).collect();
    Vector::from_vec(data)
}

/// The unique `μ ∈ 𝒰(c)` representing `y`.
pub fn mu_of(h: &PlqFunction, md: &ManifoldData, c: &Vector, y: &Vector) -> Result<Vec<Vector>> {
    if !md.nondegenerate {
        return Err(Error::Precondition("A has dependent columns".into()));
    }
    if y.len() != md.m {
        return Err(Error::Dimension(format!("y has length {}, expected {}", y.len(), md.m)));
    }
    if !manifold_contains(h, md, c) {
        return Err(Error::Precondition("c is not on the manifold".into()));
    }
    let mu = mu_formula(md, c, y);
    let scale = 1.0 + y.amax() + c.amax();
    for (j, blk) in mu.iter().enumerate() {
        let recon = &md.q[j] * c + &md.b[j] + md.ap(j) * blk;
        if (&recon - y).amax() > RECON_TOL * scale {
            return Err(Error::Membership(format!("y is not in ∂h(c): piece {} leaves a residual off Ran A", md.pieces[j])));
        }
        if blk.iter().any(|&v| v < -MU_NEG_TOL * scale) {
            return Err(Error::Membership(format!("y is not in ∂h(c): block for piece {} has a negative entry", md.pieces[j])));
        }
    }
    Ok(mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Strictness {
    pub ri_member: bool,
    pub k_strict: bool,
}

/// Relative-interior membership and k-strict complementarity read off `μ(c, y)`.
pub fn strictness_from_mu(md: &ManifoldData, mu: &[Vector]) -> Strictness {
    let positive = |b: &Vector| b.iter().all(|&v| v > TAU_SC);
    let ri_member = mu.iter().all(positive);
    let same_side = |i: usize| md.p.iter().all(|p| p[i] == md.p[0][i]);
    let k_strict = mu.iter().any(positive) && mu.iter().all(|b| b.iter().enumerate().all(|(i, &v)| v > TAU_SC || same_side(i)));
    Strictness { ri_member, k_strict }
}

pub fn strictness_check(h: &PlqFunction, md: &ManifoldData, c: &Vector, y: &Vector) -> Result<Strictness> {
    Ok(strictness_from_mu(md, &mu_of(h, md, c, y)?))
}

/// Is `ζ` a direction of `par 𝒰(c)`: can some member of `𝒰(c)` move along `±ζ` and stay nonnegative?
fn realizable_direction(block_a: &Matrix, rhs: &Vector, zeta: &Vector) -> bool {
    let nv = zeta.len();
    for sign in [1.0, -1.0] {
        // Variables (μ, t): μ ≥ 0, 𝒜μ = rhs, μ + tζ ≥ 0, 0 ≤ t ≤ 1; maximize t.
        let mut lp = LinearProgram::new(nv + 1);
        for i in 0..=nv {
            lp.set_nonnegative(i);
        }
        lp.add_bounds(nv, 0.0, 1.0);
        for r in 0..block_a.nrows() {
            let mut row: Vec<f64> = block_a.row(r).iter().copied().collect();
            row.push(0.0);
            lp.add_eq(&row, rhs[r]);
        }
        for i in 0..nv {
            let mut row = vec![0.0; nv + 1];
            row[i] = 1.0;
            row[nv] = sign * zeta[i];
            lp.add_ge(&row, 0.0);
        }
        let mut obj = vec![0.0; nv + 1];
        obj[nv] = 1.0;
        if lp.maximize(&obj).value().is_some_and(|t| t > PARALLEL_STEP_TOL) {
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsCertificate {
    pub certified: bool,
    pub nondegenerate: bool,
    pub kbar: usize,
    pub ell: usize,
    pub ri_member: Option<bool>,
    pub k_strict: Option<bool>,
    /// Smallest block-multiplier entry, so callers can re-threshold.
    pub min_mu: Option<f64>,
    pub mu: Option<Vec<Vec<f64>>>,
    /// `par 𝒰(c) = Null(𝒜)` confirmed direction by direction.
    pub parallel_identity: Option<bool>,
    pub reasons: Vec<String>,
}

/// Partial smoothness of `h` relative to `M_c̄`, certified by nondegeneracy and k-strict
/// complementarity at `(c, y)`; on success also confirms `par ∂h(c) = Ran A` through `𝒰(c)`.
pub fn certify_partial_smoothness(h: &PlqFunction, md: &ManifoldData, c: &Vector, y: &Vector) -> PsCertificate {
    let mut cert = PsCertificate {
        certified: false,
        nondegenerate: md.nondegenerate,
        kbar: md.kbar(),
        ell: md.ell(),
        ri_member: None,
        k_strict: None,
        min_mu: None,
        mu: None,
        parallel_identity: None,
        reasons: Vec::new(),
    };
    if !md.nondegenerate {
        cert.reasons.push("not certified: degenerate A".into());
        return cert;
    }
    let mu = match mu_of(h, md, c, y) {
        Ok(mu) => mu,
        Err(e) => {
            cert.reasons.push(format!("not certified: {e}"));
            return cert;
        }
    };
    let st = strictness_from_mu(md, &mu);
    cert.ri_member = Some(st.ri_member);
    cert.k_strict = Some(st.k_strict);
    cert.min_mu = mu.iter().flat_map(|b| b.iter().copied()).reduce(f64::min);
    cert.mu = Some(mu.iter().map(|b| b.iter().copied().collect()).collect());
    if !st.k_strict {
        cert.reasons.push("not certified: k-strict complementarity fails".into());
        return cert;
    }
    let block_a = md.block_a();
    let rhs = md.block_rhs(c);
    let parallel = (0..md.ell()).all(|p| realizable_direction(&block_a, &rhs, &md.zeta(p)));
    cert.parallel_identity = Some(parallel);
    if !parallel {
        cert.reasons.push("parallel-subspace identity could not be confirmed".into());
    }
    cert.certified = parallel;
    cert
}
