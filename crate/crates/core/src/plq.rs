//! Piecewise linear-quadratic convex functions in shared-hyperplane form.
//!
//! Piece `k` is `C_k = {c : ω_kj (⟨a_j,c⟩ − α_j) ≤ 0 for every j}` carrying the
//! quadratic `½⟨c,Q_k c⟩ + ⟨b_k,c⟩ + β_k`; outside `∪ C_k` the function is `+∞`.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{columns_to_matrix, dist_to_range, min_sym_eigenvalue, null_space, rows_to_matrix, Matrix, Vector};
use crate::lp::{LinearProgram, LpOutcome};
use crate::polyhedron::PolyhedronH;

const VALUE_AGREEMENT: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-14;
const PSD_TOL: f64 = 1e-10;
const RANGE_TOL: f64 = 1e-9;
const STRICT_OVERLAP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub a: Vector,
    pub alpha: f64,
}

impl Hyperplane {
    /// Activity tolerance `1e-9·(1+|α|)`.
    pub fn tau(&self) -> f64 {
        1e-9 * (1.0 + self.alpha.abs())
    }

    pub fn residual(&self, c: &Vector) -> f64 {
        self.a.dot(c) - self.alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    /// `ω_kj ∈ {−1, +1}` for every hyperplane.
    pub signs: Vec<i8>,
    pub q: Matrix,
    pub b: Vector,
    pub beta: f64,
}

impl Piece {
    pub fn value(&self, c: &Vector) -> f64 {
        0.5 * c.dot(&(&self.q * c)) + self.b.dot(c) + self.beta
    }

    /// `Q_k c + b_k`.
    pub fn gradient(&self, c: &Vector) -> Vector {
        &self.q * c + &self.b
    }

    pub fn sign(&self, j: usize) -> f64 {
        f64::from(self.signs[j])
    }
}

/// File form of a PLQ function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlqSpec {
    pub m: usize,
    #[serde(default)]
    pub hyperplanes: Vec<HyperplaneSpec>,
    pub pieces: Vec<PieceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperplaneSpec {
    pub a: Vec<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub signs: Vec<i64>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActiveProfile {
    pub value: ExtReal,
    /// `K(c)`, ascending.
    pub active_pieces: Vec<usize>,
    /// `I_k(c)` for each active piece.
    pub active_hyperplanes: BTreeMap<usize, Vec<usize>>,
    pub kbar: usize,
    /// `|I_k(c)|` when identical across active pieces.
    pub ell: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlqFunction {
    m: usize,
    hyperplanes: Vec<Hyperplane>,
    pieces: Vec<Piece>,
}

fn schema(pointer: String, msg: impl Into<String>) -> Error {
    Error::Schema { pointer, msg: msg.into() }
}

impl PlqFunction {
    pub fn new(m: usize, hyperplanes: Vec<Hyperplane>, pieces: Vec<Piece>) -> Result<Self> {
        let s = hyperplanes.len();
        if pieces.is_empty() {
            return Err(schema("/pieces".into(), "at least one piece is required"));
        }
        for (j, hp) in hyperplanes.iter().enumerate() {
            if hp.a.len() != m {
                return Err(schema(format!("/hyperplanes/{j}/a"), format!("expected length {m}, found {}", hp.a.len())));
            }
            if !(hp.a.norm() > 0.0) || !hp.alpha.is_finite() || hp.a.iter().any(|v| !v.is_finite()) {
                return Err(schema(format!("/hyperplanes/{j}"), "normal must be finite and nonzero"));
            }
        }
        for (k, p) in pieces.iter().enumerate() {
            if p.signs.len() != s {
                return Err(schema(format!("/pieces/{k}/signs"), format!("expected {s} signs, found {}", p.signs.len())));
            }
            if let Some(j) = p.signs.iter().position(|&w| w != 1 && w != -1) {
                return Err(schema(format!("/pieces/{k}/signs/{j}"), "signs must be +1 or -1"));
            }
            if p.q.shape() != (m, m) {
                return Err(schema(format!("/pieces/{k}/Q"), format!("expected a {m}x{m} matrix")));
            }
            if p.b.len() != m {
                return Err(schema(format!("/pieces/{k}/b"), format!("expected length {m}")));
            }
        }
        let h = PlqFunction { m, hyperplanes, pieces };
        if (0..h.pieces.len()).all(|k| h.piece_polyhedron(k).is_empty()) {
            return Err(Error::Representation("dom h is empty".into()));
        }
        Ok(h)
    }

    pub fn from_spec(spec: &PlqSpec) -> Result<Self> {
        let m = spec.m;
        let hyperplanes =
            spec.hyperplanes.iter().map(|hp| Hyperplane { a: Vector::from_vec(hp.a.clone()), alpha: hp.alpha }).collect();
        let mut pieces = Vec::with_capacity(spec.pieces.len());
        for (k, ps) in spec.pieces.iter().enumerate() {
            let q = match &ps.q {
                None => Matrix::zeros(m, m),
                Some(rows) => {
                    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                        return Err(schema(format!("/pieces/{k}/Q"), format!("expected a {m}x{m} matrix")));
                    }
                    Matrix::from_fn(m, m, |i, j| rows[i][j])
                }
            };
            let b = Vector::from_vec(ps.b.clone().unwrap_or_else(|| vec![0.0; m]));
            let signs = ps
                .signs
                .iter()
                .enumerate()
                .map(|(j, &w)| match w {
                    1 => Ok(1),
                    -1 => Ok(-1),
                    _ => Err(schema(format!("/pieces/{k}/signs/{j}"), "signs must be +1 or -1")),
                })
                .collect::<Result<Vec<i8>>>()?;
            pieces.push(Piece { signs, q, b, beta: ps.beta });
        }
        PlqFunction::new(m, hyperplanes, pieces)
    }

    pub fn to_spec(&self) -> PlqSpec {
        PlqSpec {
            m: self.m,
            hyperplanes: self
                .hyperplanes
                .iter()
                .map(|hp| HyperplaneSpec { a: hp.a.iter().copied().collect(), alpha: hp.alpha })
                .collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceSpec {
                    signs: p.signs.iter().map(|&w| i64::from(w)).collect(),
                    q: Some((0..self.m).map(|i| p.q.row(i).iter().copied().collect()).collect()),
                    b: Some(p.b.iter().copied().collect()),
                    beta: p.beta,
                })
                .collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn check_dim(&self, c: &Vector) -> Result<()> {
        if c.len() != self.m {
            return Err(Error::Dimension(format!("expected a point in R^{}, found length {}", self.m, c.len())));
        }
        Ok(())
    }

    pub fn piece_contains(&self, k: usize, c: &Vector) -> bool {
        let p = &self.pieces[k];
        self.hyperplanes.iter().enumerate().all(|(j, hp)| p.sign(j) * hp.residual(c) <= hp.tau())
    }

    /// `{j : |⟨a_j,c⟩ − α_j| ≤ τ_act}`.
    pub fn active_hyperplanes(&self, c: &Vector) -> Vec<usize> {
        (0..self.hyperplanes.len()).filter(|&j| self.hyperplanes[j].residual(c).abs() <= self.hyperplanes[j].tau()).collect()
    }

    /// Pieces containing `c`, ascending.
    pub fn containing_pieces(&self, c: &Vector) -> Vec<usize> {
        (0..self.pieces.len()).filter(|&k| self.piece_contains(k, c)).collect()
    }

    pub fn eval_with_active(&self, c: &Vector) -> Result<ActiveProfile> {
        self.check_dim(c)?;
        let active_pieces = self.containing_pieces(c);
        if active_pieces.is_empty() {
            return Ok(ActiveProfile {
                value: ExtReal::PlusInf,
                active_pieces,
                active_hyperplanes: BTreeMap::new(),
                kbar: 0,
                ell: None,
            });
        }
        let v0 = self.pieces[active_pieces[0]].value(c);
        for &k in &active_pieces[1..] {
            let vk = self.pieces[k].value(c);
            if (vk - v0).abs() > VALUE_AGREEMENT * (1.0 + v0.abs()) {
                return Err(Error::Representation(format!(
                    "pieces {} and {k} disagree at a common point ({v0} vs {vk})",
                    active_pieces[0]
                )));
            }
        }
        let common = self.active_hyperplanes(c);
        let active_hyperplanes: BTreeMap<usize, Vec<usize>> = active_pieces.iter().map(|&k| (k, common.clone())).collect();
        Ok(ActiveProfile {
            value: ExtReal::Finite(v0),
            kbar: active_pieces.len(),
            ell: Some(common.len()),
            active_pieces,
            active_hyperplanes,
        })
    }

    pub fn value(&self, c: &Vector) -> Result<ExtReal> {
        Ok(self.eval_with_active(c)?.value)
    }

    /// Value of the first containing piece, with no consistency check.
    pub fn value_lenient(&self, c: &Vector) -> ExtReal {
        match (0..self.pieces.len()).find(|&k| self.piece_contains(k, c)) {
            Some(k) => ExtReal::Finite(self.pieces[k].value(c)),
            None => ExtReal::PlusInf,
        }
    }

    /// `C_k` as an H-polyhedron.
    pub fn piece_polyhedron(&self, k: usize) -> PolyhedronH {
        let mut p = PolyhedronH::universe(self.m);
        for (j, hp) in self.hyperplanes.iter().enumerate() {
            let w = self.pieces[k].sign(j);
            p.add_le(&hp.a * w, w * hp.alpha);
        }
        p
    }

    /// Largest inscribed ball (radius capped at 1) of the face of `C_k1 ∩ C_k2` obtained by
    /// turning sign-conflicting rows into equalities; `None` when the face is empty.
    fn face_center(&self, pieces: &[usize]) -> Option<(Vector, f64, Vec<usize>)> {
        let m = self.m;
        let mut lp = LinearProgram::new(m + 1);
        let mut eq_rows = Vec::new();
        for (j, hp) in self.hyperplanes.iter().enumerate() {
            let signs: Vec<f64> = pieces.iter().map(|&k| self.pieces[k].sign(j)).collect();
            let norm = hp.a.norm();
            if signs.iter().all(|&w| w == signs[0]) {
                let w = signs[0];
                let mut row: Vec<f64> = hp.a.iter().map(|v| w * v).collect();
                row.push(norm);
                lp.add_le(&row, w * hp.alpha);
            } else {
                let mut row: Vec<f64> = hp.a.iter().copied().collect();
                row.push(0.0);
                lp.add_eq(&row, hp.alpha);
                eq_rows.push(j);
            }
        }
        let mut cap = vec![0.0; m + 1];
        cap[m] = 1.0;
        lp.add_le(&cap, 1.0);
        match lp.maximize(&cap) {
            LpOutcome::Optimal { x, value } if value >= -1e-12 => {
                Some((Vector::from_column_slice(&x[..m]), value.max(0.0), eq_rows))
            }
            _ => None,
        }
    }

    /// Chebyshev-style center and radius of `C_k`; `None` for an empty piece.
    pub fn piece_center(&self, k: usize) -> Option<(Vector, f64)> {
        self.face_center(&[k]).map(|(c, r, _)| (c, r))
    }

    pub fn validate(&self, probes: usize, seed: u64, strict: bool) -> ValidationReport {
        Validator::new(self, probes.max(1), seed).run(strict)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceCheck {
    pub index: usize,
    pub nonempty: bool,
    /// Inscribed radius of the Chebyshev-style center (capped at 1); zero without interior.
    pub interior_radius: f64,
    pub symmetric: bool,
    /// Smallest eigenvalue of `Q_k` on the parallel subspace of the piece.
    pub min_curvature: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RangeCheck {
    pub pieces: Vec<usize>,
    pub max_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub probes: usize,
    pub seed: u64,
    pub pieces: Vec<PieceCheck>,
    pub continuity_max_residual: f64,
    pub convexity_max_violation: f64,
    pub overlapping_pairs: Vec<[usize; 2]>,
    /// Present only when the exact pairwise LP was requested.
    pub strict_overlapping_pairs: Option<Vec<[usize; 2]>>,
    pub range_checks: Vec<RangeCheck>,
    /// `int dom h ≠ ∅`; the certificate chain is unsupported otherwise.
    pub full_dimensional: bool,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub all_pass: bool,
}

struct Validator<'a> {
    h: &'a PlqFunction,
    probes: usize,
    seed: u64,
    rng: StdRng,
}

impl<'a> Validator<'a> {
    fn new(h: &'a PlqFunction, probes: usize, seed: u64) -> Self {
        Validator { h, probes, seed, rng: StdRng::seed_from_u64(seed) }
    }

    fn ball_point(&mut self, center: &Vector, radius: f64, basis: &Matrix) -> Vector {
        if radius <= 0.0 || basis.ncols() == 0 {
            return center.clone();
        }
        let d = basis.ncols();
        loop {
            let z = Vector::from_fn(d, |_, _| self.rng.random_range(-1.0..1.0));
            let n = z.norm();
            if n <= 1.0 && n > 0.0 {
                return center + basis * z * (0.9 * radius);
            }
        }
    }

    fn run(mut self, strict: bool) -> ValidationReport {
        let h = self.h;
        let m = h.m;
        let np = h.pieces.len();
        let mut failures = Vec::new();
        let mut warnings = Vec::new();
        let full = Matrix::identity(m, m);

        let mut checks = Vec::with_capacity(np);
        let mut interior_samples: Vec<(usize, Vector)> = Vec::new();
        for k in 0..np {
            let piece = &h.pieces[k];
            let sym_scale = 1.0 + piece.q.amax();
            let symmetric = (&piece.q - piece.q.transpose()).amax() <= SYMMETRY_TOL * sym_scale;
            if !symmetric {
                failures.push(format!("piece {k}: Q is not symmetric"));
            }
            let center = h.piece_center(k);
            let (nonempty, radius, min_curv) = match &center {
                None => {
                    failures.push(format!("piece {k}: empty polyhedron"));
                    (false, 0.0, None)
                }
                Some((c0, r)) => {
                    let par = if *r > 1e-12 {
                        full.clone()
                    } else {
                        let tight: Vec<Vector> = h
                            .hyperplanes
                            .iter()
                            .enumerate()
                            .filter(|(j, hp)| piece.sign(*j) * hp.residual(c0) >= -hp.tau())
                            .map(|(_, hp)| hp.a.clone())
                            .collect();
                        null_space(&rows_to_matrix(m, &tight))
                    };
                    let sym = (&piece.q + piece.q.transpose()) * 0.5;
                    let reduced = par.transpose() * sym * &par;
                    let curv = min_sym_eigenvalue(&reduced);
                    if let Some(e) = curv {
                        if e < -PSD_TOL {
                            failures.push(format!("piece {k}: Q is not positive semidefinite on the piece (eigenvalue {e:e})"));
                        }
                    }
                    (true, *r, curv)
                }
            };
            if nonempty && radius <= 1e-12 {
                warnings.push(format!("piece {k}: empty interior"));
            }
            if let Some((c0, r)) = &center {
                interior_samples.push((k, c0.clone()));
                if *r > 1e-12 {
                    for _ in 0..self.probes {
                        let p = self.ball_point(c0, *r, &full);
                        interior_samples.push((k, p));
                    }
                }
            }
            checks.push(PieceCheck { index: k, nonempty, interior_radius: radius, symmetric, min_curvature: min_curv });
        }
        let full_dimensional = checks.iter().any(|c| c.interior_radius > 1e-12);
        if !full_dimensional {
            warnings.push("dom h has empty interior: certificates are unsupported".into());
        }

        // Interior disjointness on probes.
        let mut overlapping = std::collections::BTreeSet::new();
        for (k, p) in &interior_samples {
            for k2 in 0..np {
                if k2 == *k {
                    continue;
                }
                let piece = &h.pieces[k2];
                let strictly_inside = h.hyperplanes.iter().enumerate().all(|(j, hp)| piece.sign(j) * hp.residual(p) < -hp.tau());
                let own = &h.pieces[*k];
                let own_strict = h.hyperplanes.iter().enumerate().all(|(j, hp)| own.sign(j) * hp.residual(p) < -hp.tau());
                if strictly_inside && own_strict {
                    overlapping.insert([(*k).min(k2), (*k).max(k2)]);
                }
            }
        }
        for pair in &overlapping {
            failures.push(format!("pieces {} and {}: interiors overlap", pair[0], pair[1]));
        }
        let strict_pairs = strict.then(|| {
            let mut pairs = Vec::new();
            for k1 in 0..np {
                for k2 in k1 + 1..np {
                    if self.strict_overlap(k1, k2) {
                        pairs.push([k1, k2]);
                    }
                }
            }
            pairs
        });
        if let Some(pairs) = &strict_pairs {
            for pair in pairs {
                failures.push(format!("pieces {} and {}: interiors intersect (exact LP)", pair[0], pair[1]));
            }
        }

        // Continuity on common faces and the range condition at face centers.
        let mut cont_max: f64 = 0.0;
        let mut range_checks = Vec::new();
        for k1 in 0..np {
            for k2 in k1 + 1..np {
                let Some((c0, r, eq_rows)) = h.face_center(&[k1, k2]) else { continue };
                let eq_mat = rows_to_matrix(m, &eq_rows.iter().map(|&j| h.hyperplanes[j].a.clone()).collect::<Vec<_>>());
                let face_basis = null_space(&eq_mat);
                let mut worst: f64 = 0.0;
                let samples = 1 + self.probes.min(50);
                for s in 0..samples {
                    let p = if s == 0 { c0.clone() } else { self.ball_point(&c0, r, &face_basis) };
                    let v1 = h.pieces[k1].value(&p);
                    let v2 = h.pieces[k2].value(&p);
                    worst = worst.max((v1 - v2).abs() / (1.0 + v1.abs()));
                }
                cont_max = cont_max.max(worst);
                if worst > VALUE_AGREEMENT {
                    failures.push(format!("pieces {k1} and {k2}: values differ on the common face (relative gap {worst:e})"));
                }
                let active = h.containing_pieces(&c0);
                if active.len() >= 2 {
                    let dist = range_condition(h, &c0, &active);
                    if dist > RANGE_TOL * (1.0 + active.iter().map(|&k| h.pieces[k].q.amax()).fold(0.0, f64::max)) {
                        failures.push(format!("pieces {active:?}: (Q_i − Q_j)Null(Aᵀ) leaves Ran A (distance {dist:e})"));
                    }
                    if !range_checks.iter().any(|rc: &RangeCheck| rc.pieces == active) {
                        range_checks.push(RangeCheck { pieces: active, max_distance: dist });
                    }
                }
            }
        }

        // Midpoint convexity on random segments between probes.
        let mut conv_max: f64 = 0.0;
        if !interior_samples.is_empty() {
            for _ in 0..self.probes {
                let i = self.rng.random_range(0..interior_samples.len());
                let j = self.rng.random_range(0..interior_samples.len());
                let t: f64 = self.rng.random_range(0.0..=1.0);
                let (p, q) = (&interior_samples[i].1, &interior_samples[j].1);
                let mid = p * t + q * (1.0 - t);
                let (Some(hp), Some(hq)) = (h.value_lenient(p).finite(), h.value_lenient(q).finite()) else { continue };
                let bound = t * hp + (1.0 - t) * hq;
                let gap = match h.value_lenient(&mid) {
                    ExtReal::Finite(hm) => (hm - bound) / (1.0 + bound.abs()),
                    ExtReal::PlusInf => f64::INFINITY,
                };
                conv_max = conv_max.max(gap);
            }
        }
        if conv_max > 1e-8 {
            failures.push(format!("midpoint convexity violated (relative gap {conv_max:e})"));
        }

        let all_pass = failures.is_empty();
        ValidationReport {
            probes: self.probes,
            seed: self.seed,
            pieces: checks,
            continuity_max_residual: cont_max,
            convexity_max_violation: conv_max,
            overlapping_pairs: overlapping.into_iter().collect(),
            strict_overlapping_pairs: strict_pairs,
            range_checks,
            full_dimensional,
            failures,
            warnings,
            all_pass,
        }
    }

    fn strict_overlap(&self, k1: usize, k2: usize) -> bool {
        let h = self.h;
        let m = h.m;
        let mut lp = LinearProgram::new(m + 1);
        for k in [k1, k2] {
            for (j, hp) in h.hyperplanes.iter().enumerate() {
                let w = h.pieces[k].sign(j);
                let mut row: Vec<f64> = hp.a.iter().map(|v| w * v).collect();
                row.push(hp.a.norm());
                lp.add_le(&row, w * hp.alpha);
            }
        }
        let mut cap = vec![0.0; m + 1];
        cap[m] = 1.0;
        lp.add_le(&cap, 1.0);
        matches!(lp.maximize(&cap), LpOutcome::Optimal { value, .. } if value > STRICT_OVERLAP)
    }
}

/// Largest distance from `(Q_i − Q_j) w` to `Ran A` over pairs of `pieces` and a basis `w` of `Null(Aᵀ)`,
/// with `A` the normals of the hyperplanes active at `c`.
pub fn range_condition(h: &PlqFunction, c: &Vector, pieces: &[usize]) -> f64 {
    let m = h.m();
    let active = h.active_hyperplanes(c);
    let a = columns_to_matrix(m, &active.iter().map(|&j| h.hyperplanes()[j].a.clone()).collect::<Vec<_>>());
    let nt = null_space(&a.transpose());
    let mut worst: f64 = 0.0;
    for (i, &ki) in pieces.iter().enumerate() {
        for &kj in &pieces[i + 1..] {
            let dq = &h.pieces()[ki].q - &h.pieces()[kj].q;
            for col in 0..nt.ncols() {
                let v = &dq * nt.column(col);
                worst = worst.max(dist_to_range(&a, &v));
            }
        }
    }
    worst
}
