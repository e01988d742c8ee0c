use std::io::Write;

use serde::Serialize;

use crate::composite::{kkt_residual, CompositeProblem};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Newton,
    QuasiNewton,
    Smooth,
    Enumeration,
}

/// One iterate; iteration 0 is the start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub mu: Vec<f64>,
    pub stationarity: f64,
    pub subdiff_violation: ExtReal,
    /// `‖x − x̄‖ + ‖y − ȳ‖` when a reference is known.
    pub error: Option<f64>,
    /// `‖(B − ∇²(yc)(x)) s‖ / ‖s‖` for the step that produced this iterate.
    pub dm_ratio: Option<f64>,
    /// Whether the linearized point of the producing step lies on the manifold.
    pub on_manifold: Option<bool>,
    /// Largest cross-piece disagreement of the restricted solutions, relative to `1 + ‖x‖ + ‖y‖`.
    pub gluing: Option<f64>,
    pub min_mu: Option<f64>,
    /// Reduced model Hessian positive definite for the producing step.
    pub model_sosc: Option<bool>,
    /// Pieces active at the linearized point of the producing step.
    pub linearized_pieces: Option<Vec<usize>>,
}

impl IterRecord {
    pub(crate) fn new(p: &CompositeProblem, iter: usize, x: &Vector, y: &Vector, error: Option<f64>) -> Self {
        let r = kkt_residual(p, x, y);
        IterRecord {
            iter,
            x: x.iter().copied().collect(),
            y: y.iter().copied().collect(),
            mu: Vec::new(),
            stationarity: r.stationarity,
            subdiff_violation: r.subdiff_violation,
            error,
            dm_ratio: None,
            on_manifold: None,
            gluing: None,
            min_mu: None,
            model_sosc: None,
            linearized_pieces: None,
        }
    }

    /// Stationarity plus subdifferential violation.
    pub fn residual(&self) -> f64 {
        match self.subdiff_violation {
            ExtReal::Finite(v) => self.stationarity + v,
            ExtReal::PlusInf => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub method: Method,
    pub records: Vec<IterRecord>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl IterationTrace {
    pub(crate) fn new(method: Method) -> Self {
        IterationTrace { method, records: Vec::new(), converged: false, warnings: Vec::new() }
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> &IterRecord {
        self.records.last().expect("a trace always holds the start point")
    }

    pub fn final_x(&self) -> Vector {
        Vector::from_column_slice(&self.last().x)
    }

    pub fn final_y(&self) -> Vector {
        Vector::from_column_slice(&self.last().y)
    }

    pub fn final_residual(&self) -> f64 {
        self.last().residual()
    }

    /// Distances to the reference, or KKT residuals as a proxy when no reference is known.
    pub fn error_sequence(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error.unwrap_or_else(|| r.residual())).collect()
    }

    pub fn uses_reference(&self) -> bool {
        self.records.iter().all(|r| r.error.is_some())
    }

    /// Writes `iter, x…, y…, mu…, stat_res, sub_viol, err, dm_ratio, on_manifold`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let first = &self.records[0];
        let (n, m) = (first.x.len(), first.y.len());
        let width = self.records.iter().map(|r| r.mu.len()).max().unwrap_or(0);
        let mut header = vec!["iter".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=m).map(|i| format!("y{i}")));
        header.extend((1..=width).map(|i| format!("mu{i}")));
        header.extend(["stat_res", "sub_viol", "err", "dm_ratio", "on_manifold"].map(String::from));
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&header).map_err(io)?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        for r in &self.records {
            let mut row = vec![r.iter.to_string()];
            row.extend(r.x.iter().map(f64::to_string));
            row.extend(r.y.iter().map(f64::to_string));
            row.extend((0..width).map(|i| r.mu.get(i).map_or(String::new(), f64::to_string)));
            row.push(r.stationarity.to_string());
            row.push(r.subdiff_violation.to_string());
            row.push(opt(r.error));
            row.push(opt(r.dm_ratio));
            row.push(r.on_manifold.map_or(String::new(), |b| u8::from(b).to_string()));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}
