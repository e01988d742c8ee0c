//! Dense two-phase simplex with Bland's rule.
//!
//! Sized for desk-scale feasibility and slack-maximization problems
//! (a few dozen variables and rows). Determinism matters more than speed.

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn point(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Linear constraints over `n` variables, free unless marked nonnegative.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    n: usize,
    nonneg: Vec<bool>,
    eq: Vec<(Vec<f64>, f64)>,
    le: Vec<(Vec<f64>, f64)>,
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram { n, nonneg: vec![false; n], eq: Vec::new(), le: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn set_nonnegative(&mut self, var: usize) {
        self.nonneg[var] = true;
    }

    pub fn add_eq(&mut self, row: &[f64], rhs: f64) {
        debug_assert_eq!(row.len(), self.n);
        self.eq.push((row.to_vec(), rhs));
    }

    pub fn add_le(&mut self, row: &[f64], rhs: f64) {
        debug_assert_eq!(row.len(), self.n);
        self.le.push((row.to_vec(), rhs));
    }

    pub fn add_ge(&mut self, row: &[f64], rhs: f64) {
        let neg: Vec<f64> = row.iter().map(|v| -v).collect();
        self.add_le(&neg, -rhs);
    }

    /// `lo <= x_var <= hi` as two rows.
    pub fn add_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        let mut row = vec![0.0; self.n];
        row[var] = 1.0;
        self.add_le(&row, hi);
        self.add_ge(&row, lo);
    }

    pub fn feasible_point(&self) -> Option<Vec<f64>> {
        match self.minimize(&vec![0.0; self.n]) {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn maximize(&self, obj: &[f64]) -> LpOutcome {
        let neg: Vec<f64> = obj.iter().map(|v| -v).collect();
        match self.minimize(&neg) {
            LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
            other => other,
        }
    }

    pub fn minimize(&self, obj: &[f64]) -> LpOutcome {
        assert_eq!(obj.len(), self.n, "objective length");
        // Column map: free vars split into (p, q) with x = p - q.
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.n);
        let mut ncols = 0;
        for i in 0..self.n {
            if self.nonneg[i] {
                col_of.push((ncols, None));
                ncols += 1;
            } else {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
        let n_struct = ncols;
        let n_slack = self.le.len();
        let total = n_struct + n_slack;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        let push_row = |src: &[f64], slack: Option<usize>, b: f64, rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>| {
            let mut r = vec![0.0; total];
            for (i, &v) in src.iter().enumerate() {
                let (p, q) = col_of[i];
                r[p] += v;
                if let Some(q) = q {
                    r[q] -= v;
                }
            }
            if let Some(s) = slack {
                r[n_struct + s] = 1.0;
            }
            let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            r.iter_mut().for_each(|v| *v /= scale);
            rows.push(r);
            rhs.push(b / scale);
        };
        for (row, b) in &self.eq {
            push_row(row, None, *b, &mut rows, &mut rhs);
        }
        for (s, (row, b)) in self.le.iter().enumerate() {
            push_row(row, Some(s), *b, &mut rows, &mut rhs);
        }
        let mut cost = vec![0.0; total];
        for (i, &c) in obj.iter().enumerate() {
            let (p, q) = col_of[i];
            cost[p] += c;
            if let Some(q) = q {
                cost[q] -= c;
            }
        }
        let sol = match Tableau::solve(rows, rhs, cost) {
            Ok(sol) => sol,
            Err(LpFailure::Infeasible) => return LpOutcome::Infeasible,
            Err(LpFailure::Unbounded) => return LpOutcome::Unbounded,
        };
        let x: Vec<f64> = (0..self.n)
            .map(|i| {
                let (p, q) = col_of[i];
                sol[p] - q.map_or(0.0, |q| sol[q])
            })
            .collect();
        let value = x.iter().zip(obj).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}

enum LpFailure {
    Infeasible,
    Unbounded,
}

/// Standard-form tableau for `min cᵀz, A z = b, z ≥ 0`.
struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, cost: Vec<f64>) -> Result<Vec<f64>, LpFailure> {
        let nrows = a.len();
        let n = cost.len();
        if nrows == 0 {
            return if cost.iter().any(|&c| c < -PIVOT_EPS) { Err(LpFailure::Unbounded) } else { Ok(vec![0.0; n]) };
        }
        for i in 0..nrows {
            if b[i] < 0.0 {
                a[i].iter_mut().for_each(|v| *v = -*v);
                b[i] = -b[i];
            }
        }
        // Phase I: artificial columns n..n+nrows, rhs in the last column.
        let width = n + nrows + 1;
        let mut t = vec![vec![0.0; width]; nrows];
        for i in 0..nrows {
            t[i][..n].copy_from_slice(&a[i]);
            t[i][n + i] = 1.0;
            t[i][width - 1] = b[i];
        }
        let mut tab = Tableau { t, basis: (n..n + nrows).collect(), ncols: n + nrows };
        let mut phase1 = vec![0.0; n + nrows];
        phase1[n..].iter_mut().for_each(|v| *v = 1.0);
        tab.optimize(&phase1, n + nrows).map_err(|_| LpFailure::Infeasible)?;
        let b_scale = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(*v));
        let infeas: f64 = tab.basis.iter().enumerate().filter(|(_, &j)| j >= n).map(|(r, _)| tab.rhs(r)).sum();
        if infeas > FEAS_EPS * b_scale {
            return Err(LpFailure::Infeasible);
        }
        // Drive remaining artificials out of the basis, dropping redundant rows.
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= n {
                if let Some(j) = (0..n).find(|&j| tab.t[r][j].abs() > 1e-9) {
                    tab.pivot(r, j);
                    r += 1;
                } else {
                    tab.t.remove(r);
                    tab.basis.remove(r);
                }
            } else {
                r += 1;
            }
        }
        // Phase II over structural columns only.
        for row in tab.t.iter_mut() {
            let rhs = row[width - 1];
            row.truncate(n);
            row.push(rhs);
        }
        tab.ncols = n;
        tab.optimize(&cost, n)?;
        let mut z = vec![0.0; n];
        for (r, &j) in tab.basis.iter().enumerate() {
            z[j] = tab.rhs(r).max(0.0);
        }
        Ok(z)
    }

    fn rhs(&self, r: usize) -> f64 {
        *self.t[r].last().expect("nonempty row")
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.t[r][j];
        self.t[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                row[j] = 0.0;
            }
        }
        self.basis[r] = j;
    }

    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<(), LpFailure> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j] - self.basis.iter().enumerate().map(|(r, &bj)| cost[bj] * self.t[r][j]).sum::<f64>();
                reduced < -PIVOT_EPS
            });
            let Some(j) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.t.len() {
                let a = self.t[r][j];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-14 || (ratio <= lratio + 1e-14 && self.basis[r] < self.basis[lr]) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Err(LpFailure::Unbounded) };
            self.pivot(r, j);
        }
        debug_assert!(self.ncols > 0);
        Ok(())
    }
}
