//! Smooth maps `c : R^n → R^m` given as expression strings, differentiated by
//! forward-over-forward automatic differentiation.

mod dual;
mod parse;

pub use dual::{Dual, Scalar};
pub use parse::{parse_expr, Expr, Func};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

fn eval_generic<T: Scalar>(e: &Expr, x: &[T]) -> std::result::Result<T, String> {
    Ok(match e {
        Expr::Num(v) => T::constant(*v),
        Expr::Var(i) => x[*i].clone(),
        Expr::Add(a, b) => eval_generic(a, x)? + eval_generic(b, x)?,
        Expr::Sub(a, b) => eval_generic(a, x)? - eval_generic(b, x)?,
        Expr::Mul(a, b) => eval_generic(a, x)? * eval_generic(b, x)?,
        Expr::Div(a, b) => {
            let den = eval_generic(b, x)?;
            if den.re() == 0.0 {
                return Err("division by zero".into());
            }
            eval_generic(a, x)? / den
        }
        Expr::Pow(a, k) => {
            let base = eval_generic(a, x)?;
            if *k < 0 && base.re() == 0.0 {
                return Err("negative power of zero".into());
            }
            base.powi(*k)
        }
        Expr::Neg(a) => -eval_generic(a, x)?,
        Expr::Call(f, a) => {
            let arg = eval_generic(a, x)?;
            match f {
                Func::Sin => arg.sin(),
                Func::Cos => arg.cos(),
                Func::Exp => arg.exp(),
                Func::Log => {
                    if arg.re() <= 0.0 {
                        return Err(format!("log of nonpositive value {}", arg.re()));
                    }
                    arg.ln()
                }
                Func::Sqrt => {
                    if arg.re() < 0.0 || (arg.re() == 0.0 && T::order() > 0) {
                        return Err(format!("sqrt is not differentiable at {}", arg.re()));
                    }
                    arg.sqrt()
                }
            }
        }
    })
}

/// `c(x)`, `∇c(x)` and, when weights are given, `∇²(yc)(x) = Σ y_i ∇²c_i(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapEval {
    pub value: Vector,
    pub jacobian: Matrix,
    pub weighted_hessian: Option<Matrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    n: usize,
    components: Vec<Expr>,
    sources: Vec<String>,
}

impl SmoothMap {
    pub fn parse<S: AsRef<str>>(components: &[S], n: usize) -> Result<Self> {
        let mut parsed = Vec::with_capacity(components.len());
        for (i, src) in components.iter().enumerate() {
            let e = parse_expr(src.as_ref(), n).map_err(|err| match err {
                Error::Syntax { pos, msg } => Error::Syntax { pos, msg: format!("component {}: {msg}", i + 1) },
                other => other,
            })?;
            parsed.push(e);
        }
        Ok(SmoothMap { n, components: parsed, sources: components.iter().map(|s| s.as_ref().to_string()).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    fn check_x(&self, x: &Vector) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("x has length {}, expected {}", x.len(), self.n)));
        }
        Ok(())
    }

    fn run<T: Scalar>(&self, i: usize, x: &[T]) -> Result<T> {
        let v = eval_generic(&self.components[i], x).map_err(|msg| Error::Evaluation { component: i + 1, msg })?;
        if !v.all_finite() {
            return Err(Error::Evaluation { component: i + 1, msg: "non-finite result".into() });
        }
        Ok(v)
    }

    pub fn value(&self, x: &Vector) -> Result<Vector> {
        self.check_x(x)?;
        let xs: Vec<f64> = x.iter().copied().collect();
        let vals = (0..self.m()).map(|i| self.run(i, &xs)).collect::<Result<Vec<f64>>>()?;
        Ok(Vector::from_vec(vals))
    }

    pub fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        self.check_x(x)?;
        let mut jac = Matrix::zeros(self.m(), self.n);
        for j in 0..self.n {
            let xs: Vec<Dual<f64>> = (0..self.n).map(|p| Dual::new(x[p], if p == j { 1.0 } else { 0.0 })).collect();
            for i in 0..self.m() {
                jac[(i, j)] = self.run(i, &xs)?.d;
            }
        }
        Ok(jac)
    }

    /// `∇²c_i(x)` for every component, one symmetric matrix each.
    pub fn component_hessians(&self, x: &Vector) -> Result<Vec<Matrix>> {
        self.check_x(x)?;
        let n = self.n;
        let mut out = vec![Matrix::zeros(n, n); self.m()];
        for a in 0..n {
            for b in a..n {
                let xs: Vec<Dual<Dual<f64>>> = (0..n)
                    .map(|p| {
                        let ea = if p == a { 1.0 } else { 0.0 };
                        let eb = if p == b { 1.0 } else { 0.0 };
                        Dual::new(Dual::new(x[p], ea), Dual::new(eb, 0.0))
                    })
                    .collect();
                for (i, hess) in out.iter_mut().enumerate() {
                    let v = self.run(i, &xs)?.d.d;
                    hess[(a, b)] = v;
                    hess[(b, a)] = v;
                }
            }
        }
        Ok(out)
    }

    pub fn weighted_hessian(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        if y.len() != self.m() {
            return Err(Error::Dimension(format!("y has length {}, expected {}", y.len(), self.m())));
        }
        let hs = self.component_hessians(x)?;
        let mut acc = Matrix::zeros(self.n, self.n);
        for (yi, hi) in y.iter().zip(hs.iter()) {
            acc += hi * *yi;
        }
        Ok(acc)
    }

    pub fn evaluate(&self, x: &Vector, y: Option<&Vector>) -> Result<MapEval> {
        let value = self.value(x)?;
        let jacobian = self.jacobian(x)?;
        let weighted_hessian = y.map(|y| self.weighted_hessian(x, y)).transpose()?;
        Ok(MapEval { value, jacobian, weighted_hessian })
    }

    /// Central-difference Jacobian with step `step`.
    pub fn fd_jacobian(&self, x: &Vector, step: f64) -> Result<Matrix> {
        let mut jac = Matrix::zeros(self.m(), self.n);
        for j in 0..self.n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += step;
            xm[j] -= step;
            let col = (self.value(&xp)? - self.value(&xm)?) / (2.0 * step);
            jac.set_column(j, &col);
        }
        Ok(jac)
    }

    /// Central second differences of `x ↦ ⟨y, c(x)⟩` with step `step`.
    pub fn fd_weighted_hessian(&self, x: &Vector, y: &Vector, step: f64) -> Result<Matrix> {
        let f = |z: &Vector| -> Result<f64> { Ok(self.value(z)?.dot(y)) };
        let n = self.n;
        let mut hess = Matrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let shifted = |sa: f64, sb: f64| {
                    let mut z = x.clone();
                    z[a] += sa * step;
                    z[b] += sb * step;
                    f(&z)
                };
                let v =
                    (shifted(1.0, 1.0)? - shifted(1.0, -1.0)? - shifted(-1.0, 1.0)? + shifted(-1.0, -1.0)?) / (4.0 * step * step);
                hess[(a, b)] = v;
                hess[(b, a)] = v;
            }
        }
        Ok(hess)
    }

    /// AD against central finite differences at one point.
    pub fn derivative_check(&self, x: &Vector, y: &Vector) -> Result<DerivativeCheck> {
        let jac = self.jacobian(x)?;
        let fdj = self.fd_jacobian(x, 1e-6)?;
        let hess = self.weighted_hessian(x, y)?;
        let fdh = self.fd_weighted_hessian(x, y, 1e-4)?;
        Ok(DerivativeCheck {
            jacobian_deviation: (&jac - &fdj).amax() / (1.0 + jac.amax()),
            hessian_deviation: (&hess - &fdh).amax() / (1.0 + hess.amax()),
            hessian_asymmetry: (&hess - hess.transpose()).amax(),
        })
    }
}

/// Scaled sup-norm gaps `‖AD − FD‖_∞ / (1 + ‖AD‖_∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub jacobian_deviation: f64,
    pub hessian_deviation: f64,
    pub hessian_asymmetry: f64,
}
