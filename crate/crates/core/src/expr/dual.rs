use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalars the expression evaluator can run on: plain floats and nested dual numbers.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    /// The primal (innermost real) part.
    fn re(&self) -> f64;
    /// Nesting depth: 0 for `f64`.
    fn order() -> usize;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
    fn all_finite(&self) -> bool;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn order() -> usize {
        0
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// `v + d·ε` with `ε² = 0`; nesting gives second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub v: T,
    pub d: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(v: T, d: T) -> Self {
        Dual { v, d }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual { v: self.v.clone() * o.v.clone(), d: self.v * o.d + self.d * o.v }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v.clone();
        Dual { d: (self.d - q.clone() * o.d) / o.v, v: q }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { v: -self.v, d: -self.d }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(v: f64) -> Self {
        Dual { v: T::constant(v), d: T::constant(0.0) }
    }
    fn re(&self) -> f64 {
        self.v.re()
    }
    fn order() -> usize {
        T::order() + 1
    }
    fn sin(&self) -> Self {
        Dual { v: self.v.sin(), d: self.d.clone() * self.v.cos() }
    }
    fn cos(&self) -> Self {
        Dual { v: self.v.cos(), d: -(self.d.clone() * self.v.sin()) }
    }
    fn exp(&self) -> Self {
        let e = self.v.exp();
        Dual { v: e.clone(), d: self.d.clone() * e }
    }
    fn ln(&self) -> Self {
        Dual { v: self.v.ln(), d: self.d.clone() / self.v.clone() }
    }
    fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        Dual { v: s.clone(), d: self.d.clone() / (s * T::constant(2.0)) }
    }
    fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Self::constant(1.0);
        }
        Dual { v: self.v.powi(k), d: self.d.clone() * T::constant(f64::from(k)) * self.v.powi(k - 1) }
    }
    fn all_finite(&self) -> bool {
        self.v.all_finite() && self.d.all_finite()
    }
}
