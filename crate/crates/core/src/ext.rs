use std::fmt;

use serde::{Serialize, Serializer};

/// A value in `R ∪ {+∞}`, kept tagged so infinities never enter float arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PlusInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PlusInf => None,
        }
    }

    /// `self <= bound`, with `+∞` never below a finite bound.
    pub fn le(self, bound: f64) -> bool {
        match self {
            ExtReal::Finite(v) => v <= bound,
            ExtReal::PlusInf => false,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PlusInf => write!(f, "+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PlusInf => s.serialize_str("+inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_is_never_below_a_bound() {
        assert!(!ExtReal::PlusInf.le(1e300));
        assert!(ExtReal::Finite(-1.0).le(0.0));
        assert_eq!(ExtReal::PlusInf.finite(), None);
        assert_eq!(ExtReal::PlusInf.to_string(), "+inf");
    }
}
