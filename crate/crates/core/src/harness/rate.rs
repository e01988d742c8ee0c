use serde::Serialize;

/// Errors at or below this are treated as exact convergence and dropped.
pub const USABLE_FLOOR: f64 = 1e-14;
const MIN_USABLE: usize = 4;
const QUADRATIC_BAND: f64 = 10.0;
const QUADRATIC_RATIO_CAP: f64 = 1e-2;
const LINEAR_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateClass {
    Quadratic,
    Superlinear,
    Linear { rho: f64 },
    None,
}

impl RateClass {
    pub fn label(&self) -> String {
        match self {
            RateClass::Quadratic => "quadratic".into(),
            RateClass::Superlinear => "superlinear".into(),
            RateClass::Linear { rho } => format!("linear({rho:.3e})"),
            RateClass::None => "none".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateVerdict {
    pub class: RateClass,
    /// Usable errors (those above the floor).
    pub used: usize,
    /// `e_{k+1} / e_k` over the usable errors.
    pub ratios: Vec<f64>,
    /// `e_{k+1} / e_k²` over the usable errors.
    pub quadratic_ratios: Vec<f64>,
    /// Geometric mean of the last three quadratic ratios when quadratic.
    pub quadratic_constant: Option<f64>,
    pub reason: Option<String>,
}

fn geometric_mean(v: &[f64]) -> f64 {
    (v.iter().map(|r| r.ln()).sum::<f64>() / v.len() as f64).exp()
}

/// Classifies an error sequence as quadratic, superlinear, linear or none.
///
/// Only finite errors above [`USABLE_FLOOR`] are used and at least four are needed.
/// * quadratic: the last three `e₊/e²` lie within a factor 10 of each other and the last `e₊/e < 10⁻²`;
/// * linear(ρ): the last (up to five) `e₊/e` lie in `[ρ/2, 2ρ]` for their geometric mean `ρ < 1`;
/// * superlinear: otherwise, when those ratios are strictly decreasing and below 1.
pub fn classify_rate(errors: &[f64]) -> RateVerdict {
    let usable: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite() && *e > USABLE_FLOOR).collect();
    let ratios: Vec<f64> = usable.windows(2).map(|w| w[1] / w[0]).collect();
    let quadratic_ratios: Vec<f64> = usable.windows(2).map(|w| w[1] / (w[0] * w[0])).collect();
    let mut verdict = RateVerdict {
        class: RateClass::None,
        used: usable.len(),
        ratios,
        quadratic_ratios,
        quadratic_constant: None,
        reason: None,
    };
    if usable.len() < MIN_USABLE {
        verdict.reason = Some(format!("{} usable errors above {USABLE_FLOOR:e}; at least {MIN_USABLE} needed", usable.len()));
        return verdict;
    }
    let q = &verdict.quadratic_ratios[verdict.quadratic_ratios.len() - 3..];
    let (qmin, qmax) = q.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let last = *verdict.ratios.last().expect("at least three ratios");
    if qmax <= QUADRATIC_BAND * qmin && last < QUADRATIC_RATIO_CAP {
        verdict.class = RateClass::Quadratic;
        verdict.quadratic_constant = Some(geometric_mean(q));
        return verdict;
    }
    let w = &verdict.ratios[verdict.ratios.len() - LINEAR_WINDOW.min(verdict.ratios.len())..];
    let rho = geometric_mean(w);
    if rho < 1.0 && w.iter().all(|&r| r >= rho / 2.0 && r <= 2.0 * rho) {
        verdict.class = RateClass::Linear { rho };
        return verdict;
    }
    if w.windows(2).all(|p| p[1] < p[0]) && last < 1.0 {
        verdict.class = RateClass::Superlinear;
        return verdict;
    }
    verdict.reason = Some("ratios fit no rate band".into());
    verdict
}
