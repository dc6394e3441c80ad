//! Variance-optimal shape ratio `η`.
//!
//! Two answers are provided and intentionally not reconciled:
//!
//! * the closed-form root `η₀` of `η³ - 3η² - 2(e^ε - 1)`, which minimizes the
//!   Type-I variance when `q` (and so `k`) is held fixed while `η` moves;
//! * a numeric minimizer over the normalized family, where `k`, `a` and `q`
//!   all follow from `(ε, η)`.

use super::moments::variance_analytic;
use super::solve::grid_then_golden;
use crate::domain::{derive_ptt_params, optimal_eta, PrivacyBudget, PttFamily, UnitValue};
use crate::error::{Error, Result};
use crate::mechanisms::MechanismKind;

/// Smallest `η` any scanner or minimizer evaluates; the variance blows up as
/// `(η - 1)⁻²` below it.
pub const MIN_ETA: f64 = 1.0 + 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalEta {
    pub eta0: f64,
    /// `f(η₀) = η₀³ - 3η₀² - 2(e^ε - 1)`.
    pub residual: f64,
    /// Band half-width paired with `η₀` for a fixed in-band mass `q`.
    pub a: Option<f64>,
}

/// The cubic whose positive root is `η₀`.
pub fn eta_cubic(epsilon: PrivacyBudget, eta: f64) -> f64 {
    eta * eta * (eta - 3.0) - 2.0 * epsilon.exp_m1()
}

/// `a = e^ε / (q (e^ε - 1) (η₀ - 1))`.
pub fn fixed_q_half_width(epsilon: PrivacyBudget, q: f64) -> f64 {
    let k = epsilon.exp() / (q * epsilon.exp_m1());
    k / (optimal_eta(epsilon) - 1.0)
}

pub fn optimal_eta_closed_form(epsilon: PrivacyBudget, q: Option<f64>) -> Result<OptimalEta> {
    let eta0 = optimal_eta(epsilon);
    let a = match q {
        Some(q) if (0.5..1.0).contains(&q) => Some(fixed_q_half_width(epsilon, q)),
        Some(q) => return Err(Error::arg(format!("q = {q} outside [1/2, 1)"))),
        None => None,
    };
    Ok(OptimalEta {
        eta0,
        residual: eta_cubic(epsilon, eta0),
        a,
    })
}

/// Type-I variance with `k` factored out, as a function of `η` alone:
/// `(η³/(e^ε - 1) + 1) / (3(η - 1)²)`.
pub fn fixed_q_objective(epsilon: PrivacyBudget, eta: f64) -> f64 {
    (eta.powi(3) / epsilon.exp_m1() + 1.0) / (3.0 * (eta - 1.0).powi(2))
}

/// Type-I variance at input `x` for a fixed in-band mass `q`, as `η` varies.
pub fn fixed_q_variance(epsilon: PrivacyBudget, q: f64, eta: f64, x: f64) -> f64 {
    let k = epsilon.exp() / (q * epsilon.exp_m1());
    (k - 1.0) * x * x + k * fixed_q_objective(epsilon, eta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceMinimum {
    pub eta_star: f64,
    pub var_star: f64,
}

const SCAN_POINTS: usize = 400;
const ETA_TOLERANCE: f64 = 1e-6;

/// Noisy variance of the normalized family at `(ε, η)` and input `x`.
pub fn normalized_variance(
    epsilon: PrivacyBudget,
    eta: f64,
    x: UnitValue,
    family: PttFamily,
) -> Result<f64> {
    let params = derive_ptt_params(epsilon, eta, family)?;
    Ok(variance_analytic(&MechanismKind::Ptt(params), x))
}

/// Minimizes the normalized-family variance over the admissible `η` range.
pub fn min_variance_numeric(
    epsilon: PrivacyBudget,
    x: UnitValue,
    family: PttFamily,
) -> Result<VarianceMinimum> {
    let hi = family.max_eta(epsilon);
    if hi <= MIN_ETA {
        return Err(Error::param(format!(
            "admissible eta range (1, {hi}] is empty at epsilon = {}",
            epsilon.value()
        )));
    }
    let f = |eta: f64| {
        normalized_variance(epsilon, eta.clamp(MIN_ETA, hi), x, family).unwrap_or(f64::INFINITY)
    };
    let (eta_star, var_star) = grid_then_golden(f, MIN_ETA, hi, SCAN_POINTS, ETA_TOLERANCE);
    Ok(VarianceMinimum { eta_star, var_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::solve::bisect;

    fn eps(v: f64) -> PrivacyBudget {
        PrivacyBudget::new(v).unwrap()
    }

    #[test]
    fn closed_form_matches_bisection() {
        let e = eps(3f64.ln());
        let r = optimal_eta_closed_form(e, None).unwrap();
        let oracle = bisect(|x| x * x * x - 3.0 * x * x - 4.0, 3.0, 4.0, 1e-14, 200).unwrap();
        assert!((r.eta0 - oracle).abs() < 1e-9);
        assert!((r.eta0 - 3.3553).abs() < 1e-4);
    }

    #[test]
    fn small_budget_limit_is_three() {
        let r = optimal_eta_closed_form(eps(1e-12), None).unwrap();
        assert!((r.eta0 - 3.0).abs() < 1e-3);
    }

    #[test]
    fn residual_vanishes_on_grid() {
        for i in 1..=100 {
            let e = eps(0.1 * i as f64);
            let r = optimal_eta_closed_form(e, None).unwrap();
            assert!(
                r.residual.abs() <= 1e-9 * e.exp().max(1.0),
                "eps {}: {}",
                e.value(),
                r.residual
            );
        }
    }

    #[test]
    fn fixed_q_half_width_formula() {
        let e = eps(1.0);
        let r = optimal_eta_closed_form(e, Some(0.75)).unwrap();
        let ee = 1f64.exp();
        let s = ((ee + 1.0) * (ee - 1.0)).sqrt();
        let expected = (ee / (0.75 * (ee - 1.0))) / ((ee + s).cbrt() + (ee - s).cbrt());
        assert!((r.a.unwrap() - expected).abs() < 1e-12);
        assert!(optimal_eta_closed_form(e, Some(0.2)).is_err());
    }

    #[test]
    fn numeric_minimum_is_local() {
        let e = eps(3f64.ln());
        let x = UnitValue::new(1.0).unwrap();
        let m = min_variance_numeric(e, x, PttFamily::TypeI).unwrap();
        for delta in [-1e-3, 1e-3] {
            let v = normalized_variance(e, m.eta_star + delta, x, PttFamily::TypeI).unwrap();
            assert!(v >= m.var_star);
        }
    }

    #[test]
    fn tiny_budget_minimizer_near_two() {
        let e = eps(1e-4);
        let m = min_variance_numeric(e, UnitValue::new(1.0).unwrap(), PttFamily::TypeI).unwrap();
        assert!((m.eta_star - 2.0).abs() < 1e-2, "{}", m.eta_star);
        assert!(
            (1e-8 * m.var_star - 16.0 / 3.0).abs() < 1e-2,
            "{}",
            1e-8 * m.var_star
        );
    }

    #[test]
    fn minimizer_depends_on_input() {
        // (k - 1)x² = η t x² grows with η, pulling the x = 1 minimizer below
        // the x = 0 one.
        for &v in &[0.1, 1.0, 3.0] {
            let e = eps(v);
            let at0 =
                min_variance_numeric(e, UnitValue::new(0.0).unwrap(), PttFamily::TypeI).unwrap();
            let at1 =
                min_variance_numeric(e, UnitValue::new(1.0).unwrap(), PttFamily::TypeI).unwrap();
            assert!(
                at1.eta_star < at0.eta_star,
                "eps {v}: {} vs {}",
                at1.eta_star,
                at0.eta_star
            );
        }
    }
}
