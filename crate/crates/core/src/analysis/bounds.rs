//! Lower bound on the Type-I worst-case variance for small budgets.
//!
//! With `t = 1/(e^ε - 1)` the bound is `g₁ = θ₁t² + θ₂t`. The constants are
//! the largest values keeping `Ψ₁(η) = η³ - 3θ₁(η-1)²` and
//! `Ψ₂(η) = η³ - 3(θ₂-1)(η-1)² + 1` nonnegative on `η > 1`; each `Ψ` touches
//! zero at one tangency point (`η = 3` and `η = 1 + c` respectively).

use std::sync::OnceLock;

use crate::domain::PrivacyBudget;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundConstants {
    pub theta1: f64,
    pub theta2: f64,
}

impl LowerBoundConstants {
    pub fn get() -> LowerBoundConstants {
        static CONSTANTS: OnceLock<LowerBoundConstants> = OnceLock::new();
        *CONSTANTS.get_or_init(|| {
            let c = tangency_offset();
            LowerBoundConstants {
                theta1: 9.0 / 4.0,
                theta2: 1.0 + ((1.0 + c).powi(3) + 1.0) / (3.0 * c * c),
            }
        })
    }

    pub fn to_json(&self) -> String {
        format!(
            "{{\"theta1\":{},\"theta2\":{}}}",
            crate::fmt::real(self.theta1),
            crate::fmt::real(self.theta2)
        )
    }
}

/// Real root `c = ∛(2+√3) + ∛(2-√3)` of `y³ - 3y - 4`; `Ψ₂` is tangent to
/// zero at `η = 1 + c`.
pub fn tangency_offset() -> f64 {
    let r = 3f64.sqrt();
    (2.0 + r).cbrt() + (2.0 - r).cbrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundCurves {
    pub g1: f64,
    pub h1: f64,
    pub h2: f64,
    pub psi1: f64,
    pub psi2: f64,
}

pub fn psi1(eta: f64) -> f64 {
    eta.powi(3) - 3.0 * LowerBoundConstants::get().theta1 * (eta - 1.0).powi(2)
}

pub fn psi2(eta: f64) -> f64 {
    eta.powi(3) - 3.0 * (LowerBoundConstants::get().theta2 - 1.0) * (eta - 1.0).powi(2) + 1.0
}

/// `g₁(ε) = θ₁/(e^ε-1)² + θ₂/(e^ε-1)`.
pub fn lower_bound_g1(epsilon: PrivacyBudget) -> f64 {
    let LowerBoundConstants { theta1, theta2 } = LowerBoundConstants::get();
    let em1 = epsilon.exp_m1();
    theta1 / (em1 * em1) + theta2 / em1
}

/// Worst-case variance floor obtained by putting `a` at its lower bound
/// `e^ε/((e^ε-1)(η-1))`, written in `ε`.
pub fn lower_bound_h1(epsilon: PrivacyBudget, eta: f64) -> f64 {
    let e = epsilon.exp();
    let em1 = epsilon.exp_m1();
    let sq = (eta - 1.0).powi(2);
    1.0 / em1 + e * eta.powi(3) / (3.0 * em1 * em1 * sq) + e / (3.0 * em1 * sq)
}

/// `h₂ = h₁ - g₁ = (Ψ₁t² + Ψ₂t + 1) / (3(η-1)²)`, evaluated in `t`.
pub fn lower_bound_h2(t: f64, eta: f64) -> f64 {
    (psi1(eta) * t * t + psi2(eta) * t + 1.0) / (3.0 * (eta - 1.0).powi(2))
}

pub fn lower_bound_curves(epsilon: PrivacyBudget, eta: f64) -> Result<LowerBoundCurves> {
    if !(eta > 1.0 && eta.is_finite()) {
        return Err(Error::arg(format!("need eta > 1, got {eta}")));
    }
    Ok(LowerBoundCurves {
        g1: lower_bound_g1(epsilon),
        h1: lower_bound_h1(epsilon, eta),
        h2: lower_bound_h2(1.0 / epsilon.exp_m1(), eta),
        psi1: psi1(eta),
        psi2: psi2(eta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        let k = LowerBoundConstants::get();
        assert_eq!(k.theta1, 2.25);
        let c = tangency_offset();
        assert!((c.powi(3) - 3.0 * c - 4.0).abs() < 1e-13);
        assert!((c - 2.196).abs() < 1e-3);
        assert!((k.theta2 - 3.32562).abs() < 1e-5);
    }

    #[test]
    fn tangency_points() {
        assert!(psi1(3.0).abs() < 1e-12);
        let c = tangency_offset();
        assert!(psi2(1.0 + c).abs() < 1e-12);
    }

    #[test]
    fn g1_at_one() {
        let g = lower_bound_g1(PrivacyBudget::new(1.0).unwrap());
        assert!((g - 2.698).abs() < 1e-3);
    }

    #[test]
    fn h2_is_h1_minus_g1() {
        for &e in &[0.05, 0.5, 2.0] {
            let eps = PrivacyBudget::new(e).unwrap();
            for &eta in &[1.2, 3.0, 7.0] {
                let c = lower_bound_curves(eps, eta).unwrap();
                assert!((c.h1 - c.g1 - c.h2).abs() <= 1e-10 * c.h1.abs().max(1.0));
            }
        }
        assert!(lower_bound_curves(PrivacyBudget::new(1.0).unwrap(), 1.0).is_err());
    }
}
