//! Variance comparisons between mechanisms and the auxiliary polynomials used
//! to reason about them.
//!
//! Most polynomials are written in `t = 1/(e^ε - 1)`, which turns the Duchi
//! term `((e^ε+1)/(e^ε-1))²` into `(1 + 2t)²`.

use super::moments::{variance_analytic, worst_case_variance};
use super::optimal::MIN_ETA;
use crate::domain::{PrivacyBudget, UnitValue};
use crate::error::{Error, Result};
use crate::mechanisms::MechanismKind;

fn same_budget(a: &MechanismKind, b: &MechanismKind) -> Result<()> {
    let (ea, eb) = (a.epsilon().value(), b.epsilon().value());
    if (ea - eb).abs() > 1e-12 * ea.max(eb) {
        return Err(Error::arg(format!(
            "mechanisms use different budgets ({ea} vs {eb})"
        )));
    }
    Ok(())
}

/// Pointwise variance difference `Var_A(x) - Var_B(x)`.
pub fn pointwise_gap(a: &MechanismKind, b: &MechanismKind, x: UnitValue) -> Result<f64> {
    same_budget(a, b)?;
    Ok(variance_analytic(a, x) - variance_analytic(b, x))
}

/// Difference of worst-case variances `max_x Var_A - max_x Var_B`.
pub fn worst_case_gap(a: &MechanismKind, b: &MechanismKind) -> Result<f64> {
    same_budget(a, b)?;
    Ok(worst_case_variance(a) - worst_case_variance(b))
}

/// Pointwise gap when `x` is given, worst-case gap otherwise.
pub fn noisy_variance_gaps(
    a: &MechanismKind,
    b: &MechanismKind,
    x: Option<UnitValue>,
) -> Result<f64> {
    match x {
        Some(x) => pointwise_gap(a, b, x),
        None => worst_case_gap(a, b),
    }
}

/// Type-I worst-case variance minus Duchi's, written directly in `ε` for a
/// free half-width `a`: `(η-1)a - 1 + a/(3(η-1))·(η³/(e^ε-1) + 1) - ((e^ε+1)/(e^ε-1))²`.
pub fn duchi_worst_case_gap_direct(epsilon: PrivacyBudget, a: f64, eta: f64) -> f64 {
    let em1 = epsilon.exp_m1();
    let atom = (epsilon.exp() + 1.0) / em1;
    (eta - 1.0) * a - 1.0 + a / (3.0 * (eta - 1.0)) * (eta.powi(3) / em1 + 1.0) - atom * atom
}

/// `t = 1/(e^ε - 1)`.
pub fn t_of(epsilon: PrivacyBudget) -> f64 {
    1.0 / epsilon.exp_m1()
}

/// Names of the auxiliary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonKind {
    /// Worst-case gap to Duchi as a quadratic in `t`; needs `a`, `η`.
    S1,
    /// Maximal pointwise gap to Duchi as a quadratic in `t`; needs `a`, `η`.
    P1,
    /// `S1` with `a` at its lower admissible bound `(1+t)/(η-1)`; needs `η`.
    P2,
    /// Lower bound of the linear coefficient of `P1`, in `η`; needs `ε`.
    I1,
    /// Discriminant of `P2`, in `η`.
    F1,
    F2,
    F3,
    F4,
    /// `η³ - 3η² - 2(e^ε - 1)`, in `η`; needs `ε`.
    EtaCubic,
}

impl ComparisonKind {
    pub const ALL: [ComparisonKind; 9] = [
        ComparisonKind::S1,
        ComparisonKind::P1,
        ComparisonKind::P2,
        ComparisonKind::I1,
        ComparisonKind::F1,
        ComparisonKind::F2,
        ComparisonKind::F3,
        ComparisonKind::F4,
        ComparisonKind::EtaCubic,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ComparisonKind::S1 => "s1",
            ComparisonKind::P1 => "p1",
            ComparisonKind::P2 => "p2",
            ComparisonKind::I1 => "i1",
            ComparisonKind::F1 => "f1",
            ComparisonKind::F2 => "f2",
            ComparisonKind::F3 => "f3",
            ComparisonKind::F4 => "f4",
            ComparisonKind::EtaCubic => "eta-cubic",
        }
    }

    /// Whether the function's variable is `t` rather than `η`.
    pub fn in_t(self) -> bool {
        matches!(
            self,
            ComparisonKind::S1 | ComparisonKind::P1 | ComparisonKind::P2
        )
    }
}

impl std::str::FromStr for ComparisonKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ComparisonKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::arg(format!("unknown comparison function '{s}'")))
    }
}

/// A fully parameterized auxiliary function of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComparisonPolynomial {
    S1 { a: f64, eta: f64 },
    P1 { a: f64, eta: f64 },
    P2 { eta: f64 },
    I1 { epsilon: PrivacyBudget },
    F1,
    F2,
    F3,
    F4,
    EtaCubic { epsilon: PrivacyBudget },
}

fn quad_s(t: f64, a: f64, eta: f64, constant: f64) -> f64 {
    let linear = 4.0 - a * eta.powi(3) / (3.0 * (eta - 1.0));
    -4.0 * t * t - linear * t + a / (3.0 * (eta - 1.0)) + (eta - 1.0) * a + constant
}

impl ComparisonPolynomial {
    /// Evaluates at `t` for the `S1`/`P1`/`P2` kinds and at `η` otherwise.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ComparisonPolynomial::S1 { a, eta } => quad_s(x, a, eta, -2.0),
            ComparisonPolynomial::P1 { a, eta } => quad_s(x, a, eta, -1.0),
            ComparisonPolynomial::P2 { eta } => {
                let u = 1.0 / (3.0 * (eta - 1.0).powi(2));
                let cube = eta.powi(3);
                (u * cube - 4.0) * x * x + (u * cube + u - 3.0) * x + u - 1.0
            }
            ComparisonPolynomial::I1 { epsilon } => {
                let e = epsilon.exp();
                4.0 - 2.0 * e * x.powi(3) / (3.0 * epsilon.exp_m1() * (x - 1.0).powi(2))
            }
            ComparisonPolynomial::F1 => {
                let u = 1.0 / (3.0 * (x - 1.0).powi(2));
                let cube = x.powi(3);
                (u * cube + u - 3.0).powi(2) - 4.0 * (u * cube - 4.0) * (u - 1.0)
            }
            ComparisonPolynomial::F2 => x.powi(3) - 12.0 * x * x + 24.0 * x - 12.0,
            ComparisonPolynomial::F3 => x.powi(3) + 3.0 * (x - 1.0).powi(2) - 12.0 * x + 13.0,
            ComparisonPolynomial::F4 => 1.0 - 3.0 * (x - 1.0).powi(2),
            ComparisonPolynomial::EtaCubic { epsilon } => super::optimal::eta_cubic(epsilon, x),
        }
    }
}

/// Builds the requested auxiliary function from optional parameters and
/// evaluates it at `x`.
pub fn comparison_polynomial(
    kind: ComparisonKind,
    x: f64,
    a: Option<f64>,
    eta: Option<f64>,
    epsilon: Option<PrivacyBudget>,
) -> Result<f64> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| Error::arg(format!("{kind:?} requires parameter {name}")))
    };
    let need_eps = || epsilon.ok_or_else(|| Error::arg(format!("{kind:?} requires epsilon")));
    let poly = match kind {
        ComparisonKind::S1 => ComparisonPolynomial::S1 {
            a: need(a, "a")?,
            eta: need(eta, "eta")?,
        },
        ComparisonKind::P1 => ComparisonPolynomial::P1 {
            a: need(a, "a")?,
            eta: need(eta, "eta")?,
        },
        ComparisonKind::P2 => ComparisonPolynomial::P2 {
            eta: need(eta, "eta")?,
        },
        ComparisonKind::I1 => ComparisonPolynomial::I1 {
            epsilon: need_eps()?,
        },
        ComparisonKind::F1 => ComparisonPolynomial::F1,
        ComparisonKind::F2 => ComparisonPolynomial::F2,
        ComparisonKind::F3 => ComparisonPolynomial::F3,
        ComparisonKind::F4 => ComparisonPolynomial::F4,
        ComparisonKind::EtaCubic => ComparisonPolynomial::EtaCubic {
            epsilon: need_eps()?,
        },
    };
    Ok(poly.eval(x))
}

/// Vertex `(t*, P1(t*))` of the downward parabola `P1`.
pub fn p1_vertex(a: f64, eta: f64) -> (f64, f64) {
    let linear = 4.0 - a * eta.powi(3) / (3.0 * (eta - 1.0));
    let t_star = -linear / 8.0;
    (t_star, ComparisonPolynomial::P1 { a, eta }.eval(t_star))
}

/// Signs of `f1..f4` at one `η` and which inequality systems hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub eta: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    /// `f1 ≤ 0` and `f2 < 0`: `P2` has no real root and a negative leading
    /// coefficient.
    pub nonpositive_discriminant: bool,
    /// `f1 > 0`, `f2 < 0`, `f3 ≤ 0`, `f4 ≤ 0`.
    pub positive_discriminant: bool,
}

pub fn feasibility_at(eta: f64) -> Result<FeasibilityReport> {
    if eta.is_nan() || eta < MIN_ETA || !eta.is_finite() {
        return Err(Error::arg(format!(
            "eta = {eta} below the scanner floor {MIN_ETA}"
        )));
    }
    let f1 = ComparisonPolynomial::F1.eval(eta);
    let f2 = ComparisonPolynomial::F2.eval(eta);
    let f3 = ComparisonPolynomial::F3.eval(eta);
    let f4 = ComparisonPolynomial::F4.eval(eta);
    Ok(FeasibilityReport {
        eta,
        f1,
        f2,
        f3,
        f4,
        nonpositive_discriminant: f1 <= 0.0 && f2 < 0.0,
        positive_discriminant: f1 > 0.0 && f2 < 0.0 && f3 <= 0.0 && f4 <= 0.0,
    })
}

/// One report per grid value; any value below the floor rejects the scan.
pub fn scan_eta_feasibility(grid: &[f64]) -> Result<Vec<FeasibilityReport>> {
    grid.iter().map(|&eta| feasibility_at(eta)).collect()
}

/// Type-II minus Type-I variance at matched `(k, a)`:
/// `a/(6(η-1))·(2η³/(e^ε-1) - 1)`.
pub fn type_ii_excess_variance(epsilon: PrivacyBudget, a: f64, eta: f64) -> Result<f64> {
    if !(a > 0.0 && eta > 1.0) {
        return Err(Error::arg(format!(
            "need a > 0 and eta > 1, got a = {a}, eta = {eta}"
        )));
    }
    Ok(a / (6.0 * (eta - 1.0)) * (2.0 * eta.powi(3) / epsilon.exp_m1() - 1.0))
}
