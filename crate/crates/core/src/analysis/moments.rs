//! Closed-form noisy variances and the piecewise-exact moment oracle.

use crate::domain::{PttFamily, PttParams, UnitValue};
use crate::mechanisms::{ptt_density, MechanismKind};

/// Variance of a single noisy report of `x`.
pub fn variance_analytic(mech: &MechanismKind, x: UnitValue) -> f64 {
    let x2 = x.value() * x.value();
    match mech {
        MechanismKind::Laplace { epsilon } => 8.0 / (epsilon.value() * epsilon.value()),
        MechanismKind::Duchi { atom, .. } => atom * atom - x2,
        MechanismKind::Ptt(p) => (p.k - 1.0) * x2 + ptt_base_variance(p),
    }
}

/// The input-independent part of a PTT variance.
pub fn ptt_base_variance(p: &PttParams) -> f64 {
    let em1 = p.epsilon.exp_m1();
    let cube = p.eta.powi(3);
    match p.family {
        PttFamily::TypeI => p.a / (3.0 * (p.eta - 1.0)) * (cube / em1 + 1.0),
        PttFamily::TypeII => p.a / (6.0 * (p.eta - 1.0)) * (4.0 * cube / em1 + 1.0),
    }
}

/// `max` over `x ∈ [-1, 1]` of the noisy variance.
///
/// Every variance here is `c₂x² + c₀`, so the maximum sits at `x = 0` or
/// `|x| = 1`: Laplace is flat, Duchi peaks at 0, and PTT peaks at `|x| = 1`
/// whenever `k > 1` (always true for normalized bundles).
pub fn worst_case_variance(mech: &MechanismKind) -> f64 {
    let at = |v: f64| variance_analytic(mech, UnitValue::new(v).unwrap());
    at(0.0).max(at(1.0))
}

/// Three-point Gauss–Legendre nodes and weights on `[-1, 1]`; exact for
/// polynomials up to degree five.
const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Sub-intervals of `[-B, B]` on which the PTT density is a polynomial of
/// degree at most one: split at the band edges and the band center.
pub fn density_breakpoints(params: &PttParams, x: UnitValue) -> Vec<f64> {
    let c = params.k * x.value();
    let mut pts = vec![
        -params.b,
        (c - params.a).max(-params.b),
        c,
        (c + params.a).min(params.b),
        params.b,
    ];
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn integrate<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    half * GAUSS3
        .iter()
        .map(|(n, w)| w * f(mid + half * n))
        .sum::<f64>()
}

/// Raw moments `∫ y^m f(y|x) dy` for `m = 0, 1, 2`.
fn raw_moments(params: &PttParams, x: UnitValue) -> [f64; 3] {
    let pts = density_breakpoints(params, x);
    let mut acc = [0.0; 3];
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        for (m, slot) in acc.iter_mut().enumerate() {
            *slot += integrate(lo, hi, |y| ptt_density(y, x, params) * y.powi(m as i32));
        }
    }
    acc
}

/// Total mass, mean and variance of a PTT output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Integrates the PTT density piece by piece. Each piece is at most linear,
/// so a three-point Gauss rule integrates `y^m f(y)` for `m ≤ 2` exactly and
/// only rounding error remains.
pub fn moments_by_quadrature(params: &PttParams, x: UnitValue) -> Moments {
    let [mass, first, second] = raw_moments(params, x);
    Moments {
        mass,
        mean: first,
        variance: second - first * first,
    }
}

/// `P(Y ≤ y | x)` by exact piecewise integration of the density.
pub fn ptt_cdf(y: f64, x: UnitValue, params: &PttParams) -> f64 {
    if y <= -params.b {
        return 0.0;
    }
    let pts = density_breakpoints(params, x);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if y <= lo {
            break;
        }
        total += integrate(lo, hi.min(y), |t| ptt_density(t, x, params));
    }
    total.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{derive_ptt_params, PrivacyBudget};

    fn unit(v: f64) -> UnitValue {
        UnitValue::new(v).unwrap()
    }

    fn params(family: PttFamily) -> PttParams {
        derive_ptt_params(PrivacyBudget::new(3f64.ln()).unwrap(), 2.0, family).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let e2 = PrivacyBudget::new(2.0).unwrap();
        assert_eq!(
            variance_analytic(&MechanismKind::laplace(e2), unit(0.3)),
            2.0
        );
        let t1 = MechanismKind::Ptt(params(PttFamily::TypeI));
        assert!((variance_analytic(&t1, unit(0.0)) - 10.0 / 3.0).abs() < 1e-13);
        let t2 = MechanismKind::Ptt(params(PttFamily::TypeII));
        assert!((variance_analytic(&t2, unit(1.0)) - 10.5).abs() < 1e-13);
        let d = MechanismKind::duchi(PrivacyBudget::new(3f64.ln()).unwrap());
        assert!((variance_analytic(&d, unit(0.5)) - 3.75).abs() < 1e-13);
    }

    #[test]
    fn quadrature_examples() {
        let p = params(PttFamily::TypeI);
        let m = moments_by_quadrature(&p, unit(0.3));
        assert!((m.mass - 1.0).abs() < 1e-12);
        assert!((m.mean - 0.3).abs() < 1e-12);
        assert!((m.variance - (10.0 / 3.0 + 0.09)).abs() < 1e-12);

        let p = params(PttFamily::TypeII);
        let m = moments_by_quadrature(&p, unit(0.0));
        assert!((m.mass - 1.0).abs() < 1e-12);
        assert_eq!(m.mean, 0.0);
        assert!((m.variance - 8.5).abs() < 1e-12);
    }

    #[test]
    fn cdf_spans_zero_to_one() {
        for family in [PttFamily::TypeI, PttFamily::TypeII] {
            let p = params(family);
            for x in [-1.0, -0.2, 0.7, 1.0] {
                assert_eq!(ptt_cdf(-p.b - 1.0, unit(x), &p), 0.0);
                assert!((ptt_cdf(p.b, unit(x), &p) - 1.0).abs() < 1e-12);
                assert!(
                    (ptt_cdf(p.k * x, unit(x), &p) - ptt_cdf(p.k * x - 1e-9, unit(x), &p)) < 1e-8
                );
            }
        }
        // left tail of TypeI at x = 0: [-4, -2] at density 1/16
        let p = params(PttFamily::TypeI);
        assert!((ptt_cdf(-2.0, unit(0.0), &p) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn worst_case_locations() {
        let eps = PrivacyBudget::new(1.0).unwrap();
        let d = MechanismKind::duchi(eps);
        assert_eq!(worst_case_variance(&d), variance_analytic(&d, unit(0.0)));
        let t = MechanismKind::Ptt(derive_ptt_params(eps, 1.9, PttFamily::TypeI).unwrap());
        assert_eq!(worst_case_variance(&t), variance_analytic(&t, unit(1.0)));
    }
}
