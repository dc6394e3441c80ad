//! Domain types, budget composition, input rescaling and derivation of
//! piecewise-transformation parameter bundles.
//!
//! A piecewise transformation (PTT) maps an input `A ∈ [-1, 1]` to a band
//! `[kA - a, kA + a]` that carries elevated density inside the support
//! `[-B, B]`, `B = k + a`. Everything a sampler or a density needs lives in
//! [`PttParams`]; the canonical free parameters are the budget `ε` and the
//! shape ratio `η = B / a`. Requiring the density to integrate to one fixes
//! the remaining quantities `(k, a, p, q)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::real;

/// Relative tolerance used when checking parameter identities.
pub const PARAM_TOLERANCE: f64 = 1e-12;

/// `e^ε - 1` without cancellation for small budgets.
#[inline]
pub fn exp_m1(epsilon: f64) -> f64 {
    epsilon.exp_m1()
}

/// A privacy budget `ε > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PrivacyBudget(f64);

impl PrivacyBudget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() && epsilon > 0.0 {
            Ok(PrivacyBudget(epsilon))
        } else {
            Err(Error::param(format!(
                "privacy budget must be positive and finite, got {epsilon}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `e^ε`.
    #[inline]
    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    /// `e^ε - 1`, accurate for tiny budgets.
    #[inline]
    pub fn exp_m1(self) -> f64 {
        exp_m1(self.0)
    }
}

impl TryFrom<f64> for PrivacyBudget {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        PrivacyBudget::new(v)
    }
}

impl From<PrivacyBudget> for f64 {
    fn from(b: PrivacyBudget) -> f64 {
        b.0
    }
}

/// A private attribute value in `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct UnitValue(f64);

impl UnitValue {
    pub fn new(value: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&value) {
            Ok(UnitValue(value))
        } else {
            Err(Error::OutOfRange {
                value,
                lo: -1.0,
                hi: 1.0,
            })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// The original interval `[lo, hi]` of an attribute before rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBounds {
    lo: f64,
    hi: f64,
}

impl DomainBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(DomainBounds { lo, hi })
        } else {
            Err(Error::arg(format!(
                "domain bounds need finite lo < hi, got [{lo}, {hi}]"
            )))
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// Affine map of `u ∈ [lo, hi]` onto `[-1, 1]`.
pub fn rescale_to_unit(u: f64, bounds: DomainBounds) -> Result<UnitValue> {
    let DomainBounds { lo, hi } = bounds;
    if !(lo..=hi).contains(&u) {
        return Err(Error::OutOfRange { value: u, lo, hi });
    }
    let width = hi - lo;
    let v = 2.0 * u / width - (hi + lo) / width;
    // rounding can push endpoints a hair past ±1
    UnitValue::new(v.clamp(-1.0, 1.0))
}

/// Inverse of [`rescale_to_unit`]. Accepts any real since noisy reports leave
/// the unit interval.
pub fn rescale_from_unit(v: f64, bounds: DomainBounds) -> f64 {
    let DomainBounds { lo, hi } = bounds;
    (v * (hi - lo) + (hi + lo)) / 2.0
}

/// Sequential composition: running mechanisms with budgets `εᵢ` is `Σεᵢ`-LDP.
pub fn compose_budgets(budgets: &[PrivacyBudget]) -> Result<PrivacyBudget> {
    if budgets.is_empty() {
        return Err(Error::arg("cannot compose an empty sequence of budgets"));
    }
    PrivacyBudget::new(budgets.iter().map(|b| b.value()).sum())
}

/// Band profile of a piecewise transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PttFamily {
    /// Constant density `p` across the band.
    #[serde(rename = "type-i")]
    TypeI,
    /// Symmetric tent peaking at `p` in the band center and falling to the
    /// out-of-band level `p / e^ε` at the band edges.
    #[serde(rename = "type-ii")]
    TypeII,
}

impl PttFamily {
    pub fn label(self) -> &'static str {
        match self {
            PttFamily::TypeI => "type-i",
            PttFamily::TypeII => "type-ii",
        }
    }

    /// Largest admissible `η` at budget `ε`; beyond it the in-band mass drops
    /// below one half.
    pub fn max_eta(self, epsilon: PrivacyBudget) -> f64 {
        let e = epsilon.exp();
        match self {
            PttFamily::TypeI => 1.0 + e,
            PttFamily::TypeII => (e + 3.0) / 2.0,
        }
    }
}

impl std::str::FromStr for PttFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "type-i" => Ok(PttFamily::TypeI),
            "type-ii" => Ok(PttFamily::TypeII),
            other => Err(Error::arg(format!(
                "unknown family '{other}', expected type-i or type-ii"
            ))),
        }
    }
}

/// Fully derived parameters of one PTT instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PttParams {
    pub epsilon: f64,
    pub eta: f64,
    /// Slope of the band center `kA`.
    pub k: f64,
    /// Band half-width.
    pub a: f64,
    /// Support half-width, `k + a`.
    #[serde(rename = "B")]
    pub b: f64,
    /// Peak density.
    pub p: f64,
    /// Probability mass inside the band.
    pub q: f64,
    pub family: PttFamily,
    /// Set when the bundle does not describe a proper density. Such bundles
    /// are usable for closed-form analysis but refused by samplers.
    #[serde(default)]
    pub analysis_only: bool,
}

impl PttParams {
    pub fn budget(&self) -> PrivacyBudget {
        PrivacyBudget(self.epsilon)
    }

    /// Left band edge `kA - a`.
    #[inline]
    pub fn band_lo(&self, x: f64) -> f64 {
        self.k * x - self.a
    }

    /// Right band edge `kA + a`.
    #[inline]
    pub fn band_hi(&self, x: f64) -> f64 {
        self.k * x + self.a
    }

    /// Density outside the band.
    #[inline]
    pub fn floor_density(&self) -> f64 {
        self.p / self.epsilon.exp()
    }

    /// Probability mass carried by the band under the family profile.
    pub fn band_mass(&self) -> f64 {
        let e = self.epsilon.exp();
        match self.family {
            PttFamily::TypeI => 2.0 * self.a * self.p,
            PttFamily::TypeII => self.a * self.p * (e + 1.0) / e,
        }
    }

    /// Probability mass outside the band, `2kp / e^ε`.
    pub fn tail_mass(&self) -> f64 {
        2.0 * self.k * self.floor_density()
    }

    /// Flat JSON object with a fixed key order and 17-digit reals.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"epsilon\":{},\"eta\":{},\"k\":{},\"a\":{},\"B\":{},\"p\":{},\"q\":{},\"family\":\"{}\",\"analysis_only\":{}}}",
            real(self.epsilon),
            real(self.eta),
            real(self.k),
            real(self.a),
            real(self.b),
            real(self.p),
            real(self.q),
            self.family.label(),
            self.analysis_only
        )
    }

    /// Parses the [`to_json`](Self::to_json) format. Bundles not flagged
    /// analysis-only must pass [`validate_params`].
    pub fn from_json(text: &str) -> Result<Self> {
        let params: PttParams = serde_json::from_str(text)
            .map_err(|e| Error::arg(format!("malformed parameter JSON: {e}")))?;
        if !params.analysis_only {
            let report = validate_params(&params);
            if let Some(bad) = report.failures().next() {
                return Err(Error::param(format!(
                    "parameter file fails invariant '{}' (residual {:e})",
                    bad.name, bad.residual
                )));
            };
        }
        Ok(params)
    }
}

/// Derives the normalized parameter bundle for `(ε, η)`.
pub fn derive_ptt_params(epsilon: PrivacyBudget, eta: f64, family: PttFamily) -> Result<PttParams> {
    let upper = family.max_eta(epsilon);
    if !(eta > 1.0 && eta <= upper * (1.0 + PARAM_TOLERANCE)) {
        return Err(Error::param(format!(
            "eta = {eta} outside the admissible interval (1, {upper}] for {} at epsilon = {}",
            family.label(),
            epsilon.value()
        )));
    }
    let e = epsilon.exp();
    let em1 = epsilon.exp_m1();
    let params = match family {
        PttFamily::TypeI => {
            let k = (eta - 1.0 + e) / em1;
            let a = k / (eta - 1.0);
            let q = e / (eta - 1.0 + e);
            PttParams {
                epsilon: epsilon.value(),
                eta,
                k,
                a,
                b: k + a,
                p: q / (2.0 * a),
                q,
                family,
                analysis_only: false,
            }
        }
        PttFamily::TypeII => {
            let k = (e + 1.0 + 2.0 * (eta - 1.0)) / em1;
            let a = k / (eta - 1.0);
            PttParams {
                epsilon: epsilon.value(),
                eta,
                k,
                a,
                b: k + a,
                p: e / (a * k * em1),
                q: (e + 1.0) / (k * em1),
                family,
                analysis_only: false,
            }
        }
    };
    Ok(params)
}

/// Named parameter choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    /// `η = e^{ε/2} + 1`: the piecewise mechanism with constant-width band.
    PiecewiseMechanism,
    /// `η = 19/10`.
    NineteenTenths,
    /// Closed-form variance-optimal `η₀` with a caller-fixed `q`; the result
    /// generally does not integrate to one and is flagged analysis-only.
    ClosedFormOptimal,
}

impl std::str::FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pm" => Ok(PresetName::PiecewiseMechanism),
            "theorem9" => Ok(PresetName::NineteenTenths),
            "optimal" => Ok(PresetName::ClosedFormOptimal),
            other => Err(Error::arg(format!(
                "unknown preset '{other}', expected pm, theorem9 or optimal"
            ))),
        }
    }
}

/// Root `η₀ > 1` of `η³ - 3η² - 2(e^ε - 1)`, via Cardano.
///
/// The two cube-root arguments `e^ε ± √(e^{2ε} - 1)` multiply to one, so the
/// smaller one is taken as the reciprocal of the larger to avoid cancellation.
pub fn optimal_eta(epsilon: PrivacyBudget) -> f64 {
    let e = epsilon.exp();
    let root = ((e + 1.0) * epsilon.exp_m1()).sqrt();
    let c = (e + root).cbrt();
    1.0 + c + 1.0 / c
}

pub fn preset_params(
    name: PresetName,
    epsilon: PrivacyBudget,
    q_for_optimal: Option<f64>,
) -> Result<PttParams> {
    match name {
        PresetName::PiecewiseMechanism => {
            let eta = (epsilon.value() / 2.0).exp() + 1.0;
            derive_ptt_params(epsilon, eta, PttFamily::TypeI)
        }
        PresetName::NineteenTenths => derive_ptt_params(epsilon, 1.9, PttFamily::TypeI),
        PresetName::ClosedFormOptimal => {
            let q = q_for_optimal
                .ok_or_else(|| Error::arg("the optimal preset requires --q in [1/2, 1)"))?;
            if !(0.5..1.0).contains(&q) {
                return Err(Error::arg(format!("q = {q} outside [1/2, 1)")));
            }
            let eta = optimal_eta(epsilon);
            let e = epsilon.exp();
            let em1 = epsilon.exp_m1();
            let k = e / (q * em1);
            let a = k / (eta - 1.0);
            Ok(PttParams {
                epsilon: epsilon.value(),
                eta,
                k,
                a,
                b: k + a,
                p: e / (2.0 * a * k * em1),
                q,
                family: PttFamily::TypeI,
                analysis_only: true,
            })
        }
    }
}

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn rel(x: f64, target: f64) -> f64 {
    let scale = target.abs().max(f64::MIN_POSITIVE);
    ((x - target) / scale).abs()
}

/// Checks every parameter invariant and reports the residual of each.
pub fn validate_params(params: &PttParams) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name, residual: f64, tol: f64| {
        checks.push(InvariantCheck {
            name,
            passed: residual.is_finite() && residual <= tol,
            residual,
        })
    };

    let eps = params.epsilon;
    let eps_ok = eps.is_finite() && eps > 0.0;
    push(
        "epsilon_positive",
        if eps_ok { 0.0 } else { f64::INFINITY },
        0.0,
    );
    let positive = [params.k, params.a, params.b, params.p]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
    push(
        "positive_fields",
        if positive { 0.0 } else { f64::INFINITY },
        0.0,
    );
    if !eps_ok {
        return ValidationReport { checks };
    }

    let e = eps.exp();
    let em1 = exp_m1(eps);
    push(
        "support_sum",
        rel(params.b, params.k + params.a),
        PARAM_TOLERANCE,
    );
    push(
        "eta_ratio",
        rel(params.eta, params.b / params.a),
        PARAM_TOLERANCE,
    );
    push(
        "slope_relation",
        rel(params.k, (params.eta - 1.0) * params.a),
        PARAM_TOLERANCE,
    );

    let q_excess = if params.q < 0.5 {
        0.5 - params.q
    } else if params.q >= 1.0 {
        params.q - 1.0 + f64::EPSILON
    } else {
        0.0
    };
    push("q_range", q_excess, 0.0);

    let upper = params.family.max_eta(PrivacyBudget(eps));
    let eta_excess = if params.eta <= 1.0 {
        1.0 - params.eta + f64::EPSILON
    } else {
        ((params.eta - upper) / upper).max(0.0)
    };
    push("eta_admissible", eta_excess, PARAM_TOLERANCE);

    let (q_expected, p_expected) = match params.family {
        PttFamily::TypeI => (e / (params.k * em1), e / (2.0 * params.a * params.k * em1)),
        PttFamily::TypeII => (
            (e + 1.0) / (params.k * em1),
            e / (params.a * params.k * em1),
        ),
    };
    push("q_formula", rel(params.q, q_expected), PARAM_TOLERANCE);
    push("p_formula", rel(params.p, p_expected), PARAM_TOLERANCE);
    push(
        "band_mass",
        rel(params.band_mass(), params.q),
        PARAM_TOLERANCE,
    );
    push(
        "normalization",
        (params.band_mass() + params.tail_mass() - 1.0).abs(),
        PARAM_TOLERANCE,
    );
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn eps(v: f64) -> PrivacyBudget {
        PrivacyBudget::new(v).unwrap()
    }

    #[test]
    fn rescale_examples() {
        let b = DomainBounds::new(0.0, 10.0).unwrap();
        assert_eq!(rescale_to_unit(0.0, b).unwrap().value(), -1.0);
        assert_eq!(rescale_to_unit(10.0, b).unwrap().value(), 1.0);
        assert_eq!(rescale_to_unit(7.5, b).unwrap().value(), 0.5);
        assert_eq!(rescale_from_unit(0.0, b), 5.0);
        assert_eq!(rescale_from_unit(-1.0, b), 0.0);
        assert_eq!(rescale_from_unit(2.0, b), 15.0);
    }

    #[test]
    fn rescale_rejects_out_of_range() {
        let b = DomainBounds::new(0.0, 10.0).unwrap();
        match rescale_to_unit(10.5, b) {
            Err(Error::OutOfRange { value, .. }) => assert_eq!(value, 10.5),
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(DomainBounds::new(1.0, 1.0).is_err());
        assert!(DomainBounds::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn budgets_compose_by_summation() {
        let c = compose_budgets(&[eps(0.3), eps(0.5)]).unwrap();
        assert!(close(c.value(), 0.8, 1e-15));
        assert_eq!(compose_budgets(&[eps(1.0)]).unwrap().value(), 1.0);
        let tenth = vec![eps(0.1); 10];
        assert!(close(compose_budgets(&tenth).unwrap().value(), 1.0, 1e-15));
        assert!(compose_budgets(&[]).is_err());
        assert!(PrivacyBudget::new(0.0).is_err());
        assert!(PrivacyBudget::new(f64::NAN).is_err());
    }

    #[test]
    fn derive_type_i_ln3() {
        let p = derive_ptt_params(eps(3f64.ln()), 2.0, PttFamily::TypeI).unwrap();
        assert!(close(p.q, 0.75, 1e-14));
        assert!(close(p.k, 2.0, 1e-14));
        assert!(close(p.a, 2.0, 1e-14));
        assert!(close(p.b, 4.0, 1e-14));
        assert!(close(p.p, 3.0 / 16.0, 1e-14));
        assert!(validate_params(&p).passed());
    }

    #[test]
    fn derive_type_ii_ln3() {
        let p = derive_ptt_params(eps(3f64.ln()), 2.0, PttFamily::TypeII).unwrap();
        assert!(close(p.k, 3.0, 1e-14));
        assert!(close(p.a, 3.0, 1e-14));
        assert!(close(p.q, 2.0 / 3.0, 1e-14));
        assert!(close(p.p, 1.0 / 6.0, 1e-14));
        assert!(close(p.band_mass(), 2.0 / 3.0, 1e-14));
        assert!(validate_params(&p).passed());
    }

    #[test]
    fn derive_rejects_eta_beyond_half_mass() {
        let err = derive_ptt_params(eps(3f64.ln()), 5.0, PttFamily::TypeI).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(ref m) if m.contains("(1, 4")));
        assert!(derive_ptt_params(eps(1.0), 1.0, PttFamily::TypeI).is_err());
        assert!(derive_ptt_params(eps(3f64.ln()), 3.01, PttFamily::TypeII).is_err());
    }

    #[test]
    fn q_is_half_on_the_boundary() {
        for &e in &[0.01, 0.5, 1.0, 3.0, 8.0] {
            let budget = eps(e);
            let p = derive_ptt_params(budget, PttFamily::TypeI.max_eta(budget), PttFamily::TypeI)
                .unwrap();
            assert!((p.q - 0.5).abs() <= 1e-12, "eps {e}: q = {}", p.q);
            let p = derive_ptt_params(budget, PttFamily::TypeII.max_eta(budget), PttFamily::TypeII)
                .unwrap();
            assert!((p.q - 0.5).abs() <= 1e-12, "eps {e}: q = {}", p.q);
        }
    }

    #[test]
    fn type_i_q_decreases_in_eta() {
        for &e in &[0.1, 1.0, 4.0] {
            let budget = eps(e);
            let hi = PttFamily::TypeI.max_eta(budget);
            let grid: Vec<f64> = (1..=100)
                .map(|i| 1.0 + (hi - 1.0) * i as f64 / 100.0)
                .collect();
            let qs: Vec<f64> = grid
                .iter()
                .map(|&eta| derive_ptt_params(budget, eta, PttFamily::TypeI).unwrap().q)
                .collect();
            assert!(qs.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn pm_preset() {
        let p = preset_params(PresetName::PiecewiseMechanism, eps(2.0 * 2f64.ln()), None).unwrap();
        assert!(close(p.eta, 3.0, 1e-14));
        assert!(close(p.k, 2.0, 1e-14));
        assert!(close(p.a, 1.0, 1e-14));
        assert!(close(p.q, 2.0 / 3.0, 1e-14));
        assert!(close(p.p, 1.0 / 3.0, 1e-14));
        // closed form of the piecewise mechanism's peak density
        let e: f64 = 4.0;
        let half = e.sqrt();
        assert!(close(p.p, (e - half) / (2.0 * (half + 1.0)), 1e-14));
    }

    #[test]
    fn nineteen_tenths_preset() {
        let p = preset_params(PresetName::NineteenTenths, eps(1.0), None).unwrap();
        let e = 1f64.exp();
        assert_eq!(p.eta, 1.9);
        assert!(close(p.a, (10.0 / 9.0) * (e + 0.9) / (e - 1.0), 1e-14));
        assert!((p.a - 2.33972).abs() < 1e-5);
        assert!(close(p.q, e / (e + 0.9), 1e-14));
        assert!((p.q - 0.75126).abs() < 1e-5);
        assert!(close(p.p, 0.45 * e * (e - 1.0) / (e + 0.9).powi(2), 1e-13));
    }

    #[test]
    fn optimal_preset_is_analysis_only() {
        let p = preset_params(PresetName::ClosedFormOptimal, eps(1e-9), Some(0.5)).unwrap();
        assert!((p.eta - 3.0).abs() < 1e-3);
        assert!(p.analysis_only);
        assert!(preset_params(PresetName::ClosedFormOptimal, eps(1.0), None).is_err());
        assert!(preset_params(PresetName::ClosedFormOptimal, eps(1.0), Some(1.0)).is_err());
        let p = preset_params(PresetName::ClosedFormOptimal, eps(1.0), Some(0.75)).unwrap();
        assert!(!validate_params(&p).check("normalization").unwrap().passed);
    }

    #[test]
    fn validation_flags_perturbed_fields() {
        let good = derive_ptt_params(eps(3f64.ln()), 2.0, PttFamily::TypeI).unwrap();
        let mut bad = good;
        bad.a *= 1.01;
        let report = validate_params(&bad);
        let norm = report.check("normalization").unwrap();
        assert!(!norm.passed);
        // 2(2.02)(3/16) + 2(2)(3/16)/3 - 1
        assert!((norm.residual - 0.0075).abs() < 1e-12);

        let mut low_q = good;
        low_q.q = 0.4;
        assert!(!validate_params(&low_q).check("q_range").unwrap().passed);
    }

    #[test]
    fn json_layout_is_fixed() {
        let p = derive_ptt_params(eps(3f64.ln()), 2.0, PttFamily::TypeI).unwrap();
        let json = p.to_json();
        let keys = [
            "epsilon",
            "eta",
            "k",
            "a",
            "B",
            "p",
            "q",
            "family",
            "analysis_only",
        ];
        let mut last = 0;
        for key in keys {
            let pos = json.find(&format!("\"{key}\":")).unwrap();
            assert!(pos >= last);
            last = pos;
        }
        assert!(json.contains("\"family\":\"type-i\""));
        assert_eq!(PttParams::from_json(&json).unwrap(), p);
        let p2 = derive_ptt_params(eps(3f64.ln()), 2.0, PttFamily::TypeII).unwrap();
        assert_eq!(PttParams::from_json(&p2.to_json()).unwrap(), p2);
    }

    #[test]
    fn json_rejects_inconsistent_bundle() {
        let mut p = derive_ptt_params(eps(1.0), 2.0, PttFamily::TypeII).unwrap();
        p.a *= 1.5;
        assert!(PttParams::from_json(&p.to_json()).is_err());
        p.analysis_only = true;
        assert!(PttParams::from_json(&p.to_json()).is_ok());
    }

    proptest! {
        #[test]
        fn rescale_round_trip(lo in -1e6f64..1e6, width in 1e-3f64..1e6, frac in 0.0f64..=1.0) {
            let hi = lo + width;
            let b = DomainBounds::new(lo, hi).unwrap();
            let u = (lo + frac * width).min(hi);
            let v = rescale_to_unit(u, b).unwrap();
            let back = rescale_from_unit(v.value(), b);
            prop_assert!((back - u).abs() <= 1e-12 * (hi - lo).max(lo.abs().max(hi.abs())));
        }

        #[test]
        fn derived_params_validate(e in 1e-4f64..10.0, frac in 1e-6f64..=1.0, type_ii in any::<bool>()) {
            let family = if type_ii { PttFamily::TypeII } else { PttFamily::TypeI };
            let budget = eps(e);
            let eta = 1.0 + frac * (family.max_eta(budget) - 1.0);
            let p = derive_ptt_params(budget, eta, family).unwrap();
            let report = validate_params(&p);
            prop_assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
        }
    }
}
