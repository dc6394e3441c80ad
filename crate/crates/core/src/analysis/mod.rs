//! Closed-form and numerical analysis of the mechanisms: variances, the
//! exact moment oracle, mechanism comparisons, the Laplace/Duchi crossover,
//! optimal shape ratios, feasibility scans and small-budget lower bounds.
//!
//! Everything here is a pure function. Sweeps produce [`CurvePoint`] rows.

pub mod bounds;
pub mod compare;
pub mod crossover;
pub mod moments;
pub mod optimal;
pub mod solve;

use std::io::{self, Write};

pub use bounds::{lower_bound_curves, LowerBoundConstants, LowerBoundCurves};
pub use compare::{
    comparison_polynomial, noisy_variance_gaps, scan_eta_feasibility, type_ii_excess_variance,
    ComparisonKind, ComparisonPolynomial, FeasibilityReport,
};
pub use crossover::{crossover_gap, crossover_root};
pub use moments::{
    moments_by_quadrature, ptt_cdf, variance_analytic, worst_case_variance, Moments,
};
pub use optimal::{min_variance_numeric, optimal_eta_closed_form, OptimalEta, VarianceMinimum};

use crate::fmt::real;

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

impl CurvePoint {
    pub fn new(x: f64, y: f64, series: impl Into<String>) -> Self {
        CurvePoint {
            x,
            y,
            series: series.into(),
        }
    }
}

/// Writes `x,y,series` CSV. Rows with a non-finite coordinate are skipped.
pub fn write_curve_csv<W: Write>(out: &mut W, points: &[CurvePoint]) -> io::Result<()> {
    writeln!(out, "x,y,series")?;
    for p in points.iter().filter(|p| p.x.is_finite() && p.y.is_finite()) {
        writeln!(out, "{},{},{}", real(p.x), real(p.y), p.series)?;
    }
    Ok(())
}

/// Writes `eta,f1,f2,f3,f4,sys29,sys30` CSV.
pub fn write_feasibility_csv<W: Write>(
    out: &mut W,
    reports: &[FeasibilityReport],
) -> io::Result<()> {
    writeln!(out, "eta,f1,f2,f3,f4,sys29,sys30")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            real(r.eta),
            real(r.f1),
            real(r.f2),
            real(r.f3),
            real(r.f4),
            r.nonpositive_discriminant,
            r.positive_discriminant
        )?;
    }
    Ok(())
}

/// Feasibility reports as curves: the sign indicators of both systems plus
/// `f1..f4`.
pub fn feasibility_curves(reports: &[FeasibilityReport]) -> Vec<CurvePoint> {
    let mut out = Vec::with_capacity(reports.len() * 6);
    for r in reports {
        out.push(CurvePoint::new(r.eta, r.f1, "f1"));
        out.push(CurvePoint::new(r.eta, r.f2, "f2"));
        out.push(CurvePoint::new(r.eta, r.f3, "f3"));
        out.push(CurvePoint::new(r.eta, r.f4, "f4"));
        out.push(CurvePoint::new(
            r.eta,
            r.nonpositive_discriminant as u8 as f64,
            "sys29",
        ));
        out.push(CurvePoint::new(
            r.eta,
            r.positive_discriminant as u8 as f64,
            "sys30",
        ));
    }
    out
}
