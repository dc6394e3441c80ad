//! Budget at which Duchi's and Laplace's variances cross for a given input.

use super::solve::{bisect, first_sign_change};
use crate::domain::UnitValue;
use crate::error::{Error, Result};

/// Residual tolerance on the returned root.
pub const CROSSOVER_TOLERANCE: f64 = 1e-10;
const SCAN_POINTS: usize = 1000;
const MAX_BISECTIONS: usize = 200;

/// Duchi variance minus Laplace variance at input `x`:
/// `((e^ε+1)/(e^ε-1))² - x² - 8/ε²`.
pub fn crossover_gap(epsilon: f64, x: f64) -> f64 {
    let atom = (epsilon.exp() + 1.0) / epsilon.exp_m1();
    atom * atom - x * x - 8.0 / (epsilon * epsilon)
}

/// Smallest root of [`crossover_gap`] in `(lo, hi)`, located by a sign scan
/// over a 1000-point log grid followed by bisection. `None` when the gap keeps
/// one sign over the whole grid.
pub fn crossover_root(x: UnitValue, bracket: (f64, f64)) -> Result<Option<f64>> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::arg(format!(
            "crossover bracket needs 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let ratio = (hi / lo).ln();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    let f = |e: f64| crossover_gap(e, x.value());
    let Some((a, b)) = first_sign_change(f, &grid) else {
        return Ok(None);
    };
    Ok(bisect(f, a, b, CROSSOVER_TOLERANCE, MAX_BISECTIONS))
}
