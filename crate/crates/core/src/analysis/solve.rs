//! Scalar root finding and minimization.

/// Bisection on `[lo, hi]`, which must bracket a sign change.
///
/// Stops once `|f(mid)| ≤ ftol` or the bracket can no longer be halved;
/// returns the midpoint with the smallest `|f|` seen.
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
    max_iter: usize,
) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return None;
    }
    let mut best = (f64::INFINITY, 0.5 * (lo + hi));
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid.abs() < best.0 {
            best = (f_mid.abs(), mid);
        }
        if f_mid.abs() <= ftol {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(best.1)
}

/// First sub-interval of `grid` (ascending) across which `f` changes sign.
pub fn first_sign_change<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> Option<(f64, f64)> {
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let fx = f(x);
        if let Some((px, pf)) = prev {
            if pf == 0.0 || pf.signum() != fx.signum() {
                return Some((px, x));
            }
        }
        prev = Some((x, fx));
    }
    None
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`,
/// shrinking the bracket below `xtol`. Returns `(x, f(x))`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > xtol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let candidates = [(lo, f(lo)), (x1, f1), (x2, f2), (hi, f(hi))];
    candidates
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

/// Scans `count` evenly spaced points, then refines around the best one by
/// golden section. Tolerates functions that are only unimodal near the
/// minimum.
pub fn grid_then_golden<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    count: usize,
    xtol: f64,
) -> (f64, f64) {
    let count = count.max(3);
    let step = (hi - lo) / (count - 1) as f64;
    let (best, _) = (0..count)
        .map(|i| (i, f(lo + step * i as f64)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = (lo + step * (best + 1) as f64).min(hi);
    golden_section(f, a, b, xtol)
}
