use crate::error::{Error, Result};

const MAX_BISECT: usize = 200;

/// Bisection root of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`, after 200 halvings, or
/// when the midpoint can no longer be distinguished from an endpoint.
/// `tol = 0` therefore means "to machine precision".
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket { lo, hi });
    }
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns the best point seen and its value.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_BISECT {
        if b - a <= tol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximizes `f` over `[lo, hi]` by scanning `grid` evenly spaced points
/// and refining around the best one with golden-section search.
pub fn grid_golden_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
) -> (f64, f64) {
    let grid = grid.max(2);
    let h = (hi - lo) / (grid - 1) as f64;
    let mut best = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..grid {
        let x = if i + 1 == grid { hi } else { lo + i as f64 * h };
        let v = f(x);
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let a = if best_i == 0 {
        lo
    } else {
        lo + (best_i - 1) as f64 * h
    };
    let b = if best_i + 1 >= grid {
        hi
    } else {
        lo + (best_i + 1) as f64 * h
    };
    let refined = golden_max(&mut f, a, b, tol);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}
