//! Bracketing root and extremum search shared by the solvers.

use crate::{Error, Result};

/// Bisection on `[lo, hi]` until the bracket is below `tol` or stops shrinking.
pub(crate) fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Sign changes of `f` on a uniform grid, each refined by bisection.
pub(crate) fn all_roots<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> Vec<f64> {
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..points {
        let x1 = if i == points - 1 {
            hi
        } else {
            lo + step * i as f64
        };
        let f1 = f(x1);
        if f0.is_finite() && f1.is_finite() && f0 != 0.0 && f0.signum() != f1.signum() {
            if let Ok(r) = bisect(&mut f, x0, x1, tol) {
                roots.push(r);
            }
        } else if f0 == 0.0 && i == 1 {
            roots.push(x0);
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Golden-section maximisation of a unimodal `f` on `[lo, hi]`.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
