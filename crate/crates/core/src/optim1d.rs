//! One-dimensional minimization and root finding.

use crate::error::{Error, Result};

/// Golden-section search for a minimizer of a unimodal `f` on `[a, b]`,
/// stopping when the bracket is shorter than `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() || !(tol > 0.0) {
        return Err(Error::invalid(format!("golden section needs a < b and tol > 0, got [{a}, {b}], {tol}")));
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..500 {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    Ok(0.5 * (a + b))
}

/// Bisection for a root of a continuous `f` with a sign change on `[a, b]`.
pub fn bisection(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::invalid(format!("no sign change on [{a}, {b}]")));
    }
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if b - a <= tol || m == a || m == b {
            return Ok(m);
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
