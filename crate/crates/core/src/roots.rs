//! Bracketing root finders.
//!
//! Only bracketing methods live here: every caller in this crate solves a
//! monotone equation on an interval where a sign change is known, so global
//! convergence matters more than speed.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("interval [{lo}, {hi}] does not bracket a root (f = {f_lo}, {f_hi})")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("function returned NaN at {0}")]
    NotANumber(f64),
}

/// Plain bisection. Stops when the bracket is narrower than `xtol` or the
/// iteration budget runs out; the returned pair is the final bracket
/// `(lo, hi)` with `f(lo)` and `f(hi)` of opposite sign.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Result<(f64, f64), RootError>
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.is_nan() {
        return Err(RootError::NotANumber(lo));
    }
    if f_hi.is_nan() {
        return Err(RootError::NotANumber(hi));
    }
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NotBracketed { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..max_iter {
        if (hi - lo).abs() <= xtol {
            return Ok((lo, hi));
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.is_nan() {
            return Err(RootError::NotANumber(mid));
        }
        if fm == 0.0 {
            return Ok((mid, mid));
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Brent's method (inverse quadratic interpolation safeguarded by
/// bisection). `xtol` is an absolute tolerance on the root; a relative
/// component of `4 eps |x|` is always added.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() {
        return Err(RootError::NotANumber(a));
    }
    if fb.is_nan() {
        return Err(RootError::NotANumber(b));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 4.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(RootError::NotANumber(b));
        }
    }
    Err(RootError::NoConvergence(max_iter))
}

/// Grows `[lo, hi]` geometrically (in the direction of `hi`) until `f`
/// changes sign, for a function increasing in its argument that starts
/// negative at `lo`. Returns the bracket or `None` if `limit` doublings
/// were not enough.
pub fn expand_upward<F>(mut f: F, lo: f64, mut hi: f64, factor: f64, limit: usize) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut lo = lo;
    for _ in 0..limit {
        if f(hi) >= 0.0 {
            return Some((lo, hi));
        }
        lo = hi;
        hi *= factor;
    }
    None
}
