//! Small numerical utilities: adaptive Simpson quadrature, a composite
//! Simpson rule on a fixed grid, and a least-squares line fit in log-log
//! coordinates for convergence-order estimates.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;

/// Composite Simpson weights for `n` nodes on `[a, b]`. `n` must be odd and
/// at least 3 so the panel count is even.
pub fn simpson_weights(a: f64, b: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>), CoreError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(CoreError::Grid(String::from(
            "Simpson rule needs an odd node count >= 3",
        )));
    }
    if !(b > a) {
        return Err(CoreError::Grid(String::from(
            "quadrature interval must have positive length",
        )));
    }
    let h = (b - a) / ((n - 1) as f64);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        nodes.push(a + h * i as f64);
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        weights.push(w * h / 3.0);
    }
    Ok((nodes, weights))
}

/// Adaptive Simpson integration of `f` on `[a, b]` to relative tolerance
/// `rel_tol` (with an absolute fallback for near-zero integrals).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let scale = if abs(whole) > 1e-300 { abs(whole) } else { 1.0 };
    simpson_recurse(f, a, b, fa, fm, fb, whole, rel_tol * scale, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || abs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Slope of the least-squares line through `(ln x_i, ln y_i)`. Used to read a
/// convergence order off error-versus-step data. All inputs must be positive.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64, CoreError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(CoreError::UnsupportedCase(String::from(
            "log-log fit needs at least two matched samples",
        )));
    }
    let n = xs.len() as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        if !(x > 0.0) || !(y > 0.0) {
            return Err(CoreError::UnsupportedCase(String::from(
                "log-log fit needs positive samples",
            )));
        }
        let lx = libm::log(x);
        let ly = libm::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    if abs(denom) < 1e-300 {
        return Err(CoreError::Numerical(String::from(
            "degenerate abscissae in log-log fit",
        )));
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// `|x|` without relying on `std`.
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Elementwise maximum that ignores NaN in neither argument (propagates the
/// larger value; inputs here are always finite by construction).
#[inline]
pub fn fmax(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

#[inline]
pub fn fmin(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}
