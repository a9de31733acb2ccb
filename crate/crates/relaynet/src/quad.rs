//! Adaptive Simpson quadrature, with an optional square-root substitution at both
//! endpoints for integrands that behave like `sqrt(x - lo)` or `1/sqrt(x - lo)` there.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut failed = false;
    let v = recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut failed);
    if failed || !v.is_finite() {
        return Err(Error::Numerical(format!(
            "adaptive Simpson did not reach tolerance {tol:.1e} on [{a}, {b}]"
        )));
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    failed: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || depth == 0 || m <= a || m >= b {
        if depth == 0 && delta.abs() > 15.0 * tol {
            *failed = true;
        }
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, failed)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, failed)
}

/// Integrates `f` over `[lo, hi]` with the substitutions `x = lo + t^2` on the lower
/// half and `x = hi - t^2` on the upper half, to relative tolerance `rel_tol`.
///
/// Square-root endpoint behaviour becomes smooth in `t`, which adaptive Simpson then
/// resolves with few evaluations. `f` is never called at the endpoints themselves.
pub fn integrate_sqrt_endpoints<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let mid = 0.5 * (lo + hi);
    let w = (mid - lo).sqrt();
    // The transformed integrand is finite at t = 0; its value there is taken just inside.
    let t_min = 1e-9 * w;
    let g_lo = |t: f64| {
        let t = t.max(t_min);
        2.0 * t * f(lo + t * t)
    };
    let g_hi = |t: f64| {
        let t = t.max(t_min);
        2.0 * t * f(hi - t * t)
    };
    // Coarse pass fixes the absolute tolerance used by the adaptive pass.
    let coarse = simpson_composite(&g_lo, 0.0, w, 64) + simpson_composite(&g_hi, 0.0, w, 64);
    let tol = (rel_tol * coarse.abs()).max(1e-300);
    Ok(adaptive_simpson(g_lo, 0.0, w, 0.5 * tol)? + adaptive_simpson(g_hi, 0.0, w, 0.5 * tol)?)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson_composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Trapezoid rule over tabulated `(x, y)` values.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn semicircle_area() {
        let v = integrate_sqrt_endpoints(|x| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-10).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn inverse_sqrt_singularity() {
        let v = integrate_sqrt_endpoints(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }
}
