//! Roots of monic complex polynomials via companion-matrix eigenvalues.
//!
//! The companion matrix is already upper Hessenberg, so a single-shift complex QR
//! iteration with Wilkinson shifts and deflation extracts the roots. The variable is
//! rescaled beforehand so that all coefficients have comparable magnitude, and every
//! root receives one Newton refinement step.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER_PER_ROOT: usize = 200;

/// Evaluates the monic polynomial `x^n + c[0] x^{n-1} + ... + c[n-1]` and its derivative.
pub fn eval_monic(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// All roots of the monic polynomial `x^n + c[0] x^{n-1} + ... + c[n-1]`.
pub fn monic_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Numerical("non-finite polynomial coefficient".into()));
    }
    // x = scale * u gives u^n + sum c_i / scale^(i+1) u^(n-1-i).
    let scale = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm().powf(1.0 / (i as f64 + 1.0)))
        .fold(0.0_f64, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let scaled: Vec<Complex64> =
        coeffs.iter().enumerate().map(|(i, c)| c / scale.powi(i as i32 + 1)).collect();

    let mut h = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (j, c) in scaled.iter().enumerate() {
        h[0][j] = -c;
    }
    for i in 1..n {
        h[i][i - 1] = Complex64::new(1.0, 0.0);
    }
    let roots = hessenberg_eigenvalues(h)?;

    Ok(roots
        .into_iter()
        .map(|u| {
            let x = u * scale;
            let (p, dp) = eval_monic(coeffs, x);
            if dp.norm() == 0.0 {
                return x;
            }
            let refined = x - p / dp;
            let (pr, _) = eval_monic(coeffs, refined);
            if pr.norm() < p.norm() {
                refined
            } else {
                x
            }
        })
        .collect())
}

/// The four roots of `x^4 + a3 x^3 + a2 x^2 + a1 x + a0`.
pub fn solve_quartic(a3: Complex64, a2: Complex64, a1: Complex64, a0: Complex64) -> Result<[Complex64; 4]> {
    let r = monic_roots(&[a3, a2, a1, a0])?;
    Ok([r[0], r[1], r[2], r[3]])
}

/// `|p(root)|` divided by the largest coefficient magnitude (leading 1 included).
pub fn relative_residual(coeffs: &[Complex64], root: Complex64) -> f64 {
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0_f64, f64::max);
    eval_monic(coeffs, root).0.norm() / scale
}

fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn hessenberg_eigenvalues(mut h: Vec<Vec<Complex64>>) -> Result<Vec<Complex64>> {
    let n = h.len();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iter = 0;
    loop {
        if hi == 0 {
            eig[0] = h[0][0];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo][lo - 1].norm();
            let diag = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
            if sub <= f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
                h[lo][lo - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[hi][hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_ITER_PER_ROOT {
            return Err(Error::Numerical("companion QR iteration did not converge".into()));
        }
        let a = h[hi - 1][hi - 1];
        let b = h[hi - 1][hi];
        let c = h[hi][hi - 1];
        let d = h[hi][hi];
        let mut mu = if iter % 11 == 10 {
            // Exceptional shift to break cycles.
            d + Complex64::new(0.75 * c.norm(), 0.5 * c.norm())
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        if !mu.re.is_finite() || !mu.im.is_finite() {
            mu = d;
        }
        for k in lo..=hi {
            h[k][k] -= mu;
        }
        let mut rot = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (cs, sn) = givens(h[k][k], h[k + 1][k]);
            for j in k..=hi {
                let x = h[k][j];
                let y = h[k + 1][j];
                h[k][j] = x * cs + sn * y;
                h[k + 1][j] = -sn.conj() * x + y * cs;
            }
            rot.push((k, cs, sn));
        }
        for &(k, cs, sn) in &rot {
            for row in h.iter_mut().take(hi + 1).skip(lo) {
                let x = row[k];
                let y = row[k + 1];
                row[k] = x * cs + sn.conj() * y;
                row[k + 1] = -sn * x + y * cs;
            }
        }
        for k in lo..=hi {
            h[k][k] += mu;
        }
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_quadratic() {
        let r = monic_roots(&[Complex64::new(-3.0, 0.0)]).unwrap();
        assert!((r[0] - 3.0).norm() < 1e-14);
        let r = monic_roots(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let mut im: Vec<f64> = r.iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        assert!((im[0] + 1.0).abs() < 1e-14 && (im[1] - 1.0).abs() < 1e-14);
    }
}
