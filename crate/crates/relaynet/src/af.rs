//! Large-system spectra of the noncoherent amplify-and-forward network: reference
//! densities, the Stieltjes transform of the product matrix via a quartic, its inversion
//! to a density, and the resulting capacity integrals.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{precondition, Error, Result};
use crate::poly::{relative_residual, solve_quartic};
use crate::quad::{integrate_sqrt_endpoints, trapezoid};

/// Tolerance on the fixed-point residual of a selected root.
pub const FIXED_POINT_TOL: f64 = 1e-6;
/// Tolerance on the relative quartic residual of a selected root.
pub const QUARTIC_TOL: f64 = 1e-9;
const NEAR_TIE: f64 = 1e-9;
const STABILITY_TOL: f64 = 1e-3;
const MAX_HALVINGS: usize = 6;

/// Ratio `beta = K/M`, relay scale `d` and noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfParams {
    beta: f64,
    d: f64,
    sigma2: f64,
}

impl AfParams {
    /// Validates and stores the parameters.
    pub fn new(beta: f64, d: f64, sigma2: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("d", d), ("sigma2", sigma2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { beta, d, sigma2 })
    }

    /// Parameters with the power-normalising scale `d = sqrt(P_rel / (1 + sigma2))`.
    pub fn from_power(beta: f64, p_rel: f64, sigma2: f64) -> Result<Self> {
        if !(p_rel > 0.0) {
            return Err(Error::Config(format!("P_rel must be positive, got {p_rel}")));
        }
        Self::new(beta, (p_rel / (1.0 + sigma2)).sqrt(), sigma2)
    }

    /// `K/M`.
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// Relay scale.
    pub fn d(&self) -> f64 {
        self.d
    }
    /// Noise variance.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Marchenko-Pastur edges `d^2 (1 -/+ 1/sqrt(beta))^2`.
    pub fn gammas(&self) -> (f64, f64) {
        let r = 1.0 / self.beta.sqrt();
        let d2 = self.d * self.d;
        (d2 * (1.0 - r).powi(2), d2 * (1.0 + r).powi(2))
    }

    /// Support edges of the limiting density of `T`.
    pub fn etas(&self) -> (f64, f64) {
        let (g1, g2) = self.gammas();
        (g1 / (1.0 + g1), g2 / (1.0 + g2))
    }
}

/// Tabulated density with an optional point mass at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    /// Increasing abscissae.
    pub grid: Vec<f64>,
    /// Nonnegative density values on `grid`.
    pub values: Vec<f64>,
    /// Point mass at zero.
    pub atom_at_zero: f64,
    /// Interval containing the continuous part.
    pub support: (f64, f64),
    cumulative: Vec<f64>,
}

impl DensityCurve {
    /// Builds a curve, clamping values above `-1e-9` to zero and rejecting anything lower.
    pub fn new(grid: Vec<f64>, values: Vec<f64>, atom_at_zero: f64, support: (f64, f64)) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return precondition("density grid and values must have equal length >= 2");
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return precondition("density grid must be strictly increasing");
        }
        if let Some(v) = values.iter().find(|v| !(**v >= -1e-9)) {
            return Err(Error::Numerical(format!("negative density value {v}")));
        }
        let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
        let mut cumulative = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..grid.len() {
            acc += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
            cumulative.push(acc);
        }
        Ok(Self { grid, values, atom_at_zero, support, cumulative })
    }

    /// Trapezoid mass of the continuous part plus the atom.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.grid, &self.values) + self.atom_at_zero
    }

    /// Model CDF: atom (for `x >= 0`) plus the trapezoid integral up to `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let atom = if x >= 0.0 { self.atom_at_zero } else { 0.0 };
        let g = &self.grid;
        if x <= g[0] {
            return atom;
        }
        let last = g.len() - 1;
        if x >= g[last] {
            return atom + self.cumulative[last];
        }
        let i = g.partition_point(|&v| v <= x) - 1;
        let h = x - g[i];
        let slope = (self.values[i + 1] - self.values[i]) / (g[i + 1] - g[i]);
        atom + self.cumulative[i] + h * (self.values[i] + 0.5 * slope * h)
    }

    /// Whether all values are finite and nonnegative and the mass is `1 +/- tol`.
    pub fn is_sane(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.is_finite() && *v >= 0.0) && (self.mass() - 1.0).abs() <= tol
    }
}

/// Grid on `(lo, hi]` clustered at both ends by `t^4 / (t^4 + (1 - t)^4)`.
pub fn clustered_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let g = t.powi(4) / (t.powi(4) + (1.0 - t).powi(4));
            lo + (hi - lo) * g
        })
        .skip(1)
        .collect()
}

fn tabulate<F: Fn(f64) -> f64 + Sync>(f: F, lo: f64, hi: f64, points: usize, atom: f64) -> Result<DensityCurve> {
    let mut grid = vec![lo];
    grid.extend(clustered_grid(lo, hi, points));
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    DensityCurve::new(grid, values, atom, (lo, hi))
}

/// Marchenko-Pastur density of `(d^2/K) F F^H` (`F` is `M x K`, `beta = K/M`).
pub fn mp_density_at(params: &AfParams, x: f64) -> f64 {
    let (g1, g2) = params.gammas();
    if x <= g1 || x >= g2 || x <= 0.0 {
        return 0.0;
    }
    params.beta / (2.0 * PI * x * params.d * params.d) * ((g2 - x) * (x - g1)).sqrt()
}

/// Tabulated Marchenko-Pastur density with atom `[1 - beta]^+`.
pub fn mp_density(params: &AfParams, points: usize) -> Result<DensityCurve> {
    let (g1, g2) = params.gammas();
    tabulate(|x| mp_density_at(params, x), g1, g2, points, (1.0 - params.beta).max(0.0))
}

/// Limiting density of `T` at `x` (continuous part).
pub fn ft_density_at(params: &AfParams, x: f64) -> f64 {
    let (g1, g2) = params.gammas();
    let (e1, e2) = params.etas();
    if x <= e1 || x >= e2 || x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let rho = ((1.0 + g1) * (1.0 + g2)).sqrt() / (2.0 * PI * params.d * params.d);
    rho / (x * (1.0 - x).powi(2)) * ((e2 - x) * (x - e1)).sqrt()
}

/// Tabulated limiting density of `T` with atom `[1 - 1/beta]^+`.
pub fn ft_density(params: &AfParams, points: usize) -> Result<DensityCurve> {
    let (e1, e2) = params.etas();
    tabulate(|x| ft_density_at(params, x), e1, e2, points, (1.0 - 1.0 / params.beta).max(0.0))
}

/// Coefficients `(a3, a2, a1, a0)` of the monic quartic in `G_hat = -(1 - beta)/z + beta G`.
pub fn quartic_coeffs(z: Complex64, params: &AfParams) -> Result<[Complex64; 4]> {
    if !(z.im > 0.0) {
        return precondition(format!("z = {z} must lie in the upper half-plane"));
    }
    let b = params.beta;
    let bd = b / (params.d * params.d);
    Ok([
        (2.0 * z - b + 1.0) / z,
        (z - b + 3.0 - bd) / z,
        (2.0 * z - b + 1.0 - bd) / (z * z),
        1.0 / (z * z),
    ])
}

/// `chi A_1 I_1 = (sqrt(beta) + 1) |sqrt(beta) - 1| / (2 beta)`.
pub fn chi_a1(beta: f64) -> f64 {
    let sb = beta.sqrt();
    (sb + 1.0) * (sb - 1.0).abs() / (2.0 * beta)
}

/// Absolute residual of the fixed-point equation in its closed form at `(G, z)`.
pub fn fixedpoint_residual(g: Complex64, z: Complex64, params: &AfParams) -> Result<f64> {
    if !(z.im > 0.0) {
        return precondition(format!("z = {z} must lie in the upper half-plane"));
    }
    let b = params.beta;
    let d2 = params.d * params.d;
    let sb = b.sqrt();
    let w = g * b * z + z + b - 1.0;
    if w.norm() == 0.0 {
        return Err(Error::Numerical("vanishing denominator in the fixed-point residual".into()));
    }
    let u = g * b * z + b - 1.0;
    let w2 = w * w;
    let chi2 = -z / (sb * w);
    let chi3 = -z * d2 * (sb - 1.0).powi(2) * w / (2.0 * d2 * b * w2) + z * b * u / (2.0 * d2 * b * w2);
    let num = d2 * w * (sb - 1.0).powi(2) + z * b;
    let den = d2 * w * (sb + 1.0).powi(2) + z * b;
    let chi4 = -u / (2.0 * d2 * b * w2) * (num / den).sqrt() * den;
    Ok((g * z + (b - 1.0) / (2.0 * b) - chi2 - chi3 - chi4).norm())
}

/// Selected solution of the fixed-point equation at one point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesPoint {
    /// Evaluation point.
    pub z: Complex64,
    /// Stieltjes transform of the product matrix.
    pub g: Complex64,
    /// `-(1 - beta)/z + beta G` (upper half-plane).
    pub g_hat: Complex64,
    /// Fixed-point residual of the selected candidate.
    pub residual: f64,
    /// Smallest residual among candidates distinct from the selected one.
    pub runner_up_residual: f64,
    /// Relative quartic residual of the selected root.
    pub quartic_residual: f64,
}

/// Solves for `G(z)`: roots of the quartic are folded into the upper half-plane, mapped
/// back to `G`, and the candidate with the smallest fixed-point residual is kept.
pub fn stieltjes_g(z: Complex64, params: &AfParams) -> Result<StieltjesPoint> {
    let coeffs = quartic_coeffs(z, params)?;
    let roots = solve_quartic(coeffs[0], coeffs[1], coeffs[2], coeffs[3])?;
    let b = params.beta;
    let mut cands = Vec::with_capacity(4);
    for root in roots {
        let folded = Complex64::new(root.re, root.im.abs());
        let g = (folded - (b - 1.0) / z) / b;
        let r = fixedpoint_residual(g, z, params).unwrap_or(f64::INFINITY);
        cands.push((r, folded, g, relative_residual(&coeffs, folded)));
    }
    let mut best = 0;
    for i in 1..cands.len() {
        if cands[i].0 < cands[best].0 - NEAR_TIE {
            best = i;
        }
    }
    let (residual, g_hat, g, quartic_residual) = cands[best];
    let distinct = |c: &Complex64| (c - g_hat).norm() > 1e-6 * g_hat.norm().max(1.0);
    let runner_up_residual = cands
        .iter()
        .filter(|c| distinct(&c.1))
        .map(|c| c.0)
        .fold(f64::INFINITY, f64::min);
    let scale = (g * z).norm().max(1.0);
    if !(residual <= FIXED_POINT_TOL * scale) {
        return Err(Error::Numerical(format!(
            "no quartic root satisfies the fixed point at z = {z}: residuals {:?}",
            cands.iter().map(|c| c.0).collect::<Vec<_>>()
        )));
    }
    Ok(StieltjesPoint { z, g, g_hat, residual, runner_up_residual, quartic_residual })
}

/// Upper bound `d^2 (1 + sqrt(beta))^4 / (beta + d^2 (1 + sqrt(beta))^2)` on the support.
pub fn support_upper_bound(params: &AfParams) -> f64 {
    let s = (1.0 + params.beta.sqrt()).powi(2);
    let d2 = params.d * params.d;
    d2 * s * s / (params.beta + d2 * s)
}

/// Default imaginary offset `1e-6 x_max`.
pub fn default_y_eps(params: &AfParams) -> f64 {
    1e-6 * support_upper_bound(params)
}

/// Continuous part of the limiting density at `x`, evaluated at `z = x + j y x / x_max`.
///
/// The pole `-[1 - 1/beta]^+ / z` of the atom at zero is removed before inversion.
pub fn density_at(params: &AfParams, x: f64, y_eps: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let xmax = support_upper_bound(params);
    if x >= xmax {
        return Ok(0.0);
    }
    let z = Complex64::new(x, y_eps * x / xmax);
    let p = stieltjes_g(z, params)?;
    let atom = (1.0 - 1.0 / params.beta).max(0.0);
    Ok(((p.g + atom / z).im / PI).max(0.0))
}

/// Limiting density of `(1/M) H H^H T` on `grid` (a subset of `(0, x_max]`).
///
/// The offset is halved (up to six times) until densities at `y` and `y/2` agree to
/// `1e-3` away from the support edges.
pub fn limiting_density(params: &AfParams, y_eps: f64, grid: &[f64]) -> Result<DensityCurve> {
    let xmax = support_upper_bound(params);
    if grid.is_empty() || grid.iter().any(|&x| !(x > 0.0 && x <= xmax)) {
        return precondition(format!("grid must be nonempty and inside (0, {xmax}]"));
    }
    if !(y_eps > 0.0) {
        return precondition(format!("y_eps must be positive, got {y_eps}"));
    }
    let eval = |y: f64| -> Result<Vec<f64>> { grid.par_iter().map(|&x| density_at(params, x, y)).collect() };
    let mut y = y_eps;
    let mut current = eval(y)?;
    for _ in 0..MAX_HALVINGS {
        let finer = eval(0.5 * y)?;
        let stable = max_interior_gap(grid, &current, &finer, xmax) <= STABILITY_TOL;
        current = finer;
        y *= 0.5;
        if stable {
            break;
        }
    }
    let mut g = vec![0.0];
    g.extend_from_slice(grid);
    let mut v = vec![0.0];
    v.extend(current);
    // Sample at zero is the limit from the right only when the density is bounded there.
    if params.beta != 1.0 {
        v[0] = 0.0;
    } else {
        g.remove(0);
        v.remove(0);
    }
    DensityCurve::new(g, v, (1.0 - 1.0 / params.beta).max(0.0), (0.0, xmax))
}

/// Largest relative gap between two tabulations away from the support edges.
fn max_interior_gap(grid: &[f64], a: &[f64], b: &[f64], xmax: f64) -> f64 {
    let peak = b.iter().cloned().fold(0.0_f64, f64::max);
    let floor = 1e-6 * peak;
    let mut edges = vec![0.0, xmax];
    for i in 1..grid.len() {
        if (b[i - 1] > floor) != (b[i] > floor) {
            edges.push(0.5 * (grid[i - 1] + grid[i]));
        }
    }
    let margin = 1e-2 * xmax;
    grid.iter()
        .zip(a.iter().zip(b))
        .filter(|(x, _)| edges.iter().all(|e| (*x - e).abs() > margin))
        .map(|(_, (p, q))| (p - q).abs() / q.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Limiting density on the default clustered grid of `points` abscissae.
pub fn limiting_density_default(params: &AfParams, points: usize) -> Result<DensityCurve> {
    let grid = clustered_grid(0.0, support_upper_bound(params), points);
    limiting_density(params, default_y_eps(params), &grid)
}

/// Asymptotic AF capacity `(beta/2) int log2(1 + x/sigma2) f(x) dx` per pair.
pub fn capacity_beta(params: &AfParams) -> Result<f64> {
    let xmax = support_upper_bound(params);
    let y = default_y_eps(params);
    let s2 = params.sigma2;
    // Locate the support edges on a coarse grid so quadrature panels do not straddle them.
    let coarse = clustered_grid(0.0, xmax, 400);
    let vals: Vec<f64> = coarse.par_iter().map(|&x| density_at(params, x, y)).collect::<Result<_>>()?;
    let peak = vals.iter().cloned().fold(0.0_f64, f64::max);
    let mut breaks = vec![0.0];
    for i in 1..coarse.len() {
        if (vals[i - 1] > 1e-9 * peak) != (vals[i] > 1e-9 * peak) {
            breaks.push(coarse[i - 1]);
            breaks.push(coarse[i]);
        }
    }
    breaks.push(xmax);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let failure = std::sync::Mutex::new(None);
    let integrand = |x: f64| match density_at(params, x, y) {
        Ok(f) => (x / s2).ln_1p() / LN_2 * f,
        Err(e) => {
            failure.lock().expect("poisoned").get_or_insert(e);
            0.0
        }
    };
    let inside = |lo: f64, hi: f64| coarse.iter().zip(&vals).any(|(&x, &v)| x >= lo && x <= hi && v > 1e-9 * peak);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        // Gaps between support pieces carry only round-off.
        if inside(w[0], w[1]) {
            total += integrate_sqrt_endpoints(integrand, w[0], w[1], 1e-8)?;
        }
    }
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(0.5 * params.beta * total)
}

/// `beta`-scaled limiting density as `beta -> infinity`, with support `[0, 4/(1 + 1/d^2)]`.
pub fn limit_density_infty(x: f64, d: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let c = 1.0 + 1.0 / (d * d);
    (4.0 * x * c - x * x * c * c).max(0.0).sqrt() / (2.0 * PI * x)
}

/// Upper-half-plane root of the `beta -> infinity` quadratic for `G_hat`.
pub fn g_hat_limit(z: Complex64, d: f64) -> Complex64 {
    let c = 1.0 + 1.0 / (d * d);
    let disc = (z * z * c * c - 4.0 * z * c).sqrt();
    let r1 = (-z * c + disc) / (2.0 * z);
    let r2 = (-z * c - disc) / (2.0 * z);
    if r1.im >= r2.im {
        r1
    } else {
        r2
    }
}

/// Limiting capacity `(1/4pi) int_0^4 sqrt(4/u - 1) log2(1 + SNR u) du`,
/// `SNR = d^2 / ((d^2 + 1) sigma2)`.
pub fn capacity_infty(d: f64, sigma2: f64) -> Result<f64> {
    if !(d > 0.0 && sigma2 > 0.0) {
        return precondition(format!("d and sigma2 must be positive, got {d}, {sigma2}"));
    }
    let snr = d * d / ((d * d + 1.0) * sigma2);
    let v = integrate_sqrt_endpoints(|u| (4.0 / u - 1.0).max(0.0).sqrt() * (snr * u).ln_1p() / LN_2, 0.0, 4.0, 1e-10)?;
    Ok(v / (4.0 * PI))
}
