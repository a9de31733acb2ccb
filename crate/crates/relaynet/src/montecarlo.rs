//! Monte Carlo harness: SINR distributions, outage and ergodic estimates, empirical
//! moments of the SISO decomposition, finite-size AF capacity, and empirical spectral
//! distributions of the AF matrices.
//!
//! Trial `i` always draws from its own stream, and results are collected in trial
//! order, so every output is independent of the worker count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::capacity::LinkMoments;
use crate::coherent::{decompose_siso, sinr, Protocol};
use crate::error::{precondition, Result};
use crate::linalg::{jacobi_eigen, CMatrix};
use crate::model::{sample_channels, NetworkConfig};
use crate::rng::{self, DOMAIN_SAMPLER};

pub use crate::linalg::hermitian_eigenvalues;

/// Sorted sample with step-function CDF evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
    seed: u64,
}

impl EmpiricalCdf {
    /// Sorts `samples` (NaNs are rejected).
    pub fn new(mut samples: Vec<f64>, seed: u64) -> Result<Self> {
        if samples.iter().any(|x| x.is_nan()) {
            return precondition("empirical CDF samples must not be NaN");
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples, seed })
    }

    /// Sorted samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Number of samples.
    pub fn trials(&self) -> usize {
        self.samples.len()
    }

    /// Seed the samples were drawn with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    /// Lower empirical quantile `inf{x : F(x) >= p}`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.samples.len();
        if n == 0 {
            return f64::NAN;
        }
        let idx = ((p.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.samples[idx]
    }

    /// Sample median (average of the middle pair for even counts).
    pub fn median(&self) -> f64 {
        let n = self.samples.len();
        match n {
            0 => f64::NAN,
            _ if n % 2 == 1 => self.samples[n / 2],
            _ => 0.5 * (self.samples[n / 2 - 1] + self.samples[n / 2]),
        }
    }

    /// Sample mean.
    pub fn mean(&self) -> f64 {
        mean_stderr(&self.samples).0
    }

    /// Sample standard deviation (denominator `n - 1`).
    pub fn std_dev(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let mu = self.mean();
        (self.samples.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
}

/// Sample mean and its standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mu = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mu, 0.0);
    }
    let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mu, (var / n as f64).sqrt())
}

fn check_trials(trials: usize, min: usize) -> Result<()> {
    if trials < min {
        return precondition(format!("need at least {min} trials, got {trials}"));
    }
    Ok(())
}

/// SINR of link 0 for trials `0..trials`, in trial order.
pub fn sinr_samples(config: &NetworkConfig, protocol: Protocol, trials: usize) -> Result<Vec<f64>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let ch = sample_channels(config, i as u64);
            sinr(config, &ch, 0, protocol).map(|s| s.value)
        })
        .collect()
}

/// Empirical CDF of the link-0 SINR over `trials >= 1000` channel draws.
pub fn sinr_cdf(config: &NetworkConfig, protocol: Protocol, trials: usize) -> Result<EmpiricalCdf> {
    check_trials(trials, 1000)?;
    EmpiricalCdf::new(sinr_samples(config, protocol, trials)?, config.seed())
}

/// Binomial estimate of `P{1/2 log2(1 + SINR) <= rate}` with its standard error.
pub fn outage_estimate(config: &NetworkConfig, protocol: Protocol, rate: f64, trials: usize) -> Result<(f64, f64)> {
    check_trials(trials, 1000)?;
    let samples = sinr_samples(config, protocol, trials)?;
    Ok(outage_from_samples(&samples, rate))
}

/// Outage estimate from precomputed SINR samples.
pub fn outage_from_samples(samples: &[f64], rate: f64) -> (f64, f64) {
    let threshold = 2f64.powf(2.0 * rate) - 1.0;
    let n = samples.len() as f64;
    let p = samples.iter().filter(|&&s| s <= threshold).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

/// Sample mean of `1/2 log2(1 + SINR)` with its standard error.
pub fn ergodic_estimate(config: &NetworkConfig, protocol: Protocol, trials: usize) -> Result<(f64, f64)> {
    check_trials(trials, 2)?;
    let mi: Vec<f64> = sinr_samples(config, protocol, trials)?
        .into_iter()
        .map(|s| 0.5 * s.ln_1p() / std::f64::consts::LN_2)
        .collect();
    Ok(mean_stderr(&mi))
}

/// Empirical moments of the SISO decomposition of link `m`.
///
/// The gain mean and fluctuation variance are sample statistics of the effective gain;
/// the noise variance averages the conditional variance of the effective noise.
pub fn moment_estimate(config: &NetworkConfig, protocol: Protocol, m: usize, trials: usize) -> Result<LinkMoments> {
    check_trials(trials, 2)?;
    let s2 = config.sigma2();
    let mf = config.m() as f64;
    let draws: Vec<(Complex64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let ch = sample_channels(config, i as u64);
            let d = decompose_siso(config, &ch, m, protocol)?;
            let interference: f64 = d.interference_gains.iter().map(|g| g.norm_sqr()).sum::<f64>() / mf;
            let noise: f64 = s2 * d.relay_noise_gains.iter().map(|b| b.norm_sqr()).sum::<f64>();
            Ok((d.effective_gain, interference + noise + s2 * d.dest_noise_gain.powi(2)))
        })
        .collect::<Result<_>>()?;
    let n = trials as f64;
    let mean: Complex64 = draws.iter().map(|(g, _)| g).sum::<Complex64>() / n;
    let var_f = draws.iter().map(|(g, _)| (g - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    let var_w = draws.iter().map(|(_, w)| w).sum::<f64>() / n;
    Ok(LinkMoments { f_bar: mean.re, var_f_tilde: var_f, var_w })
}

fn gaussian_matrix(rng: &mut rng::StreamRng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| rng::complex_normal(rng))
}

fn check_af_dims(m: usize, k: usize, d: f64) -> Result<()> {
    if m == 0 || k == 0 {
        return precondition(format!("need M >= 1 and K >= 1, got M={m}, K={k}"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return precondition(format!("relay scale d must be positive, got {d}"));
    }
    Ok(())
}

/// Eigenvalues of `(d^2/K) F F^H` for an `M x K` Gaussian `F` drawn from `rng`.
fn lambda_eigen(rng: &mut rng::StreamRng, m: usize, k: usize, d: f64, vectors: bool) -> Result<(CMatrix, crate::linalg::HermitianEigen)> {
    let f = gaussian_matrix(rng, m, k);
    let a = f.gram().scale(d * d / k as f64);
    let eig = jacobi_eigen(&a, vectors)?;
    Ok((f, eig))
}

fn pad_zeros(mut values: Vec<f64>, n: usize) -> Vec<f64> {
    values.truncate(n);
    values.resize(n, 0.0);
    values
}

/// Eigenvalues of `T = (d^2/K) F^H (I + (d^2/K) F F^H)^{-1} F` for one draw.
///
/// Uses the `M x M` Gram matrix; the `K - M` structural zeros are appended exactly.
pub fn t_eigenvalues(m: usize, k: usize, d: f64, stream: u64, seed: u64) -> Result<Vec<f64>> {
    check_af_dims(m, k, d)?;
    let mut rng = rng::stream(seed, DOMAIN_SAMPLER, stream);
    let (_, eig) = lambda_eigen(&mut rng, m, k, d, false)?;
    let mut vals: Vec<f64> = eig.values.iter().map(|&mu| mu.max(0.0) / (1.0 + mu.max(0.0))).collect();
    // Largest min(M, K) are the nonzero ones.
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut out = pad_zeros(vals, k);
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Eigenvalues of `(1/M) H H^H T` for one draw (`H` is `K x M`).
///
/// Computed as the spectrum of a Hermitian matrix similar to it on its range, in
/// whichever of the `K x K` or `M x M` forms is smaller; structural zeros are exact.
pub fn product_eigenvalues(m: usize, k: usize, d: f64, stream: u64, seed: u64) -> Result<Vec<f64>> {
    check_af_dims(m, k, d)?;
    let mut rng = rng::stream(seed, DOMAIN_SAMPLER, stream);
    let f = gaussian_matrix(&mut rng, m, k);
    let h = gaussian_matrix(&mut rng, k, m);
    let c2 = d * d / k as f64;
    let mut vals = if k <= m {
        // T = A (I + A)^{-1} with A = (d^2/K) F^H F (K x K); B = T^{1/2} (1/M) H H^H T^{1/2}.
        let a = f.adjoint().gram().scale(c2);
        let eig = jacobi_eigen(&a, true)?;
        let v = eig.vectors.expect("vectors requested");
        let roots: Vec<f64> = eig.values.iter().map(|&mu| (mu.max(0.0) / (1.0 + mu.max(0.0))).sqrt()).collect();
        let t_half = scaled_outer(&v, &roots);
        let g = t_half.matmul(&h)?;
        hermitian_eigenvalues(&g.gram().scale(1.0 / m as f64))?
    } else {
        // T = C^H C with C = (I + Lambda)^{-1/2} (d/sqrt K) F; B' = (1/M) (C H)(C H)^H (M x M).
        let a = f.gram().scale(c2);
        let eig = jacobi_eigen(&a, true)?;
        let u = eig.vectors.expect("vectors requested");
        let inv: Vec<f64> = eig.values.iter().map(|&mu| 1.0 / (1.0 + mu.max(0.0)).sqrt()).collect();
        let w = scaled_outer(&u, &inv);
        let cmat = w.matmul(&f)?.scale(c2.sqrt());
        let g = cmat.matmul(&h)?;
        hermitian_eigenvalues(&g.gram().scale(1.0 / m as f64))?
    };
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut out = pad_zeros(vals, k);
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `V diag(s) V^H`.
fn scaled_outer(v: &CMatrix, s: &[f64]) -> CMatrix {
    let n = v.rows();
    let vs = CMatrix::from_fn(n, n, |i, j| v[(i, j)] * s[j]);
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..n {
                acc += vs[(i, l)] * v[(j, l)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Eigenvalues of `(d^2/K) F F^H` (`M x M`, `F` is `M x K`) for one draw.
pub fn mp_eigenvalues(m: usize, k: usize, d: f64, stream: u64, seed: u64) -> Result<Vec<f64>> {
    check_af_dims(m, k, d)?;
    let mut rng = rng::stream(seed, DOMAIN_SAMPLER, stream);
    let (_, eig) = lambda_eigen(&mut rng, m, k, d, false)?;
    let mut vals: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let rank = m.min(k);
    for v in vals.iter_mut().skip(rank) {
        *v = 0.0;
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Which AF matrix ensemble to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    /// `(d^2/K) F F^H`.
    Lambda,
    /// `T`.
    T,
    /// `(1/M) H H^H T`.
    Product,
}

/// Pooled eigenvalues of `trials` independent draws of the chosen ensemble.
pub fn esd_samples(ensemble: Ensemble, m: usize, k: usize, d: f64, trials: usize, seed: u64) -> Result<EmpiricalCdf> {
    check_trials(trials, 1)?;
    let pools: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| match ensemble {
            Ensemble::Lambda => mp_eigenvalues(m, k, d, i as u64, seed),
            Ensemble::T => t_eigenvalues(m, k, d, i as u64, seed),
            Ensemble::Product => product_eigenvalues(m, k, d, i as u64, seed),
        })
        .collect::<Result<_>>()?;
    EmpiricalCdf::new(pools.concat(), seed)
}

/// Finite-size AF capacity `1/2 E[(1/M) sum_k log2(1 + lambda_k / sigma2)]` with its
/// standard error over `trials >= 10` draws.
pub fn af_capacity_mc(m: usize, k: usize, d: f64, sigma2: f64, trials: usize, seed: u64) -> Result<(f64, f64)> {
    check_trials(trials, 10)?;
    if !(sigma2 > 0.0) {
        return precondition(format!("sigma2 must be positive, got {sigma2}"));
    }
    let caps: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let vals = product_eigenvalues(m, k, d, i as u64, seed)?;
            let sum: f64 = vals.iter().map(|&l| (l.max(0.0) / sigma2).ln_1p()).sum();
            Ok(0.5 * sum / (m as f64 * std::f64::consts::LN_2))
        })
        .collect::<Result<_>>()?;
    Ok(mean_stderr(&caps))
}

/// Kolmogorov-Smirnov distance between an empirical CDF and a right-continuous model
/// CDF, evaluated on both sides of every jump of the empirical CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(empirical: &EmpiricalCdf, model_cdf: F) -> f64 {
    let s = empirical.samples();
    let n = s.len() as f64;
    let mut worst = 0.0_f64;
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[i] {
            j += 1;
        }
        // Left limits compare against the model just below the jump so atoms match.
        let below = i as f64 / n;
        let at = (j + 1) as f64 / n;
        let left = model_cdf(s[i].next_down());
        worst = worst.max((left - below).abs()).max((model_cdf(s[i]) - at).abs());
        i = j + 1;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_cdf_steps() {
        let e = EmpiricalCdf::new(vec![3.0, 1.0, 2.0], 0).unwrap();
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(1.0), 1.0 / 3.0);
        assert_eq!(e.eval(3.0), 1.0);
        assert_eq!(e.median(), 2.0);
    }

    #[test]
    fn ks_single_sample() {
        let e = EmpiricalCdf::new(vec![0.5], 0).unwrap();
        assert!((ks_distance(&e, |x| x.clamp(0.0, 1.0)) - 0.5).abs() < 1e-15);
    }
}
