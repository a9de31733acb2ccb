//! Large-deviations bound evaluators (Hoeffding, Maurer, truncation technique),
//! union-bound combinators, and an empirical falsification harness.
//!
//! Bounds are returned unclamped; they may exceed one.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng, DOMAIN_SAMPLER};

/// A tail-probability bound `bound` together with its validity threshold.
///
/// Bounds of the form `prefactor * exp(-exponent_rate * x^power)` record the rate and
/// power; `valid_from` is the smallest `x` for which the bound is guaranteed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    /// Upper bound on the probability, possibly above one.
    pub bound: f64,
    /// Smallest deviation parameter for which the bound holds.
    pub valid_from: f64,
    /// Coefficient multiplying `x^power` in the exponent.
    pub exponent_rate: f64,
    /// Power of `x` in the exponent.
    pub power: f64,
}

impl TailBound {
    /// `min(1, bound)`.
    pub fn clamped(&self) -> f64 {
        self.bound.min(1.0)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} must be positive, got {v}")))
    }
}

/// Hoeffding: `P{S_N - E S_N >= N x} <= exp(-2 N^2 x^2 / sum (B_n - A_n)^2)`.
pub fn hoeffding(n: usize, ranges: &[(f64, f64)], x: f64) -> Result<TailBound> {
    if ranges.is_empty() || n == 0 {
        return Err(Error::Precondition("Hoeffding needs at least one range".into()));
    }
    if ranges.iter().any(|(a, b)| !(b >= a)) {
        return Err(Error::Precondition("every range needs B_n >= A_n".into()));
    }
    let width: f64 = ranges.iter().map(|(a, b)| (b - a).powi(2)).sum();
    let nf = n as f64;
    let rate = if width > 0.0 { 2.0 * nf * nf / width } else { f64::INFINITY };
    Ok(TailBound { bound: exp_tail(rate, x, 2.0), valid_from: 0.0, exponent_rate: rate, power: 2.0 })
}

/// Maurer (nonnegative summands): `P{E S_N - S_N >= N x} <= exp(-N^2 x^2 / (2 sum E X_n^2))`.
pub fn maurer(n: usize, second_moments: &[f64], x: f64) -> Result<TailBound> {
    if second_moments.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::Precondition("second moments must be nonnegative".into()));
    }
    let total: f64 = second_moments.iter().sum();
    let nf = n as f64;
    let rate = if total > 0.0 { nf * nf / (2.0 * total) } else { f64::INFINITY };
    Ok(TailBound { bound: exp_tail(rate, x, 2.0), valid_from: 0.0, exponent_rate: rate, power: 2.0 })
}

fn exp_tail(rate: f64, x: f64, power: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if rate.is_infinite() {
        0.0
    } else {
        (-rate * x.powf(power)).exp()
    }
}

/// Parameters of the truncation technique: summand tails `P{|X_n| >= x} <= B exp(-alpha x^beta)`
/// for `x >= x0`, coefficients bounded by `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    /// Number of summands.
    pub n: usize,
    /// Tail prefactor.
    pub b: f64,
    /// Tail rate.
    pub alpha: f64,
    /// Tail power.
    pub beta: f64,
    /// Bound on the deterministic coefficients.
    pub a: f64,
    /// Threshold from which the summand tail condition holds.
    pub x0: f64,
}

impl TruncationParams {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Precondition("N must be positive".into()));
        }
        check_positive("B", self.b)?;
        check_positive("alpha", self.alpha)?;
        check_positive("beta", self.beta)?;
        check_positive("A", self.a)?;
        check_positive("x0", self.x0)
    }

    /// `x0^((2 + beta)/2)`, the smallest admissible deviation.
    pub fn valid_from(&self) -> f64 {
        self.x0.powf((2.0 + self.beta) / 2.0)
    }

    fn power(&self) -> f64 {
        2.0 * self.beta / (2.0 + self.beta)
    }

    fn check_x(&self, x: f64) -> Result<()> {
        let v = self.valid_from();
        if x < v {
            return Err(Error::Precondition(format!("x = {x} below the validity threshold {v}")));
        }
        Ok(())
    }
}

/// Real sums `S_N = sum A_n X_n phi_n` with bounded zero-mean `phi_n`:
/// `P{|S_N| >= sqrt(N) x} <= 2 max[2, NB] exp(-min[1/(2A^2), alpha] x^(2beta/(2+beta)))`.
pub fn truncation_bound(p: TruncationParams, x: f64) -> Result<TailBound> {
    p.validate()?;
    p.check_x(x)?;
    let rate = (1.0 / (2.0 * p.a * p.a)).min(p.alpha);
    let pre = 2.0 * (2.0f64).max(p.n as f64 * p.b);
    Ok(TailBound {
        bound: pre * (-rate * x.powf(p.power())).exp(),
        valid_from: p.valid_from(),
        exponent_rate: rate,
        power: p.power(),
    })
}

/// Complex sums `S_N = sum A_n X_n e^{j phi_n}` with uniform phases:
/// `4 max[2, NB] exp(-min[1/(2A^2), alpha] 2^(-beta/(beta+2)) x^(2beta/(beta+2)))`.
pub fn truncation_bound_complex(p: TruncationParams, x: f64) -> Result<TailBound> {
    p.validate()?;
    p.check_x(x)?;
    let rate = (1.0 / (2.0 * p.a * p.a)).min(p.alpha) * 2f64.powf(-p.beta / (p.beta + 2.0));
    let pre = 4.0 * (2.0f64).max(p.n as f64 * p.b);
    Ok(TailBound {
        bound: pre * (-rate * x.powf(p.power())).exp(),
        valid_from: p.valid_from(),
        exponent_rate: rate,
        power: p.power(),
    })
}

/// Independent nonnegative summands with `E X_n^2 <= c`:
/// `P{|S_N - E S_N| >= sqrt(N) x} <= 3 max[1, NB] exp(-min[2/A^2, alpha, 1/(2A^2 C)] x^(2beta/(beta+2)))`.
pub fn truncation_bound_nonneg(p: TruncationParams, c: f64, x: f64) -> Result<TailBound> {
    p.validate()?;
    check_positive("C", c)?;
    p.check_x(x)?;
    let a2 = p.a * p.a;
    let rate = (2.0 / a2).min(p.alpha).min(1.0 / (2.0 * a2 * c));
    let pre = 3.0 * (1.0f64).max(p.n as f64 * p.b);
    Ok(TailBound {
        bound: pre * (-rate * x.powf(p.power())).exp(),
        valid_from: p.valid_from(),
        exponent_rate: rate,
        power: p.power(),
    })
}

/// A deviation statement `P{|X| >= threshold} <= prob` (or its lower-tail analogue).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    /// Threshold `C`.
    pub threshold: f64,
    /// Probability bound `P`.
    pub prob: f64,
}

impl Deviation {
    /// Shorthand constructor.
    pub fn new(threshold: f64, prob: f64) -> Self {
        Self { threshold, prob }
    }
}

/// Union bound for sums: `(sum C_n, sum P_n)`.
pub fn combine_sum(terms: &[Deviation]) -> Deviation {
    Deviation {
        threshold: terms.iter().map(|d| d.threshold).sum(),
        prob: terms.iter().map(|d| d.prob).sum(),
    }
}

/// Pythagorean union bound for real and imaginary parts: `(sqrt(C_R^2 + C_I^2), P_R + P_I)`.
pub fn combine_pythagorean(re: Deviation, im: Deviation) -> Deviation {
    Deviation { threshold: re.threshold.hypot(im.threshold), prob: re.prob + im.prob }
}

/// Mixed sums, lower deviation: complex terms `|X_n| >= C_n` plus real terms
/// `X'_n <= C'_n` give `P{|sum| <= max[0, sum C' - sum C]} <= sum P + sum P'`.
pub fn combine_mixed_lower(complex_terms: &[Deviation], real_terms: &[Deviation]) -> Deviation {
    let c = combine_sum(complex_terms);
    let r = combine_sum(real_terms);
    Deviation { threshold: (r.threshold - c.threshold).max(0.0), prob: c.prob + r.prob }
}

/// Mixed sums, upper deviation: `P{|sum| >= sum C' + sum C} <= sum P + sum P'`.
pub fn combine_mixed_upper(complex_terms: &[Deviation], real_terms: &[Deviation]) -> Deviation {
    let c = combine_sum(complex_terms);
    let r = combine_sum(real_terms);
    Deviation { threshold: r.threshold + c.threshold, prob: c.prob + r.prob }
}

/// Union bound for products: `(prod C_n, sum P_n)`.
pub fn combine_product(terms: &[Deviation]) -> Deviation {
    Deviation {
        threshold: terms.iter().map(|d| d.threshold).product(),
        prob: terms.iter().map(|d| d.prob).sum(),
    }
}

/// Union bound for fractions: `(C_1/C_2, P_1 + P_2)` where the denominator statement
/// is a lower deviation `P{|X_2| <= C_2} <= P_2`.
pub fn combine_fraction(num: Deviation, den: Deviation) -> Result<Deviation> {
    if !(den.threshold > 0.0) {
        return Err(Error::Precondition("fraction bound needs a positive denominator threshold".into()));
    }
    Ok(Deviation { threshold: num.threshold / den.threshold, prob: num.prob + den.prob })
}

/// One row of an empirical tail check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheckRow {
    /// Deviation parameter.
    pub x: f64,
    /// Empirical `P{|S| >= sqrt(N) x}`.
    pub empirical: f64,
    /// Analytic bound at `x` (unclamped).
    pub bound: f64,
    /// Binomial standard error under the null `p = min(1, bound)`.
    pub sigma: f64,
    /// Whether the empirical tail exceeds `min(1, bound) + 3 sigma`.
    pub violated: bool,
}

/// Result of [`empirical_tail_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct TailCheckReport {
    /// Number of trials.
    pub trials: usize,
    /// Per-x rows.
    pub rows: Vec<TailCheckRow>,
}

impl TailCheckReport {
    /// Number of flagged violations.
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violated).count()
    }
}

/// Compares the empirical tail of `sampler` against `bound_fn` on `x_grid`.
///
/// The sampler returns one realization of the sum (its modulus is used); the event
/// is `|S| >= sqrt(n) x`. Trial `i` draws from stream `(seed, i)`.
pub fn empirical_tail_check<S, B>(
    sampler: S,
    bound_fn: B,
    n: usize,
    x_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<TailCheckReport>
where
    S: Fn(&mut StreamRng) -> f64 + Sync,
    B: Fn(f64) -> f64,
{
    if trials < 1000 {
        return Err(Error::Precondition(format!("need at least 1000 trials, got {trials}")));
    }
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, DOMAIN_SAMPLER, i as u64);
            sampler(&mut r).abs()
        })
        .collect();
    let scale = (n as f64).sqrt();
    let rows = x_grid
        .iter()
        .map(|&x| {
            let hits = samples.iter().filter(|&&s| s >= scale * x).count();
            let empirical = hits as f64 / trials as f64;
            let bound = bound_fn(x);
            let b = bound.clamp(0.0, 1.0);
            let sigma = (b * (1.0 - b) / trials as f64).sqrt();
            TailCheckRow { x, empirical, bound, sigma, violated: empirical > b + 3.0 * sigma }
        })
        .collect();
    Ok(TailCheckReport { trials, rows })
}
