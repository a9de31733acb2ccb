//! Network configuration, channel sampling, and the scalar gain constants consumed by
//! every analytic bound.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::{self, DOMAIN_CHANNEL};

/// Interval bounds on the first-hop (`E`) and second-hop (`P`) average energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRange {
    /// Smallest first-hop energy.
    pub e_lo: f64,
    /// Largest first-hop energy.
    pub e_hi: f64,
    /// Smallest second-hop energy.
    pub p_lo: f64,
    /// Largest second-hop energy.
    pub p_hi: f64,
}

impl GainRange {
    /// Range with every energy equal to one.
    pub const UNIT: GainRange = GainRange { e_lo: 1.0, e_hi: 1.0, p_lo: 1.0, p_hi: 1.0 };

    fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi;
        if !ok(self.e_lo, self.e_hi) || !ok(self.p_lo, self.p_hi) {
            return Err(Error::Config(format!("malformed gain range {self:?}")));
        }
        Ok(())
    }
}

/// Dimensions, noise and power parameters, and path-loss/shadowing energies.
///
/// Immutable after construction. `E` is K×M (`E[k][m]`), `P` is M×K (`P[m][k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    m: usize,
    k: usize,
    sigma2: f64,
    p_rel: f64,
    e: Vec<f64>,
    p: Vec<f64>,
    l: usize,
    q: usize,
    seed: u64,
    range_override: Option<GainRange>,
}

impl NetworkConfig {
    /// Builds a configuration from explicit energy matrices (row-major).
    pub fn new(m: usize, k: usize, sigma2: f64, p_rel: f64, e: Vec<f64>, p: Vec<f64>, seed: u64) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::Config(format!("need M >= 1 and K >= 1, got M={m}, K={k}")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Config(format!("sigma2 must be positive and finite, got {sigma2}")));
        }
        if !(p_rel > 0.0 && p_rel.is_finite()) {
            return Err(Error::Config(format!("P_rel must be positive and finite, got {p_rel}")));
        }
        if e.len() != k * m || p.len() != m * k {
            return Err(Error::Config(format!(
                "E must be {k}x{m} and P {m}x{k}; got {} and {} entries",
                e.len(),
                p.len()
            )));
        }
        if e.iter().chain(&p).any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Config("energies must be finite and nonnegative".into()));
        }
        Ok(Self { m, k, sigma2, p_rel, e, p, l: 1, q: k, seed, range_override: None })
    }

    /// Configuration with every energy equal to one.
    pub fn uniform(m: usize, k: usize, sigma2: f64, p_rel: f64, seed: u64) -> Result<Self> {
        Self::constant(m, k, sigma2, p_rel, 1.0, 1.0, seed)
    }

    /// Configuration with constant first-hop energy `e` and second-hop energy `p`.
    pub fn constant(m: usize, k: usize, sigma2: f64, p_rel: f64, e: f64, p: f64, seed: u64) -> Result<Self> {
        Self::new(m, k, sigma2, p_rel, vec![e; k * m], vec![p; m * k], seed)
    }

    /// Groups relays into contiguous v-relays of `l` antennas each.
    ///
    /// Requires `l` to divide K and M to divide the number of groups Q = K/L.
    pub fn with_groups(mut self, l: usize) -> Result<Self> {
        if l == 0 || !self.k.is_multiple_of(l) {
            return Err(Error::Config(format!("L={l} must divide K={}", self.k)));
        }
        let q = self.k / l;
        if !q.is_multiple_of(self.m) {
            return Err(Error::Config(format!("M={} must divide Q={q}", self.m)));
        }
        self.l = l;
        self.q = q;
        Ok(self)
    }

    /// Overrides the energy interval used for the gain constants.
    ///
    /// The override must contain every supplied energy.
    pub fn with_gain_range(mut self, range: GainRange) -> Result<Self> {
        range.validate()?;
        let actual = self.observed_range();
        if actual.e_lo < range.e_lo || actual.e_hi > range.e_hi || actual.p_lo < range.p_lo || actual.p_hi > range.p_hi {
            return Err(Error::Config(format!("gain range {range:?} does not contain the energies {actual:?}")));
        }
        self.range_override = Some(range);
        Ok(self)
    }

    /// Returns a copy with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of source-destination pairs.
    pub fn m(&self) -> usize {
        self.m
    }
    /// Number of single-antenna relays.
    pub fn k(&self) -> usize {
        self.k
    }
    /// Noise variance.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
    /// Total relay power.
    pub fn p_rel(&self) -> f64 {
        self.p_rel
    }
    /// Relays per cooperation group.
    pub fn l(&self) -> usize {
        self.l
    }
    /// Number of cooperation groups.
    pub fn q(&self) -> usize {
        self.q
    }
    /// RNG seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }
    /// First-hop energy `E[k][m]` (0-based).
    pub fn e(&self, k: usize, m: usize) -> f64 {
        self.e[k * self.m + m]
    }
    /// Second-hop energy `P[m][k]` (0-based).
    pub fn p(&self, m: usize, k: usize) -> f64 {
        self.p[m * self.k + k]
    }

    fn observed_range(&self) -> GainRange {
        let (e_lo, e_hi) = min_max(&self.e);
        let (p_lo, p_hi) = min_max(&self.p);
        GainRange { e_lo, e_hi, p_lo, p_hi }
    }

    /// Energy interval: the override if set, otherwise the min/max of the matrices.
    pub fn gain_range(&self) -> GainRange {
        self.range_override.unwrap_or_else(|| self.observed_range())
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// One draw of the fading coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// First hop, K×M (`h[k][m]`: source m to relay k).
    pub h: CMatrix,
    /// Second hop, M×K (`f[m][k]`: relay k to destination m).
    pub f: CMatrix,
}

/// Samples i.i.d. unit-variance circularly symmetric Gaussian fading for stream `stream`.
///
/// Reproducible from `(config.seed(), stream)`; H is drawn before F, row by row.
pub fn sample_channels(config: &NetworkConfig, stream: u64) -> ChannelRealization {
    let mut rng = rng::stream(config.seed, DOMAIN_CHANNEL, stream);
    let h = CMatrix::from_fn(config.k, config.m, |_, _| rng::complex_normal(&mut rng));
    let f = CMatrix::from_fn(config.m, config.k, |_, _| rng::complex_normal(&mut rng));
    ChannelRealization { h, f }
}

/// Gain constants shared by every analytic bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainBounds {
    /// Lower bound on the effective per-relay signal gain.
    pub big_c_lo: f64,
    /// Upper bound on the effective per-relay signal gain.
    pub big_c_hi: f64,
    /// Lower bound on the effective per-relay noise gain.
    pub c_lo: f64,
    /// Upper bound on the effective per-relay noise gain.
    pub c_hi: f64,
    /// Lower signal-plus-noise constant.
    pub csn_lo: f64,
    /// Upper signal-plus-noise constant.
    pub csn_hi: f64,
    /// Exponent constant of the P1 concentration bound.
    pub delta_p1: f64,
    /// Exponent constant of the P2 concentration bound.
    pub delta_p2: f64,
}

/// Derives the gain constants from a configuration.
pub fn derive_constants(config: &NetworkConfig) -> Result<GainBounds> {
    derive_constants_from(config.gain_range(), config.sigma2, config.p_rel)
}

/// Derives the gain constants from an energy interval.
pub fn derive_constants_from(range: GainRange, sigma2: f64, p_rel: f64) -> Result<GainBounds> {
    range.validate()?;
    if range.e_lo <= 0.0 || range.p_lo <= 0.0 {
        return Err(Error::Config("degenerate energy range: lower bounds must be positive".into()));
    }
    if !(sigma2 > 0.0 && p_rel > 0.0) {
        return Err(Error::Config("sigma2 and P_rel must be positive".into()));
    }
    let GainRange { e_lo, e_hi, p_lo, p_hi } = range;
    let big_c_lo = (p_lo * e_lo * p_rel / (e_hi + sigma2)).sqrt();
    let big_c_hi = (p_hi * e_hi * p_rel / (e_lo + sigma2)).sqrt();
    let c_lo = (p_lo * p_rel / (e_hi + sigma2)).sqrt();
    let c_hi = (p_hi * p_rel / (e_lo + sigma2)).sqrt();
    let csn_lo = (big_c_lo.powi(2) + sigma2 * (c_lo.powi(2) + 1.0)).sqrt();
    let csn_hi = (big_c_hi.powi(2) + sigma2 * (c_hi.powi(2) + 1.0)).sqrt();
    let ch2 = big_c_hi.powi(2);
    let delta_p1 = [
        2f64.powf(-10.0 / 21.0),
        1.0 / (2f64.powf(31.0 / 21.0) * ch2),
        1.0 / (8.0 * ch2 * ch2),
        1.0 / (4.0 * c_hi.powi(4)),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let delta_p2 = [
        2f64.powf(-11.0 / 5.0),
        1.0 / (2f64.powf(61.0 / 36.0) * ch2),
        1.0 / (8.0 * ch2 * ch2),
        1.0 / (4.0 * c_hi.powi(4)),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    Ok(GainBounds { big_c_lo, big_c_hi, c_lo, c_hi, csn_lo, csn_hi, delta_p1, delta_p2 })
}

/// Contiguous block partition `p(k) = ceil(kM/K)` (returned 0-based).
pub fn relay_partition(k: usize, m: usize) -> Result<Vec<usize>> {
    if m == 0 || k == 0 || !k.is_multiple_of(m) {
        return Err(Error::Precondition(format!("M={m} must divide K={k}")));
    }
    Ok((1..=k).map(|kk| (kk * m).div_ceil(k) - 1).collect())
}
