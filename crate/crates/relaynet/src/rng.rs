//! Counter-based random streams keyed by `(seed, domain, index)`.
//!
//! Each Monte Carlo trial owns a ChaCha stream selected by its index, so results do
//! not depend on how trials are scheduled across worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Generator type used throughout the crate.
pub type StreamRng = ChaCha12Rng;

/// Stream domain for fading coefficients.
pub const DOMAIN_CHANNEL: u64 = 1;
/// Stream domain for source symbols and noise.
pub const DOMAIN_SIGNAL: u64 = 2;
/// Stream domain for generic samplers (tail checks, matrix ensembles).
pub const DOMAIN_SAMPLER: u64 = 3;

/// Returns the generator for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Circularly symmetric complex Gaussian with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Circularly symmetric complex Gaussian with variance `var`.
pub fn complex_normal_var<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    complex_normal(rng) * var.sqrt()
}

/// Unit-modulus complex number with uniform phase.
pub fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let phi: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    Complex64::from_polar(1.0, phi)
}
