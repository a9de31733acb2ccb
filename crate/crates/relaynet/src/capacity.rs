//! Ergodic-capacity and outage bounds for the coherent protocols, together with the
//! closed-form moments of the effective SISO channel that feed the imperfect-CSI
//! lower bound.

use std::f64::consts::{LN_2, PI};

use crate::coherent::{relay_scale_p1, relay_scale_p2, vrelay_scale_p1, Protocol};
use crate::error::{precondition, Result};
use crate::model::{derive_constants, relay_partition, GainBounds, NetworkConfig};

/// Mean and variances of the effective SISO channel `y = (F_bar + F_tilde) s + W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMoments {
    /// Mean effective gain.
    pub f_bar: f64,
    /// Variance of the gain fluctuation.
    pub var_f_tilde: f64,
    /// Variance of the effective noise.
    pub var_w: f64,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// `log2(1 + F_bar^2 s / (var_F s + var_W))` with `s = sigma_x2`.
pub fn medard_lower_bound(moments: LinkMoments, sigma_x2: f64) -> Result<f64> {
    let LinkMoments { f_bar, var_f_tilde, var_w } = moments;
    if !(var_f_tilde >= 0.0 && var_w >= 0.0 && sigma_x2 >= 0.0) {
        return precondition("variances must be nonnegative");
    }
    let signal = f_bar * f_bar * sigma_x2;
    if signal == 0.0 {
        return Ok(0.0);
    }
    let den = var_f_tilde * sigma_x2 + var_w;
    if den <= 0.0 {
        return precondition("degenerate denominator: zero gain and noise variance");
    }
    Ok(log2_1p(signal / den))
}

fn check_link(config: &NetworkConfig, m: usize) -> Result<()> {
    if m >= config.m() {
        return precondition(format!("link index {m} out of range for M={}", config.m()));
    }
    Ok(())
}

/// Closed-form P1 moments of link `m` (0-based).
pub fn p1_moments(config: &NetworkConfig, m: usize) -> Result<LinkMoments> {
    check_link(config, m)?;
    let (mm, k) = (config.m(), config.k());
    let part = relay_partition(k, mm)?;
    let kf = k as f64;
    let mut own = 0.0;
    let mut own_sq = 0.0;
    let mut all_sq = 0.0;
    let mut interf_sq = 0.0;
    let mut noise_sq = 0.0;
    for (kk, &pk) in part.iter().enumerate() {
        let d = relay_scale_p1(config, kk);
        let base = kf.sqrt() * d * config.p(m, kk).sqrt();
        let c = base * config.e(kk, m).sqrt();
        all_sq += c * c;
        if pk == m {
            own += c;
            own_sq += c * c;
        }
        interf_sq += (0..mm).filter(|&h| h != m).map(|h| base * base * config.e(kk, h)).sum::<f64>();
        noise_sq += base * base;
    }
    let s2 = config.sigma2();
    Ok(LinkMoments {
        f_bar: PI / 4.0 / kf.sqrt() * own,
        var_f_tilde: (all_sq - PI * PI / 16.0 * own_sq) / kf,
        var_w: interf_sq / (kf * mm as f64) + s2 / kf * noise_sq + s2,
    })
}

/// Closed-form P2 moments of link `m` (0-based).
pub fn p2_moments(config: &NetworkConfig, m: usize) -> Result<LinkMoments> {
    check_link(config, m)?;
    let (mm, k) = (config.m(), config.k());
    let (mf, kf) = (mm as f64, k as f64);
    let norm = (kf * mf).sqrt();
    let mut own = 0.0;
    let mut own_sq = 0.0;
    let mut interf_sq = 0.0;
    let mut noise_sq = 0.0;
    for kk in 0..k {
        let d = relay_scale_p2(config, kk);
        let base = norm * d * config.p(m, kk).sqrt();
        let c = base * config.e(kk, m).sqrt();
        own += c;
        own_sq += c * c;
        interf_sq += (0..mm).filter(|&h| h != m).map(|h| base * base * config.e(kk, h)).sum::<f64>();
        noise_sq += base * base;
    }
    let s2 = config.sigma2();
    Ok(LinkMoments {
        f_bar: PI / 4.0 / norm * own,
        var_f_tilde: own_sq * ((1.0 - PI * PI / 16.0) + (mf - 1.0)) / (kf * mf),
        var_w: interf_sq / (kf * mf) + s2 / kf * noise_sq + s2,
    })
}

/// Closed-form cooperative P1 moments of link `m` (0-based).
///
/// With `L = 1` these coincide with [`p1_moments`].
pub fn coop_p1_moments(config: &NetworkConfig, m: usize) -> Result<LinkMoments> {
    check_link(config, m)?;
    let (mm, q, l) = (config.m(), config.q(), config.l());
    let part = relay_partition(q, mm)?;
    let (mf, qf, lf) = (mm as f64, q as f64, l as f64);
    let boost = lf * lf + PI / 4.0 * lf * lf * (lf - 1.0);
    let own_var = ((lf + PI / 4.0 * (lf - 1.0) * lf).powi(2) - PI * PI / 16.0 * lf.powi(4)) / qf;
    let mut own = 0.0;
    let mut fvar = 0.0;
    let mut wvar = 0.0;
    let s2 = config.sigma2();
    for (qq, &pq) in part.iter().enumerate() {
        let k0 = qq * l;
        let d = vrelay_scale_p1(config, qq)?;
        let base = qf.sqrt() * d * config.p(m, k0).sqrt();
        let c = base * config.e(k0, m).sqrt();
        if pq == m {
            own += c;
            fvar += own_var * c * c;
            wvar += boost / qf * s2 * base * base;
        } else {
            fvar += lf * lf / qf * c * c;
            wvar += lf * lf / qf * s2 * base * base;
        }
        for h in (0..mm).filter(|&h| h != m) {
            let ch2 = base * base * config.e(k0, h);
            let factor = if pq == m || pq == h { boost } else { lf * lf };
            wvar += factor / (qf * mf) * ch2;
        }
    }
    Ok(LinkMoments { f_bar: PI / 4.0 * lf * lf / qf.sqrt() * own, var_f_tilde: fvar, var_w: wvar + s2 })
}

/// Finite-(M, K) P1 lower bound `1/2 log2(1 + (pi^2/16) C_lo^2 / (C_hi^2/M + C_SN_hi^2) K/M^3)`.
pub fn ergodic_lower_p1_finite(config: &NetworkConfig) -> Result<f64> {
    let g = derive_constants(config)?;
    let (mf, kf) = (config.m() as f64, config.k() as f64);
    let ratio = g.big_c_lo.powi(2) / (g.big_c_hi.powi(2) / mf + g.csn_hi.powi(2));
    Ok(0.5 * log2_1p(PI * PI / 16.0 * ratio * kf / mf.powi(3)))
}

/// Factor `f_lo(M, L)` of the cooperative P1 lower bound.
pub fn coop_gain_factor(config: &NetworkConfig) -> Result<f64> {
    let g = derive_constants(config)?;
    let r = config.gain_range();
    let (mf, lf, s2) = (config.m() as f64, config.l() as f64, config.sigma2());
    let ch2 = g.big_c_hi.powi(2);
    let cl2 = g.c_hi.powi(2);
    let boost = 1.0 + PI / 4.0 * (lf - 1.0);
    let eps = ch2 / mf + boost * boost / (mf * mf) * ch2 + boost * (2.0 * ch2 + s2 * cl2) / mf;
    let num = r.p_lo * r.e_lo * config.p_rel() * lf * lf;
    let den = (r.e_hi + PI * (lf - 1.0) / (4.0 * mf) * r.e_hi + s2) * (eps + ch2 + s2 * cl2 + s2);
    Ok(num / den)
}

/// Finite cooperative P1 lower bound `1/2 log2(1 + (pi^2/16) (Q/M^3) f_lo(M, L))`.
pub fn ergodic_lower_coop_p1_finite(config: &NetworkConfig) -> Result<f64> {
    let f = coop_gain_factor(config)?;
    let (mf, qf) = (config.m() as f64, config.q() as f64);
    Ok(0.5 * log2_1p(PI * PI / 16.0 * qf / mf.powi(3) * f))
}

/// Asymptotic ergodic-capacity interval in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicInterval {
    /// Lower bound.
    pub lower: f64,
    /// Upper bound.
    pub upper: f64,
}

/// Ergodic-capacity interval for the given protocol.
///
/// `n` is K for P1 and P2 and the number of groups Q for the cooperative protocols;
/// `l` must be 1 for the non-cooperative ones.
pub fn ergodic_interval(protocol: Protocol, m: usize, n: usize, l: usize, eps: f64, delta: f64, gains: &GainBounds) -> Result<ErgodicInterval> {
    if !(eps > 0.0 && delta > 0.0) {
        return precondition(format!("eps and delta must be positive, got {eps}, {delta}"));
    }
    if m == 0 || n == 0 || l == 0 {
        return precondition("M, K (or Q) and L must be positive");
    }
    if !protocol.is_coop() && l != 1 {
        return precondition(format!("L = {l} is only meaningful for the cooperative protocols"));
    }
    let (mf, nf, lf) = (m as f64, n as f64, l as f64);
    let (power, crit) = match protocol {
        Protocol::P1 | Protocol::P1Coop => (3, 2.0 + delta),
        Protocol::P2 | Protocol::P2Coop => (2, 1.0 + delta),
    };
    let low_ratio = PI * PI / 16.0 * gains.big_c_lo.powi(2) / gains.csn_hi.powi(2);
    let high_ratio = PI * PI / 16.0 * gains.big_c_hi.powi(2) / gains.csn_lo.powi(2);
    let scale = lf * lf / mf.powi(power);
    Ok(ErgodicInterval {
        lower: 0.5 * log2_1p(low_ratio * nf * scale * (1.0 - eps).max(0.0)),
        upper: 0.5 * log2_1p(high_ratio * nf.max(mf.powf(crit)) * scale * (1.0 + eps)),
    })
}

/// Outcome of the P1 outage bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageBound {
    /// `x(R) >= 1`: the bound applies.
    InRegime {
        /// Deviation parameter solved from the rate.
        x: f64,
        /// Bound on the outage probability, possibly above one.
        bound: f64,
    },
    /// `x(R) < 1`: no bound is available.
    OutOfRegime {
        /// Deviation parameter solved from the rate (may be nonpositive).
        x: f64,
    },
}

impl OutageBound {
    /// Deviation parameter `x(R)`.
    pub fn x(&self) -> f64 {
        match *self {
            Self::InRegime { x, .. } | Self::OutOfRegime { x } => x,
        }
    }

    /// The bound, if in regime.
    pub fn bound(&self) -> Option<f64> {
        match *self {
            Self::InRegime { bound, .. } => Some(bound),
            Self::OutOfRegime { .. } => None,
        }
    }
}

/// `x(R)` for the P1 outage bound.
pub fn outage_x(m: usize, k: usize, rate: f64, gains: &GainBounds, sigma2: f64) -> Result<f64> {
    if m < 2 || k < 2 {
        return precondition(format!("need M >= 2 and K >= 2, got M={m}, K={k}"));
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return precondition(format!("rate must be finite and nonnegative, got {rate}"));
    }
    let (mf, kf) = (m as f64, k as f64);
    let csn2 = gains.csn_hi.powi(2);
    let e = 16.0 / (PI * PI) * csn2 / gains.big_c_lo.powi(2) * mf.powi(3) / kf * (2f64.powf(2.0 * rate) - 1.0);
    let den = 16.0 / (gains.big_c_lo * PI) * mf / kf.sqrt() + e * (3.0 / csn2 / mf.sqrt() + sigma2 / csn2 / kf.sqrt());
    Ok((1.0 - e) / den)
}

/// P1 outage bound `151 K^2 M exp(-Delta_P1 x(R)^(2/7))`, emitted only when `x(R) >= 1`.
pub fn outage_bound_p1(m: usize, k: usize, rate: f64, gains: &GainBounds, sigma2: f64) -> Result<OutageBound> {
    let x = outage_x(m, k, rate, gains, sigma2)?;
    if !(x >= 1.0) {
        return Ok(OutageBound::OutOfRegime { x });
    }
    let (mf, kf) = (m as f64, k as f64);
    Ok(OutageBound::InRegime { x, bound: 151.0 * kf * kf * mf * (-gains.delta_p1 * x.powf(2.0 / 7.0)).exp() })
}
