//! SINR concentration intervals for P1 and P2, the refined multi-parameter P1 bound,
//! and the tail bounds of the individual sums making up the P1 SINR.

use std::f64::consts::PI;

use crate::coherent::Protocol;
use crate::error::{precondition, Error, Result};
use crate::ldp::TailBound;
use crate::model::GainBounds;

/// Interval `[lower, upper]` containing the linear SINR except with probability at most
/// `fail_prob_bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrInterval {
    /// Lower end (linear SINR).
    pub lower: f64,
    /// Upper end (linear SINR).
    pub upper: f64,
    /// Bound on the probability of falling outside, possibly above one.
    pub fail_prob_bound: f64,
    /// Deviation parameter.
    pub x: f64,
}

impl SinrInterval {
    /// `min(1, fail_prob_bound)`.
    pub fn clamped_fail_prob(&self) -> f64 {
        self.fail_prob_bound.min(1.0)
    }

    /// Whether `sinr` lies in the closed interval.
    pub fn contains(&self, sinr: f64) -> bool {
        self.lower <= sinr && sinr <= self.upper
    }
}

fn check_dims(m: usize, k: usize) -> Result<()> {
    if m < 2 || k < 2 {
        return precondition(format!("need M >= 2 and K >= 2, got M={m}, K={k}"));
    }
    Ok(())
}

fn check_x(name: &str, x: f64, min: f64) -> Result<()> {
    if !(x >= min) || !x.is_finite() {
        return precondition(format!("{name} = {x} must be finite and at least {min}"));
    }
    Ok(())
}

/// Concentration interval for P1 or P2 at deviation parameter `x >= 1`.
pub fn sinr_interval(protocol: Protocol, m: usize, k: usize, x: f64, gains: &GainBounds, sigma2: f64) -> Result<SinrInterval> {
    check_dims(m, k)?;
    check_x("x", x, 1.0)?;
    match protocol {
        Protocol::P1 => Ok(interval_p1(m, k, x, gains, sigma2)),
        Protocol::P2 => Ok(interval_p2(m, k, x, gains, sigma2)),
        other => precondition(format!("no concentration interval for protocol {}", other.tag())),
    }
}

fn interval_p1(m: usize, k: usize, x: f64, g: &GainBounds, sigma2: f64) -> SinrInterval {
    let (mf, kf) = (m as f64, k as f64);
    let csn_hi2 = g.csn_hi * g.csn_hi;
    let csn_lo2 = g.csn_lo * g.csn_lo;
    let scale = kf / mf.powi(3) * PI * PI / 16.0;

    let ln = (1.0 - 8.0 / (g.big_c_lo * PI) * mf / kf.sqrt() * x).max(0.0).powi(2);
    let ld = g.big_c_hi.powi(2) / csn_hi2
        + 3.0 / csn_hi2 * x / mf.sqrt()
        + sigma2 / csn_hi2 * (g.c_hi.powi(2) + x / kf.sqrt())
        + sigma2 / csn_hi2;
    let lower = scale * g.big_c_lo.powi(2) / csn_hi2 * ln / ld;

    let un = (1.0 + 8.0 / (g.big_c_hi * PI) * mf / kf.sqrt() * x).powi(2);
    let ud = (g.big_c_lo.powi(2) / csn_lo2 * (mf - 1.0) / mf - 3.0 / csn_lo2 * x / mf.sqrt()).max(0.0)
        + (sigma2 / csn_lo2 * (g.c_hi.powi(2) - x / kf.sqrt())).max(0.0)
        + sigma2 / csn_lo2;
    let upper = scale * g.big_c_hi.powi(2) / csn_lo2 * un / ud;

    let fail = 302.0 * kf * kf * mf * (-g.delta_p1 * x.powf(2.0 / 7.0)).exp();
    SinrInterval { lower, upper, fail_prob_bound: fail, x }
}

fn interval_p2(m: usize, k: usize, x: f64, g: &GainBounds, sigma2: f64) -> SinrInterval {
    let (mf, kf) = (m as f64, k as f64);
    let csn_hi2 = g.csn_hi * g.csn_hi;
    let csn_lo2 = g.csn_lo * g.csn_lo;
    let root_min = mf.sqrt().min(kf.sqrt());
    let ratio = (mf / kf).sqrt();

    let ln = (1.0 - 8.0 / (g.big_c_lo * PI) * ratio * x).max(0.0).powi(2);
    let ld = g.big_c_hi.powi(2) / csn_hi2
        + 4.0 / csn_hi2 * x / root_min
        + sigma2 / csn_hi2 * (g.c_hi.powi(2) + 2.0 * x / kf.sqrt())
        + sigma2 / csn_hi2;
    let lower = PI * PI / 16.0 * g.big_c_lo.powi(2) / csn_hi2 * kf / (mf * mf) * ln / ld;

    let un = (1.0 + 8.0 / (g.big_c_hi * PI) * ratio * x).powi(2);
    let ud = (g.big_c_lo.powi(2) / csn_lo2 * (mf - 1.0) / mf - 4.0 / csn_lo2 * x / root_min).max(0.0)
        + (sigma2 / csn_lo2 * (g.c_lo.powi(2) - 2.0 * x / kf.sqrt())).max(0.0)
        + sigma2 / csn_lo2;
    let upper = PI * PI / 16.0 * g.big_c_hi.powi(2) / csn_lo2 * kf / (mf * mf) * un / ud;

    let fail = 814.0 * kf * kf * mf.powi(3) * (-g.delta_p2 * x.powf(2.0 / 9.0)).exp();
    SinrInterval { lower, upper, fail_prob_bound: fail, x }
}

/// Separate deviation parameters of the refined P1 bound, one per component sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedParams {
    /// Parameter for the matched sum.
    pub x1: f64,
    /// Parameter for the cross sum.
    pub x2: f64,
    /// Parameter for the diagonal interference sum.
    pub x31: f64,
    /// Parameter for the first off-diagonal interference sum.
    pub x321: f64,
    /// Parameter for the second off-diagonal interference sum.
    pub x322: f64,
    /// Parameter for the relay-noise sum.
    pub x4: f64,
}

impl RefinedParams {
    /// All parameters equal to `x`.
    pub fn uniform(x: f64) -> Self {
        Self { x1: x, x2: x, x31: x, x321: x, x322: x, x4: x }
    }

    fn min(&self) -> f64 {
        [self.x1, self.x2, self.x31, self.x321, self.x322, self.x4].into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Refined P1 interval with its one-sided failure bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedInterval {
    /// Interval with `fail_prob_bound = 2 P^U` and `x` set to the smallest parameter.
    pub interval: SinrInterval,
    /// Bound `P^U` on each of the two one-sided events.
    pub one_sided: f64,
}

/// Refined P1 concentration interval built from per-component deviation parameters.
///
/// The two one-sided events each have probability at most `P^U`; the interval fails
/// with probability at most `2 P^U`.
pub fn sinr_interval_refined_p1(m: usize, k: usize, xs: RefinedParams, gains: &GainBounds, sigma2: f64) -> Result<RefinedInterval> {
    check_dims(m, k)?;
    if k < m {
        return precondition(format!("need K >= M, got M={m}, K={k}"));
    }
    check_x("x1", xs.x1, 0.0)?;
    check_x("x2", xs.x2, 0.0)?;
    check_x("x31", xs.x31, 0.0)?;
    check_x("x321", xs.x321, 1.0)?;
    check_x("x322", xs.x322, 1.0)?;
    check_x("x4", xs.x4, 0.0)?;
    let g = gains;
    let (mf, kf) = (m as f64, k as f64);
    let csn_hi2 = g.csn_hi * g.csn_hi;
    let csn_lo2 = g.csn_lo * g.csn_lo;
    let scale = PI * PI / 16.0 * kf / mf.powi(3);

    let one_sided = [
        ComponentTerm::S1.bound(m, k, xs.x1, g)?,
        ComponentTerm::S2.bound(m, k, xs.x2, g)?,
        ComponentTerm::S31.bound(m, k, xs.x31, g)?,
        ComponentTerm::S321.bound(m, k, xs.x321, g)?,
        ComponentTerm::S322.bound(m, k, xs.x322, g)?,
        ComponentTerm::S4.bound(m, k, xs.x4, g)?,
    ]
    .iter()
    .map(|b| b.bound)
    .sum::<f64>();

    let a1 = 4.0 / PI * (mf / kf).sqrt();
    let a2 = 4.0 / PI * (mf * (mf - 1.0) / kf).sqrt();
    let b31 = (mf - 1.0) / (mf * kf.sqrt());
    let b321 = ((kf - 1.0) * (mf - 1.0).powi(2) / (kf * mf.powi(3))).sqrt();
    let b322 = ((kf - 1.0) * (mf - 1.0) / (kf * mf.powi(3))).sqrt();
    let interference = b31 * xs.x31 + b321 * xs.x321 + b322 * xs.x322;

    let un = (1.0 + (a1 * xs.x1 + a2 * xs.x2) / g.big_c_hi).powi(2);
    let ud = (g.big_c_lo.powi(2) / csn_lo2 * (mf - 1.0) / mf - interference / csn_lo2).max(0.0)
        + sigma2 / csn_lo2 * (g.c_lo.powi(2) - xs.x4 / kf.sqrt()).max(0.0)
        + sigma2 / csn_lo2;
    let upper = scale * g.big_c_hi.powi(2) / csn_lo2 * un / ud;

    let ln = (1.0 - (a1 * xs.x1 + a2 * xs.x2) / g.big_c_lo).max(0.0).powi(2);
    let ld = g.big_c_hi.powi(2) / csn_hi2 * (mf - 1.0) / mf
        + interference / csn_hi2
        + sigma2 / csn_hi2 * (g.c_hi.powi(2) + xs.x4 / kf.sqrt())
        + sigma2 / csn_hi2;
    let lower = scale * g.big_c_lo.powi(2) / csn_hi2 * ln / ld;

    Ok(RefinedInterval {
        interval: SinrInterval { lower, upper, fail_prob_bound: 2.0 * one_sided, x: xs.min() },
        one_sided,
    })
}

/// Component sums of the P1 SINR whose tails are bounded individually.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentTerm {
    /// Matched sum over the relays assigned to the link.
    S1,
    /// Cross sum over the remaining relays.
    S2,
    /// Diagonal part of the interference.
    S31,
    /// Inner normalised sum of the off-diagonal interference.
    T32,
    /// Off-diagonal interference, relays not assigned to the interferer.
    S321,
    /// Off-diagonal interference, relays assigned to the interferer.
    S322,
    /// Relay-noise energy via the truncation technique.
    S4,
    /// Relay-noise energy via the exact Chernoff bound (unit gains).
    S4Chernoff,
    /// Second-order small-deviation form of the Chernoff bound.
    S4ChernoffSmall,
}

impl std::str::FromStr for ComponentTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "s1" => Self::S1,
            "s2" => Self::S2,
            "s31" => Self::S31,
            "t32" => Self::T32,
            "s321" => Self::S321,
            "s322" => Self::S322,
            "s4" => Self::S4,
            "s4_chernoff" | "s4-chernoff" => Self::S4Chernoff,
            "s4_chernoff_small" | "s4-chernoff-small" => Self::S4ChernoffSmall,
            other => return precondition(format!("unknown component term '{other}'")),
        })
    }
}

/// Exponent constants of the component bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentDeltas {
    /// Matched sum.
    pub d1: f64,
    /// Cross sum.
    pub d2: f64,
    /// Diagonal interference.
    pub d31: f64,
    /// Inner normalised sum.
    pub dt: f64,
    /// Off-diagonal interference.
    pub d32: f64,
    /// Relay-noise energy.
    pub d4: f64,
}

impl ComponentDeltas {
    /// Computes every exponent constant from the gain bounds.
    pub fn from_gains(g: &GainBounds) -> Self {
        let ch2 = g.big_c_hi * g.big_c_hi;
        let base = (1.0f64).min(1.0 / (2.0 * ch2));
        Self {
            d1: base,
            d2: 2f64.powf(-1.0 / 3.0) * base,
            d31: (1.0f64).min(1.0 / (8.0 * ch2 * ch2)),
            dt: 2f64.powf(-1.0 / 3.0) * base,
            d32: 2f64.powf(-10.0 / 21.0) * base,
            d4: (1.0f64).min(1.0 / (4.0 * g.c_hi.powi(4))),
        }
    }
}

impl ComponentTerm {
    /// Tail bound of this component at deviation parameter `x`.
    ///
    /// For the Chernoff forms `x` plays the role of `t` in `P{|S - K| >= sqrt(K) t}`.
    pub fn bound(self, m: usize, k: usize, x: f64, gains: &GainBounds) -> Result<TailBound> {
        component_tail_bound(self, m, k, x, gains)
    }
}

/// Tail bound of one component sum of the P1 SINR.
pub fn component_tail_bound(term: ComponentTerm, m: usize, k: usize, x: f64, gains: &GainBounds) -> Result<TailBound> {
    if m == 0 || k == 0 {
        return precondition("M and K must be positive");
    }
    let d = ComponentDeltas::from_gains(gains);
    let (mf, kf) = (m as f64, k as f64);
    let need_k2 = || if k < 2 { precondition("this bound needs K >= 2") } else { Ok(()) };
    let trunc = |pre: f64, rate: f64, power: f64, from: f64| -> Result<TailBound> {
        check_x("x", x, from)?;
        Ok(TailBound { bound: pre * (-rate * x.powf(power)).exp(), valid_from: from, exponent_rate: rate, power })
    };
    match term {
        ComponentTerm::S1 => trunc(6.0 * kf / mf, d.d1, 2.0 / 3.0, 0.0),
        ComponentTerm::S2 => trunc(8.0 * kf * (mf - 1.0) / mf, d.d2, 2.0 / 3.0, 0.0),
        ComponentTerm::S31 => {
            need_k2()?;
            trunc(6.0 * (mf - 1.0) * kf, d.d31, 2.0 / 5.0, 0.0)
        }
        ComponentTerm::T32 => {
            need_k2()?;
            trunc(8.0 * (kf - 1.0), d.dt, 2.0 / 3.0, 0.0)
        }
        ComponentTerm::S321 => {
            need_k2()?;
            trunc(64.0 * (kf - 1.0) * kf * (mf - 1.0).powi(2) / mf, d.d32, 2.0 / 7.0, 1.0)
        }
        ComponentTerm::S322 => {
            need_k2()?;
            trunc(64.0 * (kf - 1.0) * kf * (mf - 1.0) / mf, d.d32, 2.0 / 7.0, 1.0)
        }
        ComponentTerm::S4 => trunc(3.0 * kf, d.d4, 2.0 / 3.0, 0.0),
        ComponentTerm::S4Chernoff => {
            check_x("t", x, 0.0)?;
            Ok(TailBound { bound: s4_chernoff(k, x), valid_from: 0.0, exponent_rate: f64::NAN, power: f64::NAN })
        }
        ComponentTerm::S4ChernoffSmall => {
            check_x("t", x, 0.0)?;
            Ok(TailBound { bound: 2.0 * (-x * x / 2.0).exp(), valid_from: 0.0, exponent_rate: 0.5, power: 2.0 })
        }
    }
}

/// Two-sided Chernoff bound on `P{|S - K| >= sqrt(K) t}` for a sum of `K` unit exponentials.
pub fn s4_chernoff(k: usize, t: f64) -> f64 {
    let kf = k as f64;
    let u = t / kf.sqrt();
    let upper = (kf * u.ln_1p() - kf * u).exp();
    let lower = if u < 1.0 { (kf * (-u).ln_1p() + kf * u).exp() } else { 0.0 };
    upper + lower
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_constants_from, GainRange};

    #[test]
    fn chernoff_small_t_matches_closed_form() {
        let g = derive_constants_from(GainRange::UNIT, 0.01, 1.0).unwrap();
        let b = component_tail_bound(ComponentTerm::S4ChernoffSmall, 2, 4, 2.0, &g).unwrap();
        assert!((b.bound - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn refined_rejects_small_offdiagonal_parameter() {
        let g = derive_constants_from(GainRange::UNIT, 0.01, 1.0).unwrap();
        let mut xs = RefinedParams::uniform(2.0);
        xs.x321 = 0.5;
        assert!(sinr_interval_refined_p1(4, 64, xs, &g, 0.01).is_err());
    }
}
