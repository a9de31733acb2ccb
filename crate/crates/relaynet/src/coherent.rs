//! Coherent matched-filter relaying: the literal P1/P2 signal chains (single relays
//! and cooperative v-relays), their SISO decompositions, and exact per-link SINR.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{relay_partition, ChannelRealization, NetworkConfig};

/// Relay processing protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Each relay serves one assigned pair and matched-filters its two hops.
    P1,
    /// Each relay matched-filters all M backward and forward channels.
    P2,
    /// P1 with L-antenna v-relays.
    P1Coop,
    /// P2 with L-antenna v-relays.
    P2Coop,
}

impl Protocol {
    /// Whether the protocol uses cooperative v-relays.
    pub fn is_coop(self) -> bool {
        matches!(self, Protocol::P1Coop | Protocol::P2Coop)
    }

    /// Short tag used in reports.
    pub fn tag(self) -> &'static str {
        match self {
            Protocol::P1 => "P1",
            Protocol::P2 => "P2",
            Protocol::P1Coop => "P1-coop",
            Protocol::P2Coop => "P2-coop",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Ok(Protocol::P1),
            "P2" => Ok(Protocol::P2),
            "P1-COOP" | "P1COOP" => Ok(Protocol::P1Coop),
            "P2-COOP" | "P2COOP" => Ok(Protocol::P2Coop),
            _ => Err(Error::Precondition(format!("unknown protocol '{s}'"))),
        }
    }
}

/// Input-output relation of link m seen as a SISO channel:
/// `y_m = g s_m + sum_{m^ != m} g_m^ s_m^ + sum_k b_k z_k + w_m`.
///
/// All gains include the protocol's normalisation, so `reconstruct` reproduces the
/// full chain output exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SisoDecomposition {
    /// Link index (0-based).
    pub m: usize,
    /// Protocol that produced the decomposition.
    pub protocol: Protocol,
    /// Coefficient of `s_m`.
    pub effective_gain: Complex64,
    /// Coefficients of `s_m^` for `m^ != m`, in increasing order of `m^`.
    pub interference_gains: Vec<Complex64>,
    /// Coefficients of the relay noise samples `z_k`.
    pub relay_noise_gains: Vec<Complex64>,
    /// Coefficient of the destination noise `w_m`.
    pub dest_noise_gain: f64,
}

impl SisoDecomposition {
    /// Evaluates `y_m` for given symbols and noise.
    pub fn reconstruct(&self, s: &[Complex64], z: &[Complex64], w: &[Complex64]) -> Complex64 {
        let mut y = self.effective_gain * s[self.m] + w[self.m] * self.dest_noise_gain;
        let others = (0..s.len()).filter(|&i| i != self.m);
        for (g, i) in self.interference_gains.iter().zip(others) {
            y += g * s[i];
        }
        for (b, zk) in self.relay_noise_gains.iter().zip(z) {
            y += b * zk;
        }
        y
    }

    /// SINR given `E|s|^2 = 1/M` and noise variance `sigma2`, by conditional variances.
    pub fn conditional_sinr(&self, sigma2: f64) -> f64 {
        let m = (self.interference_gains.len() + 1) as f64;
        let signal = self.effective_gain.norm_sqr() / m;
        let interference: f64 = self.interference_gains.iter().map(|g| g.norm_sqr()).sum::<f64>() / m;
        let relay_noise: f64 = sigma2 * self.relay_noise_gains.iter().map(|b| b.norm_sqr()).sum::<f64>();
        signal / (interference + relay_noise + sigma2 * self.dest_noise_gain.powi(2))
    }
}

/// Linear SINR of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrValue {
    /// Linear SINR, nonnegative.
    pub value: f64,
    /// Protocol.
    pub protocol: Protocol,
    /// Link index (0-based).
    pub m: usize,
}

/// `1/2 log2(1 + SINR)` in bits per channel use.
pub fn mutual_information(s: SinrValue) -> f64 {
    0.5 * s.value.max(0.0).ln_1p() / std::f64::consts::LN_2
}

/// P1 relay gain `d_P1,k` (0-based k).
pub fn relay_scale_p1(config: &NetworkConfig, k: usize) -> f64 {
    let (m, kk) = (config.m() as f64, config.k() as f64);
    let sum_e: f64 = (0..config.m()).map(|mm| config.e(k, mm)).sum();
    config.p_rel().sqrt() / ((kk / m) * sum_e + kk * config.sigma2()).sqrt()
}

/// P2 relay gain `d_P2,k` (0-based k).
pub fn relay_scale_p2(config: &NetworkConfig, k: usize) -> f64 {
    let (m, kk) = (config.m() as f64, config.k() as f64);
    let sum_e: f64 = (0..config.m()).map(|mm| config.e(k, mm)).sum();
    config.p_rel().sqrt() / (kk * sum_e + m * kk * config.sigma2()).sqrt()
}

/// Checks that energies are constant inside every v-relay group.
fn check_groups(config: &NetworkConfig) -> Result<()> {
    let l = config.l();
    for q in 0..config.q() {
        for m in 0..config.m() {
            let e0 = config.e(q * l, m);
            let p0 = config.p(m, q * l);
            for k in q * l..(q + 1) * l {
                let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
                if !same(config.e(k, m), e0) || !same(config.p(m, k), p0) {
                    return Err(Error::Precondition(format!(
                        "energies are not constant within v-relay group {q}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Cooperative P1 v-relay gain `d_P1,q` (0-based q).
pub fn vrelay_scale_p1(config: &NetworkConfig, q: usize) -> Result<f64> {
    check_groups(config)?;
    let part = relay_partition(config.q(), config.m())?;
    Ok(vrelay_p1(config, q, part[q]))
}

/// Cooperative P2 v-relay gain `d_P2,q` (0-based q).
pub fn vrelay_scale_p2(config: &NetworkConfig, q: usize) -> Result<f64> {
    check_groups(config)?;
    Ok(vrelay_p2(config, q))
}

fn vrelay_p1(config: &NetworkConfig, q: usize, pq: usize) -> f64 {
    let (m, qq, l) = (config.m() as f64, config.q() as f64, config.l() as f64);
    let k0 = q * config.l();
    let sum_e: f64 = (0..config.m()).map(|mm| config.e(k0, mm)).sum();
    let own = config.e(k0, pq);
    let inner = (qq / m) * sum_e + PI * (l - 1.0) * qq / (4.0 * m) * own + qq * config.sigma2();
    config.p_rel().sqrt() / (l * inner.sqrt())
}

fn vrelay_p2(config: &NetworkConfig, q: usize) -> f64 {
    let (m, qq, l) = (config.m() as f64, config.q() as f64, config.l() as f64);
    let k0 = q * config.l();
    let sum_e: f64 = (0..config.m()).map(|mm| config.e(k0, mm)).sum();
    let inner = qq * sum_e + PI * (l - 1.0) * qq / (4.0 * m) * sum_e + m * qq * config.sigma2();
    config.p_rel().sqrt() / (l * inner.sqrt())
}

fn unit_phase(x: Complex64) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        x / r
    }
}

fn check_dims(config: &NetworkConfig, ch: &ChannelRealization) -> Result<()> {
    let (m, k) = (config.m(), config.k());
    if ch.h.rows() != k || ch.h.cols() != m || ch.f.rows() != m || ch.f.cols() != k {
        return Err(Error::Dimension(format!(
            "channels are H {}x{}, F {}x{}; config needs H {k}x{m}, F {m}x{k}",
            ch.h.rows(),
            ch.h.cols(),
            ch.f.rows(),
            ch.f.cols()
        )));
    }
    Ok(())
}

fn check_protocol(config: &NetworkConfig, protocol: Protocol) -> Result<()> {
    match protocol {
        Protocol::P1 => relay_partition(config.k(), config.m()).map(|_| ()),
        Protocol::P2 => Ok(()),
        Protocol::P1Coop | Protocol::P2Coop => {
            check_groups(config)?;
            relay_partition(config.q(), config.m()).map(|_| ())
        }
    }
}

/// Literal composition of the two hops and the relay processing.
///
/// `r = (sqrt(E) o H) s + z`, relay transmit vector `t` per protocol, and
/// `y = (sqrt(P) o F) t + w`. This is the reference path for every other routine.
pub fn run_chain(
    config: &NetworkConfig,
    ch: &ChannelRealization,
    s: &[Complex64],
    z: &[Complex64],
    w: &[Complex64],
    protocol: Protocol,
) -> Result<Vec<Complex64>> {
    check_dims(config, ch)?;
    check_protocol(config, protocol)?;
    let (m, k) = (config.m(), config.k());
    if s.len() != m || z.len() != k || w.len() != m {
        return Err(Error::Dimension(format!(
            "need s, z, w of lengths {m}, {k}, {m}; got {}, {}, {}",
            s.len(),
            z.len(),
            w.len()
        )));
    }
    let t = relay_transmit(config, ch, s, z, protocol)?;
    Ok((0..m)
        .map(|mm| (0..k).map(|kk| ch.f[(mm, kk)] * config.p(mm, kk).sqrt() * t[kk]).sum::<Complex64>() + w[mm])
        .collect())
}

/// Unnormalised coefficient sums of link m.
struct GainSums {
    /// `A[m^] = sum a^{m,m^}` over relays (and the P2 index), all m^.
    a: Vec<Complex64>,
    /// Per-relay-antenna noise coefficients (P2: already summed over the P2 index).
    b: Vec<Complex64>,
    /// Normalisation applied to every coefficient in the SISO relation.
    norm: f64,
}

fn gain_sums(config: &NetworkConfig, ch: &ChannelRealization, m: usize, protocol: Protocol) -> Result<GainSums> {
    check_dims(config, ch)?;
    check_protocol(config, protocol)?;
    let (mm_count, k) = (config.m(), config.k());
    if m >= mm_count {
        return Err(Error::Precondition(format!("link index {m} out of range for M={mm_count}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    match protocol {
        Protocol::P1 => {
            let part = relay_partition(k, mm_count)?;
            let sk = (k as f64).sqrt();
            let mut a = vec![zero; mm_count];
            let mut b = vec![zero; k];
            for kk in 0..k {
                let pk = part[kk];
                let d = relay_scale_p1(config, kk);
                let phase = unit_phase(ch.f[(pk, kk)]).conj() * ch.f[(m, kk)] * unit_phase(ch.h[(kk, pk)]).conj();
                let cm = sk * d * config.p(m, kk).sqrt();
                for (mh, acc) in a.iter_mut().enumerate() {
                    let c = sk * d * (config.p(m, kk) * config.e(kk, mh)).sqrt();
                    *acc += c * phase * ch.h[(kk, mh)];
                }
                b[kk] = cm * phase;
            }
            Ok(GainSums { a, b, norm: 1.0 / sk })
        }
        Protocol::P2 => {
            let skm = ((k * mm_count) as f64).sqrt();
            let mut a = vec![zero; mm_count];
            let mut b = vec![zero; k];
            for kk in 0..k {
                let d = relay_scale_p2(config, kk);
                // sum over the P2 index of conj(f~_{m~,k}) conj(h~_{k,m~})
                let phi: Complex64 = (0..mm_count)
                    .map(|mt| unit_phase(ch.f[(mt, kk)]).conj() * unit_phase(ch.h[(kk, mt)]).conj())
                    .sum();
                let common = phi * ch.f[(m, kk)];
                for (mh, acc) in a.iter_mut().enumerate() {
                    let c = skm * d * (config.p(m, kk) * config.e(kk, mh)).sqrt();
                    *acc += c * common * ch.h[(kk, mh)];
                }
                b[kk] = skm * d * config.p(m, kk).sqrt() * common;
            }
            Ok(GainSums { a, b, norm: 1.0 / skm })
        }
        Protocol::P1Coop => {
            let l = config.l();
            let part = relay_partition(config.q(), mm_count)?;
            let sq = (config.q() as f64).sqrt();
            let mut a = vec![zero; mm_count];
            let mut b = vec![zero; k];
            for q in 0..config.q() {
                let pq = part[q];
                let d = vrelay_p1(config, q, part[q]);
                let k0 = q * l;
                let ff: Complex64 = (k0..k0 + l).map(|kk| unit_phase(ch.f[(pq, kk)]).conj() * ch.f[(m, kk)]).sum();
                for (mh, acc) in a.iter_mut().enumerate() {
                    let hh: Complex64 =
                        (k0..k0 + l).map(|kk| unit_phase(ch.h[(kk, pq)]).conj() * ch.h[(kk, mh)]).sum();
                    let c = sq * d * (config.p(m, k0) * config.e(k0, mh)).sqrt();
                    *acc += c * ff * hh;
                }
                let cm = sq * d * config.p(m, k0).sqrt();
                for kk in k0..k0 + l {
                    b[kk] = cm * ff * unit_phase(ch.h[(kk, pq)]).conj();
                }
            }
            Ok(GainSums { a, b, norm: 1.0 / sq })
        }
        Protocol::P2Coop => {
            let l = config.l();
            let sqm = ((config.q() * mm_count) as f64).sqrt();
            let mut a = vec![zero; mm_count];
            let mut b = vec![zero; k];
            for q in 0..config.q() {
                let d = vrelay_p2(config, q);
                let k0 = q * l;
                let ff: Vec<Complex64> = (0..mm_count)
                    .map(|mt| (k0..k0 + l).map(|kk| unit_phase(ch.f[(mt, kk)]).conj() * ch.f[(m, kk)]).sum())
                    .collect();
                for (mh, acc) in a.iter_mut().enumerate() {
                    let c = sqm * d * (config.p(m, k0) * config.e(k0, mh)).sqrt();
                    for (mt, f_mt) in ff.iter().enumerate() {
                        let hh: Complex64 =
                            (k0..k0 + l).map(|kk| unit_phase(ch.h[(kk, mt)]).conj() * ch.h[(kk, mh)]).sum();
                        *acc += c * f_mt * hh;
                    }
                }
                let cm = sqm * d * config.p(m, k0).sqrt();
                for kk in k0..k0 + l {
                    b[kk] = cm * (0..mm_count).map(|mt| ff[mt] * unit_phase(ch.h[(kk, mt)]).conj()).sum::<Complex64>();
                }
            }
            Ok(GainSums { a, b, norm: 1.0 / sqm })
        }
    }
}

/// Closed-form SISO coefficients of link `m` (0-based).
pub fn decompose_siso(
    config: &NetworkConfig,
    ch: &ChannelRealization,
    m: usize,
    protocol: Protocol,
) -> Result<SisoDecomposition> {
    let g = gain_sums(config, ch, m, protocol)?;
    Ok(SisoDecomposition {
        m,
        protocol,
        effective_gain: g.a[m] * g.norm,
        interference_gains: g.a.iter().enumerate().filter(|(i, _)| *i != m).map(|(_, x)| x * g.norm).collect(),
        relay_noise_gains: g.b.iter().map(|x| x * g.norm).collect(),
        dest_noise_gain: 1.0,
    })
}

/// Exact SINR of link `m` for one channel realization.
///
/// P1 and P2 evaluate the closed-form ratio of coefficient sums; the cooperative
/// protocols use the conditional-variance SINR of their SISO decomposition.
pub fn sinr(config: &NetworkConfig, ch: &ChannelRealization, m: usize, protocol: Protocol) -> Result<SinrValue> {
    let g = gain_sums(config, ch, m, protocol)?;
    let (mf, kf, s2) = (config.m() as f64, config.k() as f64, config.sigma2());
    let signal = g.a[m].norm_sqr();
    let interference: f64 = g.a.iter().enumerate().filter(|(i, _)| *i != m).map(|(_, x)| x.norm_sqr()).sum();
    let noise: f64 = g.b.iter().map(|x| x.norm_sqr()).sum();
    let value = match protocol {
        Protocol::P1 => signal / (interference + s2 * mf * noise + kf * mf * s2),
        Protocol::P2 => signal / (interference + s2 * mf * noise + kf * mf * mf * s2),
        Protocol::P1Coop | Protocol::P2Coop => {
            // |g|^2/M / (sum|g_int|^2/M + sigma2 sum|b|^2 + sigma2) with g = norm * A.
            let n2 = g.norm * g.norm;
            (n2 * signal / mf) / (n2 * interference / mf + s2 * n2 * noise + s2)
        }
    };
    Ok(SinrValue { value, protocol, m })
}

/// Relay transmit vector `t` for given symbols and relay noise.
pub fn relay_transmit(
    config: &NetworkConfig,
    ch: &ChannelRealization,
    s: &[Complex64],
    z: &[Complex64],
    protocol: Protocol,
) -> Result<Vec<Complex64>> {
    check_dims(config, ch)?;
    check_protocol(config, protocol)?;
    let (m, k) = (config.m(), config.k());
    if s.len() != m || z.len() != k {
        return Err(Error::Dimension(format!(
            "need s, z of lengths {m}, {k}; got {}, {}",
            s.len(),
            z.len()
        )));
    }
    let r: Vec<Complex64> = (0..k)
        .map(|kk| (0..m).map(|mm| ch.h[(kk, mm)] * config.e(kk, mm).sqrt() * s[mm]).sum::<Complex64>() + z[kk])
        .collect();
    relay_stage(config, ch, &r, protocol)
}

fn relay_stage(config: &NetworkConfig, ch: &ChannelRealization, r: &[Complex64], protocol: Protocol) -> Result<Vec<Complex64>> {
    let (m, k) = (config.m(), config.k());
    Ok(match protocol {
        Protocol::P1 => {
            let part = relay_partition(k, m)?;
            (0..k)
                .map(|kk| {
                    let pk = part[kk];
                    let u = relay_scale_p1(config, kk) * unit_phase(ch.h[(kk, pk)]).conj() * r[kk];
                    unit_phase(ch.f[(pk, kk)]).conj() * u
                })
                .collect()
        }
        Protocol::P2 => (0..k)
            .map(|kk| {
                let mf: Complex64 = (0..m)
                    .map(|mm| unit_phase(ch.h[(kk, mm)]).conj() * unit_phase(ch.f[(mm, kk)]).conj())
                    .sum();
                relay_scale_p2(config, kk) * mf * r[kk]
            })
            .collect(),
        Protocol::P1Coop => {
            let l = config.l();
            let part = relay_partition(config.q(), m)?;
            let mut t = vec![Complex64::new(0.0, 0.0); k];
            for q in 0..config.q() {
                let pq = part[q];
                let d = vrelay_p1(config, q, part[q]);
                let u: Complex64 =
                    (q * l..(q + 1) * l).map(|kk| unit_phase(ch.h[(kk, pq)]).conj() * r[kk]).sum();
                for kk in q * l..(q + 1) * l {
                    t[kk] = d * unit_phase(ch.f[(pq, kk)]).conj() * u;
                }
            }
            t
        }
        Protocol::P2Coop => {
            let l = config.l();
            let mut t = vec![Complex64::new(0.0, 0.0); k];
            for q in 0..config.q() {
                let d = vrelay_p2(config, q);
                let u: Vec<Complex64> = (0..m)
                    .map(|mm| (q * l..(q + 1) * l).map(|kk| unit_phase(ch.h[(kk, mm)]).conj() * r[kk]).sum())
                    .collect();
                for kk in q * l..(q + 1) * l {
                    t[kk] = d * (0..m).map(|mm| unit_phase(ch.f[(mm, kk)]).conj() * u[mm]).sum::<Complex64>();
                }
            }
            t
        }
    })
}
