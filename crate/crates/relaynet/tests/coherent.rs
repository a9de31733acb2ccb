use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use relaynet::coherent::*;
use relaynet::linalg::CMatrix;
use relaynet::model::{sample_channels, ChannelRealization, NetworkConfig};
use relaynet::rng::{self, DOMAIN_SIGNAL};

const ALL: [Protocol; 4] = [Protocol::P1, Protocol::P2, Protocol::P1Coop, Protocol::P2Coop];

fn config(m: usize, k: usize, protocol: Protocol) -> NetworkConfig {
    let c = NetworkConfig::uniform(m, k, 0.05, 2.0, 9).unwrap();
    if protocol.is_coop() {
        c.with_groups(2).unwrap()
    } else {
        c
    }
}

fn signals(m: usize, k: usize, sigma2: f64, idx: u64) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let mut r = rng::stream(3, DOMAIN_SIGNAL, idx);
    let s = (0..m).map(|_| rng::complex_normal_var(&mut r, 1.0 / m as f64)).collect();
    let z = (0..k).map(|_| rng::complex_normal_var(&mut r, sigma2)).collect();
    let w = (0..m).map(|_| rng::complex_normal_var(&mut r, sigma2)).collect();
    (s, z, w)
}

#[test]
fn relay_scale_hand_values() {
    let c = NetworkConfig::uniform(2, 8, 0.01, 1.0, 0).unwrap();
    assert_relative_eq!(relay_scale_p1(&c, 3), 0.3517987724, max_relative = 1e-6);
    let c = NetworkConfig::uniform(2, 4, 0.01, 1.0, 0).unwrap();
    assert_relative_eq!(relay_scale_p2(&c, 0), 0.3517987724, max_relative = 1e-6);
    let c1 = NetworkConfig::uniform(1, 5, 0.3, 1.0, 0).unwrap();
    assert_relative_eq!(relay_scale_p1(&c1, 0), relay_scale_p2(&c1, 0), max_relative = 1e-15);
    let c4 = NetworkConfig::uniform(2, 8, 0.01, 4.0, 0).unwrap();
    assert_relative_eq!(relay_scale_p1(&c4, 0), 2.0 * 0.3517987724, max_relative = 1e-6);
    let quiet = NetworkConfig::uniform(2, 8, 1e-14, 1.0, 0).unwrap();
    assert_relative_eq!(relay_scale_p1(&quiet, 0), 1.0 / 8f64.sqrt(), max_relative = 1e-12);
}

#[test]
fn noise_only_passes_through() {
    for p in ALL {
        let c = config(2, 8, p);
        let ch = sample_channels(&c, 0);
        let zero = vec![Complex64::new(0.0, 0.0); 8];
        let w = vec![Complex64::new(0.3, -0.1), Complex64::new(-1.0, 2.0)];
        assert_eq!(run_chain(&c, &ch, &zero[..2], &zero, &w, p).unwrap(), w);
    }
}

#[test]
fn single_link_single_relay_is_doubly_coherent() {
    let c = NetworkConfig::uniform(1, 1, 0.01, 1.0, 0).unwrap();
    let ch = sample_channels(&c, 4);
    let s = [Complex64::new(0.6, -0.8)];
    let zero = [Complex64::new(0.0, 0.0)];
    let y = run_chain(&c, &ch, &s, &zero, &zero, Protocol::P1).unwrap()[0];
    let expected = s[0] * relay_scale_p1(&c, 0) * ch.h[(0, 0)].norm() * ch.f[(0, 0)].norm();
    assert_relative_eq!((y - expected).norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn chain_is_linear() {
    for p in ALL {
        let c = config(2, 8, p);
        let ch = sample_channels(&c, 1);
        let (s, z, w) = signals(2, 8, 0.05, 1);
        let a = Complex64::new(-1.5, 0.25);
        let sc = |v: &[Complex64]| v.iter().map(|x| x * a).collect::<Vec<_>>();
        let y = run_chain(&c, &ch, &s, &z, &w, p).unwrap();
        let ya = run_chain(&c, &ch, &sc(&s), &sc(&z), &sc(&w), p).unwrap();
        for (u, v) in y.iter().zip(&ya) {
            assert!((u * a - v).norm() <= 1e-12 * v.norm().max(1.0));
        }
    }
}

#[test]
fn p1_own_relays_add_real_positive_terms() {
    // With only s_m nonzero and no noise, the P1 matched sum over the relays assigned to
    // link m is real and positive before the cross-relay terms are added.
    let c = NetworkConfig::uniform(1, 6, 0.01, 1.0, 0).unwrap();
    let ch = sample_channels(&c, 2);
    let d = decompose_siso(&c, &ch, 0, Protocol::P1).unwrap();
    assert!(d.interference_gains.is_empty());
    assert!(d.effective_gain.re > 0.0 && d.effective_gain.im.abs() < 1e-14);
}

#[test]
fn sinr_matches_conditional_variance_form() {
    for p in ALL {
        for (m, k) in [(2usize, 8usize), (4, 16), (3, 12)] {
            let c = config(m, k, p);
            for t in 0..5 {
                let ch = sample_channels(&c, t);
                for link in 0..m {
                    let v = sinr(&c, &ch, link, p).unwrap().value;
                    let d = decompose_siso(&c, &ch, link, p).unwrap().conditional_sinr(c.sigma2());
                    assert_relative_eq!(v, d, max_relative = 1e-12);
                }
            }
        }
    }
}

#[test]
fn sinr_invariant_under_global_phase() {
    let rot = Complex64::from_polar(1.0, 0.7);
    for p in ALL {
        let c = config(2, 8, p);
        let ch = sample_channels(&c, 3);
        let spin = |a: &CMatrix| CMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] * rot);
        let turned = ChannelRealization { h: spin(&ch.h), f: spin(&ch.f) };
        assert_relative_eq!(sinr(&c, &ch, 1, p).unwrap().value, sinr(&c, &turned, 1, p).unwrap().value, max_relative = 1e-12);
    }
}

#[test]
fn relays_meet_the_power_budget() {
    for p in ALL {
        let c = config(2, 16, p);
        let trials = 20_000;
        let mut total = 0.0;
        for t in 0..trials {
            let ch = sample_channels(&c, t);
            let (s, z, _) = signals(2, 16, c.sigma2(), t);
            total += relay_transmit(&c, &ch, &s, &z, p).unwrap().iter().map(|x| x.norm_sqr()).sum::<f64>();
        }
        let mean = total / trials as f64;
        assert!(mean <= c.p_rel() * 1.03, "{}: {mean}", p.tag());
        if !p.is_coop() {
            assert_relative_eq!(mean, c.p_rel(), max_relative = 0.03);
        }
    }
}

#[test]
fn mutual_information_values() {
    let v = |x: f64| mutual_information(SinrValue { value: x, protocol: Protocol::P1, m: 0 });
    assert_eq!(v(0.0), 0.0);
    assert_relative_eq!(v(1.0), 0.5);
    assert_relative_eq!(v(3.0), 1.0);
}

#[test]
fn protocol_tags_round_trip() {
    for p in ALL {
        assert_eq!(p.tag().parse::<Protocol>().unwrap(), p);
    }
    assert!("P3".parse::<Protocol>().is_err());
}

#[test]
fn invalid_groupings_rejected() {
    let c = NetworkConfig::new(2, 4, 0.01, 1.0, vec![1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0], vec![1.0; 8], 0)
        .unwrap()
        .with_groups(2)
        .unwrap();
    assert!(vrelay_scale_p1(&c, 0).is_err());
    let p1 = NetworkConfig::uniform(3, 4, 0.01, 1.0, 0).unwrap();
    assert!(sinr(&p1, &sample_channels(&p1, 0), 0, Protocol::P1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn decomposition_reproduces_chain(m in 1usize..5, groups in 1usize..4, idx in 0usize..4, seed in 0u64..1000) {
        let p = ALL[idx];
        let l = if p.is_coop() { 2 } else { 1 };
        let k = m * groups * l;
        let c = NetworkConfig::uniform(m, k, 0.1, 1.5, seed).unwrap().with_groups(l).unwrap();
        let ch = sample_channels(&c, seed);
        let (s, z, w) = signals(m, k, 0.1, seed);
        let y = run_chain(&c, &ch, &s, &z, &w, p).unwrap();
        for (link, ym) in y.iter().enumerate() {
            let yd = decompose_siso(&c, &ch, link, p).unwrap().reconstruct(&s, &z, &w);
            prop_assert!((yd - ym).norm() <= 1e-10 * ym.norm().max(1e-300));
        }
    }

    #[test]
    fn sinr_nonnegative_and_finite(m in 1usize..5, mult in 1usize..6, seed in 0u64..1000) {
        let c = NetworkConfig::uniform(m, m * mult, 0.05, 1.0, seed).unwrap();
        let ch = sample_channels(&c, 0);
        for p in [Protocol::P1, Protocol::P2] {
            let v = sinr(&c, &ch, 0, p).unwrap().value;
            prop_assert!(v.is_finite() && v >= 0.0);
        }
    }
}
