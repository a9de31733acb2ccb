use approx::assert_relative_eq;
use proptest::prelude::*;
use relaynet::model::*;

#[test]
fn unit_gain_constants() {
    let g = derive_constants(&NetworkConfig::uniform(4, 16, 0.01, 1.0, 0).unwrap()).unwrap();
    assert_relative_eq!(g.big_c_hi.powi(2), 1.0 / 1.01, max_relative = 1e-14);
    assert_relative_eq!(g.big_c_lo, g.big_c_hi);
    assert_relative_eq!(g.csn_hi.powi(2), 1.01, max_relative = 1e-14);
    assert_relative_eq!(g.delta_p1, 0.1275125, max_relative = 1e-6);
    assert!(g.delta_p2 > 0.0);
}

#[test]
fn signal_plus_noise_identity() {
    let range = GainRange { e_lo: 0.3, e_hi: 2.0, p_lo: 0.5, p_hi: 1.5 };
    let g = derive_constants_from(range, 0.2, 3.0).unwrap();
    assert_relative_eq!(g.csn_hi.powi(2), g.big_c_hi.powi(2) + 0.2 * (g.c_hi.powi(2) + 1.0), max_relative = 1e-14);
    assert!(g.big_c_lo <= g.big_c_hi && g.c_lo <= g.c_hi && g.csn_lo <= g.csn_hi);
}

#[test]
fn degenerate_ranges_rejected() {
    let zero = GainRange { e_lo: 0.0, e_hi: 1.0, p_lo: 1.0, p_hi: 1.0 };
    assert!(derive_constants_from(zero, 0.01, 1.0).is_err());
    let inverted = GainRange { e_lo: 2.0, e_hi: 1.0, p_lo: 1.0, p_hi: 1.0 };
    assert!(derive_constants_from(inverted, 0.01, 1.0).is_err());
    assert!(NetworkConfig::uniform(0, 4, 0.01, 1.0, 0).is_err());
    assert!(NetworkConfig::uniform(2, 4, 0.0, 1.0, 0).is_err());
    assert!(NetworkConfig::uniform(2, 4, 0.01, -1.0, 0).is_err());
    assert!(NetworkConfig::uniform(2, 6, 0.01, 1.0, 0).unwrap().with_groups(2).is_err());
    assert!(NetworkConfig::uniform(2, 8, 0.01, 1.0, 0).unwrap().with_groups(3).is_err());
}

#[test]
fn gain_override_must_contain_energies() {
    let c = NetworkConfig::constant(2, 4, 0.01, 1.0, 2.0, 1.0, 0).unwrap();
    let wide = GainRange { e_lo: 1.0, e_hi: 3.0, p_lo: 0.5, p_hi: 1.0 };
    assert_eq!(c.clone().with_gain_range(wide).unwrap().gain_range(), wide);
    assert!(c.with_gain_range(GainRange::UNIT).is_err());
}

#[test]
fn partition_examples() {
    assert_eq!(relay_partition(6, 2).unwrap(), vec![0, 0, 0, 1, 1, 1]);
    assert_eq!(relay_partition(5, 5).unwrap(), vec![0, 1, 2, 3, 4]);
    let p = relay_partition(12, 3).unwrap();
    for m in 0..3 {
        assert_eq!(p.iter().filter(|&&x| x == m).count(), 4);
    }
    assert!(relay_partition(7, 2).is_err());
}

#[test]
fn channels_are_reproducible() {
    let c = NetworkConfig::uniform(3, 6, 0.01, 1.0, 42).unwrap();
    assert_eq!(sample_channels(&c, 0), sample_channels(&c, 0));
    assert_ne!(sample_channels(&c, 0), sample_channels(&c, 1));
    assert_ne!(sample_channels(&c, 0), sample_channels(&c.clone().with_seed(43), 0));
    let one = sample_channels(&NetworkConfig::uniform(1, 1, 0.01, 1.0, 0).unwrap(), 0);
    assert_eq!((one.h.rows(), one.h.cols(), one.f.rows(), one.f.cols()), (1, 1, 1, 1));
}

#[test]
fn channel_moments() {
    let c = NetworkConfig::uniform(10, 100, 0.01, 1.0, 5).unwrap();
    let mut power = Vec::new();
    let mut mean = num_complex::Complex64::new(0.0, 0.0);
    for s in 0..500 {
        let ch = sample_channels(&c, s);
        for v in ch.h.as_slice().iter().chain(ch.f.as_slice()) {
            power.push(v.norm_sqr());
            mean += v;
        }
    }
    let n = power.len() as f64;
    let p = power.iter().sum::<f64>() / n;
    // |h|^2 is unit exponential, so its standard deviation is one.
    assert!((p - 1.0).abs() < 3.0 / n.sqrt(), "E|h|^2 = {p}");
    assert!((mean / n).norm() < 3.0 * (1.0 / n).sqrt());
}

proptest! {
    #[test]
    fn partition_has_equal_contiguous_fibers(m in 1usize..20, mult in 1usize..20) {
        let k = m * mult;
        let p = relay_partition(k, m).unwrap();
        prop_assert!(p.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1));
        prop_assert_eq!(p[0], 0);
        prop_assert_eq!(p[k - 1], m - 1);
        for j in 0..m {
            prop_assert_eq!(p.iter().filter(|&&x| x == j).count(), mult);
        }
    }

    #[test]
    fn constants_monotone_in_range(e_lo in 0.1f64..1.0, e_hi in 1.0f64..3.0, p_lo in 0.1f64..1.0, p_hi in 1.0f64..3.0,
                                   shrink in 0.1f64..1.0, grow in 1.0f64..2.0, s2 in 0.001f64..1.0) {
        let inner = derive_constants_from(GainRange { e_lo, e_hi, p_lo, p_hi }, s2, 1.0).unwrap();
        let outer = derive_constants_from(GainRange { e_lo: e_lo * shrink, e_hi: e_hi * grow, p_lo: p_lo * shrink, p_hi: p_hi * grow }, s2, 1.0).unwrap();
        prop_assert!(outer.big_c_lo <= inner.big_c_lo + 1e-15);
        prop_assert!(outer.big_c_hi >= inner.big_c_hi - 1e-15);
        prop_assert!(outer.c_lo <= inner.c_lo + 1e-15 && outer.c_hi >= inner.c_hi - 1e-15);
    }
}
