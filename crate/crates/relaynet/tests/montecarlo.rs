use approx::assert_relative_eq;
use relaynet::af::{capacity_beta, support_upper_bound, AfParams};
use relaynet::coherent::Protocol;
use relaynet::model::NetworkConfig;
use relaynet::montecarlo::*;

fn desk(m: usize, k: usize) -> NetworkConfig {
    NetworkConfig::uniform(m, k, 0.01, 1.0, 21).unwrap()
}

#[test]
fn empirical_cdf_basics() {
    let e = EmpiricalCdf::new(vec![4.0, 1.0, 3.0, 2.0], 9).unwrap();
    assert_eq!(e.samples(), &[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(e.trials(), 4);
    assert_eq!(e.seed(), 9);
    assert_eq!(e.eval(2.5), 0.5);
    assert_relative_eq!(e.mean(), 2.5);
    assert!(EmpiricalCdf::new(vec![1.0, f64::NAN], 0).is_err());
    let (m, se) = mean_stderr(&[2.0; 10]);
    assert_eq!((m, se), (2.0, 0.0));
}

#[test]
fn sinr_samples_are_reproducible_and_schedule_independent() {
    let c = desk(3, 27);
    let a = sinr_samples(&c, Protocol::P1, 200).unwrap();
    let b = sinr_samples(&c, Protocol::P1, 200).unwrap();
    assert_eq!(a, b);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c1 = single.install(|| sinr_samples(&c, Protocol::P1, 200).unwrap());
    assert_eq!(a, c1);
    let e1 = single.install(|| esd_samples(Ensemble::Product, 20, 10, 1.0, 4, 3).unwrap());
    let e4 = esd_samples(Ensemble::Product, 20, 10, 1.0, 4, 3).unwrap();
    assert_eq!(e1.samples(), e4.samples());
}

#[test]
fn cdf_rejects_too_few_trials() {
    assert!(sinr_cdf(&desk(2, 8), Protocol::P1, 999).is_err());
}

#[test]
fn outage_extremes() {
    let c = desk(4, 64);
    assert_eq!(outage_estimate(&c, Protocol::P1, 0.0, 1000).unwrap().0, 0.0);
    assert_eq!(outage_estimate(&c, Protocol::P1, 50.0, 1000).unwrap().0, 1.0);
}

#[test]
fn ergodic_rate_grows_with_k() {
    let mut prev = 0.0;
    for k in [8usize, 32, 128, 512] {
        let (v, se) = ergodic_estimate(&desk(4, k), Protocol::P1, 1000).unwrap();
        assert!(v > prev + 3.0 * se, "K={k}");
        prev = v;
    }
}

#[test]
fn p2_spread_comparable_to_p1() {
    let a = sinr_cdf(&desk(6, 216), Protocol::P1, 2000).unwrap();
    let b = sinr_cdf(&desk(6, 36), Protocol::P2, 2000).unwrap();
    let ra = a.std_dev() / a.median();
    let rb = b.std_dev() / b.median();
    assert!(ra / rb < 1.5 && rb / ra < 1.5, "{ra} vs {rb}");
}

#[test]
fn moment_estimates_are_positive() {
    let m = moment_estimate(&desk(2, 8), Protocol::P2, 1, 2000).unwrap();
    assert!(m.f_bar > 0.0 && m.var_f_tilde > 0.0 && m.var_w > 0.0);
}

#[test]
fn product_eigenvalues_are_psd_and_bounded() {
    let xmax = support_upper_bound(&AfParams::new(0.5, 1.0, 0.01).unwrap());
    let v = product_eigenvalues(500, 250, 1.0, 0, 5).unwrap();
    assert_eq!(v.len(), 250);
    assert!(v.iter().all(|&x| x >= -1e-10));
    assert!(*v.last().unwrap() <= xmax * 1.05);
    let wide = product_eigenvalues(20, 60, 1.0, 1, 5).unwrap();
    assert_eq!(wide.len(), 60);
    assert_eq!(wide.iter().filter(|&&x| x == 0.0).count(), 40);
}

#[test]
fn both_gram_routes_give_valid_spectra() {
    for (m, k) in [(6usize, 3usize), (3, 6)] {
        let v = product_eigenvalues(m, k, 1.3, 2, 8).unwrap();
        let t = t_eigenvalues(m, k, 1.3, 2, 8).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(t.iter().all(|&x| (-1e-12..1.0).contains(&x)));
    }
}

#[test]
fn af_capacity_estimates() {
    let (lo, _) = af_capacity_mc(20, 10, 1.0, 1e9, 10, 1).unwrap();
    assert!(lo < 1e-8);
    assert!(af_capacity_mc(20, 10, 1.0, 0.01, 9, 1).is_err());
    let (mc, se) = af_capacity_mc(200, 100, 1.0, 0.01, 12, 4).unwrap();
    let c = capacity_beta(&AfParams::new(0.5, 1.0, 0.01).unwrap()).unwrap();
    assert!(((mc - c) / c).abs() <= 0.03, "{mc} +/- {se} vs {c}");
}

#[test]
fn ks_distance_cases() {
    let e = EmpiricalCdf::new(vec![0.1, 0.2, 0.2, 0.9], 0).unwrap();
    assert_eq!(ks_distance(&e, |x| e.eval(x)), 0.0);
    let one = EmpiricalCdf::new(vec![0.5], 0).unwrap();
    assert_relative_eq!(ks_distance(&one, |x: f64| x.clamp(0.0, 1.0)), 0.5);
    // Uniform draws against the uniform CDF.
    use rand::Rng;
    let mut r = relaynet::rng::stream(1, 99, 0);
    let u: Vec<f64> = (0..10_000).map(|_| r.random::<f64>()).collect();
    let e = EmpiricalCdf::new(u, 1).unwrap();
    assert!(ks_distance(&e, |x: f64| x.clamp(0.0, 1.0)) <= 0.02);
}

#[test]
fn ks_handles_atoms() {
    let mut v = vec![0.0; 500];
    v.extend((0..500).map(|i| (i as f64 + 0.5) / 500.0));
    let e = EmpiricalCdf::new(v, 0).unwrap();
    let model = |x: f64| if x < 0.0 { 0.0 } else { 0.5 + 0.5 * x.min(1.0) };
    assert!(ks_distance(&e, model) < 0.01);
}
