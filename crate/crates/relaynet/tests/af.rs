use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use relaynet::af::*;
use relaynet::quad::simpson_composite;

fn params(beta: f64) -> AfParams {
    AfParams::new(beta, 1.0, 0.01).unwrap()
}

#[test]
fn mp_edges_and_mass() {
    let p = params(2.0);
    let (g1, g2) = p.gammas();
    assert_relative_eq!(g1, 0.0857864376, max_relative = 1e-9);
    assert_relative_eq!(g2, 2.9142135624, max_relative = 1e-9);
    let (g1, g2) = params(1.0).gammas();
    assert_eq!(g1, 0.0);
    assert_relative_eq!(g2, 4.0);
    for beta in [0.3, 0.5, 1.0, 2.0, 5.0] {
        let c = mp_density(&params(beta), 4000).unwrap();
        assert!(c.is_sane(1e-3), "beta={beta}: mass {}", c.mass());
        assert_relative_eq!(c.atom_at_zero, (1.0 - beta).max(0.0));
    }
}

#[test]
fn t_density_support_and_atom() {
    let (e1, e2) = params(1.0).etas();
    assert_eq!(e1, 0.0);
    assert_relative_eq!(e2, 0.8, max_relative = 1e-15);
    let c = ft_density(&params(2.0), 4000).unwrap();
    assert_relative_eq!(c.atom_at_zero, 0.5);
    for beta in [0.5, 1.0, 2.0, 3.0] {
        assert!(ft_density(&params(beta), 4000).unwrap().is_sane(1e-3));
    }
}

#[test]
fn from_power_scale() {
    let p = AfParams::from_power(2.0, 4.0, 1.0).unwrap();
    assert_relative_eq!(p.d(), 2f64.sqrt(), max_relative = 1e-15);
    assert!(AfParams::new(0.0, 1.0, 1.0).is_err());
    assert!(AfParams::from_power(1.0, -1.0, 1.0).is_err());
}

#[test]
fn quartic_coefficients_at_i() {
    let k = quartic_coeffs(Complex64::new(0.0, 1.0), &params(1.0)).unwrap();
    let expect = [Complex64::new(2.0, 0.0), Complex64::new(1.0, -1.0), Complex64::new(1.0, -2.0), Complex64::new(-1.0, 0.0)];
    for (a, b) in k.iter().zip(expect) {
        assert!((a - b).norm() < 1e-15);
    }
    assert!(quartic_coeffs(Complex64::new(1.0, 0.0), &params(1.0)).is_err());
}

#[test]
fn quartic_tends_to_quadratic() {
    // Dividing by beta and letting beta grow leaves z G^2 + z c G + c with c = 1 + 1/d^2.
    let z = Complex64::new(0.4, 0.3);
    let d = 1.5;
    let c = 1.0 + 1.0 / (d * d);
    let beta = 1e9;
    let k = quartic_coeffs(z, &AfParams::new(beta, d, 0.01).unwrap()).unwrap();
    let scaled = [k[0] / beta, k[1] / beta, k[2] / beta, k[3] / beta];
    assert!((scaled[0] + 1.0 / z).norm() < 1e-6);
    assert!((scaled[1] + c / z).norm() < 1e-6);
    assert!((scaled[2] + c / (z * z)).norm() < 1e-6);
    let g = g_hat_limit(z, d);
    assert!((z * g * g + z * c * g + c).norm() < 1e-12);
    assert!(g.im > 0.0);
}

#[test]
fn chi_constant() {
    assert!((chi_a1(4.0) - 0.375).abs() <= 1e-12);
    assert_eq!(chi_a1(1.0), 0.0);
}

#[test]
fn selected_root_beats_the_alternatives() {
    let p = params(2.0);
    let xmax = support_upper_bound(&p);
    for i in 1..40 {
        let z = Complex64::new(xmax * i as f64 / 40.0, 1e-3);
        let s = stieltjes_g(z, &p).unwrap();
        assert!(s.residual <= FIXED_POINT_TOL && s.quartic_residual <= QUARTIC_TOL);
        assert!(s.g_hat.im > 0.0);
        assert!(s.runner_up_residual >= 10.0 * s.residual.max(1e-15), "x={}: {} vs {}", z.re, s.runner_up_residual, s.residual);
    }
}

#[test]
fn large_beta_matches_quadratic_limit() {
    let p = AfParams::new(1e4, 1.0, 0.01).unwrap();
    for x in [0.2, 0.7, 1.5, 1.9] {
        let z = Complex64::new(x, 0.01);
        let s = stieltjes_g(z, &p).unwrap();
        assert!((s.g_hat - g_hat_limit(z, 1.0)).norm() < 1e-3, "x={x}");
    }
}

#[test]
fn support_bound_values() {
    assert_relative_eq!(support_upper_bound(&params(1.0)), 3.2, max_relative = 1e-14);
    let far = AfParams::new(4.0, 1e6, 0.01).unwrap();
    assert_relative_eq!(support_upper_bound(&far), 9.0, max_relative = 1e-9);
}

#[test]
fn limiting_densities_are_normalised() {
    for beta in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let c = limiting_density_default(&params(beta), 2000).unwrap();
        assert!(c.is_sane(1e-3), "beta={beta}: mass {}", c.mass());
        if beta > 1.0 {
            assert_relative_eq!(c.mass() - c.atom_at_zero, 1.0 / beta, max_relative = 1e-3);
        }
    }
}

#[test]
fn density_grid_must_lie_in_support() {
    let p = params(0.5);
    let xmax = support_upper_bound(&p);
    assert!(limiting_density(&p, 1e-6, &[0.5 * xmax, 2.0 * xmax]).is_err());
    assert!(limiting_density(&p, 0.0, &[0.5 * xmax]).is_err());
    assert!(limiting_density(&p, 1e-6, &[]).is_err());
}

#[test]
fn capacity_reference_values() {
    assert_relative_eq!(capacity_beta(&params(0.5)).unwrap(), 1.3468328, max_relative = 1e-5);
    assert_relative_eq!(capacity_beta(&params(1.0)).unwrap(), 1.9369834, max_relative = 1e-4);
    assert_relative_eq!(capacity_infty(1.0, 0.01).unwrap(), 2.2975649, max_relative = 1e-7);
}

#[test]
fn capacity_monotone_and_converging() {
    let mut prev = 0.0;
    for beta in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let c = capacity_beta(&params(beta)).unwrap();
        assert!(c >= prev);
        prev = c;
    }
    let inf = capacity_infty(1.0, 0.01).unwrap();
    let c3 = capacity_beta(&params(1e3)).unwrap();
    let c4 = capacity_beta(&params(1e4)).unwrap();
    assert!(c3 <= c4 + 1e-2 && c4 <= inf + 1e-2);
    assert!((c4 - inf).abs() <= 1e-2);
    assert!(capacity_beta(&params(50.0)).unwrap() >= 0.95 * inf);
}

#[test]
fn infinite_capacity_by_second_rule() {
    // u = 4 sin^2(theta) removes both endpoint singularities.
    let snr: f64 = 50.0;
    let smooth = |th: f64| 8.0 * th.cos().powi(2) * (1.0 + snr * 4.0 * th.sin().powi(2)).log2();
    let v = simpson_composite(&smooth, 0.0, std::f64::consts::FRAC_PI_2, 4000) / (4.0 * std::f64::consts::PI);
    assert_relative_eq!(capacity_infty(1.0, 0.01).unwrap(), v, max_relative = 1e-6);
    assert!(capacity_infty(2.0, 0.01).unwrap() > capacity_infty(1.0, 0.01).unwrap());
    assert!(capacity_infty(1.0, 1e9).unwrap() < 1e-7);
}

#[test]
fn infinite_limit_density() {
    assert_eq!(limit_density_infty(2.5, 1.0), 0.0);
    assert_eq!(limit_density_infty(-1.0, 1.0), 0.0);
    let grid: Vec<f64> = (1..=20000).map(|i| 2.0 * i as f64 / 20000.0).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| limit_density_infty(x, 1.0)).collect();
    let mass = relaynet::quad::integrate_sqrt_endpoints(|x| limit_density_infty(x, 1.0), 0.0, 2.0, 1e-10).unwrap();
    assert_relative_eq!(mass, 1.0, max_relative = 1e-3);
    assert!(vals.iter().all(|v| *v >= 0.0));
}

#[test]
fn curve_cdf_is_monotone_and_ends_at_mass() {
    let c = ft_density(&params(2.0), 1000).unwrap();
    assert_eq!(c.cdf(-1.0), 0.0);
    assert_relative_eq!(c.cdf(0.0), 0.5);
    let mut prev = 0.0;
    for i in 0..200 {
        let v = c.cdf(i as f64 / 199.0);
        assert!(v >= prev - 1e-15);
        prev = v;
    }
    assert_relative_eq!(c.cdf(2.0), c.mass(), max_relative = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn fixed_point_solved_across_half_plane(beta in 0.1f64..20.0, d in 0.3f64..3.0, x in 0.0f64..1.2, ly in -4.0f64..0.0) {
        let p = AfParams::new(beta, d, 0.01).unwrap();
        let z = Complex64::new(x * support_upper_bound(&p), 10f64.powf(ly));
        let s = stieltjes_g(z, &p).unwrap();
        prop_assert!(s.residual <= FIXED_POINT_TOL);
        prop_assert!(s.quartic_residual <= QUARTIC_TOL);
        prop_assert!(s.g_hat.im > 0.0);
    }

    #[test]
    fn conjugate_points_give_conjugate_coefficients(beta in 0.1f64..20.0, x in -3.0f64..3.0, y in 0.001f64..2.0) {
        let p = params(beta);
        let a = quartic_coeffs(Complex64::new(x, y), &p).unwrap();
        // Coefficients are rational in z with real parameters, so they map through conjugation.
        let b3 = (2.0 * Complex64::new(x, -y) - beta + 1.0) / Complex64::new(x, -y);
        prop_assert!((a[0].conj() - b3).norm() <= 1e-12 * b3.norm().max(1.0));
    }
}
