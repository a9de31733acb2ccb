use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use relaynet::linalg::{hermitian_eigenvalues, jacobi_eigen, CMatrix};
use relaynet::poly::{monic_roots, relative_residual, solve_quartic};
use relaynet::quad::{adaptive_simpson, integrate_sqrt_endpoints, simpson_composite, trapezoid};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn coeffs_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![c(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![c(0.0, 0.0); p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            next[i] += a;
            next[i + 1] -= a * r;
        }
        p = next;
    }
    p[1..].to_vec()
}

fn matched(found: &[Complex64], expected: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; expected.len()];
    found.iter().all(|f| {
        match (0..expected.len()).filter(|&i| !used[i]).min_by(|&a, &b| (expected[a] - f).norm().total_cmp(&(expected[b] - f).norm())) {
            Some(i) if (expected[i] - f).norm() <= tol => {
                used[i] = true;
                true
            }
            _ => false,
        }
    })
}

#[test]
fn double_pair_quartic() {
    // (x^2 + 1)^2 = x^4 + 2x^2 + 1.
    let r = solve_quartic(c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
    assert!(matched(&r, &[c(0.0, 1.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, -1.0)], 1e-7));
}

#[test]
fn perturbed_coefficients_move_roots_little() {
    let roots = [c(1.0, 0.5), c(-2.0, 0.1), c(0.3, -1.7), c(3.0, 2.0)];
    let mut k = coeffs_from_roots(&roots);
    k[2] += c(1e-12, -1e-12);
    let r = monic_roots(&k).unwrap();
    assert!(matched(&r, &roots, 1e-5));
}

#[test]
fn jacobi_small_cases() {
    let id = hermitian_eigenvalues(&CMatrix::identity(5)).unwrap();
    assert!(id.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    let d = hermitian_eigenvalues(&CMatrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
    assert_eq!(d, vec![1.0, 2.0, 3.0]);
    let bad = CMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    assert!(hermitian_eigenvalues(&bad).is_err());
}

#[test]
fn eigenvectors_diagonalise() {
    let a = CMatrix::from_fn(6, 6, |i, j| c((i + j) as f64, i as f64 - j as f64) + if i == j { c(i as f64, 0.0) } else { c(0.0, 0.0) });
    let e = jacobi_eigen(&a, true).unwrap();
    let v = e.vectors.unwrap();
    let av = a.matmul(&v).unwrap();
    for j in 0..6 {
        for i in 0..6 {
            assert!((av[(i, j)] - v[(i, j)] * e.values[j]).norm() < 1e-9);
        }
    }
}

#[test]
fn quadrature_rules() {
    assert_relative_eq!(adaptive_simpson(|x| x.powi(3), 0.0, 2.0, 1e-12).unwrap(), 4.0, max_relative = 1e-12);
    let area = integrate_sqrt_endpoints(|x| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-10).unwrap();
    assert_relative_eq!(area, std::f64::consts::FRAC_PI_2, max_relative = 1e-9);
    let sing = integrate_sqrt_endpoints(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
    assert_relative_eq!(sing, 2.0, max_relative = 1e-9);
    assert_relative_eq!(simpson_composite(&|x: f64| x.exp(), 0.0, 1.0, 200), std::f64::consts::E - 1.0, max_relative = 1e-10);
    assert_relative_eq!(trapezoid(&[0.0, 1.0, 3.0], &[0.0, 1.0, 3.0]), 4.5);
}

fn random_hermitian(n: usize, vals: &[f64]) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        let k = i * n + j;
        if i == j {
            c(vals[k % vals.len()], 0.0)
        } else if i < j {
            c(vals[k % vals.len()], vals[(k + 7) % vals.len()])
        } else {
            let kk = j * n + i;
            c(vals[kk % vals.len()], -vals[(kk + 7) % vals.len()])
        }
    })
}

proptest! {
    #[test]
    fn quartic_from_random_roots(re in prop::collection::vec(-3.0f64..3.0, 4), im in prop::collection::vec(-3.0f64..3.0, 4)) {
        let roots: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
        let k = coeffs_from_roots(&roots);
        let found = solve_quartic(k[0], k[1], k[2], k[3]).unwrap();
        for r in found {
            prop_assert!(relative_residual(&k, r) <= 1e-9);
        }
        let separated = (0..4).all(|i| (0..i).all(|j| (roots[i] - roots[j]).norm() > 0.1));
        if separated {
            prop_assert!(matched(&found, &roots, 1e-7));
        }
    }

    #[test]
    fn eigenvalues_preserve_trace(n in 1usize..12, vals in prop::collection::vec(-5.0f64..5.0, 30)) {
        let a = random_hermitian(n, &vals);
        let ev = hermitian_eigenvalues(&a).unwrap();
        let tr = a.trace().re;
        prop_assert!((ev.iter().sum::<f64>() - tr).abs() <= 1e-9 * a.frobenius_norm().max(1.0));
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let fro2: f64 = ev.iter().map(|v| v * v).sum();
        prop_assert!((fro2 - a.frobenius_norm().powi(2)).abs() <= 1e-9 * fro2.max(1.0));
    }
}
