use approx::assert_relative_eq;
use fermionic_core::kernel::{KernelFamily, LambdaTable};
use fermionic_core::poly::{homogeneous_exponents, sphere_area, sphere_moment};
use fermionic_core::quad::{build_ball_rule, build_sphere_rule, gauss_gegenbauer, integrate_surface};
use fermionic_core::spaces::{build_monogenic_basis, build_zonal_kernel, monogenic_dimension, random_x_field};
use fermionic_core::VariableGroup::X;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[test]
fn sphere_areas() {
    assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
    assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
    assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
    assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-14);
}

#[test]
fn moments_satisfy_the_norm_recursion() {
    // Σ_i ∫ u^{α + 2e_i} = ∫ u^α on the unit sphere
    for m in 3..=5 {
        for d in 0..=4 {
            for alpha in homogeneous_exponents(m, d) {
                let lifted: f64 = (0..m)
                    .map(|i| {
                        let mut a = alpha.clone();
                        a[i] += 2;
                        sphere_moment(m, &a)
                    })
                    .sum();
                assert_relative_eq!(lifted, sphere_moment(m, &alpha), epsilon = 1e-13, max_relative = 1e-12);
            }
        }
    }
}

#[test]
fn moments_match_quadrature() {
    let rule = build_sphere_rule(4, 16, &[0.0; 4], 1.0).unwrap();
    for alpha in homogeneous_exponents(4, 6) {
        let q = integrate_surface(&rule, |n| Ok(n.point.iter().zip(&alpha).map(|(x, &a)| x.powi(a as i32)).product::<f64>()))
            .unwrap();
        assert_relative_eq!(q, sphere_moment(4, &alpha), epsilon = 1e-13);
    }
}

#[test]
fn gegenbauer_weights_sum_to_the_weight_integral() {
    // ∫_{-1}^{1} (1 - t^2)^{1/2} dt = π/2
    let (_, w) = gauss_gegenbauer(8, 0.5);
    assert_relative_eq!(w.iter().sum::<f64>(), PI / 2.0, max_relative = 1e-13);
}

#[test]
fn dirac_squares_to_minus_laplacian() {
    let basis = build_monogenic_basis(4, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_x_field(&basis, 4, false, &mut rng);
    let lhs = f.dirac_left(X).dirac_left(X);
    assert!(lhs.add(&f.laplacian(X)).max_abs_coeff() < 1e-11);
}

#[test]
fn dimensions_of_monogenic_spaces() {
    for (m, k) in [(3, 0), (3, 1), (3, 2), (4, 1), (4, 2), (5, 1)] {
        let b = build_monogenic_basis(m, k).unwrap();
        assert_eq!(b.dim(), monogenic_dimension(m, k));
    }
}

#[test]
fn zonal_kernel_reproduces() {
    let z = build_zonal_kernel(3, 2).unwrap();
    let basis = build_monogenic_basis(3, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let f = basis.random_element(&mut rng);
        assert!(z.reproducing_error(&f).unwrap() < 1e-10);
    }
}

#[test]
fn ball_volume() {
    let rule = build_ball_rule(5, 8, &[0.1, 0.0, 0.0, 0.0, 0.0], 0.7).unwrap();
    let vol = fermionic_core::quad::integrate_volume(&rule, |_| Ok(1.0)).unwrap();
    assert_relative_eq!(vol, sphere_area(5) * 0.7f64.powi(5) / 5.0, max_relative = 1e-13);
}

#[test]
fn kernels_have_the_expected_homogeneity() {
    let fam = KernelFamily::build(3, 1).unwrap();
    let mut table = LambdaTable::default();
    fermionic_core::kernel::calibrate_lambda(&fam, 2, &mut table).unwrap();
    for j in 1..=2 {
        let e = fam.calibrated_kernel(j, &[0.1, 0.2, -0.1], &table).unwrap();
        assert_eq!(e.homogeneity(), Some(2 * j as i64 - 1 - 3));
        let value = e.evaluate(&[0.5, 0.2, 0.3]).unwrap();
        let scaled = e.evaluate(&[0.9, 0.2, 0.7]).unwrap();
        // x - y doubled
        let ratio = scaled.max_abs_coeff() / value.max_abs_coeff();
        assert_relative_eq!(ratio, 2f64.powi(2 * j as i32 - 4), max_relative = 1e-10);
    }
}
