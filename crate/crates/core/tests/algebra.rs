use approx::assert_relative_eq;
use fermionic_core::clifford::{geometric_product, reflect, Multivector};
use proptest::prelude::*;

fn mv(m: usize) -> impl Strategy<Value = Multivector> {
    prop::collection::vec(-1.0f64..1.0, 1 << m)
        .prop_map(move |c| Multivector::try_from_coeffs(m, c).unwrap())
}

fn triple() -> impl Strategy<Value = (Multivector, Multivector, Multivector)> {
    (3usize..=6).prop_flat_map(|m| (mv(m), mv(m), mv(m)))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        let l = geometric_product(&geometric_product(&a, &b).unwrap(), &c).unwrap();
        let r = geometric_product(&a, &geometric_product(&b, &c).unwrap()).unwrap();
        prop_assert!((&l - &r).max_abs() <= 1e-12 * l.max_abs().max(1.0));
    }

    #[test]
    fn involutions_reverse_or_keep_order((a, b, _c) in triple()) {
        let ab = &a * &b;
        prop_assert!((&ab.reversion() - &(&b.reversion() * &a.reversion())).max_abs() < 1e-12);
        prop_assert!((&ab.conjugate() - &(&b.conjugate() * &a.conjugate())).max_abs() < 1e-12);
        prop_assert!((&ab.grade_involution() - &(&a.grade_involution() * &b.grade_involution())).max_abs() < 1e-12);
    }

    #[test]
    fn vectors_square_to_minus_norm(v in prop::collection::vec(-2.0f64..2.0, 3..=6)) {
        let x = Multivector::vector(&v);
        let n2: f64 = v.iter().map(|c| c * c).sum();
        let sq = &x * &x;
        prop_assert!((&sq - &Multivector::scalar(v.len(), -n2)).max_abs() < 1e-12);
        prop_assert!((x.conjugate().vector_part().iter().zip(&v)).all(|(a, b)| (a + b).abs() < 1e-15));
    }

    #[test]
    fn reflection_preserves_length(
        v in prop::collection::vec(-1.0f64..1.0, 4),
        n in prop::collection::vec(0.1f64..1.0, 4),
    ) {
        let len = n.iter().map(|c| c * c).sum::<f64>().sqrt();
        let unit: Vec<f64> = n.iter().map(|c| c / len).collect();
        let r = reflect(&Multivector::vector(&unit), &Multivector::vector(&v)).unwrap();
        let before: f64 = v.iter().map(|c| c * c).sum();
        let after: f64 = r.vector_part().iter().map(|c| c * c).sum();
        prop_assert!((before - after).abs() < 1e-12);
        prop_assert!(r.non_vector_residual() < 1e-12);
    }
}

#[test]
fn generators_anticommute() {
    for m in 3..=6 {
        for i in 0..m {
            for j in 0..m {
                let (ei, ej) = (Multivector::basis_vector(m, i), Multivector::basis_vector(m, j));
                let s = &(&ei * &ej) + &(&ej * &ei);
                assert_relative_eq!(s.scalar_part(), if i == j { -2.0 } else { 0.0 });
                assert_eq!(s.max_abs(), s.scalar_part().abs());
            }
        }
    }
}

#[test]
fn pseudoscalar_square() {
    // e_1...e_m squared is (-1)^{m(m+1)/2}
    for m in 3..=6 {
        let top = Multivector::blade(m, (1 << m) - 1, 1.0);
        let expected = if (m * (m + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        assert_relative_eq!((&top * &top).scalar_part(), expected);
    }
}
