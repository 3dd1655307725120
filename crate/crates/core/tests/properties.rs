mod common;

use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn wronskian_is_constant(kind in 0u8..3, strength in -0.2f64..0.7, e in -3.0f64..3.0,
                             a in (-2.0f64..2.0, -2.0f64..2.0), b in (-2.0f64..2.0, -2.0f64..2.0)) {
        prop_assume!((a.0 * b.1 - a.1 * b.0).abs() > 0.1);
        let strength = if kind == 2 { -1.0 - strength.abs() } else { strength };
        let d = wronskian_drift(&potential(kind, strength), e, a, b).unwrap();
        prop_assert!(d < 1e-8, "drift {d}");
    }

    #[test]
    fn limit_numbers_are_linear(e in -2.0f64..2.0, a in proptest::array::uniform4(-2.0f64..2.0),
                                al in (-2.0f64..2.0, -2.0f64..2.0), be in (-2.0f64..2.0, -2.0f64..2.0)) {
        let (gap, tol) = linearity_gap(e, [c(a[0]), C64::new(0.0, a[1])], [c(a[2]), c(a[3])],
                                       C64::new(al.0, al.1), C64::new(be.0, be.1)).unwrap();
        prop_assert!(gap <= tol + 1e-9, "gap {gap} tol {tol}");
    }

    #[test]
    fn s_matrix_is_unitary(lp in -3.0f64..3.0, lm in -3.0f64..3.0, mixing in 0.0f64..0.78,
                           phase in -3.0f64..3.0, k in 0.2f64..10.0) {
        prop_assume!(lp.abs() > 1e-3 && lm.abs() > 1e-3);
        prop_assert!(smatrix_defect(lp, lm, mixing, phase, k, 0.0).unwrap() < 1e-8);
    }

    #[test]
    fn crank_nicolson_conserves_norm(line in any::<bool>(), lp in -3.0f64..3.0, lm in -3.0f64..3.0,
                                     mixing in 0.0f64..0.78, x0 in 3.0f64..8.0, k0 in -2.0f64..2.0) {
        prop_assume!(lp.abs() > 1e-3 && lm.abs() > 1e-3);
        let x0 = if line { x0 - 10.0 } else { x0 };
        prop_assert!(cn_drift(line, lp, lm, mixing, x0, k0).unwrap() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn sl2_rechoice_preserves_verdicts(e in -2.0f64..2.0, l in -4.0f64..4.0, infinite in any::<bool>(),
                                       satisfy in any::<bool>(), tilt in 0.1f64..3.0,
                                       a in prop_oneof![-3.0f64..-0.3, 0.3f64..3.0], b in -2.0f64..2.0, d in -2.0f64..2.0) {
        let length = if infinite { None } else { Some(l) };
        let (v1, v2) = sl2_verdicts(e, length, satisfy, tilt, a, b, d).unwrap();
        prop_assert_eq!(v1, v2);
        prop_assert_eq!(v1, satisfy);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn s_matrix_is_unitary_with_inverse_square_wings(lp in -3.0f64..3.0, lm in -3.0f64..3.0, mixing in 0.0f64..0.78,
                                                      k in 0.3f64..5.0, strength in 0.05f64..0.7) {
        prop_assume!(lp.abs() > 1e-3 && lm.abs() > 1e-3);
        prop_assert!(smatrix_defect(lp, lm, mixing, 0.4, k, strength).unwrap() < 1e-8);
    }
}
