use proptest::prelude::*;
use rbf_field::theory::{l1_error, l1_error_halves, logistic_profile, normal_coordinate, two_center_shepard, StepInterfaceSpec};

fn spec() -> impl Strategy<Value = StepInterfaceSpec> {
    (0.0..std::f64::consts::TAU, 0.2..3.0f64, 0.0..1.0f64, 0.05..1.0f64).prop_map(|(a, c, t, sigma)| {
        // b ranges over (-0.9 c, 2), which keeps c + b > 0
        let b = -0.9 * c + t * (2.0 + 0.9 * c);
        StepInterfaceSpec::new([a.cos(), a.sin()], b, c, sigma).unwrap()
    })
}

proptest! {
    #[test]
    fn two_center_blend_is_the_logistic_profile(s in spec(), xs in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 100)) {
        for (x, y) in xs {
            let p = [x, y];
            let d = two_center_shepard(&s, &p) - logistic_profile(&s, normal_coordinate(&s, &p));
            prop_assert!(d.abs() <= 1e-12, "{d:e} at {p:?}");
        }
    }

    #[test]
    fn doubling_sigma_quadruples_the_error(c in 0.2..3.0f64, t in 0.0..1.0f64, sigma in 0.02..0.5f64) {
        let b = -0.9 * c + t * 1.9 * c;
        let e1 = l1_error(&StepInterfaceSpec::along_x(b, c, sigma).unwrap()).unwrap().numeric;
        let e2 = l1_error(&StepInterfaceSpec::along_x(b, c, 2.0 * sigma).unwrap()).unwrap().numeric;
        prop_assert!((e2 / e1 / 4.0 - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn error_splits_evenly_across_the_jump(c in 0.2..3.0f64, b in 0.0..1.0f64, sigma in 0.02..0.5f64) {
        let s = StepInterfaceSpec::along_x(b, c, sigma).unwrap();
        let (left, right) = l1_error_halves(&s).unwrap();
        let total = l1_error(&s).unwrap();
        prop_assert!((left - right).abs() <= 1e-12 * total.numeric.max(1e-300) + 1e-14);
        prop_assert!(total.rel_diff() <= 1e-6);
    }
}
