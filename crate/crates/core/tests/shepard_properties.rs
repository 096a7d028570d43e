use proptest::prelude::*;
use rbf_field::dictionary::{shepard_eval, RbfDictionary, RbfEntry};
use rbf_field::Point;

fn dictionary() -> impl Strategy<Value = (RbfDictionary, Vec<f64>)> {
    prop::collection::vec(((0.0..1.0f64, 0.0..1.0f64), 0.02..0.5f64, -5.0..5.0f64), 1..=50).prop_map(|v| {
        let entries = v
            .iter()
            .map(|&((x, y), width, _)| RbfEntry { center: [x, y], width, generation: 0 })
            .collect();
        let beta = v.iter().map(|t| t.2).collect();
        (RbfDictionary::from_entries(entries).unwrap(), beta)
    })
}

fn probes() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-0.5..1.5f64, -0.5..1.5f64).prop_map(|(x, y)| [x, y]), 1000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weights_form_a_partition_of_unity((dict, _) in dictionary(), xs in probes()) {
        for x in &xs {
            let w = dict.shepard_weights(x).unwrap();
            prop_assert!(w.iter().all(|v| *v >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn blend_stays_within_coefficient_range((dict, beta) in dictionary(), xs in probes()) {
        let lo = beta.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for x in &xs {
            let v = shepard_eval(x, &dict, &beta).unwrap();
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12, "{v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn translation_leaves_weights_unchanged(
        (dict, _) in dictionary(),
        xs in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| [x, y]), 100),
        shift in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let moved = RbfDictionary::from_entries(
            dict.entries()
                .iter()
                .map(|e| RbfEntry { center: [e.center[0] + shift.0, e.center[1] + shift.1], ..*e })
                .collect(),
        )
        .unwrap();
        for x in &xs {
            let a = dict.shepard_weights(x).unwrap();
            let b = moved.shepard_weights(&[x[0] + shift.0, x[1] + shift.1]).unwrap();
            let d = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            prop_assert!(d <= 1e-14, "weights moved by {d:e}");
        }
    }
}
