use proptest::prelude::*;
use rbf_field::adaptive::RoundReport;
use rbf_field::field::{box_field, smooth_field};
use rbf_field::partition::{load, save, Metadata};
use rbf_field::{
    fit_parallel, make_partition, AdaptiveConfig, ElasticNetConfig, FieldData, InitialDictionary, SubdomainConfig,
};

fn config(rounds: usize) -> SubdomainConfig {
    let mut adaptive = AdaptiveConfig::new(2, ElasticNetConfig::new(1e-6, 1e-4));
    adaptive.k_top = 8;
    adaptive.max_rounds = rounds;
    SubdomainConfig { initial: InitialDictionary::PerCell { sigma: 1.0 / 16.0 }, adaptive }
}

fn meta() -> Metadata {
    Metadata { config: "test".into(), field_checksum: 0 }
}

fn fit(field: &FieldData, px: usize, py: usize, workers: usize) -> rbf_field::partition::ParallelFit {
    let part = make_partition(&field.mesh, px, py).unwrap();
    fit_parallel(field, &part, &[config(1)], workers, 1, meta()).unwrap()
}

fn saved(s: &rbf_field::GlobalSurrogate) -> Vec<u8> {
    let mut v = Vec::new();
    save(s, &mut v).unwrap();
    v
}

#[test]
fn worker_count_does_not_change_the_result() {
    let field = box_field(16, 16).unwrap();
    let one = fit(&field, 2, 2, 1);
    let four = fit(&field, 2, 2, 4);
    assert_eq!(saved(&one.surrogate), saved(&four.surrogate));
    let strip = |r: &[RoundReport]| r.iter().map(|r| RoundReport { seconds: 0.0, ..r.clone() }).collect::<Vec<_>>();
    for (a, b) in one.subdomains.iter().zip(&four.subdomains) {
        assert_eq!(strip(&a.reports), strip(&b.reports));
        assert_eq!(a.stop, b.stop);
    }
    assert!(four.max_concurrency >= 1 && four.max_concurrency <= 4);
}

#[test]
fn continuous_inside_each_subdomain() {
    let field = smooth_field(16, 16).unwrap();
    let s = fit(&field, 2, 2, 1).surrogate;
    // approach the internal face x = 0.5 from the left, staying in one box
    let mut last = f64::INFINITY;
    for k in 2..10 {
        let eps = 10f64.powi(-k);
        let a = s.eval(&[0.5 - eps, 0.3]).unwrap();
        let b = s.eval(&[0.5 - 2.0 * eps, 0.3]).unwrap();
        let d = (a - b).abs();
        assert!(d <= last.max(1e-13), "jump {d:e} at eps {eps:e}");
        last = d;
    }
    assert!(last < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn save_load_is_lossless(px in 1usize..=2, py in 1usize..=2, xs in prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 200)) {
        let field = smooth_field(8, 8).unwrap();
        let s = fit(&field, px, py, 1).surrogate;
        let back = load(saved(&s).as_slice()).unwrap();
        prop_assert_eq!(&back, &s);
        for (x, y) in xs {
            prop_assert_eq!(s.eval(&[x, y]).unwrap().to_bits(), back.eval(&[x, y]).unwrap().to_bits());
        }
    }
}
