use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbf_field::geometry::locate;
use rbf_field::{make_partition, Mesh};

proptest! {
    #[test]
    fn quadrature_weights_add_up_to_the_domain(
        nx in 1usize..40, ny in 1usize..40,
        x0 in -5.0..5.0f64, y0 in -5.0..5.0f64, w in 0.1..10.0f64, h in 0.1..10.0f64,
        order in 1usize..=2,
    ) {
        let mesh = Mesh::new_2d(nx, ny, [x0, x0 + w, y0, y0 + h]).unwrap();
        let total: f64 = (0..mesh.n_cells())
            .map(|c| mesh.quadrature(c, order).unwrap().weights.iter().sum::<f64>())
            .sum();
        prop_assert!((total - w * h).abs() <= 1e-12 * w * h);
    }
}

#[test]
fn every_point_has_exactly_one_owner() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mesh = Mesh::new_2d(12, 20, [0.0, 3.0, -1.0, 1.0]).unwrap();
    let part = make_partition(&mesh, 3, 4).unwrap();
    let [x0, x1, y0, y1] = mesh.bounds();
    let mut counts = vec![0usize; part.len()];
    for k in 0..100_000 {
        // every tenth point snaps onto a grid line to hit shared faces
        let (mut x, mut y) = (rng.gen_range(x0..=x1), rng.gen_range(y0..=y1));
        if k % 10 == 0 {
            x = x0 + (rng.gen_range(0..=12) as f64) * 0.25;
            y = y0 + (rng.gen_range(0..=20) as f64) * 0.1;
            x = x.min(x1);
            y = y.min(y1);
        }
        let p = [x, y];
        let owners = part.boxes.iter().filter(|b| b.contains(&p)).count();
        assert_eq!(owners, 1, "{p:?} owned by {owners} boxes");
        counts[locate(&p, &part.boxes).unwrap()] += 1;
    }
    assert_eq!(counts.iter().sum::<usize>(), 100_000);
    assert!(counts.iter().all(|&c| c > 0));
}
