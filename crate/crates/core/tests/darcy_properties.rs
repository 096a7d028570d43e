use std::sync::Arc;

use proptest::prelude::*;
use rbf_field::darcy::{assemble, solve_darcy, DarcyProblem, Face};
use rbf_field::{FieldData, Mesh, Point};

fn cellwise(nx: usize, ny: usize, values: Vec<f64>) -> impl Fn(&Point) -> f64 + Send + Sync + 'static {
    let mesh = Mesh::new_2d(nx, ny, [0.0, 1.0, 0.0, 1.0]).unwrap();
    let field = Arc::new(FieldData::new(mesh, values).unwrap());
    move |x: &Point| field.value_at(x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stiffness_is_symmetric(values in prop::collection::vec(1e-3..1e3f64, 64)) {
        let mesh = Mesh::new_2d(12, 12, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let asm = assemble(&DarcyProblem::unit_drop(mesh, cellwise(8, 8, values))).unwrap();
        prop_assert!(asm.matrix.asymmetry() <= 1e-12);
    }

    #[test]
    fn inflow_matches_outflow(values in prop::collection::vec((-3.0..3.0f64).prop_map(|t| 10f64.powf(t)), 64)) {
        let mesh = Mesh::new_2d(16, 16, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let sol = solve_darcy(&DarcyProblem::unit_drop(mesh, cellwise(8, 8, values))).unwrap();
        let (q_in, q_out) = (sol.face_flux(Face::Left), sol.face_flux(Face::Right));
        prop_assert!(q_in > 0.0);
        prop_assert!((q_in + q_out).abs() <= 1e-8 * q_in, "in {q_in}, out {q_out}");
    }

    #[test]
    fn affine_pressure_is_reproduced(p_in in -10.0..10.0f64, p_out in -10.0..10.0f64, k in 0.01..100.0f64) {
        let mesh = Mesh::new_2d(6, 9, [0.0, 2.0, 0.0, 3.0]).unwrap();
        let sol = solve_darcy(&DarcyProblem::left_to_right(mesh, move |_| k, p_in, p_out)).unwrap();
        for v in 0..sol.node_count() {
            let x = sol.node_position(v)[0];
            prop_assert!((sol.values[v] - (p_in + (p_out - p_in) * x / 2.0)).abs() <= 1e-10);
        }
    }
}
