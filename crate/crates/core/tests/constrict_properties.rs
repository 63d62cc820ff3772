use bronchi::constrict::{
    compute_sdf, contract_step, narrowing_ratio, region_vertices, simulate_bronchoconstriction,
    ConstrictionConfig, ContractionState, SdfConfig,
};
use bronchi::mesh::primitives::{cylinder, icosphere};
use bronchi::Vec3;
use nalgebra::Rotation3;
use proptest::prelude::*;

proptest! {
    #[test]
    fn ratio_of_array_with_itself_is_one(values in prop::collection::vec(1e-6f64..1e6, 1..200)) {
        prop_assert!((narrowing_ratio(&values, &values).unwrap() - 1.0).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sdf_rotation_invariant(
        angles in (-3.1f64..3.1, -1.5f64..1.5, -3.1f64..3.1),
        shift in (-20.0f64..20.0, -20.0f64..20.0, -20.0f64..20.0),
    ) {
        let rot = Rotation3::from_euler_angles(angles.0, angles.1, angles.2);
        let t = Vec3::new(shift.0, shift.1, shift.2);
        for mesh in [cylinder(1.0, 6.0, 16, 8), icosphere(1.5, 2)] {
            let mut moved = mesh.clone();
            moved.vertices.iter_mut().for_each(|v| *v = rot * *v + t);
            let a = compute_sdf(&mesh, &SdfConfig::default()).unwrap();
            let b = compute_sdf(&moved, &SdfConfig::default()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn cylinder_constriction_shrinks_volume(radius in 0.5f64..6.0, aspect in 5.0f64..12.0) {
        let mesh = cylinder(radius, radius * aspect, 24, 20);
        let result = simulate_bronchoconstriction(&mesh, &ConstrictionConfig::default()).unwrap();
        prop_assert!(result.volumes.windows(2).all(|w| w[1] < w[0]), "{:?}", result.volumes);
        prop_assert!(result.history.windows(2).all(|w| w[1] <= w[0]), "{:?}", result.history);
    }
}

#[test]
fn vanishing_contraction_returns_anchors() {
    let mesh = cylinder(1.0, 5.0, 16, 10);
    let state = ContractionState::new(&mesh, 1e-9).unwrap();
    let region = region_vertices(&mesh, &(0..mesh.faces.len()).collect::<Vec<_>>());
    let next = contract_step(&mesh, &state, &region, 2.0).unwrap();
    let worst = next
        .vertices
        .iter()
        .zip(&mesh.vertices)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}
