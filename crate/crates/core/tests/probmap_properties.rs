mod common;

use bronchi::probmap::{gaussian_peak, generation_probability_map};
use bronchi::volume::Grid;
use bronchi::Vec3;
use common::binary_tree;
use proptest::prelude::*;

fn segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.dot(&ab)).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn grid_around(lo: Vec3, hi: Vec3, spacing: f64) -> Grid {
    let origin = (lo - Vec3::repeat(3.0)).map(|v| (v / spacing).floor() * spacing);
    let dims = [0, 1, 2].map(|k| (((hi[k] + 3.0 - origin[k]) / spacing).ceil() as usize).max(1));
    Grid::new(dims, Vec3::repeat(spacing), origin).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn values_monotone_in_oracle_distance(spec in binary_tree(16), g in 0u32..4, sigma in 0.5f64..3.0) {
        let tree = spec.build();
        prop_assume!(tree.branches().iter().any(|b| b.generation == g));
        let (lo, hi) = spec.nodes.iter().fold(
            (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
            |(lo, hi), (_, p)| (lo.inf(p), hi.sup(p)),
        );
        let grid = grid_around(lo, hi, 2.0);
        let vol = generation_probability_map(&tree, g, &grid, sigma).unwrap();
        let segments: Vec<(Vec3, Vec3)> = tree
            .branches()
            .iter()
            .filter(|b| b.generation == g)
            .map(|b| (tree.tail_position(b.id), tree.head_position(b.id)))
            .collect();
        let mut pairs: Vec<(f64, f64)> = (0..grid.voxel_count())
            .map(|i| {
                let p = grid.center(grid.unravel(i));
                let d = segments.iter().map(|(a, b)| segment_distance(&p, a, b)).fold(f64::INFINITY, f64::min);
                (d, vol.values[i])
            })
            .collect();
        let bound = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt()) + 1e-9;
        prop_assert!(pairs.iter().all(|&(_, v)| v <= bound));
        prop_assert!(vol.max_value() <= gaussian_peak(sigma) + 1e-9);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            if w[1].0 > w[0].0 + 1e-9 {
                prop_assert!(w[1].1 <= w[0].1 + 1e-12, "{:?}", w);
            }
        }
    }

    #[test]
    fn joint_translation_is_bit_identical(
        spec in binary_tree(12),
        shift in (-64i32..64, -64i32..64, -64i32..64),
        sigma in 0.5f64..2.0,
    ) {
        let tree = spec.build();
        let t = Vec3::new(shift.0 as f64, shift.1 as f64, shift.2 as f64) * 0.5;
        let moved = tree.map_positions(|p| p + t).unwrap();
        let grid = Grid::new([24, 24, 40], Vec3::repeat(1.5), Vec3::new(-18.0, -18.0, -50.0)).unwrap();
        let shifted = Grid { origin: grid.origin + t, ..grid };
        let a = generation_probability_map(&tree, 1, &grid, sigma);
        let b = generation_probability_map(&moved, 1, &shifted, sigma);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                prop_assert_eq!(bits(&a.values), bits(&b.values));
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "only one map failed"),
        }
    }
}
