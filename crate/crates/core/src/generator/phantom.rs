use crate::geom::Vec3;
use crate::tree::AirwayTree;

/// Trachea and two main bronchi matching
/// [`LungVolume::two_lung_phantom`](crate::volume::LungVolume::two_lung_phantom).
///
/// The trachea runs from (0, 0, 160) down to the carina at (0, 0, 60); the
/// main bronchi end at (±35, 0, 10), inside the respective lung.
pub fn phantom_seed_tree() -> AirwayTree {
    let nodes = [
        (0, Vec3::new(0.0, 0.0, 160.0)),
        (1, Vec3::new(0.0, 0.0, 60.0)),
        (2, Vec3::new(-35.0, 0.0, 10.0)),
        (3, Vec3::new(35.0, 0.0, 10.0)),
    ];
    AirwayTree::build(&nodes, &[(0, 1), (1, 2), (1, 3)], 0).expect("phantom seed tree is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::LungVolume;

    #[test]
    fn bronchi_end_inside_lungs() {
        let tree = phantom_seed_tree();
        let lungs = LungVolume::two_lung_phantom();
        assert_eq!(tree.len(), 3);
        for b in tree.terminals() {
            assert!(lungs.contains(&tree.head_position(b.id)));
        }
        assert!(!lungs.contains(&tree.tail_position(0)));
    }
}
