//! Gaussian likelihood of meeting a given airway generation at each voxel.

use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{self, Vec3};
use crate::tree::AirwayTree;
use crate::volume::io::{read_f32, write_f32};
use crate::volume::{Grid, VolumeError};

#[derive(Debug, Error)]
pub enum ProbMapError {
    #[error("tree has no branch of generation {0}")]
    GenerationAbsent(u32),
    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("missing or malformed `# {0}` entry in volume header")]
    MissingField(&'static str),
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVolume {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub generation: u32,
    pub sigma: f64,
}

impl ProbabilityVolume {
    /// Value at the voxel peak, `1 / (σ√(2π))`.
    pub fn peak(&self) -> f64 {
        gaussian_peak(self.sigma)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn gaussian_peak(sigma: f64) -> f64 {
    1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Gaussian density of the distance from each voxel centre to the nearest
/// branch segment of generation `generation`.
///
/// Distances are evaluated relative to the grid origin, so moving the tree
/// and the grid together by an exactly representable offset leaves every
/// value unchanged.
pub fn generation_probability_map(
    tree: &AirwayTree,
    generation: u32,
    grid: &Grid,
    sigma: f64,
) -> Result<ProbabilityVolume, ProbMapError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(ProbMapError::InvalidSigma(sigma));
    }
    let segments: Vec<(Vec3, Vec3, Vec3, Vec3)> = tree
        .branches()
        .iter()
        .filter(|b| b.generation == generation)
        .map(|b| {
            let a = tree.tail_position(b.id) - grid.origin;
            let h = tree.head_position(b.id) - grid.origin;
            (a, h, a.inf(&h), a.sup(&h))
        })
        .collect();
    if segments.is_empty() {
        return Err(ProbMapError::GenerationAbsent(generation));
    }
    let peak = gaussian_peak(sigma);
    let inv = 1.0 / (2.0 * sigma * sigma);
    let values = (0..grid.voxel_count())
        .into_par_iter()
        .map(|idx| {
            let p = grid.local_center(grid.unravel(idx));
            let mut best = f64::INFINITY;
            for (a, h, lo, hi) in &segments {
                // lower bound from the segment's bounding box
                let gap = (lo - p).sup(&(p - hi)).sup(&Vec3::zeros());
                if gap.norm_squared() >= best {
                    continue;
                }
                best = best.min(geom::point_segment_distance_squared(&p, a, h));
            }
            peak * (-best * inv).exp()
        })
        .collect();
    Ok(ProbabilityVolume {
        grid: *grid,
        values,
        generation,
        sigma,
    })
}

/// Writes header and float32 raw data; generation and sigma go into
/// `# generation` / `# sigma` header comments.
pub fn export_volume(volume: &ProbabilityVolume, header_path: &Path) -> Result<(), ProbMapError> {
    let values: Vec<f32> = volume.values.iter().map(|&v| v as f32).collect();
    let comments = vec![
        ("generation".to_string(), volume.generation.to_string()),
        ("sigma".to_string(), volume.sigma.to_string()),
    ];
    write_f32(&volume.grid, &values, &comments, header_path)?;
    Ok(())
}

/// Reads a volume written by [`export_volume`]; values come back widened from f32.
pub fn load_volume(header_path: &Path) -> Result<ProbabilityVolume, ProbMapError> {
    let (header, values) = read_f32(header_path)?;
    let field = |key: &'static str| {
        header
            .comments
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or(ProbMapError::MissingField(key))
    };
    let generation = field("generation")?
        .parse()
        .map_err(|_| ProbMapError::MissingField("generation"))?;
    let sigma = field("sigma")?
        .parse()
        .map_err(|_| ProbMapError::MissingField("sigma"))?;
    Ok(ProbabilityVolume {
        grid: header.grid,
        values: values.into_iter().map(f64::from).collect(),
        generation,
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::fixtures::complete_binary;
    use crate::tree::NodeId;

    fn straight_tree() -> AirwayTree {
        let nodes: Vec<(NodeId, Vec3)> = vec![
            (0, Vec3::new(0.5, 0.5, 10.5)),
            (1, Vec3::new(0.5, 0.5, 0.5)),
        ];
        AirwayTree::build(&nodes, &[(0, 1)], 0).unwrap()
    }

    #[test]
    fn analytic_values() {
        let grid = Grid::new([3, 1, 4], Vec3::repeat(1.0), Vec3::zeros()).unwrap();
        let map = generation_probability_map(&straight_tree(), 0, &grid, 1.0).unwrap();
        let at = |i, j, k| map.values[grid.linear(i, j, k)];
        assert!((at(0, 0, 2) - 0.398_942_280_401).abs() < 1e-9);
        assert!((at(1, 0, 2) - 0.241_970_724_519).abs() < 1e-9);
        let wide = generation_probability_map(&straight_tree(), 0, &grid, 2.0).unwrap();
        assert!((wide.values[grid.linear(0, 0, 0)] - 0.199_471_140_2).abs() < 1e-9);
    }

    #[test]
    fn absent_generation() {
        let grid = Grid::new([2, 2, 2], Vec3::repeat(1.0), Vec3::zeros()).unwrap();
        assert!(matches!(
            generation_probability_map(&straight_tree(), 4, &grid, 1.0),
            Err(ProbMapError::GenerationAbsent(4))
        ));
        assert!(generation_probability_map(&straight_tree(), 0, &grid, 0.0).is_err());
    }

    #[test]
    fn bounded_by_peak() {
        let tree = complete_binary(4);
        let grid = Grid::new([12, 12, 12], Vec3::repeat(0.75), Vec3::repeat(-4.0)).unwrap();
        let map = generation_probability_map(&tree, 2, &grid, 1.0).unwrap();
        assert!(map.max_value() <= map.peak() + 1e-9);
        assert!(map.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn round_trip_and_sizing() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new([2, 2, 2], Vec3::repeat(1.0), Vec3::zeros()).unwrap();
        let zeros = ProbabilityVolume {
            grid,
            values: vec![0.0; 8],
            generation: 3,
            sigma: 1.0,
        };
        let path = dir.path().join("zeros.hdr");
        export_volume(&zeros, &path).unwrap();
        assert_eq!(std::fs::metadata(path.with_extension("raw")).unwrap().len(), 32);
        assert_eq!(load_volume(&path).unwrap(), zeros);

        let map = generation_probability_map(&straight_tree(), 0, &Grid::new([3, 2, 5], Vec3::new(1.0, 0.5, 2.0), Vec3::new(-1.0, 0.0, 0.0)).unwrap(), 1.5).unwrap();
        let path = dir.path().join("map.hdr");
        export_volume(&map, &path).unwrap();
        let back = load_volume(&path).unwrap();
        assert_eq!(back.grid, map.grid);
        assert_eq!((back.generation, back.sigma), (0, 1.5));
        for (a, b) in back.values.iter().zip(&map.values) {
            assert_eq!(*a, *b as f32 as f64);
        }
        assert!(export_volume(&map, &dir.path().join("missing/dir/x.hdr")).is_err());
    }
}
