use std::collections::VecDeque;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::mesh::{Bvh, TriMesh};

use super::ConstrictError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdfConfig {
    pub cone_half_angle_deg: f64,
    pub rays_per_face: usize,
    /// Rescale the final values linearly to `[0, 1]`.
    pub normalize: bool,
}

impl Default for SdfConfig {
    fn default() -> Self {
        Self {
            cone_half_angle_deg: 60.0,
            rays_per_face: 30,
            normalize: false,
        }
    }
}

impl SdfConfig {
    pub fn validate(&self) -> Result<(), ConstrictError> {
        if !(self.cone_half_angle_deg > 0.0 && self.cone_half_angle_deg < 90.0) {
            return Err(ConstrictError::InvalidConfig("cone_half_angle_deg must lie in (0, 90)".into()));
        }
        if self.rays_per_face == 0 {
            return Err(ConstrictError::InvalidConfig("rays_per_face must be at least 1".into()));
        }
        Ok(())
    }
}

/// Normals whose dot product is below this count as at least 90° apart.
const PERPENDICULAR_TOLERANCE: f64 = 1e-9;
const GOLDEN_ANGLE: f64 = PI * (3.0 - 2.236_067_977_499_79);
const GOLDEN_FRACTION: f64 = 0.618_033_988_749_894_9;

/// Shape diameter of every face; see [`compute_sdf_subset`].
pub fn compute_sdf(mesh: &TriMesh, config: &SdfConfig) -> Result<Vec<f64>, ConstrictError> {
    let all: Vec<usize> = (0..mesh.faces.len()).collect();
    compute_sdf_subset(mesh, &all, config)
}

/// Shape diameter of the listed faces, in the order given.
///
/// Rays leave each face centroid inside a cone around the inward normal:
/// polar angles are evenly spaced over the cone, azimuths follow a golden
/// angle sequence offset by the face index, and both are expressed in a
/// frame attached to the face's first edge. Only the first intersection of
/// a ray counts, and only if the surface there faces back toward the
/// origin face. Lengths within one standard deviation of their median are
/// averaged with weight `1 / (1 + angle)`, the angle measured in degrees
/// from the cone axis.
///
/// Faces without a value take the mean of their edge neighbours, and one
/// bilateral pass over breadth-first face rings smooths the result. The
/// whole mesh is used for ray casting; neighbourhoods stay within the subset.
pub fn compute_sdf_subset(mesh: &TriMesh, faces: &[usize], config: &SdfConfig) -> Result<Vec<f64>, ConstrictError> {
    config.validate()?;
    let boundary = mesh.boundary_edge_count();
    if boundary > 0 {
        return Err(ConstrictError::OpenMesh(boundary));
    }
    let geometry = mesh.face_geometries()?;
    let bvh = Bvh::new(mesh);
    let t_min = 1e-9 * mesh.bbox_diagonal();
    let half = config.cone_half_angle_deg;
    let n_rays = config.rays_per_face;

    let raw: Vec<Option<f64>> = faces
        .par_iter()
        .map(|&f| {
            let g = &geometry[f];
            let axis = -g.normal;
            let [a, b, _] = mesh.face_points(f);
            let t1 = (b - a).normalize();
            let t2 = axis.cross(&t1);
            let offset = (f as f64 * GOLDEN_FRACTION).fract() * 2.0 * PI;
            let mut samples = Vec::with_capacity(n_rays);
            for k in 0..n_rays {
                let alpha_deg = half * (k as f64 + 0.5) / n_rays as f64;
                let alpha = alpha_deg.to_radians();
                let phi = offset + GOLDEN_ANGLE * k as f64;
                let dir = axis * alpha.cos() + (t1 * phi.cos() + t2 * phi.sin()) * alpha.sin();
                if let Some(hit) = bvh.first_hit(&g.centroid, &dir, t_min, Some(f)) {
                    if geometry[hit.face].normal.dot(&g.normal) <= PERPENDICULAR_TOLERANCE {
                        samples.push((hit.t, 1.0 / (1.0 + alpha_deg)));
                    }
                }
            }
            aggregate(&mut samples)
        })
        .collect();

    let mut values = fill_missing(mesh, faces, raw)?;
    values = bilateral_smooth(mesh, faces, &values);
    if config.normalize {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        for v in &mut values {
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
        }
    }
    Ok(values)
}

/// Weighted mean of lengths within one standard deviation of the median.
fn aggregate(samples: &mut [(f64, f64)]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut lengths: Vec<f64> = samples.iter().map(|s| s.0).collect();
    lengths.sort_by(f64::total_cmp);
    let n = lengths.len();
    let median = if n % 2 == 1 {
        lengths[n / 2]
    } else {
        0.5 * (lengths[n / 2 - 1] + lengths[n / 2])
    };
    let mean = lengths.iter().sum::<f64>() / n as f64;
    let std = (lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let (sum, weight) = samples
        .iter()
        .filter(|(l, _)| (l - median).abs() <= std)
        .fold((0.0, 0.0), |(s, w), (l, wt)| (s + l * wt, w + wt));
    (weight > 0.0).then(|| sum / weight)
}

/// Local adjacency of the subset: neighbour lists by subset position.
fn subset_adjacency(mesh: &TriMesh, faces: &[usize]) -> Vec<Vec<usize>> {
    let mut position = vec![usize::MAX; mesh.faces.len()];
    for (i, &f) in faces.iter().enumerate() {
        position[f] = i;
    }
    let adjacency = mesh.face_adjacency();
    faces
        .iter()
        .map(|&f| {
            adjacency[f]
                .iter()
                .map(|&g| position[g])
                .filter(|&p| p != usize::MAX)
                .collect()
        })
        .collect()
}

fn fill_missing(mesh: &TriMesh, faces: &[usize], raw: Vec<Option<f64>>) -> Result<Vec<f64>, ConstrictError> {
    let known: Vec<f64> = raw.iter().flatten().copied().collect();
    if known.is_empty() {
        return Err(ConstrictError::NoHits);
    }
    if known.len() == raw.len() {
        return Ok(known);
    }
    let adjacency = subset_adjacency(mesh, faces);
    let mut values = raw;
    loop {
        let snapshot = values.clone();
        let mut progressed = false;
        let mut missing = false;
        for (i, v) in values.iter_mut().enumerate() {
            if v.is_some() {
                continue;
            }
            let near: Vec<f64> = adjacency[i].iter().filter_map(|&j| snapshot[j]).collect();
            if near.is_empty() {
                missing = true;
            } else {
                *v = Some(near.iter().sum::<f64>() / near.len() as f64);
                progressed = true;
            }
        }
        if !missing {
            break;
        }
        if !progressed {
            // components with no value at all take the global mean
            let mean = known.iter().sum::<f64>() / known.len() as f64;
            for v in values.iter_mut().filter(|v| v.is_none()) {
                *v = Some(mean);
            }
            break;
        }
    }
    Ok(values.into_iter().map(|v| v.expect("filled")).collect())
}

/// One bilateral pass with window `w = ⌊√(|F|/2000)⌋ + 1` breadth-first rings,
/// spatial scale `w/2` in ring units and a per-face range scale equal to the
/// RMS deviation of its neighbours.
fn bilateral_smooth(mesh: &TriMesh, faces: &[usize], values: &[f64]) -> Vec<f64> {
    let window = ((mesh.faces.len() as f64 / 2000.0).sqrt().floor() as usize) + 1;
    let sigma_s = window as f64 / 2.0;
    let adjacency = subset_adjacency(mesh, faces);
    (0..faces.len())
        .into_par_iter()
        .map(|i| {
            let mut level = vec![(i, 0usize)];
            let mut seen = std::collections::HashSet::from([i]);
            let mut queue = VecDeque::from([(i, 0usize)]);
            while let Some((f, d)) = queue.pop_front() {
                if d == window {
                    continue;
                }
                for &g in &adjacency[f] {
                    if seen.insert(g) {
                        level.push((g, d + 1));
                        queue.push_back((g, d + 1));
                    }
                }
            }
            let centre = values[i];
            let neighbours = level.len() - 1;
            let sigma_r = if neighbours == 0 {
                0.0
            } else {
                (level[1..].iter().map(|&(j, _)| (values[j] - centre).powi(2)).sum::<f64>() / neighbours as f64).sqrt()
            };
            let (sum, weight) = level.iter().fold((0.0, 0.0), |(s, w), &(j, d)| {
                let spatial = (-((d * d) as f64) / (2.0 * sigma_s * sigma_s)).exp();
                let range = if sigma_r > 0.0 {
                    (-(values[j] - centre).powi(2) / (2.0 * sigma_r * sigma_r)).exp()
                } else {
                    1.0
                };
                let wt = spatial * range;
                (s + values[j] * wt, w + wt)
            });
            sum / weight
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::mesh::primitives::{cube, cylinder, flat_grid, icosphere, CYLINDER_LATERAL};
    use nalgebra::Rotation3;

    fn within(values: &[f64], target: f64, tol: f64) -> f64 {
        values.iter().filter(|v| ((*v - target) / target).abs() <= tol).count() as f64 / values.len() as f64
    }

    #[test]
    fn sphere_diameter() {
        let s = icosphere(1.0, 3);
        let sdf = compute_sdf(&s, &SdfConfig::default()).unwrap();
        assert!(within(&sdf, 2.0, 0.1) >= 0.95);
    }

    #[test]
    fn cylinder_lateral_diameter() {
        let c = cylinder(1.0, 20.0, 32, 60);
        let labels = c.face_branch.clone().unwrap();
        let lateral: Vec<usize> = (0..c.faces.len()).filter(|&f| labels[f] == CYLINDER_LATERAL).collect();
        let sdf = compute_sdf_subset(&c, &lateral, &SdfConfig::default()).unwrap();
        assert!(within(&sdf, 2.0, 0.1) >= 0.9);
    }

    #[test]
    fn cube_side_at_face_centres() {
        let c = cube(2.0, 6);
        let sdf = compute_sdf(&c, &SdfConfig::default()).unwrap();
        // faces near the middle of each side, away from the cube edges
        let central: Vec<f64> = (0..c.faces.len())
            .filter(|&f| {
                let m = c.face_geometry(f).unwrap().centroid;
                let mut off = m.abs();
                let side = off.imax();
                off[side] = 0.0;
                off.max() <= 0.5
            })
            .map(|f| sdf[f])
            .collect();
        assert!(central.len() >= 48);
        assert!(within(&central, 2.0, 0.1) >= 0.9);
    }

    #[test]
    fn rotation_invariant() {
        let s = cylinder(1.0, 5.0, 16, 10);
        let rot = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let mut turned = s.clone();
        for v in &mut turned.vertices {
            *v = rot * *v + Vec3::new(3.0, -2.0, 7.5);
        }
        let a = compute_sdf(&s, &SdfConfig::default()).unwrap();
        let b = compute_sdf(&turned, &SdfConfig::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn normalized_range() {
        let cfg = SdfConfig { normalize: true, ..SdfConfig::default() };
        let sdf = compute_sdf(&cylinder(1.0, 5.0, 16, 10), &cfg).unwrap();
        let lo = sdf.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sdf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((lo, hi), (0.0, 1.0));
    }

    #[test]
    fn open_mesh_rejected() {
        assert!(matches!(
            compute_sdf(&flat_grid(3, 1.0), &SdfConfig::default()),
            Err(ConstrictError::OpenMesh(_))
        ));
    }

    #[test]
    fn aggregation_window() {
        let mut s = vec![(1.0, 1.0), (1.0, 1.0), (1.0, 1.0), (10.0, 1.0)];
        assert_eq!(aggregate(&mut s), Some(1.0));
        assert_eq!(aggregate(&mut []), None);
        let mut w = vec![(2.0, 3.0), (4.0, 1.0)];
        assert_eq!(aggregate(&mut w), Some(2.5));
    }
}
