use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::geom::{self, Vec3};
use crate::rng::{stage, Rng};
use crate::tree::{AirwayTree, BranchId};

use super::{MeshError, TriMesh};

const MAX_RINGS: usize = 256;

/// Radii at the tail and head of a branch: the parent's diameter flows into
/// the branch's own.
fn branch_radii(tree: &AirwayTree, b: BranchId) -> Result<(f64, f64), MeshError> {
    let diameter = |id: BranchId| -> Result<f64, MeshError> {
        match tree.branch(id).diameter {
            Some(d) if d > 0.0 && d.is_finite() => Ok(d),
            _ => Err(MeshError::MissingDiameter(id)),
        }
    };
    let own = diameter(b)?;
    let start = match tree.branch(b).parent {
        Some(p) => diameter(p)?,
        None => own,
    };
    Ok((start / 2.0, own / 2.0))
}

fn frame(axis: &Vec3) -> (Vec3, Vec3) {
    let e1 = geom::any_orthogonal(axis).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

/// Closed tube mesh with one truncated cone per branch.
///
/// Each branch is its own closed component: `circle_segments` sides, axial
/// rings roughly as long as a side, and triangle fans closing both ends at
/// the branch nodes. Every face is labelled with its branch id.
pub fn synthesize_tube_mesh(tree: &AirwayTree, circle_segments: usize) -> Result<TriMesh, MeshError> {
    if circle_segments < 6 {
        return Err(MeshError::InvalidParameter(format!(
            "circle_segments must be at least 6 (got {circle_segments})"
        )));
    }
    let mut mesh = TriMesh::new(Vec::new(), Vec::new());
    let mut labels = Vec::new();
    for branch in tree.branches() {
        let (r0, r1) = branch_radii(tree, branch.id)?;
        let tail = tree.tail_position(branch.id);
        let length = tree.length(branch.id);
        let axis = tree.direction(branch.id);
        let (e1, e2) = frame(&axis);
        let side = TAU * r0.max(r1) / circle_segments as f64;
        let rings = ((length / side).ceil() as usize).clamp(1, MAX_RINGS);

        let base = mesh.vertices.len();
        for i in 0..=rings {
            let s = i as f64 / rings as f64;
            let r = r0 + (r1 - r0) * s;
            let centre = tail + axis * (length * s);
            for k in 0..circle_segments {
                let phi = TAU * k as f64 / circle_segments as f64;
                mesh.vertices.push(centre + (e1 * phi.cos() + e2 * phi.sin()) * r);
            }
        }
        let at = |i: usize, k: usize| base + i * circle_segments + k % circle_segments;
        let first = mesh.faces.len();
        for i in 0..rings {
            for k in 0..circle_segments {
                let (a, b, c, d) = (at(i, k), at(i, k + 1), at(i + 1, k + 1), at(i + 1, k));
                mesh.faces.push([a, b, c]);
                mesh.faces.push([a, c, d]);
            }
        }
        let tail_ix = mesh.vertices.len();
        mesh.vertices.push(tail);
        let head_ix = mesh.vertices.len();
        mesh.vertices.push(tree.head_position(branch.id));
        for k in 0..circle_segments {
            mesh.faces.push([tail_ix, at(0, k + 1), at(0, k)]);
            mesh.faces.push([head_ix, at(rings, k), at(rings, k + 1)]);
        }
        labels.extend(std::iter::repeat_n(branch.id, mesh.faces.len() - first));
    }
    mesh.face_branch = Some(labels);
    Ok(mesh)
}

struct Tube {
    tail: Vec3,
    head: Vec3,
    r0: f64,
    r1: f64,
}

impl Tube {
    /// Strictly inside, more than `1e-9` mm from the wall.
    fn contains(&self, p: &Vec3) -> bool {
        let t = geom::segment_parameter(p, &self.tail, &self.head);
        let foot = self.tail + (self.head - self.tail) * t;
        (p - foot).norm() < self.r0 + (self.r1 - self.r0) * t - 1e-9
    }
}

/// Uniform random points on the lateral tube surfaces, `density` per mm².
///
/// Points falling inside another branch's tube are discarded. Each point is
/// returned with its branch id.
pub fn sample_surface_point_cloud(
    tree: &AirwayTree,
    density: f64,
    seed: u64,
) -> Result<Vec<(Vec3, BranchId)>, MeshError> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(MeshError::InvalidParameter(format!("density must be positive (got {density})")));
    }
    let mut tubes = Vec::with_capacity(tree.len());
    for b in tree.branches() {
        let (r0, r1) = branch_radii(tree, b.id)?;
        tubes.push(Tube {
            tail: tree.tail_position(b.id),
            head: tree.head_position(b.id),
            r0,
            r1,
        });
    }

    let mut rng = Rng::for_stage(seed, stage::SURFACE_SAMPLING);
    let mut points = Vec::new();
    for (id, tube) in tubes.iter().enumerate() {
        let length = (tube.head - tube.tail).norm();
        let axis = (tube.head - tube.tail) / length;
        let (e1, e2) = frame(&axis);
        let dr = tube.r1 - tube.r0;
        let slant = (length * length + dr * dr).sqrt();
        let expected = density * PI * (tube.r0 + tube.r1) * slant;
        let mut count = expected.floor() as usize;
        if rng.uniform() < expected - expected.floor() {
            count += 1;
        }
        for _ in 0..count {
            let u = rng.uniform();
            // axial density proportional to the local radius
            let s = if dr.abs() <= 1e-12 * tube.r0 {
                u
            } else {
                let r0 = tube.r0;
                (-r0 + (r0 * r0 + 2.0 * dr * u * (r0 + dr / 2.0)).sqrt()) / dr
            };
            let phi = TAU * rng.uniform();
            let r = tube.r0 + dr * s;
            let p = tube.tail + axis * (length * s) + (e1 * phi.cos() + e2 * phi.sin()) * r;
            points.push((p, id));
        }
    }

    let grid = TubeGrid::new(&tubes);
    Ok(points
        .into_par_iter()
        .filter(|(p, own)| {
            !grid
                .candidates(p)
                .iter()
                .any(|&c| c != *own && tubes[c].contains(p))
        })
        .collect())
}

/// Uniform hash grid over tube bounding boxes.
struct TubeGrid {
    cell: f64,
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl TubeGrid {
    fn new(tubes: &[Tube]) -> Self {
        let boxes: Vec<(Vec3, Vec3)> = tubes
            .iter()
            .map(|t| {
                let r = Vec3::repeat(t.r0.max(t.r1));
                (t.tail.inf(&t.head) - r, t.tail.sup(&t.head) + r)
            })
            .collect();
        let mean_extent = boxes.iter().map(|(lo, hi)| (hi - lo).max()).sum::<f64>() / boxes.len().max(1) as f64;
        let cell = mean_extent.max(1e-6);
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, (lo, hi)) in boxes.iter().enumerate() {
            let a = Self::key(lo, cell);
            let b = Self::key(hi, cell);
            for x in a[0]..=b[0] {
                for y in a[1]..=b[1] {
                    for z in a[2]..=b[2] {
                        cells.entry([x, y, z]).or_default().push(i);
                    }
                }
            }
        }
        Self { cell, cells }
    }

    fn key(p: &Vec3, cell: f64) -> [i64; 3] {
        [
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ]
    }

    fn candidates(&self, p: &Vec3) -> &[usize] {
        self.cells
            .get(&Self::key(p, self.cell))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::NodeId;

    fn single(length: f64, diameter: f64) -> AirwayTree {
        let nodes: Vec<(NodeId, Vec3)> = vec![(0, Vec3::zeros()), (1, Vec3::new(length, 0.0, 0.0))];
        AirwayTree::build(&nodes, &[(0, 1)], 0).unwrap().with_diameters(&[diameter])
    }

    #[test]
    fn cylinder_area_and_volume() {
        let t = single(10.0, 2.0);
        let m = synthesize_tube_mesh(&t, 32).unwrap();
        m.validate().unwrap();
        let labels = m.face_branch.as_ref().unwrap();
        assert_eq!(labels.len(), m.faces.len());
        let lateral: f64 = (0..m.faces.len())
            .filter(|&f| m.faces[f].iter().all(|&v| v < m.vertices.len() - 2))
            .map(|f| m.face_area(f))
            .sum();
        let exact = PI * 2.0 * 10.0;
        assert!((lateral - exact).abs() / exact < 0.015);
        let unit = synthesize_tube_mesh(&single(10.0, 2.0), 64).unwrap();
        assert!((unit.signed_volume() - PI * 10.0).abs() / (PI * 10.0) < 0.02);
    }

    #[test]
    fn tree_tubes_are_closed_components() {
        let nodes: Vec<(NodeId, Vec3)> = vec![
            (0, Vec3::new(0.0, 0.0, 20.0)),
            (1, Vec3::zeros()),
            (2, Vec3::new(-8.0, 0.0, -10.0)),
            (3, Vec3::new(8.0, 1.0, -10.0)),
        ];
        let tree = AirwayTree::build(&nodes, &[(0, 1), (1, 2), (1, 3)], 0)
            .unwrap()
            .with_diameters(&[6.0, 4.0, 4.5]);
        let m = synthesize_tube_mesh(&tree, 12).unwrap();
        m.validate().unwrap();
        assert!(m.is_closed());
        assert_eq!(m.component_count(), 3);
        assert_eq!(m.euler_characteristic(), 6);
        assert!(matches!(synthesize_tube_mesh(&tree, 5), Err(MeshError::InvalidParameter(_))));
        assert!(matches!(
            synthesize_tube_mesh(&tree.clone().clear_diameters(), 12),
            Err(MeshError::MissingDiameter(0))
        ));
    }

    #[test]
    fn cylinder_points_on_surface() {
        let t = single(10.0, 2.0);
        let pts = sample_surface_point_cloud(&t, 20.0, 5).unwrap();
        let expected = 20.0 * PI * 2.0 * 10.0;
        assert!((pts.len() as f64 - expected).abs() / expected < 0.1);
        for (p, b) in &pts {
            assert_eq!(*b, 0);
            assert!(((p.y * p.y + p.z * p.z).sqrt() - 1.0).abs() < 1e-9);
        }
        assert!(sample_surface_point_cloud(&t, 0.0, 5).is_err());
    }

    #[test]
    fn crossing_tubes_cleaned() {
        let nodes: Vec<(NodeId, Vec3)> = vec![
            (0, Vec3::new(0.0, 0.0, 20.0)),
            (1, Vec3::zeros()),
            (2, Vec3::new(0.0, 0.0, -20.0)),
            (3, Vec3::new(10.0, 0.0, -10.0)),
            (4, Vec3::new(-10.0, 0.0, -10.0)),
        ];
        // branch 2 runs back across branch 1
        let tree = AirwayTree::build(&nodes, &[(0, 1), (1, 2), (1, 3), (3, 4)], 0)
            .unwrap()
            .with_diameters(&[4.0, 4.0, 3.0, 3.0]);
        let pts = sample_surface_point_cloud(&tree, 10.0, 1).unwrap();
        for (p, own) in &pts {
            for b in tree.branches() {
                if b.id == *own {
                    continue;
                }
                let (r0, r1) = branch_radii(&tree, b.id).unwrap();
                let tube = Tube { tail: tree.tail_position(b.id), head: tree.head_position(b.id), r0, r1 };
                assert!(!tube.contains(p));
            }
        }
    }
}
