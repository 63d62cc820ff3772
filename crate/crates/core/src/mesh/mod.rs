//! Triangle meshes: data model, differential operators, smoothing filters and
//! tube synthesis from airway trees.

mod bilateral;
mod bvh;
pub mod io;
mod kdtree;
mod laplacian;
pub mod primitives;
mod tube;

pub use bilateral::{bilateral_normal_filter, bilateral_normal_filter_masked, BilateralConfig};
pub use bvh::{Bvh, RayHit};
pub use kdtree::KdTree;
pub use laplacian::{
    cotangent_laplacian, taubin_smooth, taubin_smooth_masked, uniform_neighbors, LaplacianOperator,
};
pub use tube::{sample_surface_point_cloud, synthesize_tube_mesh};

use std::collections::HashMap;

use thiserror::Error;

use crate::geom::Vec3;
use crate::linalg::SolveError;

/// Faces with area at or below this are degenerate (mm²).
pub const AREA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("face {face} references vertex {index} (only {count} vertices)")]
    IndexOutOfRange { face: usize, index: usize, count: usize },
    #[error("face {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("face {0} is degenerate")]
    DegenerateFace(usize),
    #[error("edge ({0}, {1}) has more than two incident faces")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({0}, {1}) is traversed twice in the same direction")]
    InconsistentWinding(usize, usize),
    #[error("mesh is open ({0} boundary edges)")]
    OpenMesh(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("branch {0} has no diameter")]
    MissingDiameter(usize),
    #[error("attribute length {got} does not match face count {expected}")]
    AttributeLength { expected: usize, got: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// Airway branch each face belongs to.
    pub face_branch: Option<Vec<usize>>,
    /// Per-face scalar, typically shape-diameter values.
    pub face_scalar: Option<Vec<f64>>,
}

/// Centroid, unit normal and area of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    pub centroid: Vec3,
    pub normal: Vec3,
    pub area: f64,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        Self {
            vertices,
            faces,
            face_branch: None,
            face_scalar: None,
        }
    }

    pub fn face_points(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_geometry(&self, f: usize) -> Result<FaceGeometry, MeshError> {
        let [a, b, c] = self.face_points(f);
        let cross = (b - a).cross(&(c - a));
        let norm = cross.norm();
        let area = 0.5 * norm;
        if !(area > AREA_TOLERANCE) {
            return Err(MeshError::DegenerateFace(f));
        }
        Ok(FaceGeometry {
            centroid: (a + b + c) / 3.0,
            normal: cross / norm,
            area,
        })
    }

    /// Geometry of every face; fails on the first degenerate one.
    pub fn face_geometries(&self) -> Result<Vec<FaceGeometry>, MeshError> {
        (0..self.faces.len()).map(|f| self.face_geometry(f)).collect()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.face_points(f);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Enclosed volume by the divergence theorem; positive for outward winding.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                self.vertices[a].dot(&self.vertices[b].cross(&self.vertices[c]))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Undirected edges mapped to their incident faces.
    pub fn edge_faces(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(self.faces.len() * 3 / 2);
        for (f, tri) in self.faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push(f);
            }
        }
        map
    }

    pub fn edge_count(&self) -> usize {
        self.edge_faces().len()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edge_faces().values().filter(|f| f.len() == 1).count()
    }

    pub fn is_closed(&self) -> bool {
        self.edge_faces().values().all(|f| f.len() == 2)
    }

    /// Vertices lying on a boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut out = vec![false; self.vertices.len()];
        for (&(a, b), faces) in &self.edge_faces() {
            if faces.len() == 1 {
                out[a] = true;
                out[b] = true;
            }
        }
        out
    }

    /// Faces sharing an edge with each face, in ascending order.
    pub fn face_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.faces.len()];
        for faces in self.edge_faces().values() {
            for &f in faces {
                for &g in faces {
                    if f != g {
                        adj[f].push(g);
                    }
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Faces incident to each vertex, in ascending order.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (f, tri) in self.faces.iter().enumerate() {
            for &v in tri {
                out[v].push(f);
            }
        }
        out
    }

    /// Sum of incident face areas per vertex.
    pub fn one_ring_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.vertices.len()];
        for (f, tri) in self.faces.iter().enumerate() {
            let a = self.face_area(f);
            for &v in tri {
                out[v] += a;
            }
        }
        out
    }

    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.edge_faces();
        if edges.is_empty() {
            return 0.0;
        }
        edges
            .keys()
            .map(|&(a, b)| (self.vertices[a] - self.vertices[b]).norm())
            .sum::<f64>()
            / edges.len() as f64
    }

    /// Number of vertices referenced by at least one face.
    pub fn used_vertex_count(&self) -> usize {
        let mut used = vec![false; self.vertices.len()];
        for tri in &self.faces {
            for &v in tri {
                used[v] = true;
            }
        }
        used.iter().filter(|&&u| u).count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.used_vertex_count() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    /// Connected components over faces sharing a vertex.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &[a, b, c] in &self.faces {
            for (u, v) in [(a, b), (b, c)] {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru != rv {
                    parent[ru.max(rv)] = ru.min(rv);
                }
            }
        }
        let mut roots: Vec<usize> = self.faces.iter().map(|t| find(&mut parent, t[0])).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Checks indices, repeated vertices, degenerate faces, edge manifoldness,
    /// winding consistency and attribute lengths.
    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.vertices.len();
        for (f, tri) in self.faces.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(MeshError::IndexOutOfRange { face: f, index: v, count: n });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex(f));
            }
            if self.face_area(f) <= AREA_TOLERANCE {
                return Err(MeshError::DegenerateFace(f));
            }
        }
        let mut directed = HashMap::with_capacity(self.faces.len() * 3);
        for tri in &self.faces {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                if directed.insert(e, ()).is_some() {
                    return Err(MeshError::InconsistentWinding(e.0, e.1));
                }
            }
        }
        for (&(a, b), faces) in &self.edge_faces() {
            if faces.len() > 2 {
                return Err(MeshError::NonManifoldEdge(a, b));
            }
        }
        for len in [
            self.face_branch.as_ref().map(Vec::len),
            self.face_scalar.as_ref().map(Vec::len),
        ]
        .into_iter()
        .flatten()
        {
            if len != self.faces.len() {
                return Err(MeshError::AttributeLength { expected: self.faces.len(), got: len });
            }
        }
        Ok(())
    }

    /// Bounding-box diagonal length.
    pub fn bbox_diagonal(&self) -> f64 {
        crate::geom::bounding_box(&self.vertices)
            .map(|(lo, hi)| (hi - lo).norm())
            .unwrap_or(0.0)
    }

    /// Copies faces and vertices of another mesh into this one.
    pub fn append(&mut self, other: &TriMesh) {
        let offset = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]));
    }
}

#[cfg(test)]
mod tests {
    use super::primitives::{cube, cylinder, icosphere};
    use super::*;

    fn triangle() -> TriMesh {
        TriMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            vec![[0, 1, 2]],
        )
    }

    #[test]
    fn face_geometry_examples() {
        let g = triangle().face_geometry(0).unwrap();
        assert!((g.centroid - Vec3::new(1.0 / 3.0, 1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert_eq!(g.normal, Vec3::z());
        assert_eq!(g.area, 0.5);
        let mut rev = triangle();
        rev.faces[0] = [0, 2, 1];
        assert_eq!(rev.face_geometry(0).unwrap().normal, -Vec3::z());
        let line = TriMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0], vec![[0, 1, 2]]);
        assert!(matches!(line.face_geometry(0), Err(MeshError::DegenerateFace(0))));
    }

    #[test]
    fn closed_primitives_are_valid() {
        for m in [icosphere(1.0, 2), cube(2.0, 3), cylinder(1.0, 10.0, 16, 8)] {
            m.validate().unwrap();
            assert!(m.is_closed());
            assert_eq!(m.euler_characteristic(), 2);
            assert_eq!(m.component_count(), 1);
            assert!(m.signed_volume() > 0.0);
        }
    }

    #[test]
    fn cube_volume_and_area() {
        let c = cube(2.0, 4);
        assert!((c.signed_volume() - 8.0).abs() < 1e-12);
        assert!((c.surface_area() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn validation_failures() {
        let mut m = triangle();
        m.faces[0] = [0, 1, 5];
        assert!(matches!(m.validate(), Err(MeshError::IndexOutOfRange { .. })));
        m.faces[0] = [0, 1, 1];
        assert!(matches!(m.validate(), Err(MeshError::RepeatedVertex(0))));
        let mut m = triangle();
        m.faces.push([0, 1, 2]);
        m.vertices.push(Vec3::z());
        assert!(matches!(m.validate(), Err(MeshError::InconsistentWinding(..))));
        let mut m = triangle();
        m.face_branch = Some(vec![0, 0]);
        assert!(matches!(m.validate(), Err(MeshError::AttributeLength { .. })));
    }

    #[test]
    fn adjacency_and_areas() {
        let m = cube(2.0, 1);
        let adj = m.face_adjacency();
        assert!(adj.iter().all(|a| a.len() == 3));
        let total: f64 = m.one_ring_areas().iter().sum();
        assert!((total - 3.0 * m.surface_area()).abs() < 1e-12);
    }
}
