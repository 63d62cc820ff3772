use crate::geom::Vec3;
use crate::linalg::CsrMatrix;

use super::{MeshError, TriMesh};

/// Cotangents are clamped to this magnitude.
pub const COT_CLAMP: f64 = 1e4;

/// Cotangent Laplacian: `L_ij = cot α_ij + cot β_ij` for each edge and
/// `L_ii = −Σ_j L_ij`, so `(L V)_i` approximates the inward curvature normal.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianOperator {
    pub matrix: CsrMatrix,
}

impl LaplacianOperator {
    pub fn apply(&self, positions: &[Vec3]) -> Vec<Vec3> {
        (0..self.matrix.rows())
            .map(|i| {
                let (cols, vals) = self.matrix.row(i);
                cols.iter().zip(vals).map(|(&j, &w)| positions[j] * w).sum()
            })
            .collect()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.matrix.row(i).1.iter().sum()
    }
}

fn cotangent(apex: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let u = a - apex;
    let v = b - apex;
    let sin = u.cross(&v).norm();
    let cos = u.dot(&v);
    if sin == 0.0 {
        return if cos >= 0.0 { COT_CLAMP } else { -COT_CLAMP };
    }
    (cos / sin).clamp(-COT_CLAMP, COT_CLAMP)
}

pub fn cotangent_laplacian(mesh: &TriMesh) -> Result<LaplacianOperator, MeshError> {
    for (&(a, b), faces) in &mesh.edge_faces() {
        if faces.len() > 2 {
            return Err(MeshError::NonManifoldEdge(a, b));
        }
    }
    let n = mesh.vertices.len();
    let mut triplets = Vec::with_capacity(mesh.faces.len() * 12);
    for tri in &mesh.faces {
        for k in 0..3 {
            let (apex, i, j) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let w = cotangent(&mesh.vertices[apex], &mesh.vertices[i], &mesh.vertices[j]);
            triplets.push((i, j, w));
            triplets.push((j, i, w));
            triplets.push((i, i, -w));
            triplets.push((j, j, -w));
        }
    }
    Ok(LaplacianOperator {
        matrix: CsrMatrix::from_triplets(n, n, &triplets),
    })
}

/// Sorted one-ring vertex neighbours.
pub fn uniform_neighbors(mesh: &TriMesh) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); mesh.vertices.len()];
    for tri in &mesh.faces {
        for k in 0..3 {
            out[tri[k]].push(tri[(k + 1) % 3]);
            out[tri[k]].push(tri[(k + 2) % 3]);
        }
    }
    for n in &mut out {
        n.sort_unstable();
        n.dedup();
    }
    out
}

/// Taubin λ|μ smoothing with uniform weights. Boundary vertices stay fixed.
pub fn taubin_smooth(mesh: &TriMesh, lambda: f64, mu: f64, iterations: usize) -> Result<TriMesh, MeshError> {
    taubin_smooth_masked(mesh, lambda, mu, iterations, &vec![true; mesh.vertices.len()])
}

/// [`taubin_smooth`] restricted to vertices with `movable[v]`.
pub fn taubin_smooth_masked(
    mesh: &TriMesh,
    lambda: f64,
    mu: f64,
    iterations: usize,
    movable: &[bool],
) -> Result<TriMesh, MeshError> {
    if !(lambda >= 0.0 && (lambda == 0.0 || mu < -lambda)) {
        return Err(MeshError::InvalidParameter(format!(
            "taubin pair requires lambda >= 0 and mu < -lambda (got {lambda}, {mu})"
        )));
    }
    let neighbors = uniform_neighbors(mesh);
    let boundary = mesh.boundary_vertices();
    let active: Vec<usize> = (0..mesh.vertices.len())
        .filter(|&v| movable[v] && !boundary[v] && !neighbors[v].is_empty())
        .collect();
    let mut out = mesh.clone();
    if lambda == 0.0 {
        return Ok(out);
    }
    let step = |positions: &mut Vec<Vec3>, factor: f64| {
        let delta: Vec<Vec3> = active
            .iter()
            .map(|&v| {
                let nb = &neighbors[v];
                let mean = nb.iter().map(|&u| positions[u]).sum::<Vec3>() / nb.len() as f64;
                (mean - positions[v]) * factor
            })
            .collect();
        for (&v, d) in active.iter().zip(delta) {
            positions[v] += d;
        }
    };
    for _ in 0..iterations {
        step(&mut out.vertices, lambda);
        step(&mut out.vertices, mu);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::{flat_grid, icosphere};

    #[test]
    fn rows_sum_to_zero_and_symmetric() {
        let m = icosphere(1.0, 2);
        let l = cotangent_laplacian(&m).unwrap();
        for i in 0..m.vertices.len() {
            assert!(l.row_sum(i).abs() < 1e-9);
            let (cols, vals) = l.matrix.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                assert!((v - l.matrix.get(j, i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_interior_has_zero_curvature() {
        let g = flat_grid(6, 0.7);
        let l = cotangent_laplacian(&g).unwrap();
        let delta = l.apply(&g.vertices);
        let boundary = g.boundary_vertices();
        for (v, d) in delta.iter().enumerate() {
            if !boundary[v] {
                assert!(d.norm() < 1e-8, "{v}: {d:?}");
            }
        }
    }

    #[test]
    fn sphere_curvature_points_inward() {
        let s = icosphere(1.0, 3);
        let delta = cotangent_laplacian(&s).unwrap().apply(&s.vertices);
        let inward = delta.iter().zip(&s.vertices).filter(|(d, v)| d.dot(&-**v) > 0.0).count();
        assert!(inward as f64 >= 0.99 * s.vertices.len() as f64);
    }

    #[test]
    fn taubin_properties() {
        let s = icosphere(1.0, 3);
        assert_eq!(taubin_smooth(&s, 0.0, -0.53, 5).unwrap(), s);
        let smoothed = taubin_smooth(&s, 0.5, -0.53, 10).unwrap();
        let v0 = s.signed_volume();
        assert!((smoothed.signed_volume() - v0).abs() / v0 < 0.02);
        assert_eq!(smoothed.faces, s.faces);
        let g = flat_grid(5, 1.0);
        let g2 = taubin_smooth(&g, 0.5, -0.53, 10).unwrap();
        for (a, b) in g.vertices.iter().zip(&g2.vertices) {
            assert!((a - b).norm() < 1e-9);
        }
        assert!(taubin_smooth(&g, 0.5, -0.4, 1).is_err());
    }
}
