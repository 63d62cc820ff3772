use rayon::prelude::*;

use crate::geom::Vec3;

use super::{KdTree, MeshError, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralConfig {
    /// Centroid-distance scale in mm; `None` uses the mean edge length.
    pub sigma_m: Option<f64>,
    /// Normal-difference scale.
    pub sigma_n: f64,
    /// Number of times the normalised weight matrix is applied to the normals.
    pub zeta: u32,
    /// Neighbourhood size, the face itself included.
    pub k_neighbors: usize,
    pub iterations: usize,
}

impl Default for BilateralConfig {
    fn default() -> Self {
        Self {
            sigma_m: None,
            sigma_n: 0.35,
            zeta: 2,
            k_neighbors: 12,
            iterations: 1,
        }
    }
}

/// Bilateral filtering of face normals followed by vertex updates.
///
/// Per iteration the `k` nearest face centroids of each face are weighted by
/// `exp(−|Δm|²/2σ_m²) · exp(−|Δn|²/2σ_n²)`, rows are normalised, and the
/// resulting operator is applied `ζ` times to the normals. Each vertex then
/// moves by the mean, over its incident faces, of the centroid offset
/// projected onto the filtered normal.
pub fn bilateral_normal_filter(mesh: &TriMesh, config: &BilateralConfig) -> Result<TriMesh, MeshError> {
    bilateral_normal_filter_masked(mesh, config, &vec![true; mesh.vertices.len()])
}

/// [`bilateral_normal_filter`] with only vertices flagged in `movable` updated.
pub fn bilateral_normal_filter_masked(
    mesh: &TriMesh,
    config: &BilateralConfig,
    movable: &[bool],
) -> Result<TriMesh, MeshError> {
    if config.k_neighbors == 0 || config.k_neighbors >= mesh.faces.len() {
        return Err(MeshError::InvalidParameter(format!(
            "k_neighbors must lie in 1..{} (got {})",
            mesh.faces.len(),
            config.k_neighbors
        )));
    }
    let sigma_m = config.sigma_m.unwrap_or_else(|| mesh.mean_edge_length());
    if !(sigma_m > 0.0 && config.sigma_n > 0.0) {
        return Err(MeshError::InvalidParameter("bilateral sigmas must be positive".into()));
    }
    let incident = mesh.vertex_faces();
    let mut out = mesh.clone();
    for _ in 0..config.iterations {
        let geometry = out.face_geometries()?;
        let centroids: Vec<Vec3> = geometry.iter().map(|g| g.centroid).collect();
        let normals: Vec<Vec3> = geometry.iter().map(|g| g.normal).collect();
        let tree = KdTree::new(centroids.clone());
        let rows: Vec<Vec<(usize, f64)>> = (0..centroids.len())
            .into_par_iter()
            .map(|i| {
                let near = tree.nearest(&centroids[i], config.k_neighbors);
                let mut row: Vec<(usize, f64)> = near
                    .into_iter()
                    .map(|j| {
                        let dm = (centroids[i] - centroids[j]).norm_squared();
                        let dn = (normals[i] - normals[j]).norm_squared();
                        let w = (-dm / (2.0 * sigma_m * sigma_m)).exp()
                            * (-dn / (2.0 * config.sigma_n * config.sigma_n)).exp();
                        (j, w)
                    })
                    .collect();
                let total: f64 = row.iter().map(|e| e.1).sum();
                for e in &mut row {
                    e.1 /= total;
                }
                row
            })
            .collect();
        let mut filtered = normals;
        for _ in 0..config.zeta {
            filtered = rows
                .par_iter()
                .map(|row| row.iter().map(|&(j, w)| filtered[j] * w).sum::<Vec3>())
                .collect();
        }
        for n in &mut filtered {
            *n = n.try_normalize(0.0).unwrap_or(*n);
        }
        let updated: Vec<Vec3> = (0..out.vertices.len())
            .into_par_iter()
            .map(|v| {
                let faces = &incident[v];
                if !movable[v] || faces.is_empty() {
                    return out.vertices[v];
                }
                let shift: Vec3 = faces
                    .iter()
                    .map(|&f| filtered[f] * filtered[f].dot(&(centroids[f] - out.vertices[v])))
                    .sum();
                out.vertices[v] + shift / faces.len() as f64
            })
            .collect();
        out.vertices = updated;
    }
    Ok(out)
}
