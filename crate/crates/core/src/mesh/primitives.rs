//! Closed and open reference meshes.

use std::collections::HashMap;
use std::f64::consts::TAU;

use crate::geom::Vec3;

use super::TriMesh;

/// Branch label of lateral cylinder faces; caps are labelled 1 (bottom) and 2 (top).
pub const CYLINDER_LATERAL: usize = 0;

/// Closed cylinder along +z from `z = 0` to `z = length`, `segments` sides and
/// `rings` axial subdivisions, with fan caps around centre vertices.
pub fn cylinder(radius: f64, length: f64, segments: usize, rings: usize) -> TriMesh {
    assert!(segments >= 3 && rings >= 1);
    let mut vertices = Vec::with_capacity((rings + 1) * segments + 2);
    for i in 0..=rings {
        let z = length * i as f64 / rings as f64;
        for k in 0..segments {
            let phi = TAU * k as f64 / segments as f64;
            vertices.push(Vec3::new(radius * phi.cos(), radius * phi.sin(), z));
        }
    }
    let at = |i: usize, k: usize| i * segments + k % segments;
    let mut faces = Vec::new();
    let mut labels = Vec::new();
    for i in 0..rings {
        for k in 0..segments {
            let (a, b, c, d) = (at(i, k), at(i, k + 1), at(i + 1, k + 1), at(i + 1, k));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
            labels.extend([CYLINDER_LATERAL; 2]);
        }
    }
    let bottom = vertices.len();
    vertices.push(Vec3::zeros());
    let top = vertices.len();
    vertices.push(Vec3::new(0.0, 0.0, length));
    for k in 0..segments {
        faces.push([bottom, at(0, k + 1), at(0, k)]);
        labels.push(1);
    }
    for k in 0..segments {
        faces.push([top, at(rings, k), at(rings, k + 1)]);
        labels.push(2);
    }
    let mut mesh = TriMesh::new(vertices, faces);
    mesh.face_branch = Some(labels);
    mesh
}

/// Subdivided icosahedron projected onto a sphere about the origin.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    TriMesh::new(vertices, faces)
}

/// Axis-aligned cube centred at the origin, each side split into `n × n` quads.
pub fn cube(side: f64, n: usize) -> TriMesh {
    assert!(n >= 1);
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vertex = |g: [usize; 3], vertices: &mut Vec<Vec3>| -> usize {
        *index.entry(g).or_insert_with(|| {
            let c = |i: usize| side * (i as f64 / n as f64 - 0.5);
            vertices.push(Vec3::new(c(g[0]), c(g[1]), c(g[2])));
            vertices.len() - 1
        })
    };
    let mut faces = Vec::new();
    for axis in 0..3 {
        let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
        for level in [0, n] {
            let outward = if level == 0 { -1.0 } else { 1.0 };
            for i in 0..n {
                for j in 0..n {
                    let mut quad = [0usize; 4];
                    for (q, (di, dj)) in [(0, 0), (1, 0), (1, 1), (0, 1)].into_iter().enumerate() {
                        let mut g = [0usize; 3];
                        g[axis] = level;
                        g[u] = i + di;
                        g[w] = j + dj;
                        quad[q] = vertex(g, &mut vertices);
                    }
                    let [a, b, c, d] = quad;
                    let normal = (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a]));
                    if normal[axis] * outward > 0.0 {
                        faces.push([a, b, c]);
                        faces.push([a, c, d]);
                    } else {
                        faces.push([a, c, b]);
                        faces.push([a, d, c]);
                    }
                }
            }
        }
    }
    TriMesh::new(vertices, faces)
}

/// Open planar grid in `z = 0` with `n × n` quads of side `spacing`.
pub fn flat_grid(n: usize, spacing: f64) -> TriMesh {
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Vec3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    let at = |i: usize, j: usize| j * (n + 1) + i;
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            faces.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            faces.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        let s = icosphere(1.0, 3);
        assert_eq!(s.faces.len(), 20 * 64);
        assert_eq!(s.vertices.len(), 642);
        assert!(s.vertices.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cylinder_labels() {
        let c = cylinder(1.0, 10.0, 32, 30);
        let labels = c.face_branch.as_ref().unwrap();
        assert_eq!(labels.len(), c.faces.len());
        assert_eq!(labels.iter().filter(|&&l| l == CYLINDER_LATERAL).count(), 2 * 32 * 30);
        assert_eq!(c.faces.len(), 2 * 32 * 30 + 64);
    }

    #[test]
    fn flat_grid_is_open() {
        let g = flat_grid(4, 0.5);
        g.validate().unwrap();
        assert_eq!(g.boundary_edge_count(), 16);
        assert_eq!(g.euler_characteristic(), 1);
    }
}
