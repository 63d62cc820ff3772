//! ASCII OBJ meshes and the per-face attribute sidecar.

use std::fmt::Write as _;
use std::path::Path;

use crate::format::{g9, g9_opt};
use crate::geom::Vec3;

use super::{MeshError, TriMesh};

pub const FACE_ATTRIBUTE_HEADER: &str = "face_id,branch_id,sdf";

pub fn obj_text(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", g9(v.x), g9(v.y), g9(v.z)).unwrap();
    }
    for [a, b, c] in &mesh.faces {
        writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1).unwrap();
    }
    out
}

pub fn write_obj(mesh: &TriMesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, obj_text(mesh))?;
    Ok(())
}

/// Parses `v` and `f` records. Face entries may carry `/`-separated texture
/// and normal indices, which are ignored; negative indices count from the end.
pub fn parse_obj(text: &str) -> Result<TriMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| MeshError::Parse { line, message };
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad coordinate `{t}`"))))
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 || coords.iter().any(|c| !c.is_finite()) {
                    return Err(err("vertex needs three finite coordinates".into()));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(err(format!("face has {} vertices; only triangles are supported", refs.len())));
                }
                let mut tri = [0usize; 3];
                for (slot, r) in tri.iter_mut().zip(&refs) {
                    let head = r.split('/').next().unwrap_or("");
                    let idx: i64 = head.parse().map_err(|_| err(format!("bad face index `{r}`")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        -1
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(err(format!("face index {idx} out of range")));
                    }
                    *slot = resolved as usize;
                }
                faces.push(tri);
            }
            _ => {}
        }
    }
    Ok(TriMesh::new(vertices, faces))
}

pub fn read_obj(path: &Path) -> Result<TriMesh, MeshError> {
    parse_obj(&std::fs::read_to_string(path)?)
}

/// `face_id,branch_id,sdf` rows; missing attributes are empty fields.
pub fn face_attribute_csv(mesh: &TriMesh) -> String {
    let mut out = String::from(FACE_ATTRIBUTE_HEADER);
    out.push('\n');
    for f in 0..mesh.faces.len() {
        let branch = mesh
            .face_branch
            .as_ref()
            .map(|b| b[f].to_string())
            .unwrap_or_default();
        let sdf = g9_opt(mesh.face_scalar.as_ref().map(|s| s[f]).filter(|v| v.is_finite()));
        writeln!(out, "{f},{branch},{sdf}").unwrap();
    }
    out
}

pub fn write_face_attributes(mesh: &TriMesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, face_attribute_csv(mesh))?;
    Ok(())
}

/// Per-face branch ids and SDF values; an empty SDF field reads as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceAttributes {
    pub branch: Vec<Option<usize>>,
    pub sdf: Vec<Option<f64>>,
}

pub fn parse_face_attributes(text: &str, face_count: usize) -> Result<FaceAttributes, MeshError> {
    let mut branch = vec![None; face_count];
    let mut sdf = vec![None; face_count];
    let mut seen = vec![false; face_count];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| MeshError::Parse { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || (i == 0 && trimmed == FACE_ATTRIBUTE_HEADER) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        }
        let face: usize = fields[0].parse().map_err(|_| err(format!("bad face id `{}`", fields[0])))?;
        if face >= face_count {
            return Err(err(format!("face id {face} out of range ({face_count} faces)")));
        }
        if std::mem::replace(&mut seen[face], true) {
            return Err(err(format!("face id {face} repeated")));
        }
        if !fields[1].is_empty() {
            branch[face] = Some(fields[1].parse().map_err(|_| err(format!("bad branch id `{}`", fields[1])))?);
        }
        if !fields[2].is_empty() {
            sdf[face] = Some(fields[2].parse().map_err(|_| err(format!("bad sdf `{}`", fields[2])))?);
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(MeshError::Parse {
            line: 0,
            message: format!("no row for face {missing}"),
        });
    }
    Ok(FaceAttributes { branch, sdf })
}

pub fn read_face_attributes(path: &Path, face_count: usize) -> Result<FaceAttributes, MeshError> {
    parse_face_attributes(&std::fs::read_to_string(path)?, face_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::cylinder;

    #[test]
    fn triangle_round_trip() {
        let m = TriMesh::new(
            vec![Vec3::new(0.1, -2.5, 3.0), Vec3::new(1.0 / 3.0, 0.0, 0.0), Vec3::y()],
            vec![[0, 1, 2]],
        );
        let back = parse_obj(&obj_text(&m)).unwrap();
        assert_eq!(back.faces, m.faces);
        for (a, b) in back.vertices.iter().zip(&m.vertices) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn obj_conventions() {
        let quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(matches!(parse_obj(quad), Err(MeshError::Parse { line: 5, .. })));
        let m = parse_obj("# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2//2 -1\n").unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2]]);
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
        assert!(parse_obj("v 0 0\n").is_err());
    }

    #[test]
    fn attributes_round_trip() {
        let mut m = cylinder(1.0, 2.0, 8, 2);
        let n = m.faces.len();
        m.face_scalar = Some((0..n).map(|f| if f % 3 == 0 { f64::NAN } else { f as f64 * 0.25 }).collect());
        let text = face_attribute_csv(&m);
        assert_eq!(text.lines().count(), n + 1);
        let attrs = parse_face_attributes(&text, n).unwrap();
        for f in 0..n {
            assert_eq!(attrs.branch[f], Some(m.face_branch.as_ref().unwrap()[f]));
            assert_eq!(attrs.sdf[f], if f % 3 == 0 { None } else { Some(f as f64 * 0.25) });
        }
        assert!(parse_face_attributes("face_id,branch_id,sdf\n0,1,\n", 2).is_err());
    }
}
