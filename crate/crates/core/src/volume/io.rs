//! Header + raw voxel files.
//!
//! The header is a small text file:
//!
//! ```text
//! dims 64 64 48
//! spacing 1 1 1.25
//! origin -32 -32 0
//! dtype u8
//! ```
//!
//! Lines starting with `#` are comments. Voxel data lives in a companion
//! file with the same stem and a `.raw` extension: little-endian, x varying
//! fastest, then y, then z. Header floats use the shortest representation
//! that round-trips exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::geom::Vec3;

use super::{Grid, VolumeError, VoxelMask};

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeHeader {
    pub grid: Grid,
    pub dtype: String,
    /// `# key value` comment lines, preserved in order.
    pub comments: Vec<(String, String)>,
}

/// Companion raw path for a header path.
pub fn raw_path(header: &Path) -> PathBuf {
    header.with_extension("raw")
}

pub fn header_text(grid: &Grid, dtype: &str, comments: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in comments {
        writeln!(out, "# {k} {v}").unwrap();
    }
    let [nx, ny, nz] = grid.dims;
    let (s, o) = (grid.spacing, grid.origin);
    writeln!(out, "dims {nx} {ny} {nz}").unwrap();
    writeln!(out, "spacing {} {} {}", s.x, s.y, s.z).unwrap();
    writeln!(out, "origin {} {} {}", o.x, o.y, o.z).unwrap();
    writeln!(out, "dtype {dtype}").unwrap();
    out
}

pub fn parse_header(text: &str) -> Result<VolumeHeader, VolumeError> {
    let mut dims = None;
    let mut spacing = None;
    let mut origin = None;
    let mut dtype = None;
    let mut comments = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| VolumeError::Header { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(c) = trimmed.strip_prefix('#') {
            let mut parts = c.trim().splitn(2, char::is_whitespace);
            if let (Some(k), Some(v)) = (parts.next(), parts.next()) {
                comments.push((k.to_string(), v.trim().to_string()));
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let triple_f = || -> Result<Vec3, VolumeError> {
            if fields.len() != 4 {
                return Err(err(format!("`{}` needs three values", fields[0])));
            }
            let v: Result<Vec<f64>, _> = fields[1..].iter().map(|s| s.parse::<f64>()).collect();
            let v = v.map_err(|e| err(e.to_string()))?;
            Ok(Vec3::new(v[0], v[1], v[2]))
        };
        match fields[0] {
            "dims" => {
                if fields.len() != 4 {
                    return Err(err("`dims` needs three values".into()));
                }
                let v: Result<Vec<usize>, _> = fields[1..].iter().map(|s| s.parse::<usize>()).collect();
                let v = v.map_err(|e| err(e.to_string()))?;
                dims = Some([v[0], v[1], v[2]]);
            }
            "spacing" => spacing = Some(triple_f()?),
            "origin" => origin = Some(triple_f()?),
            "dtype" => {
                if fields.len() != 2 {
                    return Err(err("`dtype` needs one value".into()));
                }
                dtype = Some(fields[1].to_string());
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    let missing = |key: &str| VolumeError::Header {
        line: 0,
        message: format!("missing `{key}`"),
    };
    let grid = Grid::new(
        dims.ok_or_else(|| missing("dims"))?,
        spacing.ok_or_else(|| missing("spacing"))?,
        origin.ok_or_else(|| missing("origin"))?,
    )?;
    Ok(VolumeHeader {
        grid,
        dtype: dtype.ok_or_else(|| missing("dtype"))?,
        comments,
    })
}

pub fn read_header(path: &Path) -> Result<VolumeHeader, VolumeError> {
    parse_header(&std::fs::read_to_string(path)?)
}

fn read_raw(header_path: &Path, header: &VolumeHeader, width: usize) -> Result<Vec<u8>, VolumeError> {
    let bytes = std::fs::read(raw_path(header_path))?;
    let expected = header.grid.voxel_count() * width;
    if bytes.len() != expected {
        return Err(VolumeError::RawSize {
            expected,
            got: bytes.len(),
        });
    }
    Ok(bytes)
}

fn check_dtype(header: &VolumeHeader, expected: &'static str) -> Result<(), VolumeError> {
    if header.dtype != expected {
        return Err(VolumeError::Dtype {
            expected,
            found: header.dtype.clone(),
        });
    }
    Ok(())
}

pub fn write_mask(mask: &VoxelMask, header_path: &Path) -> Result<(), VolumeError> {
    std::fs::write(header_path, header_text(&mask.grid, "u8", &[]))?;
    std::fs::write(raw_path(header_path), &mask.values)?;
    Ok(())
}

pub fn read_mask(header_path: &Path) -> Result<VoxelMask, VolumeError> {
    let header = read_header(header_path)?;
    check_dtype(&header, "u8")?;
    let values = read_raw(header_path, &header, 1)?;
    VoxelMask::new(header.grid, values)
}

pub fn write_f32(
    grid: &Grid,
    values: &[f32],
    comments: &[(String, String)],
    header_path: &Path,
) -> Result<(), VolumeError> {
    if values.len() != grid.voxel_count() {
        return Err(VolumeError::ValueCount {
            expected: grid.voxel_count(),
            got: values.len(),
        });
    }
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(header_path, header_text(grid, "f32", comments))?;
    std::fs::write(raw_path(header_path), bytes)?;
    Ok(())
}

pub fn read_f32(header_path: &Path) -> Result<(VolumeHeader, Vec<f32>), VolumeError> {
    let header = read_header(header_path)?;
    check_dtype(&header, "f32")?;
    let bytes = read_raw(header_path, &header, 4)?;
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((header, values))
}
