//! Text skeleton format and per-branch attribute CSV.
//!
//! Skeleton files are whitespace separated, one record per line:
//!
//! ```text
//! # comment
//! N <id> <x> <y> <z>
//! E <tail> <head> [diameter_mm]
//! R <root_id>
//! ```
//!
//! The optional fourth field on `E` lines carries the branch diameter.
//! Without an `R` record the root is found with [`detect_root`](super::detect_root).

use std::fmt::Write as _;
use std::path::Path;

use crate::format::{g9, g9_opt};
use crate::geom::Vec3;

use super::order::{branch_angles, compute_horsfield_orders, compute_strahler_orders};
use super::{detect_root, AirwayTree, NodeId, TreeError};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Skeleton {
    pub nodes: Vec<(NodeId, Vec3)>,
    pub edges: Vec<(NodeId, NodeId, Option<f64>)>,
    pub root: Option<NodeId>,
}

impl Skeleton {
    pub fn parse(text: &str) -> Result<Self, TreeError> {
        let mut sk = Skeleton::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let err = |message: String| TreeError::Parse { line, message };
            let id = |s: &str| -> Result<NodeId, TreeError> {
                s.parse().map_err(|_| err(format!("invalid node id `{s}`")))
            };
            let num = |s: &str| -> Result<f64, TreeError> {
                s.parse().map_err(|_| err(format!("invalid number `{s}`")))
            };
            match (fields[0], fields.len()) {
                ("N", 5) => sk.nodes.push((
                    id(fields[1])?,
                    Vec3::new(num(fields[2])?, num(fields[3])?, num(fields[4])?),
                )),
                ("E", 3) => sk.edges.push((id(fields[1])?, id(fields[2])?, None)),
                ("E", 4) => {
                    let d = num(fields[3])?;
                    if !(d > 0.0 && d.is_finite()) {
                        return Err(err(format!("diameter must be positive, got {d}")));
                    }
                    sk.edges.push((id(fields[1])?, id(fields[2])?, Some(d)));
                }
                ("R", 2) => {
                    if sk.root.replace(id(fields[1])?).is_some() {
                        return Err(err("duplicate R record".into()));
                    }
                }
                (tag, n) => {
                    return Err(err(format!("unrecognised record `{tag}` with {n} fields")));
                }
            }
        }
        Ok(sk)
    }

    pub fn read(path: &Path) -> Result<Self, TreeError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn undirected_edges(&self) -> Vec<(NodeId, NodeId)> {
        self.edges.iter().map(|&(a, b, _)| (a, b)).collect()
    }

    /// Builds the tree, detecting the root when no `R` record is present.
    pub fn into_tree(self) -> Result<AirwayTree, TreeError> {
        let root = match self.root {
            Some(r) => r,
            None => detect_root(&self.nodes, &self.undirected_edges())?,
        };
        AirwayTree::build_with_diameters(&self.nodes, &self.edges, root)
    }
}

pub fn read_tree(path: &Path) -> Result<AirwayTree, TreeError> {
    Skeleton::read(path)?.into_tree()
}

pub fn skeleton_text(tree: &AirwayTree) -> String {
    let mut out = String::new();
    for n in tree.nodes() {
        let p = n.position;
        writeln!(out, "N {} {} {} {}", n.id, g9(p.x), g9(p.y), g9(p.z)).unwrap();
    }
    for b in tree.branches() {
        match b.diameter {
            Some(d) => writeln!(out, "E {} {} {}", b.tail, b.head, g9(d)).unwrap(),
            None => writeln!(out, "E {} {}", b.tail, b.head).unwrap(),
        }
    }
    writeln!(out, "R {}", tree.root()).unwrap();
    out
}

pub fn write_tree(tree: &AirwayTree, path: &Path) -> Result<(), TreeError> {
    std::fs::write(path, skeleton_text(tree))?;
    Ok(())
}

pub const ATTRIBUTE_HEADER: &str =
    "branch_id,generation,horsfield,strahler,length_mm,diameter_mm,angle_deg";

/// Per-branch attribute table; empty fields for unset diameter and root angle.
pub fn attribute_csv(tree: &AirwayTree) -> String {
    let horsfield = compute_horsfield_orders(tree);
    let strahler = compute_strahler_orders(tree);
    let angles = branch_angles(tree);
    let mut out = String::from(ATTRIBUTE_HEADER);
    out.push('\n');
    for b in tree.branches() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            b.id,
            b.generation,
            horsfield[b.id],
            strahler[b.id],
            g9(tree.length(b.id)),
            g9_opt(b.diameter),
            g9_opt(angles[b.id]),
        )
        .unwrap();
    }
    out
}
