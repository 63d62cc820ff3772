//! Bronchial airway trees: volume-filling generation inside lung regions,
//! morphometric validation, generation probability maps, tubular surface
//! meshes and simulated airway narrowing by constrained Laplacian contraction.
//!
//! All lengths are millimetres. Points and directions use
//! [`nalgebra::Vector3<f64>`] (re-exported as [`Vec3`]).

pub mod constrict;
pub mod format;
pub mod generator;
pub mod geom;
pub mod linalg;
pub mod mesh;
pub mod probmap;
pub mod rng;
pub mod tree;
pub mod volume;

pub use geom::Vec3;
pub use tree::{AirwayTree, Branch, BranchId, Node, NodeId, TreeError};
