//! Rooted airway-tree model, ordering schemes and morphometry.

mod model;
pub mod io;
pub mod morphometry;
pub mod order;
pub mod root;

pub use model::{AirwayTree, Branch, BranchId, Node, NodeId};
pub use morphometry::{
    morphometry, morphometry_summary, GenerationStats, MorphometryError, MorphometrySummary,
    OrderStats,
};
pub use order::{branching_angle, compute_generations, compute_horsfield_orders, compute_strahler_orders};
pub use root::detect_root;

#[cfg(test)]
pub(crate) use model::fixtures;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("tree has no nodes")]
    Empty,
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("node {0} has a non-finite position")]
    NonFinitePosition(NodeId),
    #[error("edge references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("edge {0} -> {0} is a self loop")]
    SelfLoop(NodeId),
    #[error("edge {0} -> {1} has zero length")]
    ZeroLength(NodeId, NodeId),
    #[error("root node {0} is not in the graph")]
    UnknownRoot(NodeId),
    #[error("cycle detected through node {0}")]
    Cycle(NodeId),
    #[error("graph is disconnected: {reached} of {total} nodes reachable from the root")]
    Disconnected { reached: usize, total: usize },
    #[error("root node {node} has {degree} incident edges, expected exactly one")]
    RootDegree { node: NodeId, degree: usize },
    #[error("graph has no leaf node")]
    NoLeaf,
    #[error("zero-length direction vector")]
    ZeroVector,
    #[error("branch {0} has no diameter")]
    MissingDiameter(BranchId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
