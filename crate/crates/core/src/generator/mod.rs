//! Volume-filling branching: grows a seed tree into a host volume, then
//! assigns airway diameters.

mod diameter;
mod grow;
mod phantom;
mod split;
mod vfb;

pub use diameter::{
    assign_diameters, flow_split_diameters, kamiya_angle_residual, power_law_diameter,
    DiameterConfig, DiameterMode,
};
pub use grow::grow_branch;
pub use phantom::phantom_seed_tree;
pub use split::{center_of_mass, pca_split_plane, split_points, SplitPlane};
pub use vfb::{generate, GeneratorConfig};

use thiserror::Error;

use crate::tree::TreeError;
use crate::volume::VolumeError;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("degenerate point spread (largest variance {0:.3e})")]
    DegenerateSpread(f64),
    #[error("growth target coincides with the branch start")]
    ZeroLengthCandidate,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no distal branch of the seed tree ends inside the volume")]
    NoDistalInside,
    #[error("angle {0}° too close to zero for the sine relation")]
    DegenerateAngle(f64),
    #[error(transparent)]
    Volume(#[from] VolumeError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}
