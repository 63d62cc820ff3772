use crate::geom::{self, Vec3};

use super::{GeneratorConfig, GeneratorError};

/// Endpoint of a new branch from `seed_endpoint` toward `target_centroid`.
///
/// The branch covers `branch_fraction` of the distance to the centroid. If it
/// deviates from `parent_direction` by more than `angle_limit_deg`, its
/// direction is rotated toward the parent, in the plane the two span, until
/// the angle equals the limit; the length is kept.
pub fn grow_branch(
    seed_endpoint: &Vec3,
    parent_direction: &Vec3,
    target_centroid: &Vec3,
    config: &GeneratorConfig,
) -> Result<Vec3, GeneratorError> {
    let candidate = (target_centroid - seed_endpoint) * config.branch_fraction;
    let length = candidate.norm();
    if length == 0.0 || !length.is_finite() {
        return Err(GeneratorError::ZeroLengthCandidate);
    }
    let parent = parent_direction
        .try_normalize(0.0)
        .ok_or(GeneratorError::ZeroLengthCandidate)?;
    let dir = candidate / length;
    let limit = config.angle_limit_deg.to_radians();
    let cos_angle = dir.dot(&parent).clamp(-1.0, 1.0);
    if cos_angle.acos() <= limit {
        return Ok(seed_endpoint + candidate);
    }
    let across = dir - parent * cos_angle;
    let across = across
        .try_normalize(1e-12)
        .unwrap_or_else(|| geom::any_orthogonal(&parent));
    let clamped = parent * limit.cos() + across * limit.sin();
    Ok(seed_endpoint + clamped * length)
}
