//! Small vector helpers shared across modules.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Closest point parameter `t ∈ [0, 1]` on segment `a→b` to `p`.
pub fn segment_parameter(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return 0.0;
    }
    ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
}

/// Squared Euclidean distance from `p` to segment `a→b`.
pub fn point_segment_distance_squared(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let t = segment_parameter(p, a, b);
    (p - (a + (b - a) * t)).norm_squared()
}

pub fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    point_segment_distance_squared(p, a, b).sqrt()
}

/// Angle between two nonzero vectors in degrees, `None` if either is zero.
pub fn angle_between_deg(u: &Vec3, v: &Vec3) -> Option<f64> {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 || !nu.is_finite() || !nv.is_finite() {
        return None;
    }
    let c = (u.dot(v) / (nu * nv)).clamp(-1.0, 1.0);
    Some(c.acos().to_degrees())
}

/// Some unit vector orthogonal to `v` (which must be nonzero).
pub fn any_orthogonal(v: &Vec3) -> Vec3 {
    let a = v.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    v.cross(&axis).normalize()
}

pub fn is_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Axis-aligned bounding box of a point set, `None` when empty.
pub fn bounding_box<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<(Vec3, Vec3)> {
    let mut it = points.into_iter();
    let first = *it.next()?;
    Some(it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))))
}
