use nalgebra::{Matrix3, SymmetricEigen};

use crate::geom::Vec3;

use super::GeneratorError;

/// Plane through `point` with unit `normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlane {
    pub point: Vec3,
    pub normal: Vec3,
}

impl SplitPlane {
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        (p - self.point).dot(&self.normal)
    }
}

pub fn center_of_mass(points: &[Vec3]) -> Result<Vec3, GeneratorError> {
    if points.is_empty() {
        return Err(GeneratorError::EmptyPointSet);
    }
    Ok(points.iter().sum::<Vec3>() / points.len() as f64)
}

/// Cross products below this magnitude count as parallel.
const PARALLEL_TOLERANCE: f64 = 1e-6;

/// Splitting plane through the centroid of `points`.
///
/// With `u` the principal axis of the point spread and `d` the distal branch
/// direction, the plane normal is `d × (d × u)`: the component of `u`
/// perpendicular to the branch, so the cut crosses the longest extent of the
/// region while containing the branch direction. When `d ∥ u` the second
/// principal axis is used instead. The normal's first non-negligible
/// component is made positive.
pub fn pca_split_plane(points: &[Vec3], distal_direction: &Vec3) -> Result<SplitPlane, GeneratorError> {
    let c = center_of_mass(points)?;
    let mut cov = Matrix3::zeros();
    let mut scale2 = 0.0;
    for p in points {
        let q = p - c;
        cov += q * q.transpose();
        scale2 += p.norm_squared();
    }
    cov /= points.len() as f64;
    scale2 /= points.len() as f64;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let largest = eig.eigenvalues[order[0]];
    let trace = cov.trace();
    if largest <= 0.0 || largest < 1e-12 * trace || largest <= 1e-24 * scale2 {
        return Err(GeneratorError::DegenerateSpread(largest.max(0.0)));
    }

    let d = distal_direction.normalize();
    let axis = |k: usize| -> Vec3 { eig.eigenvectors.column(order[k]).into_owned() };
    let mut u = axis(0);
    if d.cross(&u).norm() < PARALLEL_TOLERANCE {
        u = axis(1);
    }
    let mut normal = d.cross(&d.cross(&u)).normalize();
    if let Some(first) = normal.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            normal = -normal;
        }
    }
    Ok(SplitPlane { point: c, normal })
}

/// Partitions points by side; points on the plane go to the positive side.
pub fn split_points(points: &[Vec3], plane: &SplitPlane) -> (Vec<Vec3>, Vec<Vec3>) {
    points.iter().partition(|p| plane.signed_distance(p) >= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent principal axis: power iteration on the 3×3 covariance.
    fn power_iteration_axis(points: &[Vec3]) -> Vec3 {
        let c = points.iter().sum::<Vec3>() / points.len() as f64;
        let mut m = [[0.0; 3]; 3];
        for p in points {
            let q = p - c;
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += q[i] * q[j];
                }
            }
        }
        let mut v = Vec3::new(0.3, 0.5, 0.7);
        for _ in 0..500 {
            let w = Vec3::new(
                m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
            );
            v = w.normalize();
        }
        v
    }

    fn spread_along_x() -> Vec<Vec3> {
        (0..40)
            .map(|i| {
                let t = i as f64;
                Vec3::new(t * 0.5 - 10.0, (t * 0.7).sin() * 0.8, (t * 1.3).cos() * 0.6)
            })
            .collect()
    }

    #[test]
    fn centroid_examples() {
        let c = center_of_mass(&[Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0)]).unwrap();
        assert_eq!(c, Vec3::new(1.0, 0.0, 0.0));
        let p = Vec3::new(1.5, -2.0, 7.0);
        assert_eq!(center_of_mass(&[p]).unwrap(), p);
        let corners: Vec<Vec3> = (0..8)
            .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64) * 2.0 + Vec3::repeat(3.0))
            .collect();
        assert_eq!(center_of_mass(&corners).unwrap(), Vec3::repeat(4.0));
        assert!(matches!(center_of_mass(&[]), Err(GeneratorError::EmptyPointSet)));
    }

    #[test]
    fn plane_normal_follows_principal_axis() {
        let pts = spread_along_x();
        let oracle = power_iteration_axis(&pts);
        assert!(oracle.x.abs() > 0.99);
        let plane = pca_split_plane(&pts, &Vec3::z()).unwrap();
        // expected normal: d × (d × u) with the oracle axis, sign-normalised
        let d = Vec3::z();
        let mut expected = d.cross(&d.cross(&oracle)).normalize();
        if expected.x < 0.0 {
            expected = -expected;
        }
        assert!((plane.normal - expected).norm() < 1e-8, "{plane:?} vs {expected:?}");
        assert!(plane.normal.x > 0.99);
        assert!((plane.normal.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_passes_through_centroid() {
        let pts: Vec<Vec3> = (0..6)
            .map(|i| {
                let mut v = Vec3::zeros();
                v[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
                v + Vec3::new(2.0, -1.0, 0.5)
            })
            .collect();
        let plane = pca_split_plane(&pts, &Vec3::new(1.0, 1.0, 1.0).normalize()).unwrap();
        assert!((plane.point - Vec3::new(2.0, -1.0, 0.5)).norm() < 1e-12);
        assert!(plane.signed_distance(&plane.point).abs() < 1e-12);
    }

    #[test]
    fn parallel_direction_falls_back_to_second_axis() {
        // dominant spread along z, secondary along y; distal direction along z
        let pts: Vec<Vec3> = (0..30)
            .map(|i| {
                let t = i as f64;
                Vec3::new(0.1 * (t * 0.9).sin(), 2.0 * (t * 0.37).cos(), t - 15.0)
            })
            .collect();
        let plane = pca_split_plane(&pts, &Vec3::z()).unwrap();
        assert!(plane.normal.y.abs() > 0.99, "{:?}", plane.normal);
        assert!(plane.normal.z.abs() < 1e-6);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let pts = vec![Vec3::new(0.1, 0.2, 0.3); 5];
        assert!(matches!(pca_split_plane(&pts, &Vec3::z()), Err(GeneratorError::DegenerateSpread(_))));
    }

    #[test]
    fn split_rules() {
        let plane = SplitPlane { point: Vec3::zeros(), normal: Vec3::x() };
        let pts = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(2.0, 1.0, 0.0),
            Vec3::new(-2.0, 1.0, 0.0),
        ];
        let (pos, neg) = split_points(&pts, &plane);
        assert_eq!((pos.len(), neg.len()), (2, 2));
        let (pos, neg) = split_points(&[Vec3::new(0.0, 5.0, 5.0)], &plane);
        assert_eq!((pos.len(), neg.len()), (1, 0));
        let (pos, neg) = split_points(&[], &plane);
        assert!(pos.is_empty() && neg.is_empty());
    }
}
