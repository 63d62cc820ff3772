use crate::geom::Vec3;

use super::TriMesh;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub face: usize,
    pub t: f64,
}

struct Node {
    lo: Vec3,
    hi: Vec3,
    /// Leaf when `count > 0`, covering `order[start..start + count]`;
    /// otherwise the children are nodes `start` and `right`.
    start: usize,
    count: usize,
    right: usize,
}

/// Bounding-volume hierarchy over the faces of a triangle mesh.
pub struct Bvh {
    triangles: Vec<[Vec3; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl Bvh {
    pub fn new(mesh: &TriMesh) -> Self {
        let triangles: Vec<[Vec3; 3]> = (0..mesh.faces.len()).map(|f| mesh.face_points(f)).collect();
        let centroids: Vec<Vec3> = triangles.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut bvh = Self {
            order: (0..triangles.len()).collect(),
            triangles,
            nodes: Vec::new(),
        };
        if !bvh.triangles.is_empty() {
            bvh.build(0, bvh.triangles.len(), &centroids);
        }
        bvh
    }

    fn build(&mut self, start: usize, end: usize, centroids: &[Vec3]) -> usize {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for &f in &self.order[start..end] {
            for p in &self.triangles[f] {
                lo = lo.inf(p);
                hi = hi.sup(p);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node { lo, hi, start, count: end - start, right: 0 });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let (clo, chi) = self.order[start..end].iter().fold(
            (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
            |(a, b), &f| (a.inf(&centroids[f]), b.sup(&centroids[f])),
        );
        let axis = (chi - clo).imax();
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
        });
        self.build(start, mid, centroids);
        let right = self.build(mid, end, centroids);
        let node = &mut self.nodes[id];
        node.count = 0;
        node.start = id + 1;
        node.right = right;
        id
    }

    /// Nearest intersection with `t > t_min`, ignoring face `skip`.
    /// Equal distances resolve to the lower face index.
    pub fn first_hit(&self, origin: &Vec3, dir: &Vec3, t_min: f64, skip: Option<usize>) -> Option<RayHit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<RayHit> = None;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let limit = best.map_or(f64::INFINITY, |h| h.t);
            if !slab_test(&node.lo, &node.hi, origin, &inv, limit) {
                continue;
            }
            if node.count > 0 {
                for &f in &self.order[node.start..node.start + node.count] {
                    if Some(f) == skip {
                        continue;
                    }
                    if let Some(t) = intersect(&self.triangles[f], origin, dir) {
                        if t > t_min {
                            let better = match best {
                                None => true,
                                Some(h) => t < h.t || (t == h.t && f < h.face),
                            };
                            if better {
                                best = Some(RayHit { face: f, t });
                            }
                        }
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(node.start);
            }
        }
        best
    }
}

fn slab_test(lo: &Vec3, hi: &Vec3, origin: &Vec3, inv: &Vec3, limit: f64) -> bool {
    let mut t0: f64 = 0.0;
    let mut t1 = limit;
    for a in 0..3 {
        let ta = (lo[a] - origin[a]) * inv[a];
        let tb = (hi[a] - origin[a]) * inv[a];
        let (near, far) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        // NaN from 0 · ∞ leaves the bound unchanged
        if near > t0 {
            t0 = near;
        }
        if far < t1 {
            t1 = far;
        }
    }
    t0 <= t1
}

/// Möller–Trumbore ray/triangle intersection distance.
fn intersect(tri: &[Vec3; 3], origin: &Vec3, dir: &Vec3) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 * e1.norm() * e2.norm() {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) * inv_det)
}
