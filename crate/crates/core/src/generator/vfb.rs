use std::collections::VecDeque;

use crate::geom::{self, Vec3};
use crate::tree::{AirwayTree, NodeId};
use crate::volume::LungVolume;

use super::{grow_branch, pca_split_plane, GeneratorError};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Number of seed points sampled uniformly in the host volume.
    pub n_points: usize,
    /// Fraction of the distance to the subset centroid covered by a new branch.
    pub branch_fraction: f64,
    /// Branches no longer than this stop growing.
    pub terminal_length_mm: f64,
    /// Maximum angle between a child and its parent.
    pub angle_limit_deg: f64,
    /// Regions with at most this many points stop splitting.
    pub min_points_per_region: usize,
    /// Generation cap; see [`generate`].
    pub max_generations: u32,
    pub rng_seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_points: 30_000,
            branch_fraction: 0.4,
            terminal_length_mm: 2.0,
            angle_limit_deg: 60.0,
            min_points_per_region: 1,
            max_generations: 23,
            rng_seed: 1,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |m: &str| Err(GeneratorError::InvalidConfig(m.to_string()));
        if self.n_points == 0 {
            return bad("n_points must be positive");
        }
        if !(self.branch_fraction > 0.0 && self.branch_fraction < 1.0) {
            return bad("branch_fraction must lie in (0, 1)");
        }
        if !(self.terminal_length_mm > 0.0 && self.terminal_length_mm.is_finite()) {
            return bad("terminal_length_mm must be positive");
        }
        if !(self.angle_limit_deg > 0.0 && self.angle_limit_deg <= 90.0) {
            return bad("angle_limit_deg must lie in (0, 90]");
        }
        if self.min_points_per_region == 0 {
            return bad("min_points_per_region must be at least 1");
        }
        Ok(())
    }

    /// Upper bound on the number of tree endpoints.
    fn endpoint_cap(&self) -> u64 {
        1u64 << (self.max_generations + 1).min(62)
    }
}

struct Growing {
    node: NodeId,
    head: Vec3,
    direction: Vec3,
    points: Vec<u32>,
}

/// Successive shrink factors tried when an endpoint leaves the volume.
const SHRINK_FACTOR: f64 = 0.8;
const SHRINK_ATTEMPTS: usize = 40;

/// Grows `seed_tree` into `volume`.
///
/// Points sampled in the volume are assigned to the nearest distal seed
/// branch. Branches are then processed breadth-first: the points of a branch
/// are split by a plane through their centroid and one child grows toward
/// the centroid of each half. A child that would leave the volume is
/// shortened until its endpoint lies inside, or dropped. Branches no longer
/// than `terminal_length_mm`, or holding at most `min_points_per_region`
/// points, become terminal and release their points.
///
/// Growth stops splitting once the tree has `2^(max_generations + 1)`
/// endpoints. The seed tree is kept as is; only generated branches are
/// guaranteed to end inside the volume. The output carries no diameters.
pub fn generate(
    seed_tree: &AirwayTree,
    volume: &LungVolume,
    config: &GeneratorConfig,
) -> Result<AirwayTree, GeneratorError> {
    config.validate()?;
    let distal: Vec<_> = seed_tree
        .terminals()
        .filter(|b| volume.contains(&seed_tree.head_position(b.id)))
        .map(|b| b.id)
        .collect();
    if distal.is_empty() {
        return Err(GeneratorError::NoDistalInside);
    }
    let points = volume.sample_uniform(config.n_points, config.rng_seed)?;

    let mut regions: Vec<Vec<u32>> = vec![Vec::new(); distal.len()];
    for (i, p) in points.iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, &b) in distal.iter().enumerate() {
            let d = geom::point_segment_distance_squared(
                p,
                &seed_tree.tail_position(b),
                &seed_tree.head_position(b),
            );
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        regions[best].push(i as u32);
    }

    let (mut nodes, seed_edges) = seed_tree.to_parts();
    let mut edges: Vec<(NodeId, NodeId)> = seed_edges.iter().map(|&(a, b, _)| (a, b)).collect();
    let first_new = nodes.iter().map(|n| n.0).max().unwrap_or(0) + 1;
    let mut next_id = first_new;

    let mut queue: VecDeque<Growing> = distal
        .iter()
        .zip(regions)
        .map(|(&b, pts)| Growing {
            node: seed_tree.branch(b).head,
            head: seed_tree.head_position(b),
            direction: seed_tree.direction(b),
            points: pts,
        })
        .collect();

    let cap = config.endpoint_cap();
    let mut endpoints = seed_tree.terminals().count() as u64;
    let mut subset = Vec::new();

    while let Some(branch) = queue.pop_front() {
        if branch.points.len() <= config.min_points_per_region || endpoints + 1 > cap {
            continue;
        }
        subset.clear();
        subset.extend(branch.points.iter().map(|&i| points[i as usize]));
        let Ok(plane) = pca_split_plane(&subset, &branch.direction) else {
            continue;
        };
        let (pos, neg): (Vec<u32>, Vec<u32>) = branch
            .points
            .iter()
            .partition(|&&i| plane.signed_distance(&points[i as usize]) >= 0.0);

        let mut children = Vec::with_capacity(2);
        for half in [pos, neg] {
            if half.is_empty() {
                continue;
            }
            let centroid = half.iter().map(|&i| points[i as usize]).sum::<Vec3>() / half.len() as f64;
            let Ok(end) = grow_branch(&branch.head, &branch.direction, &centroid, config) else {
                continue;
            };
            let step = end - branch.head;
            let mut t = 1.0;
            let mut inside = volume.contains(&end);
            for _ in 0..SHRINK_ATTEMPTS {
                if inside {
                    break;
                }
                t *= SHRINK_FACTOR;
                inside = volume.contains(&(branch.head + step * t));
            }
            if !inside {
                continue;
            }
            let end = branch.head + step * t;
            if end == branch.head {
                continue;
            }
            children.push((end, half));
        }
        if children.len() == 2 {
            endpoints += 1;
        }
        for (end, half) in children {
            let id = next_id;
            next_id += 1;
            nodes.push((id, end));
            edges.push((branch.node, id));
            let step = end - branch.head;
            if step.norm() <= config.terminal_length_mm {
                continue;
            }
            queue.push_back(Growing {
                node: id,
                head: end,
                direction: step.normalize(),
                points: half,
            });
        }
    }

    let grown = AirwayTree::build(&nodes, &edges, seed_tree.root())?;
    let keep: Vec<bool> = grown
        .branches()
        .iter()
        .map(|b| b.head < first_new || volume.contains(&grown.head_position(b.id)))
        .collect();
    Ok(grown.retain(&keep))
}
