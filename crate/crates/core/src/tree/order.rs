//! Weibel generations and Horsfield/Strahler orders.
//!
//! A node with a single child is a pass-through vertex: the child continues
//! the parent's airway, inheriting its generation and order. Only nodes with
//! two or more children count as bifurcations.

use crate::geom::{self, Vec3};

use super::{AirwayTree, TreeError};

/// Generation per branch: 0 for the root branch, +1 across every bifurcation.
pub fn compute_generations(tree: &AirwayTree) -> Vec<u32> {
    let mut generation = vec![0u32; tree.len()];
    // Breadth-first ids guarantee parents precede children.
    for b in tree.branches() {
        if let Some(p) = b.parent {
            let siblings = tree.branch(p).children.len();
            generation[b.id] = generation[p] + u32::from(siblings >= 2);
        }
    }
    generation
}

/// Horsfield order: terminals are 1, a bifurcation parent is `max(children) + 1`.
pub fn compute_horsfield_orders(tree: &AirwayTree) -> Vec<u32> {
    orders_bottom_up(tree, |child_orders| {
        let max = child_orders.iter().copied().max().unwrap_or(0);
        max + 1
    })
}

/// Strahler order: terminals are 1, a bifurcation parent takes the largest child
/// order, plus one when the two largest child orders are equal.
pub fn compute_strahler_orders(tree: &AirwayTree) -> Vec<u32> {
    orders_bottom_up(tree, |child_orders| {
        let mut sorted = child_orders.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        if sorted[0] == sorted[1] {
            sorted[0] + 1
        } else {
            sorted[0]
        }
    })
}

fn orders_bottom_up(tree: &AirwayTree, at_bifurcation: impl Fn(&[u32]) -> u32) -> Vec<u32> {
    let mut order = vec![0u32; tree.len()];
    let mut scratch = Vec::new();
    for b in tree.branches().iter().rev() {
        order[b.id] = match b.children.len() {
            0 => 1,
            1 => order[b.children[0]],
            _ => {
                scratch.clear();
                scratch.extend(b.children.iter().map(|&c| order[c]));
                at_bifurcation(&scratch)
            }
        };
    }
    order
}

/// Angle in degrees between a parent direction and a child direction.
pub fn branching_angle(parent_direction: &Vec3, child_direction: &Vec3) -> Result<f64, TreeError> {
    geom::angle_between_deg(parent_direction, child_direction).ok_or(TreeError::ZeroVector)
}

/// Angle of each branch relative to its parent; `None` for the root branch.
pub fn branch_angles(tree: &AirwayTree) -> Vec<Option<f64>> {
    tree.branches()
        .iter()
        .map(|b| {
            b.parent.map(|p| {
                geom::angle_between_deg(&tree.branch_vector(p), &tree.branch_vector(b.id))
                    .expect("branches have positive length")
            })
        })
        .collect()
}
