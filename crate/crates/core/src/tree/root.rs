//! Inlet detection on an undirected skeleton graph.
//!
//! The inlet is the free end of the longest unbranched chain hanging off a
//! branch point (a node of degree ≥ 3). Chains are measured by Euclidean
//! length along the skeleton. Without branch points the graph is a simple
//! path and the inlet is a leaf of its longest walk. Ties (relative 1e-9)
//! go to the lowest node id.

use std::collections::HashMap;

use crate::geom::Vec3;

use super::{NodeId, TreeError};

const TIE_TOLERANCE: f64 = 1e-9;

pub fn detect_root(nodes: &[(NodeId, Vec3)], edges: &[(NodeId, NodeId)]) -> Result<NodeId, TreeError> {
    if nodes.is_empty() {
        return Err(TreeError::Empty);
    }
    let mut index = HashMap::with_capacity(nodes.len());
    for (i, &(id, _)) in nodes.iter().enumerate() {
        if index.insert(id, i).is_some() {
            return Err(TreeError::DuplicateNode(id));
        }
    }
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for &(a, b) in edges {
        let ia = *index.get(&a).ok_or(TreeError::UnknownNode(a))?;
        let ib = *index.get(&b).ok_or(TreeError::UnknownNode(b))?;
        if ia == ib {
            return Err(TreeError::SelfLoop(a));
        }
        adjacency[ia].push(ib);
        adjacency[ib].push(ia);
    }
    if nodes.len() == 1 && edges.is_empty() {
        return Ok(nodes[0].0);
    }

    let has_branch_point = adjacency.iter().any(|a| a.len() >= 3);
    let mut best: Option<(f64, NodeId)> = None;
    for (leaf, _) in adjacency.iter().enumerate().filter(|(_, a)| a.len() == 1) {
        let (length, end) = walk_chain(leaf, &adjacency, nodes);
        if has_branch_point && adjacency[end].len() < 3 {
            // chain ends at another leaf: not hanging off a branch point
            continue;
        }
        let id = nodes[leaf].0;
        best = match best {
            None => Some((length, id)),
            Some((bl, bid)) => {
                let scale = bl.abs().max(length.abs()).max(f64::MIN_POSITIVE);
                let longer = (length - bl) / scale > TIE_TOLERANCE;
                let tied = (bl - length).abs() / scale <= TIE_TOLERANCE;
                if longer || (tied && id < bid) {
                    Some((length, id))
                } else {
                    Some((bl, bid))
                }
            }
        };
    }
    best.map(|(_, id)| id).ok_or(TreeError::NoLeaf)
}

/// Follows degree-2 nodes from `start` until a node of any other degree.
fn walk_chain(start: usize, adjacency: &[Vec<usize>], nodes: &[(NodeId, Vec3)]) -> (f64, usize) {
    let mut prev = usize::MAX;
    let mut cur = start;
    let mut length = 0.0;
    loop {
        let next = adjacency[cur].iter().copied().find(|&n| n != prev);
        let Some(next) = next else { break };
        length += (nodes[next].1 - nodes[cur].1).norm();
        prev = cur;
        cur = next;
        if adjacency[cur].len() != 2 || cur == start {
            break;
        }
    }
    (length, cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(list: &[(NodeId, [f64; 3])]) -> Vec<(NodeId, Vec3)> {
        list.iter().map(|&(id, p)| (id, Vec3::from(p))).collect()
    }

    #[test]
    fn y_shape_long_stem() {
        // stem 10..=12 along +z (length 8), short arms to 3 and 4
        let nodes = pts(&[
            (1, [0.0, 0.0, 0.0]),
            (3, [-1.0, 0.0, -1.0]),
            (4, [1.0, 0.0, -1.0]),
            (10, [0.0, 0.0, 4.0]),
            (12, [0.0, 0.0, 8.0]),
        ]);
        let edges = [(1, 3), (1, 4), (1, 10), (10, 12)];
        assert_eq!(detect_root(&nodes, &edges).unwrap(), 12);
    }

    #[test]
    fn single_edge_picks_lower_id() {
        let nodes = pts(&[(9, [0.0, 0.0, 0.0]), (4, [1.0, 0.0, 0.0])]);
        assert_eq!(detect_root(&nodes, &[(9, 4)]).unwrap(), 4);
    }

    #[test]
    fn equal_star_picks_lowest_leaf() {
        let mut nodes = vec![(0, Vec3::zeros())];
        let mut edges = Vec::new();
        for (k, leaf) in [(0usize, 31u64), (1, 17), (2, 23)] {
            let a = std::f64::consts::TAU * k as f64 / 3.0;
            let dir = Vec3::new(a.cos(), a.sin(), 0.0);
            let mid = 100 + k as u64;
            nodes.push((mid, dir * 2.0));
            nodes.push((leaf, dir * 4.0));
            edges.push((0, mid));
            edges.push((mid, leaf));
        }
        assert_eq!(detect_root(&nodes, &edges).unwrap(), 17);
    }

    #[test]
    fn path_without_branch_points() {
        let nodes = pts(&[(5, [0.0, 0.0, 0.0]), (6, [0.0, 0.0, 1.0]), (2, [0.0, 0.0, 3.0])]);
        assert_eq!(detect_root(&nodes, &[(5, 6), (6, 2)]).unwrap(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(detect_root(&[], &[]), Err(TreeError::Empty)));
        let tri = pts(&[(0, [0.0, 0.0, 0.0]), (1, [1.0, 0.0, 0.0]), (2, [0.0, 1.0, 0.0])]);
        assert!(matches!(
            detect_root(&tri, &[(0, 1), (1, 2), (2, 0)]),
            Err(TreeError::NoLeaf)
        ));
    }
}
