#![allow(dead_code)]

use bronchi::{AirwayTree, NodeId, Vec3};
use proptest::prelude::*;

/// Random binary tree: node positions on a 1/8 mm lattice, node 0 is the inlet.
#[derive(Debug, Clone)]
pub struct TreeSpec {
    pub nodes: Vec<(NodeId, Vec3)>,
    pub edges: Vec<(NodeId, NodeId)>,
}

impl TreeSpec {
    pub fn build(&self) -> AirwayTree {
        AirwayTree::build(&self.nodes, &self.edges, 0).unwrap()
    }

    pub fn children(&self, node: NodeId) -> Vec<NodeId> {
        self.edges.iter().filter(|e| e.0 == node).map(|e| e.1).collect()
    }
}

type Step = (usize, (i32, i32, i32), (i32, i32, i32));

fn offset((x, y, z): (i32, i32, i32)) -> Vec3 {
    // z steps are strictly negative so no branch has zero length
    Vec3::new(x as f64 / 8.0, y as f64 / 8.0, -(z as f64) / 8.0)
}

fn assemble(steps: Vec<Step>) -> TreeSpec {
    let mut spec = TreeSpec {
        nodes: vec![(0, Vec3::zeros()), (1, Vec3::new(0.0, 0.0, -12.0))],
        edges: vec![(0, 1)],
    };
    let mut leaves = vec![1u64];
    for (pick, left, right) in steps {
        let parent = leaves.swap_remove(pick % leaves.len());
        let p = spec.nodes[parent as usize].1;
        for step in [left, right] {
            let id = spec.nodes.len() as NodeId;
            spec.nodes.push((id, p + offset(step)));
            spec.edges.push((parent, id));
            leaves.push(id);
        }
    }
    spec
}

/// Binary trees with `1 + 2·k` branches for `k < max_bifurcations`.
pub fn binary_tree(max_bifurcations: usize) -> impl Strategy<Value = TreeSpec> {
    let delta = (-40i32..=40, -40i32..=40, 8i32..=48);
    prop::collection::vec((any::<usize>(), delta.clone(), delta), 0..max_bifurcations).prop_map(assemble)
}

/// Brute-force (Horsfield, Strahler) of the branch ending at `head`.
pub fn brute_orders(spec: &TreeSpec, head: NodeId) -> (u32, u32) {
    let kids = spec.children(head);
    if kids.is_empty() {
        return (1, 1);
    }
    let sub: Vec<(u32, u32)> = kids.iter().map(|&k| brute_orders(spec, k)).collect();
    let top = sub.iter().map(|s| s.1).max().unwrap();
    let ties = sub.iter().filter(|s| s.1 == top).count();
    (
        1 + sub.iter().map(|s| s.0).max().unwrap(),
        if ties >= 2 { top + 1 } else { top },
    )
}
