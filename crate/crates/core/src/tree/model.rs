use std::collections::{HashMap, VecDeque};

use crate::geom::{self, Vec3};

use super::TreeError;

/// External node label, as read from skeleton files.
pub type NodeId = u64;
/// Branch index; branches are numbered in breadth-first order from the root.
pub type BranchId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: BranchId,
    pub tail: NodeId,
    pub head: NodeId,
    pub parent: Option<BranchId>,
    pub children: Vec<BranchId>,
    /// Number of bifurcations between the root branch and this one.
    pub generation: u32,
    pub diameter: Option<f64>,
    tail_ix: usize,
    head_ix: usize,
}

impl Branch {
    pub fn is_terminal(&self) -> bool {
        self.children.is_empty()
    }
}

/// A rooted tree of straight airway segments, oriented away from the root.
///
/// Invariants established by [`AirwayTree::build`]: connected, acyclic,
/// every non-root node has one incoming branch, and the root has exactly one
/// outgoing branch (the trachea), which is branch 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AirwayTree {
    nodes: Vec<Node>,
    branches: Vec<Branch>,
    root: usize,
    index: HashMap<NodeId, usize>,
}

impl AirwayTree {
    /// Orients an undirected node/edge list away from `root`.
    ///
    /// Edge direction in the input is ignored. Children are ordered by
    /// their position in `edges`, and branch ids follow breadth-first order.
    pub fn build(
        positions: &[(NodeId, Vec3)],
        edges: &[(NodeId, NodeId)],
        root: NodeId,
    ) -> Result<Self, TreeError> {
        if positions.is_empty() {
            return Err(TreeError::Empty);
        }
        let mut index = HashMap::with_capacity(positions.len());
        let mut nodes = Vec::with_capacity(positions.len());
        for &(id, position) in positions {
            if !geom::is_finite(&position) {
                return Err(TreeError::NonFinitePosition(id));
            }
            if index.insert(id, nodes.len()).is_some() {
                return Err(TreeError::DuplicateNode(id));
            }
            nodes.push(Node { id, position });
        }
        let root_ix = *index.get(&root).ok_or(TreeError::UnknownRoot(root))?;

        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for &(a, b) in edges {
            let ia = *index.get(&a).ok_or(TreeError::UnknownNode(a))?;
            let ib = *index.get(&b).ok_or(TreeError::UnknownNode(b))?;
            if ia == ib {
                return Err(TreeError::SelfLoop(a));
            }
            if nodes[ia].position == nodes[ib].position {
                return Err(TreeError::ZeroLength(a, b));
            }
            adjacency[ia].push(ib);
            adjacency[ib].push(ia);
        }
        if adjacency[root_ix].len() != 1 {
            return Err(TreeError::RootDegree {
                node: root,
                degree: adjacency[root_ix].len(),
            });
        }

        // Breadth-first orientation. `incoming[n]` is the branch ending at n.
        let mut incoming: Vec<Option<BranchId>> = vec![None; nodes.len()];
        let mut visited = vec![false; nodes.len()];
        let mut branches: Vec<Branch> = Vec::with_capacity(nodes.len().saturating_sub(1));
        let mut queue = VecDeque::from([root_ix]);
        visited[root_ix] = true;
        let mut reached = 1;
        while let Some(n) = queue.pop_front() {
            let parent = incoming[n];
            let from = parent.map(|b| branches[b].tail_ix);
            let mut skipped_parent = false;
            for &m in &adjacency[n] {
                if Some(m) == from && !skipped_parent {
                    skipped_parent = true;
                    continue;
                }
                if visited[m] {
                    return Err(TreeError::Cycle(nodes[m].id));
                }
                visited[m] = true;
                reached += 1;
                let id = branches.len();
                branches.push(Branch {
                    id,
                    tail: nodes[n].id,
                    head: nodes[m].id,
                    parent,
                    children: Vec::new(),
                    generation: 0,
                    diameter: None,
                    tail_ix: n,
                    head_ix: m,
                });
                if let Some(p) = parent {
                    branches[p].children.push(id);
                }
                incoming[m] = Some(id);
                queue.push_back(m);
            }
        }
        if reached != nodes.len() {
            return Err(TreeError::Disconnected {
                reached,
                total: nodes.len(),
            });
        }

        let mut tree = Self {
            nodes,
            branches,
            root: root_ix,
            index,
        };
        let generations = super::order::compute_generations(&tree);
        for (b, g) in tree.branches.iter_mut().zip(generations) {
            b.generation = g;
        }
        Ok(tree)
    }

    /// Same as [`build`](Self::build) with per-edge diameters attached.
    pub fn build_with_diameters(
        positions: &[(NodeId, Vec3)],
        edges: &[(NodeId, NodeId, Option<f64>)],
        root: NodeId,
    ) -> Result<Self, TreeError> {
        let plain: Vec<_> = edges.iter().map(|&(a, b, _)| (a, b)).collect();
        let mut tree = Self::build(positions, &plain, root)?;
        let mut by_pair = HashMap::with_capacity(edges.len());
        for &(a, b, d) in edges {
            by_pair.insert((a.min(b), a.max(b)), d);
        }
        for br in &mut tree.branches {
            br.diameter = by_pair[&(br.tail.min(br.head), br.tail.max(br.head))];
        }
        Ok(tree)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, id: BranchId) -> &Branch {
        &self.branches[id]
    }

    pub fn root(&self) -> NodeId {
        self.nodes[self.root].id
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn tail_position(&self, id: BranchId) -> Vec3 {
        self.nodes[self.branches[id].tail_ix].position
    }

    pub fn head_position(&self, id: BranchId) -> Vec3 {
        self.nodes[self.branches[id].head_ix].position
    }

    /// Head minus tail.
    pub fn branch_vector(&self, id: BranchId) -> Vec3 {
        self.head_position(id) - self.tail_position(id)
    }

    pub fn length(&self, id: BranchId) -> f64 {
        self.branch_vector(id).norm()
    }

    pub fn direction(&self, id: BranchId) -> Vec3 {
        self.branch_vector(id).normalize()
    }

    pub fn terminals(&self) -> impl Iterator<Item = &Branch> {
        self.branches.iter().filter(|b| b.is_terminal())
    }

    /// Branch ids whose node has at least two children, i.e. bifurcation parents.
    pub fn bifurcations(&self) -> impl Iterator<Item = &Branch> {
        self.branches.iter().filter(|b| b.children.len() >= 2)
    }

    pub fn has_diameters(&self) -> bool {
        self.branches.iter().all(|b| b.diameter.is_some())
    }

    /// Replaces all diameters; `diameters[i]` belongs to branch `i`.
    pub fn with_diameters(mut self, diameters: &[f64]) -> Self {
        assert_eq!(diameters.len(), self.branches.len());
        for (b, &d) in self.branches.iter_mut().zip(diameters) {
            b.diameter = Some(d);
        }
        self
    }

    pub fn clear_diameters(mut self) -> Self {
        for b in &mut self.branches {
            b.diameter = None;
        }
        self
    }

    /// Node list and directed edge list suitable for [`build`](Self::build).
    pub fn to_parts(&self) -> (Vec<(NodeId, Vec3)>, Vec<(NodeId, NodeId, Option<f64>)>) {
        let nodes = self.nodes.iter().map(|n| (n.id, n.position)).collect();
        let edges = self
            .branches
            .iter()
            .map(|b| (b.tail, b.head, b.diameter))
            .collect();
        (nodes, edges)
    }

    /// Applies `f` to every node position, keeping topology and attributes.
    pub fn map_positions(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<Self, TreeError> {
        let (nodes, edges) = self.to_parts();
        let moved: Vec<_> = nodes.iter().map(|(id, p)| (*id, f(p))).collect();
        Self::build_with_diameters(&moved, &edges, self.root())
    }

    /// Keeps only branches with generation `<= max_generation`.
    pub fn prune_to_generation(&self, max_generation: u32) -> Self {
        let keep: Vec<bool> = self
            .branches
            .iter()
            .map(|b| b.generation <= max_generation)
            .collect();
        self.retain(&keep)
    }

    /// Subtree-closed filter: a branch survives iff `keep[id]` and its parent survives.
    pub fn retain(&self, keep: &[bool]) -> Self {
        let mut alive = vec![false; self.branches.len()];
        for b in &self.branches {
            alive[b.id] = keep[b.id] && b.parent.is_none_or(|p| alive[p]);
        }
        assert!(alive[0], "retain must keep the root branch");
        let mut used = vec![false; self.nodes.len()];
        let mut edges = Vec::new();
        for b in self.branches.iter().filter(|b| alive[b.id]) {
            used[b.tail_ix] = true;
            used[b.head_ix] = true;
            edges.push((b.tail, b.head, b.diameter));
        }
        let nodes: Vec<_> = self
            .nodes
            .iter()
            .zip(&used)
            .filter(|(_, &u)| u)
            .map(|(n, _)| (n.id, n.position))
            .collect();
        Self::build_with_diameters(&nodes, &edges, self.root())
            .expect("subtree of a valid tree is valid")
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Complete binary tree: a root branch followed by `depth` levels of bifurcations.
    /// Children of a node at depth `k` fan out in the x-y plane and descend in z.
    pub fn complete_binary(depth: u32) -> AirwayTree {
        let mut nodes = vec![(0, Vec3::new(0.0, 0.0, 10.0)), (1, Vec3::zeros())];
        let mut edges = vec![(0, 1)];
        let mut frontier = vec![(1u64, Vec3::zeros(), 0u32)];
        let mut next_id = 2;
        for level in 0..depth {
            let mut next = Vec::new();
            let spread = 8.0 * 0.6f64.powi(level as i32);
            for &(id, pos, _) in &frontier {
                for s in [-1.0, 1.0] {
                    let axis = if level % 2 == 0 { Vec3::x() } else { Vec3::y() };
                    let p = pos + axis * (s * spread) - Vec3::z() * spread;
                    nodes.push((next_id, p));
                    edges.push((id, next_id));
                    next.push((next_id, p, level + 1));
                    next_id += 1;
                }
            }
            frontier = next;
        }
        AirwayTree::build(&nodes, &edges, 0).unwrap()
    }

    /// Root branch then `depth` bifurcations, each with one terminal child and one
    /// continuing child; the last bifurcation has two terminal children.
    pub fn caterpillar(depth: u32) -> AirwayTree {
        let mut nodes = vec![(0, Vec3::new(0.0, 0.0, 1.0)), (1, Vec3::zeros())];
        let mut edges = vec![(0, 1)];
        let mut spine = 1u64;
        let mut next_id = 2;
        for k in 0..depth {
            let z = -(k as f64 + 1.0);
            nodes.push((next_id, Vec3::new(1.0, 0.0, z)));
            edges.push((spine, next_id));
            nodes.push((next_id + 1, Vec3::new(0.0, 0.0, z)));
            edges.push((spine, next_id + 1));
            spine = next_id + 1;
            next_id += 2;
        }
        AirwayTree::build(&nodes, &edges, 0).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn single_segment() {
        let t = AirwayTree::build(
            &[(0, Vec3::zeros()), (1, Vec3::new(3.0, 4.0, 0.0))],
            &[(0, 1)],
            0,
        )
        .unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.length(0), 5.0);
        assert_eq!(t.branch(0).tail, 0);
        assert_eq!(t.direction(0), Vec3::new(0.6, 0.8, 0.0));
    }

    #[test]
    fn orientation_follows_root() {
        // edge listed head-first must still be oriented away from the root
        let t = AirwayTree::build(
            &[(5, Vec3::zeros()), (9, Vec3::x())],
            &[(9, 5)],
            5,
        )
        .unwrap();
        assert_eq!((t.branch(0).tail, t.branch(0).head), (5, 9));
    }

    #[test]
    fn complete_binary_depth_three() {
        let t = complete_binary(3);
        assert_eq!(t.len(), 15);
        assert_eq!(t.terminals().count(), 8);
    }

    #[test]
    fn cycle_rejected() {
        let nodes = [
            (0, Vec3::zeros()),
            (1, Vec3::x()),
            (2, Vec3::new(1.0, 1.0, 0.0)),
            (3, Vec3::new(2.0, 0.0, 0.0)),
        ];
        let err = AirwayTree::build(&nodes, &[(0, 1), (1, 2), (2, 3), (3, 1)], 0).unwrap_err();
        assert!(matches!(err, TreeError::Cycle(_)), "{err}");
    }

    #[test]
    fn disconnected_rejected() {
        let nodes = [(0, Vec3::zeros()), (1, Vec3::x()), (2, Vec3::y()), (3, Vec3::z())];
        let err = AirwayTree::build(&nodes, &[(0, 1), (2, 3)], 0).unwrap_err();
        assert!(matches!(err, TreeError::Disconnected { reached: 2, total: 4 }));
    }

    #[test]
    fn unknown_root_and_node() {
        let nodes = [(0, Vec3::zeros()), (1, Vec3::x())];
        assert!(matches!(
            AirwayTree::build(&nodes, &[(0, 1)], 7),
            Err(TreeError::UnknownRoot(7))
        ));
        assert!(matches!(
            AirwayTree::build(&nodes, &[(0, 4)], 0),
            Err(TreeError::UnknownNode(4))
        ));
    }

    #[test]
    fn root_must_have_one_branch() {
        let nodes = [(0, Vec3::zeros()), (1, Vec3::x()), (2, Vec3::y())];
        assert!(matches!(
            AirwayTree::build(&nodes, &[(0, 1), (0, 2)], 0),
            Err(TreeError::RootDegree { degree: 2, .. })
        ));
    }

    #[test]
    fn zero_length_and_self_loop() {
        let nodes = [(0, Vec3::zeros()), (1, Vec3::zeros())];
        assert!(matches!(
            AirwayTree::build(&nodes, &[(0, 1)], 0),
            Err(TreeError::ZeroLength(0, 1))
        ));
        assert!(matches!(
            AirwayTree::build(&nodes, &[(0, 0)], 0),
            Err(TreeError::SelfLoop(0))
        ));
    }

    #[test]
    fn prune_keeps_low_generations() {
        let t = complete_binary(4).prune_to_generation(2);
        assert_eq!(t.len(), 7);
        assert!(t.branches().iter().all(|b| b.generation <= 2));
    }

    #[test]
    fn diameters_survive_rebuild() {
        let t = complete_binary(2);
        let d: Vec<f64> = (0..t.len()).map(|i| 10.0 - i as f64).collect();
        let t = t.with_diameters(&d);
        let moved = t.map_positions(|p| p + Vec3::new(1.0, 2.0, 3.0)).unwrap();
        for b in moved.branches() {
            assert_eq!(b.diameter, Some(d[b.id]));
        }
    }
}
