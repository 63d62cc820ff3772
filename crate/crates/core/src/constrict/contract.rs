use rayon::prelude::*;

use crate::geom::Vec3;
use crate::linalg::{conjugate_gradient, CsrMatrix, SolveError};
use crate::mesh::{cotangent_laplacian, LaplacianOperator, TriMesh};

use super::ConstrictError;

/// Relative residual required of the linear solves.
pub const SOLVER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionState {
    pub vertices: Vec<Vec3>,
    /// Attraction targets: the previous iterate.
    pub anchors: Vec<Vec3>,
    /// Contraction weight per vertex.
    pub w_l: Vec<f64>,
    /// Attraction weight per vertex.
    pub w_h: Vec<f64>,
    pub w_h0: Vec<f64>,
    /// One-ring areas of the input mesh.
    pub area0: Vec<f64>,
    pub laplacian: LaplacianOperator,
    pub iteration: usize,
}

impl ContractionState {
    /// Initial state with `W_L = k · √Ā / ē` and `W_H = 1`, where `Ā` is the
    /// mean face area and `ē` the mean edge length.
    pub fn new(mesh: &TriMesh, init_constant: f64) -> Result<Self, ConstrictError> {
        if !(init_constant >= 0.0 && init_constant.is_finite()) {
            return Err(ConstrictError::InvalidConfig("init_constant must be non-negative".into()));
        }
        let n = mesh.vertices.len();
        let mean_area = mesh.surface_area() / mesh.faces.len().max(1) as f64;
        let edge = mesh.mean_edge_length();
        let w_l0 = if edge > 0.0 { init_constant * mean_area.sqrt() / edge } else { 0.0 };
        Ok(Self {
            vertices: mesh.vertices.clone(),
            anchors: mesh.vertices.clone(),
            w_l: vec![w_l0; n],
            w_h: vec![1.0; n],
            w_h0: vec![1.0; n],
            area0: mesh.one_ring_areas(),
            laplacian: cotangent_laplacian(mesh)?,
            iteration: 0,
        })
    }
}

/// Region vertices: every vertex of a listed face.
pub fn region_vertices(mesh: &TriMesh, region_faces: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; mesh.vertices.len()];
    for &f in region_faces {
        for &v in &mesh.faces[f] {
            mask[v] = true;
        }
    }
    mask
}

/// Minimises `‖W_L L V‖² + ‖W_H (V − V_a)‖²` over the positions of region
/// vertices, the Laplacian rows restricted to the region and every other
/// vertex held fixed. `w_l_multiplier` scales `W_L` for this solve only.
pub fn solve_positions(
    state: &ContractionState,
    region: &[bool],
    w_l_multiplier: f64,
) -> Result<Vec<Vec3>, ConstrictError> {
    let n = state.vertices.len();
    if region.len() != n {
        return Err(ConstrictError::InvalidRegion(format!(
            "region mask has {} entries for {n} vertices",
            region.len()
        )));
    }
    let unknowns: Vec<usize> = (0..n).filter(|&v| region[v]).collect();
    if unknowns.is_empty() {
        return Err(ConstrictError::EmptyRegion);
    }
    let mut local = vec![usize::MAX; n];
    for (i, &v) in unknowns.iter().enumerate() {
        local[v] = i;
    }
    let m = unknowns.len();
    let l = &state.laplacian.matrix;
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for (row, &v) in unknowns.iter().enumerate() {
        let (cols, vals) = l.row(v);
        for (&c, &w) in cols.iter().zip(vals) {
            if region[c] {
                inner.push((row, local[c], w));
            } else {
                outer.push((row, c, w));
            }
        }
    }
    let a = CsrMatrix::from_triplets(m, m, &inner);
    let b = CsrMatrix::from_triplets(m, n, &outer);
    let d: Vec<f64> = unknowns
        .iter()
        .map(|&v| (state.w_l[v] * w_l_multiplier).powi(2))
        .collect();
    let h2: Vec<f64> = unknowns.iter().map(|&v| state.w_h[v].powi(2)).collect();
    let normal = a.weighted_gram(&d).add_diagonal(&h2);
    let at = a.transpose();

    let columns: Vec<Result<Vec<f64>, SolveError>> = (0..3)
        .into_par_iter()
        .map(|c| {
            let fixed: Vec<f64> = (0..n)
                .map(|v| if region[v] { 0.0 } else { state.vertices[v][c] })
                .collect();
            let mut bf = vec![0.0; m];
            b.mul_vec(&fixed, &mut bf);
            for (x, w) in bf.iter_mut().zip(&d) {
                *x *= w;
            }
            let mut correction = vec![0.0; m];
            at.mul_vec(&bf, &mut correction);
            let rhs: Vec<f64> = (0..m)
                .map(|i| h2[i] * state.anchors[unknowns[i]][c] - correction[i])
                .collect();
            let mut x: Vec<f64> = unknowns.iter().map(|&v| state.anchors[v][c]).collect();
            conjugate_gradient(&normal, &rhs, &mut x, SOLVER_TOLERANCE, 20 * m + 200)?;
            Ok(x)
        })
        .collect();

    let mut out = state.vertices.clone();
    for (c, column) in columns.into_iter().enumerate() {
        let column = column.map_err(|source| {
            let diag = normal.diagonal();
            let hi = diag.iter().copied().fold(0.0, f64::max);
            let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
            ConstrictError::Solver {
                source,
                unknowns: m,
                diagonal_ratio: hi / lo,
            }
        })?;
        for (i, x) in column.into_iter().enumerate() {
            out[unknowns[i]][c] = x;
        }
    }
    Ok(out)
}

/// One contraction iteration: solve for new positions, then
/// `W_L ← s_L · W_L`, `W_H,i ← W⁰_H,i · √(A⁰_i / Aᵗ_i)`, and rebuild `L`.
pub fn contract_step(
    mesh: &TriMesh,
    state: &ContractionState,
    region: &[bool],
    contraction_scale: f64,
) -> Result<ContractionState, ConstrictError> {
    contract_step_scaled(mesh, state, region, contraction_scale, 1.0)
}

pub(crate) fn contract_step_scaled(
    mesh: &TriMesh,
    state: &ContractionState,
    region: &[bool],
    contraction_scale: f64,
    w_l_multiplier: f64,
) -> Result<ContractionState, ConstrictError> {
    if state.vertices.len() != mesh.vertices.len() {
        return Err(ConstrictError::InvalidRegion("state does not match mesh".into()));
    }
    let vertices = solve_positions(state, region, w_l_multiplier)?;
    let moved = TriMesh::new(vertices.clone(), mesh.faces.clone());
    let areas = moved.one_ring_areas();
    let w_h = state
        .w_h0
        .iter()
        .zip(&state.area0)
        .zip(&areas)
        .map(|((&w0, &a0), &at)| if at > 0.0 && a0 > 0.0 { w0 * (a0 / at).sqrt() } else { w0 })
        .collect();
    Ok(ContractionState {
        anchors: vertices.clone(),
        vertices,
        w_l: state.w_l.iter().map(|w| w * w_l_multiplier * contraction_scale).collect(),
        w_h,
        w_h0: state.w_h0.clone(),
        area0: state.area0.clone(),
        laplacian: cotangent_laplacian(&moved)?,
        iteration: state.iteration + 1,
    })
}
