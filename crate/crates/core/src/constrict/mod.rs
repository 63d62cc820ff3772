//! Airway narrowing by region-restricted Laplacian contraction, measured with
//! the shape diameter function.

mod contract;
mod sdf;

pub use contract::{
    contract_step, region_vertices, solve_positions, ContractionState, SOLVER_TOLERANCE,
};
pub use sdf::{compute_sdf, compute_sdf_subset, SdfConfig};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::linalg::SolveError;
use crate::mesh::{bilateral_normal_filter_masked, taubin_smooth_masked, BilateralConfig, MeshError, TriMesh};

#[derive(Debug, Error)]
pub enum ConstrictError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("contraction region is empty")]
    EmptyRegion,
    #[error("region selector matches no faces")]
    NoRegionMatch,
    #[error("mesh has no per-face branch labels")]
    MissingLabels,
    #[error("mesh is open ({0} boundary edges)")]
    OpenMesh(usize),
    #[error("no SDF ray hit the opposite surface")]
    NoHits,
    #[error("array lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("initial SDF sum is not positive")]
    ZeroInitial,
    #[error("contraction diverged: ratio rose for 3 consecutive iterations (history {0:?})")]
    Diverged(Vec<f64>),
    #[error("normal equations unsolved over {unknowns} unknowns (diagonal max/min {diagonal_ratio:.3e}): {source}")]
    Solver {
        source: SolveError,
        unknowns: usize,
        diagonal_ratio: f64,
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Faces to constrict, resolved through the per-face branch labels.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSelector {
    All,
    Branches(BTreeSet<usize>),
    /// `branch_generations[b]` is the generation of branch `b`.
    Generations {
        generations: BTreeSet<u32>,
        branch_generations: Vec<u32>,
    },
}

impl RegionSelector {
    pub fn resolve(&self, mesh: &TriMesh) -> Result<Vec<usize>, ConstrictError> {
        let faces: Vec<usize> = match self {
            RegionSelector::All => (0..mesh.faces.len()).collect(),
            RegionSelector::Branches(ids) => {
                let labels = mesh.face_branch.as_ref().ok_or(ConstrictError::MissingLabels)?;
                (0..mesh.faces.len()).filter(|&f| ids.contains(&labels[f])).collect()
            }
            RegionSelector::Generations { generations, branch_generations } => {
                let labels = mesh.face_branch.as_ref().ok_or(ConstrictError::MissingLabels)?;
                (0..mesh.faces.len())
                    .filter(|&f| {
                        branch_generations
                            .get(labels[f])
                            .is_some_and(|g| generations.contains(g))
                    })
                    .collect()
            }
        };
        if faces.is_empty() {
            return Err(ConstrictError::NoRegionMatch);
        }
        Ok(faces)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeamSmoothing {
    pub taubin_iterations: usize,
    pub lambda: f64,
    pub mu: f64,
    pub bilateral: Option<BilateralConfig>,
}

impl Default for SeamSmoothing {
    fn default() -> Self {
        Self {
            taubin_iterations: 10,
            lambda: 0.5,
            mu: -0.53,
            bilateral: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrictionConfig {
    pub target_ratio: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// `W_L` growth factor per iteration.
    pub contraction_scale: f64,
    /// Initial contraction weight constant, relative to mean edge length.
    pub init_constant: f64,
    /// Optional multiplier on `contraction_scale`.
    pub omega: Option<f64>,
    pub region: RegionSelector,
    pub sdf: SdfConfig,
    pub seam: SeamSmoothing,
}

impl Default for ConstrictionConfig {
    fn default() -> Self {
        Self {
            target_ratio: 0.5,
            tolerance: 0.05,
            max_iterations: 8,
            contraction_scale: 2.0,
            init_constant: 3.0,
            omega: None,
            region: RegionSelector::All,
            sdf: SdfConfig::default(),
            seam: SeamSmoothing::default(),
        }
    }
}

impl ConstrictionConfig {
    pub fn validate(&self) -> Result<(), ConstrictError> {
        let bad = |m: &str| Err(ConstrictError::InvalidConfig(m.to_string()));
        if !(self.target_ratio > 0.0 && self.target_ratio < 1.0) {
            return bad("target_ratio must lie in (0, 1)");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.contraction_scale > 0.0 && self.contraction_scale.is_finite()) {
            return bad("contraction_scale must be positive");
        }
        if let Some(w) = self.omega {
            if !(w > 0.0 && w.is_finite()) {
                return bad("omega must be positive");
            }
        }
        self.sdf.validate()
    }

    fn effective_scale(&self) -> f64 {
        self.contraction_scale * self.omega.unwrap_or(1.0)
    }
}

/// `Σ current / Σ initial`.
pub fn narrowing_ratio(current: &[f64], initial: &[f64]) -> Result<f64, ConstrictError> {
    if current.len() != initial.len() {
        return Err(ConstrictError::LengthMismatch(current.len(), initial.len()));
    }
    let base: f64 = initial.iter().sum();
    if !(base > 0.0) {
        return Err(ConstrictError::ZeroInitial);
    }
    Ok(current.iter().sum::<f64>() / base)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrictionResult {
    pub mesh: TriMesh,
    /// Narrowing ratio per iteration, starting with `1.0` for the input.
    pub history: Vec<f64>,
    /// Enclosed mesh volume per iteration, aligned with `history`.
    pub volumes: Vec<f64>,
    pub region_faces: Vec<usize>,
    pub sdf_initial: Vec<f64>,
    /// SDF of the region faces after the last contraction step.
    pub sdf_final: Vec<f64>,
    /// Iterations whose contraction weight was scaled down to stay in the band.
    pub damped_iterations: Vec<usize>,
}

/// Bisection steps allowed when a step overshoots below `r − e`.
const DAMPING_STEPS: usize = 40;
/// Doublings of the contraction weight allowed when a step raises the ratio.
const ESCALATION_STEPS: usize = 6;

/// A trial step: next state, moved mesh, region SDF and narrowing ratio.
type Candidate = (ContractionState, (TriMesh, Vec<f64>, f64));

/// Contracts the selected region until the narrowing ratio reaches
/// `target_ratio + tolerance` or the iteration budget is spent.
///
/// Vertices outside the region are fixed during contraction. If a step
/// would push the ratio below `target_ratio − tolerance`, its contraction
/// weight is bisected until the ratio falls inside the band. A step that
/// raises the ratio is retried with its contraction weight doubled, up to six
/// times. Afterwards the
/// seam band (region faces plus every face sharing a vertex with them) is
/// smoothed; vertices touching faces outside the band never move.
pub fn simulate_bronchoconstriction(
    mesh: &TriMesh,
    config: &ConstrictionConfig,
) -> Result<ConstrictionResult, ConstrictError> {
    config.validate()?;
    let region_faces = config.region.resolve(mesh)?;
    let region = region_vertices(mesh, &region_faces);
    let sdf_initial = compute_sdf_subset(mesh, &region_faces, &config.sdf)?;
    let upper = config.target_ratio + config.tolerance;
    let lower = config.target_ratio - config.tolerance;
    let scale = config.effective_scale();

    let mut state = ContractionState::new(mesh, config.init_constant)?;
    let mut current = mesh.clone();
    let mut history = vec![1.0];
    let mut volumes = vec![mesh.signed_volume()];
    let mut sdf_final = sdf_initial.clone();
    let mut damped_iterations = Vec::new();
    let mut rises = 0;

    let evaluate = |state: &ContractionState| -> Result<(TriMesh, Vec<f64>, f64), ConstrictError> {
        let candidate = TriMesh {
            vertices: state.vertices.clone(),
            ..mesh.clone()
        };
        let sdf = compute_sdf_subset(&candidate, &region_faces, &config.sdf)?;
        let ratio = narrowing_ratio(&sdf, &sdf_initial)?;
        Ok((candidate, sdf, ratio))
    };

    for t in 1..=config.max_iterations {
        let previous = *history.last().unwrap();
        if previous <= upper {
            break;
        }
        let step = |multiplier: f64| -> Result<Candidate, ConstrictError> {
            let next = contract::contract_step_scaled(&current, &state, &region, scale, multiplier)?;
            let outcome = evaluate(&next)?;
            Ok((next, outcome))
        };
        // Bisects the multiplier in (lo, hi) towards a ratio inside the band,
        // keeping the best candidate that does not overshoot.
        let bisect = |mut lo: f64, mut hi: f64, fallback: Candidate| {
            let mut best = fallback;
            for _ in 0..DAMPING_STEPS {
                let mid = 0.5 * (lo + hi);
                let trial = step(mid)?;
                let ratio = trial.1 .2;
                if ratio < lower {
                    hi = mid;
                } else if ratio > upper {
                    lo = mid;
                    if ratio < best.1 .2 || best.1 .2 < lower {
                        best = trial;
                    }
                } else {
                    return Ok::<_, ConstrictError>(trial);
                }
            }
            Ok(best)
        };

        let mut chosen = step(1.0)?;
        if chosen.1 .2 < lower {
            damped_iterations.push(t);
            chosen = bisect(0.0, 1.0, chosen)?;
        } else if chosen.1 .2 > previous {
            let mut multiplier = 1.0;
            for _ in 0..ESCALATION_STEPS {
                let trial = step(2.0 * multiplier)?;
                let ratio = trial.1 .2;
                if ratio < lower {
                    damped_iterations.push(t);
                    chosen = bisect(multiplier, 2.0 * multiplier, trial)?;
                    break;
                }
                multiplier *= 2.0;
                if ratio < chosen.1 .2 {
                    chosen = trial;
                }
                if ratio <= previous {
                    break;
                }
            }
        }
        let (next, outcome) = chosen;
        let (candidate, sdf, ratio) = outcome;
        rises = if ratio > previous { rises + 1 } else { 0 };
        history.push(ratio);
        volumes.push(candidate.signed_volume());
        if rises >= 3 {
            return Err(ConstrictError::Diverged(history));
        }
        state = next;
        current = candidate;
        sdf_final = sdf;
    }

    let smoothed = smooth_seam(&current, &region_faces, &config.seam)?;
    let mut out = smoothed;
    let mut scalar = vec![f64::NAN; mesh.faces.len()];
    for (&f, &v) in region_faces.iter().zip(&sdf_final) {
        scalar[f] = v;
    }
    out.face_scalar = Some(scalar);
    Ok(ConstrictionResult {
        mesh: out,
        history,
        volumes,
        region_faces,
        sdf_initial,
        sdf_final,
        damped_iterations,
    })
}

/// Faces in the seam band and the vertices allowed to move while smoothing it.
pub fn seam_band(mesh: &TriMesh, region_faces: &[usize]) -> (Vec<bool>, Vec<bool>) {
    let region = region_vertices(mesh, region_faces);
    let band: Vec<bool> = mesh.faces.iter().map(|t| t.iter().any(|&v| region[v])).collect();
    let mut movable = vec![false; mesh.vertices.len()];
    for (f, tri) in mesh.faces.iter().enumerate() {
        if band[f] {
            for &v in tri {
                movable[v] = true;
            }
        }
    }
    for (f, tri) in mesh.faces.iter().enumerate() {
        if !band[f] {
            for &v in tri {
                movable[v] = false;
            }
        }
    }
    (band, movable)
}

fn smooth_seam(mesh: &TriMesh, region_faces: &[usize], seam: &SeamSmoothing) -> Result<TriMesh, ConstrictError> {
    let (_, movable) = seam_band(mesh, region_faces);
    let mut out = taubin_smooth_masked(mesh, seam.lambda, seam.mu, seam.taubin_iterations, &movable)?;
    if let Some(cfg) = &seam.bilateral {
        out = bilateral_normal_filter_masked(&out, cfg, &movable)?;
    }
    Ok(out)
}
