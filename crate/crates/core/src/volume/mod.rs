//! Lung regions: voxel masks and analytic ellipsoid phantoms.
//!
//! Region boundaries are closed. A voxel mask cell with index
//! `floor((p - origin) / spacing)` holds the membership of `p`; points whose
//! index falls outside the grid are outside the region.

pub mod io;

use crate::geom::Vec3;
use crate::rng::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("grid dimensions must be positive, got {0:?}")]
    InvalidDims([usize; 3]),
    #[error("voxel spacing must be positive and finite, got {0:?}")]
    InvalidSpacing([f64; 3]),
    #[error("ellipsoid semi-axes must be positive, got {0:?}")]
    InvalidSemiAxes([f64; 3]),
    #[error("value array has {got} entries, grid needs {expected}")]
    ValueCount { expected: usize, got: usize },
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error("degenerate volume: rejection acceptance rate {rate:.3e} below 1e-4")]
    Degenerate { rate: f64 },
    #[error("header line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("expected dtype {expected}, header says {found}")]
    Dtype { expected: &'static str, found: String },
    #[error("raw file has {got} bytes, expected {expected}")]
    RawSize { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Placement of a regular voxel grid in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dims: [usize; 3],
    pub spacing: Vec3,
    pub origin: Vec3,
}

impl Grid {
    pub fn new(dims: [usize; 3], spacing: Vec3, origin: Vec3) -> Result<Self, VolumeError> {
        if dims.contains(&0) {
            return Err(VolumeError::InvalidDims(dims));
        }
        if !spacing.iter().all(|s| *s > 0.0 && s.is_finite()) || !origin.iter().all(|o| o.is_finite()) {
            return Err(VolumeError::InvalidSpacing(spacing.into()));
        }
        Ok(Self { dims, spacing, origin })
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing.x * self.spacing.y * self.spacing.z
    }

    /// Linear index with x varying fastest.
    pub fn linear(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    /// Voxel centre offset from the grid origin.
    pub fn local_center(&self, [i, j, k]: [usize; 3]) -> Vec3 {
        Vec3::new(
            (i as f64 + 0.5) * self.spacing.x,
            (j as f64 + 0.5) * self.spacing.y,
            (k as f64 + 0.5) * self.spacing.z,
        )
    }

    pub fn center(&self, ijk: [usize; 3]) -> Vec3 {
        self.origin + self.local_center(ijk)
    }

    /// Voxel containing `p`, or `None` outside the grid.
    pub fn locate(&self, p: &Vec3) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.spacing[a]).floor();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            out[a] = f as usize;
        }
        Some(out)
    }

    pub fn extent(&self) -> (Vec3, Vec3) {
        let size = Vec3::new(
            self.dims[0] as f64 * self.spacing.x,
            self.dims[1] as f64 * self.spacing.y,
            self.dims[2] as f64 * self.spacing.z,
        );
        (self.origin, self.origin + size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelMask {
    pub grid: Grid,
    /// One byte per voxel, nonzero means inside; x-fastest ordering.
    pub values: Vec<u8>,
}

impl VoxelMask {
    pub fn new(grid: Grid, values: Vec<u8>) -> Result<Self, VolumeError> {
        if values.len() != grid.voxel_count() {
            return Err(VolumeError::ValueCount {
                expected: grid.voxel_count(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.grid
            .locate(p)
            .is_some_and(|[i, j, k]| self.values[self.grid.linear(i, j, k)] != 0)
    }

    pub fn occupied(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    /// Samples `volume` at voxel centres of `grid`.
    pub fn rasterize(volume: &LungVolume, grid: Grid) -> Self {
        let values = (0..grid.voxel_count())
            .map(|idx| u8::from(volume.contains(&grid.center(grid.unravel(idx)))))
            .collect();
        Self { grid, values }
    }

    /// Bounding box of occupied voxels, `None` when the mask is empty.
    pub fn occupied_bounds(&self) -> Option<(Vec3, Vec3)> {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        for (idx, _) in self.values.iter().enumerate().filter(|(_, &v)| v != 0) {
            any = true;
            let ijk = self.grid.unravel(idx);
            for a in 0..3 {
                lo[a] = lo[a].min(ijk[a]);
                hi[a] = hi[a].max(ijk[a] + 1);
            }
        }
        any.then(|| {
            let s = self.grid.spacing;
            let o = self.grid.origin;
            let corner = |c: [usize; 3]| {
                Vec3::new(
                    o.x + c[0] as f64 * s.x,
                    o.y + c[1] as f64 * s.y,
                    o.z + c[2] as f64 * s.z,
                )
            };
            (corner(lo), corner(hi))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    pub center: Vec3,
    pub semi_axes: Vec3,
}

impl Ellipsoid {
    pub fn new(center: Vec3, semi_axes: Vec3) -> Result<Self, VolumeError> {
        if !semi_axes.iter().all(|a| *a > 0.0 && a.is_finite()) {
            return Err(VolumeError::InvalidSemiAxes(semi_axes.into()));
        }
        Ok(Self { center, semi_axes })
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let q = (p - self.center).component_div(&self.semi_axes);
        q.norm_squared() <= 1.0
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.semi_axes.product()
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        (self.center - self.semi_axes, self.center + self.semi_axes)
    }
}

/// The host region for tree growth.
#[derive(Debug, Clone, PartialEq)]
pub enum LungVolume {
    Mask(VoxelMask),
    Ellipsoid(Ellipsoid),
    /// Union of disjoint ellipsoids, e.g. a two-lung phantom.
    Union(Vec<Ellipsoid>),
}

/// Candidates drawn before the acceptance rate is checked.
const PROBE_DRAWS: usize = 20_000;
const MIN_ACCEPTANCE: f64 = 1e-4;

impl LungVolume {
    /// Two ellipsoidal lungs, 130 mm apart, about 4.1 L in total.
    ///
    /// The trachea of [`crate::generator::phantom_seed_tree`] enters from +z
    /// between them.
    pub fn two_lung_phantom() -> Self {
        let axes = Vec3::new(55.0, 75.0, 120.0);
        LungVolume::Union(vec![
            Ellipsoid { center: Vec3::new(-65.0, 0.0, 0.0), semi_axes: axes },
            Ellipsoid { center: Vec3::new(65.0, 0.0, 0.0), semi_axes: axes },
        ])
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        match self {
            LungVolume::Mask(m) => m.contains(p),
            LungVolume::Ellipsoid(e) => e.contains(p),
            LungVolume::Union(es) => es.iter().any(|e| e.contains(p)),
        }
    }

    /// Region volume in mm³. Union members are assumed disjoint.
    pub fn volume_mm3(&self) -> f64 {
        match self {
            LungVolume::Mask(m) => m.occupied() as f64 * m.grid.voxel_volume(),
            LungVolume::Ellipsoid(e) => e.volume(),
            LungVolume::Union(es) => es.iter().map(Ellipsoid::volume).sum(),
        }
    }

    /// Axis-aligned box enclosing the region; `None` for an empty region.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        match self {
            LungVolume::Mask(m) => m.occupied_bounds(),
            LungVolume::Ellipsoid(e) => Some(e.bounds()),
            LungVolume::Union(es) => es
                .iter()
                .map(Ellipsoid::bounds)
                .reduce(|(l1, h1), (l2, h2)| (l1.inf(&l2), h1.sup(&h2))),
        }
    }

    /// `n` points drawn uniformly from the region by rejection sampling from
    /// its bounding box, using [`Rng`] seeded with `seed`.
    pub fn sample_uniform(&self, n: usize, seed: u64) -> Result<Vec<Vec3>, VolumeError> {
        if n == 0 {
            return Err(VolumeError::ZeroCount);
        }
        let (lo, hi) = self.bounds().ok_or(VolumeError::Degenerate { rate: 0.0 })?;
        let mut rng = Rng::new(seed);
        let mut points = Vec::with_capacity(n);
        let mut draws = 0usize;
        while points.len() < n {
            let p = Vec3::new(
                rng.uniform_range(lo.x, hi.x),
                rng.uniform_range(lo.y, hi.y),
                rng.uniform_range(lo.z, hi.z),
            );
            draws += 1;
            if self.contains(&p) {
                points.push(p);
            }
            if draws == PROBE_DRAWS {
                let rate = points.len() as f64 / draws as f64;
                if rate < MIN_ACCEPTANCE {
                    return Err(VolumeError::Degenerate { rate });
                }
            }
        }
        Ok(points)
    }
}
