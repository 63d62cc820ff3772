//! Subcommand implementations.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bronchi::constrict::{
    simulate_bronchoconstriction, ConstrictionConfig, RegionSelector, SdfConfig, SeamSmoothing,
};
use bronchi::format::{g9, g9_opt};
use bronchi::generator::{
    assign_diameters, generate as grow, phantom_seed_tree, DiameterConfig, DiameterMode,
    GeneratorConfig,
};
use bronchi::mesh::{io as mesh_io, sample_surface_point_cloud, synthesize_tube_mesh};
use bronchi::probmap::{export_volume, generation_probability_map};
use bronchi::tree::io::{attribute_csv, read_tree, skeleton_text, Skeleton};
use bronchi::tree::{detect_root, morphometry as measure, OrderStats};
use bronchi::volume::{io::read_mask, Grid, LungVolume};
use bronchi::{AirwayTree, Vec3};

use crate::error::CliError;
use crate::{
    ConstrictArgs, DiameterArgs, GenerateArgs, MeshArgs, Mode, MorphometryArgs, Phantom,
    ProbmapArgs, RootDetectArgs,
};

/// Grid padding around the tree for automatic probability-map grids, in σ.
const AUTO_GRID_PAD_SIGMAS: f64 = 4.0;

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::from(e).at(path))
}

fn load_tree(path: &Path) -> Result<AirwayTree, CliError> {
    read_tree(path).map_err(|e| CliError::from(e).at(path))
}

impl DiameterArgs {
    fn config(&self) -> DiameterConfig {
        DiameterConfig {
            d0_mm: self.d0,
            exponent: self.exponent,
            mode: match self.diameter_mode {
                Mode::PowerLaw => DiameterMode::PowerLaw,
                Mode::FlowSplit => DiameterMode::FlowSplit,
            },
        }
    }
}

pub fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    let volume = match (&a.volume, a.phantom) {
        (Some(path), _) => LungVolume::Mask(read_mask(path).map_err(|e| CliError::from(e).at(path))?),
        (None, Some(Phantom::TwoEllipsoids)) => LungVolume::two_lung_phantom(),
        (None, None) => return Err(CliError::usage("one of --volume or --phantom is required")),
    };
    let seed = match &a.seed_tree {
        Some(path) => load_tree(path)?,
        None if a.phantom.is_some() => phantom_seed_tree(),
        None => return Err(CliError::usage("--seed-tree is required with --volume")),
    };
    let config = GeneratorConfig {
        n_points: a.n_points,
        branch_fraction: a.branch_fraction,
        terminal_length_mm: a.terminal_length,
        angle_limit_deg: a.angle_limit,
        min_points_per_region: a.min_points,
        max_generations: a.max_generations,
        rng_seed: a.rng_seed,
    };
    let tree = grow(&seed, &volume, &config)?;
    let tree = assign_diameters(&tree, &a.diameters.config())?;
    write(&with_suffix(&a.out, ".skel"), &skeleton_text(&tree))?;
    write(&with_suffix(&a.out, "_branches.csv"), &attribute_csv(&tree))?;
    println!("branches {}", tree.len());
    Ok(())
}

fn order_csv(table: &[OrderStats]) -> String {
    let mut out = String::from("order,count,mean_diameter_mm,mean_length_mm\n");
    for s in table {
        writeln!(out, "{},{},{},{}", s.order, s.count, g9_opt(s.mean_diameter), g9(s.mean_length)).unwrap();
    }
    out
}

pub fn morphometry(a: &MorphometryArgs) -> Result<(), CliError> {
    let tree = load_tree(&a.tree)?;
    let s = measure(&tree);
    if s.rb_h.is_none() {
        eprintln!(
            "warning: branching ratios undefined, tree has {} distinct order(s)",
            s.horsfield.len()
        );
    }
    write(&with_suffix(&a.out, "_horsfield.csv"), &order_csv(&s.horsfield))?;
    write(&with_suffix(&a.out, "_strahler.csv"), &order_csv(&s.strahler))?;

    let mut gens = String::from(
        "generation,count,mean_diameter_mm,std_diameter_mm,mean_length_mm,std_length_mm,mean_angle_deg,std_angle_deg\n",
    );
    for g in &s.generations {
        writeln!(
            gens,
            "{},{},{},{},{},{},{},{}",
            g.generation,
            g.count,
            g9_opt(g.mean_diameter),
            g9_opt(g.std_diameter),
            g9(g.mean_length),
            g9(g.std_length),
            g9_opt(g.mean_angle),
            g9_opt(g.std_angle),
        )
        .unwrap();
    }
    write(&with_suffix(&a.out, "_generations.csv"), &gens)?;

    let summary = format!(
        "rb_h,rd_h,rl_h,rb_s,rd_s,rl_s,mean_angle_deg,std_angle_deg,terminal_count,diameter_decline_mean,diameter_decline_std\n{}\n",
        [
            g9_opt(s.rb_h),
            g9_opt(s.rd_h),
            g9_opt(s.rl_h),
            g9_opt(s.rb_s),
            g9_opt(s.rd_s),
            g9_opt(s.rl_s),
            g9_opt(s.mean_angle),
            g9_opt(s.std_angle),
            s.terminal_count.to_string(),
            g9_opt(s.diameter_decline_mean),
            g9_opt(s.diameter_decline_std),
        ]
        .join(",")
    );
    write(&with_suffix(&a.out, "_summary.csv"), &summary)?;
    Ok(())
}

fn auto_grid(tree: &AirwayTree, spacing: Vec3, sigma: f64) -> Result<Grid, CliError> {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for n in tree.nodes() {
        lo = lo.inf(&n.position);
        hi = hi.sup(&n.position);
    }
    let pad = Vec3::repeat(AUTO_GRID_PAD_SIGMAS * sigma);
    let mut origin = Vec3::zeros();
    let mut dims = [0usize; 3];
    for k in 0..3 {
        origin[k] = ((lo[k] - pad[k]) / spacing[k]).floor() * spacing[k];
        dims[k] = (((hi[k] + pad[k] - origin[k]) / spacing[k]).ceil() as usize).max(1);
    }
    Ok(Grid::new(dims, spacing, origin)?)
}

pub fn probmap(a: &ProbmapArgs) -> Result<(), CliError> {
    let tree = load_tree(&a.tree)?;
    let spacing = Vec3::from_column_slice(&a.spacing);
    if !(a.sigma > 0.0 && a.sigma.is_finite()) {
        return Err(CliError::usage(format!("sigma must be positive and finite, got {}", a.sigma)));
    }
    let grid = match (&a.dims, &a.origin) {
        (Some(d), Some(o)) => Grid::new([d[0], d[1], d[2]], spacing, Vec3::from_column_slice(o))?,
        _ => auto_grid(&tree, spacing, a.sigma)?,
    };
    let volume = generation_probability_map(&tree, a.generation, &grid, a.sigma)?;
    export_volume(&volume, &a.out).map_err(|e| CliError::from(e).at(&a.out))?;
    println!("max {}", g9(volume.max_value()));
    Ok(())
}

pub fn mesh(a: &MeshArgs) -> Result<(), CliError> {
    let mut tree = load_tree(&a.tree)?;
    if a.assign_diameters {
        tree = assign_diameters(&tree, &a.diameters.config())?;
    } else if !tree.has_diameters() {
        return Err(CliError::domain(format!(
            "{}: tree has no diameters (use --assign-diameters)",
            a.tree.display()
        )));
    }
    let mesh = synthesize_tube_mesh(&tree, a.segments)?;
    let obj = with_suffix(&a.out, ".obj");
    write(&obj, &mesh_io::obj_text(&mesh))?;
    write(&with_suffix(&a.out, "_faces.csv"), &mesh_io::face_attribute_csv(&mesh))?;
    if let Some(density) = a.point_density {
        let points = sample_surface_point_cloud(&tree, density, a.rng_seed)?;
        let mut csv = String::from("x,y,z,branch_id\n");
        for (p, b) in points {
            writeln!(csv, "{},{},{},{}", g9(p.x), g9(p.y), g9(p.z), b).unwrap();
        }
        write(&with_suffix(&a.out, "_points.csv"), &csv)?;
    }
    println!("faces {}", mesh.faces.len());
    Ok(())
}

pub fn constrict(a: &ConstrictArgs) -> Result<(), CliError> {
    let mut mesh = mesh_io::read_obj(&a.mesh).map_err(|e| CliError::from(e).at(&a.mesh))?;
    if let Some(path) = &a.faces {
        let attrs = mesh_io::read_face_attributes(path, mesh.faces.len())
            .map_err(|e| CliError::from(e).at(path))?;
        mesh.face_branch = attrs.branch.into_iter().collect();
    }
    let region = if !a.branch.is_empty() {
        RegionSelector::Branches(a.branch.iter().copied().collect())
    } else if !a.generation.is_empty() {
        let path = a.tree.as_ref().ok_or_else(|| CliError::usage("--generation requires --tree"))?;
        let tree = load_tree(path)?;
        RegionSelector::Generations {
            generations: a.generation.iter().copied().collect::<BTreeSet<_>>(),
            branch_generations: tree.branches().iter().map(|b| b.generation).collect(),
        }
    } else {
        RegionSelector::All
    };
    if !matches!(region, RegionSelector::All) && mesh.face_branch.is_none() {
        return Err(CliError::usage("branch selectors need --faces with a branch label on every face"));
    }
    let config = ConstrictionConfig {
        target_ratio: a.target_ratio,
        tolerance: a.tolerance,
        max_iterations: a.max_iterations,
        contraction_scale: a.contraction_scale,
        init_constant: a.init_constant,
        omega: a.omega,
        region,
        sdf: SdfConfig {
            cone_half_angle_deg: a.cone_angle,
            rays_per_face: a.rays,
            normalize: a.normalize,
        },
        seam: SeamSmoothing {
            taubin_iterations: a.taubin_iterations,
            lambda: a.taubin_lambda,
            mu: a.taubin_mu,
            bilateral: None,
        },
    };
    let result = simulate_bronchoconstriction(&mesh, &config)?;
    write(&with_suffix(&a.out, ".obj"), &mesh_io::obj_text(&result.mesh))?;
    write(&with_suffix(&a.out, "_faces.csv"), &mesh_io::face_attribute_csv(&result.mesh))?;
    let mut history = String::from("iteration,ratio\n");
    for (i, r) in result.history.iter().enumerate() {
        writeln!(history, "{i},{}", g9(*r)).unwrap();
    }
    write(&with_suffix(&a.out, "_history.csv"), &history)?;
    println!("ratio {}", g9(*result.history.last().unwrap()));
    Ok(())
}

pub fn root_detect(a: &RootDetectArgs) -> Result<(), CliError> {
    let sk = Skeleton::read(&a.skeleton).map_err(|e| CliError::from(e).at(&a.skeleton))?;
    let root = detect_root(&sk.nodes, &sk.undirected_edges()).map_err(|e| CliError::from(e).at(&a.skeleton))?;
    println!("{root}");
    Ok(())
}
