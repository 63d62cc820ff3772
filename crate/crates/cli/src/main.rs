//! `bronchi`: batch front end for airway tree generation, morphometry,
//! probability maps, tube meshing, constriction and root detection.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "bronchi", version, about = "Bronchial airway tree toolkit")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grow a tree inside a lung volume and assign diameters.
    Generate(GenerateArgs),
    /// Order tables, ratios and per-generation statistics.
    Morphometry(MorphometryArgs),
    /// Gaussian probability volume for one generation.
    Probmap(ProbmapArgs),
    /// Closed tube surface mesh with per-face branch labels.
    Mesh(MeshArgs),
    /// Narrow the selected airways of a labelled mesh.
    Constrict(ConstrictArgs),
    /// Print the inlet node of a skeleton.
    RootDetect(RootDetectArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Phantom {
    TwoEllipsoids,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    PowerLaw,
    FlowSplit,
}

#[derive(Debug, Args)]
pub struct DiameterArgs {
    /// Trachea diameter in mm.
    #[arg(long, default_value_t = 18.0)]
    pub d0: f64,
    #[arg(long, default_value_t = 3.0)]
    pub exponent: f64,
    #[arg(long, value_enum, default_value_t = Mode::PowerLaw)]
    pub diameter_mode: Mode,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Seed skeleton; defaults to the built-in trachea and main bronchi with `--phantom`.
    #[arg(long)]
    pub seed_tree: Option<PathBuf>,
    /// Voxel mask header of the host volume.
    #[arg(long, conflicts_with = "phantom", required_unless_present = "phantom")]
    pub volume: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub phantom: Option<Phantom>,
    #[arg(long, default_value_t = 30_000)]
    pub n_points: usize,
    #[arg(long, default_value_t = 0.4)]
    pub branch_fraction: f64,
    /// Terminal branch length in mm.
    #[arg(long, default_value_t = 2.0)]
    pub terminal_length: f64,
    /// Maximum child-parent angle in degrees.
    #[arg(long, default_value_t = 60.0)]
    pub angle_limit: f64,
    #[arg(long, default_value_t = 1)]
    pub min_points: usize,
    #[arg(long, default_value_t = 23)]
    pub max_generations: u32,
    #[arg(long, default_value_t = 1)]
    pub rng_seed: u64,
    #[command(flatten)]
    pub diameters: DiameterArgs,
    /// Output prefix; writes `PREFIX.skel` and `PREFIX_branches.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MorphometryArgs {
    #[arg(long)]
    pub tree: PathBuf,
    /// Output prefix for the `_horsfield`, `_strahler`, `_generations` and `_summary` CSVs.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbmapArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub generation: u32,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Voxel counts; with `--origin`, overrides the automatic grid.
    #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"], requires = "origin")]
    pub dims: Option<Vec<usize>>,
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], allow_negative_numbers = true, requires = "dims")]
    pub origin: Option<Vec<f64>>,
    #[arg(long, num_args = 3, value_names = ["SX", "SY", "SZ"], default_values_t = [1.0, 1.0, 1.0])]
    pub spacing: Vec<f64>,
    /// Output header path; the voxels go to the companion `.raw` file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub segments: usize,
    /// Replace the tree's diameters using the diameter flags.
    #[arg(long)]
    pub assign_diameters: bool,
    #[command(flatten)]
    pub diameters: DiameterArgs,
    /// Also write `PREFIX_points.csv` with this many surface points per mm².
    #[arg(long)]
    pub point_density: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub rng_seed: u64,
    /// Output prefix; writes `PREFIX.obj` and `PREFIX_faces.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstrictArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Face attribute CSV carrying the branch labels.
    #[arg(long)]
    pub faces: Option<PathBuf>,
    /// Constrict faces of these branches.
    #[arg(long, num_args = 1.., conflicts_with = "generation")]
    pub branch: Vec<usize>,
    /// Constrict faces of branches in these generations (needs `--tree`).
    #[arg(long, num_args = 1.., requires = "tree")]
    pub generation: Vec<u32>,
    #[arg(long)]
    pub tree: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub target_ratio: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 8)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 2.0)]
    pub contraction_scale: f64,
    #[arg(long, default_value_t = 3.0)]
    pub init_constant: f64,
    #[arg(long)]
    pub omega: Option<f64>,
    /// SDF cone half angle in degrees.
    #[arg(long, default_value_t = 60.0)]
    pub cone_angle: f64,
    #[arg(long, default_value_t = 30)]
    pub rays: usize,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = 10)]
    pub taubin_iterations: usize,
    #[arg(long, default_value_t = 0.5)]
    pub taubin_lambda: f64,
    #[arg(long, default_value_t = -0.53, allow_negative_numbers = true)]
    pub taubin_mu: f64,
    /// Output prefix; writes `PREFIX.obj`, `PREFIX_faces.csv` and `PREFIX_history.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RootDetectArgs {
    #[arg(long)]
    pub skeleton: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn run() -> Result<(), CliError> {
    let args = config::expand(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            e.print()?;
            return Ok(());
        }
        Err(e) => {
            let rendered = e.to_string();
            let line: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("For more information") && !l.starts_with("tip:"))
                .collect();
            return Err(CliError::usage(line.join(" ").trim_start_matches("error: ")));
        }
    };
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Morphometry(a) => commands::morphometry(&a),
        Command::Probmap(a) => commands::probmap(&a),
        Command::Mesh(a) => commands::mesh(&a),
        Command::Constrict(a) => commands::constrict(&a),
        Command::RootDetect(a) => commands::root_detect(&a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
