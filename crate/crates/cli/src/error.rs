//! Exit-code classification of library errors.

use std::fmt;
use std::path::Path;

use bronchi::constrict::ConstrictError;
use bronchi::generator::GeneratorError;
use bronchi::mesh::MeshError;
use bronchi::probmap::ProbMapError;
use bronchi::volume::VolumeError;
use bronchi::TreeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Bad flags, unreadable or malformed input files.
    Usage,
    /// Valid input that the requested operation cannot handle.
    Domain,
    /// Solver or convergence failure.
    Numerical,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Usage => 2,
            Kind::Domain => 3,
            Kind::Numerical => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { kind: Kind::Usage, message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self { kind: Kind::Domain, message: message.into() }
    }

    /// Prefixes the message with the file that caused it.
    pub fn at(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Diagnostics are a single line.
        f.write_str(&self.message.replace('\n', " "))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        let kind = match e {
            TreeError::MissingDiameter(_) => Kind::Domain,
            _ => Kind::Usage,
        };
        CliError { kind, message: e.to_string() }
    }
}

impl From<VolumeError> for CliError {
    fn from(e: VolumeError) -> Self {
        let kind = match e {
            VolumeError::Degenerate { .. } => Kind::Domain,
            _ => Kind::Usage,
        };
        CliError { kind, message: e.to_string() }
    }
}

impl From<GeneratorError> for CliError {
    fn from(e: GeneratorError) -> Self {
        match e {
            GeneratorError::Volume(v) => v.into(),
            GeneratorError::Tree(t) => t.into(),
            GeneratorError::InvalidConfig(_) => CliError::usage(e.to_string()),
            _ => CliError::domain(e.to_string()),
        }
    }
}

impl From<ProbMapError> for CliError {
    fn from(e: ProbMapError) -> Self {
        match e {
            ProbMapError::Volume(v) => v.into(),
            ProbMapError::GenerationAbsent(_) => CliError::domain(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        let kind = match e {
            MeshError::MissingDiameter(_) | MeshError::OpenMesh(_) => Kind::Domain,
            MeshError::Solve(_) => Kind::Numerical,
            _ => Kind::Usage,
        };
        CliError { kind, message: e.to_string() }
    }
}

impl From<ConstrictError> for CliError {
    fn from(e: ConstrictError) -> Self {
        let kind = match e {
            ConstrictError::Mesh(m) => return m.into(),
            ConstrictError::InvalidConfig(_) | ConstrictError::LengthMismatch(..) => Kind::Usage,
            ConstrictError::Diverged(_) | ConstrictError::Solver { .. } => Kind::Numerical,
            _ => Kind::Domain,
        };
        CliError { kind, message: e.to_string() }
    }
}
