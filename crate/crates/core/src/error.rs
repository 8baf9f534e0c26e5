use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: t_max ({t_max}) must exceed t_min ({t_min})")]
    InvalidDomain { t_min: f64, t_max: f64 },
    #[error("invalid grid size {0}: must be a power of two and at least 16")]
    InvalidSize(usize),
    #[error("invalid width {0}: must be positive")]
    InvalidWidth(f64),
    #[error("field has {got} samples but the grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value at sample {0}")]
    NonFinite(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("coefficient {name} vanishes at z = {z}")]
    SingularCoefficient { name: &'static str, z: f64 },
    #[error("finite differences need at least 5 uniformly spaced points, got {0}")]
    InsufficientGrid(usize),
    #[error("quadrature failed on [0, {z}]: {reason}")]
    QuadratureFailure { z: f64, reason: String },

    #[error("step became unstable at z = {z}: {reason}")]
    StepInstability { z: f64, reason: String },
    #[error("snapshot index {index} has no neighbours in a trajectory of {len} snapshots")]
    BoundaryIndex { index: usize, len: usize },

    #[error("negative evolution coordinate z = {0}")]
    NegativeZ(f64),
    #[error("Z = {big_z} lies outside the map range [0, {horizon})")]
    OutOfRange { big_z: f64, horizon: f64 },
    #[error("evaluation point {point} lies outside the source box [{t_min}, {t_max}] ({hint})")]
    OutOfBox {
        point: f64,
        t_min: f64,
        t_max: f64,
        hint: String,
    },
    #[error("soliton amplitude must be positive, got {0}")]
    InvalidAmplitude(f64),
    #[error("bright solitons need a focusing nonlinearity (rho = +1)")]
    DefocusingRequested,

    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("z must be positive, got {0}")]
    NonPositiveZ(f64),
    #[error("no sign change of G - H in (0, {horizon}]: {diagnostics}")]
    BracketFailure { horizon: f64, diagnostics: String },
    #[error("L = {l} is too large: G(L) - H(L) = {gap} is negative")]
    LTooLarge { l: f64, gap: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}
