use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParams { field: &'static str, message: String },

    #[error("degenerate density: min rho = {min_rho:e}")]
    DegenerateDensity { min_rho: f64 },

    #[error("nonpositive density in constructed data: {0}")]
    NonPositiveDensity(String),

    #[error("grid too small for stencil: need at least {needed} cells per axis, got {got}")]
    GridTooSmall { needed: usize, got: usize },

    #[error("field shape {got:?} does not match grid {expected:?}")]
    ShapeMismatch { expected: [usize; 3], got: [usize; 3] },

    #[error("CFL violation: dt = {dt:e} exceeds stable limit {dt_max:e}")]
    CflViolation { dt: f64, dt_max: f64 },

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("invalid functional value: {0}")]
    InvalidFunctional(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),

    #[error("series file: {0}")]
    Series(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Config-file rejections. Every variant names the offending section/key.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },

    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey { line: usize, section: String, key: String },

    #[error("missing key `{key}` in section [{section}]")]
    MissingKey { section: &'static str, key: &'static str },

    #[error("bad value for `{key}` in section [{section}]: {message}")]
    BadValue { section: &'static str, key: &'static str, message: String },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("`{field}` conflicts with checkpoint header: {message}")]
    CheckpointConflict { field: &'static str, message: String },
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,

    #[error("checkpoint version {found} not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("truncated checkpoint: expected {expected} bytes, got {got}")]
    TruncatedFile { expected: u64, got: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
