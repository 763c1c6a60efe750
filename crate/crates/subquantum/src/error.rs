use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// Construction errors (`InvalidGrid`, `InvalidDensity`, ...) come from
/// validating inputs; `BoundaryMass` and `ExpOverflow` mark conditions where a
/// computation would be numerically meaningless rather than merely inaccurate.
#[derive(Debug, Error)]
pub enum SubquantumError {
    #[error("invalid physical constant {name} = {value}; must be finite and > 0")]
    InvalidConstant { name: &'static str, value: f64 },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("grid mismatch in {context}")]
    GridMismatch { context: &'static str },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid density: {reason}")]
    InvalidDensity { reason: String },

    #[error("relative support floor {value:e} outside the accepted range (0, 1e-3]")]
    InvalidFloor { value: f64 },

    #[error("Simpson quadrature needs an odd point count per axis; axis {axis} has {n}")]
    SimpsonEvenPoints { axis: usize, n: usize },

    #[error("{context} requires a 1-dimensional grid")]
    NotOneDimensional { context: &'static str },

    #[error("invalid time step {value}; must be finite and > 0")]
    InvalidTimeStep { value: f64 },

    #[error("invalid trajectory: {reason}")]
    InvalidTrajectory { reason: String },

    #[error("heat fields disagree in gauge convention or inverse-temperature scaling")]
    GaugeMismatch,

    #[error(
        "probability mass touches the box edge: boundary/max density ratio {fraction:.3e} \
         exceeds {threshold:.1e}; enlarge the box"
    )]
    BoundaryMass { fraction: f64, threshold: f64 },

    #[error("heat-to-density map overflows: max(-alpha*Q) = {exponent:.1} exceeds 700")]
    ExpOverflow { exponent: f64 },

    #[error("convergence study needs at least 3 resolutions, got {got}")]
    TooFewResolutions { got: usize },

    #[error("invalid wavefunction: {reason}")]
    InvalidWaveFunction { reason: String },

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, SubquantumError>;
