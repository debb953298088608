use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Every variant maps to a stable machine-readable code via [`Error::code`].
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} do not sum to zero (residual {residual:.3e})")]
    NotZeroSum { what: &'static str, residual: f64 },

    #[error("cell count q={q} is outside the supported range for n={n}: {reason}")]
    CellCount { n: usize, q: usize, reason: &'static str },

    #[error("index {index} out of range for q={q}")]
    IndexOutOfRange { index: usize, q: usize },

    #[error("indices must be distinct")]
    RepeatedIndex,

    #[error("point is not on the unit sphere (|p| - 1 = {deviation:.3e})")]
    OffSphere { deviation: f64 },

    #[error("zero direction vector")]
    ZeroVector,

    #[error("matrix is not orthochronous Lorentz (residual {residual:.3e}, time entry {time_entry:.6})")]
    NotLorentz { residual: f64, time_entry: f64 },

    #[error("Gram matrices differ (max deviation {deviation:.3e})")]
    GramMismatch { deviation: f64 },

    #[error("{which} parameters have rank {rank}, expected {expected}")]
    RankDeficient { which: &'static str, rank: usize, expected: usize },

    #[error("alignment cannot be made orthochronous: complement has no timelike direction")]
    TimeOrientation,

    #[error("pair ({i},{j}) is malformed: |c_ij|^2 - 1 - k_ij^2 = {defect:.3e}")]
    MalformedPair { i: usize, j: usize, defect: f64 },

    #[error("constraint planes of cells {indices:?} are linearly dependent")]
    DegenerateIntersection { indices: Vec<usize> },

    #[error("point lies in the interior of cell {cell}, not on a boundary")]
    InteriorPoint { cell: usize },

    #[error("point is not on interface ({i},{j})")]
    NotOnInterface { i: usize, j: usize },

    #[error("projection pole coincides with the point")]
    AtPole,

    #[error("no admissible projection pole found")]
    NoPole,

    #[error("cluster lacks the reflection symmetry: <c_{cell}, N> = {value:.3e}")]
    SymmetryViolated { cell: usize, value: f64 },

    #[error("interface ({i},{j}) reaches the bounding radius")]
    Unbounded { i: usize, j: usize },

    #[error("volume target must lie in the open simplex")]
    VolumeTarget,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("removing vertex {vertex} disconnects the graph")]
    CutVertex { vertex: usize },

    #[error("edge weight must be positive, found {weight}")]
    NonPositiveWeight { weight: f64 },

    #[error("graph enumeration supports at most 8 vertices, requested {q}")]
    TooManyVertices { q: usize },

    #[error("ring curvatures must be positive, found {value}")]
    NonPositiveCurvature { value: f64 },

    #[error("degenerate plotting plane")]
    DegeneratePlane,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cluster file does not match the schema: {0}")]
    Schema(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable identifier for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "E_DIMENSION",
            Error::NotZeroSum { .. } => "E_ZERO_SUM",
            Error::CellCount { .. } => "E_CELL_COUNT",
            Error::IndexOutOfRange { .. } => "E_INDEX",
            Error::RepeatedIndex => "E_INDEX",
            Error::OffSphere { .. } => "E_OFF_SPHERE",
            Error::ZeroVector => "E_ZERO_VECTOR",
            Error::NotLorentz { .. } => "E_NOT_LORENTZ",
            Error::GramMismatch { .. } => "E_GRAM_MISMATCH",
            Error::RankDeficient { .. } => "E_RANK",
            Error::TimeOrientation => "E_TIME_ORIENTATION",
            Error::MalformedPair { .. } => "E_MALFORMED_PAIR",
            Error::DegenerateIntersection { .. } => "E_DEGENERATE",
            Error::InteriorPoint { .. } => "E_INTERIOR_POINT",
            Error::NotOnInterface { .. } => "E_NOT_ON_INTERFACE",
            Error::AtPole => "E_AT_POLE",
            Error::NoPole => "E_NO_POLE",
            Error::SymmetryViolated { .. } => "E_SYMMETRY",
            Error::Unbounded { .. } => "E_UNBOUNDED",
            Error::VolumeTarget => "E_VOLUME_TARGET",
            Error::Disconnected => "E_DISCONNECTED",
            Error::CutVertex { .. } => "E_CUT_VERTEX",
            Error::NonPositiveWeight { .. } => "E_WEIGHT",
            Error::TooManyVertices { .. } => "E_TOO_LARGE",
            Error::NonPositiveCurvature { .. } => "E_CURVATURE",
            Error::DegeneratePlane => "E_PLANE",
            Error::Invalid(_) => "E_INPUT",
            Error::Schema(_) => "E_SCHEMA",
            Error::Io(_) => "E_IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
