use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the layer that raises them;
/// the CLI maps them onto exit codes (parse vs contract vs verification).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("context mismatch: expected {expected} variables, found {found}")]
    ContextMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },

    #[error("operands live on different charts")]
    ChartMismatch,

    #[error("point does not satisfy the chart relations")]
    PointOffChart,

    #[error("blowup center vanishes modulo the chart relations")]
    ZeroCenter,

    #[error("blowup tower exceeded max depth {max_depth}")]
    DepthExceeded { max_depth: usize },

    #[error("no principal generator found for the stage {stage} ideal ({ideal}) on this chart")]
    NotPrincipal { stage: usize, ideal: String },

    #[error("no unit pivot found at stage {stage} after generic row/column mixing")]
    NoUnitPivot { stage: usize },

    #[error("minor size {size} exceeds the supported bound of 6")]
    MinorTooLarge { size: usize },

    #[error("kernel generators not found below degree cap {cap}")]
    DegreeCapExceeded { cap: i64 },

    #[error("kernel rank {rank} is below the geometry dimension {dim}")]
    RankDimensionMismatch { rank: usize, dim: usize },

    #[error("cohomology in positive degree is not torsion")]
    TorsionHypothesis,

    #[error("operation requires a surface geometry")]
    SurfaceOnly,

    #[error("no common leaf between the two resolutions")]
    NoCommonLeaf,

    #[error("blown-up points must be distinct")]
    DuplicatePoint,

    #[error("base locus of the sequence is not empty")]
    BaseLocus,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
