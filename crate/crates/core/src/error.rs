use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the analysis modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cube at level {level} has no ancestor {levels_up} levels up")]
    AboveRoot { level: u32, levels_up: u32 },

    #[error("cube side exceeds one sixth of the root side")]
    TooLarge,

    #[error("point does not belong to this metric backend")]
    BackendMismatch,

    #[error("distance matrix is not a metric: triangle ({i},{j},{k}) violated by {violation:e}")]
    InvalidMetric {
        i: usize,
        j: usize,
        k: usize,
        violation: f64,
    },

    #[error("evaluation point lies outside the sampled domain")]
    OutOfDomain,

    #[error("sampling grid too coarse: {nodes} nodes per analyzed cube side, need at least {need}")]
    ResolutionTooCoarse { nodes: usize, need: usize },

    #[error("segment endpoints coincide")]
    DegenerateSegment,

    #[error("every sampled line missed the length threshold")]
    InsufficientCoverage,

    #[error("line meets the window in a chord shorter than the separation floor")]
    ShortChord,

    #[error("query points are closer than the separation floor")]
    PointsTooClose,

    #[error("need at least {need} displacement pairs, got {got}")]
    InsufficientPairs { need: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code the CLI maps this error to: 1 for configuration problems,
    /// 2 for numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) => 1,
            _ => 2,
        }
    }
}
