use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected a {expected}x{expected} reward matrix, got {got}x{got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("a reward matrix needs at least 2 arms, got {0}")]
    TooFewArms(usize),

    #[error("matrix is not square: {rows} rows, but row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },

    #[error("reward matrix entry ({row},{col}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("policy matrix row {row} sums to {sum}, expected 1 within 1e-9")]
    NotRowStochastic { row: usize, sum: f64 },

    #[error("policy matrix entry ({row},{col}) = {value} is negative")]
    NegativePolicyEntry { row: usize, col: usize, value: f64 },

    #[error("probability {name} = {value} lies outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("{name} = {value} must lie strictly inside (0, 1)")]
    OutOfDomain { name: &'static str, value: f64 },

    #[error("the urn holds no balls")]
    EmptyUrn,

    #[error("constant-influence dynamics are only defined for 2 colors, got {0}")]
    UnsupportedDynamics(usize),

    #[error("degenerate dynamics: d1 + d2 = 0, the population share never moves")]
    DegenerateDrift,

    #[error("gap is zero: the exploration length 8 ln(T) / delta1^2 is unbounded")]
    ZeroGap,

    #[error("exploration length must satisfy 1 <= m <= horizon, got m = {m}, horizon = {horizon}")]
    BadExplorationLength { m: u64, horizon: u64 },

    #[error("posterior parameter {name}({row},{col}) = {value} must be >= 1")]
    BadPosteriorParameter {
        name: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("popularity entry ({row},{col}) = {value} must be strictly positive")]
    BadPopularityEntry { row: usize, col: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
