use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector must have at least one entry")]
    EmptyVector,
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("zero vector has no span")]
    ZeroVector,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least two codewords, got {0}")]
    TooFewCodewords(usize),
    #[error("grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
    #[error("invalid sensor set: {0}")]
    InvalidSensorSet(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds the supported range (< 2^15)")]
    PrimeTooLarge(u64),
    #[error("field arithmetic consistency failure: {0}")]
    Internal(String),
    #[error("invalid Reed-Muller parameters m={m}, r={r}: {reason}")]
    InvalidReedMuller { m: u32, r: u32, reason: String },
    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),
    #[error("requested {requested} codewords from a codebook of {available}")]
    PruneTooLarge { requested: usize, available: usize },
    #[error("inconsistent Hamming statistics: {0}")]
    InconsistentStats(String),
    #[error("ratio {0} outside (0, 1]")]
    InvalidRatio(f64),
    #[error("beamformer dimension mismatch: {0}")]
    Dimension(String),
    #[error("assumption A3 violated: zero beam gain at grid index {index}")]
    ZeroGain { index: usize },
    #[error("row {row} has norm {norm}, expected 1")]
    RowNorm { row: usize, norm: f64 },
    #[error("position {position} outside aperture of {aperture} antennas")]
    PositionOutOfRange { position: usize, aperture: usize },
    #[error("filter norm {0} deviates from 1")]
    FilterNorm(f64),
    #[error("empty filter")]
    EmptyFilter,
    #[error("shift {max_shift} plus filter length {filter_len} exceeds {aperture} antennas")]
    ApertureOverrun { max_shift: usize, filter_len: usize, aperture: usize },
    #[error("bound regime violated: {0}")]
    Regime(String),
    #[error("Welch bound vacuous: {n_codewords} codewords in dimension {dim}")]
    WelchVacuous { dim: usize, n_codewords: usize },
    #[error("distance {0} outside [0, 1]")]
    DistanceRange(f64),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("region [{lo}, {hi}] holds fewer than 2 grid points")]
    EmptyRegion { lo: f64, hi: f64 },
    #[error("matrix parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
