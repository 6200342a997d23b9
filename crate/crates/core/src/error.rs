use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("space dimension must be at least 2 (got {0})")]
    DimensionTooSmall(usize),

    #[error("invalid norm exponent r = {0}")]
    InvalidNormExponent(f64),

    #[error("weights must be strictly positive and finite")]
    InvalidWeights,

    #[error("gauge exponent must satisfy p > 1 (got {0})")]
    InvalidGaugeExponent(f64),

    #[error("norm exponent r = {0} is not smooth; duality mappings and moduli need r in (1, inf)")]
    UnsupportedNorm(f64),

    #[error("subdifferential at the origin is multivalued for this functional")]
    MultivaluedSubdifferential,

    #[error("functional has no closed-form conjugate: {0}")]
    NotConjugable(&'static str),

    #[error("scalar function is not convex on its domain: {0}")]
    NonConvex(String),

    #[error("argument {value} outside the admissible range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("grid function needs at least {needed} finite points (got {found})")]
    DegenerateGrid { needed: usize, found: usize },

    #[error("grid abscissae must be strictly increasing")]
    UnsortedGrid,

    #[error("cannot fit a power type: {0}")]
    NoFit(&'static str),

    #[error("envelope is not nondecreasing at index {0}")]
    NonMonotoneEnvelope(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
