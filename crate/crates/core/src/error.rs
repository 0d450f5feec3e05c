use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{nodes} quadrature nodes cannot resolve mode {k}; need at least {required}")]
    NyquistViolation {
        k: usize,
        nodes: usize,
        required: usize,
    },

    #[error("radius {rho} is outside the admissible range {range}")]
    RadiusOutOfRange { rho: f64, range: &'static str },

    #[error("extracting mode {k} at radius {rho} amplifies rounding by exp({exponent:.1}), limit is exp({limit})")]
    AmplificationOverflow {
        k: usize,
        rho: f64,
        exponent: f64,
        limit: f64,
    },

    #[error("invalid radial ladder: {0}")]
    BadLadder(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("coefficient ratios are undefined in the window: {0}")]
    LacunaryUndefined(String),

    #[error("power-law fit needs at least 8 usable points, found {usable}")]
    FitDegenerate { usable: usize },

    #[error("invalid coefficient table: {0}")]
    InvalidTable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
