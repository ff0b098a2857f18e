use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature order {order} outside the supported range 1..={cap}")]
    QuadOrder { order: usize, cap: usize },

    #[error("Hermite index ({i},{j}) is not resolved by a quadrature rule of order {order}")]
    IndexOutOfRange { i: usize, j: usize, order: usize },

    #[error("Hermite degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("series order {order} exceeds the cap {cap}")]
    SeriesOrder { order: usize, cap: usize },

    #[error("series_pow needs a base with constant term exactly 1")]
    NonunitConstant,

    #[error("binomial exponent must be free of kappa")]
    KappaInExponent,

    #[error("E = {value} <= 0 at y = ({y1}, {y2}), s = {s}")]
    NonpositiveE { y1: f64, y2: f64, s: f64, value: f64 },

    #[error("initial-data bracket = {value} <= 0 at y = ({y1}, {y2})")]
    NonpositiveBracket { y1: f64, y2: f64, value: f64 },

    #[error("u* diverges at the origin")]
    DivergesAtOrigin,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integration left the regime at s = {s}: sup|w| = {sup}")]
    Overflow { s: f64, sup: f64 },

    #[error("shifted point ({y1}, {y2}) lies outside the interpolation hull")]
    OutOfHull { y1: f64, y2: f64 },

    #[error("ODE solution blows up at t = {t_blowup} before the requested end time {t_end}")]
    BlowupBeforeEnd { t_blowup: f64, t_end: f64 },

    #[error("no trapped trajectory supplied")]
    MissingTrajectory,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;
