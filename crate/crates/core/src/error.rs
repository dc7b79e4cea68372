use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a function (non-positive mass, field
    /// sampled outside its grid, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("tabulated profile queried at xi = {xi}, outside knot range [{lo}, {hi}]")]
    Extrapolation { xi: f64, lo: f64, hi: f64 },

    #[error("front collapsed at step {step}: {alive} rays alive, at least 3 required")]
    FrontCollapse { step: usize, alive: usize },

    #[error("station zeta = {station} is not crossed by at least two rays (run extent [0, {extent}])")]
    Range { station: f64, extent: f64 },

    #[error("paraxial domain too small: boundary intensity ratio {ratio:e} exceeds {threshold:e}")]
    DomainTooSmall { ratio: f64, threshold: f64 },
}
