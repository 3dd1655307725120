use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("boundary condition `{bc}` does not fit domain `{domain}`")]
    MismatchedBoundary { bc: String, domain: String },
    #[error("integration overflow at x = {x}")]
    Overflow { x: f64 },
    #[error("energy is not finite")]
    NonFiniteEnergy,
    #[error("pole of the function at x = {x}")]
    Pole { x: f64 },
    #[error("coordinate {x} lies outside the grid [{lo}, {hi}]")]
    OutsideGrid { x: f64, lo: f64, hi: f64 },
    #[error("solutions are sampled on different grids")]
    GridMismatch,
    #[error("endpoint is limit point; no reference modes exist")]
    LimitPointEndpoint,
    #[error("no asymptotic data declared for the endpoint")]
    UnknownAsymptotics,
    #[error("extrapolation did not converge: {0}")]
    NonConvergent(String),
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix determinant is {det}, expected 1")]
    BadDeterminant { det: f64 },
    #[error("function vanishes inside the range at x = {x}")]
    ZeroInRange { x: f64 },
    #[error("root finding failed: {0}")]
    RootNotFound(String),
    #[error("long-range potential: {0}")]
    LongRange(String),
    #[error("ill-conditioned request: {0}")]
    IllConditioned(String),
    #[error("time step too coarse; use dt <= {suggested_dt:e}")]
    ResolutionViolation { suggested_dt: f64 },
    #[error("packet peak is ambiguous at t = {t}")]
    AmbiguousPeak { t: f64 },
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
