use thiserror::Error;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: parse failures, violated model assumptions, wrong arguments.
    Input,
    /// A numerical procedure could not deliver a result.
    Numerical,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("the switching law is undefined at the origin")]
    Origin,

    #[error("lambda = {lambda} lies outside the parameter domain [{lo}, {hi}]")]
    Domain { lambda: f64, lo: f64, hi: f64 },

    #[error("section map {map} expects entry on the {expected} semi-axis, got {entry}")]
    Side {
        map: u8,
        expected: &'static str,
        entry: f64,
    },

    #[error("non-transversal crossing at t = {time} near ({x1}, {x2}): normal speed {normal_speed:e}")]
    Tangency {
        time: f64,
        x1: f64,
        x2: f64,
        normal_speed: f64,
    },

    #[error("trajectory turned counter-clockwise at t = {time} near ({x1}, {x2})")]
    CounterRotation { time: f64, x1: f64, x2: f64 },

    #[error("integration budget exhausted: {what}")]
    Budget { what: String },

    #[error("step size underflow at t = {time} (h = {step:e})")]
    Stiffness { time: f64, step: f64 },

    #[error("trajectory left the bounding box at t = {time} near ({x1}, {x2})")]
    Escape { time: f64, x1: f64, x2: f64 },

    #[error("no convergence: {what} (last estimates: {estimates:?})")]
    NoConvergence { what: String, estimates: Vec<f64> },

    #[error("no sign change of {what} over [{lo}, {hi}]")]
    NoBracket { what: String, lo: f64, hi: f64 },

    #[error("degenerate crossing: |dDelta/dlambda| = {derivative:e} at lambda = {lambda}")]
    Degenerate { lambda: f64, derivative: f64 },

    #[error("nonlinear part of the return map is below the integrator noise floor at lambda = {lambda}")]
    PerturbationTooSmall { lambda: f64 },

    #[error("no periodic orbit found at lambda = {lambda} for x1 in ({lo}, {hi}]")]
    NoOrbit { lambda: f64, lo: f64, hi: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Origin
            | Error::Domain { .. }
            | Error::Side { .. }
            | Error::Parse { .. }
            | Error::Validation(_)
            | Error::InvalidArgument(_)
            | Error::InsufficientData(_) => ErrorClass::Input,
            _ => ErrorClass::Numerical,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Origin => "OriginError",
            Error::Domain { .. } => "DomainError",
            Error::Side { .. } => "SideError",
            Error::Tangency { .. } => "TangencyError",
            Error::CounterRotation { .. } => "CounterRotationError",
            Error::Budget { .. } => "BudgetError",
            Error::Stiffness { .. } => "StiffnessError",
            Error::Escape { .. } => "EscapeError",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NoBracket { .. } => "NoBracket",
            Error::Degenerate { .. } => "Degenerate",
            Error::PerturbationTooSmall { .. } => "PerturbationTooSmall",
            Error::NoOrbit { .. } => "NoOrbit",
            Error::InsufficientData(_) => "InsufficientData",
            Error::Parse { .. } => "ParseError",
            Error::Validation(_) => "ValidationError",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
