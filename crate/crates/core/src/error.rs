use thiserror::Error;

use crate::geometry::SurfacePoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse spec `{spec}`: {reason}")]
    Spec { spec: String, reason: String },

    #[error("degenerate immersion on patch {} at s = ({:.6}, {:.6})", .0.patch, .0.s[0], .0.s[1])]
    DegenerateChart(SurfacePoint),

    #[error("point at distance {dist:.3e} lies outside the tubular neighborhood (reach {reach:.3e})")]
    OutsideReach { dist: f64, reach: f64 },

    #[error("shell half-width {eps:.3e} exceeds the admissible maximum {max:.3e}")]
    WidthTooLarge { eps: f64, max: f64 },

    #[error("field `{name}` is not tangential: |F.nu| = {normal:.3e}")]
    NotTangential { name: String, normal: f64 },

    #[error("velocity normal component {vn:.6e} does not match surface normal speed {speed:.6e}")]
    NormalSpeedMismatch { vn: f64, speed: f64 },

    #[error("jacobian J = {0:.3e} is not positive")]
    NonPositiveJacobian(f64),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
