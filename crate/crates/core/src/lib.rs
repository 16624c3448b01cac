//! Tangential calculus on closed parametric surfaces and numerical
//! verification of the asymptotic identities behind incompressible flow in
//! moving thin shells.
//!
//! Surfaces are analytic (sphere, torus, ellipsoid). Derivatives along a
//! surface are computed two independent ways: exactly, by differentiating
//! chart expressions on bivariate Taylor jets, and by central finite
//! differences of the constant-normal extension. The [`campaign`] module runs
//! every check and writes deterministic reports.

pub mod campaign;
pub mod convergence;
pub mod energy;
pub mod error;
pub mod expansion;
pub mod geometry;
pub mod jet;
pub mod motion;
pub mod quadrature;
pub mod tancalc;

use nalgebra::{Matrix3, Vector3};

pub type V3 = Vector3<f64>;
pub type M3 = Matrix3<f64>;
/// Vector of jets.
pub type JV = Vector3<jet::Jet>;
/// Matrix of jets.
pub type JM = Matrix3<jet::Jet>;

pub use convergence::{fit_slope, ResidualReport, SlopeFit, Verdict};
pub use error::{Error, Result};
pub use geometry::{ClosedSurface, GeometryEval, Shape, SurfacePatch, SurfacePoint, TubularPoint};
pub use jet::Jet;
pub use motion::{Motion, MovingSurface};
pub use quadrature::SurfaceRule;
