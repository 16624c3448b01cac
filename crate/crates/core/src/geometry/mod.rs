//! Exact pointwise geometry of closed parametric surfaces.
//!
//! Sign convention, used everywhere in the crate: `ν` is the outward unit
//! normal, the signed distance is positive outside, `A = −∇_Γν` and
//! `H = tr A = −div_Γν`. On the unit sphere this gives `A = −P_Γ`, `H = −2`,
//! `κ₁ = κ₂ = −1`, the opposite of the sign most geometry texts use.

mod chart;
mod closest;
mod surface;

use serde::{Deserialize, Serialize};

use crate::{M3, V3};

pub use chart::{cross, dot, frob, jm_const, jm_value, jv_const, jv_value, outer, trace, ChartJets};
pub use closest::{TubularPoint, MAX_NEWTON_ITERS, ORTHO_TOL};
pub use surface::{
    ChartDerivs, ClosedSurface, ParamDomain, PatchKind, Shape, Similarity, SurfacePatch,
    SurfacePoint, SEED_GRID,
};
pub(crate) use surface::{lookup_or, split_spec};

/// Pointwise geometry at a surface point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryEval {
    pub point: V3,
    pub normal: V3,
    /// `P_Γ = I − ν⊗ν`.
    pub proj: M3,
    /// `A`, symmetric and annihilating `ν`.
    pub shape_operator: M3,
    pub mean_curvature: f64,
    pub gauss_curvature: f64,
    /// Principal curvatures in ascending order.
    pub kappa: [f64; 2],
    /// `√det g` of the chart the point was evaluated in.
    pub area_element: f64,
}

impl GeometryEval {
    /// `J(y, ρ) = (1 − ρκ₁)(1 − ρκ₂)`.
    pub fn jacobian(&self, rho: f64) -> f64 {
        (1.0 - rho * self.kappa[0]) * (1.0 - rho * self.kappa[1])
    }

    /// `1 − ρH + ρ²K`, the expanded form of [`GeometryEval::jacobian`].
    pub fn jacobian_expanded(&self, rho: f64) -> f64 {
        1.0 - rho * self.mean_curvature + rho * rho * self.gauss_curvature
    }

    /// Largest violation of `|ν| = 1`, `P_Γν = 0`, `P_Γ² = P_Γ`, `P_Γᵀ = P_Γ`,
    /// `Aν = 0`, `AP_Γ = P_ΓA = A`, `A = Aᵀ` and `H = κ₁ + κ₂`.
    pub fn invariant_defect(&self) -> f64 {
        let p = &self.proj;
        let a = &self.shape_operator;
        [
            (self.normal.norm() - 1.0).abs(),
            (p * self.normal).amax(),
            (p * p - p).amax(),
            (p.transpose() - p).amax(),
            (a * self.normal).amax(),
            (a * p - a).amax(),
            (p * a - a).amax(),
            (a - a.transpose()).amax(),
            (self.mean_curvature - a.trace()).abs(),
            (self.kappa[0] + self.kappa[1] - self.mean_curvature).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}
