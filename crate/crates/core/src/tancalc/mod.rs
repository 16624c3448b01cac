//! Tangential calculus: manufactured fields, finite-difference operators and
//! the identity checks that compare both derivative routes.

pub mod fd;
pub mod fields;
pub mod identities;

pub use fd::{FiniteDiff, H_SWEEP, NESTED_RATIO};
pub use fields::{parse_vector_field, ScalarField, VectorField};
pub use identities::{Differenced, FieldCase, Identity, IdentityResidual, Intrinsic, Route};

use crate::error::Result;
use crate::geometry::{ClosedSurface, SurfacePoint};
use crate::V3;

/// Tangential gradients of `f̄` and of `f̄(1 + d²) + d·g` at `p`, which agree
/// up to the differencing error because both extensions coincide on the surface
/// to first order in the normal direction.
pub fn extension_pair(
    fd: &FiniteDiff,
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    p: SurfacePoint,
) -> Result<(V3, V3)> {
    let s = fd.surface;
    let plain = fd.extension_gradient(p, &|tp| fields::scalar_value(s, f, tp.point, 0.0))?;
    let bent = fd.extension_gradient(p, &|tp| {
        let fv = fields::scalar_value(s, f, tp.point, 0.0)?;
        let gv = fields::scalar_value(s, g, tp.point, 0.0)?;
        Ok(fv * (1.0 + tp.dist * tp.dist) + tp.dist * gv)
    })?;
    Ok((plain, bent))
}

/// Largest gap between the two extension gradients over sample points.
pub fn extension_defect(
    surface: &ClosedSurface,
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    points: &[SurfacePoint],
    h: f64,
) -> Result<f64> {
    let fd = FiniteDiff::new(surface, h);
    let mut worst: f64 = 0.0;
    for &p in points {
        let (a, b) = extension_pair(&fd, f, g, p)?;
        worst = worst.max((a - b).amax());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::fields::AmbientPoly;
    use super::*;

    #[test]
    fn gradient_ignores_the_extension() {
        let s = ClosedSurface::ellipsoid(1.0, 1.2, 0.8);
        let f = AmbientPoly::seeded(3, 1);
        let g = AmbientPoly::seeded(2, 2);
        let pts = s.sample_points(4, 1);
        let coarse = extension_defect(&s, &f, &g, &pts, 4e-3).unwrap();
        let fine = extension_defect(&s, &f, &g, &pts, 1e-3).unwrap();
        assert!(fine < coarse / 8.0, "{coarse} {fine}");
    }
}
