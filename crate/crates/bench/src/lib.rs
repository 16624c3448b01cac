//! Shared fixtures for the kernel benchmarks.

use thinfluid::{ClosedSurface, SurfacePoint, V3};

/// The three analytic test surfaces.
pub fn surfaces() -> Vec<ClosedSurface> {
    vec![
        ClosedSurface::sphere(1.0),
        ClosedSurface::torus(2.0, 0.5),
        ClosedSurface::ellipsoid(1.0, 1.2, 0.8),
    ]
}

/// Points at distance `d` off `s` along the normal, one per sample point.
pub fn offset_points(s: &ClosedSurface, n: usize, d: f64) -> Vec<(SurfacePoint, V3)> {
    s.sample_points(n, 11)
        .into_iter()
        .map(|p| {
            let g = s.eval_geometry(p).expect("sample points are regular");
            (p, g.point + g.normal * d)
        })
        .collect()
}
