use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{M3, V3};

use super::surface::{ClosedSurface, SurfacePoint};

/// Iteration cap for the closest-point Newton solve.
pub const MAX_NEWTON_ITERS: usize = 50;
/// Orthogonality tolerance relative to the body size.
pub const ORTHO_TOL: f64 = 1e-13;

/// Result of a closest-point solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubularPoint {
    pub x: V3,
    /// Foot point `π(x)`.
    pub foot: V3,
    /// Chart coordinates of the foot.
    pub point: SurfacePoint,
    /// Signed distance, positive on the side `ν` points to.
    pub dist: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Final orthogonality residual `max |(x − μ)·∂ᵢμ| / |∂ᵢμ|` in body units.
    pub residual: f64,
}

impl ClosedSurface {
    /// Nearest point on the surface via damped Newton on `|μ(s) − x|² / 2`.
    ///
    /// Seeds from `guess` when given, otherwise from the nearest node of the
    /// precomputed chart grid. Non-convergence is reported through the
    /// `converged` flag; points beyond the reach are rejected.
    pub fn closest_point(&self, x: &V3, guess: Option<SurfacePoint>) -> Result<TubularPoint> {
        let body = &self.body;
        let xb = self.transform.apply_inverse(x);
        let mut p = match guess {
            Some(g) => g,
            None => {
                body.grid
                    .iter()
                    .min_by(|a, b| {
                        (a.1 - xb)
                            .norm_squared()
                            .total_cmp(&(b.1 - xb).norm_squared())
                    })
                    .expect("seed grid is never empty")
                    .0
            }
        };
        let size = 0.5 * body.shape.diameter();
        let tol = ORTHO_TOL * size;
        let mut converged = false;
        let mut iterations = 0;
        let mut residual = f64::INFINITY;

        for it in 0..MAX_NEWTON_ITERS {
            iterations = it + 1;
            let patch = &body.patches[p.patch];
            if patch.quality(p.s) < 0.3 {
                p = body.locate(&patch.chart_map(p.s));
                continue;
            }
            let patch = &body.patches[p.patch];
            let (m, d, dd) = patch.derivs(p.s);
            let r = m - xb;
            let g = [r.dot(&d[0]), r.dot(&d[1])];
            residual = (g[0].abs() / d[0].norm()).max(g[1].abs() / d[1].norm());
            if residual <= tol {
                converged = true;
                break;
            }
            let metric = Matrix2::new(
                d[0].dot(&d[0]),
                d[0].dot(&d[1]),
                d[1].dot(&d[0]),
                d[1].dot(&d[1]),
            );
            let hess = metric
                + Matrix2::new(r.dot(&dd[0]), r.dot(&dd[1]), r.dot(&dd[1]), r.dot(&dd[2]));
            let grad = nalgebra::Vector2::new(g[0], g[1]);
            let pd = hess[(0, 0)] > 0.0 && hess.determinant() > 0.0;
            let step = if pd {
                hess.try_inverse().map(|h| -(h * grad))
            } else {
                None
            }
            .or_else(|| metric.try_inverse().map(|h| -(h * grad)))
            .unwrap_or_else(|| -grad);

            let phi0 = 0.5 * r.norm_squared();
            let slope = grad.dot(&step);
            let mut alpha = 1.0;
            let mut next = p;
            // Close to the foot the merit decrease drops below one ulp of
            // `phi0`, so the line search would reject good Newton steps.
            let local = pd && residual < 1e-6 * size;
            if local {
                next = SurfacePoint {
                    patch: p.patch,
                    s: patch.domain.wrap([p.s[0] + step[0], p.s[1] + step[1]]),
                };
            }
            for _ in 0..if local { 0 } else { 40 } {
                let s = patch
                    .domain
                    .wrap([p.s[0] + alpha * step[0], p.s[1] + alpha * step[1]]);
                let phi = 0.5 * (patch.chart_map(s) - xb).norm_squared();
                if phi <= phi0 + 1e-4 * alpha * slope || phi <= phi0 {
                    next = SurfacePoint { patch: p.patch, s };
                    break;
                }
                alpha *= 0.5;
            }
            let moved = alpha * step.norm();
            p = next;
            if moved < 1e-15 {
                let (m, d, _) = body.patches[p.patch].derivs(p.s);
                let r = m - xb;
                residual = (r.dot(&d[0]).abs() / d[0].norm()).max(r.dot(&d[1]).abs() / d[1].norm());
                converged = residual <= 1e3 * tol;
                break;
            }
        }

        let patch = &body.patches[p.patch];
        let (m, d, _) = patch.derivs(p.s);
        let nu = d[0].cross(&d[1]).normalize() * patch.orientation;
        let dist = (xb - m).dot(&nu) * self.transform.scale;
        let reach = self.reach();
        if dist.abs() >= reach {
            return Err(Error::OutsideReach { dist, reach });
        }
        let point = self.recharted(p);
        Ok(TubularPoint {
            x: *x,
            foot: self.transform.apply(&m),
            point,
            dist,
            converged,
            iterations,
            residual,
        })
    }

    /// Signed distance `d(x)`.
    pub fn signed_distance(&self, x: &V3, guess: Option<SurfacePoint>) -> Result<f64> {
        Ok(self.closest_point(x, guess)?.dist)
    }

    /// `∇π(x)` by central differences of the closest-point map.
    pub fn closest_point_jacobian(&self, x: &V3, h: f64) -> Result<M3> {
        let base = self.closest_point(x, None)?;
        let mut jac = M3::zeros();
        for i in 0..3 {
            let mut e = V3::zeros();
            e[i] = h;
            let fp = self.closest_point(&(x + e), Some(base.point))?.foot;
            let fm = self.closest_point(&(x - e), Some(base.point))?.foot;
            let col = (fp - fm) / (2.0 * h);
            // row i holds ∂ᵢπ
            for j in 0..3 {
                jac[(i, j)] = col[j];
            }
        }
        Ok(jac)
    }

    /// `∇²d(x)` by second central differences of the signed distance.
    pub fn distance_hessian(&self, x: &V3, h: f64) -> Result<M3> {
        let base = self.closest_point(x, None)?;
        let d = |y: V3| self.signed_distance(&y, Some(base.point));
        let e = |i: usize| V3::ith(i, h);
        let mut hess = M3::zeros();
        for i in 0..3 {
            hess[(i, i)] = (d(x + e(i))? - 2.0 * base.dist + d(x - e(i))?) / (h * h);
            for j in 0..i {
                let m = (d(x + e(i) + e(j))? - d(x + e(i) - e(j))? - d(x - e(i) + e(j))?
                    + d(x - e(i) - e(j))?)
                    / (4.0 * h * h);
                hess[(i, j)] = m;
                hess[(j, i)] = m;
            }
        }
        Ok(hess)
    }

    /// Exact `∇²d(x) = −A(I − dA)⁻¹` evaluated at the foot point. Equals `−A`
    /// on the surface.
    pub fn distance_hessian_exact(&self, x: &V3) -> Result<M3> {
        let tp = self.closest_point(x, None)?;
        let a = self.eval_geometry(tp.point)?.shape_operator;
        let inv = (M3::identity() - a * tp.dist)
            .try_inverse()
            .ok_or(Error::NonPositiveJacobian(0.0))?;
        Ok(-a * inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_radial_examples() {
        let s = ClosedSurface::sphere(1.0);
        let out = s.closest_point(&V3::new(0.0, 0.0, 1.1), None).unwrap();
        assert!(out.converged);
        assert!((out.foot - V3::z()).norm() < 1e-13);
        assert_relative_eq!(out.dist, 0.1, epsilon = 1e-13);
        let inside = s.closest_point(&V3::new(0.0, 0.0, 0.9), None).unwrap();
        assert!((inside.foot - V3::z()).norm() < 1e-13);
        assert_relative_eq!(inside.dist, -0.1, epsilon = 1e-13);
    }

    #[test]
    fn torus_outer_point() {
        let s = ClosedSurface::torus(2.0, 0.5);
        let out = s.closest_point(&V3::new(2.6, 0.0, 0.0), None).unwrap();
        assert!((out.foot - V3::new(2.5, 0.0, 0.0)).norm() < 1e-13);
        assert_relative_eq!(out.dist, 0.1, epsilon = 1e-13);
    }

    #[test]
    fn outside_reach_is_rejected() {
        let s = ClosedSurface::sphere(1.0);
        assert!(matches!(
            s.closest_point(&V3::new(0.0, 2.5, 0.0), None),
            Err(Error::OutsideReach { .. })
        ));
    }

    #[test]
    fn jacobian_on_sphere_axis() {
        let s = ClosedSurface::sphere(1.0);
        let d = 0.05;
        let j = s.closest_point_jacobian(&V3::new(0.0, 0.0, 1.0 + d), 1e-5).unwrap();
        let exact = M3::from_diagonal(&V3::new(1.0 / (1.0 + d), 1.0 / (1.0 + d), 0.0));
        assert!((j - exact).norm() < 1e-8);
        let on = s.closest_point_jacobian(&V3::new(0.6, 0.0, 0.8), 1e-5).unwrap();
        let y = V3::new(0.6, 0.0, 0.8);
        assert!((on - (M3::identity() - y * y.transpose())).norm() < 1e-8);
    }

    #[test]
    fn distance_hessian_matches_shape_operator() {
        let s = ClosedSurface::torus(2.0, 0.5);
        let x = V3::new(1.2, 1.7, 0.3);
        let exact = s.distance_hessian_exact(&x).unwrap();
        let coarse = (s.distance_hessian(&x, 1e-2).unwrap() - exact).amax();
        let fine = (s.distance_hessian(&x, 5e-3).unwrap() - exact).amax();
        assert!(fine < 0.3 * coarse, "{coarse:e} -> {fine:e}");
        let on = V3::new(0.0, 0.0, 1.0);
        let sphere = ClosedSurface::sphere(1.0);
        let a = sphere.eval_geometry(sphere.locate(&on)).unwrap().shape_operator;
        assert!((sphere.distance_hessian_exact(&on).unwrap() + a).amax() < 1e-12);
    }

    #[test]
    fn transformed_surface_distance() {
        use super::super::surface::Similarity;
        let base = ClosedSurface::sphere(1.0);
        let moved = base.transformed(Similarity {
            scale: 2.0,
            rotation: Similarity::rotation_about(V3::new(1.0, 1.0, 0.0), 0.4),
            shift: V3::new(1.0, 0.0, -1.0),
        });
        let x = V3::new(1.0, 0.0, -1.0) + V3::new(0.0, 2.3, 0.0);
        let out = moved.closest_point(&x, None).unwrap();
        assert_relative_eq!(out.dist, 0.3, epsilon = 1e-12);
        assert_relative_eq!(moved.reach(), 2.0, epsilon = 1e-12);
    }
}
