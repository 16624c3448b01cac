//! Surface, shell and shell-boundary quadrature.
//!
//! Each surface is integrated over a single primary chart: Gauss–Legendre in
//! non-periodic directions (the polar angle, whose endpoints are the chart's
//! poles) and the trapezoid rule in periodic ones. Geometry at every node is
//! evaluated in the best-conditioned chart. Reductions are pairwise sums over a
//! fixed node order, so results do not depend on the thread count.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cross, dot, jv_value, ClosedSurface, GeometryEval, SurfacePoint};
use crate::tancalc::fields::{ScalarField, VectorField};
use crate::V3;

pub const DEFAULT_SURFACE_NODES: usize = 64;
pub const DEFAULT_NORMAL_NODES: usize = 8;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).expect("n ≥ 1");
    let mut pairs = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Sum with `O(log n)` error growth and a fixed association order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Clone, Copy, Debug)]
pub struct QuadNode {
    /// Node in the primary chart.
    pub primary: SurfacePoint,
    /// Same point in its best-conditioned chart.
    pub point: SurfacePoint,
    /// Parameter-space weight.
    pub param_weight: f64,
    /// `√det g` of the primary chart.
    pub area_element: f64,
    pub geo: GeometryEval,
}

impl QuadNode {
    /// Surface measure carried by the node.
    pub fn weight(&self) -> f64 {
        self.param_weight * self.area_element
    }
}

/// Tensor-product rule on one surface snapshot.
#[derive(Clone, Debug)]
pub struct SurfaceRule {
    pub surface: ClosedSurface,
    pub nodes: Vec<QuadNode>,
    pub surface_nodes: usize,
    /// Gauss–Legendre pairs on `[−1, 1]` for the normal direction.
    pub normal_rule: Vec<(f64, f64)>,
}

fn axis_rule(lo: f64, hi: f64, periodic: bool, n: usize) -> Vec<(f64, f64)> {
    let len = hi - lo;
    if periodic {
        (0..n)
            .map(|k| (lo + len * k as f64 / n as f64, len / n as f64))
            .collect()
    } else {
        gauss_legendre(n)
            .into_iter()
            .map(|(x, w)| (lo + 0.5 * len * (x + 1.0), 0.5 * len * w))
            .collect()
    }
}

impl SurfaceRule {
    pub fn new(surface: &ClosedSurface, surface_nodes: usize, normal_nodes: usize) -> Result<Self> {
        if surface_nodes < 4 || normal_nodes < 1 {
            return Err(Error::Config(format!(
                "quadrature needs surface_nodes ≥ 4 and normal_nodes ≥ 1, got {surface_nodes}, {normal_nodes}"
            )));
        }
        let patch = &surface.patches()[0];
        let d = patch.domain;
        let r1 = axis_rule(d.lo[0], d.hi[0], d.periodic[0], surface_nodes);
        let r2 = axis_rule(d.lo[1], d.hi[1], d.periodic[1], surface_nodes);
        let pairs: Vec<((f64, f64), (f64, f64))> = r1
            .iter()
            .flat_map(|a| r2.iter().map(move |b| (*a, *b)))
            .collect();
        let nodes = pairs
            .par_iter()
            .map(|&((s1, w1), (s2, w2))| {
                let primary = SurfacePoint {
                    patch: 0,
                    s: [s1, s2],
                };
                let area_element = surface.jets(primary, 1)?.area_element.value();
                let point = surface.recharted(primary);
                Ok(QuadNode {
                    primary,
                    point,
                    param_weight: w1 * w2,
                    area_element,
                    geo: surface.eval_geometry(point)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(bad) = nodes.iter().find(|n| !(n.area_element > 0.0)) {
            return Err(Error::DegenerateChart(bad.primary));
        }
        Ok(Self {
            surface: surface.clone(),
            nodes,
            surface_nodes,
            normal_rule: gauss_legendre(normal_nodes),
        })
    }

    pub fn with_defaults(surface: &ClosedSurface) -> Result<Self> {
        Self::new(surface, DEFAULT_SURFACE_NODES, DEFAULT_NORMAL_NODES)
    }

    /// `Σ w f(node)` with a deterministic reduction.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&QuadNode) -> Result<f64> + Sync,
    {
        let vals = self
            .nodes
            .par_iter()
            .map(|n| Ok(n.weight() * f(n)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(pairwise_sum(&vals))
    }

    pub fn area(&self) -> f64 {
        pairwise_sum(&self.nodes.iter().map(QuadNode::weight).collect::<Vec<_>>())
    }

    /// `∫_Γ f dH²` for a surface field at time `t`.
    pub fn integrate_field(&self, f: &dyn ScalarField, t: f64) -> Result<f64> {
        self.integrate(|n| {
            let cj = self.surface.jets(n.point, f.depth().max(1))?;
            Ok(f.jet(&cj, t).value())
        })
    }

    fn check_width(&self, eps: f64) -> Result<()> {
        let max = self.surface.eps_max();
        if eps.abs() > max {
            return Err(Error::WidthTooLarge { eps, max });
        }
        Ok(())
    }

    /// `∫_{Ω_ε} f dx = ∫_Γ ∫_{−ε}^{ε} f(y + ρν) J(y, ρ) dρ dH²`, evaluated
    /// through the forward normal map only.
    pub fn integrate_shell<F>(&self, eps: f64, f: F) -> Result<f64>
    where
        F: Fn(&V3, &QuadNode, f64) -> Result<f64> + Sync,
    {
        self.check_width(eps)?;
        self.integrate(|n| self.shell_line(eps, n, |rho| f(&(n.geo.point + n.geo.normal * rho), n, rho)))
    }

    /// `∫_{−ε}^{ε} g(ρ) J(y, ρ) dρ` along the normal line of one node.
    pub fn shell_line<G>(&self, eps: f64, n: &QuadNode, g: G) -> Result<f64>
    where
        G: Fn(f64) -> Result<f64>,
    {
        let mut acc = 0.0;
        for &(x, w) in &self.normal_rule {
            let rho = eps * x;
            let jac = n.geo.jacobian(rho);
            if jac <= 0.0 {
                return Err(Error::NonPositiveJacobian(jac));
            }
            acc += w * eps * g(rho)? * jac;
        }
        Ok(acc)
    }

    /// `Σ_{ρ=±ε} g(ρ) J(y, ρ)`, the boundary contribution of one node.
    pub fn boundary_line<G>(&self, eps: f64, n: &QuadNode, g: G) -> Result<f64>
    where
        G: Fn(f64) -> Result<f64>,
    {
        let mut acc = 0.0;
        for rho in [eps, -eps] {
            let jac = n.geo.jacobian(rho);
            if jac <= 0.0 {
                return Err(Error::NonPositiveJacobian(jac));
            }
            acc += g(rho)? * jac;
        }
        Ok(acc)
    }

    /// Shell integral over `{|d| < ε}` with one evaluation context per node.
    pub fn integrate_shell_lines<L, P, G>(&self, eps: f64, prepare: P, g: G) -> Result<f64>
    where
        P: Fn(&QuadNode) -> Result<L> + Sync,
        G: Fn(&L, &QuadNode, f64) -> Result<f64> + Sync,
    {
        self.check_width(eps)?;
        self.integrate(|n| {
            let line = prepare(n)?;
            self.shell_line(eps, n, |rho| g(&line, n, rho))
        })
    }

    /// Boundary integral over `{d = ±ε}` with one evaluation context per node.
    pub fn integrate_boundary_lines<L, P, G>(&self, eps: f64, prepare: P, g: G) -> Result<f64>
    where
        P: Fn(&QuadNode) -> Result<L> + Sync,
        G: Fn(&L, &QuadNode, f64) -> Result<f64> + Sync,
    {
        self.check_width(eps)?;
        self.integrate(|n| {
            let line = prepare(n)?;
            self.boundary_line(eps, n, |rho| g(&line, n, rho))
        })
    }

    pub fn integrate_shell_boundary<F>(&self, eps: f64, f: F) -> Result<f64>
    where
        F: Fn(&V3, &QuadNode, f64) -> Result<f64> + Sync,
    {
        self.check_width(eps)?;
        self.integrate(|n| self.boundary_line(eps, n, |rho| f(&(n.geo.point + n.geo.normal * rho), n, rho)))
    }

    pub fn shell_volume(&self, eps: f64) -> Result<f64> {
        self.integrate_shell(eps, |_, _, _| Ok(1.0))
    }

    /// `2ε|Γ| + (2/3)ε³∫K`: the shell volume expanded in `ε`.
    pub fn shell_volume_expansion(&self, eps: f64) -> f64 {
        let k = self.integrate(|n| Ok(n.geo.gauss_curvature)).unwrap_or(f64::NAN);
        2.0 * eps * self.area() + 2.0 / 3.0 * eps.powi(3) * k
    }

    pub fn gauss_bonnet(&self) -> GaussBonnet {
        let integral = self
            .integrate(|n| Ok(n.geo.gauss_curvature))
            .unwrap_or(f64::NAN);
        let expected = 2.0 * PI * self.surface.euler_characteristic() as f64;
        GaussBonnet {
            integral,
            expected,
            defect: (integral - expected).abs(),
        }
    }

    /// Relative gap between integrating `f` over the offset surface
    /// `μ + ρν(μ)` with its own area element and integrating
    /// `f(y + ρν) J(y, ρ)` over `Γ`.
    pub fn measure_transform_defect<F>(&self, rho: f64, f: F) -> Result<f64>
    where
        F: Fn(&V3) -> f64 + Sync,
    {
        self.check_width(rho)?;
        let direct = self.integrate(|n| {
            let cj = self.surface.jets(n.primary, 2)?;
            let offset = cj.mu + cj.nu * crate::Jet::constant(rho);
            let d1 = offset.map(|c| c.deriv(0));
            let d2 = offset.map(|c| c.deriv(1));
            let c = cross(&d1, &d2);
            let elem = dot(&c, &c).sqrt().value();
            Ok(f(&jv_value(&offset)) * elem / n.area_element)
        })?;
        let mapped = self.integrate(|n| {
            Ok(f(&(n.geo.point + n.geo.normal * rho)) * n.geo.jacobian(rho))
        })?;
        Ok((direct - mapped).abs() / mapped.abs().max(f64::MIN_POSITIVE))
    }

    /// `∫_Γ div_Γ X dH²` for a tangential field.
    pub fn stokes_integral(&self, x: &dyn VectorField, t: f64) -> Result<f64> {
        self.integrate(|n| {
            let cj = self.surface.jets(n.point, x.depth() + 1)?;
            Ok(cj.div_vec(&x.jet(&cj, t)).value())
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussBonnet {
    pub integral: f64,
    pub expected: f64,
    pub defect: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tancalc::fields::{AmbientPoly, ConstScalar, PolyVector, Projected};
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let r = gauss_legendre(4);
        let int: f64 = r.iter().map(|(x, w)| w * x.powi(6)).sum();
        assert_relative_eq!(int, 2.0 / 7.0, epsilon = 1e-15);
        assert!(r.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
    }

    #[test]
    fn areas_and_gauss_bonnet() {
        let sphere = SurfaceRule::with_defaults(&ClosedSurface::sphere(1.0)).unwrap();
        assert_relative_eq!(sphere.area(), 4.0 * PI, max_relative = 1e-12);
        assert!(sphere.gauss_bonnet().defect < 1e-10);
        let torus = SurfaceRule::with_defaults(&ClosedSurface::torus(2.0, 0.5)).unwrap();
        assert_relative_eq!(torus.area(), 4.0 * PI * PI, max_relative = 1e-12);
        assert!(torus.gauss_bonnet().defect < 1e-10);
        let ell = SurfaceRule::with_defaults(&ClosedSurface::ellipsoid(1.0, 1.2, 0.8)).unwrap();
        assert!(ell.gauss_bonnet().defect < 1e-8);
        assert_relative_eq!(
            sphere.integrate_field(&ConstScalar(1.0), 0.0).unwrap(),
            4.0 * PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn shell_integrals_on_unit_sphere() {
        let rule = SurfaceRule::with_defaults(&ClosedSurface::sphere(1.0)).unwrap();
        let vol = rule.shell_volume(0.1).unwrap();
        assert_relative_eq!(vol, 4.0 * PI / 3.0 * (1.1f64.powi(3) - 0.9f64.powi(3)), max_relative = 1e-12);
        assert_relative_eq!(vol, rule.shell_volume_expansion(0.1), max_relative = 1e-12);
        let r2 = rule.integrate_shell(0.1, |x, _, _| Ok(x.norm_squared())).unwrap();
        assert_relative_eq!(r2, 4.0 * PI / 5.0 * (1.1f64.powi(5) - 0.9f64.powi(5)), max_relative = 1e-12);
        let bdy = rule.integrate_shell_boundary(0.1, |_, _, _| Ok(1.0)).unwrap();
        assert_relative_eq!(bdy, 4.0 * PI * (1.21 + 0.81), max_relative = 1e-12);
        let signed = rule
            .integrate_shell_boundary(0.1, |_, _, rho| Ok(rho.signum()))
            .unwrap();
        assert_relative_eq!(signed, 1.6 * PI, max_relative = 1e-12);
        let flat = rule.integrate_shell_boundary(0.0, |_, _, _| Ok(1.0)).unwrap();
        assert_relative_eq!(flat, 8.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn width_beyond_reach_is_rejected() {
        let rule = SurfaceRule::new(&ClosedSurface::torus(2.0, 0.5), 16, 2).unwrap();
        assert!(matches!(rule.shell_volume(0.4), Err(Error::WidthTooLarge { .. })));
    }

    #[test]
    fn measure_transform_and_stokes() {
        let s = ClosedSurface::ellipsoid(1.0, 1.2, 0.8);
        let rule = SurfaceRule::with_defaults(&s).unwrap();
        let p = AmbientPoly::seeded(3, 1);
        assert!(rule.measure_transform_defect(0.1, |x| 2.0 + p.eval(x)).unwrap() < 1e-12);
        let x = Projected(PolyVector::seeded(3, 2));
        assert!(rule.stokes_integral(&x, 0.0).unwrap().abs() < 1e-9);
    }
}
