//! Tangential-calculus identities, each evaluated through two independent
//! derivative routes: exact chart jets and nested finite differences.
//!
//! A route fills [`GeoDerivs`], [`ScalarDerivs`] and [`VectorDerivs`]; the
//! identity residuals are then plain algebra on those values. In the
//! finite-difference route the shape operator is itself differenced from the
//! normal field, so no curvature quantity is shared between the routes.

use serde::{Deserialize, Serialize};

use super::fd::{
    div_block, div_vec_block, grad_block, FiniteDiff, Pack, NESTED_RATIO,
};
use super::fields::{
    curvature_poly, scalar_value, vector_value, AmbientPoly, PolyVector, Projected, ScalarField,
    SurfaceCurl, TrigScalar, VectorField,
};
use crate::error::{Error, Result};
use crate::geometry::{
    cross, dot, jm_value, jv_const, jv_value, ChartJets, ClosedSurface, Shape, SurfacePoint,
};
use crate::jet::Jet;
use crate::{JM, JV, M3, V3};

/// Geometry needed by the identities.
#[derive(Clone, Copy, Debug)]
pub struct GeoDerivs {
    pub nu: V3,
    pub proj: M3,
    pub a: M3,
    pub h: f64,
    pub k: f64,
}

/// First and second tangential derivatives of a scalar.
#[derive(Clone, Copy, Debug)]
pub struct ScalarDerivs {
    pub grad: V3,
    /// `Hᵢⱼ = ∂ᵢᵗᵃⁿ∂ⱼᵗᵃⁿf`.
    pub hessian: M3,
}

/// First and second tangential derivatives of a vector field.
#[derive(Clone, Copy, Debug)]
pub struct VectorDerivs {
    pub v: V3,
    /// `∇_Γv`.
    pub grad: M3,
    /// `Δ_Γv`, componentwise.
    pub lap: V3,
    /// `∇_Γ div_Γv`.
    pub grad_div: V3,
    /// `div_Γ(P_Γ D_Γ(v) P_Γ)`.
    pub div_strain: V3,
    /// `div_Γ((∇_Γv)ν)`.
    pub div_grad_nu: f64,
    /// `Σᵢ (∇̄_{eᵢ}∇̄_{eᵢ}v − ∇̄_{∇̄_{eᵢ}eᵢ}v)` in an orthonormal frame.
    pub frame_laplacian: V3,
}

/// A way of computing tangential derivatives.
pub trait Route {
    fn geometry(&self, surface: &ClosedSurface, p: SurfacePoint) -> Result<GeoDerivs>;
    fn scalar(
        &self,
        surface: &ClosedSurface,
        f: &dyn ScalarField,
        p: SurfacePoint,
        t: f64,
    ) -> Result<ScalarDerivs>;
    fn vector(
        &self,
        surface: &ClosedSurface,
        v: &dyn VectorField,
        p: SurfacePoint,
        t: f64,
    ) -> Result<VectorDerivs>;
    /// Value and gradient only.
    fn vector_first(
        &self,
        surface: &ClosedSurface,
        v: &dyn VectorField,
        p: SurfacePoint,
        t: f64,
    ) -> Result<(V3, M3)>;
}

/// Fixed ambient direction for the tangent frame: the axis least aligned with `ν`.
pub fn frame_seed(nu: &V3) -> V3 {
    let m = nu.iamin();
    let mut c = V3::zeros();
    c[m] = 1.0;
    c
}

fn sym(m: &M3) -> M3 {
    (m + m.transpose()) * 0.5
}

/// Sum of the principal 2×2 minors.
pub fn minor_sum(a: &M3) -> f64 {
    a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)]
        - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)]
        - a[(1, 2)] * a[(2, 1)]
}

/// Exact derivatives from chart jets.
#[derive(Clone, Copy, Debug, Default)]
pub struct Intrinsic;

fn order_for(depth: i8) -> i8 {
    (depth + 2).clamp(3, crate::jet::MAX_ORDER)
}

fn jm_transpose_mul(m: &JM, v: &JV) -> JV {
    m.transpose() * v
}

impl Route for Intrinsic {
    fn geometry(&self, surface: &ClosedSurface, p: SurfacePoint) -> Result<GeoDerivs> {
        let g = surface.eval_geometry(p)?;
        Ok(GeoDerivs {
            nu: g.normal,
            proj: g.proj,
            a: g.shape_operator,
            h: g.mean_curvature,
            k: g.gauss_curvature,
        })
    }

    fn scalar(
        &self,
        surface: &ClosedSurface,
        f: &dyn ScalarField,
        p: SurfacePoint,
        t: f64,
    ) -> Result<ScalarDerivs> {
        let cj = surface.jets(p, order_for(f.depth()))?;
        let fj = f.jet(&cj, t);
        Ok(ScalarDerivs {
            grad: jv_value(&cj.grad(&fj)),
            hessian: jm_value(&cj.hessian(&fj)),
        })
    }

    fn vector(
        &self,
        surface: &ClosedSurface,
        v: &dyn VectorField,
        p: SurfacePoint,
        t: f64,
    ) -> Result<VectorDerivs> {
        let cj = surface.jets(p, order_for(v.depth()))?;
        let vj = v.jet(&cj, t);
        let grad = cj.grad_vec(&vj);
        let proj = cj.proj();
        let strain = proj * ((grad + grad.transpose()) * Jet::constant(0.5)) * proj;
        let grad_nu = grad * cj.nu;
        Ok(VectorDerivs {
            v: jv_value(&vj),
            grad: jm_value(&grad),
            lap: jv_value(&cj.lap_vec(&vj)),
            grad_div: jv_value(&cj.grad(&cj.div_vec(&vj))),
            div_strain: jv_value(&cj.div_mat(&strain)),
            div_grad_nu: cj.div_vec(&grad_nu).value(),
            frame_laplacian: jv_value(&intrinsic_frame_laplacian(&cj, &grad)),
        })
    }

    fn vector_first(
        &self,
        surface: &ClosedSurface,
        v: &dyn VectorField,
        p: SurfacePoint,
        t: f64,
    ) -> Result<(V3, M3)> {
        let cj = surface.jets(p, (v.depth() + 1).max(1))?;
        let vj = v.jet(&cj, t);
        Ok((jv_value(&vj), jm_value(&cj.grad_vec(&vj))))
    }
}

/// `Σᵢ P(∇_ΓWᵢ)ᵀeᵢ − P(∇_Γv)ᵀ P(∇_Γeᵢ)ᵀeᵢ` with `Wᵢ = P(∇_Γv)ᵀeᵢ`.
fn intrinsic_frame_laplacian(cj: &ChartJets, grad: &JM) -> JV {
    let proj = cj.proj();
    let c = jv_const(&frame_seed(&cj.normal()));
    let pc = proj * c;
    let e1 = pc * dot(&pc, &pc).sqrt().recip();
    let e2 = cross(&cj.nu, &e1);
    let mut acc = JV::zeros();
    for e in [e1, e2] {
        let w = proj * jm_transpose_mul(grad, &e);
        let first = proj * jm_transpose_mul(&cj.grad_vec(&w), &e);
        let de = proj * jm_transpose_mul(&cj.grad_vec(&e), &e);
        acc += first - proj * jm_transpose_mul(grad, &de);
    }
    acc
}

/// Central differences of constant-normal extensions; second derivatives are
/// nested with an outer step `NESTED_RATIO · h`.
#[derive(Clone, Copy, Debug)]
pub struct Differenced {
    pub h: f64,
}

impl Differenced {
    fn normal(surface: &ClosedSurface, p: SurfacePoint) -> Result<V3> {
        Ok(surface.jets(p, 1)?.normal())
    }
}

impl Route for Differenced {
    fn geometry(&self, surface: &ClosedSurface, p: SurfacePoint) -> Result<GeoDerivs> {
        let fd = FiniteDiff::new(surface, self.h);
        let nu = Self::normal(surface, p)?;
        let a = -fd.grad_vec(p, &|q| Self::normal(surface, q))?;
        Ok(GeoDerivs {
            nu,
            proj: M3::identity() - nu * nu.transpose(),
            a,
            h: a.trace(),
            k: minor_sum(&a),
        })
    }

    fn scalar(
        &self,
        surface: &ClosedSurface,
        f: &dyn ScalarField,
        p: SurfacePoint,
        t: f64,
    ) -> Result<ScalarDerivs> {
        let inner = FiniteDiff::new(surface, self.h);
        let outer = inner.scaled(NESTED_RATIO);
        let value = |q: SurfacePoint| scalar_value(surface, f, q, t);
        let grad = inner.grad(p, &value)?;
        let tp = outer.tangential_partials(p, &|q| Ok(inner.grad(q, &value)?.as_slice().to_vec()))?;
        Ok(ScalarDerivs {
            grad,
            hessian: grad_block(&tp, 0),
        })
    }

    fn vector(
        &self,
        surface: &ClosedSurface,
        v: &dyn VectorField,
        p: SurfacePoint,
        t: f64,
    ) -> Result<VectorDerivs> {
        let inner = FiniteDiff::new(surface, self.h);
        let outer = inner.scaled(NESTED_RATIO);
        let value = |q: SurfacePoint| vector_value(surface, v, q, t);
        let c = frame_seed(&Self::normal(surface, p)?);
        // packed: ∇v (0..9), P D P (9..18), (∇v)ν (18..21), W₁, W₂ (21..27), e₁, e₂ (27..33)
        let bundle = |q: SurfacePoint| -> Result<Vec<f64>> {
            let nu = Self::normal(surface, q)?;
            let proj = M3::identity() - nu * nu.transpose();
            let grad = inner.grad_vec(q, &value)?;
            let e1 = (proj * c).normalize();
            let e2 = nu.cross(&e1);
            Ok(Pack::default()
                .matrix(&grad)
                .matrix(&(proj * sym(&grad) * proj))
                .vector(&(grad * nu))
                .vector(&(proj * grad.transpose() * e1))
                .vector(&(proj * grad.transpose() * e2))
                .vector(&e1)
                .vector(&e2)
                .0)
        };
        let tp = outer.tangential_partials(p, &bundle)?;
        let here = bundle(p)?;
        let nu = Self::normal(surface, p)?;
        let proj = M3::identity() - nu * nu.transpose();
        let grad = M3::from_fn(|i, j| here[3 * i + j]);
        let e = [
            V3::new(here[27], here[28], here[29]),
            V3::new(here[30], here[31], here[32]),
        ];
        let mut frame_laplacian = V3::zeros();
        for (m, ei) in e.iter().enumerate() {
            let grad_w = grad_block(&tp, 21 + 3 * m);
            let grad_e = grad_block(&tp, 27 + 3 * m);
            let de = proj * grad_e.transpose() * ei;
            frame_laplacian += proj * grad_w.transpose() * ei - proj * grad.transpose() * de;
        }
        Ok(VectorDerivs {
            v: value(p)?,
            grad,
            lap: div_block(&tp, 0),
            grad_div: V3::from_fn(|i, _| (0..3).map(|k| tp[i][3 * k + k]).sum()),
            div_strain: div_block(&tp, 9),
            div_grad_nu: div_vec_block(&tp, 18),
            frame_laplacian,
        })
    }

    fn vector_first(
        &self,
        surface: &ClosedSurface,
        v: &dyn VectorField,
        p: SurfacePoint,
        t: f64,
    ) -> Result<(V3, M3)> {
        let fd = FiniteDiff::new(surface, self.h);
        let value = |q: SurfacePoint| vector_value(surface, v, q, t);
        Ok((value(p)?, fd.grad_vec(p, &value)?))
    }
}

/// The identities under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `ν·∇_Γf = 0`, `νᵀ∇_Γv = 0`, `∇_Γx = P_Γ`, `div_Γx = 2`, `Δ_Γx = Hν`.
    Structural,
    /// `∂ᵢ∂ⱼf − ∂ⱼ∂ᵢf = [A∇_Γf]ᵢνⱼ − [A∇_Γf]ⱼνᵢ`.
    Exchange,
    /// `2 div_Γ(P D_Γ(v) P) = 2 tr[A∇_Γv]ν + PΔ_Γv + ∇_Γ div_Γv + H(∇_Γv)ν`.
    ViscousStress,
    /// `(Y·∇_Γ)X = ∇̄_Y X + (AX·Y)ν` for tangential `X, Y`.
    GaussFormula,
    /// `PΔ_Γv + A²v` equals the frame (Bochner) Laplacian of a tangential `v`.
    Bochner,
    /// `2P div_Γ(P D_Γ(v) P) = Δ_Bv + Kv` for tangential, divergence-free `v`.
    KillingStress,
    /// `2 div_Γ(P D_Γ(v) P) = Δ_Γv + H(∇_Γv)ν` for tangential,
    /// divergence-free `v` with `v·∇_ΓH = 0`.
    ViscousLimit,
    /// `div_Γ[(∇_Γv)ν] = (Δ_Γv)·ν − tr[A∇_Γv]` for tangential `v`.
    NormalFluxDivergence,
    /// `HAv = Kv + A²v` for tangential `v`.
    CayleyHamilton,
}

impl Identity {
    pub const ALL: [Identity; 9] = [
        Identity::Structural,
        Identity::Exchange,
        Identity::ViscousStress,
        Identity::GaussFormula,
        Identity::Bochner,
        Identity::KillingStress,
        Identity::ViscousLimit,
        Identity::NormalFluxDivergence,
        Identity::CayleyHamilton,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Identity::Structural => "structural",
            Identity::Exchange => "exchange",
            Identity::ViscousStress => "viscous_stress",
            Identity::GaussFormula => "gauss_formula",
            Identity::Bochner => "bochner",
            Identity::KillingStress => "killing_stress",
            Identity::ViscousLimit => "viscous_limit",
            Identity::NormalFluxDivergence => "normal_flux_divergence",
            Identity::CayleyHamilton => "cayley_hamilton",
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.id() == id)
            .ok_or_else(|| Error::Config(format!("unknown identity '{id}'")))
    }

    /// Residual and magnitude of the largest term at one point.
    pub fn evaluate(
        &self,
        route: &dyn Route,
        surface: &ClosedSurface,
        case: &FieldCase,
        p: SurfacePoint,
        t: f64,
    ) -> Result<IdentityResidual> {
        let g = route.geometry(surface, p)?;
        let res = match self {
            Identity::Structural => {
                let s = route.scalar(surface, case.scalar.as_ref(), p, t)?;
                let (_, gv) = route.vector_first(surface, case.vector.as_ref(), p, t)?;
                let x = route.vector(surface, &Position, p, t)?;
                IdentityResidual::of(
                    [
                        s.grad.dot(&g.nu).abs(),
                        (gv.transpose() * g.nu).amax(),
                        (x.grad - g.proj).amax(),
                        (x.grad.trace() - 2.0).abs(),
                        (x.lap - g.nu * g.h).amax(),
                    ],
                    [s.grad.amax(), gv.amax(), 1.0, 2.0, x.lap.amax()],
                )
            }
            Identity::Exchange => {
                let s = route.scalar(surface, case.scalar.as_ref(), p, t)?;
                let ag = g.a * s.grad;
                let lhs = s.hessian - s.hessian.transpose();
                let rhs = ag * g.nu.transpose() - g.nu * ag.transpose();
                IdentityResidual::of([(lhs - rhs).amax()], [s.hessian.amax(), rhs.amax()])
            }
            Identity::ViscousStress => {
                let d = route.vector(surface, case.vector.as_ref(), p, t)?;
                let lhs = d.div_strain * 2.0;
                let terms = [
                    g.nu * (2.0 * (g.a * d.grad).trace()),
                    g.proj * d.lap,
                    d.grad_div,
                    d.grad * g.nu * g.h,
                ];
                residual_of_sum(lhs, &terms)
            }
            Identity::GaussFormula => {
                let (x, gx) = route.vector_first(surface, case.tangent[0].as_ref(), p, t)?;
                let (y, _) = route.vector_first(surface, case.tangent[1].as_ref(), p, t)?;
                let lhs = gx.transpose() * y;
                let terms = [g.proj * lhs, g.nu * (g.a * x).dot(&y)];
                residual_of_sum(lhs, &terms)
            }
            Identity::Bochner => {
                let d = route.vector(surface, case.tangent[0].as_ref(), p, t)?;
                let terms = [g.proj * d.lap, g.a * g.a * d.v];
                residual_of_sum(d.frame_laplacian, &terms)
            }
            Identity::KillingStress => {
                let d = route.vector(surface, case.solenoidal.as_ref(), p, t)?;
                let lhs = g.proj * d.div_strain * 2.0;
                let terms = [g.proj * d.lap, g.a * g.a * d.v, d.v * g.k];
                residual_of_sum(lhs, &terms)
            }
            Identity::ViscousLimit => {
                let d = route.vector(surface, case.limit.as_ref(), p, t)?;
                let lhs = d.div_strain * 2.0;
                let terms = [d.lap, d.grad * g.nu * g.h];
                residual_of_sum(lhs, &terms)
            }
            Identity::NormalFluxDivergence => {
                let d = route.vector(surface, case.tangent[0].as_ref(), p, t)?;
                let rhs = d.lap.dot(&g.nu) - (g.a * d.grad).trace();
                IdentityResidual::of(
                    [(d.div_grad_nu - rhs).abs()],
                    [d.div_grad_nu.abs(), d.lap.amax(), (g.a * d.grad).trace().abs()],
                )
            }
            Identity::CayleyHamilton => {
                let (v, _) = route.vector_first(surface, case.tangent[0].as_ref(), p, t)?;
                let lhs = g.a * v * g.h;
                let terms = [v * g.k, g.a * g.a * v];
                residual_of_sum(lhs, &terms)
            }
        };
        Ok(res)
    }
}

/// Pointwise identity residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub residual: f64,
    /// Largest magnitude among the terms, floored at 1.
    pub scale: f64,
}

impl IdentityResidual {
    fn of<const N: usize, const M: usize>(parts: [f64; N], terms: [f64; M]) -> Self {
        let residual = parts.into_iter().fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        Self {
            residual,
            scale: terms.into_iter().fold(1.0, f64::max),
        }
    }
}

fn residual_of_sum(lhs: V3, terms: &[V3]) -> IdentityResidual {
    let rhs: V3 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.amax()).fold(lhs.amax(), f64::max);
    let residual = (lhs - rhs).amax();
    IdentityResidual {
        residual: if residual.is_nan() { f64::NAN } else { residual },
        scale: scale.max(1.0),
    }
}

/// The position field `x ↦ x`.
struct Position;

impl VectorField for Position {
    fn jet(&self, cj: &ChartJets, _t: f64) -> JV {
        cj.mu
    }
    fn name(&self) -> String {
        "position".into()
    }
}

/// One manufactured set of test fields.
pub struct FieldCase {
    pub label: String,
    pub scalar: Box<dyn ScalarField>,
    /// Generic, not tangential.
    pub vector: Box<dyn VectorField>,
    /// Two tangential fields.
    pub tangent: [Box<dyn VectorField>; 2],
    /// Tangential and divergence free.
    pub solenoidal: Box<dyn VectorField>,
    /// Tangential, divergence free and orthogonal to `∇_ΓH`.
    pub limit: Box<dyn VectorField>,
}

impl FieldCase {
    /// Case `k`: cubic polynomials for even `k`, trigonometric scalars and
    /// quadratic fields for odd `k`.
    pub fn manufactured(k: u64) -> Self {
        let deg = if k % 2 == 0 { 3 } else { 2 };
        let scalar: Box<dyn ScalarField> = if k % 2 == 0 {
            Box::new(AmbientPoly::seeded(3, 1000 + k))
        } else {
            Box::new(TrigScalar::seeded(1000 + k))
        };
        Self {
            label: format!("case{k}"),
            scalar,
            vector: Box::new(PolyVector::seeded(deg, 2000 + k)),
            tangent: [
                Box::new(Projected(PolyVector::seeded(deg, 3000 + k))),
                Box::new(Projected(PolyVector::seeded(deg, 4000 + k))),
            ],
            solenoidal: Box::new(SurfaceCurl(AmbientPoly::seeded(deg + 1, 5000 + k))),
            limit: Box::new(SurfaceCurl(curvature_poly(3, 6000 + k))),
        }
    }

    /// Case `k` adapted to `surface`: where `∇_ΓH ≡ 0` (spheres) curl fields
    /// of `g(H)` vanish, so the limit field is a generic curl field instead.
    pub fn manufactured_on(k: u64, surface: &ClosedSurface) -> Self {
        let mut case = Self::manufactured(k);
        if let Shape::Ellipsoid { a, b, c } = surface.shape() {
            if a == b && b == c {
                case.limit = Box::new(SurfaceCurl(AmbientPoly::seeded(3, 7000 + k)));
            }
        }
        case
    }

    pub fn catalog(n: usize) -> Vec<Self> {
        (0..n as u64).map(Self::manufactured).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces() -> Vec<ClosedSurface> {
        vec![
            ClosedSurface::sphere(1.0),
            ClosedSurface::torus(2.0, 0.5),
            ClosedSurface::ellipsoid(1.0, 1.2, 0.8),
        ]
    }

    #[test]
    fn identities_hold_exactly_on_jets() {
        let case = FieldCase::manufactured(2);
        for s in surfaces() {
            for p in s.sample_points(5, 3) {
                for id in Identity::ALL {
                    let r = id.evaluate(&Intrinsic, &s, &case, p, 0.0).unwrap();
                    assert!(r.residual <= 1e-9 * r.scale, "{} on {}: {:?}", id.id(), s.label, r);
                }
            }
        }
    }

    #[test]
    fn differenced_route_agrees_to_second_order() {
        let s = ClosedSurface::torus(2.0, 0.5);
        let case = FieldCase::manufactured(1);
        let p = s.sample_points(1, 9)[0];
        for id in Identity::ALL {
            let coarse = id.evaluate(&Differenced { h: 2e-3 }, &s, &case, p, 0.0).unwrap();
            let fine = id.evaluate(&Differenced { h: 1e-3 }, &s, &case, p, 0.0).unwrap();
            assert!(
                fine.residual <= 0.35 * coarse.residual || fine.residual < 1e-8,
                "{}: {:?} -> {:?}",
                id.id(),
                coarse,
                fine
            );
        }
    }

    #[test]
    fn sphere_cases_carry_a_nonzero_limit_field() {
        let s = ClosedSurface::sphere(1.0);
        let p = s.sample_points(1, 2)[0];
        let plain = FieldCase::manufactured(3);
        let adapted = FieldCase::manufactured_on(3, &s);
        assert!(vector_value(&s, plain.limit.as_ref(), p, 0.0).unwrap().amax() < 1e-14);
        assert!(vector_value(&s, adapted.limit.as_ref(), p, 0.0).unwrap().amax() > 1e-3);
        let r = Identity::ViscousLimit.evaluate(&Intrinsic, &s, &adapted, p, 0.0).unwrap();
        assert!(r.residual <= 1e-12 * r.scale, "{r:?}");
    }

    #[test]
    fn generic_curl_breaks_the_limit_identity() {
        let s = ClosedSurface::ellipsoid(1.0, 1.2, 0.8);
        let case = FieldCase {
            limit: Box::new(SurfaceCurl(AmbientPoly::seeded(3, 5))),
            ..FieldCase::manufactured(0)
        };
        let p = s.sample_points(1, 4)[0];
        let r = Identity::ViscousLimit.evaluate(&Intrinsic, &s, &case, p, 0.0).unwrap();
        assert!(r.residual > 1e-3);
    }
}
