//! Bulk fields in normal coordinates built from surface coefficients
//! `(v, v¹, v², q, q¹)`, their Euler / Navier–Stokes residuals, the limit
//! residuals on the surface, and the boundary-condition audit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    cross, dot, jm_value, jv_const, jv_value, trace, ChartJets, ClosedSurface, SurfacePoint,
};
use crate::jet::Jet;
use crate::motion::{Motion, MovingSurface, ON_SURFACE_TOL};
use crate::tancalc::fields::{
    scalar_value, vector_value, AmbientFn, AmbientPoly, Killing, ScalarField, SurfaceCurl,
    VectorField, ZeroVector,
};
use crate::{JM, JV, M3, V3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    /// `u = v + d v¹`.
    Euler,
    /// `u = v + d v¹ + d² v²` with viscosity `μ₀`.
    NavierStokes { mu: f64 },
}

impl Mode {
    pub fn viscosity(&self) -> f64 {
        match self {
            Mode::Euler => 0.0,
            Mode::NavierStokes { mu } => *mu,
        }
    }
}

/// Surface coefficients of a bulk field.
pub struct ExpansionCoefficients {
    pub v: Box<dyn VectorField>,
    pub v1: Box<dyn VectorField>,
    pub v2: Box<dyn VectorField>,
    pub q: Box<dyn ScalarField>,
    pub q1: Box<dyn ScalarField>,
}

/// Coefficient values at one surface point.
#[derive(Clone, Copy, Debug)]
pub struct CoefficientValues {
    pub v: V3,
    pub v1: V3,
    pub v2: V3,
    pub q: f64,
    pub q1: f64,
}

impl ExpansionCoefficients {
    pub fn zero() -> Self {
        Self {
            v: Box::new(ZeroVector),
            v1: Box::new(ZeroVector),
            v2: Box::new(ZeroVector),
            q: Box::new(crate::tancalc::fields::ConstScalar(0.0)),
            q1: Box::new(crate::tancalc::fields::ConstScalar(0.0)),
        }
    }

    pub fn values(&self, s: &ClosedSurface, p: SurfacePoint, t: f64) -> Result<CoefficientValues> {
        Ok(CoefficientValues {
            v: vector_value(s, self.v.as_ref(), p, t)?,
            v1: vector_value(s, self.v1.as_ref(), p, t)?,
            v2: vector_value(s, self.v2.as_ref(), p, t)?,
            q: scalar_value(s, self.q.as_ref(), p, t)?,
            q1: scalar_value(s, self.q1.as_ref(), p, t)?,
        })
    }
}

/// Bulk residual at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub momentum: V3,
    pub continuity: f64,
}

impl Residual {
    pub fn norm(&self) -> f64 {
        self.momentum.amax().max(self.continuity.abs())
    }
}

/// Finite-difference steps for bulk residuals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BulkSteps {
    /// First derivatives in space.
    pub h: f64,
    /// Second differences for `Δu`.
    pub h_lap: f64,
    pub dt: f64,
}

impl BulkSteps {
    /// `h = min(1e−4, ε/20)`; the Laplacian uses a wider step to keep round-off
    /// below the `1/h²` amplification.
    pub fn for_width(eps: f64) -> Self {
        Self {
            h: 1e-4f64.min(eps / 20.0),
            h_lap: 2e-3f64.min(eps / 10.0),
            dt: 1e-4,
        }
    }
}

/// A bulk velocity/pressure pair synthesized from surface coefficients on a
/// moving surface.
pub struct BulkField {
    pub coeffs: ExpansionCoefficients,
    pub ms: MovingSurface,
    pub mode: Mode,
}

impl BulkField {
    /// `(u, p)` at `y + ρν(y)` for a surface point `y` of `Γ(t)`.
    pub fn on_normal_line(&self, s: &ClosedSurface, p: SurfacePoint, rho: f64, t: f64) -> Result<(V3, f64)> {
        let c = self.coeffs.values(s, p, t)?;
        let mut u = c.v + c.v1 * rho;
        if let Mode::NavierStokes { .. } = self.mode {
            u += c.v2 * (rho * rho);
        }
        Ok((u, c.q + rho * c.q1))
    }

    /// `(u, p)` at an ambient point, through the closest-point map of `Γ(t)`.
    pub fn synthesize(&self, x: &V3, t: f64) -> Result<(V3, f64)> {
        let s = self.ms.at(t);
        let tp = s.closest_point(x, None)?;
        self.on_normal_line(&s, tp.point, tp.dist, t)
    }

    /// Coefficients and their surface gradients along the normal line of `y`.
    pub fn normal_line(&self, s: &ClosedSurface, p: SurfacePoint, t: f64) -> Result<NormalLine> {
        let c = &self.coeffs;
        let ns = matches!(self.mode, Mode::NavierStokes { .. });
        let depth = c.v.depth().max(c.v1.depth()).max(if ns { c.v2.depth() } else { 0 });
        let cj = s.jets(p, (depth + 1).max(c.q.depth()).max(c.q1.depth()).max(2))?;
        let geo = cj.geometry();
        let pair = |f: &dyn VectorField| {
            let j = f.jet(&cj, t);
            (jv_value(&j), jm_value(&cj.grad_vec(&j)))
        };
        let (v, grad_v) = pair(c.v.as_ref());
        let (v1, grad_v1) = pair(c.v1.as_ref());
        let (v2, grad_v2) = if ns { pair(c.v2.as_ref()) } else { (V3::zeros(), M3::zeros()) };
        Ok(NormalLine {
            v,
            v1,
            v2,
            grad_v,
            grad_v1,
            grad_v2,
            q: c.q.jet(&cj, t).value(),
            q1: c.q1.jet(&cj, t).value(),
            normal: geo.normal,
            shape_operator: geo.shape_operator,
            normal_speed: self.ms.velocity(&geo.point, t).dot(&geo.normal),
        })
    }

    /// Exact `∇u` at `y + ρν`.
    pub fn gradient_on_normal_line(&self, s: &ClosedSurface, p: SurfacePoint, rho: f64, t: f64) -> Result<M3> {
        self.normal_line(s, p, t)?.gradient(rho)
    }

    /// Momentum and continuity residuals of the bulk equations at `x` by
    /// ambient central differences.
    pub fn residual(&self, x: &V3, t: f64, steps: BulkSteps) -> Result<Residual> {
        let s = self.ms.at(t);
        let (u0, _) = self.synthesize(x, t)?;
        let mut grad = M3::zeros();
        let mut grad_p = V3::zeros();
        let mut lap = V3::zeros();
        let mu = self.mode.viscosity();
        for k in 0..3 {
            let mut e = V3::zeros();
            e[k] = steps.h;
            let eval = |z: V3| -> Result<(V3, f64)> {
                let tp = s.closest_point(&z, None)?;
                self.on_normal_line(&s, tp.point, tp.dist, t)
            };
            let (up, pp) = eval(x + e)?;
            let (um, pm) = eval(x - e)?;
            let du = (up - um) / (2.0 * steps.h);
            for j in 0..3 {
                grad[(k, j)] = du[j];
            }
            grad_p[k] = (pp - pm) / (2.0 * steps.h);
            if mu != 0.0 {
                let mut e2 = V3::zeros();
                e2[k] = steps.h_lap;
                let (up2, _) = eval(x + e2)?;
                let (um2, _) = eval(x - e2)?;
                lap += (up2 - u0 * 2.0 + um2) / (steps.h_lap * steps.h_lap);
            }
        }
        let dudt = (self.synthesize(x, t + steps.dt)?.0 - self.synthesize(x, t - steps.dt)?.0)
            / (2.0 * steps.dt);
        Ok(Residual {
            momentum: dudt + grad.transpose() * u0 + grad_p - lap * mu,
            continuity: grad.trace(),
        })
    }

    /// Ambient divergence-form strain `D(u)` at `x` by central differences.
    pub fn strain_fd(&self, x: &V3, t: f64, h: f64) -> Result<M3> {
        let mut grad = M3::zeros();
        for k in 0..3 {
            let mut e = V3::zeros();
            e[k] = h;
            let du = (self.synthesize(&(x + e), t)?.0 - self.synthesize(&(x - e), t)?.0) / (2.0 * h);
            for j in 0..3 {
                grad[(k, j)] = du[j];
            }
        }
        Ok((grad + grad.transpose()) * 0.5)
    }

    /// Limit residuals at a surface point of `Γ(t)`:
    /// momentum `∂•_v v + ∇_Γq + q¹ν − 2μ₀ div_Γ(P D_Γ(v) P)` and continuity
    /// `div_Γv`. Rejects `v` whose normal part differs from `V_Γ^N`.
    pub fn limit_residual(&self, p: SurfacePoint, t: f64, dt: f64) -> Result<Residual> {
        let s = self.ms.at(t);
        let c = &self.coeffs;
        let order = (c.v.depth() + 2).max(c.q.depth() + 1).max(c.q1.depth()).max(2);
        let cj = s.jets(p, order)?;
        let v = c.v.jet(&cj, t);
        let vv = jv_value(&v);
        let nu = cj.normal();
        let y = cj.position();
        let vn = self.ms.velocity(&y, t).dot(&nu);
        if (vv.dot(&nu) - vn).abs() > ON_SURFACE_TOL.max(1e-9 * vv.norm()) {
            return Err(Error::NormalSpeedMismatch {
                vn: vv.dot(&nu),
                speed: vn,
            });
        }
        let grad = cj.grad_vec(&v);
        let grad_v = jm_value(&grad);
        let vt = vv - nu * vv.dot(&nu);
        let normal_dt = (self.trace_normal(y, t + dt)? - self.trace_normal(y, t - dt)?) / (2.0 * dt);
        let material = normal_dt + grad_v.transpose() * vt;
        let q = c.q.jet(&cj, t);
        let q1 = c.q1.jet(&cj, t).value();
        let mut momentum = material + jv_value(&cj.grad(&q)) + nu * q1;
        let mu = self.mode.viscosity();
        if mu != 0.0 {
            momentum -= jv_value(&cj.div_mat(&projected_strain(&cj, &grad))) * (2.0 * mu);
        }
        Ok(Residual {
            momentum,
            continuity: trace(&grad).value(),
        })
    }

    /// `v(π(y, τ), τ)`, the zeroth-order velocity along the normal trajectory.
    fn trace_normal(&self, y: V3, tau: f64) -> Result<V3> {
        let s = self.ms.at(tau);
        let tp = s.closest_point(&y, None)?;
        vector_value(&s, self.coeffs.v.as_ref(), tp.point, tau)
    }

    /// Boundary-condition audit at a surface point of `Γ(t)` (exact jets).
    pub fn strain_audit(&self, p: SurfacePoint, t: f64) -> Result<StrainAudit> {
        let s = self.ms.at(t);
        let c = &self.coeffs;
        let order = (c.v.depth().max(c.v1.depth()) + 1).max(c.v2.depth()).max(2);
        let cj = s.jets(p, order)?;
        let nu = cj.normal();
        let a = jm_value(&cj.shape_operator());
        let v = c.v.jet(&cj, t);
        let v1 = c.v1.jet(&cj, t);
        let v2 = jv_value(&c.v2.jet(&cj, t));
        let grad_v = cj.grad_vec(&v);
        let gv = jm_value(&grad_v);
        let gv1 = jm_value(&cj.grad_vec(&v1));
        let v1v = jv_value(&v1);
        let sym = |m: M3| (m + m.transpose()) * 0.5;
        let proj = M3::identity() - nu * nu.transpose();
        let s0 = sym(gv) + sym(nu * v1v.transpose());
        let s1 = sym(a * gv) + sym(gv1) + nu * v2.transpose() + v2 * nu.transpose();
        Ok(StrainAudit {
            proj_s_nu: (proj * s0 * nu).amax(),
            s1_nu: (s1 * nu).amax(),
            s_minus_projected: (s0 - proj * sym(gv) * proj).amax(),
            v1_normal: v1v.dot(&nu).abs(),
            v2_normal: v2.dot(&nu).abs(),
        })
    }
}

/// Surface data along one normal line; evaluates `u`, `p` and `∇u` at any `ρ`.
#[derive(Clone, Copy, Debug)]
pub struct NormalLine {
    pub v: V3,
    pub v1: V3,
    pub v2: V3,
    pub grad_v: M3,
    pub grad_v1: M3,
    pub grad_v2: M3,
    pub q: f64,
    pub q1: f64,
    pub normal: V3,
    pub shape_operator: M3,
    /// `V_Γ^N` at the foot.
    pub normal_speed: f64,
}

impl NormalLine {
    pub fn velocity(&self, rho: f64) -> V3 {
        self.v + self.v1 * rho + self.v2 * (rho * rho)
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.q + self.q1 * rho
    }

    /// `(I − ρA)⁻¹(∇_Γv + ρ∇_Γv¹ + ρ²∇_Γv²) + ν⊗(v¹ + 2ρv²)`.
    pub fn gradient(&self, rho: f64) -> Result<M3> {
        let tan = self.grad_v + self.grad_v1 * rho + self.grad_v2 * (rho * rho);
        let m = M3::identity() - self.shape_operator * rho;
        let inv = m.try_inverse().ok_or(Error::NonPositiveJacobian(m.determinant()))?;
        Ok(inv * tan + self.normal * (self.v1 + self.v2 * (2.0 * rho)).transpose())
    }

    /// `D(u)` at `ρ`.
    pub fn strain(&self, rho: f64) -> Result<M3> {
        let g = self.gradient(rho)?;
        Ok((g + g.transpose()) * 0.5)
    }
}

/// Pointwise sum of two vector fields.
pub struct SumField(pub Box<dyn VectorField>, pub Box<dyn VectorField>);

impl VectorField for SumField {
    fn jet(&self, cj: &ChartJets, t: f64) -> JV {
        self.0.jet(cj, t) + self.1.jet(cj, t)
    }
    fn depth(&self) -> i8 {
        self.0.depth().max(self.1.depth())
    }
    fn name(&self) -> String {
        format!("{} + {}", self.0.name(), self.1.name())
    }
    fn tangential(&self) -> bool {
        self.0.tangential() && self.1.tangential()
    }
}

/// `P_Γ D_Γ(v) P_Γ` from the jet gradient of `v`.
pub fn projected_strain(cj: &ChartJets, grad: &JM) -> JM {
    let p = cj.proj();
    p * ((grad + grad.transpose()) * Jet::constant(0.5)) * p
}

/// Pointwise boundary-audit quantities (all should vanish).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrainAudit {
    /// `|P_Γ S ν|` with `S = D_Γ(v) + (ν⊗v¹ + v¹⊗ν)/2`.
    pub proj_s_nu: f64,
    /// `|S¹ν|` with `S¹ = sym(A∇_Γv) + D_Γ(v¹) + ν⊗v² + v²⊗ν`.
    pub s1_nu: f64,
    /// `|S − P_Γ D_Γ(v) P_Γ|`.
    pub s_minus_projected: f64,
    pub v1_normal: f64,
    pub v2_normal: f64,
}

impl StrainAudit {
    pub fn max(&self) -> f64 {
        [
            self.proj_s_nu,
            self.s1_nu,
            self.s_minus_projected,
            self.v1_normal,
            self.v2_normal,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `v¹ = −(∇_Γv)ν`.
pub struct FirstOrderVelocity(pub Box<dyn VectorField>);

impl VectorField for FirstOrderVelocity {
    fn jet(&self, cj: &ChartJets, t: f64) -> JV {
        -(cj.grad_vec(&self.0.jet(cj, t)) * cj.nu)
    }
    fn depth(&self) -> i8 {
        (self.0.depth() + 1).max(1)
    }
    fn name(&self) -> String {
        format!("-(grad {})nu", self.0.name())
    }
    fn tangential(&self) -> bool {
        true
    }
}

/// `−2P_Γ D_Γ(v)ν`, the strain form of the first-order velocity.
pub struct StrainFirstOrderVelocity(pub Box<dyn VectorField>);

impl VectorField for StrainFirstOrderVelocity {
    fn jet(&self, cj: &ChartJets, t: f64) -> JV {
        let g = cj.grad_vec(&self.0.jet(cj, t));
        -(cj.proj() * (g + g.transpose()) * cj.nu)
    }
    fn depth(&self) -> i8 {
        (self.0.depth() + 1).max(1)
    }
    fn name(&self) -> String {
        format!("-2PD({})nu", self.0.name())
    }
}

/// `q¹ = −Av·v + 2μ₀ tr[A∇_Γv]` (+ `bump`), the normal pressure gradient of a
/// stationary surface.
pub struct StationaryNormalPressure {
    pub v: Box<dyn VectorField>,
    pub mu: f64,
    pub bump: f64,
}

impl ScalarField for StationaryNormalPressure {
    fn jet(&self, cj: &ChartJets, t: f64) -> Jet {
        let v = self.v.jet(cj, t);
        let a = cj.shape_operator();
        let mut q1 = -dot(&(a * v), &v) + Jet::constant(self.bump);
        if self.mu != 0.0 {
            q1 += trace(&(a * cj.grad_vec(&v))) * (2.0 * self.mu);
        }
        q1
    }
    fn depth(&self) -> i8 {
        (self.v.depth() + 1).max(2)
    }
    fn name(&self) -> String {
        "-Av.v + 2mu tr[A grad v]".into()
    }
}

/// Rigid velocity `ċ(t) + Ω × (x − c(t))` of a translating body spinning at `Ω`.
pub struct RigidVelocity {
    pub ms: MovingSurface,
    pub omega: V3,
}

impl RigidVelocity {
    fn centre(&self, t: f64) -> (V3, V3, V3) {
        let c = self.ms.motion.similarity(&self.ms.base.transform, t).shift;
        let (cdot, _, _) = self.ms.motion.rates(t);
        let cddot = match self.ms.motion {
            Motion::Translate { accel, .. } => accel,
            _ => V3::zeros(),
        };
        (c, cdot, cddot)
    }
}

impl VectorField for RigidVelocity {
    fn jet(&self, cj: &ChartJets, t: f64) -> JV {
        let (c, cdot, _) = self.centre(t);
        let r = cj.mu - jv_const(&c);
        jv_const(&cdot) + cross(&jv_const(&self.omega), &r)
    }
    fn name(&self) -> String {
        "rigid velocity".into()
    }
}

/// Exact rigid-body pressure `½|Ω × r|² − c̈·r` and its normal derivative.
pub struct RigidPressure {
    pub rigid: RigidVelocity,
    pub normal_derivative: bool,
}

impl ScalarField for RigidPressure {
    fn jet(&self, cj: &ChartJets, t: f64) -> Jet {
        let (c, _, cddot) = self.rigid.centre(t);
        let w = jv_const(&self.rigid.omega);
        let r = cj.mu - jv_const(&c);
        let acc = jv_const(&cddot);
        if self.normal_derivative {
            // ∇p·ν with ∇p = |Ω|²r − (Ω·r)Ω − c̈
            let grad = r * Jet::constant(self.rigid.omega.norm_squared()) - w * dot(&w, &r) - acc;
            dot(&grad, &cj.nu)
        } else {
            let wr = cross(&w, &r);
            dot(&wr, &wr) * 0.5 - dot(&acc, &r)
        }
    }
    fn depth(&self) -> i8 {
        if self.normal_derivative {
            1
        } else {
            0
        }
    }
    fn name(&self) -> String {
        if self.normal_derivative {
            "rigid q1".into()
        } else {
            "rigid q".into()
        }
    }
}

/// Centripetal pressure `(ω²/2)(1 − y₃²)` on the unit sphere.
pub struct CentripetalPressure {
    pub omega: f64,
}

impl ScalarField for CentripetalPressure {
    fn jet(&self, cj: &ChartJets, _t: f64) -> Jet {
        (Jet::constant(1.0) - cj.mu[2] * cj.mu[2]) * (0.5 * self.omega * self.omega)
    }
    fn name(&self) -> String {
        "centripetal pressure".into()
    }
}

/// Matrix field with nine independent ambient polynomial entries.
pub struct PolyMatrix {
    pub entries: Vec<AmbientPoly>,
}

impl PolyMatrix {
    pub fn seeded(degree: u32, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self {
            entries: (0..9).map(|_| AmbientPoly::random(degree, &mut rng)).collect(),
        }
    }

    pub fn jet(&self, cj: &ChartJets) -> JM {
        JM::from_fn(|i, j| self.entries[3 * i + j].eval_jet(&cj.mu))
    }

    pub fn value(&self, x: &V3) -> M3 {
        M3::from_fn(|i, j| self.entries[3 * i + j].eval(x))
    }
}

/// Defect of `div[S(π) + d S¹(π)] = div_Γ S(π) + (S¹)ᵀν(π) + O(d)` at `x`,
/// with the ambient divergence taken by central differences.
pub fn matrix_divergence_defect(
    s: &ClosedSurface,
    s0: &PolyMatrix,
    s1: &PolyMatrix,
    x: &V3,
    h: f64,
) -> Result<f64> {
    let field = |z: &V3| -> Result<M3> {
        let tp = s.closest_point(z, None)?;
        let y = tp.foot;
        Ok(s0.value(&y) + s1.value(&y) * tp.dist)
    };
    let mut div = V3::zeros();
    for k in 0..3 {
        let mut e = V3::zeros();
        e[k] = h;
        let dm = (field(&(x + e))? - field(&(x - e))?) / (2.0 * h);
        for j in 0..3 {
            div[j] += dm[(k, j)];
        }
    }
    let tp = s.closest_point(x, None)?;
    let cj = s.jets(tp.point, 2)?;
    let surf = jv_value(&cj.div_mat(&s0.jet(&cj)));
    let nu = cj.normal();
    let expected = surf + s1.value(&cj.position()).transpose() * nu;
    Ok((div - expected).amax())
}

/// Residuals of `tr[A∇_Γv] + div_Γv¹` with `v¹ = −(∇_Γv)ν` and of
/// `2tr[A∇_Γv] − (Δ_Γv)·ν`, from jets.
pub fn first_order_continuity(s: &ClosedSurface, v: &dyn VectorField, p: SurfacePoint, t: f64) -> Result<[f64; 2]> {
    let cj = s.jets(p, (v.depth() + 2).max(3))?;
    let vj = v.jet(&cj, t);
    let grad = cj.grad_vec(&vj);
    let v1 = -(grad * cj.nu);
    let tr = trace(&(cj.shape_operator() * grad)).value();
    let div_v1 = cj.div_vec(&v1).value();
    let lap_n = dot(&cj.lap_vec(&vj), &cj.nu).value();
    Ok([(tr + div_v1).abs(), (2.0 * tr - lap_n).abs()])
}

/// Gap between `−(∇_Γv)ν` and `−2P_Γ D_Γ(v)ν`, and the normal part of the
/// former.
pub fn first_order_velocity_defect(s: &ClosedSurface, v: &dyn VectorField, p: SurfacePoint, t: f64) -> Result<[f64; 2]> {
    let cj = s.jets(p, v.depth() + 1)?;
    let vj = v.jet(&cj, t);
    let g = cj.grad_vec(&vj);
    let a = jv_value(&(g * cj.nu));
    let b = jv_value(&(cj.proj() * (g + g.transpose()) * cj.nu));
    Ok([(a - b).amax(), a.dot(&cj.normal()).abs()])
}

/// `(−(v·∇_Γ)v + 2μ₀ div_Γ(P D_Γ(v) P))·ν` against `−Av·v + 2μ₀ tr[A∇_Γv]` for a
/// tangential field on a stationary surface.
pub fn normal_pressure_consistency(
    s: &ClosedSurface,
    v: &dyn VectorField,
    mu: f64,
    p: SurfacePoint,
) -> Result<f64> {
    let cj = s.jets(p, (v.depth() + 2).max(3))?;
    let vj = v.jet(&cj, 0.0);
    let grad = cj.grad_vec(&vj);
    let conv = grad.transpose() * vj;
    let visc = cj.div_mat(&projected_strain(&cj, &grad)) * Jet::constant(2.0 * mu);
    let lhs = dot(&(visc - conv), &cj.nu).value();
    let a = cj.shape_operator();
    let rhs = (-dot(&(a * vj), &vj) + trace(&(a * grad)) * (2.0 * mu)).value();
    Ok((lhs - rhs).abs())
}

/// A named manufactured flow.
pub struct Scenario {
    pub spec: String,
    pub bulk: BulkField,
    /// Coefficients satisfy the limit system.
    pub certified: bool,
    pub q1_bump: f64,
}

impl Scenario {
    /// Rigid rotation `ω e₃ × y` on the stationary unit sphere.
    pub fn rotating_sphere(omega: f64, mode: Mode, q1_bump: f64) -> Self {
        let v = || Box::new(Killing { axis: V3::z(), omega }) as Box<dyn VectorField>;
        let coeffs = ExpansionCoefficients {
            v: v(),
            v1: Box::new(FirstOrderVelocity(v())),
            v2: Box::new(ZeroVector),
            q: Box::new(CentripetalPressure { omega }),
            q1: Box::new(StationaryNormalPressure {
                v: v(),
                mu: mode.viscosity(),
                bump: q1_bump,
            }),
        };
        Self {
            spec: String::new(),
            bulk: BulkField {
                coeffs,
                ms: MovingSurface::stationary(ClosedSurface::sphere(1.0)),
                mode,
            },
            certified: q1_bump == 0.0,
            q1_bump,
        }
    }

    /// Unit sphere translating with velocity `vel + accel·t` and spinning at
    /// `Ω`; exact rigid-body pressure.
    pub fn translating_sphere(vel: V3, accel: V3, omega: V3, mode: Mode) -> Self {
        let ms = MovingSurface::new(ClosedSurface::sphere(1.0), Motion::Translate { vel, accel });
        let rigid = || RigidVelocity {
            ms: ms.clone(),
            omega,
        };
        let coeffs = ExpansionCoefficients {
            v: Box::new(rigid()),
            v1: Box::new(FirstOrderVelocity(Box::new(rigid()))),
            v2: Box::new(ZeroVector),
            q: Box::new(RigidPressure {
                rigid: rigid(),
                normal_derivative: false,
            }),
            q1: Box::new(RigidPressure {
                rigid: rigid(),
                normal_derivative: true,
            }),
        };
        Self {
            spec: String::new(),
            bulk: BulkField { coeffs, ms, mode },
            certified: true,
            q1_bump: 0.0,
        }
    }

    /// Stationary surface carrying `v` with `v¹ = −(∇_Γv)ν`, `v² = 0` and zero
    /// pressure. Not a solution; exercises the kinematic boundary structure.
    pub fn kinematic(surface: ClosedSurface, v: impl Fn() -> Box<dyn VectorField>, mu: f64) -> Self {
        let coeffs = ExpansionCoefficients {
            v: v(),
            v1: Box::new(FirstOrderVelocity(v())),
            ..ExpansionCoefficients::zero()
        };
        Self {
            spec: String::new(),
            bulk: BulkField {
                coeffs,
                ms: MovingSurface::stationary(surface),
                mode: Mode::NavierStokes { mu },
            },
            certified: false,
            q1_bump: 0.0,
        }
    }

    /// Translating, spinning unit sphere plus a carried tangential curl field
    /// `ν × ∇_Γψ(x − c(t))`. Not a solution of the limit system; used where
    /// only kinematic structure matters (boundary audit, thin-width limits).
    pub fn perturbed_translating_sphere(vel: V3, accel: V3, omega: V3, mode: Mode, seed: u64) -> Self {
        let mut sc = Self::translating_sphere(vel, accel, omega, mode);
        let motion = sc.bulk.ms.motion;
        let base = sc.bulk.ms.base.transform;
        let psi = AmbientPoly::seeded(3, seed);
        let carried = move || {
            let psi = psi.clone();
            Box::new(SurfaceCurl(AmbientFn(
                move |mu: &JV, t: f64| psi.eval_jet(&(mu - jv_const(&motion.similarity(&base, t).shift))),
                "carried poly",
            ))) as Box<dyn VectorField>
        };
        let rigid = RigidVelocity {
            ms: sc.bulk.ms.clone(),
            omega,
        };
        let v = move || {
            Box::new(SumField(
                Box::new(RigidVelocity {
                    ms: rigid.ms.clone(),
                    omega: rigid.omega,
                }),
                carried(),
            )) as Box<dyn VectorField>
        };
        sc.bulk.coeffs.v = v();
        sc.bulk.coeffs.v1 = Box::new(FirstOrderVelocity(v()));
        sc.certified = false;
        sc
    }

    /// Parses `euler:rotating-sphere[:omega=1]`, `ns:rotating-sphere:mu=0.7`,
    /// `euler:translating-sphere[:vx=0.3,ax=0.2,omega=0.5]`,
    /// `negative:q1-bump=0.1`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Spec {
            spec: spec.into(),
            reason: reason.into(),
        };
        let mut parts = spec.splitn(3, ':');
        let head = parts.next().unwrap_or("");
        let second = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("");
        let params_of = |s: &str| crate::geometry::split_spec(&format!("x:{s}")).map(|(_, p)| p);
        let mut sc = match head {
            "negative" => {
                let params = params_of(second)?;
                let bump = crate::geometry::lookup_or(&params, "q1-bump", f64::NAN);
                if !bump.is_finite() {
                    return Err(bad("negative control needs q1-bump=<value>"));
                }
                Self::rotating_sphere(1.0, Mode::Euler, bump)
            }
            "euler" | "ns" => {
                let params = params_of(rest)?;
                let get = |k: &str, d: f64| crate::geometry::lookup_or(&params, k, d);
                let mode = if head == "ns" {
                    let mu = get("mu", 0.7);
                    if mu < 0.0 {
                        return Err(bad("viscosity must be non-negative"));
                    }
                    Mode::NavierStokes { mu }
                } else {
                    Mode::Euler
                };
                match second {
                    "rotating-sphere" => Self::rotating_sphere(get("omega", 1.0), mode, 0.0),
                    "translating-sphere" => Self::translating_sphere(
                        V3::new(get("vx", 0.3), get("vy", 0.0), get("vz", 0.0)),
                        V3::new(get("ax", 0.0), get("ay", 0.0), get("az", 0.0)),
                        V3::z() * get("omega", 0.5),
                        mode,
                    ),
                    "perturbed-translating-sphere" => Self::perturbed_translating_sphere(
                        V3::new(get("vx", 0.3), get("vy", 0.0), get("vz", 0.0)),
                        V3::new(get("ax", 0.2), get("ay", 0.0), get("az", 0.0)),
                        V3::z() * get("omega", 0.5),
                        mode,
                        get("seed", 7.0) as u64,
                    ),
                    _ => return Err(bad("unknown flow")),
                }
            }
            _ => return Err(bad("expected euler:, ns: or negative:")),
        };
        sc.spec = spec.to_string();
        Ok(sc)
    }

    /// Sup-norm of the bulk residual on both sheets `d = ±ε` over sample points.
    pub fn bulk_residual_sup(&self, eps: f64, points: &[SurfacePoint], t: f64) -> Result<f64> {
        let s = self.bulk.ms.at(t);
        let steps = BulkSteps::for_width(eps);
        let mut worst: f64 = 0.0;
        for &p in points {
            let y = s.chart_map(p);
            let nu = s.jets(p, 1)?.normal();
            for sign in [1.0, -1.0] {
                let r = self.bulk.residual(&(y + nu * (sign * eps)), t, steps)?;
                worst = worst.max(r.norm());
            }
        }
        Ok(worst)
    }

    /// Normal component of the bulk momentum residual on the surface.
    pub fn surface_normal_residual(&self, points: &[SurfacePoint], t: f64) -> Result<Vec<f64>> {
        let s = self.bulk.ms.at(t);
        let steps = BulkSteps::for_width(0.02);
        points
            .iter()
            .map(|&p| {
                let y = s.chart_map(p);
                let nu = s.jets(p, 1)?.normal();
                Ok(self.bulk.residual(&y, t, steps)?.momentum.dot(&nu))
            })
            .collect()
    }

    /// Navier-condition defects on both sheets: `|u·ν_ε − V_ε|` and
    /// `|P D(u) ν_ε|`, maximised over sample points.
    pub fn navier_defects(&self, eps: f64, points: &[SurfacePoint], t: f64) -> Result<[f64; 2]> {
        let s = self.bulk.ms.at(t);
        let h = 1e-4f64.min(eps / 20.0);
        let mut worst = [0.0f64; 2];
        for &p in points {
            let y = s.chart_map(p);
            let nu = s.jets(p, 1)?.normal();
            let vn = self.bulk.ms.velocity(&y, t).dot(&nu);
            let proj = M3::identity() - nu * nu.transpose();
            for sign in [1.0, -1.0] {
                let x = y + nu * (sign * eps);
                let nu_eps = nu * sign;
                let (u, _) = self.bulk.on_normal_line(&s, p, sign * eps, t)?;
                worst[0] = worst[0].max((u.dot(&nu_eps) - vn * sign).abs());
                let d = self.bulk.strain_fd(&x, t, h)?;
                worst[1] = worst[1].max((proj * d * nu_eps).amax());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;
    use crate::tancalc::fields::{curvature_poly, PolyVector, Projected};
    use approx::assert_relative_eq;

    #[test]
    fn zero_coefficients_give_zero_residuals() {
        let bulk = BulkField {
            coeffs: ExpansionCoefficients::zero(),
            ms: MovingSurface::stationary(ClosedSurface::torus(2.0, 0.5)),
            mode: Mode::NavierStokes { mu: 1.0 },
        };
        let x = V3::new(2.6, 0.1, 0.05);
        assert_eq!(bulk.residual(&x, 0.0, BulkSteps::for_width(0.1)).unwrap().norm(), 0.0);
        let p = bulk.ms.base.locate(&x);
        assert_eq!(bulk.limit_residual(p, 0.0, 1e-4).unwrap().norm(), 0.0);
    }

    #[test]
    fn linear_pressure_from_q1() {
        let mut coeffs = ExpansionCoefficients::zero();
        coeffs.q1 = Box::new(crate::tancalc::fields::ConstScalar(1.0));
        let bulk = BulkField {
            coeffs,
            ms: MovingSurface::stationary(ClosedSurface::sphere(1.0)),
            mode: Mode::Euler,
        };
        let (_, p) = bulk.synthesize(&V3::new(0.0, 1.07, 0.0), 0.0).unwrap();
        assert_relative_eq!(p, 0.07, epsilon = 1e-13);
    }

    #[test]
    fn rotating_sphere_first_order_velocity_is_minus_a_v() {
        let sc = Scenario::rotating_sphere(1.0, Mode::Euler, 0.0);
        let s = ClosedSurface::sphere(1.0);
        let p = s.locate(&V3::new(1.0, 0.0, 0.0));
        let c = sc.bulk.coeffs.values(&s, p, 0.0).unwrap();
        // A = −P so −Av = v for the tangential rotation
        assert!((c.v1 - c.v).amax() < 1e-14);
        let (u, _) = sc.bulk.on_normal_line(&s, p, 0.1, 0.0).unwrap();
        assert!((u - V3::new(0.0, 1.1, 0.0)).amax() < 1e-14);
    }

    #[test]
    fn centripetal_pressure_matches_meridian_quadrature() {
        // integrate −(P(v·∇)v)·e_θ along a meridian and compare with q(θ) − q(0)
        let omega = 1.3;
        let s = ClosedSurface::sphere(1.0);
        let v = Killing { axis: V3::z(), omega };
        let q = CentripetalPressure { omega };
        let phi = 0.4f64;
        let theta = 2.2f64;
        let integrand = |th: f64| {
            let y = V3::new(th.sin() * phi.cos(), th.sin() * phi.sin(), th.cos());
            let e_th = V3::new(th.cos() * phi.cos(), th.cos() * phi.sin(), -th.sin());
            let cj = s.jets(s.locate(&y), 2).unwrap();
            let vj = v.jet(&cj, 0.0);
            let conv = jv_value(&(cj.grad_vec(&vj).transpose() * vj));
            -(conv - y * conv.dot(&y)).dot(&e_th)
        };
        let integral: f64 = gauss_legendre(24)
            .into_iter()
            .map(|(x, w)| 0.5 * theta * w * integrand(0.5 * theta * (x + 1.0)))
            .sum();
        let at = |th: f64| {
            let y = V3::new(th.sin() * phi.cos(), th.sin() * phi.sin(), th.cos());
            scalar_value(&s, &q, s.locate(&y), 0.0).unwrap()
        };
        assert_relative_eq!(integral, at(theta) - at(0.0), epsilon = 1e-12);
    }

    #[test]
    fn limit_residuals_vanish_for_exact_flows() {
        for spec in ["euler:rotating-sphere", "ns:rotating-sphere:mu=0.7", "euler:translating-sphere:vx=0.3,ax=0.2,omega=0.5"] {
            let sc = Scenario::parse(spec).unwrap();
            for p in sc.bulk.ms.base.sample_points(6, 1) {
                let y = sc.bulk.ms.base.chart_map(p);
                let pt = sc.bulk.ms.at(0.3).locate(&(y + sc.bulk.ms.at(0.3).transform.shift));
                let r = sc.bulk.limit_residual(pt, 0.3, 1e-4).unwrap();
                assert!(r.norm() < 1e-7, "{spec}: {r:?}");
            }
        }
    }

    #[test]
    fn bulk_residual_is_first_order_in_width() {
        let sc = Scenario::parse("euler:rotating-sphere").unwrap();
        let pts = sc.bulk.ms.base.sample_points(4, 2);
        let r1 = sc.bulk_residual_sup(0.04, &pts, 0.0).unwrap();
        let r2 = sc.bulk_residual_sup(0.02, &pts, 0.0).unwrap();
        assert_relative_eq!(r1 / r2, 2.0, max_relative = 0.1);
    }

    #[test]
    fn negative_control_shows_in_normal_residual() {
        let sc = Scenario::parse("negative:q1-bump=0.1").unwrap();
        let pts = sc.bulk.ms.base.sample_points(4, 3);
        for r in sc.surface_normal_residual(&pts, 0.0).unwrap() {
            assert_relative_eq!(r, 0.1, epsilon = 1e-6);
        }
    }

    #[test]
    fn strain_audit_and_continuity_for_tangential_fields() {
        let s = ClosedSurface::torus(2.0, 0.5);
        let v = || Box::new(SurfaceCurl(curvature_poly(3, 4))) as Box<dyn VectorField>;
        let bulk = BulkField {
            coeffs: ExpansionCoefficients {
                v: v(),
                v1: Box::new(FirstOrderVelocity(v())),
                ..ExpansionCoefficients::zero()
            },
            ms: MovingSurface::stationary(s.clone()),
            mode: Mode::NavierStokes { mu: 1.0 },
        };
        for p in s.sample_points(5, 7) {
            assert!(bulk.strain_audit(p, 0.0).unwrap().max() < 1e-10);
            let [a, b] = first_order_continuity(&s, v().as_ref(), p, 0.0).unwrap();
            assert!(a < 1e-10 && b < 1e-10, "{a} {b}");
            let [c, d] = first_order_velocity_defect(&s, v().as_ref(), p, 0.0).unwrap();
            assert!(c < 1e-12 && d < 1e-12);
        }
    }

    #[test]
    fn wrong_first_order_velocity_is_flagged() {
        let s = ClosedSurface::sphere(1.0);
        let bulk = BulkField {
            coeffs: ExpansionCoefficients {
                v: Box::new(Killing { axis: V3::z(), omega: 1.0 }),
                ..ExpansionCoefficients::zero()
            },
            ms: MovingSurface::stationary(s.clone()),
            mode: Mode::NavierStokes { mu: 1.0 },
        };
        let p = s.locate(&V3::new(0.6, 0.0, 0.8));
        assert!(bulk.strain_audit(p, 0.0).unwrap().proj_s_nu > 0.1);
    }

    #[test]
    fn exact_bulk_gradient_matches_differences() {
        let s = ClosedSurface::ellipsoid(1.0, 1.2, 0.8);
        let v = || Box::new(Projected(PolyVector::seeded(2, 3))) as Box<dyn VectorField>;
        let bulk = BulkField {
            coeffs: ExpansionCoefficients {
                v: v(),
                v1: Box::new(FirstOrderVelocity(v())),
                v2: Box::new(Projected(PolyVector::seeded(2, 5))),
                ..ExpansionCoefficients::zero()
            },
            ms: MovingSurface::stationary(s.clone()),
            mode: Mode::NavierStokes { mu: 1.0 },
        };
        let p = s.sample_points(1, 3)[0];
        let rho = 0.05;
        let exact = bulk.gradient_on_normal_line(&s, p, rho, 0.0).unwrap();
        let x = s.chart_map(p) + s.jets(p, 1).unwrap().normal() * rho;
        let h = 1e-5;
        let mut fd = M3::zeros();
        for k in 0..3 {
            let mut e = V3::zeros();
            e[k] = h;
            let du = (bulk.synthesize(&(x + e), 0.0).unwrap().0 - bulk.synthesize(&(x - e), 0.0).unwrap().0) / (2.0 * h);
            for j in 0..3 {
                fd[(k, j)] = du[j];
            }
        }
        assert!((exact - fd).amax() < 1e-7, "{}", (exact - fd).amax());
    }

    #[test]
    fn matrix_divergence_defect_is_first_order() {
        let s = ClosedSurface::torus(2.0, 0.5);
        let s0 = PolyMatrix::seeded(2, 1);
        let s1 = PolyMatrix::seeded(2, 2);
        let p = s.sample_points(1, 4)[0];
        let y = s.chart_map(p);
        let nu = s.jets(p, 1).unwrap().normal();
        let a = matrix_divergence_defect(&s, &s0, &s1, &(y + nu * 0.02), 1e-5).unwrap();
        let b = matrix_divergence_defect(&s, &s0, &s1, &(y + nu * 0.01), 1e-5).unwrap();
        assert_relative_eq!(a / b, 2.0, max_relative = 0.15);
    }

    #[test]
    fn normal_pressure_formula_is_consistent() {
        let s = ClosedSurface::ellipsoid(1.0, 1.2, 0.8);
        let v = Projected(PolyVector::seeded(3, 8));
        for p in s.sample_points(4, 2) {
            assert!(normal_pressure_consistency(&s, &v, 0.7, p).unwrap() < 1e-10);
        }
    }

    #[test]
    fn perturbed_flow_keeps_boundary_structure() {
        let sc = Scenario::parse("ns:perturbed-translating-sphere:mu=0.5").unwrap();
        assert!(!sc.certified);
        let s = sc.bulk.ms.at(0.4);
        let pts: Vec<_> = s.sample_points(3, 5);
        for &p in &pts {
            assert!(sc.bulk.strain_audit(p, 0.4).unwrap().max() < 1e-9);
        }
        // on the unit sphere the synthesized field is |x|·w(x/|x|), exactly slip-free
        assert!(sc.navier_defects(0.04, &pts, 0.4).unwrap()[1] < 1e-7);
    }

    #[test]
    fn navier_conditions_hold_on_both_sheets() {
        // u = (I − dA)v(π) is slip-free at every width, not just to O(ε²)
        let s = ClosedSurface::ellipsoid(1.0, 1.2, 0.8);
        let field = || Box::new(Projected(PolyVector::seeded(2, 11))) as Box<dyn VectorField>;
        let sc = Scenario::kinematic(s.clone(), field, 1.0);
        let pts = s.sample_points(3, 5);
        for eps in [0.08, 0.02] {
            let [normal, slip] = sc.navier_defects(eps, &pts, 0.0).unwrap();
            assert!(normal < 1e-12 && slip < 1e-7, "{normal} {slip}");
        }
        let mut wrong = Scenario::kinematic(s, field, 1.0);
        wrong.bulk.coeffs.v1 = Box::new(ZeroVector);
        assert!(wrong.navier_defects(0.02, &pts, 0.0).unwrap()[1] > 1e-2);
    }

    #[test]
    fn parses_scenarios() {
        assert!(Scenario::parse("ns:rotating-sphere:mu=0.7").unwrap().certified);
        assert!(!Scenario::parse("negative:q1-bump=0.1").unwrap().certified);
        assert!(Scenario::parse("negative:").is_err());
        assert!(Scenario::parse("euler:cube").is_err());
        assert!(Scenario::parse("ns:rotating-sphere:mu=-1").is_err());
    }
}
