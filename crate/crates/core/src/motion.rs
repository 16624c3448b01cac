//! Moving surfaces generated by time-dependent similarity motions, with normal
//! velocity, normal-time and material derivatives, and the first-order
//! expansions of composite functions `f∘π` in the tubular neighborhood.

use crate::error::{Error, Result};
use crate::geometry::{dot, jv_value, ClosedSurface, Shape, Similarity, SurfacePoint};
use crate::jet::Jet;
use crate::tancalc::fields::{ScalarField, VectorField};
use crate::tancalc::FiniteDiff;
use crate::{JV, V3};

/// Default central time step.
pub const DEFAULT_DT: f64 = 1e-4;

/// Tolerance for "point lies on Γ(t)" and for `v·ν = V`.
pub const ON_SURFACE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Motion {
    Stationary,
    /// Centre `c(t) = c₀ + vel·t + accel·t²/2`.
    Translate { vel: V3, accel: V3 },
    /// Rotation by `ω t` about `axis` through the centre.
    Rotate { axis: V3, omega: f64 },
    /// Scale `s(t) = s₀(1 + amp·sin t)`; not area preserving.
    Breathe { amp: f64 },
}

impl Motion {
    pub fn is_rigid(&self) -> bool {
        !matches!(self, Motion::Breathe { .. })
    }

    /// Placement of the body at time `t`, starting from `base`.
    pub fn similarity(&self, base: &Similarity, t: f64) -> Similarity {
        match *self {
            Motion::Stationary => *base,
            Motion::Translate { vel, accel } => Similarity {
                shift: base.shift + vel * t + accel * (0.5 * t * t),
                ..*base
            },
            Motion::Rotate { axis, omega } => Similarity {
                rotation: Similarity::rotation_about(axis, omega * t) * base.rotation,
                ..*base
            },
            Motion::Breathe { amp } => Similarity {
                scale: base.scale * (1.0 + amp * t.sin()),
                ..*base
            },
        }
    }

    /// `(ċ, ṡ/s, ω)`: the Eulerian velocity is `ċ + (ṡ/s)(x − c) + ω × (x − c)`.
    pub fn rates(&self, t: f64) -> (V3, f64, V3) {
        match *self {
            Motion::Stationary => (V3::zeros(), 0.0, V3::zeros()),
            Motion::Translate { vel, accel } => (vel + accel * t, 0.0, V3::zeros()),
            Motion::Rotate { axis, omega } => (V3::zeros(), 0.0, axis.normalize() * omega),
            Motion::Breathe { amp } => (V3::zeros(), amp * t.cos() / (1.0 + amp * t.sin()), V3::zeros()),
        }
    }
}

/// A closed surface carried by a [`Motion`].
#[derive(Clone, Debug)]
pub struct MovingSurface {
    pub base: ClosedSurface,
    pub motion: Motion,
    pub label: String,
    pub t_end: f64,
}

impl MovingSurface {
    pub fn new(base: ClosedSurface, motion: Motion) -> Self {
        let label = match motion {
            Motion::Stationary => base.label.clone(),
            _ => format!("{} ({motion:?})", base.label),
        };
        Self {
            base,
            motion,
            label,
            t_end: 1.0,
        }
    }

    pub fn stationary(base: ClosedSurface) -> Self {
        Self::new(base, Motion::Stationary)
    }

    /// Parses a moving-surface spec:
    ///
    /// * `translate-sphere:R=1,vx=0.3[,vy=..,vz=..,ax=..,ay=..,az=..]`
    /// * `rotate-ellipsoid:a=1,b=1.2,c=0.8,omega=0.5` (about `e₃`)
    /// * `breathe-sphere:R=1,amp=0.1`
    /// * any plain surface spec, e.g. `torus:R0=2,r=0.5`, for a stationary surface
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, _) = spec.split_once(':').unwrap_or((spec, ""));
        let (verb, shape_spec) = match kind.split_once('-') {
            Some((verb, shape)) => (verb, format!("{shape}{}", &spec[kind.len()..])),
            None => ("stationary", spec.to_string()),
        };
        let shape = Shape::parse(&shape_spec)?;
        let (_, params) = crate::geometry::split_spec(spec)?;
        let get = |k: &str, d: f64| crate::geometry::lookup_or(&params, k, d);
        let motion = match verb {
            "stationary" => Motion::Stationary,
            "translate" => Motion::Translate {
                vel: V3::new(get("vx", 0.0), get("vy", 0.0), get("vz", 0.0)),
                accel: V3::new(get("ax", 0.0), get("ay", 0.0), get("az", 0.0)),
            },
            "rotate" => Motion::Rotate {
                axis: V3::z(),
                omega: get("omega", 1.0),
            },
            "breathe" => {
                let amp = get("amp", 0.1);
                if !(0.0..0.9).contains(&amp.abs()) {
                    return Err(Error::Spec {
                        spec: spec.into(),
                        reason: "breathing amplitude must be below 0.9".into(),
                    });
                }
                Motion::Breathe { amp }
            }
            other => {
                return Err(Error::Spec {
                    spec: spec.into(),
                    reason: format!("unknown motion `{other}`"),
                })
            }
        };
        let mut ms = Self::new(ClosedSurface::new(shape), motion);
        ms.label = spec.to_string();
        Ok(ms)
    }

    /// Snapshot `Γ(t)`; shares the body atlas.
    pub fn at(&self, t: f64) -> ClosedSurface {
        self.base
            .transformed(self.motion.similarity(&self.base.transform, t))
    }

    /// Flow map `Φ(Y, t)` for a point `Y` of `Γ(0)`.
    pub fn flow_map(&self, y0: &V3, t: f64) -> V3 {
        let s0 = self.motion.similarity(&self.base.transform, 0.0);
        let st = self.motion.similarity(&self.base.transform, t);
        st.apply(&s0.apply_inverse(y0))
    }

    /// Eulerian velocity of the motion at `x`, time `t`.
    pub fn velocity(&self, x: &V3, t: f64) -> V3 {
        let (cdot, rate, omega) = self.motion.rates(t);
        let c = self.motion.similarity(&self.base.transform, t).shift;
        cdot + (x - c) * rate + omega.cross(&(x - c))
    }

    /// Rigid velocity of the motion as a surface field on `Γ(t)`.
    pub fn velocity_field(&self) -> MotionVelocity {
        MotionVelocity { ms: self.clone() }
    }

    /// `V_Γ^N` as a surface field on `Γ(t)`.
    pub fn normal_speed_field(&self) -> NormalSpeed {
        NormalSpeed {
            v: self.velocity_field(),
        }
    }

    /// Chart point of `y ∈ Γ(t)`, rejecting points off the surface.
    pub fn surface_point(&self, y: &V3, t: f64) -> Result<SurfacePoint> {
        let s = self.at(t);
        let tp = s.closest_point(y, None)?;
        if tp.dist.abs() > ON_SURFACE_TOL * s.diameter().max(1.0) {
            return Err(Error::OutsideReach {
                dist: tp.dist,
                reach: ON_SURFACE_TOL,
            });
        }
        Ok(tp.point)
    }

    /// `V_Γ^N(y, t)`.
    pub fn normal_velocity(&self, y: &V3, t: f64) -> Result<f64> {
        let s = self.at(t);
        let p = self.surface_point(y, t)?;
        let nu = s.jets(p, 1)?.normal();
        Ok(self.velocity(&s.chart_map(p), t).dot(&nu))
    }

    /// Signed distance to `Γ(t)`.
    pub fn distance(&self, x: &V3, t: f64) -> Result<f64> {
        self.at(t).signed_distance(x, None)
    }

    /// `∂ₜd(x, t)` by central differences.
    pub fn distance_rate(&self, x: &V3, t: f64, dt: f64) -> Result<f64> {
        Ok((self.distance(x, t + dt)? - self.distance(x, t - dt)?) / (2.0 * dt))
    }

    /// `∂ₜπ(x, t)` by central differences.
    pub fn projection_rate(&self, x: &V3, t: f64, dt: f64) -> Result<V3> {
        let plus = self.at(t + dt).closest_point(x, None)?.foot;
        let minus = self.at(t - dt).closest_point(x, None)?.foot;
        Ok((plus - minus) / (2.0 * dt))
    }

    /// `f(π(x, t), t)`.
    pub fn composite(&self, f: &dyn ScalarField, x: &V3, t: f64) -> Result<f64> {
        let s = self.at(t);
        let tp = s.closest_point(x, None)?;
        crate::tancalc::fields::scalar_value(&s, f, tp.point, t)
    }

    /// `∂°f(y, t)`: central time difference of `t' ↦ f(π(y, t'), t')`.
    pub fn normal_time_derivative(&self, f: &dyn ScalarField, y: &V3, t: f64, dt: f64) -> Result<f64> {
        self.surface_point(y, t)?;
        Ok((self.composite(f, y, t + dt)? - self.composite(f, y, t - dt)?) / (2.0 * dt))
    }

    /// `∇_Γf(y, t)` on `Γ(t)` from chart jets.
    pub fn surface_gradient(&self, f: &dyn ScalarField, y: &V3, t: f64) -> Result<V3> {
        let s = self.at(t);
        let p = self.surface_point(y, t)?;
        let cj = s.jets(p, f.depth() + 1)?;
        Ok(jv_value(&cj.grad(&f.jet(&cj, t))))
    }

    /// `∂•_v f = ∂°f + vᵀ·∇_Γf`; rejects `v` whose normal part is not `V_Γ^N`.
    pub fn material_derivative(
        &self,
        f: &dyn ScalarField,
        v: &dyn VectorField,
        y: &V3,
        t: f64,
        dt: f64,
    ) -> Result<f64> {
        let s = self.at(t);
        let p = self.surface_point(y, t)?;
        let cj = s.jets(p, v.depth().max(1))?;
        let vv = jv_value(&v.jet(&cj, t));
        let nu = cj.normal();
        let vn = self.normal_velocity(y, t)?;
        if (vv.dot(&nu) - vn).abs() > ON_SURFACE_TOL.max(1e-9 * vv.norm()) {
            return Err(Error::NormalSpeedMismatch {
                vn: vv.dot(&nu),
                speed: vn,
            });
        }
        let vt = vv - nu * vv.dot(&nu);
        Ok(self.normal_time_derivative(f, y, t, dt)? + vt.dot(&self.surface_gradient(f, y, t)?))
    }

    /// Flow-map oracle for `∂•_v f`: integrates `ẋ = v(x, t)` from `y` by RK4
    /// over `±dt` and differences `f` along the trajectory.
    pub fn flow_derivative(
        &self,
        f: &dyn ScalarField,
        v: &dyn VectorField,
        y: &V3,
        t: f64,
        dt: f64,
    ) -> Result<f64> {
        let vel = |x: &V3, tau: f64| -> Result<V3> {
            let s = self.at(tau);
            let tp = s.closest_point(x, None)?;
            crate::tancalc::fields::vector_value(&s, v, tp.point, tau)
        };
        let mut ends = [0.0; 2];
        for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
            let steps = 4;
            let h = sign * dt / steps as f64;
            let mut x = *y;
            let mut tau = t;
            for _ in 0..steps {
                let k1 = vel(&x, tau)?;
                let k2 = vel(&(x + k1 * (0.5 * h)), tau + 0.5 * h)?;
                let k3 = vel(&(x + k2 * (0.5 * h)), tau + 0.5 * h)?;
                let k4 = vel(&(x + k3 * h), tau + h)?;
                x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                tau += h;
            }
            ends[k] = self.composite(f, &x, tau)?;
        }
        Ok((ends[0] - ends[1]) / (2.0 * dt))
    }

    /// Defects of `∇(f∘π) = ∇_Γf + d·A∇_Γf` and
    /// `∂ₜ(f∘π) = ∂°f + d·∇_ΓV·∇_Γf` at the tubular point `x`, plus the defect
    /// of `∂ₜπ = Vν + d∇_ΓV`. Ambient and time derivatives are central
    /// differences with steps `h` and `dt`.
    pub fn composite_expansion_defects(
        &self,
        f: &dyn ScalarField,
        x: &V3,
        t: f64,
        h: f64,
        dt: f64,
    ) -> Result<[f64; 3]> {
        let s = self.at(t);
        let tp = s.closest_point(x, None)?;
        let fd = FiniteDiff::new(&s, h);
        let amb = fd.ambient_partials(x, tp.point, &|q| {
            Ok(vec![crate::tancalc::fields::scalar_value(&s, f, q.point, t)?])
        })?;
        let grad_comp = V3::new(amb[0][0], amb[1][0], amb[2][0]);
        let geo = s.eval_geometry(tp.point)?;
        let y = tp.foot;
        let grad_f = self.surface_gradient(f, &y, t)?;
        let d = tp.dist;
        let space = (grad_comp - (grad_f + geo.shape_operator * grad_f * d)).amax();

        let vn_field = self.normal_speed_field();
        let grad_v = self.surface_gradient(&vn_field, &y, t)?;
        let dt_comp = (self.composite(f, x, t + dt)? - self.composite(f, x, t - dt)?) / (2.0 * dt);
        let time = (dt_comp - (self.normal_time_derivative(f, &y, t, dt)? + d * grad_v.dot(&grad_f))).abs();

        let vn = self.normal_velocity(&y, t)?;
        let proj_rate = self.projection_rate(x, t, dt)?;
        let proj = (proj_rate - (geo.normal * vn + grad_v * d)).amax();
        Ok([space, time, proj])
    }
}

/// The motion's Eulerian velocity restricted to `Γ(t)`.
#[derive(Clone, Debug)]
pub struct MotionVelocity {
    ms: MovingSurface,
}

impl VectorField for MotionVelocity {
    fn jet(&self, cj: &crate::geometry::ChartJets, t: f64) -> JV {
        let (cdot, rate, omega) = self.ms.motion.rates(t);
        let c = self.ms.motion.similarity(&self.ms.base.transform, t).shift;
        let r = JV::new(cj.mu[0] - c[0], cj.mu[1] - c[1], cj.mu[2] - c[2]);
        let w = crate::geometry::jv_const(&omega);
        crate::geometry::jv_const(&cdot) + r * Jet::constant(rate) + crate::geometry::cross(&w, &r)
    }
    fn name(&self) -> String {
        format!("velocity of {}", self.ms.label)
    }
}

/// `V_Γ^N = (motion velocity)·ν`.
#[derive(Clone, Debug)]
pub struct NormalSpeed {
    v: MotionVelocity,
}

impl ScalarField for NormalSpeed {
    fn jet(&self, cj: &crate::geometry::ChartJets, t: f64) -> Jet {
        dot(&self.v.jet(cj, t), &cj.nu)
    }
    fn depth(&self) -> i8 {
        1
    }
    fn name(&self) -> String {
        "normal speed".into()
    }
}

/// Adds the motion velocity to a tangential field, giving an admissible
/// transport velocity `v` with `v·ν = V_Γ^N`.
pub struct Transport<'a> {
    pub motion: MotionVelocity,
    pub tangential: &'a dyn VectorField,
}

impl VectorField for Transport<'_> {
    fn jet(&self, cj: &crate::geometry::ChartJets, t: f64) -> JV {
        self.motion.jet(cj, t) + self.tangential.jet(cj, t)
    }
    fn depth(&self) -> i8 {
        self.tangential.depth()
    }
    fn name(&self) -> String {
        format!("{} + {}", self.motion.name(), self.tangential.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tancalc::fields::{AmbientFn, ConstScalar, Killing, PolyVector, Projected, SpaceTimePoly};
    use approx::assert_relative_eq;

    fn translating() -> MovingSurface {
        MovingSurface::parse("translate-sphere:R=1,vx=1").unwrap()
    }

    #[test]
    fn parses_motion_specs() {
        for spec in [
            "translate-sphere:R=1,vx=0.3",
            "rotate-ellipsoid:a=1,b=1.2,c=0.8,omega=0.5",
            "breathe-sphere:R=1,amp=0.1",
            "torus:R0=2,r=0.5",
        ] {
            assert!(MovingSurface::parse(spec).is_ok(), "{spec}");
        }
        assert!(MovingSurface::parse("spin-sphere:R=1").is_err());
        assert!(MovingSurface::parse("breathe-sphere:R=1,amp=2").is_err());
    }

    #[test]
    fn flow_map_starts_at_identity() {
        let ms = MovingSurface::parse("rotate-ellipsoid:a=1,b=1.2,c=0.8,omega=0.5").unwrap();
        let y = ms.base.chart_map(ms.base.sample_points(1, 2)[0]);
        assert!((ms.flow_map(&y, 0.0) - y).amax() < 1e-15);
        let yt = ms.flow_map(&y, 0.7);
        assert!(ms.distance(&yt, 0.7).unwrap().abs() < 1e-12);
    }

    #[test]
    fn translating_sphere_normal_velocity() {
        let ms = translating();
        let y = V3::new(0.6, 0.0, 0.8);
        assert_relative_eq!(ms.normal_velocity(&y, 0.0).unwrap(), 0.6, epsilon = 1e-13);
        assert_relative_eq!(ms.distance_rate(&y, 0.0, 1e-4).unwrap(), -0.6, epsilon = 1e-8);
    }

    #[test]
    fn breathing_sphere_normal_velocity() {
        let ms = MovingSurface::parse("breathe-sphere:R=1,amp=0.1").unwrap();
        let y = V3::new(0.0, 0.6, -0.8);
        assert_relative_eq!(ms.normal_velocity(&y, 0.0).unwrap(), 0.1, epsilon = 1e-13);
    }

    #[test]
    fn stationary_torus_has_zero_normal_velocity() {
        let ms = MovingSurface::parse("torus:R0=2,r=0.5").unwrap();
        assert_eq!(ms.normal_velocity(&V3::new(2.5, 0.0, 0.0), 0.3).unwrap(), 0.0);
    }

    #[test]
    fn normal_time_derivative_examples() {
        let ms = translating();
        let y = V3::new(0.6, 0.0, 0.8);
        let y1 = AmbientFn(|x: &JV, _t: f64| x[0], "y1");
        // ∂°y₁ = V ν₁ = ν₁²
        assert_relative_eq!(ms.normal_time_derivative(&y1, &y, 0.0, 1e-4).unwrap(), 0.36, epsilon = 1e-7);
        let still = MovingSurface::parse("sphere:R=1").unwrap();
        let lin = AmbientFn(|x: &JV, t: f64| x[2] * t, "y3 t");
        assert_relative_eq!(still.normal_time_derivative(&lin, &y, 0.5, 1e-4).unwrap(), 0.8, epsilon = 1e-10);
        assert_eq!(still.normal_time_derivative(&ConstScalar(2.0), &y, 0.5, 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn killing_transport_preserves_height() {
        let ms = MovingSurface::parse("sphere:R=1").unwrap();
        let v = Killing { axis: V3::z(), omega: 1.0 };
        let y3 = AmbientFn(|x: &JV, _t: f64| x[2], "y3");
        let y = V3::new(0.48, 0.6, 0.64);
        assert!(ms.material_derivative(&y3, &v, &y, 0.0, 1e-4).unwrap().abs() < 1e-9);
    }

    #[test]
    fn mismatched_normal_speed_is_rejected() {
        let ms = translating();
        let v = Killing { axis: V3::z(), omega: 1.0 };
        let f = ConstScalar(1.0);
        let err = ms.material_derivative(&f, &v, &V3::new(1.0, 0.0, 0.0), 0.0, 1e-4);
        assert!(matches!(err, Err(Error::NormalSpeedMismatch { .. })));
    }

    #[test]
    fn material_derivative_matches_flow_map() {
        let ms = translating();
        let f = SpaceTimePoly::seeded(2, 3);
        let tangential = Projected(PolyVector::seeded(2, 4));
        let v = Transport {
            motion: ms.velocity_field(),
            tangential: &tangential,
        };
        let y = V3::new(0.0, 0.6, 0.8);
        let a = ms.material_derivative(&f, &v, &y, 0.0, 1e-4).unwrap();
        let b = ms.flow_derivative(&f, &v, &y, 0.0, 1e-3).unwrap();
        assert!((a - b).abs() < 1e-5, "{a} {b}");
    }

    #[test]
    fn composite_defects_are_second_order() {
        let ms = translating();
        let f = SpaceTimePoly::seeded(3, 5);
        let y = V3::new(0.48, 0.6, 0.64);
        let mut prev: Option<[f64; 3]> = None;
        for d in [0.02, 0.01, 0.005] {
            let x = y * (1.0 + d);
            let defects = ms.composite_expansion_defects(&f, &x, 0.0, 1e-5, 1e-4).unwrap();
            if let Some(p) = prev {
                for k in 0..3 {
                    assert!(defects[k] < p[k] / 3.0, "{k}: {p:?} -> {defects:?}");
                }
            }
            prev = Some(defects);
        }
    }
}
