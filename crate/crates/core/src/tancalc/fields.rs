//! Surface fields evaluated on chart jets.
//!
//! A field maps the jets of a surface point (and a time) to jets of its value,
//! so the chart-intrinsic operators can differentiate it exactly. Fields built
//! from the normal lose one jet order per derivative of `ν` they contain; that
//! loss is declared by [`ScalarField::depth`] / [`VectorField::depth`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{cross, dot, jv_value, ChartJets, ClosedSurface, SurfacePoint};
use crate::jet::Jet;
use crate::{JV, V3};

pub trait ScalarField: Send + Sync {
    fn jet(&self, cj: &ChartJets, t: f64) -> Jet;
    /// Jet orders consumed by the field's own dependence on the geometry.
    fn depth(&self) -> i8 {
        0
    }
    fn name(&self) -> String;
}

pub trait VectorField: Send + Sync {
    fn jet(&self, cj: &ChartJets, t: f64) -> JV;
    fn depth(&self) -> i8 {
        0
    }
    fn name(&self) -> String;
    /// Whether the field is tangential by construction.
    fn tangential(&self) -> bool {
        false
    }
}

/// Value of a scalar field at a surface point.
pub fn scalar_value(
    surface: &ClosedSurface,
    f: &dyn ScalarField,
    p: SurfacePoint,
    t: f64,
) -> Result<f64> {
    let cj = surface.jets(p, f.depth().max(1))?;
    Ok(f.jet(&cj, t).value())
}

/// Value of a vector field at a surface point.
pub fn vector_value(
    surface: &ClosedSurface,
    f: &dyn VectorField,
    p: SurfacePoint,
    t: f64,
) -> Result<V3> {
    let cj = surface.jets(p, f.depth().max(1))?;
    Ok(jv_value(&f.jet(&cj, t)))
}

fn powers(x: Jet, deg: u32) -> Vec<Jet> {
    let mut out = Vec::with_capacity(deg as usize + 1);
    out.push(Jet::constant(1.0));
    for k in 1..=deg as usize {
        out.push(out[k - 1] * x);
    }
    out
}

/// Polynomial in the ambient coordinates, restricted to the surface.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientPoly {
    pub degree: u32,
    /// `(coefficient, [i, j, k])` for `c xⁱ yʲ zᵏ`.
    pub terms: Vec<(f64, [u32; 3])>,
    pub seed: Option<u64>,
}

impl AmbientPoly {
    /// All monomials of total degree ≤ `degree` with coefficients uniform in `[−1, 1]`.
    pub fn random(degree: u32, rng: &mut ChaCha8Rng) -> Self {
        let mut terms = Vec::new();
        for d in 0..=degree {
            for i in 0..=d {
                for j in 0..=(d - i) {
                    let k = d - i - j;
                    terms.push((rng.random_range(-1.0..=1.0), [i, j, k]));
                }
            }
        }
        Self {
            degree,
            terms,
            seed: None,
        }
    }

    pub fn seeded(degree: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            seed: Some(seed),
            ..Self::random(degree, &mut rng)
        }
    }

    pub fn eval_jet(&self, x: &JV) -> Jet {
        let px = powers(x[0], self.degree);
        let py = powers(x[1], self.degree);
        let pz = powers(x[2], self.degree);
        let mut acc = Jet::constant(0.0);
        for (c, [i, j, k]) in &self.terms {
            acc += px[*i as usize] * py[*j as usize] * pz[*k as usize] * *c;
        }
        acc
    }

    pub fn eval(&self, x: &V3) -> f64 {
        self.terms
            .iter()
            .map(|(c, [i, j, k])| {
                c * x[0].powi(*i as i32) * x[1].powi(*j as i32) * x[2].powi(*k as i32)
            })
            .sum()
    }
}

impl ScalarField for AmbientPoly {
    fn jet(&self, cj: &ChartJets, _t: f64) -> Jet {
        self.eval_jet(&cj.mu)
    }
    fn name(&self) -> String {
        match self.seed {
            Some(s) => format!("poly:deg={},seed={s}", self.degree),
            None => format!("poly:deg={}", self.degree),
        }
    }
}

/// `p₀(x) + t p₁(x) + t² p₂(x)` for random ambient polynomials `pₖ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimePoly {
    pub parts: [AmbientPoly; 3],
    pub seed: u64,
}

impl SpaceTimePoly {
    pub fn seeded(degree: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            parts: [
                AmbientPoly::random(degree, &mut rng),
                AmbientPoly::random(degree, &mut rng),
                AmbientPoly::random(degree, &mut rng),
            ],
            seed,
        }
    }

    pub fn eval(&self, x: &V3, t: f64) -> f64 {
        self.parts[0].eval(x) + t * (self.parts[1].eval(x) + t * self.parts[2].eval(x))
    }
}

impl ScalarField for SpaceTimePoly {
    fn jet(&self, cj: &ChartJets, t: f64) -> Jet {
        let [p0, p1, p2] = &self.parts;
        p0.eval_jet(&cj.mu) + (p1.eval_jet(&cj.mu) + p2.eval_jet(&cj.mu) * t) * t
    }
    fn name(&self) -> String {
        format!("stpoly:deg={},seed={}", self.parts[0].degree, self.seed)
    }
}

/// A scalar field given by a closure of position and time.
pub struct AmbientFn<F>(pub F, pub &'static str);

impl<F: Fn(&JV, f64) -> Jet + Send + Sync> ScalarField for AmbientFn<F> {
    fn jet(&self, cj: &ChartJets, t: f64) -> Jet {
        (self.0)(&cj.mu, t)
    }
    fn name(&self) -> String {
        self.1.into()
    }
}

/// `Σ aₘ sin(kₘ·x + φₘ)` with random wave vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigScalar {
    pub waves: Vec<(f64, V3, f64)>,
    pub seed: u64,
}

impl TrigScalar {
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waves = (0..3)
            .map(|_| {
                let k = V3::new(
                    rng.random_range(-1.5..=1.5),
                    rng.random_range(-1.5..=1.5),
                    rng.random_range(-1.5..=1.5),
                );
                (rng.random_range(-1.0..=1.0), k, rng.random_range(0.0..6.28))
            })
            .collect();
        Self { waves, seed }
    }
}

impl ScalarField for TrigScalar {
    fn jet(&self, cj: &ChartJets, _t: f64) -> Jet {
        let mut acc = Jet::constant(0.0);
        for (a, k, phase) in &self.waves {
            let arg = cj.mu[0] * k[0] + cj.mu[1] * k[1] + cj.mu[2] * k[2] + *phase;
            acc += arg.sin() * *a;
        }
        acc
    }
    fn name(&self) -> String {
        format!("trig:seed={}", self.seed)
    }
}

/// A constant scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstScalar(pub f64);

impl ScalarField for ConstScalar {
    fn jet(&self, _cj: &ChartJets, _t: f64) -> Jet {
        Jet::constant(self.0)
    }
    fn name(&self) -> String {
        format!("const:{}", self.0)
    }
}

/// Mean curvature `H` as a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanCurvature;

impl ScalarField for MeanCurvature {
    fn jet(&self, cj: &ChartJets, _t: f64) -> Jet {
        cj.mean_curvature()
    }
    fn depth(&self) -> i8 {
        2
    }
    fn name(&self) -> String {
        "H".into()
    }
}

/// Three independent ambient polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVector {
    pub comps: [AmbientPoly; 3],
    pub seed: u64,
}

impl PolyVector {
    pub fn seeded(degree: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            comps: [
                AmbientPoly::random(degree, &mut rng),
                AmbientPoly::random(degree, &mut rng),
                AmbientPoly::random(degree, &mut rng),
            ],
            seed,
        }
    }
}

impl VectorField for PolyVector {
    fn jet(&self, cj: &ChartJets, _t: f64) -> JV {
        JV::new(
            self.comps[0].eval_jet(&cj.mu),
            self.comps[1].eval_jet(&cj.mu),
            self.comps[2].eval_jet(&cj.mu),
        )
    }
    fn name(&self) -> String {
        format!("poly:deg={},seed={}", self.comps[0].degree, self.seed)
    }
}

/// `P_Γ F`, the tangential part of another field.
pub struct Projected<F>(pub F);

impl<F: VectorField> VectorField for Projected<F> {
    fn jet(&self, cj: &ChartJets, t: f64) -> JV {
        let v = self.0.jet(cj, t);
        v - cj.nu * dot(&cj.nu, &v)
    }
    fn depth(&self) -> i8 {
        self.0.depth().max(1)
    }
    fn name(&self) -> String {
        format!("t{}", self.0.name())
    }
    fn tangential(&self) -> bool {
        true
    }
}

/// Surface curl `ν × ∇_Γψ`; tangential and surface-divergence free.
pub struct SurfaceCurl<S>(pub S);

impl<S: ScalarField> VectorField for SurfaceCurl<S> {
    fn jet(&self, cj: &ChartJets, t: f64) -> JV {
        cross(&cj.nu, &cj.grad(&self.0.jet(cj, t)))
    }
    fn depth(&self) -> i8 {
        (self.0.depth() + 1).max(1)
    }
    fn name(&self) -> String {
        format!("curl[{}]", self.0.name())
    }
    fn tangential(&self) -> bool {
        true
    }
}

/// `g(H)` for a polynomial `g` without constant term.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvaturePoly {
    pub coeffs: Vec<f64>,
}

impl ScalarField for CurvaturePoly {
    fn jet(&self, cj: &ChartJets, _t: f64) -> Jet {
        let h = cj.mean_curvature();
        let mut acc = Jet::constant(0.0);
        for c in self.coeffs.iter().rev() {
            acc = (acc + *c) * h;
        }
        acc
    }
    fn depth(&self) -> i8 {
        2
    }
    fn name(&self) -> String {
        format!("g(H), deg {}", self.coeffs.len())
    }
}

/// Rigid rotation `ω a × x` about an axis through the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Killing {
    pub axis: V3,
    pub omega: f64,
}

impl VectorField for Killing {
    fn jet(&self, cj: &ChartJets, _t: f64) -> JV {
        let w = self.axis * self.omega;
        let x = &cj.mu;
        JV::new(
            x[2] * w[1] - x[1] * w[2],
            x[0] * w[2] - x[2] * w[0],
            x[1] * w[0] - x[0] * w[1],
        )
    }
    fn name(&self) -> String {
        format!("killing:axis=({},{},{}),omega={}", self.axis[0], self.axis[1], self.axis[2], self.omega)
    }
    fn tangential(&self) -> bool {
        true
    }
}

/// The outward normal `ν`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalField;

impl VectorField for NormalField {
    fn jet(&self, cj: &ChartJets, _t: f64) -> JV {
        cj.nu
    }
    fn depth(&self) -> i8 {
        1
    }
    fn name(&self) -> String {
        "normal".into()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroVector;

impl VectorField for ZeroVector {
    fn jet(&self, _cj: &ChartJets, _t: f64) -> JV {
        JV::zeros()
    }
    fn name(&self) -> String {
        "zero".into()
    }
    fn tangential(&self) -> bool {
        true
    }
}

/// Manufactured vector fields addressable by spec string.
///
/// * `poly:deg=3,seed=7`: ambient polynomial vector, not tangential
/// * `tpoly:deg=3,seed=7`: its tangential projection
/// * `curl:deg=3,seed=7`: surface curl of a random polynomial stream function
/// * `hcurl:deg=3,seed=7`: surface curl of a random polynomial in `H`
/// * `killing:axis=z`: unit-rate rotation about a coordinate axis
/// * `normal`, `zero`
pub fn parse_vector_field(spec: &str) -> Result<Box<dyn VectorField>> {
    let bad = |reason: &str| Error::Spec {
        spec: spec.into(),
        reason: reason.into(),
    };
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    if kind == "killing" {
        let axis = match rest.trim() {
            "axis=x" => V3::x(),
            "axis=y" => V3::y(),
            "axis=z" | "" => V3::z(),
            _ => return Err(bad("axis must be x, y or z")),
        };
        return Ok(Box::new(Killing { axis, omega: 1.0 }));
    }
    let (_, params) = crate::geometry::split_spec(spec)?;
    let deg = crate::geometry::lookup_or(&params, "deg", 3.0);
    let seed = crate::geometry::lookup_or(&params, "seed", 0.0);
    if !(0.0..=6.0).contains(&deg) || deg.fract() != 0.0 || seed < 0.0 || seed.fract() != 0.0 {
        return Err(bad("deg and seed must be small non-negative integers"));
    }
    let (deg, seed) = (deg as u32, seed as u64);
    Ok(match kind {
        "poly" => Box::new(PolyVector::seeded(deg, seed)),
        "tpoly" => Box::new(Projected(PolyVector::seeded(deg, seed))),
        "curl" => Box::new(SurfaceCurl(AmbientPoly::seeded(deg, seed))),
        "hcurl" => Box::new(SurfaceCurl(curvature_poly(deg, seed))),
        "normal" => Box::new(NormalField),
        "zero" => Box::new(ZeroVector),
        _ => return Err(bad("unknown field kind")),
    })
}

/// Random `g(H) = Σ cₖ Hᵏ`, `k = 1..=deg`.
pub fn curvature_poly(degree: u32, seed: u64) -> CurvaturePoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CurvaturePoly {
        coeffs: (0..degree.max(1))
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::jv_value;
    use approx::assert_relative_eq;

    #[test]
    fn seeded_fields_are_reproducible() {
        assert_eq!(AmbientPoly::seeded(3, 7), AmbientPoly::seeded(3, 7));
        assert_ne!(AmbientPoly::seeded(3, 7), AmbientPoly::seeded(3, 8));
        assert_eq!(AmbientPoly::seeded(3, 1).terms.len(), 20);
    }

    #[test]
    fn polynomial_jet_matches_direct_evaluation() {
        let s = ClosedSurface::torus(2.0, 0.5);
        let p = AmbientPoly::seeded(3, 11);
        let sp = SurfacePoint { patch: 0, s: [0.4, 2.0] };
        let cj = s.jets(sp, 2).unwrap();
        assert_relative_eq!(p.jet(&cj, 0.0).value(), p.eval(&s.chart_map(sp)), epsilon = 1e-13);
    }

    #[test]
    fn curl_and_projection_are_tangential() {
        let s = ClosedSurface::ellipsoid(1.0, 1.2, 0.8);
        let cj = s.jets(s.locate(&V3::new(0.3, 0.9, 0.2)), 3).unwrap();
        for spec in ["tpoly:deg=3,seed=2", "curl:deg=3,seed=2", "hcurl:deg=3,seed=2"] {
            let f = parse_vector_field(spec).unwrap();
            let v = jv_value(&f.jet(&cj, 0.0));
            assert!(v.dot(&cj.normal()).abs() < 1e-14, "{spec}");
            assert!(f.tangential());
        }
    }

    #[test]
    fn parses_field_specs() {
        for spec in ["poly:deg=3,seed=7", "curl:deg=3,seed=7", "killing:axis=z", "normal"] {
            assert!(parse_vector_field(spec).is_ok(), "{spec}");
        }
        assert!(parse_vector_field("killing:axis=w").is_err());
        assert!(parse_vector_field("wave:deg=2").is_err());
        assert!(parse_vector_field("poly:deg=2.5").is_err());
    }
}
