use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::{Rotation3, Unit};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::{JV, M3, V3};

use super::chart::ChartJets;

/// Analytic closed surfaces supported by the library, in body coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// Triaxial ellipsoid centred at the origin; a sphere when all axes agree.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Torus of revolution about the z axis.
    Torus { major: f64, minor: f64 },
}

impl Shape {
    pub fn sphere(radius: f64) -> Self {
        Shape::Ellipsoid {
            a: radius,
            b: radius,
            c: radius,
        }
    }

    pub fn euler_characteristic(&self) -> i32 {
        match self {
            Shape::Ellipsoid { .. } => 2,
            Shape::Torus { .. } => 0,
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            Shape::Ellipsoid { a, b, c } => {
                if [a, b, c].iter().all(|v| v.is_finite() && *v > 0.0) {
                    Ok(())
                } else {
                    Err("semi-axes must be positive".into())
                }
            }
            Shape::Torus { major, minor } => {
                if minor > 0.0 && major > minor && major.is_finite() {
                    Ok(())
                } else {
                    Err("torus needs 0 < r < R0".into())
                }
            }
        }
    }

    /// Canonical label, e.g. `sphere(R=1)`.
    pub fn label(&self) -> String {
        match *self {
            Shape::Ellipsoid { a, b, c } if a == b && b == c => format!("sphere(R={a})"),
            Shape::Ellipsoid { a, b, c } => format!("ellipsoid(a={a},b={b},c={c})"),
            Shape::Torus { major, minor } => format!("torus(R0={major},r={minor})"),
        }
    }

    /// Closed-form surface area where one exists.
    pub fn exact_area(&self) -> Option<f64> {
        match *self {
            Shape::Ellipsoid { a, b, c } if a == b && b == c => Some(4.0 * PI * a * a),
            Shape::Ellipsoid { .. } => None,
            Shape::Torus { major, minor } => Some(4.0 * PI * PI * major * minor),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Shape::Ellipsoid { a, b, c } => 2.0 * a.max(b).max(c),
            Shape::Torus { major, minor } => 2.0 * (major + minor),
        }
    }

    /// Parses `sphere:R=1`, `torus:R0=2,r=0.5` or `ellipsoid:a=1,b=1.2,c=0.8`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, params) = split_spec(spec)?;
        let get = |key: &str| lookup(spec, &params, key);
        let shape = match kind {
            "sphere" => Shape::sphere(get("R")?),
            "ellipsoid" => Shape::Ellipsoid {
                a: get("a")?,
                b: get("b")?,
                c: get("c")?,
            },
            "torus" => Shape::Torus {
                major: get("R0")?,
                minor: get("r")?,
            },
            other => {
                return Err(Error::Spec {
                    spec: spec.into(),
                    reason: format!("unknown surface kind `{other}`"),
                })
            }
        };
        shape.validate().map_err(|reason| Error::Spec {
            spec: spec.into(),
            reason,
        })?;
        Ok(shape)
    }
}

/// Splits `kind:k=v,k=v` into the kind and its key/value pairs.
pub(crate) fn split_spec(spec: &str) -> Result<(&str, Vec<(String, f64)>)> {
    let bad = |reason: String| Error::Spec {
        spec: spec.into(),
        reason,
    };
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k.trim(), r.trim()),
        None => (spec.trim(), ""),
    };
    let mut params = Vec::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| bad(format!("`{}` is not a number", v.trim())))?;
        params.push((k.trim().to_string(), v));
    }
    Ok((kind, params))
}

pub(crate) fn lookup(spec: &str, params: &[(String, f64)], key: &str) -> Result<f64> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Spec {
            spec: spec.into(),
            reason: format!("missing parameter `{key}`"),
        })
}

pub(crate) fn lookup_or(params: &[(String, f64)], key: &str, default: f64) -> f64 {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .unwrap_or(default)
}

/// Rectangle of chart coordinates with per-axis periodicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamDomain {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub periodic: [bool; 2],
}

impl ParamDomain {
    pub fn contains(&self, s: [f64; 2]) -> bool {
        (0..2).all(|i| self.periodic[i] || (s[i] > self.lo[i] && s[i] < self.hi[i]))
    }

    pub fn wrap(&self, mut s: [f64; 2]) -> [f64; 2] {
        for (i, si) in s.iter_mut().enumerate() {
            if self.periodic[i] {
                *si = self.lo[i] + (*si - self.lo[i]).rem_euclid(self.hi[i] - self.lo[i]);
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchKind {
    /// Spherical coordinates with the polar axis along body z.
    PolarZ,
    /// Spherical coordinates with the polar axis along body x.
    PolarX,
    Torus,
}

/// An analytic chart of a body-frame surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePatch {
    pub shape: Shape,
    pub kind: PatchKind,
    pub domain: ParamDomain,
    /// `+1` when `∂₁μ × ∂₂μ` points outward, `-1` otherwise.
    pub orientation: f64,
}

/// Chart point, second derivatives ordered (11, 12, 22).
pub type ChartDerivs = (V3, [V3; 2], [V3; 3]);

impl SurfacePatch {
    pub fn chart_map(&self, s: [f64; 2]) -> V3 {
        self.derivs(s).0
    }

    pub fn first_derivs(&self, s: [f64; 2]) -> [V3; 2] {
        self.derivs(s).1
    }

    pub fn second_derivs(&self, s: [f64; 2]) -> [V3; 3] {
        self.derivs(s).2
    }

    /// Point, first and second chart derivatives in closed form.
    pub fn derivs(&self, s: [f64; 2]) -> ChartDerivs {
        let (st, ct) = s[0].sin_cos();
        let (sp, cp) = s[1].sin_cos();
        match (self.shape, self.kind) {
            (Shape::Ellipsoid { a, b, c }, kind) => {
                let u = [st * cp, st * sp, ct];
                let ut = [ct * cp, ct * sp, -st];
                let up = [-st * sp, st * cp, 0.0];
                let utt = [-st * cp, -st * sp, -ct];
                let utp = [-ct * sp, ct * cp, 0.0];
                let upp = [-st * cp, -st * sp, 0.0];
                let place = |w: [f64; 3]| match kind {
                    PatchKind::PolarX => V3::new(a * w[2], b * w[0], c * w[1]),
                    _ => V3::new(a * w[0], b * w[1], c * w[2]),
                };
                (
                    place(u),
                    [place(ut), place(up)],
                    [place(utt), place(utp), place(upp)],
                )
            }
            (Shape::Torus { major, minor }, _) => {
                let w = major + minor * ct;
                (
                    V3::new(w * cp, w * sp, minor * st),
                    [
                        V3::new(-minor * st * cp, -minor * st * sp, minor * ct),
                        V3::new(-w * sp, w * cp, 0.0),
                    ],
                    [
                        V3::new(-minor * ct * cp, -minor * ct * sp, -minor * st),
                        V3::new(minor * st * sp, -minor * st * cp, 0.0),
                        V3::new(-w * cp, -w * sp, 0.0),
                    ],
                )
            }
        }
    }

    /// The chart map on jets, so derivatives of any order follow.
    pub fn map_jet(&self, s1: Jet, s2: Jet) -> JV {
        let (st, ct) = (s1.sin(), s1.cos());
        let (sp, cp) = (s2.sin(), s2.cos());
        match (self.shape, self.kind) {
            (Shape::Ellipsoid { a, b, c }, kind) => {
                let u = [st * cp, st * sp, ct];
                match kind {
                    PatchKind::PolarX => JV::new(u[2] * a, u[0] * b, u[1] * c),
                    _ => JV::new(u[0] * a, u[1] * b, u[2] * c),
                }
            }
            (Shape::Torus { major, minor }, _) => {
                let w = ct * minor + major;
                JV::new(w * cp, w * sp, st * minor)
            }
        }
    }

    /// How far the chart is from its coordinate singularities, in `[0, 1]`.
    pub fn quality(&self, s: [f64; 2]) -> f64 {
        match self.kind {
            PatchKind::Torus => 1.0,
            _ => s[0].sin().abs(),
        }
    }
}

/// `x ↦ shift + scale · R x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub rotation: M3,
    pub shift: V3,
}

impl Default for Similarity {
    fn default() -> Self {
        Self::identity()
    }
}

impl Similarity {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            rotation: M3::identity(),
            shift: V3::zeros(),
        }
    }

    pub fn rotation_about(axis: V3, angle: f64) -> M3 {
        *Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).matrix()
    }

    pub fn apply(&self, x: &V3) -> V3 {
        self.shift + self.rotation * x * self.scale
    }

    pub fn apply_inverse(&self, y: &V3) -> V3 {
        self.rotation.transpose() * (y - self.shift) / self.scale
    }

    pub fn apply_jet(&self, x: &JV) -> JV {
        let r = &self.rotation;
        let mut out = JV::zeros();
        for i in 0..3 {
            let mut acc = Jet::constant(self.shift[i]);
            for j in 0..3 {
                acc += x[j] * (self.scale * r[(i, j)]);
            }
            out[i] = acc;
        }
        out
    }
}

/// Coordinates of a surface point in one chart of the atlas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub patch: usize,
    pub s: [f64; 2],
}

pub(crate) struct Body {
    pub shape: Shape,
    pub patches: Vec<SurfacePatch>,
    /// Nearest-node seeds for the closest-point solve.
    pub grid: Vec<(SurfacePoint, V3)>,
    pub max_curvature: f64,
}

/// Default seed-grid resolution per patch axis.
pub const SEED_GRID: usize = 64;

impl Body {
    fn new(shape: Shape) -> Arc<Self> {
        let patches = match shape {
            Shape::Ellipsoid { .. } => {
                let domain = ParamDomain {
                    lo: [0.0, 0.0],
                    hi: [PI, TAU],
                    periodic: [false, true],
                };
                vec![
                    SurfacePatch {
                        shape,
                        kind: PatchKind::PolarZ,
                        domain,
                        orientation: 1.0,
                    },
                    SurfacePatch {
                        shape,
                        kind: PatchKind::PolarX,
                        domain,
                        orientation: 1.0,
                    },
                ]
            }
            Shape::Torus { .. } => vec![SurfacePatch {
                shape,
                kind: PatchKind::Torus,
                domain: ParamDomain {
                    lo: [0.0, 0.0],
                    hi: [TAU, TAU],
                    periodic: [true, true],
                },
                orientation: -1.0,
            }],
        };
        let mut grid = Vec::with_capacity(patches.len() * SEED_GRID * SEED_GRID);
        for (p, patch) in patches.iter().enumerate() {
            for i in 0..SEED_GRID {
                for j in 0..SEED_GRID {
                    let s = grid_coords(patch, i, j, SEED_GRID);
                    grid.push((SurfacePoint { patch: p, s }, patch.chart_map(s)));
                }
            }
        }
        let mut body = Body {
            shape,
            patches,
            grid,
            max_curvature: 0.0,
        };
        body.max_curvature = body.sample_max_curvature(48);
        Arc::new(body)
    }

    /// Largest principal curvature magnitude over a chart grid.
    fn sample_max_curvature(&self, n: usize) -> f64 {
        let mut kmax: f64 = 0.0;
        for (p, patch) in self.patches.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let s = grid_coords(patch, i, j, n);
                    if patch.quality(s) < 0.5 {
                        continue;
                    }
                    let cj = ChartJets::on_patch(patch, &Similarity::identity(), p, s, 2)
                        .expect("seed grid avoids degenerate chart points");
                    let g = cj.geometry();
                    kmax = kmax.max(g.kappa[0].abs()).max(g.kappa[1].abs());
                }
            }
        }
        kmax
    }

    pub fn locate(&self, x: &V3) -> SurfacePoint {
        match self.shape {
            Shape::Ellipsoid { a, b, c } => {
                let u = V3::new(x[0] / a, x[1] / b, x[2] / c).normalize();
                let sin_z = u[0].hypot(u[1]);
                let sin_x = u[1].hypot(u[2]);
                if sin_z >= sin_x {
                    SurfacePoint {
                        patch: 0,
                        s: [sin_z.atan2(u[2]), u[1].atan2(u[0]).rem_euclid(TAU)],
                    }
                } else {
                    SurfacePoint {
                        patch: 1,
                        s: [sin_x.atan2(u[0]), u[2].atan2(u[1]).rem_euclid(TAU)],
                    }
                }
            }
            Shape::Torus { major, .. } => {
                let phi = x[1].atan2(x[0]).rem_euclid(TAU);
                let rho = x[0].hypot(x[1]) - major;
                SurfacePoint {
                    patch: 0,
                    s: [x[2].atan2(rho).rem_euclid(TAU), phi],
                }
            }
        }
    }
}

/// Node `(i, j)` of an `n × n` grid over a patch, avoiding the poles.
pub(crate) fn grid_coords(patch: &SurfacePatch, i: usize, j: usize, n: usize) -> [f64; 2] {
    let d = &patch.domain;
    let t = |k: usize, axis: usize| {
        let frac = if d.periodic[axis] {
            k as f64 / n as f64
        } else {
            (k as f64 + 0.5) / n as f64
        };
        d.lo[axis] + frac * (d.hi[axis] - d.lo[axis])
    };
    [t(i, 0), t(j, 1)]
}

/// A closed surface: an analytic atlas in body coordinates placed in space by a
/// similarity transform.
#[derive(Clone)]
pub struct ClosedSurface {
    pub(crate) body: Arc<Body>,
    pub transform: Similarity,
    pub label: String,
}

impl fmt::Debug for ClosedSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedSurface")
            .field("label", &self.label)
            .field("transform", &self.transform)
            .finish()
    }
}

impl ClosedSurface {
    pub fn new(shape: Shape) -> Self {
        Self {
            body: Body::new(shape),
            label: shape.label(),
            transform: Similarity::identity(),
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        Ok(Self::new(Shape::parse(spec)?))
    }

    pub fn sphere(radius: f64) -> Self {
        Self::new(Shape::sphere(radius))
    }

    pub fn torus(major: f64, minor: f64) -> Self {
        Self::new(Shape::Torus { major, minor })
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        Self::new(Shape::Ellipsoid { a, b, c })
    }

    /// The same surface moved by `transform`; shares the body atlas.
    pub fn transformed(&self, transform: Similarity) -> Self {
        Self {
            body: Arc::clone(&self.body),
            transform,
            label: self.label.clone(),
        }
    }

    pub fn shape(&self) -> Shape {
        self.body.shape
    }

    pub fn patches(&self) -> &[SurfacePatch] {
        &self.body.patches
    }

    pub fn euler_characteristic(&self) -> i32 {
        self.body.shape.euler_characteristic()
    }

    /// Reach estimate `1 / max|κ|` from curvature sampling.
    pub fn reach(&self) -> f64 {
        self.transform.scale / self.body.max_curvature
    }

    /// Largest admissible shell half-width.
    pub fn eps_max(&self) -> f64 {
        0.4 * self.reach()
    }

    pub fn diameter(&self) -> f64 {
        self.transform.scale * self.body.shape.diameter()
    }

    pub fn chart_map(&self, p: SurfacePoint) -> V3 {
        self.transform
            .apply(&self.body.patches[p.patch].chart_map(p.s))
    }

    /// Best-conditioned chart coordinates of a point on (or near) the surface.
    pub fn locate(&self, y: &V3) -> SurfacePoint {
        self.body.locate(&self.transform.apply_inverse(y))
    }

    /// Re-expresses a chart point in the best-conditioned chart.
    pub fn recharted(&self, p: SurfacePoint) -> SurfacePoint {
        if self.body.patches[p.patch].quality(p.s) >= 0.7 {
            p
        } else {
            self.body.locate(&self.body.patches[p.patch].chart_map(p.s))
        }
    }

    /// `n` pseudo-random surface points in their best-conditioned charts.
    ///
    /// Ellipsoids are sampled through the unit sphere (uniform in `cos θ` and
    /// `φ`), tori uniformly in both angles.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<SurfacePoint> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| match self.body.shape {
                Shape::Ellipsoid { a, b, c } => {
                    let z: f64 = rng.random_range(-1.0..=1.0);
                    let phi: f64 = rng.random_range(0.0..TAU);
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    self.body
                        .locate(&V3::new(a * r * phi.cos(), b * r * phi.sin(), c * z))
                }
                Shape::Torus { .. } => SurfacePoint {
                    patch: 0,
                    s: [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)],
                },
            })
            .collect()
    }

    pub fn jets(&self, p: SurfacePoint, order: i8) -> Result<ChartJets> {
        ChartJets::on_patch(
            &self.body.patches[p.patch],
            &self.transform,
            p.patch,
            p.s,
            order,
        )
    }

    pub fn eval_geometry(&self, p: SurfacePoint) -> Result<super::GeometryEval> {
        Ok(self.jets(p, 2)?.geometry())
    }

    pub fn geometry_at(&self, y: &V3) -> Result<super::GeometryEval> {
        self.eval_geometry(self.locate(y))
    }
}
