//! Task lists for each suite. A task evaluates one or more catalog checks and
//! is built serially, so the record order is fixed by the config alone.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use super::catalog::{lookup, CheckInfo};
use super::config::{CampaignConfig, Suite};
use crate::convergence::{ResidualReport, Verdict};
use crate::energy::{self, EnergyOptions, DEFECT_FLOOR};
use crate::error::{Error, Result};
use crate::expansion::{
    first_order_continuity, first_order_velocity_defect, matrix_divergence_defect, normal_pressure_consistency,
    PolyMatrix, Scenario,
};
use crate::geometry::{ClosedSurface, SurfacePoint};
use crate::motion::{Motion, MovingSurface, Transport};
use crate::quadrature::SurfaceRule;
use crate::tancalc::fields::{curvature_poly, AmbientPoly, PolyVector, Projected, SpaceTimePoly, SurfaceCurl, VectorField};
use crate::tancalc::{extension_defect, Differenced, FieldCase, Identity, Intrinsic, Route};
use crate::{M3, V3};

/// Offset step of the closest-point Jacobian.
const JACOBIAN_STEP: f64 = 1e-5;
/// Time step of pointwise limit residuals and kinematic differences.
const POINT_DT: f64 = 1e-4;
/// Round-off floor of residuals built from differenced closest points.
const NEWTON_FLOOR: f64 = 1e-8;
const CALIBRATION_BUMP: f64 = 0.1;
const CALIBRATION_SPEC: &str = "negative:q1-bump=0.1";

type Job = Box<dyn Fn() -> Result<Vec<ResidualReport>> + Send + Sync>;

/// A unit of scheduled work producing one report per entry of `checks`.
pub struct Task {
    pub checks: Vec<&'static CheckInfo>,
    pub surface: String,
    pub seed: u64,
    pub negative: bool,
    pub params: Map<String, Value>,
    job: Job,
}

impl Task {
    fn new(ids: &[&str], surface: &str, seed: u64, job: Job) -> Self {
        let checks = ids
            .iter()
            .map(|id| lookup(id).unwrap_or_else(|| panic!("check `{id}` missing from the catalog")))
            .collect();
        Self {
            checks,
            surface: surface.to_string(),
            seed,
            negative: false,
            params: Map::new(),
            job,
        }
    }

    fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    fn negative(mut self) -> Self {
        self.negative = true;
        self
    }

    pub fn run(&self) -> Result<Vec<ResidualReport>> {
        let reports = (self.job)()?;
        if reports.len() != self.checks.len() {
            return Err(Error::Config(format!(
                "task produced {} reports for {} checks",
                reports.len(),
                self.checks.len()
            )));
        }
        Ok(reports)
    }
}

fn single<F>(f: F) -> Job
where
    F: Fn() -> Result<ResidualReport> + Send + Sync + 'static,
{
    Box::new(move || Ok(vec![f()?]))
}

/// Everything a task needs, shared across the task list.
struct Ctx {
    cfg: CampaignConfig,
}

impl Ctx {
    fn tol(&self, suite: Suite, key: &str) -> f64 {
        self.cfg.tolerance(suite, key)
    }

    fn energy_opts(&self) -> EnergyOptions {
        let r = &self.cfg.resolutions;
        EnergyOptions {
            surface_nodes: r.surface_nodes,
            normal_nodes: r.normal_nodes,
            dt: r.dt,
            certify_tol: self.tol(Suite::Limits, "limit_residual"),
        }
    }

    fn t_mid(&self) -> f64 {
        0.5 * self.cfg.resolutions.t_end
    }

    fn times(&self) -> Vec<f64> {
        let r = &self.cfg.resolutions;
        energy::time_grid(0.0, r.t_end, r.time_samples)
    }
}

fn with_t_end(mut ms: MovingSurface, t_end: f64) -> MovingSurface {
    ms.t_end = t_end;
    ms
}

fn field_seed(seed: u64, i: usize) -> u64 {
    seed * 1000 + i as u64
}

/// Builds the task list for `cfg`, which must already be validated.
pub fn build_tasks(cfg: &CampaignConfig) -> Result<Vec<Task>> {
    let ctx = Arc::new(Ctx { cfg: cfg.clone() });
    let mut moving = Vec::new();
    let mut bodies: Vec<(String, ClosedSurface)> = Vec::new();
    for spec in &cfg.surfaces {
        let ms = MovingSurface::parse(spec)?;
        let label = ms.base.label.clone();
        if !bodies.iter().any(|(l, _)| *l == label) {
            bodies.push((label, ms.base));
        }
        moving.push(spec.clone());
    }
    let mut tasks = Vec::new();
    for &seed in &cfg.seeds {
        for &suite in &Suite::ALL {
            if !cfg.has_suite(suite) {
                continue;
            }
            match suite {
                Suite::Geometry => bodies.iter().for_each(|b| geometry(&ctx, b, seed, &mut tasks)),
                Suite::Operators => bodies.iter().for_each(|b| operators(&ctx, b, seed, &mut tasks)),
                Suite::Quadrature => {
                    bodies.iter().for_each(|b| quadrature(&ctx, b, seed, &mut tasks));
                    if let Some(b) = bodies.first() {
                        determinism(&ctx, b, seed, &mut tasks);
                    }
                }
                Suite::Limits => {
                    bodies.iter().for_each(|b| boundary(&ctx, b, seed, &mut tasks));
                    for spec in &cfg.scenarios {
                        limits(&ctx, spec, seed, &mut tasks)?;
                    }
                    calibration(&ctx, seed, &mut tasks);
                }
                Suite::Energy => {
                    for spec in &cfg.scenarios {
                        energy(&ctx, spec, seed, &mut tasks)?;
                    }
                    for spec in &moving {
                        leibniz(&ctx, spec, seed, &mut tasks)?;
                    }
                }
                Suite::Kinematics => {
                    for spec in &moving {
                        kinematics(&ctx, spec, seed, &mut tasks)?;
                    }
                }
            }
        }
    }
    Ok(tasks)
}

fn geometry(ctx: &Arc<Ctx>, (label, surf): &(String, ClosedSurface), seed: u64, out: &mut Vec<Task>) {
    let r = &ctx.cfg.resolutions;
    let tol = ctx.tol(Suite::Geometry, "invariants");

    let (c, l, n) = (ctx.clone(), surf.clone(), r.geometry_points);
    out.push(
        Task::new(
            &["weingarten_invariants", "shell_jacobian"],
            label,
            seed,
            Box::new(move || {
                let s = l.clone();
                let widths = &c.cfg.resolutions.widths;
                let mut inv = Vec::with_capacity(n);
                let mut jac = Vec::with_capacity(n * widths.len());
                for p in s.sample_points(n, seed) {
                    let g = s.eval_geometry(p)?;
                    inv.push(g.invariant_defect());
                    for &rho in widths {
                        let det = (M3::identity() - g.shape_operator * rho).determinant();
                        let j = g.jacobian(rho);
                        jac.push((det - j).abs().max((j - g.jacobian_expanded(rho)).abs()));
                    }
                }
                Ok(vec![
                    ResidualReport::bounded("geometry invariants", inv, tol),
                    ResidualReport::bounded("shell jacobian", jac, tol),
                ])
            }),
        )
        .param("points", n),
    );

    let (c, l, n) = (ctx.clone(), surf.clone(), r.tubular_points);
    out.push(
        Task::new(
            &["distance_hessian"],
            label,
            seed,
            single(move || {
                let s = l.clone();
                let pts = tubular_points(&s, n, seed, 0.5)?;
                let steps = c.cfg.resolutions.hessian_steps.clone();
                let mut worst = vec![0.0f64; steps.len()];
                for x in &pts {
                    let exact = s.distance_hessian_exact(x)?;
                    for (w, &h) in worst.iter_mut().zip(&steps) {
                        *w = w.max((s.distance_hessian(x, h)? - exact).amax());
                    }
                }
                Ok(ResidualReport::order(
                    "distance hessian",
                    steps,
                    worst,
                    2.0,
                    c.tol(Suite::Geometry, "min_slope"),
                    c.tol(Suite::Geometry, "fd_floor"),
                ))
            }),
        )
        .param("points", n),
    );

    let (c, l, n) = (ctx.clone(), surf.clone(), r.tubular_points);
    out.push(
        Task::new(
            &["closest_point_gradient"],
            label,
            seed,
            single(move || {
                let s = l.clone();
                let widths = c.cfg.resolutions.widths.clone();
                let mut worst = vec![0.0f64; widths.len()];
                for p in s.sample_points(n, seed) {
                    let g = s.eval_geometry(p)?;
                    for (w, &d) in worst.iter_mut().zip(&widths) {
                        let x = g.point + g.normal * d;
                        let jac = s.closest_point_jacobian(&x, JACOBIAN_STEP)?;
                        *w = w.max((jac - (g.proj + g.shape_operator * d)).amax());
                    }
                }
                Ok(ResidualReport::order(
                    "closest-point gradient",
                    widths,
                    worst,
                    2.0,
                    c.tol(Suite::Geometry, "min_slope"),
                    c.tol(Suite::Geometry, "fd_floor"),
                ))
            }),
        )
        .param("points", n)
        .param("step", JACOBIAN_STEP),
    );
}

/// `n` points `y + dν` with `d` uniform in `±fraction·ε_max`.
fn tubular_points(s: &ClosedSurface, n: usize, seed: u64, fraction: f64) -> Result<Vec<V3>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7475_6275);
    let reach = fraction * s.eps_max();
    s.sample_points(n, seed)
        .into_iter()
        .map(|p| {
            let g = s.eval_geometry(p)?;
            Ok(g.point + g.normal * rng.random_range(-reach..reach))
        })
        .collect()
}

fn operators(ctx: &Arc<Ctx>, (label, surf): &(String, ClosedSurface), seed: u64, out: &mut Vec<Task>) {
    let r = &ctx.cfg.resolutions;
    for identity in Identity::ALL {
        let id = identity.id();
        let (c, l) = (ctx.clone(), surf.clone());
        out.push(
            Task::new(
                &[id],
                label,
                seed,
                single(move || {
                    let s = l.clone();
                    let r = &c.cfg.resolutions;
                    let pts = s.sample_points(r.identity_points, seed);
                    let mut rel = Vec::new();
                    for i in 0..r.field_cases {
                        let case = FieldCase::manufactured_on(field_seed(seed, i), &s);
                        for &p in &pts {
                            let res = identity.evaluate(&Intrinsic, &s, &case, p, 0.0)?;
                            rel.push(res.residual / res.scale);
                        }
                    }
                    Ok(ResidualReport::bounded(id, rel, c.tol(Suite::Operators, "intrinsic")))
                }),
            )
            .param("route", "intrinsic")
            .param("field_cases", r.field_cases)
            .param("points", r.identity_points),
        );

        let (c, l) = (ctx.clone(), surf.clone());
        out.push(
            Task::new(
                &[id],
                label,
                seed,
                single(move || {
                    let s = l.clone();
                    let r = &c.cfg.resolutions;
                    let pts = s.sample_points(r.identity_points, seed);
                    let cases: Vec<FieldCase> =
                        (0..r.field_cases).map(|i| FieldCase::manufactured_on(field_seed(seed, i), &s)).collect();
                    let mut worst = vec![0.0f64; r.fd_steps.len()];
                    for (w, &h) in worst.iter_mut().zip(&r.fd_steps) {
                        let route: &dyn Route = &Differenced { h };
                        for case in &cases {
                            for &p in &pts {
                                let res = identity.evaluate(route, &s, case, p, 0.0)?;
                                *w = w.max(res.residual / res.scale);
                            }
                        }
                    }
                    Ok(ResidualReport::order(
                        id,
                        r.fd_steps.clone(),
                        worst,
                        2.0,
                        c.tol(Suite::Operators, "min_slope"),
                        c.tol(Suite::Operators, "fd_floor"),
                    ))
                }),
            )
            .param("route", "differenced")
            .param("field_cases", r.field_cases)
            .param("points", r.identity_points),
        );
    }

    let (c, l) = (ctx.clone(), surf.clone());
    out.push(
        Task::new(
            &["extension_independence"],
            label,
            seed,
            single(move || {
                let s = l.clone();
                let r = &c.cfg.resolutions;
                let pts = s.sample_points(r.identity_points, seed);
                let f = AmbientPoly::seeded(3, field_seed(seed, 0));
                let g = AmbientPoly::seeded(3, field_seed(seed, 1));
                let gaps = r
                    .fd_steps
                    .iter()
                    .map(|&h| extension_defect(&s, &f, &g, &pts, h))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(ResidualReport::order(
                    "extension independence",
                    r.fd_steps.clone(),
                    gaps,
                    2.0,
                    c.tol(Suite::Operators, "min_slope"),
                    c.tol(Suite::Operators, "fd_floor"),
                ))
            }),
        )
        .param("points", r.identity_points),
    );
}

fn rule(ctx: &Ctx, s: &ClosedSurface) -> Result<SurfaceRule> {
    let r = &ctx.cfg.resolutions;
    SurfaceRule::new(s, r.surface_nodes, r.normal_nodes)
}

fn quadrature(ctx: &Arc<Ctx>, (label, surf): &(String, ClosedSurface), seed: u64, out: &mut Vec<Task>) {
    let r = &ctx.cfg.resolutions;
    let (c, l) = (ctx.clone(), surf.clone());
    out.push(
        Task::new(
            &[
                "surface_area",
                "gauss_bonnet",
                "shell_volume",
                "shell_volume_expansion",
                "measure_transform",
                "stokes_integral",
            ],
            label,
            seed,
            Box::new(move || {
                let s = l.clone();
                let q = rule(&c, &s)?;
                let tol = |k: &str| c.tol(Suite::Quadrature, k);
                let widths = &c.cfg.resolutions.widths;
                let exact_area = s.shape().exact_area();
                let chi = s.euler_characteristic() as f64;

                let area = match exact_area {
                    Some(a) => ResidualReport::bounded("area", vec![(q.area() - a) / a], tol("area_rel")),
                    None => ResidualReport::skipped("area", "no closed-form area"),
                };
                let gb = q.gauss_bonnet();
                let gauss = ResidualReport::bounded("gauss-bonnet", vec![gb.defect], tol("gauss_bonnet"))
                    .with_note(format!("integral {:.12e}, expected {:.12e}", gb.integral, gb.expected));

                let volumes = widths.iter().map(|&e| q.shell_volume(e)).collect::<Result<Vec<f64>>>()?;
                let volume = match exact_area {
                    Some(a) => {
                        let rel = widths
                            .iter()
                            .zip(&volumes)
                            .map(|(&e, v)| {
                                let exact = 2.0 * e * a + 4.0 * std::f64::consts::PI / 3.0 * chi * e.powi(3);
                                (v - exact) / exact
                            })
                            .collect();
                        ResidualReport::bounded("shell volume", rel, tol("volume_rel"))
                    }
                    None => ResidualReport::skipped("shell volume", "no closed-form area"),
                };
                let expansion = widths
                    .iter()
                    .zip(&volumes)
                    .map(|(&e, v)| (v - q.shell_volume_expansion(e)) / v)
                    .collect();
                let expansion = ResidualReport::bounded("shell volume expansion", expansion, tol("volume_rel"));

                let f = AmbientPoly::seeded(3, field_seed(seed, 0));
                let transform = widths
                    .iter()
                    .map(|&rho| q.measure_transform_defect(rho, |x| f.eval(x)))
                    .collect::<Result<Vec<f64>>>()?;
                let transform = ResidualReport::bounded("measure transform", transform, tol("measure_transform"));

                let fields: [Box<dyn VectorField>; 2] = [
                    Box::new(Projected(PolyVector::seeded(3, field_seed(seed, 1)))),
                    Box::new(SurfaceCurl(AmbientPoly::seeded(3, field_seed(seed, 2)))),
                ];
                let stokes = fields
                    .iter()
                    .map(|x| q.stokes_integral(x.as_ref(), 0.0))
                    .collect::<Result<Vec<f64>>>()?;
                let stokes = ResidualReport::bounded("stokes", stokes, tol("stokes"));
                Ok(vec![area, gauss, volume, expansion, transform, stokes])
            }),
        )
        .param("surface_nodes", r.surface_nodes)
        .param("normal_nodes", r.normal_nodes),
    );
}

fn determinism(ctx: &Arc<Ctx>, (label, surf): &(String, ClosedSurface), seed: u64, out: &mut Vec<Task>) {
    let (c, l) = (ctx.clone(), surf.clone());
    out.push(Task::new(
        &["campaign_determinism"],
        label,
        seed,
        single(move || {
            let s = l.clone();
            let f = AmbientPoly::seeded(3, field_seed(seed, 0));
            let eval = || -> Result<f64> { rule(&c, &s)?.integrate(|n| Ok(f.eval(&n.geo.point))) };
            let (a, b) = (eval()?, eval()?);
            let same = a.to_bits() == b.to_bits();
            Ok(ResidualReport::bounded("determinism", vec![(a - b).abs()], 0.0)
                .with_note(if same { "bit-identical" } else { "results differ" }))
        }),
    ));
}

/// Stationary checks of the first-order boundary structure on a body surface.
fn boundary(ctx: &Arc<Ctx>, (label, surf): &(String, ClosedSurface), seed: u64, out: &mut Vec<Task>) {
    let r = &ctx.cfg.resolutions;
    let n = r.limit_points;
    let (c, l) = (ctx.clone(), surf.clone());
    out.push(
        Task::new(
            &[
                "boundary_strain_audit",
                "first_order_continuity",
                "first_order_velocity",
                "normal_pressure",
            ],
            label,
            seed,
            Box::new(move || {
                let s = l.clone();
                let tol = c.tol(Suite::Limits, "boundary");
                let pts = s.sample_points(n, seed);
                let k = field_seed(seed, 0);
                let curl = move || Box::new(SurfaceCurl(curvature_poly(3, k))) as Box<dyn VectorField>;
                let generic = move || Box::new(Projected(PolyVector::seeded(2, k))) as Box<dyn VectorField>;
                let mut strain = Vec::new();
                for make in [&curl as &dyn Fn() -> Box<dyn VectorField>, &generic] {
                    let sc = Scenario::kinematic(s.clone(), make, 1.0);
                    for &p in &pts {
                        strain.push(sc.bulk.strain_audit(p, 0.0)?.max());
                    }
                }
                let mut continuity = Vec::new();
                let mut velocity = Vec::new();
                let mut pressure = Vec::new();
                let v = curl();
                let w = Projected(PolyVector::seeded(3, k));
                for &p in &pts {
                    continuity.extend(first_order_continuity(&s, v.as_ref(), p, 0.0)?);
                    velocity.extend(first_order_velocity_defect(&s, v.as_ref(), p, 0.0)?);
                    pressure.push(normal_pressure_consistency(&s, &w, 0.7, p)?);
                }
                Ok(vec![
                    ResidualReport::bounded("boundary strain", strain, tol),
                    ResidualReport::bounded("first-order continuity", continuity, tol),
                    ResidualReport::bounded("first-order velocity", velocity, tol),
                    ResidualReport::bounded("normal pressure", pressure, tol),
                ])
            }),
        )
        .param("points", n),
    );

    let (c, l) = (ctx.clone(), surf.clone());
    out.push(
        Task::new(
            &["navier_conditions"],
            label,
            seed,
            single(move || {
                let s = l.clone();
                let r = &c.cfg.resolutions;
                let k = field_seed(seed, 0);
                let field = move || Box::new(Projected(PolyVector::seeded(2, k))) as Box<dyn VectorField>;
                let sc = Scenario::kinematic(s.clone(), field, 1.0);
                navier_sweep(&c, &sc, &s.sample_points(r.limit_points, seed), 0.0)
            }),
        )
        .param("flow", "kinematic")
        .param("points", n),
    );

    let (c, l) = (ctx.clone(), surf.clone());
    out.push(
        Task::new(
            &["matrix_divergence"],
            label,
            seed,
            single(move || {
                let s = l.clone();
                let r = &c.cfg.resolutions;
                let s0 = PolyMatrix::seeded(2, field_seed(seed, 0));
                let s1 = PolyMatrix::seeded(2, field_seed(seed, 1));
                let mut worst = vec![0.0f64; r.widths.len()];
                for p in s.sample_points(r.limit_points, seed) {
                    let g = s.eval_geometry(p)?;
                    for (w, &d) in worst.iter_mut().zip(&r.widths) {
                        let x = g.point + g.normal * d;
                        *w = w.max(matrix_divergence_defect(&s, &s0, &s1, &x, JACOBIAN_STEP)?);
                    }
                }
                Ok(ResidualReport::order(
                    "matrix divergence",
                    r.widths.clone(),
                    worst,
                    1.0,
                    c.tol(Suite::Limits, "bulk_min_slope"),
                    NEWTON_FLOOR,
                ))
            }),
        )
        .param("points", n),
    );
}

fn navier_sweep(ctx: &Ctx, sc: &Scenario, pts: &[SurfacePoint], t: f64) -> Result<ResidualReport> {
    let widths = ctx.cfg.resolutions.widths.clone();
    let defects = widths
        .iter()
        .map(|&e| Ok(sc.navier_defects(e, pts, t)?.into_iter().fold(0.0, f64::max)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ResidualReport::order(
        "navier conditions",
        widths,
        defects,
        2.0,
        ctx.tol(Suite::Limits, "navier_min_slope"),
        1e-7,
    ))
}

fn scenario(ctx: &Ctx, spec: &str) -> Result<Scenario> {
    let mut sc = Scenario::parse(spec)?;
    sc.bulk.ms.t_end = ctx.cfg.resolutions.t_end;
    Ok(sc)
}

fn limits(ctx: &Arc<Ctx>, spec: &str, seed: u64, out: &mut Vec<Task>) -> Result<()> {
    let probe = Scenario::parse(spec)?;
    let negative = probe.q1_bump != 0.0;
    let n = ctx.cfg.resolutions.limit_points;

    if probe.certified || negative {
        let (c, sp) = (ctx.clone(), spec.to_string());
        let task = Task::new(
            &["limit_equations"],
            spec,
            seed,
            single(move || {
                let sc = scenario(&c, &sp)?;
                let pts = sc.bulk.ms.base.sample_points(n, seed);
                let mut norms = Vec::new();
                for t in c.times() {
                    for &p in &pts {
                        norms.push(sc.bulk.limit_residual(p, t, POINT_DT)?.norm());
                    }
                }
                Ok(ResidualReport::bounded("limit residual", norms, c.tol(Suite::Limits, "limit_residual")))
            }),
        )
        .param("points", n)
        .param("time_samples", ctx.cfg.resolutions.time_samples);
        out.push(if negative { task.negative() } else { task });

        let (c, sp) = (ctx.clone(), spec.to_string());
        let task = Task::new(
            &["bulk_residual_order"],
            spec,
            seed,
            single(move || {
                let sc = scenario(&c, &sp)?;
                let pts = sc.bulk.ms.base.sample_points(n, seed);
                let widths = c.cfg.resolutions.widths.clone();
                let t = c.t_mid();
                let sup = widths
                    .iter()
                    .map(|&e| sc.bulk_residual_sup(e, &pts, t))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(ResidualReport::order(
                    "bulk residual",
                    widths,
                    sup,
                    1.0,
                    c.tol(Suite::Limits, "bulk_min_slope"),
                    1e-9,
                ))
            }),
        )
        .param("points", n)
        .param("t", ctx.t_mid());
        out.push(if negative { task.negative() } else { task });
    }
    if negative {
        // a pressure bump leaves the velocity and its boundary conditions intact
        return Ok(());
    }

    let (c, sp) = (ctx.clone(), spec.to_string());
    out.push(
        Task::new(
            &["navier_conditions"],
            spec,
            seed,
            single(move || {
                let sc = scenario(&c, &sp)?;
                let pts = sc.bulk.ms.base.sample_points(n, seed);
                navier_sweep(&c, &sc, &pts, c.t_mid())
            }),
        )
        .param("flow", "scenario")
        .param("points", n)
        .param("t", ctx.t_mid()),
    );
    Ok(())
}

fn calibration(ctx: &Arc<Ctx>, seed: u64, out: &mut Vec<Task>) {
    let c = ctx.clone();
    let n = ctx.cfg.resolutions.limit_points;
    out.push(
        Task::new(
            &["normal_residual_calibration"],
            CALIBRATION_SPEC,
            seed,
            single(move || {
                let sc = scenario(&c, CALIBRATION_SPEC)?;
                let pts = sc.bulk.ms.base.sample_points(n, seed);
                let rel = c.tol(Suite::Limits, "calibration_rel");
                let gaps = sc
                    .surface_normal_residual(&pts, 0.0)?
                    .into_iter()
                    .map(|r| r - CALIBRATION_BUMP)
                    .collect();
                Ok(ResidualReport::bounded("normal residual calibration", gaps, rel * CALIBRATION_BUMP)
                    .with_note(format!("q1 bump {CALIBRATION_BUMP} must appear as the normal residual")))
            }),
        )
        .param("bump", CALIBRATION_BUMP)
        .param("points", n),
    );
}

fn energy(ctx: &Arc<Ctx>, spec: &str, seed: u64, out: &mut Vec<Task>) -> Result<()> {
    let probe = Scenario::parse(spec)?;
    if probe.q1_bump != 0.0 {
        return Ok(());
    }
    let stationary = probe.bulk.ms.motion == Motion::Stationary;
    let viscous = probe.bulk.mode.viscosity() > 0.0;

    if probe.certified {
        let (c, sp) = (ctx.clone(), spec.to_string());
        let check_killing = stationary && viscous;
        let ids: &[&str] = if check_killing {
            &["surface_energy_balance", "killing_dissipation"]
        } else {
            &["surface_energy_balance"]
        };
        out.push(
            Task::new(
                ids,
                spec,
                seed,
                Box::new(move || {
                    let sc = scenario(&c, &sp)?;
                    let ledger = energy::surface_energy_balance(&sc.bulk, &c.times(), &c.energy_opts())?;
                    let mut reports = vec![ResidualReport::bounded(
                        "surface energy balance",
                        ledger.defect.clone(),
                        c.tol(Suite::Energy, "surface_balance"),
                    )];
                    if check_killing {
                        let dissipation = ledger.term("dissipation").unwrap_or(&[f64::NAN]).to_vec();
                        let drift = ledger.kinetic_drift();
                        let drift_tol = c.tol(Suite::Energy, "kinetic_drift");
                        let mut r = ResidualReport::bounded("killing dissipation", dissipation, c.tol(Suite::Energy, "dissipation"))
                            .with_note(format!("kinetic energy drift {drift:.3e} (bound {drift_tol:.1e})"));
                        r.verdict = r.verdict.and(Verdict::from_bool(drift <= drift_tol));
                        reports.push(r);
                    }
                    Ok(reports)
                }),
            )
            .param("time_samples", ctx.cfg.resolutions.time_samples)
            .param("t_end", ctx.cfg.resolutions.t_end),
        );

        let (c, sp) = (ctx.clone(), spec.to_string());
        out.push(
            Task::new(
                &["bulk_energy_identity"],
                spec,
                seed,
                single(move || {
                    let sc = scenario(&c, &sp)?;
                    let widths = &c.cfg.resolutions.widths;
                    let r = energy::bulk_identity_sweep(&sc.bulk, widths, c.t_mid(), &c.energy_opts())?;
                    Ok(ResidualReport::order(
                        &r.label,
                        r.sweep,
                        r.sweep_residuals,
                        2.0,
                        c.tol(Suite::Energy, "bulk_min_slope"),
                        DEFECT_FLOOR,
                    ))
                }),
            )
            .param("t", ctx.t_mid()),
        );
    }

    let (c, sp) = (ctx.clone(), spec.to_string());
    out.push(
        Task::new(
            &["thin_width_kinetic", "thin_width_pressure", "thin_width_viscous", "thin_width_strain"],
            spec,
            seed,
            Box::new(move || {
                let sc = scenario(&c, &sp)?;
                let widths = &c.cfg.resolutions.widths;
                let min = c.tol(Suite::Energy, "thin_width_min_slope");
                Ok(energy::thin_width_limits(&sc.bulk, widths, c.t_mid(), &c.energy_opts())?
                    .into_iter()
                    .map(|r| ResidualReport::order(&r.label, r.sweep, r.sweep_residuals, 1.0, min, DEFECT_FLOOR))
                    .collect())
            }),
        )
        .param("t", ctx.t_mid())
        .param("certified", probe.certified),
    );

    let (c, sp) = (ctx.clone(), spec.to_string());
    out.push(
        Task::new(
            &["jacobian_difference", "stokes_dropped_terms", "frobenius_identity"],
            spec,
            seed,
            Box::new(move || {
                let sc = scenario(&c, &sp)?;
                let opts = c.energy_opts();
                let t = c.t_mid();
                let jac = c
                    .cfg
                    .resolutions
                    .widths
                    .iter()
                    .map(|&e| energy::jacobian_difference_defect(&sc.bulk, e, t, &opts))
                    .collect::<Result<Vec<f64>>>()?;
                let stokes = energy::divergence_theorem_terms(&sc.bulk, t, &opts)?.to_vec();
                let frob = energy::frobenius_defect(&sc.bulk, t, &opts)?;
                let stokes_tol = c.tol(Suite::Energy, "stokes");
                Ok(vec![
                    ResidualReport::bounded("jacobian difference", jac, stokes_tol),
                    ResidualReport::bounded("dropped divergence terms", stokes, stokes_tol),
                    ResidualReport::bounded("frobenius identity", vec![frob], c.tol(Suite::Energy, "pointwise")),
                ])
            }),
        )
        .param("t", ctx.t_mid()),
    );
    Ok(())
}

fn leibniz(ctx: &Arc<Ctx>, spec: &str, seed: u64, out: &mut Vec<Task>) -> Result<()> {
    if MovingSurface::parse(spec)?.motion == Motion::Stationary {
        return Ok(());
    }
    for i in 0..ctx.cfg.resolutions.space_time_fields {
        let (c, sp) = (ctx.clone(), spec.to_string());
        let k = field_seed(seed, i);
        out.push(
            Task::new(
                &["leibniz_rule"],
                spec,
                seed,
                single(move || {
                    let ms = with_t_end(MovingSurface::parse(&sp)?, c.cfg.resolutions.t_end);
                    let f = SpaceTimePoly::seeded(3, k);
                    let steps = &c.cfg.resolutions.dt_sweep;
                    let r = energy::leibniz_sweep(&ms, &f, c.t_mid(), steps, &c.energy_opts())?;
                    Ok(ResidualReport::order(
                        &r.label,
                        r.sweep,
                        r.sweep_residuals,
                        2.0,
                        c.tol(Suite::Energy, "leibniz_min_slope"),
                        r.floor,
                    ))
                }),
            )
            .param("field", k)
            .param("t", ctx.t_mid()),
        );
    }
    Ok(())
}

fn kinematics(ctx: &Arc<Ctx>, spec: &str, seed: u64, out: &mut Vec<Task>) -> Result<()> {
    let ms = MovingSurface::parse(spec)?;
    let rigid = ms.motion.is_rigid();
    let breathing = matches!(ms.motion, Motion::Breathe { .. });
    let width = ctx.cfg.resolutions.widths[0];
    let mut ids = vec!["gauss_curvature_constancy", "area_divergence"];
    if rigid {
        ids.extend(["area_preservation", "shell_volume_constancy"]);
    }
    if breathing {
        ids.push("breathing_area_rate");
    }

    let (c, sp) = (ctx.clone(), spec.to_string());
    out.push(
        Task::new(
            &ids,
            spec,
            seed,
            Box::new(move || {
                let ms = with_t_end(MovingSurface::parse(&sp)?, c.cfg.resolutions.t_end);
                let audit = energy::kinematic_audit(&ms, &c.times(), width, &c.energy_opts())?;
                let tol = |k: &str| c.tol(Suite::Kinematics, k);
                let drift = |xs: &[f64]| xs.iter().map(|x| x - xs[0]).collect::<Vec<f64>>();
                let gaps = audit
                    .area_rate
                    .iter()
                    .zip(&audit.divergence_integral)
                    .map(|(a, b)| a - b)
                    .collect();
                let mut reports = vec![
                    ResidualReport::bounded("total gauss curvature drift", drift(&audit.gauss_integral), tol("constancy")),
                    ResidualReport::bounded("area rate against divergence", gaps, tol("area_divergence")),
                ];
                if audit.rigid {
                    reports.push(ResidualReport::bounded("area drift", drift(&audit.area), tol("constancy")));
                    reports.push(ResidualReport::bounded("shell volume drift", drift(&audit.shell_volume), tol("constancy")));
                }
                if breathing {
                    let rel = audit.area_rate_rel_error().unwrap_or(f64::NAN);
                    let moving = audit.area_drift();
                    let mut r = ResidualReport::bounded("breathing area rate", vec![rel], tol("area_rate_rel"))
                        .with_note(format!("area changes by {moving:.3e}: motion is not area preserving"));
                    r.verdict = r.verdict.and(Verdict::from_bool(moving > tol("constancy")));
                    reports.push(r);
                }
                Ok(reports)
            }),
        )
        .param("time_samples", ctx.cfg.resolutions.time_samples)
        .param("width", width),
    );

    if ms.motion == Motion::Stationary {
        return Ok(());
    }
    let n = ctx.cfg.resolutions.limit_points;
    let (c, sp) = (ctx.clone(), spec.to_string());
    out.push(
        Task::new(
            &["composite_gradient", "composite_time", "projection_rate", "distance_rate"],
            spec,
            seed,
            Box::new(move || {
                let ms = with_t_end(MovingSurface::parse(&sp)?, c.cfg.resolutions.t_end);
                let t = c.t_mid();
                let s = ms.at(t);
                let widths = c.cfg.resolutions.widths.clone();
                let f = SpaceTimePoly::seeded(3, field_seed(seed, 0));
                let mut worst = vec![vec![0.0f64; widths.len()]; 3];
                let mut rate = Vec::new();
                for p in s.sample_points(n, seed) {
                    let g = s.eval_geometry(p)?;
                    let vn = ms.normal_velocity(&g.point, t)?;
                    for (j, &d) in widths.iter().enumerate() {
                        let x = g.point + g.normal * d;
                        let defects = ms.composite_expansion_defects(&f, &x, t, JACOBIAN_STEP, POINT_DT)?;
                        for k in 0..3 {
                            worst[k][j] = worst[k][j].max(defects[k]);
                        }
                        rate.push(ms.distance_rate(&x, t, POINT_DT)? + vn);
                    }
                }
                let min = c.tol(Suite::Kinematics, "min_slope");
                let labels = ["composite gradient", "composite time derivative", "projection rate"];
                let mut reports: Vec<ResidualReport> = labels
                    .iter()
                    .zip(worst)
                    .map(|(l, w)| ResidualReport::order(l, widths.clone(), w, 2.0, min, NEWTON_FLOOR))
                    .collect();
                reports.push(ResidualReport::bounded("distance rate", rate, c.tol(Suite::Kinematics, "distance_rate")));
                Ok(reports)
            }),
        )
        .param("points", n)
        .param("t", ctx.t_mid()),
    );

    let (c, sp) = (ctx.clone(), spec.to_string());
    out.push(
        Task::new(
            &["material_derivative"],
            spec,
            seed,
            single(move || {
                let ms = with_t_end(MovingSurface::parse(&sp)?, c.cfg.resolutions.t_end);
                let t = c.t_mid();
                let s = ms.at(t);
                let f = SpaceTimePoly::seeded(2, field_seed(seed, 0));
                let tangential = Projected(PolyVector::seeded(2, field_seed(seed, 1)));
                let v = Transport {
                    motion: ms.velocity_field(),
                    tangential: &tangential,
                };
                let steps = c.cfg.resolutions.dt_sweep.clone();
                let mut worst = vec![0.0f64; steps.len()];
                for p in s.sample_points(n, seed) {
                    let y = s.chart_map(p);
                    let exact = ms.material_derivative(&f, &v, &y, t, POINT_DT)?;
                    for (w, &dt) in worst.iter_mut().zip(&steps) {
                        *w = w.max((ms.flow_derivative(&f, &v, &y, t, dt)? - exact).abs());
                    }
                }
                Ok(ResidualReport::order(
                    "material derivative",
                    steps,
                    worst,
                    2.0,
                    c.tol(Suite::Kinematics, "min_slope"),
                    NEWTON_FLOOR,
                ))
            }),
        )
        .param("points", n)
        .param("t", ctx.t_mid()),
    );
    Ok(())
}
