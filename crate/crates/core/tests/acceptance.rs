//! Acceptance suite: one line per criterion, then a single assertion over all
//! of them. Closed forms below are independent of the library's jet and
//! quadrature code.

use std::f64::consts::PI;

use thinfluid::campaign::{run_campaign_with_threads, CampaignConfig, CheckRecord, Report, Suite};
use thinfluid::motion::MovingSurface;
use thinfluid::{fit_slope, ClosedSurface, SurfaceRule, Verdict, M3, V3};

const SEED: u64 = 1;
const SHELL_LITERAL: f64 = 2.5216568;

struct Outcome {
    criterion: &'static str,
    passed: bool,
    asserted: bool,
    detail: String,
}

#[derive(Default)]
struct Board(Vec<Outcome>);

impl Board {
    fn record(&mut self, criterion: &'static str, passed: bool, detail: String) {
        self.0.push(Outcome {
            criterion,
            passed,
            asserted: true,
            detail,
        });
    }

    /// Printed but not asserted: the quoted literal disagrees with its own
    /// closed form.
    fn informational(&mut self, criterion: &'static str, passed: bool, detail: String) {
        self.0.push(Outcome {
            criterion,
            passed,
            asserted: false,
            detail,
        });
    }
}

fn bodies() -> Vec<ClosedSurface> {
    vec![
        ClosedSurface::sphere(1.0),
        ClosedSurface::torus(2.0, 0.5),
        ClosedSurface::ellipsoid(1.0, 1.2, 0.8),
    ]
}

fn of<'a>(report: &'a Report, id: &str) -> Vec<&'a CheckRecord> {
    report.records.iter().filter(|r| r.id == id).collect()
}

fn all_pass(records: &[&CheckRecord]) -> bool {
    !records.is_empty() && records.iter().all(|r| r.verdict == Verdict::Pass)
}

fn worst(records: &[&CheckRecord]) -> f64 {
    records.iter().fold(0.0, |a, r| a.max(r.residual.max))
}

fn slopes(records: &[&CheckRecord]) -> String {
    records
        .iter()
        .map(|r| r.fitted_slope.map_or("floor".to_string(), |s| format!("{s:.2}")))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Curvatures `(H, K)` from the implicit description of each body, with the
/// crate's sign (`H = −2` on the unit sphere).
fn closed_form_curvatures(s: &ClosedSurface, y: &V3) -> (f64, f64, f64) {
    match s.label.as_str() {
        l if l.starts_with("sphere") => (y.norm() - 1.0, -2.0, 1.0),
        l if l.starts_with("torus") => {
            let (big, r) = (2.0, 0.5);
            let rxy = y.x.hypot(y.y);
            let implicit = (rxy - big).hypot(y.z) - r;
            let cos_v = (rxy - big) / r;
            let k2 = cos_v / (big + r * cos_v);
            (implicit, -(1.0 / r + k2), k2 / r)
        }
        _ => {
            let (a, b, c) = (1.0f64, 1.2f64, 0.8f64);
            let implicit = (y.x / a).powi(2) + (y.y / b).powi(2) + (y.z / c).powi(2) - 1.0;
            let h = ((y.x / (a * a)).powi(2) + (y.y / (b * b)).powi(2) + (y.z / (c * c)).powi(2)).sqrt();
            let abc2 = (a * b * c).powi(2);
            let mean = (y.norm_squared() - a * a - b * b - c * c) / (abc2 * h.powi(3));
            (implicit, mean, 1.0 / (abc2 * h.powi(4)))
        }
    }
}

fn geometry_exactness(report: &Report, board: &mut Board) {
    let inv = of(report, "weingarten_invariants");
    let jac = of(report, "shell_jacobian");
    let counted = inv.len() == 3 && inv.iter().all(|r| r.residual.count == 500);
    let campaign_ok = counted && all_pass(&inv) && all_pass(&jac) && worst(&inv).max(worst(&jac)) <= 1e-10;

    let mut oracle = 0.0f64;
    for s in bodies() {
        for p in s.sample_points(500, SEED) {
            let g = s.eval_geometry(p).unwrap();
            let (implicit, h, k) = closed_form_curvatures(&s, &g.point);
            oracle = oracle
                .max(implicit.abs())
                .max((g.mean_curvature - h).abs())
                .max((g.gauss_curvature - k).abs())
                .max((g.shape_operator.trace() - h).abs());
            if s.label.starts_with("sphere") {
                let nu = g.point / g.point.norm();
                let proj = M3::identity() - nu * nu.transpose();
                oracle = oracle.max((g.normal - nu).amax()).max((g.shape_operator + proj).amax());
            }
            for rho in [-0.1, 0.05, 0.1] {
                let det = (M3::identity() - g.shape_operator * rho).determinant();
                oracle = oracle.max((det - (1.0 - rho * h + rho * rho * k)).abs());
            }
        }
    }
    board.record(
        "1 geometry exactness",
        campaign_ok && oracle <= 1e-10,
        format!(
            "invariants {:.1e}, det(I-rhoA)-J {:.1e}, closed-form H/K/A {:.1e} (<= 1e-10, 500 points x 3 surfaces)",
            worst(&inv),
            worst(&jac),
            oracle
        ),
    );
}

fn distance_hessian(board: &mut Board) {
    let steps = [0.02, 0.01, 0.005, 0.0025];
    let mut lines = Vec::new();
    let mut ok = true;
    for s in bodies() {
        let pts: Vec<V3> = s
            .sample_points(100, SEED)
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let g = s.eval_geometry(p).unwrap();
                let d = s.eps_max() * 0.5 * ((i as f64 * 0.618_034).fract() * 2.0 - 1.0);
                g.point + g.normal * d
            })
            .collect();
        let mut errs = vec![0.0f64; steps.len()];
        for x in &pts {
            let exact = if s.label.starts_with("sphere") {
                let n = x / x.norm();
                (M3::identity() - n * n.transpose()) / x.norm()
            } else {
                s.distance_hessian_exact(x).unwrap()
            };
            for (e, &h) in errs.iter_mut().zip(&steps) {
                *e = e.max((s.distance_hessian(x, h).unwrap() - exact).amax());
            }
        }
        let slope = fit_slope(&steps, &errs).map_or(f64::NAN, |f| f.slope);
        ok &= slope >= 1.9;
        lines.push(format!("{} {slope:.2}", s.label));
    }
    board.record(
        "2 distance Hessian order",
        ok,
        format!("FD slopes {} (>= 1.9, 100 tubular points)", lines.join(", ")),
    );
}

fn operator_identities(report: &Report, board: &mut Board) {
    let ids = ["exchange", "viscous_stress", "gauss_formula", "bochner", "killing_stress", "viscous_limit"];
    let mut ok = true;
    let mut intrinsic = 0.0f64;
    let mut min_slope = f64::INFINITY;
    for id in ids {
        let recs = of(report, id);
        let (intr, diff): (Vec<&CheckRecord>, Vec<&CheckRecord>) =
            recs.iter().partition(|r| r.parameters["route"] == "intrinsic");
        ok &= intr.len() == 3 && diff.len() == 3 && all_pass(&intr) && all_pass(&diff);
        ok &= intr.iter().all(|r| r.parameters["field_cases"] == 10);
        intrinsic = intrinsic.max(worst(&intr));
        for r in &diff {
            if let Some(s) = r.fitted_slope {
                min_slope = min_slope.min(s);
                ok &= s >= 1.9;
            }
        }
    }
    board.record(
        "3 operator identities",
        ok && intrinsic <= 1e-7,
        format!("intrinsic rel. residual {intrinsic:.1e} (<= 1e-7), min FD slope {min_slope:.2} (>= 1.9)"),
    );
}

fn quadrature(report: &Report, board: &mut Board) {
    let mut worst_area = 0.0f64;
    let mut worst_gb = 0.0f64;
    for s in bodies() {
        let q = SurfaceRule::with_defaults(&s).unwrap();
        let exact = match s.label.as_str() {
            l if l.starts_with("sphere") => Some(4.0 * PI),
            l if l.starts_with("torus") => Some(4.0 * PI * PI * 2.0 * 0.5),
            _ => None,
        };
        if let Some(a) = exact {
            worst_area = worst_area.max(((q.area() - a) / a).abs());
        }
        let gb = q.gauss_bonnet();
        let chi = if s.label.starts_with("torus") { 0.0 } else { 2.0 };
        worst_gb = worst_gb.max((gb.integral - 2.0 * PI * chi).abs());
    }

    let q = SurfaceRule::with_defaults(&ClosedSurface::sphere(1.0)).unwrap();
    let vol = q.shell_volume(0.1).unwrap();
    let closed = 4.0 * PI / 3.0 * (1.1f64.powi(3) - 0.9f64.powi(3));
    let vol_rel = ((vol - closed) / closed).abs();
    let exp_rel = ((vol - q.shell_volume_expansion(0.1)) / vol).abs();
    let lit_rel = ((vol - SHELL_LITERAL) / SHELL_LITERAL).abs();

    let transform = of(report, "measure_transform");
    let expansion = of(report, "shell_volume_expansion");
    let ok = worst_area <= 1e-10
        && worst_gb <= 1e-8
        && vol_rel <= 1e-10
        && exp_rel <= 1e-10
        && all_pass(&transform)
        && worst(&transform) <= 1e-9
        && all_pass(&expansion);
    board.record(
        "4 quadrature",
        ok,
        format!(
            "area {worst_area:.1e} (<= 1e-10), Gauss-Bonnet {worst_gb:.1e} (<= 1e-8), shell volume vs closed form {vol_rel:.1e} and vs expansion {exp_rel:.1e} (<= 1e-10), measure transform {:.1e} (<= 1e-9)",
            worst(&transform)
        ),
    );
    board.informational(
        "4 shell volume literal",
        lit_rel <= 1e-10,
        format!("{vol:.10} vs quoted 2.5216568: rel. err {lit_rel:.1e}; closed form (4pi/3)(1.1^3-0.9^3) = {closed:.10}"),
    );
}

fn limits(report: &Report, board: &mut Board) {
    let rotating = |r: &&CheckRecord| r.surface.contains("rotating-sphere") && !r.negative_control;
    let limit: Vec<&CheckRecord> = of(report, "limit_equations").into_iter().filter(rotating).collect();
    let bulk: Vec<&CheckRecord> = of(report, "bulk_residual_order").into_iter().filter(rotating).collect();
    let calib = of(report, "normal_residual_calibration");
    let ok = limit.len() == 2
        && bulk.len() == 2
        && all_pass(&limit)
        && worst(&limit) <= 1e-6
        && all_pass(&bulk)
        && bulk.iter().all(|r| r.sweep == [0.08, 0.04, 0.02, 0.01])
        && all_pass(&calib);
    board.record(
        "5 limit equations",
        ok,
        format!(
            "limit residual {:.1e} (<= 1e-6), bulk slopes {} (>= 0.9), calibration gap {:.1e} (<= 0.01)",
            worst(&limit),
            slopes(&bulk),
            worst(&calib)
        ),
    );
}

fn boundary(report: &Report, board: &mut Board) {
    let strain = of(report, "boundary_strain_audit");
    let navier = of(report, "navier_conditions");
    let cont = of(report, "first_order_continuity");
    let ok = all_pass(&strain)
        && worst(&strain) <= 1e-7
        && all_pass(&navier)
        && navier.iter().all(|r| r.fitted_slope.is_none_or(|s| s >= 1.9))
        && all_pass(&cont)
        && worst(&cont) <= 1e-7;
    board.record(
        "6 boundary conditions",
        ok,
        format!(
            "strain audit {:.1e}, continuity {:.1e} (<= 1e-7), Navier max defect {:.1e} with slopes {}",
            worst(&strain),
            worst(&cont),
            worst(&navier),
            slopes(&navier)
        ),
    );
}

fn energy(report: &Report, board: &mut Board) {
    let killing = of(report, "killing_dissipation");
    let bulk = of(report, "bulk_energy_identity");
    let thin: Vec<&CheckRecord> = report.records.iter().filter(|r| r.id.starts_with("thin_width_")).collect();
    let stokes = of(report, "stokes_dropped_terms");
    let ok = killing.len() == 1
        && all_pass(&killing)
        && worst(&killing) <= 1e-10
        && all_pass(&bulk)
        && bulk.iter().all(|r| r.fitted_slope.is_none_or(|s| s >= 1.9))
        && thin.len() >= 4
        && all_pass(&thin)
        && thin.iter().all(|r| r.fitted_slope.is_none_or(|s| s >= 0.9))
        && all_pass(&stokes)
        && worst(&stokes) <= 1e-8;
    board.record(
        "7 energy identities",
        ok,
        format!(
            "dissipation {:.1e} (<= 1e-10) [{}], bulk identity {}, thin-width slopes {} (>= 0.9), Stokes-dropped {:.1e} (<= 1e-8)",
            worst(&killing),
            killing.first().and_then(|r| r.note.clone()).unwrap_or_default(),
            slopes(&bulk),
            slopes(&thin),
            worst(&stokes)
        ),
    );
}

fn kinematics(report: &Report, board: &mut Board) {
    let constancy: Vec<&CheckRecord> = ["area_preservation", "shell_volume_constancy", "gauss_curvature_constancy"]
        .iter()
        .flat_map(|id| of(report, id))
        .filter(|r| !r.surface.starts_with("breathe"))
        .collect();
    let eleven = constancy.iter().all(|r| r.parameters["time_samples"] == 11);
    let breathing = of(report, "breathing_area_rate");

    // 8πRṘ for R(t) = 1 + 0.1 sin t, against areas from the quadrature rule
    let ms = MovingSurface::parse("breathe-sphere:R=1,amp=0.1").unwrap();
    let area = |t: f64| SurfaceRule::with_defaults(&ms.at(t)).unwrap().area();
    let mut rate_rel = 0.0f64;
    for t in [0.0, 0.3, 0.6, 0.9] {
        let h = 1e-4;
        let numeric = (area(t + h) - area(t - h)) / (2.0 * h);
        let expected = 8.0 * PI * (1.0 + 0.1 * t.sin()) * 0.1 * t.cos();
        rate_rel = rate_rel.max(((numeric - expected) / expected).abs());
    }
    let ok = constancy.len() >= 6
        && eleven
        && all_pass(&constancy)
        && worst(&constancy) <= 1e-8
        && breathing.len() == 1
        && all_pass(&breathing)
        && rate_rel <= 0.01;
    board.record(
        "8 kinematic constraints",
        ok,
        format!(
            "rigid drift {:.1e} (<= 1e-8, 11 samples), breathing rate rel. err campaign {:.1e} / oracle {rate_rel:.1e} (<= 1%)",
            worst(&constancy),
            worst(&breathing)
        ),
    );
}

fn determinism(board: &mut Board) {
    let cfg = CampaignConfig::from_json(
        r#"{
          "surfaces": ["sphere:R=1", "translate-sphere:R=1,vx=0.3"],
          "scenarios": ["euler:rotating-sphere"],
          "suites": ["geometry", "quadrature", "kinematics"],
          "resolutions": {"geometry_points": 40, "tubular_points": 6, "surface_nodes": 24, "time_samples": 3},
          "seeds": [7]
        }"#,
    )
    .unwrap();
    let a = run_campaign_with_threads(&cfg, 2).unwrap().to_ndjson();
    let b = run_campaign_with_threads(&cfg, 2).unwrap().to_ndjson();
    board.record(
        "9 determinism",
        a == b,
        format!("two runs, {} bytes each, bitwise equal: {}", a.len(), a == b),
    );
}

#[test]
fn acceptance() {
    let cfg = CampaignConfig::default();
    assert!(cfg.has_suite(Suite::Geometry));
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_campaign_with_threads(&cfg, threads).unwrap();

    let mut board = Board::default();
    geometry_exactness(&report, &mut board);
    distance_hessian(&mut board);
    operator_identities(&report, &mut board);
    quadrature(&report, &mut board);
    limits(&report, &mut board);
    boundary(&report, &mut board);
    energy(&report, &mut board);
    kinematics(&report, &mut board);
    determinism(&mut board);

    for o in &board.0 {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        let note = if o.asserted { "" } else { " (not asserted)" };
        println!("[{tag}] {}{note}: {}", o.criterion, o.detail);
    }
    let failed: Vec<&str> = board.0.iter().filter(|o| o.asserted && !o.passed).map(|o| o.criterion).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
