use proptest::prelude::*;
use serde_json::Value;

use thinfluid::campaign::{lookup, CampaignConfig, CheckRecord, Environment, Report};
use thinfluid::geometry::{jm_value, jv_value};
use thinfluid::motion::MovingSurface;
use thinfluid::tancalc::fields::{AmbientPoly, PolyVector, Projected, SurfaceCurl};
use thinfluid::tancalc::{ScalarField, VectorField};
use thinfluid::{fit_slope, ClosedSurface, ResidualReport, SurfaceRule, M3};

fn body(i: usize) -> ClosedSurface {
    match i {
        0 => ClosedSurface::sphere(1.0),
        1 => ClosedSurface::torus(2.0, 0.5),
        _ => ClosedSurface::ellipsoid(1.0, 1.2, 0.8),
    }
}

fn moving(i: usize) -> MovingSurface {
    let spec = [
        "translate-sphere:R=1,vx=0.3,vy=-0.1,ax=0.2",
        "rotate-ellipsoid:a=1,b=1.2,c=0.8,omega=0.5",
        "breathe-sphere:R=1,amp=0.1",
    ][i];
    MovingSurface::parse(spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closest_point_inverts_the_normal_offset(i in 0usize..3, seed in any::<u64>(), frac in -0.49f64..0.49) {
        let s = body(i);
        let p = s.sample_points(1, seed)[0];
        let g = s.eval_geometry(p).unwrap();
        let rho = frac * s.reach();
        let tp = s.closest_point(&(g.point + g.normal * rho), None).unwrap();
        prop_assert!(tp.converged);
        prop_assert!((tp.foot - g.point).amax() <= 1e-9, "foot off by {:e}", (tp.foot - g.point).amax());
        prop_assert!((tp.dist - rho).abs() <= 1e-10);
    }

    #[test]
    fn weingarten_map_invariants(i in 0usize..3, seed in any::<u64>()) {
        let s = body(i);
        let p = s.sample_points(1, seed)[0];
        let g = s.eval_geometry(p).unwrap();
        let a = g.shape_operator;
        prop_assert!(g.invariant_defect() <= 1e-10);
        prop_assert!((a * g.normal).amax() <= 1e-12);
        prop_assert!((a - a.transpose()).amax() <= 1e-12);
        prop_assert!((g.mean_curvature - a.trace()).abs() <= 1e-12);

        let cj = s.jets(p, 2).unwrap();
        let div_nu = cj.div_vec(&cj.nu).value();
        prop_assert!((g.mean_curvature + div_nu).abs() <= 1e-10, "H + div nu = {:e}", g.mean_curvature + div_nu);
        prop_assert!((jm_value(&cj.shape_operator()) + jm_value(&cj.grad_vec(&cj.nu))).amax() <= 1e-10);
    }

    #[test]
    fn shell_jacobian_is_a_determinant(i in 0usize..3, seed in any::<u64>(), frac in -1.0f64..1.0) {
        let s = body(i);
        let g = s.eval_geometry(s.sample_points(1, seed)[0]).unwrap();
        let rho = frac * s.eps_max();
        let det = (M3::identity() - g.shape_operator * rho).determinant();
        prop_assert!((det - g.jacobian(rho)).abs() <= 1e-12);
        prop_assert!((det - g.jacobian_expanded(rho)).abs() <= 1e-12);
        prop_assert!(det > 0.0);
    }

    #[test]
    fn shape_operator_satisfies_its_characteristic_relation(i in 0usize..3, seed in any::<u64>(), w in prop::array::uniform3(-1.0f64..1.0)) {
        let s = body(i);
        let g = s.eval_geometry(s.sample_points(1, seed)[0]).unwrap();
        let v = g.proj * thinfluid::V3::from(w);
        let a = g.shape_operator;
        let gap = a * v * g.mean_curvature - v * g.gauss_curvature - a * a * v;
        prop_assert!(gap.amax() <= 1e-12);
    }

    #[test]
    fn tangential_gradients_are_tangential(i in 0usize..3, seed in any::<u64>(), field in 0u64..1000) {
        let s = body(i);
        let cj = s.jets(s.sample_points(1, seed)[0], 2).unwrap();
        let nu = cj.normal();
        let f = AmbientPoly::seeded(3, field);
        let grad = jv_value(&cj.grad(&ScalarField::jet(&f, &cj, 0.0)));
        prop_assert!(grad.dot(&nu).abs() <= 1e-12 * grad.amax().max(1.0));

        let v = PolyVector::seeded(3, field);
        let gv = jm_value(&cj.grad_vec(&VectorField::jet(&v, &cj, 0.0)));
        prop_assert!((gv.transpose() * nu).amax() <= 1e-12 * gv.amax().max(1.0));
    }

    #[test]
    fn slope_fit_recovers_power_laws(c in 1e-6f64..1e3, p in 0.5f64..4.0, h0 in 1e-3f64..0.1) {
        let xs: Vec<f64> = (0..5).map(|k| h0 / 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(p)).collect();
        let fit = fit_slope(&xs, &ys).unwrap();
        prop_assert!((fit.slope - p).abs() <= 1e-9);
        prop_assert!(fit.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn config_survives_a_json_round_trip(seeds in prop::collection::vec(any::<u64>(), 1..4), points in 1usize..1000, t_end in 0.5f64..4.0) {
        let mut cfg = CampaignConfig::default();
        cfg.seeds = seeds;
        cfg.resolutions.geometry_points = points;
        cfg.resolutions.t_end = t_end;
        let back = CampaignConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn record_stream_has_one_line_per_record(residuals in prop::collection::vec(0.0f64..1.0, 0..20)) {
        let info = lookup("surface_area").unwrap();
        let records: Vec<CheckRecord> = residuals
            .iter()
            .map(|&r| CheckRecord::new(info, "sphere:R=1", 1, ResidualReport::bounded("", vec![r], 0.5)))
            .collect();
        let env = Environment { version: "0".into(), seeds: vec![1], threads: 1 };
        let report = Report::new(env, records, 0.0);
        let text = report.to_ndjson();
        let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        prop_assert_eq!(lines.len(), residuals.len() + 2);
        let fails = residuals.iter().filter(|&&r| r > 0.5).count();
        prop_assert_eq!(lines.last().unwrap()["fail"].as_u64(), Some(fails as u64));
        for l in &lines[1..lines.len() - 1] {
            prop_assert!(!l["anchor"].as_str().unwrap().is_empty());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn signed_distance_moves_against_the_normal_speed(i in 0usize..3, seed in any::<u64>(), t in 0.1f64..0.9, frac in -0.4f64..0.4) {
        let ms = moving(i);
        let s = ms.at(t);
        let g = s.eval_geometry(s.sample_points(1, seed)[0]).unwrap();
        let x = g.point + g.normal * (frac * s.eps_max());
        let rate = ms.distance_rate(&x, t, 1e-4).unwrap();
        let speed = ms.normal_velocity(&g.point, t).unwrap();
        prop_assert!((rate + speed).abs() <= 1e-6, "d_t d + V = {:e}", rate + speed);
    }

    #[test]
    fn rigid_motions_keep_area(i in 0usize..2, t in 0.0f64..1.0) {
        let ms = moving(i);
        let a0 = SurfaceRule::new(&ms.at(0.0), 32, 4).unwrap().area();
        let at = SurfaceRule::new(&ms.at(t), 32, 4).unwrap().area();
        prop_assert!((at - a0).abs() <= 1e-10);
    }

    #[test]
    fn closed_surfaces_integrate_divergences_to_zero(i in 0usize..3, field in 0u64..1000) {
        let q = SurfaceRule::new(&body(i), 32, 4).unwrap();
        let curl = SurfaceCurl(AmbientPoly::seeded(3, field));
        let tangent = Projected(PolyVector::seeded(2, field));
        prop_assert!(q.stokes_integral(&curl, 0.0).unwrap().abs() <= 1e-8);
        prop_assert!(q.stokes_integral(&tangent, 0.0).unwrap().abs() <= 1e-8);
    }

    #[test]
    fn shell_volume_is_the_cubic_in_width(i in 0usize..3, frac in 0.05f64..0.9) {
        let s = body(i);
        let q = SurfaceRule::new(&s, 32, 4).unwrap();
        let eps = frac * s.eps_max();
        let chi = s.euler_characteristic() as f64;
        let cubic = 2.0 * eps * q.area() + 4.0 * std::f64::consts::PI / 3.0 * chi * eps.powi(3);
        let vol = q.shell_volume(eps).unwrap();
        prop_assert!(((vol - cubic) / vol).abs() <= 1e-10);
    }
}
