//! Campaign configuration: a JSON document with nested sections.
//!
//! ```json
//! {
//!   "surfaces": ["sphere:R=1", "torus:R0=2,r=0.5", "breathe-sphere:R=1,amp=0.1"],
//!   "scenarios": ["euler:rotating-sphere", "ns:rotating-sphere:mu=0.7"],
//!   "suites": ["geometry", "operators", "quadrature", "limits", "energy", "kinematics"],
//!   "resolutions": { "widths": [0.08, 0.04, 0.02, 0.01] },
//!   "seeds": [1],
//!   "tolerances": { "operators": { "intrinsic": 1e-7 } },
//!   "output": "report.ndjson"
//! }
//! ```
//!
//! Every section is optional and falls back to [`CampaignConfig::default`];
//! unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::Scenario;
use crate::motion::MovingSurface;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Geometry,
    Operators,
    Quadrature,
    Limits,
    Energy,
    Kinematics,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Geometry,
        Suite::Operators,
        Suite::Quadrature,
        Suite::Limits,
        Suite::Energy,
        Suite::Kinematics,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Operators => "operators",
            Suite::Quadrature => "quadrature",
            Suite::Limits => "limits",
            Suite::Energy => "energy",
            Suite::Kinematics => "kinematics",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }

    /// Tolerance keys a suite accepts, with defaults.
    pub fn default_tolerances(&self) -> &'static [(&'static str, f64)] {
        match self {
            Suite::Geometry => &[("invariants", 1e-10), ("min_slope", 1.9), ("fd_floor", 1e-8)],
            Suite::Operators => &[("intrinsic", 1e-7), ("min_slope", 1.9), ("fd_floor", 1e-9)],
            Suite::Quadrature => &[
                ("area_rel", 1e-10),
                ("gauss_bonnet", 1e-8),
                ("volume_rel", 1e-10),
                ("measure_transform", 1e-9),
                ("stokes", 1e-8),
            ],
            Suite::Limits => &[
                ("limit_residual", 1e-6),
                ("bulk_min_slope", 0.9),
                ("navier_min_slope", 1.9),
                ("boundary", 1e-7),
                ("calibration_rel", 0.1),
            ],
            Suite::Energy => &[
                ("dissipation", 1e-10),
                ("kinetic_drift", 1e-8),
                ("surface_balance", 1e-6),
                ("bulk_min_slope", 1.9),
                ("thin_width_min_slope", 0.9),
                ("stokes", 1e-8),
                ("pointwise", 1e-10),
                ("leibniz_min_slope", 1.9),
            ],
            Suite::Kinematics => &[
                ("constancy", 1e-8),
                ("area_rate_rel", 0.01),
                ("area_divergence", 1e-5),
                ("min_slope", 1.9),
                ("distance_rate", 1e-6),
            ],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Node counts, sample counts and sweep lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolutions {
    /// Random surface points for pointwise geometry invariants.
    pub geometry_points: usize,
    /// Random tubular points for the distance-Hessian oracle.
    pub tubular_points: usize,
    /// Difference steps for the distance-Hessian oracle.
    pub hessian_steps: Vec<f64>,
    /// Manufactured field cases per surface for operator identities.
    pub field_cases: usize,
    /// Surface points per field case.
    pub identity_points: usize,
    /// Inner difference steps for differenced operators.
    pub fd_steps: Vec<f64>,
    pub surface_nodes: usize,
    pub normal_nodes: usize,
    /// Shell half-widths and normal offsets, coarse to fine.
    pub widths: Vec<f64>,
    /// Surface points for pointwise limit and boundary checks.
    pub limit_points: usize,
    /// Samples of `[0, t_end]` for time ledgers.
    pub time_samples: usize,
    pub t_end: f64,
    /// Time step of energy and area derivatives.
    pub dt: f64,
    /// Time steps for the Leibniz and material-derivative sweeps.
    pub dt_sweep: Vec<f64>,
    /// Random space-time fields per moving surface.
    pub space_time_fields: usize,
}

impl Default for Resolutions {
    fn default() -> Self {
        Self {
            geometry_points: 500,
            tubular_points: 100,
            hessian_steps: vec![2e-2, 1e-2, 5e-3, 2.5e-3],
            field_cases: 10,
            identity_points: 3,
            fd_steps: crate::tancalc::H_SWEEP.to_vec(),
            surface_nodes: 48,
            normal_nodes: 8,
            widths: vec![0.08, 0.04, 0.02, 0.01],
            limit_points: 6,
            time_samples: 11,
            t_end: 1.0,
            dt: 1e-3,
            dt_sweep: vec![8e-3, 4e-3, 2e-3, 1e-3],
            space_time_fields: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    /// Surface or moving-surface specs. The distinct body surfaces feed the
    /// geometry, operators, quadrature and boundary checks; every entry feeds
    /// the kinematics suite and moving entries feed the Leibniz check.
    pub surfaces: Vec<String>,
    /// Flow scenarios for the limits and energy suites.
    pub scenarios: Vec<String>,
    pub suites: Vec<Suite>,
    pub resolutions: Resolutions,
    pub seeds: Vec<u64>,
    /// Per-suite overrides, e.g. `{"operators": {"intrinsic": 1e-8}}`.
    pub tolerances: BTreeMap<Suite, BTreeMap<String, f64>>,
    pub output: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            surfaces: [
                "sphere:R=1",
                "torus:R0=2,r=0.5",
                "translate-sphere:R=1,vx=0.3,vy=-0.1,ax=0.2",
                "rotate-ellipsoid:a=1,b=1.2,c=0.8,omega=0.5",
                "breathe-sphere:R=1,amp=0.1",
            ]
            .map(String::from)
            .to_vec(),
            scenarios: [
                "euler:rotating-sphere",
                "ns:rotating-sphere:mu=0.7",
                "euler:translating-sphere:ax=0.2",
                "ns:perturbed-translating-sphere:mu=0.5",
            ]
            .map(String::from)
            .to_vec(),
            suites: Suite::ALL.to_vec(),
            resolutions: Resolutions::default(),
            seeds: vec![1],
            tolerances: BTreeMap::new(),
            output: None,
        }
    }
}

impl CampaignConfig {
    /// Parses JSON; syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    /// Checks every field; the error names the offending one.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if self.suites.is_empty() {
            return bad("suites", "must select at least one suite".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds", "must list at least one seed".into());
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            if let Err(e) = MovingSurface::parse(s) {
                return bad(&format!("surfaces[{i}]"), e.to_string());
            }
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if let Err(e) = Scenario::parse(s) {
                return bad(&format!("scenarios[{i}]"), e.to_string());
            }
        }
        let r = &self.resolutions;
        let sweeps: [(&str, &[f64]); 4] = [
            ("resolutions.hessian_steps", &r.hessian_steps),
            ("resolutions.fd_steps", &r.fd_steps),
            ("resolutions.widths", &r.widths),
            ("resolutions.dt_sweep", &r.dt_sweep),
        ];
        for (field, sweep) in sweeps {
            if sweep.len() < 3 {
                return bad(field, format!("slope fits need at least 3 values, got {}", sweep.len()));
            }
            if sweep.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
                return bad(field, "values must be positive and finite".into());
            }
        }
        let counts = [
            ("resolutions.geometry_points", r.geometry_points),
            ("resolutions.tubular_points", r.tubular_points),
            ("resolutions.field_cases", r.field_cases),
            ("resolutions.identity_points", r.identity_points),
            ("resolutions.limit_points", r.limit_points),
            ("resolutions.space_time_fields", r.space_time_fields),
        ];
        for (field, n) in counts {
            if n == 0 {
                return bad(field, "must be positive".into());
            }
        }
        if r.surface_nodes < 4 || r.normal_nodes < 2 {
            return bad("resolutions", "need surface_nodes ≥ 4 and normal_nodes ≥ 2".into());
        }
        if r.time_samples < 2 {
            return bad("resolutions.time_samples", "need at least 2 samples".into());
        }
        if !(r.t_end > 0.0 && r.dt > 0.0 && r.dt < r.t_end / 4.0) {
            return bad("resolutions", "need t_end > 0 and 0 < dt < t_end/4".into());
        }
        for (suite, overrides) in &self.tolerances {
            let known = suite.default_tolerances();
            for (key, value) in overrides {
                if !known.iter().any(|(k, _)| k == key) {
                    let names: Vec<&str> = known.iter().map(|(k, _)| *k).collect();
                    return bad(
                        &format!("tolerances.{suite}.{key}"),
                        format!("unknown key; expected one of {}", names.join(", ")),
                    );
                }
                if !(value.is_finite() && *value > 0.0) {
                    return bad(&format!("tolerances.{suite}.{key}"), "must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// Tolerance `key` of `suite`, after overrides.
    pub fn tolerance(&self, suite: Suite, key: &str) -> f64 {
        self.tolerances
            .get(&suite)
            .and_then(|m| m.get(key))
            .copied()
            .or_else(|| suite.default_tolerances().iter().find(|(k, _)| *k == key).map(|(_, v)| *v))
            .unwrap_or_else(|| panic!("no tolerance '{key}' for suite {suite}"))
    }

    pub fn has_suite(&self, suite: Suite) -> bool {
        self.suites.contains(&suite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = CampaignConfig::default();
        cfg.validate().unwrap();
        assert_eq!(CampaignConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn empty_suites_are_rejected() {
        let err = CampaignConfig::from_json(r#"{"suites": []}"#).unwrap_err();
        assert!(err.to_string().contains("suites"), "{err}");
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = CampaignConfig::from_json(r#"{"surfaces": ["sphere:R=1", "cube:a=1"]}"#).unwrap_err();
        assert!(err.to_string().contains("surfaces[1]"), "{err}");
        let err = CampaignConfig::from_json(r#"{"resolutions": {"widths": [0.1, 0.05]}}"#).unwrap_err();
        assert!(err.to_string().contains("resolutions.widths"), "{err}");
        let err = CampaignConfig::from_json(r#"{"tolerances": {"energy": {"bogus": 1.0}}}"#).unwrap_err();
        assert!(err.to_string().contains("tolerances.energy.bogus"), "{err}");
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = CampaignConfig::from_json("{\n  \"seeds\": [1,\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = CampaignConfig::from_json(r#"{"sedes": [1]}"#).unwrap_err();
        assert!(err.to_string().contains("sedes"), "{err}");
    }

    #[test]
    fn tolerance_overrides() {
        let cfg = CampaignConfig::from_json(r#"{"tolerances": {"operators": {"intrinsic": 1e-9}}}"#).unwrap();
        assert_eq!(cfg.tolerance(Suite::Operators, "intrinsic"), 1e-9);
        assert_eq!(cfg.tolerance(Suite::Operators, "min_slope"), 1.9);
    }
}
