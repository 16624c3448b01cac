//! Check records, the campaign report and its two on-disk forms: one JSON
//! object per line, and a fixed-width summary table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::catalog::CheckInfo;
use super::config::Suite;
use crate::convergence::{ResidualReport, Verdict};
use crate::error::Result;

/// Max, RMS and count of the pointwise residuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub rms: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub module: String,
    pub suite: Suite,
    pub anchor: String,
    pub surface: String,
    pub seed: u64,
    pub parameters: Map<String, Value>,
    /// Designed to fail: its verdict shows the check can detect a defect.
    pub negative_control: bool,
    pub residual: ResidualStats,
    pub sweep: Vec<f64>,
    pub sweep_residuals: Vec<f64>,
    pub expected_order: Option<f64>,
    pub min_slope: Option<f64>,
    pub fitted_slope: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(info: &CheckInfo, surface: &str, seed: u64, report: ResidualReport) -> Self {
        let (max, rms, count) = if report.samples.is_empty() {
            (report.max, report.rms, report.sweep_residuals.len())
        } else {
            let b = ResidualReport::bounded("", report.samples.clone(), f64::INFINITY);
            (b.max, b.rms, report.samples.len())
        };
        Self {
            id: info.id.to_string(),
            module: info.module.to_string(),
            suite: info.suite,
            anchor: info.anchor.to_string(),
            surface: surface.to_string(),
            seed,
            parameters: Map::new(),
            negative_control: false,
            residual: ResidualStats { max, rms, count },
            sweep: report.sweep,
            sweep_residuals: report.sweep_residuals,
            expected_order: report.expected_order,
            min_slope: report.min_slope,
            fitted_slope: report.fit.map(|f| f.slope),
            tolerance: report.tolerance,
            verdict: report.verdict,
            note: report.note,
        }
    }

    /// A failed record for a check that could not be evaluated.
    pub fn errored(info: &CheckInfo, surface: &str, seed: u64, err: &crate::Error) -> Self {
        let mut r = Self::new(info, surface, seed, ResidualReport::bounded("", vec![f64::NAN], 0.0));
        r.note = Some(format!("evaluation failed: {err}"));
        r.verdict = Verdict::Fail;
        r
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn negative(mut self, flag: bool) -> Self {
        self.negative_control = flag;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub seeds: Vec<u64>,
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    /// Seconds; kept out of the record stream so reruns compare equal.
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub environment: Environment,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

/// One line of the record stream.
#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line<'a> {
    Environment(&'a Environment),
    Check(&'a CheckRecord),
    Summary { pass: usize, fail: usize, skipped: usize },
}

impl Report {
    pub fn new(environment: Environment, records: Vec<CheckRecord>, wall_time: f64) -> Self {
        let count = |v: Verdict| records.iter().filter(|r| r.verdict == v).count();
        let summary = Summary {
            pass: count(Verdict::Pass),
            fail: count(Verdict::Fail),
            skipped: count(Verdict::Skipped),
            wall_time,
        };
        Self {
            environment,
            records,
            summary,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0
    }

    /// Environment line, one line per record, then the verdict counts.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        let mut push = |line: Line| {
            out.push_str(&serde_json::to_string(&line).expect("records serialize"));
            out.push('\n');
        };
        push(Line::Environment(&self.environment));
        for r in &self.records {
            push(Line::Check(r));
        }
        push(Line::Summary {
            pass: self.summary.pass,
            fail: self.summary.fail,
            skipped: self.summary.skipped,
        });
        out
    }

    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<28} {:<46} {:>11} {:>7} {:>12}  verdict",
            "check", "surface", "max resid", "slope", "bound"
        );
        for r in &self.records {
            let slope = r.fitted_slope.map_or("-".to_string(), |s| format!("{s:.2}"));
            let bound = match (r.min_slope, r.tolerance) {
                (Some(m), _) => format!("slope>={m:.2}"),
                (None, Some(t)) => format!("<={t:.1e}"),
                (None, None) => "-".to_string(),
            };
            let mut verdict = r.verdict.as_str().to_string();
            if r.negative_control {
                verdict.push_str(" (negative control)");
            }
            let _ = writeln!(
                out,
                "{:<28} {:<46} {:>11.3e} {:>7} {:>12}  {}",
                r.id,
                truncate(&r.surface, 46),
                r.residual.max,
                slope,
                bound,
                verdict
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "\n{} passed, {} failed, {} skipped in {:.1} s ({} threads, version {})",
            s.pass, s.fail, s.skipped, s.wall_time, self.environment.threads, self.environment.version
        );
        out
    }

    /// Writes the record stream to `path` and the table next to it with a
    /// `.summary.txt` suffix. Each file is written to a temporary sibling and
    /// renamed into place.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        atomic_write(path, &self.to_ndjson())?;
        let table = summary_path(path);
        atomic_write(&table, &self.summary_table())?;
        Ok(table)
    }
}

pub fn summary_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".summary.txt");
    path.with_file_name(name)
}

fn truncate(s: &str, n: usize) -> String {
    if s.chars().count() <= n {
        s.to_string()
    } else {
        let mut t: String = s.chars().take(n - 1).collect();
        t.push('…');
        t
    }
}

fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaign::catalog::lookup;

    fn sample() -> Report {
        let info = lookup("gauss_bonnet").unwrap();
        let pass = CheckRecord::new(info, "sphere:R=1", 1, ResidualReport::bounded("", vec![1e-12], 1e-8));
        let fail = CheckRecord::new(info, "torus:R0=2,r=0.5", 1, ResidualReport::bounded("", vec![1.0], 1e-8))
            .param("nodes", 48)
            .negative(true);
        let env = Environment {
            version: "0.1.0".into(),
            seeds: vec![1],
            threads: 1,
        };
        Report::new(env, vec![pass, fail], 0.5)
    }

    #[test]
    fn counts_and_stream_shape() {
        let r = sample();
        assert_eq!((r.summary.pass, r.summary.fail), (1, 1));
        assert!(!r.all_passed());
        let lines: Vec<Value> = r
            .to_ndjson()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0]["kind"], "environment");
        assert_eq!(lines[1]["anchor"], r"K := \kappa_1\kappa_2");
        assert_eq!(lines[2]["negative_control"], true);
        assert_eq!(lines[3]["fail"], 1);
        assert!(!r.to_ndjson().contains("wall_time"));
    }

    #[test]
    fn writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out/report.ndjson");
        let table = sample().write(&path).unwrap();
        assert!(fs::read_to_string(&path).unwrap().starts_with("{\"kind\":\"environment\""));
        assert!(fs::read_to_string(table).unwrap().contains("1 passed, 1 failed"));
        let leftovers = fs::read_dir(path.parent().unwrap()).unwrap().count();
        assert_eq!(leftovers, 2);
    }
}
