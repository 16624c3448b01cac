//! Residual statistics, log-log slope fits and pass/fail verdicts.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Skipped, v) | (v, Verdict::Skipped) => v,
            _ => Verdict::Pass,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        }
    }
}

/// Least-squares fit of `ln y = slope · ln x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Fits a log-log line through the pairs with positive finite coordinates.
/// Returns `None` with fewer than three usable pairs.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r2,
        points: n,
    })
}

/// Outcome of one check: pointwise residuals, an optional sweep with a fitted
/// order, and the verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub label: String,
    /// Per-sample residual norms.
    pub samples: Vec<f64>,
    pub max: f64,
    pub rms: f64,
    pub tolerance: Option<f64>,
    /// Step or width values, coarse to fine.
    pub sweep: Vec<f64>,
    /// Sup-norm residual at each sweep value.
    pub sweep_residuals: Vec<f64>,
    pub expected_order: Option<f64>,
    pub min_slope: Option<f64>,
    /// Residuals at or below this are treated as round-off.
    pub floor: f64,
    pub fit: Option<SlopeFit>,
    pub note: Option<String>,
    pub verdict: Verdict,
}

fn stats(samples: &[f64]) -> (f64, f64, bool) {
    let nan = samples.iter().any(|x| x.is_nan());
    let max = if nan {
        f64::NAN
    } else {
        samples.iter().fold(0.0, |a: f64, b| a.max(b.abs()))
    };
    let rms = if samples.is_empty() {
        0.0
    } else {
        (samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt()
    };
    (max, rms, nan)
}

impl ResidualReport {
    fn empty(label: &str) -> Self {
        Self {
            label: label.to_string(),
            samples: Vec::new(),
            max: 0.0,
            rms: 0.0,
            tolerance: None,
            sweep: Vec::new(),
            sweep_residuals: Vec::new(),
            expected_order: None,
            min_slope: None,
            floor: 0.0,
            fit: None,
            note: None,
            verdict: Verdict::Skipped,
        }
    }

    /// Passes iff every sample is finite and `|sample| ≤ tolerance`.
    pub fn bounded(label: &str, samples: Vec<f64>, tolerance: f64) -> Self {
        let (max, rms, nan) = stats(&samples);
        Self {
            samples,
            max,
            rms,
            tolerance: Some(tolerance),
            verdict: Verdict::from_bool(!nan && max <= tolerance),
            ..Self::empty(label)
        }
    }

    /// Passes iff `|value − target| ≤ rel · |target|`.
    pub fn matches(label: &str, value: f64, target: f64, rel: f64) -> Self {
        let mut r = Self::bounded(label, vec![value - target], rel * target.abs());
        r.note = Some(format!("value {value:.6e}, target {target:.6e} ± {:.0}%", rel * 100.0));
        r
    }

    /// Order-of-convergence check over a sweep (coarse to fine).
    ///
    /// Only residuals above `floor` enter the fit. If every residual is at or
    /// below the floor the quantity is exact to round-off and passes. If fewer
    /// than three residuals remain above the floor, the check passes when those
    /// residuals decrease monotonically into the floor. Otherwise the fitted
    /// slope must reach `min_slope`. Any NaN fails.
    pub fn order(
        label: &str,
        sweep: Vec<f64>,
        sweep_residuals: Vec<f64>,
        expected_order: f64,
        min_slope: f64,
        floor: f64,
    ) -> Self {
        let (max, rms, nan) = stats(&sweep_residuals);
        let mut r = Self {
            max,
            rms,
            expected_order: Some(expected_order),
            min_slope: Some(min_slope),
            floor,
            ..Self::empty(label)
        };
        if sweep.len() < 3 || sweep.len() != sweep_residuals.len() {
            r.note = Some("slope fit needs at least three sweep points".into());
            r.verdict = Verdict::Fail;
            r.sweep = sweep;
            r.sweep_residuals = sweep_residuals;
            return r;
        }
        let above: Vec<usize> = (0..sweep.len())
            .filter(|&i| sweep_residuals[i].abs() > floor)
            .collect();
        let xs: Vec<f64> = above.iter().map(|&i| sweep[i]).collect();
        let ys: Vec<f64> = above.iter().map(|&i| sweep_residuals[i].abs()).collect();
        r.fit = fit_slope(&xs, &ys);
        r.verdict = if nan {
            Verdict::Fail
        } else if above.is_empty() {
            r.note = Some("all residuals at round-off floor".into());
            Verdict::Pass
        } else if above.len() < 3 {
            let leading = above.iter().enumerate().all(|(k, &i)| k == i);
            let decreasing = ys.windows(2).all(|w| w[1] < w[0]);
            r.note = Some(format!("{} residuals above floor", above.len()));
            Verdict::from_bool(leading && decreasing)
        } else {
            Verdict::from_bool(r.fit.is_some_and(|f| f.slope >= min_slope))
        };
        r.sweep = sweep;
        r.sweep_residuals = sweep_residuals;
        r
    }

    /// Attaches per-sample residuals and a bound that must also hold.
    pub fn with_bound(mut self, samples: Vec<f64>, tolerance: f64) -> Self {
        let b = Self::bounded(&self.label, samples, tolerance);
        self.samples = b.samples;
        self.tolerance = b.tolerance;
        self.verdict = self.verdict.and(b.verdict);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn skipped(label: &str, reason: &str) -> Self {
        Self {
            note: Some(reason.into()),
            ..Self::empty(label)
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Fitted slope, if any.
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_exact_power_law() {
        let xs = [0.08, 0.04, 0.02, 0.01];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        let f = fit_slope(&xs, &ys).unwrap();
        assert_relative_eq!(f.slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(f.r2, 1.0, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 3.0_f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn too_few_points_gives_no_fit() {
        assert!(fit_slope(&[1.0, 2.0], &[1.0, 4.0]).is_none());
        assert!(fit_slope(&[1.0, 2.0, 3.0], &[1.0, 0.0, -1.0]).is_none());
    }

    #[test]
    fn nan_is_sticky() {
        let r = ResidualReport::bounded("x", vec![0.0, f64::NAN], 1.0);
        assert_eq!(r.verdict, Verdict::Fail);
        let r = ResidualReport::order("x", vec![4.0, 2.0, 1.0], vec![16.0, f64::NAN, 1.0], 2.0, 1.9, 0.0);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn floor_rule() {
        let sweep = vec![0.08, 0.04, 0.02, 0.01];
        let exact = ResidualReport::order("e", sweep.clone(), vec![1e-15; 4], 1.0, 0.9, 1e-12);
        assert!(exact.passed());
        let into_floor = ResidualReport::order("f", sweep.clone(), vec![1e-9, 1e-11, 1e-13, 1e-13], 2.0, 1.9, 1e-12);
        assert!(into_floor.passed());
        let flat = ResidualReport::order("g", sweep.clone(), vec![1e-3; 4], 1.0, 0.9, 1e-12);
        assert!(!flat.passed());
        let first_order = ResidualReport::order("h", sweep, vec![8e-2, 4e-2, 2e-2, 1e-2], 2.0, 1.9, 0.0);
        assert!(!first_order.passed());
        assert_relative_eq!(first_order.slope().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn verdict_combination() {
        assert_eq!(Verdict::Pass.and(Verdict::Fail), Verdict::Fail);
        assert_eq!(Verdict::Skipped.and(Verdict::Pass), Verdict::Pass);
        assert_eq!(Verdict::Skipped.and(Verdict::Skipped), Verdict::Skipped);
    }

    #[test]
    fn target_match() {
        assert!(ResidualReport::matches("n", 0.105, 0.1, 0.1).passed());
        assert!(!ResidualReport::matches("n", 0.12, 0.1, 0.1).passed());
    }
}
