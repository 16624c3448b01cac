//! Energy ledgers for the surface and shell flows, their thin-width limits,
//! and kinematic constraints of moving surfaces.

use serde::{Deserialize, Serialize};

use crate::convergence::ResidualReport;
use crate::error::{Error, Result};
use crate::expansion::{projected_strain, BulkField, NormalLine};
use crate::geometry::{frob, Shape};
use crate::motion::{Motion, MovingSurface};
use crate::quadrature::SurfaceRule;
use crate::tancalc::fields::{SpaceTimePoly, VectorField};
use crate::M3;

/// Resolution of the ledgers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyOptions {
    pub surface_nodes: usize,
    pub normal_nodes: usize,
    /// Time step of the energy derivative.
    pub dt: f64,
    /// Limit-residual bound for certification.
    pub certify_tol: f64,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self {
            surface_nodes: 48,
            normal_nodes: 8,
            dt: 1e-3,
            certify_tol: 1e-6,
        }
    }
}

/// Residual floor for thin-width and bulk defects.
pub const DEFECT_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerTerm {
    pub name: String,
    pub values: Vec<f64>,
}

/// Kinetic energy, its rate and the itemized right-hand side at each time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub label: String,
    /// Shell half-width; `None` for the surface ledger.
    pub width: Option<f64>,
    pub times: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub dedt: Vec<f64>,
    pub terms: Vec<LedgerTerm>,
    /// `dE/dt − Σ terms`.
    pub defect: Vec<f64>,
    pub certified: bool,
    /// Largest limit residual found while certifying.
    pub certification_residual: f64,
}

impl EnergyLedger {
    pub fn term(&self, name: &str) -> Option<&[f64]> {
        self.terms
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.values.as_slice())
    }

    /// Largest `|defect|`; NaN if any entry is NaN.
    pub fn max_defect(&self) -> f64 {
        max_abs(&self.defect)
    }

    /// Largest `|E(t) − E(t₀)|`.
    pub fn kinetic_drift(&self) -> f64 {
        let e0 = self.kinetic.first().copied().unwrap_or(0.0);
        max_abs(&self.kinetic.iter().map(|e| e - e0).collect::<Vec<_>>())
    }

    pub fn is_finite(&self) -> bool {
        self.kinetic
            .iter()
            .chain(&self.dedt)
            .chain(&self.defect)
            .chain(self.terms.iter().flat_map(|t| t.values.iter()))
            .all(|x| x.is_finite())
    }
}

fn max_abs(xs: &[f64]) -> f64 {
    if xs.iter().any(|x| x.is_nan()) {
        return f64::NAN;
    }
    xs.iter().fold(0.0, |a: f64, b| a.max(b.abs()))
}

/// `n` uniform samples of `[t0, t1]`.
pub fn time_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t0];
    }
    (0..n)
        .map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Second-order time derivative of `f` at `t` that stays inside `[0, t_end]`:
/// central where possible, three-point one-sided at the ends.
pub fn time_derivative<F>(f: F, t: f64, dt: f64, t_end: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if dt <= 0.0 || t_end < 2.0 * dt {
        return Err(Error::Config(format!("time step {dt} does not fit in [0, {t_end}]")));
    }
    if t - dt >= -1e-14 && t + dt <= t_end + 1e-14 {
        Ok((f(t + dt)? - f(t - dt)?) / (2.0 * dt))
    } else if t - dt < 0.0 {
        Ok((-3.0 * f(t)? + 4.0 * f(t + dt)? - f(t + 2.0 * dt)?) / (2.0 * dt))
    } else {
        Ok((3.0 * f(t)? - 4.0 * f(t - dt)? + f(t - 2.0 * dt)?) / (2.0 * dt))
    }
}

fn rule_at(ms: &MovingSurface, t: f64, opts: &EnergyOptions) -> Result<SurfaceRule> {
    SurfaceRule::new(&ms.at(t), opts.surface_nodes, opts.normal_nodes)
}

fn line(bulk: &BulkField, rule: &SurfaceRule, n: &crate::quadrature::QuadNode, t: f64) -> Result<NormalLine> {
    bulk.normal_line(&rule.surface, n.point, t)
}

fn strain_sq(m: &M3) -> f64 {
    m.norm_squared()
}

/// Surface integrals at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceIntegrals {
    /// `∫|v|²/2`.
    pub kinetic: f64,
    /// `∫(qH − q¹)V_Γ^N`.
    pub pressure_work: f64,
    /// `∫|P_Γ D_Γ(v) P_Γ|²`.
    pub strain_norm: f64,
    /// `∫∇_Γv : P_Γ D_Γ(v) P_Γ`.
    pub strain_work: f64,
}

pub fn surface_integrals(bulk: &BulkField, rule: &SurfaceRule, t: f64) -> Result<SurfaceIntegrals> {
    let vals: Vec<[f64; 4]> = {
        use rayon::prelude::*;
        rule.nodes
            .par_iter()
            .map(|n| {
                let l = line(bulk, rule, n, t)?;
                let proj = M3::identity() - l.normal * l.normal.transpose();
                let pdp = proj * ((l.grad_v + l.grad_v.transpose()) * 0.5) * proj;
                let w = n.weight();
                Ok([
                    w * 0.5 * l.v.norm_squared(),
                    w * (l.q * l.shape_operator.trace() - l.q1) * l.normal_speed,
                    w * strain_sq(&pdp),
                    w * l.grad_v.component_mul(&pdp).sum(),
                ])
            })
            .collect::<Result<Vec<_>>>()?
    };
    let col = |k: usize| crate::quadrature::pairwise_sum(&vals.iter().map(|v| v[k]).collect::<Vec<_>>());
    Ok(SurfaceIntegrals {
        kinetic: col(0),
        pressure_work: col(1),
        strain_norm: col(2),
        strain_work: col(3),
    })
}

fn surface_kinetic(bulk: &BulkField, t: f64, opts: &EnergyOptions) -> Result<f64> {
    let rule = rule_at(&bulk.ms, t, opts)?;
    rule.integrate(|n| Ok(0.5 * line(bulk, &rule, n, t)?.v.norm_squared()))
}

/// Largest limit residual over a few sample points at the given times.
pub fn certification_residual(bulk: &BulkField, times: &[f64], dt: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in times {
        let s = bulk.ms.at(t);
        for p in s.sample_points(6, 17) {
            worst = worst.max(bulk.limit_residual(p, t, dt)?.norm());
        }
    }
    Ok(worst)
}

/// Surface energy balance `dE/dt = ∫(qH − q¹)V_Γ^N − 2μ₀∫|P_Γ D_Γ(v) P_Γ|²`.
///
/// The derivative is a time difference of quadrature energies. The ledger is
/// certified when the limit residual stays below `opts.certify_tol`.
pub fn surface_energy_balance(bulk: &BulkField, times: &[f64], opts: &EnergyOptions) -> Result<EnergyLedger> {
    let mu = bulk.mode.viscosity();
    let t_end = bulk.ms.t_end;
    let cert_times = [times[0], *times.last().unwrap_or(&times[0])];
    let cert = certification_residual(bulk, &cert_times, 1e-4)?;
    let mut ledger = EnergyLedger {
        label: format!("surface energy on {}", bulk.ms.label),
        width: None,
        times: times.to_vec(),
        kinetic: Vec::new(),
        dedt: Vec::new(),
        terms: vec![
            LedgerTerm {
                name: "pressure_work".into(),
                values: Vec::new(),
            },
            LedgerTerm {
                name: "dissipation".into(),
                values: Vec::new(),
            },
        ],
        defect: Vec::new(),
        certified: cert <= opts.certify_tol,
        certification_residual: cert,
    };
    for &t in times {
        let rule = rule_at(&bulk.ms, t, opts)?;
        let si = surface_integrals(bulk, &rule, t)?;
        let dedt = time_derivative(|tau| surface_kinetic(bulk, tau, opts), t, opts.dt, t_end)?;
        let dissipation = -2.0 * mu * si.strain_norm;
        ledger.kinetic.push(si.kinetic);
        ledger.dedt.push(dedt);
        ledger.terms[0].values.push(si.pressure_work);
        ledger.terms[1].values.push(dissipation);
        ledger.defect.push(dedt - si.pressure_work - dissipation);
    }
    Ok(ledger)
}

/// Shell integrals at one time and width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellIntegrals {
    /// `∫_Ω|u|²/2`.
    pub kinetic: f64,
    /// `−∫_∂Ω p V_ε`.
    pub pressure_work: f64,
    /// `∫_Ω|D(u)|²`.
    pub strain_norm: f64,
    /// `∫_∂Ω (D(u)ν_ε·ν_ε) V_ε`.
    pub boundary_strain: f64,
}

pub fn shell_integrals(bulk: &BulkField, rule: &SurfaceRule, eps: f64, t: f64) -> Result<ShellIntegrals> {
    let prep = |n: &crate::quadrature::QuadNode| line(bulk, rule, n, t);
    let kinetic = rule.integrate_shell_lines(eps, prep, |l, _, rho| Ok(0.5 * l.velocity(rho).norm_squared()))?;
    let strain_norm = rule.integrate_shell_lines(eps, prep, |l, _, rho| Ok(strain_sq(&l.strain(rho)?)))?;
    // on the sheet d = ±ε: ν_ε = ±ν and V_ε = ±V_Γ^N(π)
    let pressure_work = -rule.integrate_boundary_lines(eps, prep, |l, _, rho| {
        Ok(l.pressure(rho) * rho.signum() * l.normal_speed)
    })?;
    let boundary_strain = rule.integrate_boundary_lines(eps, prep, |l, _, rho| {
        Ok((l.strain(rho)? * l.normal).dot(&l.normal) * rho.signum() * l.normal_speed)
    })?;
    Ok(ShellIntegrals {
        kinetic,
        pressure_work,
        strain_norm,
        boundary_strain,
    })
}

fn shell_kinetic(bulk: &BulkField, eps: f64, t: f64, opts: &EnergyOptions) -> Result<f64> {
    let rule = rule_at(&bulk.ms, t, opts)?;
    rule.integrate_shell_lines(
        eps,
        |n| line(bulk, &rule, n, t),
        |l, _, rho| Ok(0.5 * l.velocity(rho).norm_squared()),
    )
}

/// Bulk energy balance on the shell of half-width `eps`:
/// `dE/dt = −∫_∂Ω pV_ε + 2μ₀∫_∂Ω (D(u)ν_ε·ν_ε)V_ε − 2μ₀∫_Ω|D(u)|²`.
/// The first two terms together are the stress work `∫(σν_ε·ν_ε)V_ε`.
pub fn bulk_energy_balance(bulk: &BulkField, eps: f64, times: &[f64], opts: &EnergyOptions) -> Result<EnergyLedger> {
    let mu = bulk.mode.viscosity();
    let t_end = bulk.ms.t_end;
    let names = ["bulk_pressure_work", "bulk_strain_work", "bulk_dissipation"];
    let mut ledger = EnergyLedger {
        label: format!("shell energy on {} (eps = {eps})", bulk.ms.label),
        width: Some(eps),
        times: times.to_vec(),
        kinetic: Vec::new(),
        dedt: Vec::new(),
        terms: names
            .iter()
            .map(|n| LedgerTerm {
                name: (*n).into(),
                values: Vec::new(),
            })
            .collect(),
        defect: Vec::new(),
        certified: true,
        certification_residual: 0.0,
    };
    for &t in times {
        let rule = rule_at(&bulk.ms, t, opts)?;
        let sh = shell_integrals(bulk, &rule, eps, t)?;
        let dedt = time_derivative(|tau| shell_kinetic(bulk, eps, tau, opts), t, opts.dt, t_end)?;
        let terms = [sh.pressure_work, 2.0 * mu * sh.boundary_strain, -2.0 * mu * sh.strain_norm];
        ledger.kinetic.push(sh.kinetic);
        ledger.dedt.push(dedt);
        for (k, v) in terms.iter().enumerate() {
            ledger.terms[k].values.push(*v);
        }
        ledger.defect.push(dedt - terms.iter().sum::<f64>());
    }
    Ok(ledger)
}

/// Bulk identity defect over a width sweep at one time, slope-checked at
/// order two.
pub fn bulk_identity_sweep(bulk: &BulkField, sweep: &[f64], t: f64, opts: &EnergyOptions) -> Result<ResidualReport> {
    let defects = sweep
        .iter()
        .map(|&eps| Ok(bulk_energy_balance(bulk, eps, &[t], opts)?.defect[0].abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ResidualReport::order(
        "bulk energy identity defect",
        sweep.to_vec(),
        defects,
        2.0,
        1.9,
        DEFECT_FLOOR,
    ))
}

/// Per-term thin-width limits: each shell term divided by `2ε` against its
/// surface counterpart, slope-checked at order one.
///
/// Reports, in order: kinetic rate, pressure work, viscous dissipation and
/// boundary strain work (whose surface counterpart is zero).
pub fn thin_width_limits(bulk: &BulkField, sweep: &[f64], t: f64, opts: &EnergyOptions) -> Result<Vec<ResidualReport>> {
    let t_end = bulk.ms.t_end;
    let rule = rule_at(&bulk.ms, t, opts)?;
    let si = surface_integrals(bulk, &rule, t)?;
    let surf_rate = time_derivative(|tau| surface_kinetic(bulk, tau, opts), t, opts.dt, t_end)?;
    let mut rows = vec![Vec::new(); 4];
    for &eps in sweep {
        let sh = shell_integrals(bulk, &rule, eps, t)?;
        let rate = time_derivative(|tau| shell_kinetic(bulk, eps, tau, opts), t, opts.dt, t_end)?;
        let k = 0.5 / eps;
        rows[0].push((k * rate - surf_rate).abs());
        rows[1].push((k * sh.pressure_work - si.pressure_work).abs());
        rows[2].push((k * sh.strain_norm - si.strain_norm).abs());
        rows[3].push((k * sh.boundary_strain).abs());
    }
    let labels = [
        "thin-width kinetic rate",
        "thin-width pressure work",
        "thin-width viscous dissipation",
        "thin-width boundary strain work",
    ];
    Ok(labels
        .iter()
        .zip(rows)
        .map(|(label, r)| ResidualReport::order(label, sweep.to_vec(), r, 1.0, 0.9, DEFECT_FLOOR))
        .collect())
}

/// `|∫qV(J(·,ε) − J(·,−ε)) + 2ε∫qHV|`, zero up to quadrature because `J` is
/// quadratic in `ρ` with odd part `−ρH`.
pub fn jacobian_difference_defect(bulk: &BulkField, eps: f64, t: f64, opts: &EnergyOptions) -> Result<f64> {
    let rule = rule_at(&bulk.ms, t, opts)?;
    let a = rule.integrate(|n| {
        let l = line(bulk, &rule, n, t)?;
        Ok(l.q * l.normal_speed * (n.geo.jacobian(eps) - n.geo.jacobian(-eps)))
    })?;
    let b = rule.integrate(|n| {
        let l = line(bulk, &rule, n, t)?;
        Ok(-2.0 * eps * l.q * n.geo.mean_curvature * l.normal_speed)
    })?;
    Ok((a - b).abs())
}

/// The closed-surface integrals `∫div_Γ(q P_Γv)` and
/// `∫div_Γ(P_Γ D_Γ(v) P_Γ v)`, both zero by the divergence theorem.
pub fn divergence_theorem_terms(bulk: &BulkField, t: f64, opts: &EnergyOptions) -> Result<[f64; 2]> {
    let rule = rule_at(&bulk.ms, t, opts)?;
    let c = &bulk.coeffs;
    let order = (c.v.depth() + 2).max(c.q.depth() + 1).max(3);
    let first = rule.integrate(|n| {
        let cj = rule.surface.jets(n.point, order)?;
        let v = c.v.jet(&cj, t);
        let q = c.q.jet(&cj, t);
        Ok(cj.div_vec(&((cj.proj() * v) * q)).value())
    })?;
    let second = rule.integrate(|n| {
        let cj = rule.surface.jets(n.point, order)?;
        let v = c.v.jet(&cj, t);
        let pdp = projected_strain(&cj, &cj.grad_vec(&v));
        Ok(cj.div_vec(&(pdp * v)).value())
    })?;
    Ok([first, second])
}

/// Largest pointwise `|∇_Γv : P_Γ D_Γ(v) P_Γ − |P_Γ D_Γ(v) P_Γ|²|` over the
/// quadrature nodes.
pub fn frobenius_defect(bulk: &BulkField, t: f64, opts: &EnergyOptions) -> Result<f64> {
    let rule = rule_at(&bulk.ms, t, opts)?;
    let c = &bulk.coeffs;
    let vals = {
        use rayon::prelude::*;
        rule.nodes
            .par_iter()
            .map(|n| {
                let cj = rule.surface.jets(n.point, c.v.depth() + 1)?;
                let g = cj.grad_vec(&c.v.jet(&cj, t));
                let pdp = projected_strain(&cj, &g);
                Ok((frob(&g, &pdp) - frob(&pdp, &pdp)).value().abs())
            })
            .collect::<Result<Vec<f64>>>()?
    };
    Ok(max_abs(&vals))
}

/// `|d/dt∫f − ∫(∂•f + f div_Γw)|` for an ambient space-time field `f`, with
/// `w` the motion's own velocity. The material derivative follows the
/// similarity flow map; the left side differences quadratures in time.
pub fn leibniz_defect(ms: &MovingSurface, f: &SpaceTimePoly, t: f64, opts: &EnergyOptions) -> Result<f64> {
    let integral = |tau: f64| -> Result<f64> {
        let rule = rule_at(ms, tau, opts)?;
        rule.integrate(|n| Ok(f.eval(&n.geo.point, tau)))
    };
    let lhs = time_derivative(integral, t, opts.dt, ms.t_end)?;
    let rule = rule_at(ms, t, opts)?;
    let w = ms.velocity_field();
    let sim = |tau: f64| ms.motion.similarity(&ms.base.transform, tau);
    let now = sim(t);
    let (fwd, bwd) = (sim(t + opts.dt), sim(t - opts.dt));
    let rhs = rule.integrate(|n| {
        let y = n.geo.point;
        let reference = now.apply_inverse(&y);
        let material = (f.eval(&fwd.apply(&reference), t + opts.dt) - f.eval(&bwd.apply(&reference), t - opts.dt))
            / (2.0 * opts.dt);
        let cj = rule.surface.jets(n.point, 1)?;
        let div = cj.div_vec(&w.jet(&cj, t)).value();
        Ok(material + f.eval(&y, t) * div)
    })?;
    Ok((lhs - rhs).abs())
}

/// Leibniz defect over a time-step sweep, slope-checked at order two.
pub fn leibniz_sweep(ms: &MovingSurface, f: &SpaceTimePoly, t: f64, steps: &[f64], opts: &EnergyOptions) -> Result<ResidualReport> {
    let defects = steps
        .iter()
        .map(|&dt| leibniz_defect(ms, f, t, &EnergyOptions { dt, ..*opts }))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ResidualReport::order(
        "Leibniz rule defect",
        steps.to_vec(),
        defects,
        2.0,
        1.9,
        1e-11,
    ))
}

/// Area, total Gauss curvature and shell volume of `Γ(t)` across a time grid,
/// with `d|Γ|/dt` against `∫div_Γw` for the motion velocity `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicAudit {
    pub label: String,
    pub rigid: bool,
    pub times: Vec<f64>,
    pub width: f64,
    pub area: Vec<f64>,
    pub gauss_integral: Vec<f64>,
    pub shell_volume: Vec<f64>,
    pub area_rate: Vec<f64>,
    pub divergence_integral: Vec<f64>,
    /// `8πRṘ` for a breathing sphere.
    pub expected_area_rate: Option<Vec<f64>>,
}

impl KinematicAudit {
    fn drift(xs: &[f64]) -> f64 {
        let x0 = xs.first().copied().unwrap_or(0.0);
        max_abs(&xs.iter().map(|x| x - x0).collect::<Vec<_>>())
    }

    pub fn area_drift(&self) -> f64 {
        Self::drift(&self.area)
    }

    pub fn gauss_drift(&self) -> f64 {
        Self::drift(&self.gauss_integral)
    }

    pub fn volume_drift(&self) -> f64 {
        Self::drift(&self.shell_volume)
    }

    /// Largest `|d|Γ|/dt − ∫div_Γw|`.
    pub fn leibniz_gap(&self) -> f64 {
        max_abs(
            &self
                .area_rate
                .iter()
                .zip(&self.divergence_integral)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
    }

    /// Largest relative gap between `d|Γ|/dt` and its closed form.
    pub fn area_rate_rel_error(&self) -> Option<f64> {
        self.expected_area_rate.as_ref().map(|e| {
            max_abs(
                &self
                    .area_rate
                    .iter()
                    .zip(e)
                    .map(|(a, b)| (a - b) / b.abs().max(1e-300))
                    .collect::<Vec<_>>(),
            )
        })
    }
}

pub fn kinematic_audit(ms: &MovingSurface, times: &[f64], width: f64, opts: &EnergyOptions) -> Result<KinematicAudit> {
    let area_at = |tau: f64| Ok(rule_at(ms, tau, opts)?.area());
    let w = ms.velocity_field();
    let mut out = KinematicAudit {
        label: ms.label.clone(),
        rigid: ms.motion.is_rigid(),
        times: times.to_vec(),
        width,
        area: Vec::new(),
        gauss_integral: Vec::new(),
        shell_volume: Vec::new(),
        area_rate: Vec::new(),
        divergence_integral: Vec::new(),
        expected_area_rate: None,
    };
    for &t in times {
        let rule = rule_at(ms, t, opts)?;
        out.area.push(rule.area());
        out.gauss_integral.push(rule.gauss_bonnet().integral);
        out.shell_volume.push(rule.shell_volume(width)?);
        out.area_rate.push(time_derivative(area_at, t, opts.dt, ms.t_end)?);
        out.divergence_integral.push(rule.integrate(|n| {
            let cj = rule.surface.jets(n.point, 1)?;
            Ok(cj.div_vec(&w.jet(&cj, t)).value())
        })?);
    }
    if let (Motion::Breathe { amp }, Shape::Ellipsoid { a, b, c }) = (ms.motion, ms.base.shape()) {
        if a == b && b == c {
            let r0 = a * ms.base.transform.scale;
            out.expected_area_rate = Some(
                times
                    .iter()
                    .map(|&t| {
                        let r = r0 * (1.0 + amp * t.sin());
                        let rdot = r0 * amp * t.cos();
                        8.0 * std::f64::consts::PI * r * rdot
                    })
                    .collect(),
            );
        }
    }
    Ok(out)
}
