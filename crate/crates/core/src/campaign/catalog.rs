//! Static catalog of every check the campaign can run.
//!
//! Anchors are verbatim LaTeX fragments of the formula a check exercises, or
//! [`PLUMBING`] for checks that only test infrastructure.

use serde::{Deserialize, Serialize};

use super::config::Suite;

/// Anchor tag for checks with no source formula.
pub const PLUMBING: &str = "plumbing";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckInfo {
    pub id: &'static str,
    pub module: &'static str,
    pub suite: Suite,
    pub anchor: &'static str,
    /// Plain-text statement of what is compared.
    pub formula: &'static str,
}

macro_rules! check {
    ($id:literal, $module:literal, $suite:ident, $anchor:literal, $formula:literal) => {
        CheckInfo {
            id: $id,
            module: $module,
            suite: Suite::$suite,
            anchor: $anchor,
            formula: $formula,
        }
    };
}

static CATALOG: &[CheckInfo] = &[
    // geometry
    check!(
        "weingarten_invariants",
        "geometry",
        Geometry,
        r"A(y)P_\Gamma(y) = P_\Gamma(y)A(y) = A(y)",
        "|ν| = 1, Pν = 0, P² = P, Aν = 0, AP = PA = A, A = Aᵀ, H = tr A = κ₁ + κ₂ at random points"
    ),
    check!(
        "shell_jacobian",
        "geometry",
        Geometry,
        r"J(y,\rho) := \{1-\rho\kappa_1(y)\}\{1-\rho\kappa_2(y)\} = 1-\rho H(y)+\rho^2 K(y)",
        "det(I − ρA) = (1 − ρκ₁)(1 − ρκ₂) = 1 − ρH + ρ²K for ρ in the width sweep"
    ),
    check!(
        "distance_hessian",
        "geometry",
        Geometry,
        r"A(y) = -\nabla^2d(y)",
        "second differences of d against −A(I − dA)⁻¹ (= −A on Γ) at tubular points; order 2 in the step"
    ),
    check!(
        "closest_point_gradient",
        "geometry",
        Geometry,
        r"P_\Gamma(\pi,t)+d(x,t)A(\pi,t)+R(d^2)",
        "differenced ∇π(y + dν) against P + dA; defect order 2 in d"
    ),
    // tangential calculus
    check!(
        "structural",
        "tancalc",
        Operators,
        r"H := -\mathrm{div}_\Gamma\nu =  \mathrm{tr}[A]",
        "ν·∇_Γf = 0, νᵀ∇_Γv = 0, ∇_Γx = P, div_Γx = 2, Δ_Γx = Hν"
    ),
    check!(
        "exchange",
        "tancalc",
        Operators,
        r"\partial_i^{tan}\partial_j^{tan}f-\partial_j^{tan}\partial_i^{tan}f = [A\nabla_\Gamma f]_i\nu_j-[A\nabla_\Gamma f]_j\nu_i",
        "∂ᵢ∂ⱼf − ∂ⱼ∂ᵢf = [A∇_Γf]ᵢνⱼ − [A∇_Γf]ⱼνᵢ"
    ),
    check!(
        "viscous_stress",
        "tancalc",
        Operators,
        r"2\mathrm{div}_\Gamma(P_\Gamma D^{tan}(v)P_\Gamma) = 2\mathrm{tr}[A\nabla_\Gamma v]\nu+P_\Gamma(\Delta_\Gamma v)+\nabla_\Gamma(\mathrm{div}_\Gamma v)+H(\nabla_\Gamma v)\nu",
        "2 div_Γ(P D(v) P) = 2 tr[A∇_Γv]ν + PΔ_Γv + ∇_Γ div_Γv + H(∇_Γv)ν for any v"
    ),
    check!(
        "gauss_formula",
        "tancalc",
        Operators,
        r"(Y\cdot\nabla_\Gamma)X = \overline{\nabla}_YX+(AX\cdot Y)\nu",
        "(Y·∇_Γ)X = P(Y·∇_Γ)X + (AX·Y)ν for tangential X, Y"
    ),
    check!(
        "bochner",
        "tancalc",
        Operators,
        r"P_\Gamma(\Delta_\Gamma X)+A^2X",
        "orthonormal-frame Bochner Laplacian of tangential X against PΔ_ΓX + A²X"
    ),
    check!(
        "killing_stress",
        "tancalc",
        Operators,
        r"2P_\Gamma\mathrm{div}_\Gamma(P_\Gamma D^{tan}(v)P_\Gamma) = \Delta_Bv+Kv",
        "2P div_Γ(P D(v) P) = Δ_Bv + Kv for tangential divergence-free v"
    ),
    check!(
        "viscous_limit",
        "tancalc",
        Operators,
        r"2\mathrm{div}_\Gamma(P_\Gamma D^{tan}(v)P_\Gamma) = \Delta_\Gamma v+H(\nabla_\Gamma v)\nu",
        "2 div_Γ(P D(v) P) = Δ_Γv + H(∇_Γv)ν for tangential divergence-free v with v·∇_ΓH = 0"
    ),
    check!(
        "normal_flux_divergence",
        "tancalc",
        Operators,
        r"(\Delta_\Gamma v)\cdot\nu-\mathrm{tr}[A^T\nabla_\Gamma v]",
        "div_Γ[(∇_Γv)ν] = (Δ_Γv)·ν − tr[A∇_Γv] for tangential v"
    ),
    check!(
        "cayley_hamilton",
        "tancalc",
        Operators,
        r"HAv = Kv+A^2v",
        "HAv = Kv + A²v for tangential v"
    ),
    check!(
        "extension_independence",
        "tancalc",
        Operators,
        r"\nabla_\Gamma f(y) := P_\Gamma(y)\nabla\tilde{f}(y)",
        "differenced ∇_Γ of f∘π and of (f∘π)(1 + d²) + d·g agree; gap order 2 in the step"
    ),
    // quadrature
    check!(
        "surface_area",
        "quadrature",
        Quadrature,
        r"|\Gamma(t)|",
        "quadrature area against the closed form (4πR², 4π²Rr)"
    ),
    check!(
        "gauss_bonnet",
        "quadrature",
        Quadrature,
        r"K := \kappa_1\kappa_2",
        "∫K = 2πχ"
    ),
    check!(
        "shell_volume",
        "quadrature",
        Quadrature,
        r"\int_{\Omega_\varepsilon}f(x)\,dx = \int_{\Gamma}\int_{-\varepsilon}^\varepsilon f(y+\rho\nu(y))J(y,\rho)\,d\rho\,d\mathcal{H}^2(y)",
        "shell volume by surface × normal Gauss–Legendre against the closed form"
    ),
    check!(
        "shell_volume_expansion",
        "quadrature",
        Quadrature,
        r"2\varepsilon|\Gamma(t)|+\frac{2}{3}\varepsilon^3\int_{\Gamma(t)}K\,d\mathcal{H}^2",
        "shell volume against 2ε|Γ| + (2/3)ε³∫K"
    ),
    check!(
        "measure_transform",
        "quadrature",
        Quadrature,
        r"\sqrt{\det\theta^\rho(s)} = J(\mu(s),\rho)\sqrt{\det\theta(s)}",
        "offset-surface integral with its own area element against ∫f(y + ρν)J(y, ρ)"
    ),
    check!(
        "stokes_integral",
        "quadrature",
        Quadrature,
        r"\int_{\Gamma(t)}\mathrm{div}_\Gamma v\,d\mathcal{H}^2",
        "∫div_ΓX = 0 for tangential X on a closed surface"
    ),
    // limit equations
    check!(
        "limit_equations",
        "expansion",
        Limits,
        r"\partial^\bullet_vv+\nabla_\Gamma q+q^1\nu",
        "∂•v + ∇_Γq + q¹ν − 2μ div_Γ(P D(v) P) = 0 and div_Γv = 0 at d = 0"
    ),
    check!(
        "bulk_residual_order",
        "expansion",
        Limits,
        r"v(\pi(x,t),t)+d(x,t)v^1(\pi(x,t),t)+R(d(x,t)^2)",
        "bulk momentum and continuity residuals of the synthesized field on d = ±ε; order 1 in ε"
    ),
    check!(
        "navier_conditions",
        "expansion",
        Limits,
        r"[D(u)\nu_\varepsilon]_{\text{tan}}",
        "u·ν_ε − V_ε and P D(u)ν_ε on d = ±ε; order 2 in ε"
    ),
    check!(
        "normal_residual_calibration",
        "expansion",
        Limits,
        r"q^1 = - \partial^\bullet_vv\cdot\nu",
        "a q¹ bump of size b yields a normal momentum residual b at d = 0"
    ),
    check!(
        "boundary_strain_audit",
        "expansion",
        Limits,
        r"S^1(\pi,t)\nu(\pi,t) = 0",
        "PSν, S¹ν and the normal parts of v¹, v² vanish for v¹ = −(∇_Γv)ν, v² = 0"
    ),
    check!(
        "first_order_continuity",
        "expansion",
        Limits,
        r"\mathrm{tr}[A\nabla_\Gamma v]+\mathrm{div}_\Gamma v^1 = 0",
        "tr[A∇_Γv] + div_Γv¹ = 0 and 2tr[A∇_Γv] = (Δ_Γv)·ν for curl fields of g(H)"
    ),
    check!(
        "first_order_velocity",
        "expansion",
        Limits,
        r"v^1 = -2P_\Gamma D^{tan}(v)\nu = -(\nabla_\Gamma v)\nu",
        "−(∇_Γv)ν = −2P D(v)ν and is tangential"
    ),
    check!(
        "matrix_divergence",
        "expansion",
        Limits,
        r"\mathrm{div}_\Gamma S(\pi(x,t))+\bigl(S^1(\pi(x,t))\bigr)^T\nu(\pi,t)+R(d(x,t))",
        "differenced div[S(π) + dS¹(π)] against div_ΓS + (S¹)ᵀν; order 1 in d"
    ),
    check!(
        "normal_pressure",
        "expansion",
        Limits,
        r"\{(v\cdot\nabla)v\}\cdot\nu = -Av\cdot v",
        "(−(v·∇_Γ)v + 2μ div_Γ(P D(v) P))·ν = −Av·v + 2μ tr[A∇_Γv] on a stationary surface"
    ),
    // energy
    check!(
        "killing_dissipation",
        "energy",
        Energy,
        r"-2\mu_0\int_{\Gamma(t)}|P_\Gamma D^{tan}(v)P_\Gamma|^2\,d\mathcal{H}^2",
        "surface dissipation vanishes and kinetic energy stays constant for a Killing flow"
    ),
    check!(
        "surface_energy_balance",
        "energy",
        Energy,
        r"\int_{\Gamma(t)}(qH-q^1)V_\Gamma^N\,d\mathcal{H}^2",
        "d/dt∫|v|²/2 = ∫(qH − q¹)V − 2μ∫|P D(v) P|²"
    ),
    check!(
        "bulk_energy_identity",
        "energy",
        Energy,
        r"-\int_{\partial\Omega_\varepsilon(t)}pV_\varepsilon^N\,d\mathcal{H}^2",
        "d/dt∫|u|²/2 = −∫pV_ε + 2μ∫(Dν_ε·ν_ε)V_ε − 2μ∫|D|² on the shell; order 2 in ε"
    ),
    check!(
        "thin_width_kinetic",
        "energy",
        Energy,
        r"2\varepsilon\frac{d}{dt}\int_{\Gamma(t)}\frac{|v(y,t)|^2}{2}\,d\mathcal{H}^2(y)+O(\varepsilon^2)",
        "(1/2ε) d/dt∫_Ω|u|²/2 against d/dt∫_Γ|v|²/2; order 1 in ε"
    ),
    check!(
        "thin_width_pressure",
        "energy",
        Energy,
        r"-2\varepsilon\int_{\Gamma(t)}\{q(y,t)H(y,t)-q^1(y,t)\}V_\Gamma^N(y,t)\,d\mathcal{H}^2(y)+O(\varepsilon^2)",
        "(1/2ε)(−∫_{∂Ω}pV_ε) against ∫(qH − q¹)V; order 1 in ε"
    ),
    check!(
        "thin_width_viscous",
        "energy",
        Energy,
        r"2\varepsilon\int_{\Gamma(t)}|(P_\Gamma D^{tan}(v)P_\Gamma)(y,t)|^2\,d\mathcal{H}^2(y)+O(\varepsilon^2)",
        "(1/2ε)∫_Ω|D(u)|² against ∫_Γ|P D(v) P|²; order 1 in ε"
    ),
    check!(
        "thin_width_strain",
        "energy",
        Energy,
        r"\int_{\partial\Omega_\varepsilon(t)}[(D(u)\nu_\varepsilon\cdot\nu_\varepsilon)V_\varepsilon^N](x,t)\,d\mathcal{H}^2(x) = O(\varepsilon^2)",
        "(1/2ε)∫_{∂Ω}(D(u)ν_ε·ν_ε)V_ε against 0; order 1 in ε"
    ),
    check!(
        "jacobian_difference",
        "energy",
        Energy,
        r"-2\varepsilon H(y,t)+O(\varepsilon^2)",
        "∫qV(J(·,ε) − J(·,−ε)) against −2ε∫qHV"
    ),
    check!(
        "stokes_dropped_terms",
        "energy",
        Energy,
        r"\mathrm{div}_\Gamma(P_\Gamma D^{tan}(v)P_\Gamma v)",
        "∫div_Γ(qPv) and ∫div_Γ(P D(v) P v) vanish"
    ),
    check!(
        "frobenius_identity",
        "energy",
        Energy,
        r"\nabla_\Gamma v:P_\Gamma D^{tan}(v)P_\Gamma = D^{tan}(v):P_\Gamma D^{tan}(v)P_\Gamma = |P_\Gamma D^{tan}(v)P_\Gamma|^2",
        "∇_Γv : P D(v) P = |P D(v) P|² pointwise"
    ),
    check!(
        "leibniz_rule",
        "energy",
        Energy,
        r"\int_{\Gamma(t)}\frac{|v|^2}{2}\,\mathrm{div}_\Gamma v\,d\mathcal{H}^2",
        "d/dt∫f = ∫(∂•f + f div_Γw) for random space-time f; order 2 in Δt"
    ),
    // kinematics
    check!(
        "area_preservation",
        "energy",
        Kinematics,
        r"\frac{d}{dt}|\Gamma(t)| = 0",
        "|Γ(t)| constant across the time grid for rigid motions"
    ),
    check!(
        "breathing_area_rate",
        "energy",
        Kinematics,
        r"\frac{d}{dt}|\Gamma(t)|",
        "d|Γ|/dt of a breathing sphere against 8πRṘ; flags the motion as not area preserving"
    ),
    check!(
        "gauss_curvature_constancy",
        "energy",
        Kinematics,
        r"\frac{d}{dt}\int_{\Gamma(t)}K\,d\mathcal{H}^2 = 0",
        "∫K constant across the time grid"
    ),
    check!(
        "shell_volume_constancy",
        "energy",
        Kinematics,
        r"\frac{d}{dt}|\Omega_\varepsilon(t)|",
        "|Ω_ε(t)| constant across the time grid for rigid motions"
    ),
    check!(
        "area_divergence",
        "energy",
        Kinematics,
        r"\frac{d}{dt}\int_{\Gamma(t)}1\,d\mathcal{H}^2 = \int_{\Gamma(t)}\mathrm{div}_\Gamma v\,d\mathcal{H}^2",
        "time-differenced area against ∫div_Γw for the motion velocity w"
    ),
    check!(
        "composite_gradient",
        "motion",
        Kinematics,
        r"\nabla_\Gamma f(\pi,t)+d(x,t)[A\nabla_\Gamma f](\pi,t)+R(d(x,t)^2)",
        "differenced ∇(f∘π) against ∇_Γf + dA∇_Γf; order 2 in d"
    ),
    check!(
        "composite_time",
        "motion",
        Kinematics,
        r"\partial^\circ f(\pi,t)+d(x,t)[(\nabla_\Gamma V_\Gamma^N\cdot\nabla_\Gamma)f](\pi,t)+R(d(x,t)^2)",
        "differenced ∂ₜ(f∘π) against ∂°f + d∇_ΓV·∇_Γf; order 2 in d"
    ),
    check!(
        "projection_rate",
        "motion",
        Kinematics,
        r"V_\Gamma^N(\pi,t)\nu(\pi,t)+d(x,t)\nabla_\Gamma V_\Gamma^N(\pi,t)+R(d)",
        "differenced ∂ₜπ against Vν + d∇_ΓV; order 2 in d"
    ),
    check!(
        "distance_rate",
        "motion",
        Kinematics,
        r"\partial_td(y,t) &= -V_\Gamma^N(y,t)",
        "differenced ∂ₜd(y + dν) against −V(y)"
    ),
    check!(
        "material_derivative",
        "motion",
        Kinematics,
        r"\partial^\bullet_vf = \partial^\circ f+v^T\cdot\nabla_\Gamma f",
        "∂°f + vᵀ·∇_Γf against differencing f along the RK4 flow map; order 2 in Δt"
    ),
    // plumbing
    check!(
        "campaign_determinism",
        "campaign",
        Quadrature,
        "plumbing",
        "two evaluations of the same quadrature give bit-identical results"
    ),
];

pub fn catalog() -> &'static [CheckInfo] {
    CATALOG
}

pub fn lookup(id: &str) -> Option<&'static CheckInfo> {
    CATALOG.iter().find(|c| c.id == id)
}

/// Entries whose module equals `module`; empty for unknown modules.
pub fn by_module(module: &str) -> Vec<&'static CheckInfo> {
    CATALOG.iter().filter(|c| c.module == module).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ids_are_unique_and_anchored() {
        let mut seen = HashSet::new();
        for c in catalog() {
            assert!(seen.insert(c.id), "duplicate {}", c.id);
            assert!(!c.anchor.is_empty() && !c.formula.is_empty());
        }
    }

    #[test]
    fn module_filter() {
        assert_eq!(by_module("tancalc").len(), 10);
        assert!(by_module("nonexistent").is_empty());
        assert_eq!(lookup("killing_stress").unwrap().module, "tancalc");
        assert!(lookup("nope").is_none());
    }
}
