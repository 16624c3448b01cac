//! Chart-intrinsic tangential calculus on jets.
//!
//! All operators act on jets of the chart coordinates, so each tangential
//! derivative lowers the jet order by one. Request a [`ChartJets`] whose order
//! covers the field's own depth plus the number of derivatives taken.

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};
use crate::{JM, JV, M3, V3};

use super::surface::{Similarity, SurfacePatch, SurfacePoint};
use super::GeometryEval;

pub fn jv_value(v: &JV) -> V3 {
    V3::new(v[0].value(), v[1].value(), v[2].value())
}

pub fn jm_value(m: &JM) -> M3 {
    M3::from_fn(|i, j| m[(i, j)].value())
}

pub fn jv_const(v: &V3) -> JV {
    JV::new(v[0].into(), v[1].into(), v[2].into())
}

pub fn jm_const(m: &M3) -> JM {
    JM::from_fn(|i, j| m[(i, j)].into())
}

pub fn outer(a: &JV, b: &JV) -> JM {
    JM::from_fn(|i, j| a[i] * b[j])
}

pub fn dot(a: &JV, b: &JV) -> Jet {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &JV, b: &JV) -> JV {
    JV::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

pub fn trace(m: &JM) -> Jet {
    m[(0, 0)] + m[(1, 1)] + m[(2, 2)]
}

/// Frobenius inner product `F : G = tr(FᵀG)`.
pub fn frob(f: &JM, g: &JM) -> Jet {
    let mut acc = Jet::constant(0.0);
    for i in 0..3 {
        for j in 0..3 {
            acc += f[(i, j)] * g[(i, j)];
        }
    }
    acc
}

/// Chart jets of the embedding and its frame at one surface point.
#[derive(Clone, Debug)]
pub struct ChartJets {
    pub point: SurfacePoint,
    pub order: i8,
    /// Position, at the requested order.
    pub mu: JV,
    /// `∂₁μ, ∂₂μ`.
    pub tangents: [JV; 2],
    /// Dual basis `aⁱ = gⁱʲ ∂ⱼμ`, so that `∇_Γf = ∂ᵢf aⁱ`.
    pub dual: [JV; 2],
    /// Outward unit normal.
    pub nu: JV,
    /// `√det g`.
    pub area_element: Jet,
    /// `∂₁₁μ, ∂₁₂μ, ∂₂₂μ`.
    second: [JV; 3],
}

impl ChartJets {
    pub(crate) fn on_patch(
        patch: &SurfacePatch,
        transform: &Similarity,
        patch_index: usize,
        s: [f64; 2],
        order: i8,
    ) -> Result<Self> {
        let order = order.clamp(1, MAX_ORDER);
        let point = SurfacePoint {
            patch: patch_index,
            s,
        };
        let s1 = Jet::variable(s[0], 0, order);
        let s2 = Jet::variable(s[1], 1, order);
        let mu = transform.apply_jet(&patch.map_jet(s1, s2));
        let d1 = mu.map(|c| c.deriv(0));
        let d2 = mu.map(|c| c.deriv(1));
        let n = cross(&d1, &d2);
        let area_element = dot(&n, &n).sqrt();
        let scale2 = transform.scale * transform.scale;
        if !(area_element.value() > 1e-10 * scale2) {
            return Err(Error::DegenerateChart(point));
        }
        let nu = n * (area_element.recip() * patch.orientation);
        let g11 = dot(&d1, &d1);
        let g12 = dot(&d1, &d2);
        let g22 = dot(&d2, &d2);
        let inv_det = (g11 * g22 - g12 * g12).recip();
        let (h11, h12, h22) = (g22 * inv_det, -g12 * inv_det, g11 * inv_det);
        let dual = [d1 * h11 + d2 * h12, d1 * h12 + d2 * h22];
        let second = [
            d1.map(|c| c.deriv(0)),
            d1.map(|c| c.deriv(1)),
            d2.map(|c| c.deriv(1)),
        ];
        Ok(Self {
            point,
            order,
            mu,
            tangents: [d1, d2],
            dual,
            nu,
            area_element,
            second,
        })
    }

    pub fn position(&self) -> V3 {
        jv_value(&self.mu)
    }

    pub fn normal(&self) -> V3 {
        jv_value(&self.nu)
    }

    pub fn proj(&self) -> JM {
        JM::identity() - outer(&self.nu, &self.nu)
    }

    /// `∇_Γf = g^{ij} ∂ᵢf ∂ⱼμ`.
    pub fn grad(&self, f: &Jet) -> JV {
        self.dual[0] * f.deriv(0) + self.dual[1] * f.deriv(1)
    }

    /// `(∇_ΓG)ᵢⱼ = ∂ᵢᵗᵃⁿGⱼ`.
    pub fn grad_vec(&self, g: &JV) -> JM {
        let cols = [self.grad(&g[0]), self.grad(&g[1]), self.grad(&g[2])];
        JM::from_fn(|i, j| cols[j][i])
    }

    pub fn div_vec(&self, g: &JV) -> Jet {
        let mut acc = Jet::constant(0.0);
        for k in 0..3 {
            acc += self.grad(&g[k])[k];
        }
        acc
    }

    /// Column convention `[div_ΓM]ⱼ = Σᵢ ∂ᵢᵗᵃⁿMᵢⱼ`.
    pub fn div_mat(&self, m: &JM) -> JV {
        let mut out = JV::zeros();
        for j in 0..3 {
            let mut acc = Jet::constant(0.0);
            for i in 0..3 {
                acc += self.grad(&m[(i, j)])[i];
            }
            out[j] = acc;
        }
        out
    }

    pub fn lap(&self, f: &Jet) -> Jet {
        self.div_vec(&self.grad(f))
    }

    pub fn lap_vec(&self, g: &JV) -> JV {
        JV::new(self.lap(&g[0]), self.lap(&g[1]), self.lap(&g[2]))
    }

    /// `(∇²_Γf)ᵢⱼ = ∂ᵢᵗᵃⁿ∂ⱼᵗᵃⁿf`.
    pub fn hessian(&self, f: &Jet) -> JM {
        self.grad_vec(&self.grad(f))
    }

    /// Weingarten map `A = −∇_Γν` from the fundamental forms:
    /// `A = Σ Lₖₘ aᵏ ⊗ aᵐ` with `Lₖₘ = ν·∂ₖₘμ`.
    pub fn shape_operator(&self) -> JM {
        let l11 = dot(&self.nu, &self.second[0]);
        let l12 = dot(&self.nu, &self.second[1]);
        let l22 = dot(&self.nu, &self.second[2]);
        let [a1, a2] = &self.dual;
        outer(a1, a1) * l11 + (outer(a1, a2) + outer(a2, a1)) * l12 + outer(a2, a2) * l22
    }

    pub fn mean_curvature(&self) -> Jet {
        trace(&self.shape_operator())
    }

    /// Sum of the principal 2×2 minors of `A`, i.e. `κ₁κ₂`.
    pub fn gauss_curvature(&self) -> Jet {
        gauss_from_shape(&self.shape_operator())
    }

    /// Orthonormal tangent frame from Gram–Schmidt on `∂₁μ, ∂₂μ`.
    pub fn frame(&self) -> [JV; 2] {
        let [d1, d2] = &self.tangents;
        let e1 = *d1 * dot(d1, d1).sqrt().recip();
        let w = *d2 - e1 * dot(&e1, d2);
        let e2 = w * dot(&w, &w).sqrt().recip();
        [e1, e2]
    }

    /// Pointwise geometry; needs order ≥ 2.
    pub fn geometry(&self) -> GeometryEval {
        let a_jet = self.shape_operator();
        let shape_operator = jm_value(&a_jet);
        let nu = self.normal();
        let mean_curvature = shape_operator.trace();
        let gauss_curvature = gauss_from_shape(&a_jet).value();
        // principal curvatures from A restricted to an orthonormal tangent frame
        let e1 = jv_value(&self.tangents[0]).normalize();
        let e2 = nu.cross(&e1);
        let b11 = e1.dot(&(shape_operator * e1));
        let b22 = e2.dot(&(shape_operator * e2));
        let b12 = e1.dot(&(shape_operator * e2));
        let root = (0.5 * (b11 - b22)).hypot(b12);
        let mid = 0.5 * (b11 + b22);
        GeometryEval {
            point: self.position(),
            normal: nu,
            proj: M3::identity() - nu * nu.transpose(),
            shape_operator,
            mean_curvature,
            gauss_curvature,
            kappa: [mid - root, mid + root],
            area_element: self.area_element.value(),
        }
    }
}

fn gauss_from_shape(a: &JM) -> Jet {
    let minor = |i: usize, j: usize| a[(i, i)] * a[(j, j)] - a[(i, j)] * a[(j, i)];
    minor(0, 1) + minor(0, 2) + minor(1, 2)
}
