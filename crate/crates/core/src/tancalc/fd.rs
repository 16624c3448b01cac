//! Tangential derivatives by central differences of the constant-normal
//! extension `f̄(x) = f(π(x))`, projected onto the tangent plane.
//!
//! Values are passed around as flat `Vec<f64>` so one closest-point solve per
//! stencil node serves every component of a bundle of quantities.

use crate::error::Result;
use crate::geometry::{ClosedSurface, SurfacePoint, TubularPoint};
use crate::{M3, V3};

/// Step sweep used for order-of-accuracy fits.
pub const H_SWEEP: [f64; 4] = [4e-3, 2e-3, 1e-3, 5e-4];

/// Ratio between the outer and inner step of nested second differences.
pub const NESTED_RATIO: f64 = 10.0;

pub type Partials = [Vec<f64>; 3];

#[derive(Clone, Copy)]
pub struct FiniteDiff<'a> {
    pub surface: &'a ClosedSurface,
    pub h: f64,
}

impl<'a> FiniteDiff<'a> {
    pub fn new(surface: &'a ClosedSurface, h: f64) -> Self {
        Self { surface, h }
    }

    /// Same surface, step scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            surface: self.surface,
            h: self.h * factor,
        }
    }

    /// Central differences `∂ₖg(x)` of an ambient function that sees the
    /// tubular coordinates of each stencil node.
    pub fn ambient_partials(
        &self,
        x: &V3,
        hint: SurfacePoint,
        g: &dyn Fn(&TubularPoint) -> Result<Vec<f64>>,
    ) -> Result<Partials> {
        let mut out: Partials = Default::default();
        for (k, slot) in out.iter_mut().enumerate() {
            let mut e = V3::zeros();
            e[k] = self.h;
            let plus = g(&self.surface.closest_point(&(x + e), Some(hint))?)?;
            let minus = g(&self.surface.closest_point(&(x - e), Some(hint))?)?;
            *slot = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * self.h))
                .collect();
        }
        Ok(out)
    }

    /// `∂ᵢᵗᵃⁿf` at `p` for a function defined on the surface.
    pub fn tangential_partials(
        &self,
        p: SurfacePoint,
        f: &dyn Fn(SurfacePoint) -> Result<Vec<f64>>,
    ) -> Result<Partials> {
        let cj = self.surface.jets(p, 1)?;
        let amb = self.ambient_partials(&cj.position(), p, &|tp| f(tp.point))?;
        Ok(project(&cj.normal(), amb))
    }

    /// Tangential gradient of an arbitrary ambient extension, evaluated on the
    /// surface at `p`.
    pub fn extension_gradient(
        &self,
        p: SurfacePoint,
        g: &dyn Fn(&TubularPoint) -> Result<f64>,
    ) -> Result<V3> {
        let cj = self.surface.jets(p, 1)?;
        let amb = self.ambient_partials(&cj.position(), p, &|tp| Ok(vec![g(tp)?]))?;
        let t = project(&cj.normal(), amb);
        Ok(V3::new(t[0][0], t[1][0], t[2][0]))
    }

    pub fn grad(&self, p: SurfacePoint, f: &dyn Fn(SurfacePoint) -> Result<f64>) -> Result<V3> {
        let t = self.tangential_partials(p, &|q| Ok(vec![f(q)?]))?;
        Ok(V3::new(t[0][0], t[1][0], t[2][0]))
    }

    /// `(∇_ΓG)ᵢⱼ = ∂ᵢᵗᵃⁿGⱼ`.
    pub fn grad_vec(&self, p: SurfacePoint, f: &dyn Fn(SurfacePoint) -> Result<V3>) -> Result<M3> {
        let t = self.tangential_partials(p, &|q| Ok(f(q)?.as_slice().to_vec()))?;
        Ok(grad_block(&t, 0))
    }
}

/// `Tᵢ = Σₖ Pᵢₖ ∂ₖ` with `P = I − ν⊗ν`.
pub fn project(nu: &V3, amb: Partials) -> Partials {
    let n = amb[0].len();
    let mut out: Partials = Default::default();
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = (0..n)
            .map(|c| amb[i][c] - nu[i] * (0..3).map(|k| nu[k] * amb[k][c]).sum::<f64>())
            .collect();
    }
    out
}

/// Gradient of a packed 3-vector: `Mᵢⱼ = Tᵢ[off + j]`.
pub fn grad_block(t: &Partials, off: usize) -> M3 {
    M3::from_fn(|i, j| t[i][off + j])
}

/// Column divergence of a packed row-major matrix: `Σᵢ Tᵢ[off + 3i + j]`.
pub fn div_block(t: &Partials, off: usize) -> V3 {
    V3::from_fn(|j, _| (0..3).map(|i| t[i][off + 3 * i + j]).sum())
}

/// Divergence of a packed 3-vector.
pub fn div_vec_block(t: &Partials, off: usize) -> f64 {
    (0..3).map(|i| t[i][off + i]).sum()
}

/// Gradient of a packed scalar.
pub fn grad_scalar_block(t: &Partials, off: usize) -> V3 {
    V3::new(t[0][off], t[1][off], t[2][off])
}

/// Flat buffer for bundled stencil values.
#[derive(Default)]
pub struct Pack(pub Vec<f64>);

impl Pack {
    pub fn scalar(mut self, x: f64) -> Self {
        self.0.push(x);
        self
    }
    pub fn vector(mut self, v: &V3) -> Self {
        self.0.extend_from_slice(v.as_slice());
        self
    }
    /// Row-major.
    pub fn matrix(mut self, m: &M3) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.0.push(m[(i, j)]);
            }
        }
        self
    }
}
