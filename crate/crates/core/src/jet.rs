//! Truncated bivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] carries the Taylor coefficients of a smooth function of the two
//! chart coordinates `(s₁, s₂)` around a base point, up to a total degree
//! called its *order*. Arithmetic on jets is arithmetic on the underlying
//! functions, so evaluating a chart map or a field on jets yields exact
//! derivatives of every order up to the jet order. Differentiating a jet
//! lowers its order by one; a jet whose order drops below zero is invalid and
//! evaluates to NaN, which the residual machinery treats as a hard failure.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

/// Highest total degree a jet can carry.
pub const MAX_ORDER: i8 = 6;

const NCOEF: usize = ((MAX_ORDER as usize + 1) * (MAX_ORDER as usize + 2)) / 2;

#[inline]
const fn idx(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

#[inline]
const fn ncoef(order: i8) -> usize {
    if order < 0 {
        0
    } else {
        let n = order as usize + 1;
        n * (n + 1) / 2
    }
}

const FACT: [f64; 8] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0];

#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; NCOEF],
    order: i8,
}

impl Jet {
    /// A constant; exact to every order.
    pub fn constant(value: f64) -> Self {
        let mut c = [0.0; NCOEF];
        c[0] = value;
        Self { c, order: MAX_ORDER }
    }

    /// The coordinate function `s_axis` expanded around `value`.
    pub fn variable(value: f64, axis: usize, order: i8) -> Self {
        assert!(axis < 2, "jets are bivariate");
        assert!((0..=MAX_ORDER).contains(&order), "jet order out of range");
        let mut c = [0.0; NCOEF];
        c[0] = value;
        if order >= 1 {
            c[if axis == 0 { idx(1, 0) } else { idx(0, 1) }] = 1.0;
        }
        Self { c, order }
    }

    fn invalid() -> Self {
        Self {
            c: [f64::NAN; NCOEF],
            order: -1,
        }
    }

    pub fn order(&self) -> i8 {
        self.order
    }

    pub fn is_valid(&self) -> bool {
        self.order >= 0
    }

    /// Value at the base point; NaN when the jet has been differentiated past
    /// its order.
    pub fn value(&self) -> f64 {
        if self.order < 0 {
            f64::NAN
        } else {
            self.c[0]
        }
    }

    /// Mixed partial derivative `∂₁^a ∂₂^b` at the base point.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        if self.order < 0 || (a + b) as i8 > self.order {
            return f64::NAN;
        }
        FACT[a] * FACT[b] * self.c[idx(a, b)]
    }

    /// Partial derivative jet along one chart axis.
    pub fn deriv(&self, axis: usize) -> Self {
        if self.order <= 0 {
            return Self::invalid();
        }
        let order = self.order - 1;
        let mut c = [0.0; NCOEF];
        for d in 0..=order as usize {
            for b in 0..=d {
                let a = d - b;
                c[idx(a, b)] = if axis == 0 {
                    (a + 1) as f64 * self.c[idx(a + 1, b)]
                } else {
                    (b + 1) as f64 * self.c[idx(a, b + 1)]
                };
            }
        }
        Self { c, order }
    }

    /// Same function, truncated to a lower order.
    pub fn truncate(&self, order: i8) -> Self {
        if order >= self.order {
            return *self;
        }
        if order < 0 {
            return Self::invalid();
        }
        let mut c = [0.0; NCOEF];
        let n = ncoef(order);
        c[..n].copy_from_slice(&self.c[..n]);
        Self { c, order }
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for v in out.c[..ncoef(self.order)].iter_mut() {
            *v *= k;
        }
        out
    }

    /// `f(self)` for a univariate `f` given its derivatives at the base value.
    fn compose(&self, derivs: &[f64]) -> Self {
        if self.order < 0 {
            return Self::invalid();
        }
        let n = self.order as usize;
        debug_assert!(derivs.len() > n);
        let mut h = *self;
        h.c[0] = 0.0;
        let mut r = Jet::constant(derivs[n] / FACT[n]).truncate(self.order);
        for k in (0..n).rev() {
            r = r * h;
            r.c[0] += derivs[k] / FACT[k];
        }
        r.order = self.order;
        r
    }

    pub fn recip(&self) -> Self {
        let x = self.value();
        let mut d = [0.0; MAX_ORDER as usize + 1];
        let inv = 1.0 / x;
        let mut p = inv;
        for (k, dk) in d.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *dk = sign * FACT[k] * p;
            p *= inv;
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Self {
        let x = self.value();
        let mut d = [0.0; MAX_ORDER as usize + 1];
        let mut coef = 1.0;
        let mut expo = 0.5;
        for dk in d.iter_mut() {
            *dk = coef * x.powf(expo);
            coef *= expo;
            expo -= 1.0;
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=MAX_ORDER as usize).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=MAX_ORDER as usize).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&[e; MAX_ORDER as usize + 1])
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut r = Jet::constant(1.0);
        for _ in 0..n {
            r = r * *self;
        }
        r
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet({:?}; order {})", self.value(), self.order)
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        if order < 0 {
            return Jet::invalid();
        }
        let mut c = [0.0; NCOEF];
        for (k, ck) in c[..ncoef(order)].iter_mut().enumerate() {
            *ck = self.c[k] + rhs.c[k];
        }
        Jet { c, order }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        if order < 0 {
            return Jet::invalid();
        }
        let mut c = [0.0; NCOEF];
        for (k, ck) in c[..ncoef(order)].iter_mut().enumerate() {
            *ck = self.c[k] - rhs.c[k];
        }
        Jet { c, order }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        if order < 0 {
            return Jet::invalid();
        }
        let mut c = [0.0; NCOEF];
        for d in 0..=order as usize {
            for b in 0..=d {
                let a = d - b;
                let mut s = 0.0;
                for a1 in 0..=a {
                    for b1 in 0..=b {
                        s += self.c[idx(a1, b1)] * rhs.c[idx(a - a1, b - b1)];
                    }
                }
                c[idx(a, b)] = s;
            }
        }
        Jet { c, order }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

impl DivAssign for Jet {
    fn div_assign(&mut self, rhs: Jet) {
        *self = *self / rhs;
    }
}

impl Zero for Jet {
    fn zero() -> Self {
        Jet::constant(0.0)
    }
    fn is_zero(&self) -> bool {
        self.order >= 0 && self.c[..ncoef(self.order)].iter().all(|v| *v == 0.0)
    }
}

impl One for Jet {
    fn one() -> Self {
        Jet::constant(1.0)
    }
}
