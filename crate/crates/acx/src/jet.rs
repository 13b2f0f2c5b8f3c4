//! Forward-mode first-order jets.
//!
//! A [`Jet`] carries a value and its gradient with respect to up to
//! [`MAX_VARS`] real variables. Builtin structure families are written once,
//! generic over [`Scalar`], and evaluated either on plain `f64` or on jets to
//! obtain exact first partial derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest number of independent real variables a jet can track (n <= 4).
pub const MAX_VARS: usize = 8;

/// Minimal field-like scalar interface used by the generic evaluators.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn powi(self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self;
        }
        acc
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; MAX_VARS],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, g: [0.0; MAX_VARS] }
    }

    /// The coordinate function `x_k` evaluated at `v`.
    pub fn var(v: f64, k: usize) -> Self {
        let mut g = [0.0; MAX_VARS];
        g[k] = 1.0;
        Jet { v, g }
    }

    /// Seeds a point as a vector of independent variables.
    pub fn seed(x: &[f64]) -> Vec<Jet> {
        assert!(x.len() <= MAX_VARS, "jet dimension exceeds MAX_VARS");
        x.iter().enumerate().map(|(k, &v)| Jet::var(v, k)).collect()
    }

    fn chain(self, v: f64, d: f64) -> Self {
        let mut g = self.g;
        for x in g.iter_mut() {
            *x *= d;
        }
        Jet { v, g }
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut g = self.g;
        for (a, b) in g.iter_mut().zip(o.g.iter()) {
            *a += b;
        }
        Jet { v: self.v + o.v, g }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let mut g = self.g;
        for (a, b) in g.iter_mut().zip(o.g.iter()) {
            *a -= b;
        }
        Jet { v: self.v - o.v, g }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let g = std::array::from_fn(|k| self.g[k] * o.v + self.v * o.g[k]);
        Jet { v: self.v * o.v, g }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        let g = std::array::from_fn(|k| (self.g[k] - q * o.g[k]) * inv);
        Jet { v: q, g }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.chain(-self.v, -1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, o: f64) -> Jet {
        Jet { v: self.v + o, g: self.g }
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, o: f64) -> Jet {
        Jet { v: self.v - o, g: self.g }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.chain(self.v * o, o)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, o: f64) -> Jet {
        self.chain(self.v / o, 1.0 / o)
    }
}

/// The C² smoothstep `s(t) = 6t⁵ − 15t⁴ + 10t³` clamped to `[0, 1]`.
pub fn smoothstep<S: Scalar>(t: S) -> S {
    let tv = t.value();
    if tv <= 0.0 {
        S::zero()
    } else if tv >= 1.0 {
        S::one()
    } else {
        let t3 = t * t * t;
        t3 * (t * (t * 6.0 - 15.0) + 10.0)
    }
}

/// Derivative of [`smoothstep`]: `30 t² (1 − t)²` on `(0, 1)`, zero outside.
pub fn smoothstep_prime<S: Scalar>(t: S) -> S {
    let tv = t.value();
    if tv <= 0.0 || tv >= 1.0 {
        S::zero()
    } else {
        let u = (t * -1.0) + 1.0;
        t * t * u * u * 30.0
    }
}

/// Compactly supported C² bump `64 t³ (1 − t)³` on `(0, 1)`, peak value 1.
pub fn bump<S: Scalar>(t: S) -> S {
    let tv = t.value();
    if tv <= 0.0 || tv >= 1.0 {
        S::zero()
    } else {
        let u = (t * -1.0) + 1.0;
        (t * u).powi(3) * 64.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Jet::var(2.0, 0);
        let y = Jet::var(3.0, 1);
        let f = x * y + x / y;
        assert!((f.v - (6.0 + 2.0 / 3.0)).abs() < 1e-15);
        assert!((f.g[0] - (3.0 + 1.0 / 3.0)).abs() < 1e-15);
        assert!((f.g[1] - (2.0 - 2.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn sqrt_and_ln() {
        let x = Jet::var(4.0, 0);
        assert!((x.sqrt().g[0] - 0.25).abs() < 1e-15);
        assert!((x.ln().g[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn smoothstep_matches_fd() {
        for &t in &[0.1, 0.37, 0.5, 0.93] {
            let j = smoothstep(Jet::var(t, 0));
            let h = 1e-6;
            let fd = (smoothstep(t + h) - smoothstep(t - h)) / (2.0 * h);
            assert!((j.g[0] - fd).abs() < 1e-8);
            assert!((smoothstep_prime(t) - fd).abs() < 1e-8);
        }
        assert_eq!(smoothstep(-0.2), 0.0);
        assert_eq!(smoothstep(1.4), 1.0);
    }

    #[test]
    fn bump_peak() {
        assert!((bump(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(bump(1.2), 0.0);
    }
}
