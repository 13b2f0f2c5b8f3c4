//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// `−(1/π) ∫∫_Δ f(w)/(w − ζ) dA(w)` in polar coordinates centred at `ζ`,
/// where the integrand is smooth: Gauss–Legendre in the radius, trapezoid in
/// the angle.
pub fn cauchy_oracle(f: &dyn Fn(C64) -> C64, zeta: C64, nr: usize, nt: usize) -> C64 {
    let (x, w) = gauss_legendre(nr);
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..nt {
        let th = 2.0 * PI * k as f64 / nt as f64;
        let e = C64::from_polar(1.0, th);
        let b = (zeta.conj() * e).re;
        let rmax = -b + (b * b + 1.0 - zeta.norm_sqr()).sqrt();
        let mut inner = C64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * rmax * (xi + 1.0);
            inner += f(zeta + e * r) * (0.5 * rmax * wi);
        }
        acc += inner / e;
    }
    -acc * (2.0 * PI / nt as f64) / PI
}

/// `∮_{|ζ|=1} f(ζ) ζⁿ dζ` by the trapezoid rule.
pub fn boundary_moment(f: &dyn Fn(C64) -> C64, n: i32, nt: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..nt {
        let z = C64::from_polar(1.0, 2.0 * PI * k as f64 / nt as f64);
        acc += f(z) * z.powi(n) * C64::new(0.0, 1.0) * z;
    }
    acc * (2.0 * PI / nt as f64)
}

/// Real Hessian by central differences of a gradient.
pub fn fd_hessian(grad: &dyn Fn(&DVector<f64>) -> DVector<f64>, p: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let m = p.len();
    let mut out = DMatrix::zeros(m, m);
    for k in 0..m {
        let mut e = DVector::zeros(m);
        e[k] = h;
        let d = (grad(&(p + &e)) - grad(&(p - &e))) / (2.0 * h);
        out.set_column(k, &d);
    }
    (&out + out.transpose()) * 0.5
}

/// Levi form of `u` for `J_st`: `4 Σ u_{j k̄} X_j conj(X_k)`.
pub fn levi_standard(hess: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let n = x.len() / 2;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            let ujk = C64::new(hess[(xj, xk)] + hess[(yj, yk)], hess[(xj, yk)] - hess[(yj, xk)]) * 0.25;
            let zj = C64::new(x[xj], x[yj]);
            let zk = C64::new(x[xk], x[yk]);
            acc += ujk * zj * zk.conj();
        }
    }
    4.0 * acc.re
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
