//! Geometry of the punctured ball: the blow-up chart, the distributions 𝒵
//! and ℋ, the radial frame and the standard-structure dd^c.
//!
//! Real coordinates are interleaved: `x[2k] = Re z_k`, `x[2k+1] = Im z_k`.
//! The standard structure sends `∂/∂x_k` to `∂/∂y_k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::calculus::{self, ScalarField};
use crate::error::{AcxError, Result};
use crate::jet::Scalar;

/// Innermost radius ever sampled.
pub const RHO_MIN: f64 = 0.05;

pub fn to_real(z: &[C64]) -> DVector<f64> {
    DVector::from_iterator(2 * z.len(), z.iter().flat_map(|c| [c.re, c.im]))
}

pub fn to_complex(x: &DVector<f64>) -> Vec<C64> {
    (0..x.len() / 2).map(|k| C64::new(x[2 * k], x[2 * k + 1])).collect()
}

/// Real matrix of the standard complex structure on ℂⁿ.
pub fn j_st(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// `J_st v` without forming the matrix.
pub fn apply_jst(v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for k in 0..v.len() / 2 {
        out[2 * k] = -v[2 * k + 1];
        out[2 * k + 1] = v[2 * k];
    }
    out
}

/// Real form of complex scalar multiplication `c·v` on ℂⁿ.
pub fn complex_scale(c: C64, v: &DVector<f64>) -> DVector<f64> {
    v * c.re + apply_jst(v) * c.im
}

pub fn tau0(x: &DVector<f64>) -> f64 {
    x.norm_squared()
}

pub fn u_log(x: &DVector<f64>) -> Result<f64> {
    let t = tau0(x);
    if t == 0.0 {
        Err(AcxError::Pole)
    } else {
        Ok(t.ln())
    }
}

/// Blow-up chart, generic over the scalar type: chart coordinates
/// `y = (Re z⁰, Im z⁰, Re w¹, Im w¹, …)` map to `z⁰·(w¹, …, w^{n−1}, √(1 − Σ|w|²))`.
pub fn chart_map<S: Scalar>(y: &[S]) -> Vec<S> {
    let n = y.len() / 2;
    let (a, b) = (y[0], y[1]);
    let mut out = Vec::with_capacity(2 * n);
    let mut w2 = S::zero();
    for k in 1..n {
        let (p, q) = (y[2 * k], y[2 * k + 1]);
        w2 = w2 + p * p + q * q;
        out.push(a * p - b * q);
        out.push(a * q + b * p);
    }
    let s = ((w2 * -1.0) + 1.0).sqrt();
    out.push(a * s);
    out.push(b * s);
    out
}

/// Real Jacobian `∂x_i/∂y_j` of [`chart_map`], generic over the scalar type.
pub fn chart_jacobian<S: Scalar>(y: &[S]) -> Vec<Vec<S>> {
    let n = y.len() / 2;
    let m = 2 * n;
    let (a, b) = (y[0], y[1]);
    let mut jac = vec![vec![S::zero(); m]; m];
    let mut w2 = S::zero();
    for k in 1..n {
        w2 = w2 + y[2 * k] * y[2 * k] + y[2 * k + 1] * y[2 * k + 1];
    }
    let s = ((w2 * -1.0) + 1.0).sqrt();
    let last = 2 * (n - 1);
    // ∂/∂Re z⁰ and ∂/∂Im z⁰
    for k in 1..n {
        let (p, q) = (y[2 * k], y[2 * k + 1]);
        let row = 2 * (k - 1);
        jac[row][0] = p;
        jac[row + 1][0] = q;
        jac[row][1] = q * -1.0;
        jac[row + 1][1] = p;
    }
    jac[last][0] = s;
    jac[last + 1][0] = S::zero();
    jac[last][1] = S::zero();
    jac[last + 1][1] = s;
    // ∂/∂Re w^j and ∂/∂Im w^j
    for j in 1..n {
        let (p, q) = (y[2 * j], y[2 * j + 1]);
        let row = 2 * (j - 1);
        jac[row][2 * j] = a;
        jac[row + 1][2 * j] = b;
        jac[row][2 * j + 1] = b * -1.0;
        jac[row + 1][2 * j + 1] = a;
        let dsp = (p * -1.0) / s;
        let dsq = (q * -1.0) / s;
        jac[last][2 * j] = a * dsp;
        jac[last + 1][2 * j] = b * dsp;
        jac[last][2 * j + 1] = a * dsq;
        jac[last + 1][2 * j + 1] = b * dsq;
    }
    jac
}

pub fn chart_jacobian_matrix(y: &DVector<f64>) -> DMatrix<f64> {
    let jac = chart_jacobian(y.as_slice());
    let m = y.len();
    DMatrix::from_fn(m, m, |i, j| jac[i][j])
}

/// Chart coordinates `(z⁰, w¹, …, w^{n−1})` to a ball point.
pub fn chart_to_ball(c: &[C64]) -> Result<Vec<C64>> {
    if c.len() < 2 {
        return Err(AcxError::ChartDomain("chart needs n >= 2 coordinates".into()));
    }
    let w2: f64 = c[1..].iter().map(|w| w.norm_sqr()).sum();
    if c[0].norm() > 1.0 || w2 >= 1.0 {
        return Err(AcxError::ChartDomain(format!("|z0| = {}, Σ|w|² = {}", c[0].norm(), w2)));
    }
    let s = (1.0 - w2).sqrt();
    let mut z: Vec<C64> = c[1..].iter().map(|w| c[0] * w).collect();
    z.push(c[0] * s);
    Ok(z)
}

/// Inverse of [`chart_to_ball`] on the set where the last coordinate is nonzero.
pub fn ball_to_chart(z: &[C64]) -> Result<Vec<C64>> {
    let n = z.len();
    let zn = z[n - 1];
    if zn.norm() == 0.0 {
        return Err(AcxError::ChartDomain("last homogeneous coordinate vanishes".into()));
    }
    let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let z0 = zn * (r / zn.norm());
    let mut out = vec![z0];
    out.extend(z[..n - 1].iter().map(|c| c / z0));
    Ok(out)
}

pub fn ball_to_chart_real(x: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(to_real(&ball_to_chart(&to_complex(x))?))
}

/// Radial field `Z = Re(z^i ∂/∂z^i)`, real form `x/2`.
pub fn radial_z(x: &DVector<f64>) -> DVector<f64> {
    x * 0.5
}

/// `J_st Z`.
pub fn radial_jz(x: &DVector<f64>) -> DVector<f64> {
    apply_jst(&radial_z(x))
}

/// Real basis `(Z, J_st Z)` of 𝒵 at `x`.
pub fn distribution_z(x: &DVector<f64>) -> Result<[DVector<f64>; 2]> {
    if x.norm() == 0.0 {
        return Err(AcxError::Pole);
    }
    Ok([radial_z(x), radial_jz(x)])
}

/// Real basis of ℋ: `J_st`-pairs `(h, J_st h)` spanning the Hermitian
/// orthogonal complement of `z`, orthonormal.
pub fn distribution_h(x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    if x.norm() == 0.0 {
        return Err(AcxError::Pole);
    }
    let z = to_complex(x);
    let n = z.len();
    let mut basis: Vec<Vec<C64>> = vec![z.iter().map(|c| c / x.norm()).collect()];
    let mut out = Vec::new();
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[k] = C64::new(1.0, 0.0);
        for b in &basis {
            let ip: C64 = b.iter().zip(v.iter()).map(|(bi, vi)| bi.conj() * vi).sum();
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi -= ip * bi;
            }
        }
        let nv = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if nv < 1e-8 {
            continue;
        }
        let v: Vec<C64> = v.iter().map(|c| c / nv).collect();
        let re = to_real(&v);
        out.push(re.clone());
        out.push(apply_jst(&re));
        basis.push(v);
    }
    Ok(out)
}

/// Full real frame `(Z, J_st Z, ℋ-basis)` assembled as columns.
pub fn adapted_frame_matrix(x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let [z, jz] = distribution_z(x)?;
    let mut cols = vec![z, jz];
    cols.extend(distribution_h(x)?);
    Ok(DMatrix::from_columns(&cols))
}

/// The field `E = ½(−z₂, z̄₁ z₂ / z̄₂)` on ℂ² (real form), generic over scalars.
///
/// `E` lies in ℋ, `|E| = |z|/2`, and `E(λz) = λE(z)` for every `λ ∈ ℂ*`.
pub fn e_field<S: Scalar>(x: &[S]) -> [S; 4] {
    let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
    let n2 = c * c + d * d;
    let ur = (c * c - d * d) / n2;
    let ui = (c * d * 2.0) / n2;
    [
        c * -0.5,
        d * -0.5,
        (a * ur + b * ui) * 0.5,
        (a * ui - b * ur) * 0.5,
    ]
}

pub fn e_vector(x: &DVector<f64>) -> DVector<f64> {
    DVector::from_row_slice(&e_field(x.as_slice()))
}

/// Ordered frame of real vectors with labels.
#[derive(Clone, Debug)]
pub struct Frame {
    pub labels: Vec<String>,
    pub vectors: Vec<DVector<f64>>,
}

impl Frame {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.vectors)
    }
}

/// The frame `(Z, J_st Z, E, J_st E)` on ℂ² ∖ {z₂ = 0}.
pub fn frame_e(x: &DVector<f64>) -> Result<Frame> {
    if x.len() != 4 {
        return Err(AcxError::Dimension(x.len() / 2, "frame E is defined for n = 2".into()));
    }
    if x.norm() == 0.0 {
        return Err(AcxError::Pole);
    }
    if x[2].hypot(x[3]) < 1e-12 {
        return Err(AcxError::Frame("E is undefined where z₂ = 0".into()));
    }
    let e = e_vector(x);
    Ok(Frame {
        labels: vec!["Z".into(), "JZ".into(), "E".into(), "JE".into()],
        vectors: vec![radial_z(x), radial_jz(x), e.clone(), apply_jst(&e)],
    })
}

/// Residuals of `[Z, E] = 0`, `[J_st Z, E] = 0` and `[E, J_st E] = −J_st Z`.
///
/// The first two hold identically. The third holds on the leaf `z₁ = 0` and
/// not on any open set: a frame with all three relations would make the
/// Fubini–Study metric of ℂP¹ flat. Off the leaf the residual is the
/// ℋ-component of `[E, J_st E]`.
pub fn frame_bracket_residuals(x: &DVector<f64>) -> Result<[f64; 3]> {
    frame_e(x)?;
    let h = calculus::FD_STEP;
    let z = |p: &DVector<f64>| radial_z(p);
    let jz = |p: &DVector<f64>| radial_jz(p);
    let e = |p: &DVector<f64>| e_vector(p);
    let je = |p: &DVector<f64>| apply_jst(&e_vector(p));
    let r1 = calculus::lie_bracket(&z, &e, x, h).amax();
    let r2 = calculus::lie_bracket(&jz, &e, x, h).amax();
    let r3 = (calculus::lie_bracket(&e, &je, x, h) + radial_jz(x)).amax();
    Ok([r1, r2, r3])
}

/// `dd^c u(X, Y)` for the standard structure.
pub fn ddc_standard(u: &dyn ScalarField, p: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let n = p.len() / 2;
    let j = j_st(n);
    let jf = move |_q: &DVector<f64>| j.clone();
    calculus::ddc_with(u, &jf, p, x, y, calculus::FD_STEP).0
}
