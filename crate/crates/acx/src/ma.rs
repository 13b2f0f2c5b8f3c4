//! d^c, dd^c, Levi form, J-Hessian and Monge–Ampère checks.
//!
//! Conventions: `d^c u(X) = −du(JX)`, `ℒ(u)(X) = dd^c u(X, JX)` and
//! `ℋess(u)(X, Y) = ½(dd^c u(X, JY) + dd^c u(Y, JX))`. The Hessian is also
//! evaluated through its complexified form
//! `½ Im(i X^{10}(Y^{01}u) + i Y^{01}(X^{10}u) + du(J[X^{10}, Y^{01}]))`
//! with `X^{10} = X − iJX`, `Y^{01} = Y + iJY`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acs::{self, AcStructure, DeformationTensor, ShellProfile};
use crate::ball::{self, Frame};
use crate::calculus::{self, Field, ScalarField, FD_STEP};
use crate::error::{AcxError, Result};
use crate::sampling::Sampler;

const I: C64 = C64 { re: 0.0, im: 1.0 };

type JField<'a> = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Sync + 'a;

/// Complex vector `A + iB` as the pair `(A, B)`.
pub type CVec = (DVector<f64>, DVector<f64>);
/// Complex vector field.
pub type CField<'a> = dyn Fn(&DVector<f64>) -> CVec + 'a;
/// Complex-valued function.
pub type CFn<'a> = dyn Fn(&DVector<f64>) -> C64 + 'a;

fn directional_c(f: &CFn, p: &DVector<f64>, v: &DVector<f64>, h: f64) -> (C64, f64) {
    if v.amax() == 0.0 {
        return (C64::new(0.0, 0.0), 0.0);
    }
    let g = |q: &DVector<f64>| {
        let z = f(q);
        DVector::from_vec(vec![z.re, z.im])
    };
    let (d, e) = calculus::directional_vec(&g, p, v, h);
    (C64::new(d[0], d[1]), e)
}

/// `V(f)` at `p` for a complex field `V` and complex function `f`.
pub fn apply_field(v: &CField, f: &CFn, p: &DVector<f64>, h: f64) -> (C64, f64) {
    let (a, b) = v(p);
    let (fa, ea) = directional_c(f, p, &a, h);
    let (fb, eb) = directional_c(f, p, &b, h);
    (fa + I * fb, ea + eb)
}

/// `[A + iB, C + iD] = [A, C] − [B, D] + i([A, D] + [B, C])`.
pub fn complex_bracket(v: &CField, w: &CField, p: &DVector<f64>, h: f64) -> CVec {
    let vr = |q: &DVector<f64>| v(q).0;
    let vi = |q: &DVector<f64>| v(q).1;
    let wr = |q: &DVector<f64>| w(q).0;
    let wi = |q: &DVector<f64>| w(q).1;
    let ac = calculus::lie_bracket(&vr, &wr, p, h);
    let bd = calculus::lie_bracket(&vi, &wi, p, h);
    let ad = calculus::lie_bracket(&vr, &wi, p, h);
    let bc = calculus::lie_bracket(&vi, &wr, p, h);
    (ac - bd, ad + bc)
}

/// `du(V)` for a complex vector.
pub fn du_complex(u: &dyn ScalarField, p: &DVector<f64>, v: &CVec) -> C64 {
    let g = u.gradient(p);
    C64::new(g.dot(&v.0), g.dot(&v.1))
}

fn apply_j(j: &DMatrix<f64>, v: &CVec) -> CVec {
    (j * &v.0, j * &v.1)
}

/// `d^c u(X) = −du(JX)`.
pub fn dc(u: &dyn ScalarField, j: &dyn AcStructure, p: &DVector<f64>, x: &DVector<f64>) -> f64 {
    calculus::dc(u, &j.j(p), p, x)
}

/// `dd^c u(X, Y)` at `p`.
pub fn ddc(u: &dyn ScalarField, j: &dyn AcStructure, p: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let jf = |q: &DVector<f64>| j.j(q);
    calculus::ddc_with(u, &jf, p, x, y, FD_STEP).0
}

/// `ℒ(u)(X) = dd^c u(X, JX)`.
pub fn levi_form(u: &dyn ScalarField, j: &dyn AcStructure, p: &DVector<f64>, x: &DVector<f64>) -> f64 {
    ddc(u, j, p, x, &(j.j(p) * x))
}

/// Polarized Hessian `½(dd^c u(X, JY) + dd^c u(Y, JX))` with its error estimate.
fn hess_polar(u: &dyn ScalarField, jf: &JField, p: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>, h: f64) -> (f64, f64) {
    let jp = jf(p);
    let (a, ea) = calculus::ddc_with(u, jf, p, x, &(&jp * y), h);
    let (b, eb) = calculus::ddc_with(u, jf, p, y, &(&jp * x), h);
    (0.5 * (a + b), 0.5 * (ea + eb))
}

fn hess_polar_plain(u: &dyn ScalarField, jf: &JField, p: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>, h: f64) -> f64 {
    let jp = jf(p);
    0.5 * (calculus::ddc_plain(u, jf, p, x, &(&jp * y), h) + calculus::ddc_plain(u, jf, p, y, &(&jp * x), h))
}

/// Complexified Hessian for real fields `X`, `Y`.
pub fn hess_complexified(u: &dyn ScalarField, jf: &JField, p: &DVector<f64>, xf: &Field, yf: &Field, h: f64) -> (f64, f64) {
    let x10 = |q: &DVector<f64>| {
        let x = xf(q);
        let jx = jf(q) * &x;
        (x, -jx)
    };
    let y01 = |q: &DVector<f64>| {
        let y = yf(q);
        let jy = jf(q) * &y;
        (y, jy)
    };
    let y01u = |q: &DVector<f64>| du_complex(u, q, &y01(q));
    let x10u = |q: &DVector<f64>| du_complex(u, q, &x10(q));
    let (a, ea) = apply_field(&x10, &y01u, p, h);
    let (b, eb) = apply_field(&y01, &x10u, p, h);
    let br = complex_bracket(&x10, &y01, p, h);
    let c = du_complex(u, p, &apply_j(&jf(p), &br));
    let t = I * a + I * b + c;
    (0.5 * t.im, 0.5 * (ea + eb))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut e: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

#[derive(Clone, Debug, Serialize)]
pub struct HessianReport {
    pub point: Vec<f64>,
    pub frame: String,
    pub labels: Vec<String>,
    /// Polarization formula.
    pub h: Vec<Vec<f64>>,
    /// Complexified formula.
    pub h_complexified: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Max of the Richardson estimate and the gap between the two formulas.
    pub residual: f64,
    pub formula_gap: f64,
    pub richardson: f64,
    pub symmetry_defect: f64,
    /// `max |ℋess(Je_a, Je_b) − ℋess(e_a, e_b)|`.
    pub j_hermitian_defect: f64,
}

impl HessianReport {
    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.h.len();
        DMatrix::from_fn(m, m, |i, k| self.h[i][k])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Frame with unit columns; rejects numerically dependent frames.
fn check_frame(frame: &Frame) -> Result<()> {
    let cols: Vec<DVector<f64>> = frame
        .vectors
        .iter()
        .map(|v| {
            let n = v.norm();
            if n == 0.0 { v.clone() } else { v / n }
        })
        .collect();
    let sv = DMatrix::from_columns(&cols).singular_values();
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if frame.vectors.is_empty() || min < 1e-8 {
        return Err(AcxError::Frame(format!("degenerate frame (min singular value {min:.3e})")));
    }
    Ok(())
}

/// Hessian matrix in a frame by polarization, with the Richardson estimate.
pub fn hessian_matrix(u: &dyn ScalarField, j: &dyn AcStructure, p: &DVector<f64>, vectors: &[DVector<f64>]) -> (DMatrix<f64>, f64) {
    let jf = |q: &DVector<f64>| j.j(q);
    let m = vectors.len();
    let mut h = DMatrix::zeros(m, m);
    let mut err = 0.0f64;
    for a in 0..m {
        for b in a..m {
            let (v, e) = hess_polar(u, &jf, p, &vectors[a], &vectors[b], FD_STEP);
            h[(a, b)] = v;
            h[(b, a)] = v;
            err = err.max(e);
        }
    }
    (h, err)
}

pub fn j_hessian(u: &dyn ScalarField, j: &dyn AcStructure, p: &DVector<f64>, frame: &Frame, label: &str) -> Result<HessianReport> {
    check_frame(frame)?;
    let jf = |q: &DVector<f64>| j.j(q);
    let m = frame.vectors.len();
    let jp = j.j(p);
    let mut hp = DMatrix::zeros(m, m);
    let mut hc = DMatrix::zeros(m, m);
    let mut hj = DMatrix::zeros(m, m);
    let mut rich = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let (x, y) = (&frame.vectors[a], &frame.vectors[b]);
            let (v, e) = hess_polar(u, &jf, p, x, y, FD_STEP);
            hp[(a, b)] = v;
            rich = rich.max(e);
            let (xc, yc) = (x.clone(), y.clone());
            let xf = move |_q: &DVector<f64>| xc.clone();
            let yf = move |_q: &DVector<f64>| yc.clone();
            let (w, e2) = hess_complexified(u, &jf, p, &xf, &yf, FD_STEP);
            hc[(a, b)] = w;
            rich = rich.max(e2);
            hj[(a, b)] = hess_polar(u, &jf, p, &(&jp * x), &(&jp * y), FD_STEP).0;
        }
    }
    let formula_gap = (&hp - &hc).amax();
    let symmetry_defect = (&hp - hp.transpose()).amax();
    let j_hermitian_defect = (&hj - &hp).amax();
    Ok(HessianReport {
        point: p.iter().cloned().collect(),
        frame: label.to_string(),
        labels: frame.labels.clone(),
        eigenvalues: sorted_eigenvalues(&hp),
        h: to_rows(&hp),
        h_complexified: to_rows(&hc),
        residual: rich.max(formula_gap),
        formula_gap,
        richardson: rich,
        symmetry_defect,
        j_hermitian_defect,
    })
}

/// Coordinate frame `∂/∂x^k`.
pub fn euclidean_frame(m: usize) -> Frame {
    Frame {
        labels: (0..m).map(|k| format!("x{k}")).collect(),
        vectors: (0..m)
            .map(|k| {
                let mut e = DVector::zeros(m);
                e[k] = 1.0;
                e
            })
            .collect(),
    }
}

/// `Ẽ = E + hZ`.
pub fn e_tilde(profile: &ShellProfile, q: &DVector<f64>) -> DVector<f64> {
    ball::e_vector(q) + ball::radial_z(q) * profile.h(q.norm())
}

/// The basis `(Ẽ, JẼ, Z, JZ)` on ℂ².
pub fn tilde_frame(j: &dyn AcStructure, profile: &ShellProfile, p: &DVector<f64>) -> Result<Frame> {
    ball::frame_e(p)?;
    let jp = j.j(p);
    let et = e_tilde(profile, p);
    let z = ball::radial_z(p);
    Ok(Frame {
        labels: vec!["Et".into(), "JEt".into(), "Z".into(), "JZ".into()],
        vectors: vec![et.clone(), &jp * et, z.clone(), &jp * z],
    })
}

/// Frame `(Z, JZ, ℋ-basis)` at `p`.
pub fn radial_frame(j: &dyn AcStructure, p: &DVector<f64>) -> Result<Frame> {
    let z = ball::radial_z(p);
    let jz = j.j(p) * &z;
    let mut vectors = vec![z, jz];
    vectors.extend(ball::distribution_h(p)?);
    let labels = (0..vectors.len())
        .map(|k| match k {
            0 => "Z".to_string(),
            1 => "JZ".to_string(),
            _ => format!("H{}", k - 2),
        })
        .collect();
    Ok(Frame { labels, vectors })
}

/// `(max_X |ℋess(Z, X)|, max_X |ℋess(JZ, X)|)` over the radial frame.
pub fn kernel_alignment(u: &dyn ScalarField, j: &dyn AcStructure, p: &DVector<f64>) -> Result<(f64, f64)> {
    let f = radial_frame(j, p)?;
    let (h, _) = hessian_matrix(u, j, p, &f.vectors);
    let row = |r: usize| h.row(r).iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok((row(0), row(1)))
}

/// Pfaffian of an antisymmetric matrix by expansion along the first row.
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    fn rec(a: &DMatrix<f64>, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 1.0;
        }
        let i = idx[0];
        let mut s = 0.0;
        for k in 1..idx.len() {
            let rest: Vec<usize> = idx[1..].iter().cloned().filter(|&t| t != idx[k]).collect();
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * a[(i, idx[k])] * rec(a, &rest);
        }
        s
    }
    if a.nrows() % 2 == 1 {
        return 0.0;
    }
    let idx: Vec<usize> = (0..a.nrows()).collect();
    rec(a, &idx)
}

#[derive(Clone, Debug, Serialize)]
pub struct MaReport {
    pub point: Vec<f64>,
    pub min_abs_eigenvalue: f64,
    pub max_abs_eigenvalue: f64,
    pub det: f64,
    /// Pfaffian of `dd^c u + J*(dd^c u)` in the coordinate basis.
    pub pfaffian: f64,
    /// `|Pf| / (2ⁿ max|λ|^{n−1})`, comparable with `min |λ|`.
    pub pfaffian_scaled: f64,
    pub eigen_degenerate: bool,
    pub pfaffian_degenerate: bool,
    pub agree: bool,
}

pub fn ma_degeneracy(u: &dyn ScalarField, j: &dyn AcStructure, p: &DVector<f64>, tol: f64) -> MaReport {
    let m = p.len();
    let n = m / 2;
    let basis = euclidean_frame(m).vectors;
    let (h, _) = hessian_matrix(u, j, p, &basis);
    let eig = sorted_eigenvalues(&h);
    let min_abs = eig.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let max_abs = eig.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let jp = j.j(p);
    let jf = |q: &DVector<f64>| j.j(q);
    let mut omega = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in (a + 1)..m {
            let (x, y) = (&basis[a], &basis[b]);
            let v = calculus::ddc_with(u, &jf, p, x, y, FD_STEP).0
                + calculus::ddc_with(u, &jf, p, &(&jp * x), &(&jp * y), FD_STEP).0;
            omega[(a, b)] = v;
            omega[(b, a)] = -v;
        }
    }
    let pf = pfaffian(&omega);
    let scale = 2f64.powi(n as i32) * max_abs.max(1e-300).powi(n as i32 - 1);
    let pfaffian_scaled = pf.abs() / scale;
    let eigen_degenerate = min_abs < tol;
    let pfaffian_degenerate = pfaffian_scaled < tol;
    MaReport {
        point: p.iter().cloned().collect(),
        min_abs_eigenvalue: min_abs,
        max_abs_eigenvalue: max_abs,
        det: h.determinant(),
        pfaffian: pf,
        pfaffian_scaled,
        eigen_degenerate,
        pfaffian_degenerate,
        agree: eigen_degenerate == pfaffian_degenerate,
    }
}

/// Sampled region of the punctured ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub rmin: f64,
    pub rmax: f64,
    pub count: usize,
    pub seed: u64,
    /// Sample only the leaf through `(0, …, 0, 1)`.
    #[serde(default)]
    pub axis: bool,
}

impl Region {
    pub fn shell(rmin: f64, rmax: f64, count: usize, seed: u64) -> Self {
        Region { rmin, rmax, count, seed, axis: false }
    }

    pub fn axis(rmin: f64, rmax: f64, count: usize) -> Self {
        Region { rmin, rmax, count, seed: 0, axis: true }
    }

    pub fn points(&self, n: usize) -> Vec<DVector<f64>> {
        if self.axis {
            axis_points(n, self.count, self.rmin, self.rmax)
        } else {
            acs::probe_points(n, self.count, self.seed, self.rmin, self.rmax)
        }
    }
}

/// Points `(0, …, 0, ρ e^{iθ})` with `ρ` evenly spread over `[rmin, rmax]`.
pub fn axis_points(n: usize, count: usize, rmin: f64, rmax: f64) -> Vec<DVector<f64>> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..count)
        .map(|k| {
            let t = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.5 };
            let rho = rmin + (rmax - rmin) * t;
            let theta = 2.0 * PI * (k as f64 * golden).fract();
            let mut x = DVector::zeros(2 * n);
            x[2 * n - 2] = rho * theta.cos();
            x[2 * n - 1] = rho * theta.sin();
            x
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PshReport {
    pub samples: usize,
    pub min_eigenvalue: f64,
    pub argmin: Vec<f64>,
    pub tol: f64,
    pub psh: bool,
    pub frame: String,
}

/// Minimum Hessian eigenvalue over the region, in frames supplied by `frame`.
pub fn psh_check(
    u: &dyn ScalarField,
    j: &dyn AcStructure,
    points: &[DVector<f64>],
    frame: &(dyn Fn(&DVector<f64>) -> Result<Frame> + Sync),
    label: &str,
    tol: f64,
) -> Result<PshReport> {
    let mins: Vec<(f64, usize)> = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let f = frame(p)?;
            let (h, _) = hessian_matrix(u, j, p, &f.vectors);
            Ok((sorted_eigenvalues(&h)[0], k))
        })
        .collect::<Result<Vec<_>>>()?;
    let (min, k) = mins.iter().cloned().fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
    Ok(PshReport {
        samples: points.len(),
        min_eigenvalue: min,
        argmin: points.get(k).map(|p| p.iter().cloned().collect()).unwrap_or_default(),
        tol,
        psh: min >= -tol,
        frame: label.to_string(),
    })
}

/// Euclidean frame selector for [`psh_check`].
pub fn euclidean(p: &DVector<f64>) -> Result<Frame> {
    Ok(euclidean_frame(p.len()))
}

/// `sup` over an annular grid of the flat Laplacian of `ζ ↦ u(ζ·v)`.
pub fn harmonicity_along_disk(u: &dyn ScalarField, v: &[C64], grid: &[C64]) -> f64 {
    let fx = ball::to_real(v);
    let fy = ball::apply_jst(&fx);
    let ex = DVector::from_vec(vec![1.0, 0.0]);
    let ey = DVector::from_vec(vec![0.0, 1.0]);
    grid.iter()
        .map(|&z| {
            let pt = DVector::from_vec(vec![z.re, z.im]);
            let at = |q: &DVector<f64>| &fx * q[0] + &fy * q[1];
            let gx = |q: &DVector<f64>| u.gradient(&at(q)).dot(&fx);
            let gy = |q: &DVector<f64>| u.gradient(&at(q)).dot(&fy);
            let (a, _) = calculus::directional(&gx, &pt, &ex, FD_STEP);
            let (b, _) = calculus::directional(&gy, &pt, &ey, FD_STEP);
            (a + b).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenReport {
    /// `(radius, sup |u|)` on shells approaching the sphere.
    pub boundary: Vec<(f64, f64)>,
    pub boundary_ok: bool,
    /// `(radius, min u/log|z|, max u/log|z|)` on shells approaching the pole.
    pub pole: Vec<(f64, f64, f64)>,
    pub pole_ok: bool,
    pub psh: PshReport,
    pub ma_max_min_abs_eigenvalue: f64,
    pub ma_max_pfaffian_scaled: f64,
    pub ma_ok: bool,
    pub pass: bool,
}

pub const BOUNDARY_RADII: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];
pub const POLE_RADII: [f64; 3] = [1e-1, 0.031_622_776_601_683_79, 1e-2];

/// Green-function checks for `u = log τ₀` over a region.
pub fn green_check(j: &dyn AcStructure, region: &Region, psh_tol: f64, ma_tol: f64) -> Result<GreenReport> {
    let u = calculus::LogTau0;
    let n = j.n();
    let mut s = Sampler::new(region.seed ^ 0x9e37_79b9);
    let dirs: Vec<DVector<f64>> = (0..16).map(|_| s.unit_vector(2 * n)).collect();
    let boundary: Vec<(f64, f64)> = BOUNDARY_RADII
        .iter()
        .map(|&r| (r, dirs.iter().map(|d| u.value(&(d * r)).abs()).fold(0.0, f64::max)))
        .collect();
    let boundary_ok = boundary.windows(2).all(|w| w[1].1 <= w[0].1) && boundary.last().map(|b| b.1 < 1e-3).unwrap_or(false);
    let pole: Vec<(f64, f64, f64)> = POLE_RADII
        .iter()
        .map(|&r| {
            let ratios: Vec<f64> = dirs.iter().map(|d| u.value(&(d * r)) / r.ln()).collect();
            (r, ratios.iter().cloned().fold(f64::INFINITY, f64::min), ratios.iter().cloned().fold(f64::MIN, f64::max))
        })
        .collect();
    let pole_ok = pole.iter().all(|&(_, lo, hi)| lo > 0.5 && hi < 4.0);
    let points = region.points(n);
    let psh = psh_check(&u, j, &points, &euclidean, "euclidean", psh_tol)?;
    let ma: Vec<MaReport> = points.par_iter().map(|p| ma_degeneracy(&u, j, p, ma_tol)).collect();
    let ma_eig = ma.iter().map(|r| r.min_abs_eigenvalue).fold(0.0, f64::max);
    let ma_pf = ma.iter().map(|r| r.pfaffian_scaled).fold(0.0, f64::max);
    let ma_ok = ma.iter().all(|r| r.eigen_degenerate && r.pfaffian_degenerate);
    let pass = boundary_ok && pole_ok && psh.psh && ma_ok;
    Ok(GreenReport {
        boundary,
        boundary_ok,
        pole,
        pole_ok,
        psh,
        ma_max_min_abs_eigenvalue: ma_eig,
        ma_max_pfaffian_scaled: ma_pf,
        ma_ok,
        pass,
    })
}

/// One row of the shell-example identity table.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub point: Vec<f64>,
    pub identity: String,
    pub expected_re: f64,
    pub expected_im: f64,
    pub computed_re: f64,
    pub computed_im: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Example58Point {
    pub point: Vec<f64>,
    pub rho: f64,
    pub h: f64,
    pub h_z: f64,
    pub hessian: HessianReport,
    pub expected: Vec<Vec<f64>>,
    pub max_entry_error: f64,
    pub expected_eigenvalues: Vec<f64>,
    pub eigen_error: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Example58Report {
    pub profile: ShellProfile,
    pub tol: f64,
    pub identities: Vec<IdentityRow>,
    pub points: Vec<Example58Point>,
    /// `(step, max entry error)` for the unextrapolated stencil.
    pub step_errors: Vec<(f64, f64)>,
    /// Successive error ratios under step halving.
    pub step_ratios: Vec<f64>,
    pub identities_ok: bool,
    pub hessian_ok: bool,
    pub eigen_ok: bool,
    /// `min λ < 0` wherever `|h_Z| > 1e-3`.
    pub non_psh_detected: bool,
    pub psh: bool,
}

/// Closed-form Hessian `H` of `log τ₀` in the basis `(Ẽ, JẼ, Z, JZ)`.
pub fn example58_matrix(h: f64, h_z: f64) -> DMatrix<f64> {
    let a = 1.0 + 2.0 * h * h_z;
    DMatrix::from_row_slice(4, 4, &[a, 0.0, h_z, 0.0, 0.0, a, 0.0, h_z, h_z, 0.0, 0.0, 0.0, 0.0, h_z, 0.0, 0.0])
}

/// `λ± = (a ± √(a² + 4h_Z²))/2`, each double, sorted.
pub fn example58_eigenvalues(h: f64, h_z: f64) -> Vec<f64> {
    let a = 1.0 + 2.0 * h * h_z;
    let d = (a * a + 4.0 * h_z * h_z).sqrt();
    let (lm, lp) = (0.5 * (a - d), 0.5 * (a + d));
    vec![lm, lm, lp, lp]
}

pub const EXAMPLE58_TOL: f64 = 2e-5;
pub const EXAMPLE58_STEPS: [f64; 3] = [1e-4, 5e-5, 2.5e-5];

fn row(point: &DVector<f64>, identity: &str, expected: C64, computed: C64) -> IdentityRow {
    IdentityRow {
        point: point.iter().cloned().collect(),
        identity: identity.to_string(),
        expected_re: expected.re,
        expected_im: expected.im,
        computed_re: computed.re,
        computed_im: computed.im,
        error: (expected - computed).norm(),
    }
}

fn cvec_norm(v: &CVec) -> f64 {
    v.0.amax().max(v.1.amax())
}

/// Evaluates the auxiliary identities of the example at `p`.
pub fn example58_identities(j: &dyn AcStructure, profile: &ShellProfile, p: &DVector<f64>) -> Vec<IdentityRow> {
    let u = calculus::LogTau0;
    let hstep = FD_STEP;
    let rho = p.norm();
    let (h, hz) = (profile.h(rho), profile.h_z(rho));
    let jf = |q: &DVector<f64>| j.j(q);
    let z10 = |q: &DVector<f64>| (ball::radial_z(q), -ball::radial_jz(q));
    let z01 = |q: &DVector<f64>| (ball::radial_z(q), ball::radial_jz(q));
    let e10 = |q: &DVector<f64>| {
        let e = ball::e_vector(q);
        let je = ball::apply_jst(&e);
        (e, -je)
    };
    let e01 = |q: &DVector<f64>| {
        let e = ball::e_vector(q);
        let je = ball::apply_jst(&e);
        (e, je)
    };
    // Ẽ^{10} = E^{10} + h Z^{01}
    let et10 = |q: &DVector<f64>| {
        let (er, ei) = e10(q);
        let (zr, zi) = z01(q);
        let hq = profile.h(q.norm());
        (er + zr * hq, ei + zi * hq)
    };
    let et01 = |q: &DVector<f64>| {
        let (a, b) = et10(q);
        (a, -b)
    };
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let hc = C64::new(h, 0.0);
    let mut rows = vec![
        row(p, "Z10(u) = 1", one, du_complex(&u, p, &z10(p))),
        row(p, "Z01(u) = 1", one, du_complex(&u, p, &z01(p))),
        row(p, "E10(u) = 0", zero, du_complex(&u, p, &e10(p))),
        row(p, "Et10(u) = h", hc, du_complex(&u, p, &et10(p))),
        row(p, "Et01(u) = h", hc, du_complex(&u, p, &et01(p))),
    ];
    let et01u = |q: &DVector<f64>| du_complex(&u, q, &et01(q));
    let et10u = |q: &DVector<f64>| du_complex(&u, q, &et10(q));
    rows.push(row(p, "Et10(Et01(u)) = h h_Z", C64::new(h * hz, 0.0), apply_field(&et10, &et01u, p, hstep).0));
    rows.push(row(p, "Et01(Et10(u)) = h h_Z", C64::new(h * hz, 0.0), apply_field(&et01, &et10u, p, hstep).0));
    let b = complex_bracket(&e10, &e01, p, hstep);
    let jz = ball::radial_jz(p);
    let target = (DVector::zeros(p.len()), &jz * -2.0);
    rows.push(row(p, "|[E10,E01] + 2i JZ| = 0", zero, C64::new(cvec_norm(&(&b.0 - &target.0, &b.1 - &target.1)), 0.0)));
    let e = |q: &DVector<f64>| ball::e_vector(q);
    let je = |q: &DVector<f64>| ball::apply_jst(&ball::e_vector(q));
    let ejet = calculus::lie_bracket(&e, &je, p, hstep);
    rows.push(row(
        p,
        "|[E10,E01] - 2i [E,JE]| = 0",
        zero,
        C64::new(cvec_norm(&(b.0.clone(), &b.1 - &ejet * 2.0)), 0.0),
    ));
    let jp = jf(p);
    let bt = complex_bracket(&et10, &et01, p, hstep);
    rows.push(row(
        p,
        "J[Et10,Et01](u) = 2i(1 + h h_Z)",
        C64::new(0.0, 2.0 * (1.0 + h * hz)),
        du_complex(&u, p, &apply_j(&jp, &bt)),
    ));
    let bz = complex_bracket(&et10, &z01, p, hstep);
    rows.push(row(p, "J[Et10,Z01](u) = i h_Z", C64::new(0.0, hz), du_complex(&u, p, &apply_j(&jp, &bz))));
    let et = e_tilde(profile, p);
    let jet_closed = ball::apply_jst(&ball::e_vector(p)) - ball::radial_jz(p) * h;
    rows.push(row(p, "|JEt - (J_st E - h J_st Z)| = 0", zero, C64::new((&jp * &et - jet_closed).amax(), 0.0)));
    // Hessian entries through the complexified formula with the actual fields
    let etf = |q: &DVector<f64>| e_tilde(profile, q);
    let jetf = |q: &DVector<f64>| j.j(q) * e_tilde(profile, q);
    let zf = |q: &DVector<f64>| ball::radial_z(q);
    let jzf = |q: &DVector<f64>| j.j(q) * ball::radial_z(q);
    let entries: [(&str, &Field, &Field, f64); 6] = [
        ("Hess(Et,Et) = 1 + 2h h_Z", &etf, &etf, 1.0 + 2.0 * h * hz),
        ("Hess(Et,JEt) = 0", &etf, &jetf, 0.0),
        ("Hess(Et,Z) = h_Z", &etf, &zf, hz),
        ("Hess(Et,JZ) = 0", &etf, &jzf, 0.0),
        ("Hess(Z,Z) = 0", &zf, &zf, 0.0),
        ("Hess(Z,JZ) = 0", &zf, &jzf, 0.0),
    ];
    for (name, x, y, expected) in entries {
        let (v, _) = hess_complexified(&u, &jf, p, x, y, hstep);
        rows.push(row(p, name, C64::new(expected, 0.0), C64::new(v, 0.0)));
    }
    rows
}

/// Full reproduction of the example on axis probe points.
pub fn example58_report(profile: ShellProfile, count: usize, rmin: f64, rmax: f64) -> Result<Example58Report> {
    let j = acs::structure_from_deformation(DeformationTensor::radial_h(profile))?;
    let u = calculus::LogTau0;
    let tol = EXAMPLE58_TOL;
    let probes = axis_points(2, count, rmin, rmax);
    let jf = |q: &DVector<f64>| j.j(q);
    let results: Vec<(Vec<IdentityRow>, Example58Point, Vec<f64>)> = probes
        .par_iter()
        .map(|p| {
            let rows = example58_identities(&j, &profile, p);
            let frame = tilde_frame(&j, &profile, p)?;
            let rep = j_hessian(&u, &j, p, &frame, "Et,JEt,Z,JZ")?;
            let rho = p.norm();
            let (h, hz) = (profile.h(rho), profile.h_z(rho));
            let expected = example58_matrix(h, hz);
            let max_entry_error = (rep.matrix() - &expected).amax();
            let ev = example58_eigenvalues(h, hz);
            let eigen_error = rep.eigenvalues.iter().zip(&ev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let plain: Vec<f64> = EXAMPLE58_STEPS
                .iter()
                .map(|&s| {
                    let mut e = 0.0f64;
                    for a in 0..4 {
                        for b in 0..4 {
                            let v = hess_polar_plain(&u, &jf, p, &frame.vectors[a], &frame.vectors[b], s);
                            e = e.max((v - expected[(a, b)]).abs());
                        }
                    }
                    e
                })
                .collect();
            let point = Example58Point {
                point: p.iter().cloned().collect(),
                rho,
                h,
                h_z: hz,
                min_eigenvalue: rep.eigenvalues[0],
                hessian: rep,
                expected: to_rows(&expected),
                max_entry_error,
                expected_eigenvalues: ev,
                eigen_error,
            };
            Ok((rows, point, plain))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut identities = Vec::new();
    let mut points = Vec::new();
    let mut step_max = vec![0.0f64; EXAMPLE58_STEPS.len()];
    for (rows, point, plain) in results {
        identities.extend(rows);
        points.push(point);
        for (m, e) in step_max.iter_mut().zip(plain) {
            *m = m.max(e);
        }
    }
    let step_errors: Vec<(f64, f64)> = EXAMPLE58_STEPS.iter().cloned().zip(step_max.iter().cloned()).collect();
    let step_ratios = step_max.windows(2).map(|w| w[0] / w[1]).collect();
    let identities_ok = identities.iter().all(|r| r.error < tol);
    let hessian_ok = points.iter().all(|p| p.max_entry_error < tol);
    let eigen_ok = points.iter().all(|p| p.eigen_error < tol);
    let non_psh_detected = points.iter().filter(|p| p.h_z.abs() > 1e-3).all(|p| p.min_eigenvalue < 0.0);
    let psh = points.iter().all(|p| p.min_eigenvalue >= -tol);
    Ok(Example58Report {
        profile,
        tol,
        identities,
        points,
        step_errors,
        step_ratios,
        identities_ok,
        hessian_ok,
        eigen_ok,
        non_psh_detected,
        psh,
    })
}
