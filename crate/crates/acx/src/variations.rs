//! Infinitesimal variations of straight disks.
//!
//! A variation of `f(ζ) = ζ·v` is a vector field `W` along `f`. It is
//! infinitesimally `J`-holomorphic iff
//! `∂W/∂Re ζ + J|_f ∂W/∂Im ζ + (∂_k J)|_f W^k ∂f/∂Im ζ = 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::acs::{self, AcStructure, DeformationTensor, Structure};
use crate::ball::{self, RHO_MIN};
use crate::calculus;
use crate::error::{AcxError, Result};
use crate::lift;

/// Vector field along the disk `ζ ↦ ζ·v`.
#[derive(Clone)]
pub struct VariationField {
    pub v: Vec<C64>,
    pub label: String,
    field: Arc<dyn Fn(C64) -> DVector<f64> + Send + Sync>,
}

impl VariationField {
    pub fn new(v: Vec<C64>, label: &str, field: impl Fn(C64) -> DVector<f64> + Send + Sync + 'static) -> Self {
        VariationField { v, label: label.to_string(), field: Arc::new(field) }
    }

    pub fn at(&self, zeta: C64) -> DVector<f64> {
        (self.field)(zeta)
    }

    /// `αW₁ + βW₂` for real `α, β`.
    pub fn combine(&self, a: f64, other: &VariationField, b: f64) -> VariationField {
        let (f, g) = (self.field.clone(), other.field.clone());
        VariationField::new(self.v.clone(), "combination", move |z| f(z) * a + g(z) * b)
    }
}

/// `W^{(w)}(ζ) = ζ·w`, complex scalar multiplication in ℂⁿ.
pub fn coordinate_variation(v: &[C64], w: &[C64]) -> VariationField {
    let w = w.to_vec();
    VariationField::new(v.to_vec(), "zeta_w", move |z| {
        ball::to_real(&w.iter().map(|c| c * z).collect::<Vec<_>>())
    })
}

/// `ζ̄·w`: an antiholomorphic field used as a negative control.
pub fn antiholomorphic_variation(v: &[C64], w: &[C64]) -> VariationField {
    let w = w.to_vec();
    VariationField::new(v.to_vec(), "zetabar_w", move |z| {
        ball::to_real(&w.iter().map(|c| c * z.conj()).collect::<Vec<_>>())
    })
}

/// `J ∘ W`.
pub fn j_composed(j: Structure, w: &VariationField) -> VariationField {
    let v = w.v.clone();
    let inner = w.clone();
    VariationField::new(w.v.clone(), "J_of_W", move |z| {
        let x = crate::stationary::disk_point(&v, z);
        j.j(&x) * inner.at(z)
    })
}

/// Annular grid in the working region of the disk.
pub fn disk_grid(radii: usize, angles: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(radii * angles);
    for i in 0..radii {
        let r = (RHO_MIN + 0.05) + (0.95 - RHO_MIN - 0.05) * i as f64 / (radii.max(2) - 1) as f64;
        for k in 0..angles {
            out.push(C64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / angles as f64));
        }
    }
    out
}

pub fn default_grid() -> Vec<C64> {
    disk_grid(10, 16)
}

fn partials(w: &VariationField, z: C64) -> (DVector<f64>, DVector<f64>) {
    let f = |p: &DVector<f64>| w.at(C64::new(p[0], p[1]));
    let pt = DVector::from_vec(vec![z.re, z.im]);
    let (wx, _) = calculus::directional_vec(&f, &pt, &DVector::from_vec(vec![1.0, 0.0]), calculus::FD_STEP);
    let (wy, _) = calculus::directional_vec(&f, &pt, &DVector::from_vec(vec![0.0, 1.0]), calculus::FD_STEP);
    (wx, wy)
}

/// Left side of the variation equation at one point.
pub fn variation_defect(j: &dyn AcStructure, w: &VariationField, z: C64) -> DVector<f64> {
    let x = crate::stationary::disk_point(&w.v, z);
    let fy = ball::to_real(&w.v.iter().map(|c| c * C64::new(0.0, 1.0)).collect::<Vec<_>>());
    let (wx, wy) = partials(w, z);
    let jm = j.j(&x);
    let dj = j.dj(&x);
    let wv = w.at(z);
    let corr = lift::tangent_correction(&dj, &wv);
    wx + jm * wy + corr * fy
}

/// `sup` of the variation equation's left side over the grid.
pub fn variation_residual(j: &dyn AcStructure, w: &VariationField, grid: &[C64]) -> f64 {
    grid.iter().map(|&z| variation_defect(j, w, z).amax()).fold(0.0, f64::max)
}

/// Fails when `J` is undefined somewhere on the grid or the boundary of the disk `ζ ↦ ζ·v`.
pub fn check_disk_domain(j: &dyn AcStructure, v: &[C64], grid: &[C64], angles: usize) -> Result<()> {
    let circle = (0..angles).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / angles as f64));
    for z in grid.iter().cloned().chain(circle) {
        let x = crate::stationary::disk_point(v, z);
        if j.j(&x).iter().chain(j.dj(&x).iter().flat_map(|d| d.iter())).any(|c| !c.is_finite()) {
            return Err(AcxError::ChartDomain(format!("structure is undefined on the disk at ζ = {z}")));
        }
    }
    Ok(())
}

/// The same condition as holomorphy of `ζ ↦ (ζ·v, W(ζ))` for the tangent lift.
pub fn tangent_lift_residual(j: Structure, w: &VariationField, grid: &[C64]) -> f64 {
    let v = w.v.clone();
    let m = 2 * v.len();
    let f = |z: C64| {
        let mut out = DVector::zeros(2 * m);
        out.rows_mut(0, m).copy_from(&crate::stationary::disk_point(&v, z));
        out.rows_mut(m, m).copy_from(&w.at(z));
        out
    };
    lift::holomorphy_residual(&f, &lift::lift_tangent(j), grid)
}

/// `sup_{∂Δ} |d τ₀(W)|`: attachment of `W` to the sphere.
pub fn boundary_attachment(w: &VariationField, angles: usize) -> f64 {
    (0..angles)
        .map(|k| {
            let z = C64::from_polar(1.0, 2.0 * PI * k as f64 / angles as f64);
            let x = crate::stationary::disk_point(&w.v, z);
            (2.0 * x.dot(&w.at(z))).abs()
        })
        .fold(0.0, f64::max)
}

/// `sup |ζ|⁻¹ |W(ζ)| − inf |ζ|⁻¹ |W(ζ)|` over the grid.
pub fn modulus_deviation(w: &VariationField, grid: &[C64]) -> f64 {
    let vals: Vec<f64> = grid.iter().map(|&z| w.at(z).norm() / z.norm()).collect();
    let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
    let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
    hi - lo
}

pub const PASS_BAND: f64 = 1e-5;
pub const FAIL_BAND: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

pub fn verdict(residual: f64) -> Verdict {
    if residual < PASS_BAND {
        Verdict::Pass
    } else if residual > FAIL_BAND {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub w_residual: f64,
    pub jw_residual: f64,
    pub w_verdict: Verdict,
    pub jw_verdict: Verdict,
    /// `sup ‖ℒ_{Z^{01}} J‖` along the disk.
    pub lie_j_residual: f64,
    /// `sup ‖ℒ_{Z^{01}} φ^ℋ‖` along the disk.
    pub lie_phi_residual: Option<f64>,
    pub very_nice: Option<bool>,
    /// `J∘W` passes iff the structure is very nice.
    pub consistent: Option<bool>,
    pub note: Option<String>,
}

/// Complexified `J` as a complex matrix field.
fn j_complex(j: &dyn AcStructure, x: &DVector<f64>) -> DMatrix<C64> {
    j.j(x).map(|v| C64::new(v, 0.0))
}

pub fn very_nice_closure_test(
    j: Structure,
    phi: Option<&DeformationTensor>,
    v: &[C64],
    w: &[C64],
    grid: &[C64],
) -> ClosureReport {
    let wf = coordinate_variation(v, w);
    let jw = j_composed(j.clone(), &wf);
    let w_residual = variation_residual(j.as_ref(), &wf, grid);
    let jw_residual = variation_residual(j.as_ref(), &jw, grid);
    let points: Vec<DVector<f64>> = grid.iter().map(|&z| crate::stationary::disk_point(v, z)).collect();
    let lie_j_residual = points
        .iter()
        .map(|x| {
            acs::lie_z01(&|q| j_complex(j.as_ref(), q), x)
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let (lie_phi_residual, very_nice) = match phi {
        Some(phi) => {
            let report = acs::nicety(phi, &points);
            (Some(report.lie_phi_h_sup), Some(report.very_nice))
        }
        None => (None, None),
    };
    let jw_verdict = verdict(jw_residual);
    let consistent = very_nice.map(|vn| match jw_verdict {
        Verdict::Pass => vn,
        Verdict::Fail => !vn,
        Verdict::Inconclusive => false,
    });
    let note = (jw_verdict == Verdict::Inconclusive)
        .then(|| "J∘W residual in the gray zone; refine the grid or sample where the deformation is supported".into());
    ClosureReport {
        w_residual,
        jw_residual,
        w_verdict: verdict(w_residual),
        jw_verdict,
        lie_j_residual,
        lie_phi_residual,
        very_nice,
        consistent,
        note,
    }
}

/// A unit vector tangent to the sphere at the unit vector `v`, Hermitian
/// orthogonal to `v` (so that `ζ·w` stays in `ℋ` along the disk).
pub fn horizontal_direction(v: &[C64]) -> Vec<C64> {
    let n = v.len();
    let mut w = vec![C64::new(0.0, 0.0); n];
    // w = (−conj(v₂), conj(v₁), 0, …) rotated into the first two slots with nonzero entries
    if n >= 2 {
        w[0] = -v[1].conj();
        w[1] = v[0].conj();
    }
    let nw = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nw < 1e-12 {
        w = vec![C64::new(0.0, 0.0); n];
        w[n - 1] = C64::new(1.0, 0.0);
        return w;
    }
    w.iter().map(|c| c / nw).collect()
}
