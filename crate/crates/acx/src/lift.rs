//! Canonical lifts of `J` to the tangent and cotangent bundles.
//!
//! Coordinates on `TM` are `(x^i, q^i)` and on `T*M` are `(x^i, p_i)`, both
//! real, base block first. The fiber corrections are linear in the fiber
//! coordinates, so only base derivatives of `J` enter.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::acs::{self, AcStructure, Structure};
use crate::ball;
use crate::calculus;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftSpace {
    Tangent,
    Cotangent,
}

/// A lifted structure on `TM` or `T*M`.
#[derive(Clone)]
pub struct LiftedStructure {
    pub base: Structure,
    pub space: LiftSpace,
}

pub fn lift_tangent(j: Structure) -> LiftedStructure {
    LiftedStructure { base: j, space: LiftSpace::Tangent }
}

pub fn lift_cotangent(j: Structure) -> LiftedStructure {
    LiftedStructure { base: j, space: LiftSpace::Cotangent }
}

/// Fiber-correction block of the tangent lift: `(Σ_b q^b ∂_b J)^a_i`.
pub fn tangent_correction(dj: &[DMatrix<f64>], q: &DVector<f64>) -> DMatrix<f64> {
    let m = q.len();
    let mut c = DMatrix::zeros(m, m);
    for (b, d) in dj.iter().enumerate() {
        c += d * q[b];
    }
    c
}

/// Fiber-correction block of the cotangent lift, row `j`, column `i`:
/// `½ p_a (−∂_j J^a_i + ∂_i J^a_j + J^a_ℓ (∂_m J^ℓ_i J^m_j − ∂_m J^ℓ_j J^m_i))`.
pub fn cotangent_correction(j: &DMatrix<f64>, dj: &[DMatrix<f64>], p: &DVector<f64>) -> DMatrix<f64> {
    cotangent_correction_generic(
        &j.map(|v| C64::new(v, 0.0)),
        &dj.iter().map(|d| d.map(|v| C64::new(v, 0.0))).collect::<Vec<_>>(),
        &p.map(|v| C64::new(v, 0.0)),
    )
    .map(|c| c.re)
}

/// The same formula over complex components, valid in any linear coordinates.
pub fn cotangent_correction_generic(j: &DMatrix<C64>, dj: &[DMatrix<C64>], p: &DVector<C64>) -> DMatrix<C64> {
    let m = p.len();
    // S_m = ∂_m J ; T^ℓ_{ij} = Σ_m (∂_m J^ℓ_i J^m_j)
    let mut t = vec![DMatrix::<C64>::zeros(m, m); m];
    for (l, tl) in t.iter_mut().enumerate() {
        for i in 0..m {
            for jj in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for (mm, d) in dj.iter().enumerate() {
                    acc += d[(l, i)] * j[(mm, jj)];
                }
                tl[(i, jj)] = acc;
            }
        }
    }
    let mut c = DMatrix::zeros(m, m);
    for jj in 0..m {
        for i in 0..m {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..m {
                let mut term = -dj[jj][(a, i)] + dj[i][(a, jj)];
                for (l, tl) in t.iter().enumerate() {
                    term += j[(a, l)] * (tl[(i, jj)] - tl[(jj, i)]);
                }
                s += p[a] * term;
            }
            c[(jj, i)] = s * 0.5;
        }
    }
    c
}

impl LiftedStructure {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Real `4n × 4n` matrix at base point `x` and fiber coordinates `fiber`.
    pub fn eval(&self, x: &DVector<f64>, fiber: &DVector<f64>) -> DMatrix<f64> {
        let m = x.len();
        let j = self.base.j(x);
        let dj = self.base.dj(x);
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        out.view_mut((0, 0), (m, m)).copy_from(&j);
        match self.space {
            LiftSpace::Tangent => {
                out.view_mut((m, 0), (m, m)).copy_from(&tangent_correction(&dj, fiber));
                out.view_mut((m, m), (m, m)).copy_from(&j);
            }
            LiftSpace::Cotangent => {
                out.view_mut((m, 0), (m, m)).copy_from(&cotangent_correction(&j, &dj, fiber));
                out.view_mut((m, m), (m, m)).copy_from(&j.transpose());
            }
        }
        out
    }
}

/// The standard structure of `Tℂⁿ` or `T*ℂⁿ` in the same coordinates.
pub fn standard_lift(n: usize, space: LiftSpace) -> DMatrix<f64> {
    let m = 2 * n;
    let j = ball::j_st(n);
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(&j);
    match space {
        LiftSpace::Tangent => out.view_mut((m, m), (m, m)).copy_from(&j),
        LiftSpace::Cotangent => out.view_mut((m, m), (m, m)).copy_from(&j.transpose()),
    }
    out
}

/// Change of basis from complex coordinates `(z^A, p_A)` to real `(x^i, p_i)`:
/// `∂/∂z^A` on the base and `p_i = Σ_A p_A ∂z^A/∂x^i` on the fiber.
pub fn cotangent_complex_basis(m: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let (p, pinv) = acs::complex_basis(m);
    let mut q = DMatrix::zeros(2 * m, 2 * m);
    let mut qi = DMatrix::zeros(2 * m, 2 * m);
    q.view_mut((0, 0), (m, m)).copy_from(&p);
    q.view_mut((m, m), (m, m)).copy_from(&pinv.transpose());
    qi.view_mut((0, 0), (m, m)).copy_from(&pinv);
    qi.view_mut((m, m), (m, m)).copy_from(&p.transpose());
    (q, qi)
}

/// Complex-coordinate cotangent lift assembled independently from the complex
/// components `J^B_A`, their derivatives `∂_{z^C} J^B_A`, and complex fiber
/// coordinates `p_A`: `J^B_A(∂_{z^B} ⊗ dz^A + ∂_{p_A} ⊗ dp_B)` plus the
/// correction block.
pub fn cotangent_complex_form(j: &dyn AcStructure, x: &DVector<f64>, p_complex: &DVector<C64>) -> DMatrix<C64> {
    let m = x.len();
    let (basis, _) = acs::complex_basis(m);
    let jc = acs::complex_components(&j.j(x));
    let dj = j.dj(x);
    let djc_real: Vec<DMatrix<C64>> = dj.iter().map(acs::complex_components).collect();
    // ∂_{z^C} = Σ_k P[k, C] ∂_k
    let djc: Vec<DMatrix<C64>> = (0..m)
        .map(|c| {
            let mut acc = DMatrix::<C64>::zeros(m, m);
            for (k, d) in djc_real.iter().enumerate() {
                acc += d * basis[(k, c)];
            }
            acc
        })
        .collect();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(&jc);
    out.view_mut((m, 0), (m, m)).copy_from(&cotangent_correction_generic(&jc, &djc, p_complex));
    out.view_mut((m, m), (m, m)).copy_from(&jc.transpose());
    out
}

/// `max |Q⁻¹ 𝕁̃ Q − (complex form)|` at `(x, p)` for real fiber coordinates `p`.
pub fn complex_form_discrepancy(j: &Structure, x: &DVector<f64>, p: &DVector<f64>) -> f64 {
    let m = x.len();
    let (q, qi) = cotangent_complex_basis(m);
    let real = lift_cotangent(j.clone()).eval(x, p).map(|v| C64::new(v, 0.0));
    let converted = &qi * real * &q;
    // p_A with p_i = Σ_A p_A (dz^A)_i, i.e. p_real = (P⁻¹)ᵀ p_c
    let (basis, _) = acs::complex_basis(m);
    let pc = basis.transpose() * p.map(|v| C64::new(v, 0.0));
    let direct = cotangent_complex_form(j.as_ref(), x, &pc);
    (converted - direct).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Step for the central differences of maps `Δ̄ → lifted space`.
pub const MAP_FD_STEP: f64 = 1e-4;

/// `sup ‖F_*(∂/∂Im ζ) − 𝕃 F_*(∂/∂Re ζ)‖` over the grid, i.e. the defect of
/// `F_* ∘ J_st = 𝕃 ∘ F_*`. `f` returns the base point followed by the fiber.
pub fn holomorphy_residual(f: &dyn Fn(C64) -> DVector<f64>, lifted: &LiftedStructure, grid: &[C64]) -> f64 {
    let fr = |p: &DVector<f64>| f(C64::new(p[0], p[1]));
    let ex = DVector::from_vec(vec![1.0, 0.0]);
    let ey = DVector::from_vec(vec![0.0, 1.0]);
    grid.iter()
        .map(|&z| {
            let pt = DVector::from_vec(vec![z.re, z.im]);
            let (fx, _) = calculus::directional_vec(&fr, &pt, &ex, MAP_FD_STEP);
            let (fy, _) = calculus::directional_vec(&fr, &pt, &ey, MAP_FD_STEP);
            let val = f(z);
            let m = val.len() / 2;
            let base = val.rows(0, m).into_owned();
            let fiber = val.rows(m, m).into_owned();
            let l = lifted.eval(&base, &fiber);
            (fy - l * fx).amax()
        })
        .fold(0.0, f64::max)
}

/// Real cotangent fiber coordinates of the covector `Σ_A g_A dz^A` given its
/// complex components in the order `0, 0̄, 1, 1̄, …`.
pub fn covector_real(g: &[C64]) -> DVector<f64> {
    let m = g.len();
    let mut p = DVector::zeros(m);
    for a in 0..m / 2 {
        let (ga, gb) = (g[2 * a], g[2 * a + 1]);
        p[2 * a] = (ga + gb).re;
        p[2 * a + 1] = (C64::new(0.0, 1.0) * (ga - gb)).re;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::{structure_from_deformation, DeformationTensor, ShellProfile, StandardStructure};
    use std::sync::Arc;

    #[test]
    fn standard_lifts_are_exact() {
        let j: Structure = Arc::new(StandardStructure::new(2));
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.1]);
        let q = DVector::from_vec(vec![1.0, -2.0, 0.5, 0.3]);
        for space in [LiftSpace::Tangent, LiftSpace::Cotangent] {
            let l = LiftedStructure { base: j.clone(), space };
            assert_eq!(l.eval(&x, &q), standard_lift(2, space));
        }
    }

    #[test]
    fn lifts_square_to_minus_identity() {
        let j: Structure =
            Arc::new(structure_from_deformation(DeformationTensor::radial_h(ShellProfile::default())).unwrap());
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.1]);
        let q = DVector::from_vec(vec![1.0, -2.0, 0.5, 0.3]);
        for space in [LiftSpace::Tangent, LiftSpace::Cotangent] {
            let l = LiftedStructure { base: j.clone(), space }.eval(&x, &q);
            assert!((&l * &l + DMatrix::<f64>::identity(8, 8)).amax() < 1e-9);
        }
    }

    #[test]
    fn covector_real_round_trip() {
        let g = [C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.3, -0.2), C64::new(0.3, 0.2)];
        let p = covector_real(&g);
        assert_eq!(p.as_slice(), &[2.0, 0.0, 0.6, 0.4]);
    }
}
