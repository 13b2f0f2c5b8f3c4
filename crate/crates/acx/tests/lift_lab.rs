mod common;

use std::sync::Arc;

use acx::acs::{self, AcStructure, DeformationTensor, Family, ShellProfile, StandardStructure, Structure};
use acx::lift::{self, LiftSpace};
use acx::sampling::Sampler;
use acx::stationary::disk_point;
use acx::variations;
use common::c;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn radial_h() -> Structure {
    Arc::new(acs::structure_from_deformation(DeformationTensor::radial_h(ShellProfile::default())).unwrap())
}

/// `J′(x) = A J(A⁻¹x) A⁻¹` for a fixed real-linear `A`.
struct Pushed {
    inner: Structure,
    a: DMatrix<f64>,
    ai: DMatrix<f64>,
}

impl AcStructure for Pushed {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn j(&self, x: &DVector<f64>) -> DMatrix<f64> {
        &self.a * self.inner.j(&(&self.ai * x)) * &self.ai
    }
    fn dj(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let inner = self.inner.dj(&(&self.ai * x));
        (0..x.len())
            .map(|k| {
                let mut acc = DMatrix::zeros(x.len(), x.len());
                for (l, d) in inner.iter().enumerate() {
                    acc += d * self.ai[(l, k)];
                }
                &self.a * acc * &self.ai
            })
            .collect()
    }
    fn family(&self) -> Family {
        Family::Rotated
    }
    fn deformation(&self) -> Option<&DeformationTensor> {
        None
    }
}

fn shear() -> (DMatrix<f64>, DMatrix<f64>) {
    let a = DMatrix::from_row_slice(4, 4, &[1.0, 0.2, 0.0, -0.1, 0.0, 0.9, 0.3, 0.0, 0.1, 0.0, 1.1, 0.2, 0.0, -0.2, 0.0, 0.8]) * 0.5;
    let ai = a.clone().try_inverse().unwrap();
    (a, ai)
}

fn block(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(a);
    out.view_mut((m, m), (m, m)).copy_from(b);
    out
}

#[test]
fn standard_lifts_are_exact() {
    for n in 2..4 {
        let j: Structure = Arc::new(StandardStructure::new(n));
        let mut s = Sampler::new(n as u64);
        for x in acs::probe_points(n, 5, 3, 0.1, 0.9) {
            let q = s.gaussian_vector(2 * n);
            assert_eq!(lift::lift_tangent(j.clone()).eval(&x, &q), lift::standard_lift(n, LiftSpace::Tangent));
            assert_eq!(lift::lift_cotangent(j.clone()).eval(&x, &q), lift::standard_lift(n, LiftSpace::Cotangent));
        }
    }
}

#[test]
fn lifts_are_natural_under_linear_maps() {
    let base = radial_h();
    let (a, ai) = shear();
    let pushed: Structure = Arc::new(Pushed { inner: base.clone(), a: a.clone(), ai: ai.clone() });
    let mut s = Sampler::new(41);
    for x in acs::probe_points(2, 10, 43, 0.3, 0.5) {
        let q = s.gaussian_vector(4);
        let p = s.gaussian_vector(4);
        let ax = &a * &x;
        let t = block(&a, &a);
        let ti = block(&ai, &ai);
        let want = &t * lift::lift_tangent(base.clone()).eval(&x, &q) * &ti;
        let got = lift::lift_tangent(pushed.clone()).eval(&ax, &(&a * &q));
        assert!((got - want).amax() < 1e-10);
        let ait = ai.transpose();
        let t = block(&a, &ait);
        let ti = block(&ai, &a.transpose());
        let want = &t * lift::lift_cotangent(base.clone()).eval(&x, &p) * &ti;
        let got = lift::lift_cotangent(pushed.clone()).eval(&ax, &(&ait * &p));
        assert!((got - want).amax() < 1e-10);
    }
}

#[test]
fn cotangent_lift_agrees_with_complex_form() {
    let j = radial_h();
    let mut s = Sampler::new(47);
    for x in acs::probe_points(2, 10, 53, 0.1, 0.9) {
        let p = s.gaussian_vector(4);
        assert!(lift::complex_form_discrepancy(&j, &x, &p) < 1e-10);
    }
}

#[test]
fn leaf_variations_are_holomorphic_for_tangent_lift() {
    let j = radial_h();
    let v = [c(0.6, 0.0), c(0.0, 0.8)];
    let w = variations::horizontal_direction(&v);
    let h = 1e-5;
    // Derivative of the one-parameter family of leaves ζ·(v + s w).
    let f = |z: C64| {
        let vp: Vec<C64> = v.iter().zip(&w).map(|(a, b)| a + b * h).collect();
        let vm: Vec<C64> = v.iter().zip(&w).map(|(a, b)| a - b * h).collect();
        let mut out = DVector::zeros(8);
        out.rows_mut(0, 4).copy_from(&disk_point(&v, z));
        out.rows_mut(4, 4).copy_from(&((disk_point(&vp, z) - disk_point(&vm, z)) / (2.0 * h)));
        out
    };
    let grid = variations::default_grid();
    assert!(lift::holomorphy_residual(&f, &lift::lift_tangent(j.clone()), &grid) < 1e-6);
    // An antiholomorphic fiber is not.
    let g = |z: C64| {
        let mut out = f(z);
        out.rows_mut(4, 4).copy_from(&disk_point(&w, z.conj()));
        out
    };
    assert!(lift::holomorphy_residual(&g, &lift::lift_tangent(j), &grid) > 1e-2);
}

#[test]
fn covector_real_round_trip() {
    let g = [c(0.3, -0.1), c(0.3, 0.1), c(-0.5, 0.2), c(-0.5, -0.2)];
    let p = lift::covector_real(&g);
    let (basis, _) = acs::complex_basis(4);
    let back = basis.transpose() * p.map(|v| C64::new(v, 0.0));
    for (a, b) in back.iter().zip(&g) {
        assert!((a - b).norm() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lifted_structures_square_to_minus_identity(seed in 0u64..1000, scale in 0.1f64..10.0) {
        let mut s = Sampler::new(seed);
        let x = s.point_in_shell(2, 0.1, 0.95);
        let q = s.gaussian_vector(4) * scale;
        let id = DMatrix::<f64>::identity(8, 8);
        for j in [radial_h(), Arc::new(acs::structure_from_deformation(DeformationTensor::bump(ShellProfile::default())).unwrap()) as Structure] {
            let t = lift::lift_tangent(j.clone()).eval(&x, &q);
            let k = lift::lift_cotangent(j).eval(&x, &q);
            prop_assert!((&t * &t + &id).amax() < 1e-9 * (1.0 + scale));
            prop_assert!((&k * &k + &id).amax() < 1e-9 * (1.0 + scale));
        }
    }
}
