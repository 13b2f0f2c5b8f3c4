mod common;

use std::sync::Arc;

use acx::acs::{self, DeformationTensor, ShellProfile, StandardStructure, Structure};
use acx::ball;
use acx::calculus::{LogTau0, ScalarField, Tau0};
use acx::ma::{self, Region};
use acx::sampling::Sampler;
use common::{c, fd_hessian, levi_standard};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn deformed(phi: DeformationTensor) -> Structure {
    Arc::new(acs::structure_from_deformation(phi).unwrap())
}

/// `dd^c u(X, Y) = X(d^c u(Y)) − Y(d^c u(X))` for constant `X, Y`, with
/// `d^c u(Y) = −du(JY)`, by central differences.
fn ddc_oracle(u: &dyn ScalarField, j: &Structure, p: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let dc = |q: &DVector<f64>, v: &DVector<f64>| -u.gradient(q).dot(&(j.j(q) * v));
    let h = 1e-5;
    let d = |dir: &DVector<f64>, v: &DVector<f64>| (dc(&(p + dir * h), v) - dc(&(p - dir * h), v)) / (2.0 * h);
    d(x, y) - d(y, x)
}

#[test]
fn ddc_matches_exterior_derivative_oracle() {
    let p = ShellProfile::default();
    let mut s = Sampler::new(61);
    for j in [deformed(DeformationTensor::radial_h(p)), deformed(DeformationTensor::bump(p))] {
        for q in acs::probe_points(2, 8, 67, 0.3, 0.5) {
            let x = s.gaussian_vector(4);
            let y = s.gaussian_vector(4);
            for u in [&Tau0 as &dyn ScalarField, &LogTau0] {
                let got = ma::ddc(u, j.as_ref(), &q, &x, &y);
                let want = ddc_oracle(u, &j, &q, &x, &y);
                assert!((got - want).abs() < 1e-6 * (1.0 + want.abs()), "{} {got} {want}", u.name());
            }
        }
    }
}

#[test]
fn standard_hessians_match_real_hessian() {
    let j = StandardStructure::new(2);
    let mut s = Sampler::new(71);
    for _ in 0..8 {
        let q = s.point_in_shell(2, 0.2, 0.9);
        let r = ma::j_hessian(&Tau0, &j, &q, &ma::euclidean_frame(4), "euclidean").unwrap();
        assert!((r.matrix() - DMatrix::identity(4, 4) * 4.0).amax() < 1e-6);
        assert!(r.formula_gap < 1e-6 && r.j_hermitian_defect < 1e-6);
        let x = s.gaussian_vector(4);
        let h = fd_hessian(&|p| LogTau0.gradient(p), &q, 1e-5);
        let levi = ma::levi_form(&LogTau0, &j, &q, &x);
        assert!((levi - levi_standard(&h, &x)).abs() < 1e-5 * (1.0 + levi.abs()));
    }
}

#[test]
fn log_tau0_is_maximal_for_standard_structure() {
    let j = StandardStructure::new(2);
    for q in acs::probe_points(2, 10, 73, 0.2, 0.9) {
        let log = ma::ma_degeneracy(&LogTau0, &j, &q, 1e-5);
        assert!(log.eigen_degenerate && log.pfaffian_degenerate, "{log:?}");
        let tau = ma::ma_degeneracy(&Tau0, &j, &q, 1e-5);
        assert!(!tau.eigen_degenerate && !tau.pfaffian_degenerate);
        // J-Hessian of τ₀ is 4I, so the Pfaffian of dd^c + J*dd^c is 8² = 64.
        assert!((tau.pfaffian.abs() - 64.0).abs() < 1e-4, "{}", tau.pfaffian);
        let (kz, kjz) = ma::kernel_alignment(&LogTau0, &j, &q).unwrap();
        assert!(kz < 1e-6 && kjz < 1e-6);
    }
}

#[test]
fn log_tau0_is_harmonic_along_straight_disks() {
    let v = [c(0.6, 0.0), c(0.0, 0.8)];
    let grid = acx::variations::default_grid();
    assert!(ma::harmonicity_along_disk(&LogTau0, &v, &grid) < 1e-6);
    // Δ|ζ|² = 4.
    assert!((ma::harmonicity_along_disk(&Tau0, &v, &grid) - 4.0).abs() < 1e-6);
}

#[test]
fn example_matrix_eigenvalues() {
    for (h, hz) in [(0.0, 0.0), (0.05, -0.3), (0.1, 0.7)] {
        let m = ma::example58_matrix(h, hz);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in ev.iter().zip(ma::example58_eigenvalues(h, hz)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn shell_example_reproduces_hessian() {
    let r = ma::example58_report(ShellProfile::default(), 9, 0.2, 0.7).unwrap();
    assert!(r.identities_ok, "{:?}", r.identities.iter().map(|x| x.error).fold(0.0, f64::max));
    assert!(r.hessian_ok && r.eigen_ok);
    assert!(r.non_psh_detected);
    assert!(!r.psh);
    // Second-order stencil: halving the step divides the error by about four.
    for q in &r.step_ratios {
        assert!(*q > 2.0, "{:?}", r.step_ratios);
    }
}

#[test]
fn green_function_checks() {
    let region = Region::shell(0.2, 0.9, 12, 79);
    let std = ma::green_check(&StandardStructure::new(2), &region, 1e-5, 1e-5).unwrap();
    assert!(std.pass, "{std:?}");
    let rh = ma::green_check(deformed(DeformationTensor::radial_h(ShellProfile::default())).as_ref(), &Region::axis(0.25, 0.55, 12), 1e-5, 1e-5).unwrap();
    assert!(rh.boundary_ok && rh.pole_ok);
    assert!(!rh.psh.psh);
}

#[test]
fn degenerate_frames_are_rejected() {
    let q = ball::to_real(&[c(0.1, 0.2), c(0.3, -0.1)]);
    let x = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let frame = ball::Frame { labels: vec!["a".into(), "b".into()], vectors: vec![x.clone(), x * 2.0] };
    assert!(ma::j_hessian(&Tau0, &StandardStructure::new(2), &q, &frame, "bad").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pfaffian_squares_to_determinant(v in prop::collection::vec(-2.0f64..2.0, 15)) {
        let mut a = DMatrix::zeros(6, 6);
        let mut k = 0;
        for i in 0..6 {
            for j in (i + 1)..6 {
                a[(i, j)] = v[k];
                a[(j, i)] = -v[k];
                k += 1;
            }
        }
        let pf = ma::pfaffian(&a);
        prop_assert!((pf * pf - a.determinant()).abs() < 1e-9 * (1.0 + pf * pf));
        let b = a.view((0, 0), (4, 4)).into_owned();
        let want = b[(0, 1)] * b[(2, 3)] - b[(0, 2)] * b[(1, 3)] + b[(0, 3)] * b[(1, 2)];
        prop_assert!((ma::pfaffian(&b) - want).abs() < 1e-12);
    }

    #[test]
    fn hessian_is_j_invariant_for_integrable_structure(seed in 0u64..500) {
        let mut s = Sampler::new(seed);
        let q = s.point_in_shell(2, 0.2, 0.9);
        let j = StandardStructure::new(2);
        let r = ma::j_hessian(&LogTau0, &j, &q, &ma::euclidean_frame(4), "euclidean").unwrap();
        prop_assert!(r.j_hermitian_defect < 1e-5 && r.symmetry_defect < 1e-9);
    }
}
