mod common;

use std::sync::Arc;

use acx::acs::{self, DeformationTensor, ShellProfile, StandardStructure, Structure};
use acx::stationary::disk_point;
use acx::variations::{self, VariationField, Verdict};
use acx::AcxError;
use common::c;
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn structures() -> Vec<(&'static str, Structure, Option<DeformationTensor>)> {
    let p = ShellProfile::default();
    let mut out: Vec<(&'static str, Structure, Option<DeformationTensor>)> =
        vec![("standard", Arc::new(StandardStructure::new(2)), Some(DeformationTensor::zero()))];
    for (name, phi) in [
        ("radial_h", DeformationTensor::radial_h(p)),
        ("bump", DeformationTensor::bump(p)),
        ("radially_invariant", DeformationTensor::radially_invariant(0.3)),
    ] {
        out.push((name, Arc::new(acs::structure_from_deformation(phi.clone()).unwrap()), Some(phi)));
    }
    out
}

fn direction() -> Vec<C64> {
    vec![c(0.6, 0.0), c(0.0, 0.8)]
}

/// `d/ds [∂_x F_s + J(F_s) ∂_y F_s]` at `s = 0` for `F_s = ζ·v + s W`, by
/// central differences in `s` and in `ζ`.
fn linearization_oracle(j: &Structure, w: &VariationField, z: C64) -> DVector<f64> {
    let defect = |s: f64| {
        let f = |z: C64| disk_point(&w.v, z) + w.at(z) * s;
        let h = 1e-6;
        let fx = (f(z + h) - f(z - h)) / (2.0 * h);
        let fy = (f(z + c(0.0, h)) - f(z - c(0.0, h))) / (2.0 * h);
        fx + j.j(&f(z)) * fy
    };
    let s = 1e-4;
    (defect(s) - defect(-s)) / (2.0 * s)
}

#[test]
fn defect_matches_linearized_holomorphy() {
    let v = direction();
    let w = variations::horizontal_direction(&v);
    for (name, j, _) in structures() {
        for field in [
            variations::antiholomorphic_variation(&v, &w),
            variations::j_composed(j.clone(), &variations::coordinate_variation(&v, &w)),
        ] {
            for &z in variations::disk_grid(4, 6).iter() {
                let got = variations::variation_defect(j.as_ref(), &field, z);
                let want = linearization_oracle(&j, &field, z);
                assert!((&got - &want).amax() < 1e-5 * (1.0 + want.amax()), "{name} {}: {got} {want}", field.label);
            }
        }
    }
}

#[test]
fn coordinate_variations_are_holomorphic() {
    let v = direction();
    let grid = variations::default_grid();
    for (name, j, _) in structures() {
        for w in [variations::horizontal_direction(&v), vec![c(0.3, -0.2), c(0.1, 0.5)]] {
            let f = variations::coordinate_variation(&v, &w);
            let r = variations::variation_residual(j.as_ref(), &f, &grid);
            assert!(r < 1e-8, "{name}: {r}");
            let t = variations::tangent_lift_residual(j.clone(), &f, &grid);
            assert!(t < 1e-8, "{name}: {t}");
            assert!(variations::modulus_deviation(&f, &grid) < 1e-12);
        }
        let bad = variations::antiholomorphic_variation(&v, &variations::horizontal_direction(&v));
        assert!(variations::variation_residual(j.as_ref(), &bad, &grid) > 1e-2, "{name}");
    }
}

#[test]
fn horizontal_variations_stay_on_the_sphere() {
    let v = direction();
    let w = variations::horizontal_direction(&v);
    let dot: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
    assert!(dot.norm() < 1e-15);
    let f = variations::coordinate_variation(&v, &w);
    assert!(variations::boundary_attachment(&f, 64) < 1e-14);
    let radial = variations::coordinate_variation(&v, &v);
    assert!(variations::boundary_attachment(&radial, 64) > 1.0);
}

#[test]
fn closure_under_j_tracks_very_nicety() {
    let v = direction();
    let w = variations::horizontal_direction(&v);
    let grid = variations::default_grid();
    let expect = [("standard", Verdict::Pass), ("radial_h", Verdict::Fail), ("bump", Verdict::Fail), ("radially_invariant", Verdict::Pass)];
    for ((name, j, phi), (ename, verdict)) in structures().into_iter().zip(expect) {
        assert_eq!(name, ename);
        let r = variations::very_nice_closure_test(j, phi.as_ref(), &v, &w, &grid);
        assert_eq!(r.w_verdict, Verdict::Pass, "{name}");
        assert_eq!(r.jw_verdict, verdict, "{name}: {r:?}");
        assert_eq!(r.consistent, Some(true), "{name}: {r:?}");
    }
}

#[test]
fn verdict_bands() {
    assert_eq!(variations::verdict(1e-7), Verdict::Pass);
    assert_eq!(variations::verdict(1e-4), Verdict::Inconclusive);
    assert_eq!(variations::verdict(1e-1), Verdict::Fail);
}

#[test]
fn degenerate_disk_is_rejected() {
    let (_, j, _) = structures().remove(1);
    let v = [c(1.0, 0.0), c(0.0, 0.0)];
    let r = variations::check_disk_domain(j.as_ref(), &v, &variations::default_grid(), 64);
    assert!(matches!(r, Err(AcxError::ChartDomain(_))));
    assert!(variations::check_disk_domain(j.as_ref(), &direction(), &variations::default_grid(), 64).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn defect_is_real_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, th in 0.0f64..std::f64::consts::TAU, r in 0.2f64..0.9) {
        let (_, j, _) = structures().remove(2);
        let v = direction();
        let w1 = variations::antiholomorphic_variation(&v, &[c(0.3, 0.1), c(-0.2, 0.4)]);
        let w2 = variations::j_composed(j.clone(), &variations::coordinate_variation(&v, &[c(0.0, 1.0), c(0.5, 0.0)]));
        let z = C64::from_polar(r, th);
        let lhs = variations::variation_defect(j.as_ref(), &w1.combine(a, &w2, b), z);
        let rhs = variations::variation_defect(j.as_ref(), &w1, z) * a + variations::variation_defect(j.as_ref(), &w2, z) * b;
        prop_assert!((lhs - rhs).amax() < 1e-7 * (1.0 + a.abs() + b.abs()));
    }
}
