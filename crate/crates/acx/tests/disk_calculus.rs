mod common;

use std::f64::consts::PI;

use acx::disk::{self, BoundaryFunction, DiskFunction, PolarGrid};
use common::{boundary_moment, c, cauchy_oracle};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn probes(count: usize) -> Vec<C64> {
    (0..count)
        .map(|k| {
            let t = k as f64 + 0.5;
            C64::from_polar(0.9 * (t / count as f64).sqrt(), 2.399963229728653 * t)
        })
        .collect()
}

#[test]
fn dbar_inverts_cauchy_transform_on_full_basis() {
    let degree = 23;
    for (a, b) in disk::monomials(degree) {
        let f = DiskFunction::monomial(a, b, c(1.0, 0.0), degree);
        let back = disk::cauchy_transform(&f).dbar().with_degree(degree);
        assert!(back.coeff_distance(&f) < 1e-12, "ζ^{a} ζ̄^{b}");
    }
}

#[test]
fn cauchy_transform_matches_quadrature() {
    let f = DiskFunction::from_fn(6, |a, b| c(1.0 / (1 + a + 2 * b) as f64, 0.3 * a as f64 - 0.2 * b as f64));
    let t = disk::cauchy_transform(&f);
    for z in probes(20) {
        let q = cauchy_oracle(&|w| f.eval(w), z, 48, 96);
        assert!((t.eval(z) - q).norm() < 1e-6, "ζ = {z}: {} vs {q}", t.eval(z));
    }
}

#[test]
fn cauchy_transform_of_radial_function_matches_quadrature() {
    let f = DiskFunction::from_fn(8, |a, b| if a == b { c(1.0 / (a + 1) as f64, 0.0) } else { c(0.0, 0.0) });
    let t = disk::cauchy_transform(&f);
    for z in probes(20) {
        let q = cauchy_oracle(&|w| f.eval(w), z, 48, 96);
        assert!((t.eval(z) - q).norm() < 1e-6);
    }
}

#[test]
fn moments_match_trapezoid_rule() {
    let f = DiskFunction::from_fn(5, |a, b| c((a as f64 - 1.5) * 0.2, 0.1 * b as f64));
    let t = disk::cauchy_transform(&f);
    for n in 0..6 {
        let exact = disk::moment_integral(&t, n);
        let q = boundary_moment(&|z| t.eval(z), n as i32, 256);
        assert!((exact - q).norm() < 1e-10, "n = {n}");
    }
}

#[test]
fn radial_transform_moments_vanish_above_zero() {
    let f = DiskFunction::from_fn(6, |a, b| if a == b { c(1.0 + a as f64, 0.0) } else { c(0.0, 0.0) });
    let t = disk::cauchy_transform(&f);
    for n in 1..6 {
        assert!(disk::moment_integral(&t, n).norm() < 1e-10, "n = {n}");
    }
    // Stokes: the zeroth moment is 2i times the area integral, Σ_{a≤3} (1 + a)·π/(a + 1) = 4π.
    let m0 = disk::moment_integral(&t, 0);
    assert!((m0 - c(0.0, 8.0 * PI)).norm() < 1e-10, "{m0}");
}

#[test]
fn holomorphic_part_drops_negative_modes() {
    let b = BoundaryFunction::from_modes(4, &[(-2, c(1.0, 0.0)), (0, c(0.5, 0.0)), (3, c(0.0, 2.0))]);
    let h = disk::holomorphic_part(&b);
    let z = c(0.3, -0.4);
    assert!((h.eval(z) - (c(0.5, 0.0) + c(0.0, 2.0) * z.powi(3))).norm() < 1e-14);
    assert!(disk::holomorphic_match(&b).is_err());
}

#[test]
fn polar_fit_reproduces_polynomials() {
    let f = DiskFunction::from_fn(10, |a, b| c(((a * 7 + b * 3) % 5) as f64 - 2.0, (a + b) as f64 * 0.1));
    let grid = PolarGrid::for_degree(10);
    let (g, res) = disk::fit_polar(&grid, 10, |z| f.eval(z)).unwrap();
    assert!(res < 1e-10);
    assert!(g.coeff_distance(&f) < 1e-9);
}

fn small_poly() -> impl Strategy<Value = DiskFunction> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), disk::monomial_count(5))
        .prop_map(|v| DiskFunction::from_fn(5, |a, b| c(v[disk::tri_index(a, b)].0, v[disk::tri_index(a, b)].1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dbar_of_transform_is_identity(f in small_poly()) {
        let back = disk::cauchy_transform(&f).dbar().with_degree(5);
        prop_assert!(back.coeff_distance(&f) < 1e-12);
    }

    #[test]
    fn trace_evaluates_boundary(f in small_poly(), th in 0.0f64..(2.0 * PI)) {
        let z = C64::from_polar(1.0, th);
        prop_assert!((f.trace().eval(th) - f.eval(z)).norm() < 1e-11);
    }

    #[test]
    fn conj_and_product_are_pointwise(f in small_poly(), g in small_poly(), r in 0.0f64..1.0, th in 0.0f64..(2.0 * PI)) {
        let z = C64::from_polar(r, th);
        prop_assert!((f.conj().eval(z) - f.eval(z).conj()).norm() < 1e-12);
        prop_assert!((f.mul(&g).eval(z) - f.eval(z) * g.eval(z)).norm() < 1e-10);
    }
}
