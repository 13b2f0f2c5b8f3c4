//! The single finite-difference engine shared by every module.
//!
//! Directional derivatives are second-order central differences at step `h`
//! and `h/2`, combined by one Richardson step. The difference between the two
//! raw estimates is returned as an error estimate.

use nalgebra::{DMatrix, DVector};

/// Default coordinate step for brackets, d^c and dd^c.
pub const FD_STEP: f64 = 1e-4;

/// Vector field on an open subset of ℝ^{2n}.
pub type Field<'a> = dyn Fn(&DVector<f64>) -> DVector<f64> + 'a;

/// Scalar function with a gradient.
pub trait ScalarField: Sync {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn name(&self) -> String;
}

/// `τ₀ = |z|²`.
#[derive(Clone, Copy, Debug)]
pub struct Tau0;

/// `u = log τ₀`.
#[derive(Clone, Copy, Debug)]
pub struct LogTau0;

/// Real coordinate function `x_k`.
#[derive(Clone, Copy, Debug)]
pub struct Coordinate(pub usize);

/// A constant function.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub f64);

impl ScalarField for Tau0 {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x.norm_squared()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x * 2.0
    }
    fn name(&self) -> String {
        "tau0".into()
    }
}

impl ScalarField for LogTau0 {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x.norm_squared().ln()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x * (2.0 / x.norm_squared())
    }
    fn name(&self) -> String {
        "log_tau0".into()
    }
}

impl ScalarField for Coordinate {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x[self.0]
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        g[self.0] = 1.0;
        g
    }
    fn name(&self) -> String {
        format!("x{}", self.0)
    }
}

impl ScalarField for Constant {
    fn value(&self, _x: &DVector<f64>) -> f64 {
        self.0
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(x.len())
    }
    fn name(&self) -> String {
        "constant".into()
    }
}

/// Central difference of a vector-valued map along `v`, with Richardson
/// extrapolation. Returns the derivative and an error estimate.
pub fn directional_vec(
    f: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    p: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> (DVector<f64>, f64) {
    let d1 = (f(&(p + v * h)) - f(&(p - v * h))) / (2.0 * h);
    let h2 = 0.5 * h;
    let d2 = (f(&(p + v * h2)) - f(&(p - v * h2))) / (2.0 * h2);
    let err = (&d2 - &d1).amax();
    ((d2 * 4.0 - d1) / 3.0, err)
}

/// Scalar version of [`directional_vec`].
pub fn directional(f: &dyn Fn(&DVector<f64>) -> f64, p: &DVector<f64>, v: &DVector<f64>, h: f64) -> (f64, f64) {
    let d1 = (f(&(p + v * h)) - f(&(p - v * h))) / (2.0 * h);
    let h2 = 0.5 * h;
    let d2 = (f(&(p + v * h2)) - f(&(p - v * h2))) / (2.0 * h2);
    ((4.0 * d2 - d1) / 3.0, (d2 - d1).abs())
}

/// Plain second-order central difference (no extrapolation).
pub fn central(f: &dyn Fn(&DVector<f64>) -> f64, p: &DVector<f64>, v: &DVector<f64>, h: f64) -> f64 {
    (f(&(p + v * h)) - f(&(p - v * h))) / (2.0 * h)
}

/// Lie bracket `[X, Y] = D_X Y − D_Y X` at `p`.
pub fn lie_bracket(x: &Field, y: &Field, p: &DVector<f64>, h: f64) -> DVector<f64> {
    let xp = x(p);
    let yp = y(p);
    let (dxy, _) = directional_vec(y, p, &xp, h);
    let (dyx, _) = directional_vec(x, p, &yp, h);
    dxy - dyx
}

/// `d^c u(X) = −du(JX)`.
pub fn dc(u: &dyn ScalarField, j: &DMatrix<f64>, p: &DVector<f64>, x: &DVector<f64>) -> f64 {
    -u.gradient(p).dot(&(j * x))
}

/// `dd^c u(X, Y)` at `p` using constant extensions of `X` and `Y`, for which
/// the bracket term vanishes: `X(d^c u(Y)) − Y(d^c u(X))`.
pub fn ddc_with(
    u: &dyn ScalarField,
    jf: &(dyn Fn(&DVector<f64>) -> DMatrix<f64> + Sync),
    p: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    h: f64,
) -> (f64, f64) {
    let dcy = |q: &DVector<f64>| dc(u, &jf(q), q, y);
    let dcx = |q: &DVector<f64>| dc(u, &jf(q), q, x);
    let (a, ea) = directional(&dcy, p, x, h);
    let (b, eb) = directional(&dcx, p, y, h);
    (a - b, ea + eb)
}

/// Unextrapolated `dd^c` at step `h`, used for convergence diagnostics.
pub fn ddc_plain(
    u: &dyn ScalarField,
    jf: &(dyn Fn(&DVector<f64>) -> DMatrix<f64> + Sync),
    p: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    h: f64,
) -> f64 {
    let dcy = |q: &DVector<f64>| dc(u, &jf(q), q, y);
    let dcx = |q: &DVector<f64>| dc(u, &jf(q), q, x);
    central(&dcy, p, x, h) - central(&dcx, p, y, h)
}
