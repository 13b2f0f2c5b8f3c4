//! Almost complex structures on the punctured ball.
//!
//! A structure is a pointwise evaluator of the real matrix `J(x)` and its
//! first partials. Builtin families are built from deformation tensors on
//! ℂ² relative to the splitting `T = 𝒵 ⊕ ℋ`. Their derivatives come from
//! forward-mode jets; other structures use central differences.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ball::{self, RHO_MIN};
use crate::calculus::{self, ScalarField, FD_STEP};
use crate::error::{AcxError, Result};
use crate::jet::{self, Jet, Scalar};
use crate::sampling::Sampler;

/// Shared handle to a structure.
pub type Structure = Arc<dyn AcStructure>;

/// Central-difference step for structures without analytic derivatives.
pub const CUSTOM_FD_STEP: f64 = 1e-5;

/// Calibration of the Nijenhuis derivation against the identity
/// `dd^c u(JX, Y) + dd^c u(X, JY) = 4 N_{XY}(u)`, where
/// `N_{XY}(u) = NIJENHUIS_CALIBRATION · du(N(X, Y))` and
/// `N(X, Y) = [JX, JY] − J[JX, Y] − J[X, JY] − [X, Y]`.
pub const NIJENHUIS_CALIBRATION: f64 = -0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Standard,
    RadialH { epsilon: f64, rho0: f64, delta: f64 },
    Bump { epsilon: f64, rho0: f64, delta: f64 },
    RadiallyInvariant { epsilon: f64 },
    Graph,
    Custom { source: String },
    Rotated,
}

pub trait AcStructure: Send + Sync {
    /// Complex dimension.
    fn n(&self) -> usize;
    /// Real `2n × 2n` matrix of `J` at `x`.
    fn j(&self, x: &DVector<f64>) -> DMatrix<f64>;
    /// `∂J/∂x^k` for `k = 0..2n`.
    fn dj(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>>;
    fn family(&self) -> Family;
    /// The deformation tensor the structure was built from, if any.
    fn deformation(&self) -> Option<&DeformationTensor> {
        None
    }
}

/// Central-difference partials of a matrix field.
pub fn fd_partials(f: &dyn Fn(&DVector<f64>) -> DMatrix<f64>, x: &DVector<f64>, h: f64) -> Vec<DMatrix<f64>> {
    (0..x.len())
        .map(|k| {
            let step = h * x.norm().max(1.0);
            let mut e = DVector::zeros(x.len());
            e[k] = step;
            (f(&(x + &e)) - f(&(x - &e))) / (2.0 * step)
        })
        .collect()
}

/// The standard structure of ℂⁿ.
#[derive(Clone, Debug)]
pub struct StandardStructure {
    n: usize,
}

impl StandardStructure {
    pub fn new(n: usize) -> Self {
        StandardStructure { n }
    }
}

impl AcStructure for StandardStructure {
    fn n(&self) -> usize {
        self.n
    }
    fn j(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        ball::j_st(self.n)
    }
    fn dj(&self, _x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        vec![DMatrix::zeros(2 * self.n, 2 * self.n); 2 * self.n]
    }
    fn family(&self) -> Family {
        Family::Standard
    }
}

/// Shell profile parameters `(ε, ρ₀, δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellProfile {
    pub epsilon: f64,
    pub rho0: f64,
    pub delta: f64,
}

impl Default for ShellProfile {
    fn default() -> Self {
        ShellProfile { epsilon: 0.1, rho0: 0.3, delta: 0.2 }
    }
}

impl ShellProfile {
    pub fn step<S: Scalar>(&self, rho: S) -> S {
        jet::smoothstep((rho - self.rho0) / self.delta) * self.epsilon
    }

    pub fn bump<S: Scalar>(&self, rho: S) -> S {
        jet::bump((rho - self.rho0) / self.delta) * self.epsilon
    }

    /// `h(ρ) = ε s((ρ − ρ₀)/δ)`.
    pub fn h(&self, rho: f64) -> f64 {
        self.step(rho)
    }

    /// `h_Z = Z(h) = (ρ/2) h′(ρ)`.
    pub fn h_z(&self, rho: f64) -> f64 {
        0.5 * rho * self.epsilon * jet::smoothstep_prime((rho - self.rho0) / self.delta) / self.delta
    }

    /// Radii where `h` is locally constant (so `h_Z = 0`).
    pub fn is_flat_at(&self, rho: f64) -> bool {
        rho <= self.rho0 || rho >= self.rho0 + self.delta
    }
}

/// Scalar coefficient of a graph term, as a function on ℂ² ∖ {z₂ = 0}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Zero,
    /// `ε s((|z| − ρ₀)/δ)`.
    Step(ShellProfile),
    /// `ε · 64 t³(1 − t)³`, `t = (|z| − ρ₀)/δ`, supported on a shell.
    Bump(ShellProfile),
    /// `ε w` with `w = z¹/z⁰` the chart direction coordinate (invariant under ℂ*).
    ChartW { epsilon: f64 },
    Constant { re: f64, im: f64 },
}

impl Coefficient {
    pub fn eval<S: Scalar>(&self, x: &[S]) -> (S, S) {
        match self {
            Coefficient::Zero => (S::zero(), S::zero()),
            Coefficient::Step(p) => (p.step(radius(x)), S::zero()),
            Coefficient::Bump(p) => (p.bump(radius(x)), S::zero()),
            Coefficient::ChartW { epsilon } => {
                let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
                let den = (c * c + d * d).sqrt() * radius(x);
                ((a * c + b * d) / den * *epsilon, (b * c - a * d) / den * *epsilon)
            }
            Coefficient::Constant { re, im } => (S::cst(*re), S::cst(*im)),
        }
    }

    pub fn eval_c(&self, x: &DVector<f64>) -> C64 {
        let (re, im) = self.eval(x.as_slice());
        C64::new(re, im)
    }

    /// Upper bound of `|coefficient|` on the ball.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Coefficient::Zero => 0.0,
            Coefficient::Step(p) | Coefficient::Bump(p) => p.epsilon.abs(),
            Coefficient::ChartW { epsilon } => epsilon.abs(),
            Coefficient::Constant { re, im } => re.hypot(*im),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_bound() == 0.0
    }
}

fn radius<S: Scalar>(x: &[S]) -> S {
    let mut t = S::zero();
    for &v in x {
        t = t + v * v;
    }
    t.sqrt()
}

/// Deformation tensor on ℂ² in the frame `(E, Z)`:
/// `φ = a E^{10}⊗E^{01*} + b Z^{10}⊗E^{01*} + c E^{10}⊗Z^{01*}`.
/// The last slot (`φ^{𝒵,ℋ}`) is structurally zero for L-structures and is
/// kept only to build violating examples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationTensor {
    pub phi_h: Coefficient,
    pub phi_hz: Coefficient,
    #[serde(default = "zero_coefficient")]
    pub phi_zh: Coefficient,
}

fn zero_coefficient() -> Coefficient {
    Coefficient::Zero
}

impl DeformationTensor {
    pub fn zero() -> Self {
        DeformationTensor { phi_h: Coefficient::Zero, phi_hz: Coefficient::Zero, phi_zh: Coefficient::Zero }
    }

    /// `φ = h Z^{10} ⊗ E^{01*}` with `h` the step profile.
    pub fn radial_h(p: ShellProfile) -> Self {
        DeformationTensor { phi_h: Coefficient::Zero, phi_hz: Coefficient::Step(p), phi_zh: Coefficient::Zero }
    }

    /// `φ^ℋ` supported on a shell away from the origin.
    pub fn bump(p: ShellProfile) -> Self {
        DeformationTensor { phi_h: Coefficient::Bump(p), phi_hz: Coefficient::Zero, phi_zh: Coefficient::Zero }
    }

    /// `φ^ℋ` constant along the ℂ*-action.
    pub fn radially_invariant(epsilon: f64) -> Self {
        DeformationTensor {
            phi_h: Coefficient::ChartW { epsilon },
            phi_hz: Coefficient::Zero,
            phi_zh: Coefficient::Zero,
        }
    }

    /// Complex matrix of `φ^ℋ` acting on the complexified tangent space.
    pub fn phi_h_matrix(&self, x: &DVector<f64>) -> DMatrix<C64> {
        let a = self.phi_h.eval_c(x);
        let e = ball::e_vector(x);
        let je = ball::apply_jst(&e);
        let s = e.norm_squared();
        let e10: DVector<C64> = e.map(|v| C64::new(v, 0.0)) - je.map(|v| C64::new(0.0, v));
        (&e10 * e10.transpose()) * (a / (2.0 * s))
    }

    /// Complex matrix of `φ^{ℋ,𝒵}`.
    pub fn phi_hz_matrix(&self, x: &DVector<f64>) -> DMatrix<C64> {
        let b = self.phi_hz.eval_c(x);
        let e = ball::e_vector(x);
        let je = ball::apply_jst(&e);
        let z = ball::radial_z(x);
        let jz = ball::radial_jz(x);
        let s = e.norm_squared();
        let e10: DVector<C64> = e.map(|v| C64::new(v, 0.0)) - je.map(|v| C64::new(0.0, v));
        let z10: DVector<C64> = z.map(|v| C64::new(v, 0.0)) - jz.map(|v| C64::new(0.0, v));
        (&z10 * e10.transpose()) * (b / (2.0 * s))
    }
}

/// `J` in the frame `(E, J_st E, Z, J_st Z)` for `φ = a E^{10}⊗E^{01*} + b Z^{10}⊗E^{01*}`.
fn graph_frame_matrix<S: Scalar>(a: (S, S), b: (S, S)) -> [[S; 4]; 4] {
    let (ar, ai) = a;
    let (br, bi) = b;
    let a2 = ar * ar + ai * ai;
    let den = a2 - 1.0;
    let z = S::zero();
    [
        [(ai * -2.0) / den, (a2 + ar * 2.0 + 1.0) / den, z, z],
        [((a2 * -1.0) + ar * 2.0 - 1.0) / den, (ai * 2.0) / den, z, z],
        [
            (ai * br * -1.0 + ar * bi - bi) * 2.0 / den,
            (ai * bi + ar * br + br) * 2.0 / den,
            z,
            S::cst(-1.0),
        ],
        [
            (ai * bi * -1.0 - ar * br + br) * 2.0 / den,
            (ai * br * -1.0 + ar * bi + bi) * 2.0 / den,
            S::one(),
            z,
        ],
    ]
}

/// Ambient `J = F J_frame F⁻¹` with `F = [E, J_st E, Z, J_st Z]`, `F⁻¹ = (4/τ₀) Fᵀ`.
fn graph_ambient<S: Scalar>(x: &[S], phi: &DeformationTensor) -> [[S; 4]; 4] {
    let e = ball::e_field(x);
    let je = [e[1] * -1.0, e[0], e[3] * -1.0, e[2]];
    let zz = [x[0] * 0.5, x[1] * 0.5, x[2] * 0.5, x[3] * 0.5];
    let jz = [zz[1] * -1.0, zz[0], zz[3] * -1.0, zz[2]];
    let cols = [e, je, zz, jz];
    let jf = graph_frame_matrix(phi.phi_h.eval(x), phi.phi_hz.eval(x));
    let mut tau = S::zero();
    for &v in x {
        tau = tau + v * v;
    }
    let scale = S::cst(4.0) / tau;
    // M = F J_f, then J = M Fᵀ · 4/τ
    let mut m = [[S::zero(); 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let mut acc = S::zero();
            for l in 0..4 {
                acc = acc + cols[l][i] * jf[l][k];
            }
            m[i][k] = acc;
        }
    }
    let mut out = [[S::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = S::zero();
            for k in 0..4 {
                acc = acc + m[i][k] * cols[k][j];
            }
            out[i][j] = acc * scale;
        }
    }
    out
}

/// Structure on ℂ² determined by a deformation tensor through its graph:
/// `T^{01}_J = 𝒵^{01} ⊕ {v + φ(v) : v ∈ ℋ^{01}}` (plus the `φ^{𝒵,ℋ}` slot).
#[derive(Clone, Debug)]
pub struct GraphStructure {
    phi: DeformationTensor,
    family: Family,
}

impl GraphStructure {
    pub fn family_tag(&self) -> Family {
        self.family.clone()
    }
}

/// Builds the structure with `−i` eigenspace given by the graph of `φ`.
pub fn structure_from_deformation(phi: DeformationTensor) -> Result<GraphStructure> {
    let bound = phi.phi_h.sup_bound();
    if bound >= 1.0 - 1e-9 {
        return Err(AcxError::NotComplexStructure(format!(
            "|φ^ℋ| reaches {bound}; the graph eigenspaces degenerate at modulus 1"
        )));
    }
    let family = match (&phi.phi_h, &phi.phi_hz, &phi.phi_zh) {
        (Coefficient::Zero, Coefficient::Step(p), Coefficient::Zero) => {
            Family::RadialH { epsilon: p.epsilon, rho0: p.rho0, delta: p.delta }
        }
        (Coefficient::Bump(p), Coefficient::Zero, Coefficient::Zero) => {
            Family::Bump { epsilon: p.epsilon, rho0: p.rho0, delta: p.delta }
        }
        (Coefficient::ChartW { epsilon }, Coefficient::Zero, Coefficient::Zero) => {
            Family::RadiallyInvariant { epsilon: *epsilon }
        }
        (Coefficient::Zero, Coefficient::Zero, Coefficient::Zero) => Family::Standard,
        _ => Family::Graph,
    };
    Ok(GraphStructure { phi, family })
}

impl GraphStructure {
    fn j_general(&self, x: &DVector<f64>) -> DMatrix<f64> {
        // Generic graph with the φ^{𝒵,ℋ} slot: eigenvectors in frame coordinates.
        let a = self.phi.phi_h.eval_c(x);
        let b = self.phi.phi_hz.eval_c(x);
        let c = self.phi.phi_zh.eval_c(x);
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let o = C64::new(0.0, 0.0);
        let e10 = [one, -i, o, o];
        let e01 = [one, i, o, o];
        let z10 = [o, o, one, -i];
        let z01 = [o, o, one, i];
        let v1: Vec<C64> = (0..4).map(|k| e01[k] + a * e10[k] + b * z10[k]).collect();
        let v2: Vec<C64> = (0..4).map(|k| z01[k] + c * e10[k]).collect();
        let w = Matrix4::from_fn(|r, col| match col {
            0 => v1[r],
            1 => v2[r],
            2 => v1[r].conj(),
            _ => v2[r].conj(),
        });
        let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(-i, -i, i, i));
        let jf = match w.try_inverse() {
            Some(wi) => (w * d * wi).map(|z| z.re),
            None => return DMatrix::from_element(4, 4, f64::NAN),
        };
        let e = ball::e_vector(x);
        let f = DMatrix::from_columns(&[e.clone(), ball::apply_jst(&e), ball::radial_z(x), ball::radial_jz(x)]);
        let tau = x.norm_squared();
        let jf = DMatrix::from_fn(4, 4, |r, col| jf[(r, col)]);
        &f * jf * f.transpose() * (4.0 / tau)
    }
}

impl AcStructure for GraphStructure {
    fn n(&self) -> usize {
        2
    }

    fn j(&self, x: &DVector<f64>) -> DMatrix<f64> {
        if !self.phi.phi_zh.is_zero() {
            return self.j_general(x);
        }
        let m = graph_ambient(x.as_slice(), &self.phi);
        DMatrix::from_fn(4, 4, |i, j| m[i][j])
    }

    fn dj(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        if !self.phi.phi_zh.is_zero() {
            return fd_partials(&|p| self.j_general(p), x, CUSTOM_FD_STEP);
        }
        let xs = Jet::seed(x.as_slice());
        let m = graph_ambient(&xs, &self.phi);
        (0..4).map(|k| DMatrix::from_fn(4, 4, |i, j| m[i][j].g[k])).collect()
    }

    fn family(&self) -> Family {
        self.family.clone()
    }

    fn deformation(&self) -> Option<&DeformationTensor> {
        Some(&self.phi)
    }
}

/// `J′(x) = U J(Uᵀx) Uᵀ` for an orthogonal `U` commuting with `J_st` (a unitary map).
pub struct RotatedStructure {
    inner: Structure,
    u: DMatrix<f64>,
}

impl RotatedStructure {
    pub fn new(inner: Structure, u: DMatrix<f64>) -> Self {
        RotatedStructure { inner, u }
    }
}

impl AcStructure for RotatedStructure {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn j(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let y = self.u.transpose() * x;
        &self.u * self.inner.j(&y) * self.u.transpose()
    }
    fn dj(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let y = self.u.transpose() * x;
        let inner = self.inner.dj(&y);
        let m = x.len();
        (0..m)
            .map(|k| {
                let mut acc = DMatrix::zeros(m, m);
                for (mm, d) in inner.iter().enumerate() {
                    acc += d * self.u[(k, mm)];
                }
                &self.u * acc * self.u.transpose()
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

/// Real form of a unitary map of ℂⁿ sending the unit vector `v` to `(0, …, 0, 1)`.
pub fn unitary_to_axis(v: &[C64]) -> DMatrix<f64> {
    let n = v.len();
    // Columns of the unitary matrix W with last column v; U = W^H.
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for k in 0..n {
        let mut w = vec![C64::new(0.0, 0.0); n];
        w[k] = C64::new(1.0, 0.0);
        let mut basis = vec![v.to_vec()];
        basis.extend(cols.iter().cloned());
        for b in &basis {
            let ip: C64 = b.iter().zip(w.iter()).map(|(bi, wi)| bi.conj() * wi).sum();
            for (wi, bi) in w.iter_mut().zip(b.iter()) {
                *wi -= ip * bi;
            }
        }
        let nw = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if nw > 1e-8 && cols.len() < n - 1 {
            cols.push(w.iter().map(|c| c / nw).collect());
        }
    }
    cols.push(v.to_vec());
    // U = W^H: complex matrix with rows conj(cols).
    let mut u = DMatrix::zeros(2 * n, 2 * n);
    for (r, col) in cols.iter().enumerate() {
        for (c, val) in col.iter().enumerate() {
            let z = val.conj();
            u[(2 * r, 2 * c)] = z.re;
            u[(2 * r, 2 * c + 1)] = -z.im;
            u[(2 * r + 1, 2 * c)] = z.im;
            u[(2 * r + 1, 2 * c + 1)] = z.re;
        }
    }
    u
}

/// A structure expressed in blow-up chart coordinates `y`.
pub struct ChartStructure {
    base: Structure,
}

impl ChartStructure {
    pub fn new(base: Structure) -> Self {
        ChartStructure { base }
    }
}

impl AcStructure for ChartStructure {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn j(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let a = ball::chart_jacobian_matrix(y);
        let x = DVector::from_vec(ball::chart_map(y.as_slice()));
        let ai = a.clone().try_inverse().expect("chart Jacobian is invertible off the divisor");
        &ai * self.base.j(&x) * a
    }

    fn dj(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let m = y.len();
        let a = ball::chart_jacobian_matrix(y);
        let ai = a.clone().try_inverse().expect("chart Jacobian is invertible off the divisor");
        let x = DVector::from_vec(ball::chart_map(y.as_slice()));
        let jx = self.base.j(&x);
        let djx = self.base.dj(&x);
        let ys = Jet::seed(y.as_slice());
        let jac_jet = ball::chart_jacobian(&ys);
        (0..m)
            .map(|k| {
                let da = DMatrix::from_fn(m, m, |i, j| jac_jet[i][j].g[k]);
                let mut dj_k = DMatrix::zeros(m, m);
                for (mm, d) in djx.iter().enumerate() {
                    dj_k += d * a[(mm, k)];
                }
                -&ai * &da * &ai * &jx * &a + &ai * dj_k * &a + &ai * &jx * &da
            })
            .collect()
    }

    fn family(&self) -> Family {
        self.base.family()
    }
}

/// Index label of complex component `A` in the order `0, 0̄, 1, 1̄, …`.
pub fn index_label(a: usize) -> String {
    if a.is_multiple_of(2) {
        format!("{}", a / 2)
    } else {
        format!("{}b", a / 2)
    }
}

/// Complex components `J^B_A` (row `B`, column `A`) with respect to
/// `(∂/∂z^A)` in the order `z⁰, z̄⁰, z¹, z̄¹, …`.
pub fn complex_components(j: &DMatrix<f64>) -> DMatrix<C64> {
    let m = j.nrows();
    let jc = j.map(|v| C64::new(v, 0.0));
    let (p, pinv) = complex_basis(m);
    pinv * jc * p
}

/// Real matrix from complex components (inverse of [`complex_components`]).
pub fn real_from_components(jc: &DMatrix<C64>) -> DMatrix<C64> {
    let (p, pinv) = complex_basis(jc.nrows());
    p * jc * pinv
}

/// `P` with columns `∂/∂z^A` in real coordinates, and `P⁻¹` with rows `dz^A`.
pub fn complex_basis(m: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let mut p = DMatrix::zeros(m, m);
    let mut pinv = DMatrix::zeros(m, m);
    for a in 0..m / 2 {
        let (x, y) = (2 * a, 2 * a + 1);
        p[(x, x)] = C64::new(0.5, 0.0);
        p[(y, x)] = C64::new(0.0, -0.5);
        p[(x, y)] = C64::new(0.5, 0.0);
        p[(y, y)] = C64::new(0.0, 0.5);
        pinv[(x, x)] = C64::new(1.0, 0.0);
        pinv[(x, y)] = C64::new(0.0, 1.0);
        pinv[(y, x)] = C64::new(1.0, 0.0);
        pinv[(y, y)] = C64::new(0.0, -1.0);
    }
    (p, pinv)
}

/// Seeded probe points in the working annulus.
pub fn probe_points(n: usize, count: usize, seed: u64, rmin: f64, rmax: f64) -> Vec<DVector<f64>> {
    let mut s = Sampler::new(seed);
    (0..count).map(|_| s.point_in_shell(n, rmin.max(RHO_MIN), rmax)).collect()
}

/// `sup ‖J² + I‖` over the points.
pub fn square_residual(j: &dyn AcStructure, points: &[DVector<f64>]) -> f64 {
    let m = 2 * j.n();
    points
        .iter()
        .map(|x| {
            let jm = j.j(x);
            (&jm * &jm + DMatrix::<f64>::identity(m, m)).amax()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct LConditionReport {
    /// `sup ‖(J − J_st)|_𝒵‖ / |Z|`.
    pub deviation: f64,
    /// `sup` of the ℋ-component of `J(𝒵)`, relative to `|Z|`.
    pub leakage: f64,
    pub pass: bool,
}

/// Condition (i): `𝒵` is `J`-stable and `J|_𝒵 = J_st|_𝒵`.
pub fn check_l_condition_i(j: &dyn AcStructure, points: &[DVector<f64>]) -> LConditionReport {
    let mut deviation = 0.0f64;
    let mut leakage = 0.0f64;
    for x in points {
        let jm = j.j(x);
        let [z, jz] = ball::distribution_z(x).expect("nonzero");
        let nz = z.norm();
        for (v, target) in [(&z, &jz), (&jz, &(-&z))] {
            let img = &jm * v;
            deviation = deviation.max((&img - target).amax() / nz);
            let along_z = &z * (img.dot(&z) / z.norm_squared()) + &jz * (img.dot(&jz) / jz.norm_squared());
            leakage = leakage.max((&img - along_z).amax() / nz);
        }
    }
    LConditionReport { deviation, leakage, pass: deviation < 1e-9 && leakage < 1e-9 }
}

/// Nijenhuis tensor `N(X, Y) = [JX, JY] − J[JX, Y] − J[X, JY] − [X, Y]` at `p`
/// for the constant extensions of `X` and `Y`.
pub fn nijenhuis(j: &dyn AcStructure, x: &DVector<f64>, y: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
    let h = FD_STEP;
    let jx = |q: &DVector<f64>| j.j(q) * x;
    let jy = |q: &DVector<f64>| j.j(q) * y;
    let cx = |_q: &DVector<f64>| x.clone();
    let cy = |_q: &DVector<f64>| y.clone();
    let jp = j.j(p);
    calculus::lie_bracket(&jx, &jy, p, h)
        - &jp * calculus::lie_bracket(&jx, &cy, p, h)
        - &jp * calculus::lie_bracket(&cx, &jy, p, h)
        - calculus::lie_bracket(&cx, &cy, p, h)
}

/// `N_{XY}(u)` normalized so that `dd^c u(JX, Y) + dd^c u(X, JY) = 4 N_{XY}(u)`.
pub fn nijenhuis_derivation(
    j: &dyn AcStructure,
    u: &dyn ScalarField,
    x: &DVector<f64>,
    y: &DVector<f64>,
    p: &DVector<f64>,
) -> f64 {
    NIJENHUIS_CALIBRATION * u.gradient(p).dot(&nijenhuis(j, x, y, p))
}

/// `|dd^c u(JX, Y) + dd^c u(X, JY) − 4 N_{XY}(u)|`.
pub fn nijenhuis_identity_residual(
    j: &dyn AcStructure,
    u: &dyn ScalarField,
    x: &DVector<f64>,
    y: &DVector<f64>,
    p: &DVector<f64>,
) -> f64 {
    let jf = |q: &DVector<f64>| j.j(q);
    let jp = j.j(p);
    let (a, _) = calculus::ddc_with(u, &jf, p, &(&jp * x), y, FD_STEP);
    let (b, _) = calculus::ddc_with(u, &jf, p, x, &(&jp * y), FD_STEP);
    (a + b - 4.0 * nijenhuis_derivation(j, u, x, y, p)).abs()
}

/// Flow-time step for Lie derivatives of tensors.
pub const FLOW_STEP: f64 = 1e-3;

/// `ℒ_{Z^{01}} T = ℒ_Z T + i ℒ_{J_st Z} T` for a complex (1,1)-tensor field
/// given as a matrix function, by central differences in flow time.
///
/// The flow of `Z = x/2` is `x ↦ e^{t/2} x` and the flow of `J_st Z` is the
/// rotation `x ↦ e^{tJ_st/2} x`; both differentials commute with constant
/// rescaling, so `(Fl_t^* T)(p) = DFl_t⁻¹ T(Fl_t p) DFl_t`.
pub fn lie_z01(t: &dyn Fn(&DVector<f64>) -> DMatrix<C64>, p: &DVector<f64>) -> DMatrix<C64> {
    let h = FLOW_STEP;
    let dil = |s: f64| t(&(p * (s / 2.0).exp()));
    let lz = (dil(h) - dil(-h)) / C64::new(2.0 * h, 0.0);
    let rot = |s: f64| {
        let r = rotation(p.len(), s / 2.0);
        let rc = r.map(|v| C64::new(v, 0.0));
        let rci = r.transpose().map(|v| C64::new(v, 0.0));
        rci * t(&(&r * p)) * rc
    };
    let ljz = (rot(h) - rot(-h)) / C64::new(2.0 * h, 0.0);
    lz + ljz * C64::new(0.0, 1.0)
}

/// Real matrix of multiplication by `e^{iθ}` on ℂⁿ.
pub fn rotation(m: usize, theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut r = DMatrix::zeros(m, m);
    for k in 0..m / 2 {
        r[(2 * k, 2 * k)] = c;
        r[(2 * k + 1, 2 * k + 1)] = c;
        r[(2 * k + 1, 2 * k)] = s;
        r[(2 * k, 2 * k + 1)] = -s;
    }
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct NicetyReport {
    pub nice: bool,
    pub very_nice: bool,
    /// `sup ‖φ^{ℋ,𝒵}‖`.
    pub phi_hz_sup: f64,
    /// `sup ‖ℒ_{Z^{01}} φ^ℋ‖`.
    pub lie_phi_h_sup: f64,
    pub samples: usize,
}

pub const NICE_TOL: f64 = 1e-9;
pub const VERY_NICE_TOL: f64 = 1e-6;

/// Nice iff `φ^{ℋ,𝒵} ≡ 0`; very nice iff additionally `ℒ_{Z^{01}} φ^ℋ = 0`.
pub fn nicety(phi: &DeformationTensor, points: &[DVector<f64>]) -> NicetyReport {
    let mut phi_hz_sup = 0.0f64;
    let mut lie_sup = 0.0f64;
    for x in points {
        phi_hz_sup = phi_hz_sup.max(phi.phi_hz_matrix(x).iter().map(|c| c.norm()).fold(0.0, f64::max));
        phi_hz_sup = phi_hz_sup.max(phi.phi_zh.eval_c(x).norm());
        let l = lie_z01(&|q| phi.phi_h_matrix(q), x);
        lie_sup = lie_sup.max(l.iter().map(|c| c.norm()).fold(0.0, f64::max));
    }
    let nice = phi_hz_sup < NICE_TOL;
    NicetyReport { nice, very_nice: nice && lie_sup < VERY_NICE_TOL, phi_hz_sup, lie_phi_h_sup: lie_sup, samples: points.len() }
}

/// Standard probe set for nicety: shells through the whole working annulus.
pub fn nicety_points(seed: u64, count: usize) -> Vec<DVector<f64>> {
    probe_points(2, count, seed, 0.1, 0.95)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    #[test]
    fn zero_deformation_is_standard() {
        let g = structure_from_deformation(DeformationTensor::zero()).unwrap();
        let x = pt(&[0.1, 0.2, 0.3, -0.2]);
        assert!((g.j(&x) - ball::j_st(2)).amax() < 1e-15);
    }

    #[test]
    fn radial_h_acts_on_e_as_expected() {
        let p = ShellProfile::default();
        let g = structure_from_deformation(DeformationTensor::radial_h(p)).unwrap();
        let x = pt(&[0.1, 0.05, 0.3, 0.2]);
        let h = p.h(x.norm());
        let e = ball::e_vector(&x);
        let je = ball::apply_jst(&e);
        let jz = ball::radial_jz(&x);
        let want = &je - &jz * (2.0 * h);
        assert!((g.j(&x) * &e - want).amax() < 1e-14);
    }

    #[test]
    fn jet_derivatives_match_fd() {
        let g = structure_from_deformation(DeformationTensor::radial_h(ShellProfile::default())).unwrap();
        let x = pt(&[0.15, -0.1, 0.25, 0.2]);
        let an = g.dj(&x);
        let fd = fd_partials(&|q| g.j(q), &x, 1e-6);
        for k in 0..4 {
            assert!((&an[k] - &fd[k]).amax() < 1e-6);
        }
    }

    #[test]
    fn general_graph_agrees_with_closed_form() {
        let phi = DeformationTensor {
            phi_h: Coefficient::Constant { re: 0.2, im: -0.1 },
            phi_hz: Coefficient::Constant { re: 0.05, im: 0.3 },
            phi_zh: Coefficient::Zero,
        };
        let g = structure_from_deformation(phi).unwrap();
        let x = pt(&[0.15, -0.1, 0.25, 0.2]);
        assert!((g.j(&x) - g.j_general(&x)).amax() < 1e-13);
    }

    #[test]
    fn complex_components_of_standard() {
        let jc = complex_components(&ball::j_st(2));
        for a in 0..4 {
            let want = if a % 2 == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
            assert!((jc[(a, a)] - want).norm() < 1e-15);
        }
        let back = real_from_components(&jc);
        assert!((back.map(|c| c.re) - ball::j_st(2)).amax() < 1e-15);
    }

    #[test]
    fn unitary_to_axis_maps_v() {
        let v = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let u = unitary_to_axis(&v);
        let img = &u * ball::to_real(&v);
        assert!((img - pt(&[0.0, 0.0, 1.0, 0.0])).amax() < 1e-14);
        assert!((&u * ball::j_st(2) - ball::j_st(2) * &u).amax() < 1e-14);
    }

    #[test]
    fn degenerate_deformation_rejected() {
        let r = structure_from_deformation(DeformationTensor::radially_invariant(1.0));
        assert!(matches!(r, Err(AcxError::NotComplexStructure(_))));
    }
}
