//! Stationary lifts of straight disks `ζ ↦ ζ·v`.
//!
//! The structure is rotated so that `v` is the last axis and pulled back to
//! the blow-up chart, where the disk is `y = (ζ, 0, …, 0)`. With `g₀ = g_{0̄} = 1`
//! the lift condition for the covector `g_A dz^A` reads, for each index `A`,
//!
//! `𝔆^B_A g_{B,ζ̄} + 𝔄^C_A g_C = 𝔽̂_A`,
//! `𝔆^B_A = δ^B_A − i J^B_A`, `𝔄^C_A = −(i/2) K^C_A`, `𝔽̂_A = (i/2)(K^0_A + K^{0̄}_A)`,
//! `K^C_A = J^C_{A,0̄} + i J^C_L J^L_{A,0̄}`,
//!
//! and the rotated boundary values lie in the conormal bundle iff
//! `(Re ζ δ^B_A − Im ζ J^B_A) g_B = Im ζ (J^0_A + J^{0̄}_A)` on `∂Δ` for `A ≠ 0, 0̄`.
//!
//! The covector is real, so `g_ᾱ = conj(g_α)`. `𝔆` restricted to the rows
//! `A = α` is invertible (the full matrix is twice a projector), and the
//! solver works with the unknowns `g_α` and those rows only.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::acs::{self, AcStructure, ChartStructure, RotatedStructure, Structure};
use crate::ball;
use crate::disk::{self, BoundaryFunction, DiskFunction, PolarGrid};
use crate::error::{AcxError, Result};
use crate::lift::{self, LiftedStructure};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c0() -> C64 {
    C64::new(0.0, 0.0)
}

/// Complex components `J^B_A` (entry `[B][A]`) of the chart structure along
/// the disk and `K^C_A` (entry `[C][A]`).
pub fn disk_components(chart: &dyn AcStructure, zeta: C64) -> (DMatrix<C64>, DMatrix<C64>) {
    let m = 2 * chart.n();
    let mut y = DVector::zeros(m);
    y[0] = zeta.re;
    y[1] = zeta.im;
    let jc = acs::complex_components(&chart.j(&y));
    let dj = chart.dj(&y);
    // ∂/∂z̄⁰ = ½(∂_{y0} + i ∂_{y1})
    let d0b = (acs::complex_components(&dj[0]) + acs::complex_components(&dj[1]) * I) * C64::new(0.5, 0.0);
    let k = &d0b + (&jc * &d0b) * I;
    (jc, k)
}

/// Index of `z^β` (`β ≥ 1`) among `0, 0̄, 1, 1̄, …`.
fn hol(beta: usize) -> usize {
    2 * beta
}

fn antihol(beta: usize) -> usize {
    2 * beta + 1
}

/// Coefficients of the reduced interior equation at one node:
/// `Cr g_ζ̄ + Cc conj(g_ζ) + Ar g + Ac conj(g) = F`.
#[derive(Clone, Debug)]
pub struct InteriorNode {
    pub zeta: C64,
    pub cr: DMatrix<C64>,
    pub cc: DMatrix<C64>,
    pub ar: DMatrix<C64>,
    pub ac: DMatrix<C64>,
    pub f: DVector<C64>,
    pub cr_inv: DMatrix<C64>,
}

/// Reduced boundary equation at one node: `Dr g + Dc conj(g) = G`.
#[derive(Clone, Debug)]
pub struct BoundaryNode {
    pub zeta: C64,
    pub dr: DMatrix<C64>,
    pub dc: DMatrix<C64>,
    pub g: DVector<C64>,
}

fn interior_node(chart: &dyn AcStructure, zeta: C64) -> Result<InteriorNode> {
    let (jc, k) = disk_components(chart, zeta);
    if jc.iter().chain(k.iter()).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(AcxError::ChartDomain(format!("structure is undefined along the disk at ζ = {zeta}")));
    }
    let r = chart.n() - 1;
    let mut cr = DMatrix::zeros(r, r);
    let mut cc = DMatrix::zeros(r, r);
    let mut ar = DMatrix::zeros(r, r);
    let mut ac = DMatrix::zeros(r, r);
    let mut f = DVector::zeros(r);
    let half_i = I * 0.5;
    for a in 0..r {
        let row = hol(a + 1);
        for b in 0..r {
            let delta = if a == b { 1.0 } else { 0.0 };
            cr[(a, b)] = C64::new(delta, 0.0) - I * jc[(hol(b + 1), row)];
            cc[(a, b)] = -I * jc[(antihol(b + 1), row)];
            ar[(a, b)] = -half_i * k[(hol(b + 1), row)];
            ac[(a, b)] = -half_i * k[(antihol(b + 1), row)];
        }
        f[a] = half_i * (k[(0, row)] + k[(1, row)]);
    }
    let cr_inv = cr.clone().try_inverse().ok_or(AcxError::RankDeficient(format!(
        "interior principal matrix singular at ζ = {zeta}"
    )))?;
    Ok(InteriorNode { zeta, cr, cc, ar, ac, f, cr_inv })
}

fn boundary_node(chart: &dyn AcStructure, zeta: C64) -> BoundaryNode {
    let (jc, _) = disk_components(chart, zeta);
    let r = chart.n() - 1;
    let mut dr = DMatrix::zeros(r, r);
    let mut dc = DMatrix::zeros(r, r);
    let mut g = DVector::zeros(r);
    for a in 0..r {
        let row = hol(a + 1);
        for b in 0..r {
            let delta = if a == b { zeta.re } else { 0.0 };
            dr[(a, b)] = C64::new(delta, 0.0) - jc[(hol(b + 1), row)] * zeta.im;
            dc[(a, b)] = -jc[(antihol(b + 1), row)] * zeta.im;
        }
        g[a] = (jc[(0, row)] + jc[(1, row)]) * zeta.im;
    }
    BoundaryNode { zeta, dr, dc, g }
}

/// Assembled Riemann–Hilbert system along the disk of direction `v`.
pub struct RhSystem {
    pub v: Vec<C64>,
    pub degree: usize,
    pub grid: PolarGrid,
    pub boundary_angles: usize,
    /// The structure in chart coordinates after rotating `v` to the axis.
    pub chart: Arc<ChartStructure>,
    /// The rotated ambient structure.
    pub rotated: Structure,
    pub interior: Vec<InteriorNode>,
    pub boundary: Vec<BoundaryNode>,
    /// `𝔽 = 𝔆_r⁻¹ 𝔽̂` fitted on the grid, one component per `α`.
    pub f_rhs: Vec<DiskFunction>,
    pub f_fit_residual: f64,
    /// `𝔾` on the boundary, one component per `α`.
    pub g_rhs: Vec<BoundaryFunction>,
}

impl RhSystem {
    pub fn n(&self) -> usize {
        self.chart.n()
    }

    /// Number of unknown components `g_α`.
    pub fn unknowns(&self) -> usize {
        self.n() - 1
    }

    /// Full `𝔆[A][B] = δ − i J^B_A` over `A, B ∈ {1, 1̄, …}`.
    pub fn c_full(&self, zeta: C64) -> DMatrix<C64> {
        let (jc, _) = disk_components(self.chart.as_ref(), zeta);
        let m = 2 * self.n() - 2;
        DMatrix::from_fn(m, m, |a, b| {
            let d = if a == b { 1.0 } else { 0.0 };
            C64::new(d, 0.0) - I * jc[(b + 2, a + 2)]
        })
    }

    /// Full `𝔄[A][B] = −(i/2) K^B_A`.
    pub fn a_full(&self, zeta: C64) -> DMatrix<C64> {
        let (_, k) = disk_components(self.chart.as_ref(), zeta);
        let m = 2 * self.n() - 2;
        DMatrix::from_fn(m, m, |a, b| -I * 0.5 * k[(b + 2, a + 2)])
    }

    /// Full `𝔇[A][B] = Re ζ δ − Im ζ J^B_A`.
    pub fn d_full(&self, zeta: C64) -> DMatrix<C64> {
        let (jc, _) = disk_components(self.chart.as_ref(), zeta);
        let m = 2 * self.n() - 2;
        DMatrix::from_fn(m, m, |a, b| {
            let d = if a == b { zeta.re } else { 0.0 };
            C64::new(d, 0.0) - jc[(b + 2, a + 2)] * zeta.im
        })
    }

    /// Right side `𝔽̂_A` over all `A ∈ {1, 1̄, …}`.
    pub fn f_full(&self, zeta: C64) -> DVector<C64> {
        let (_, k) = disk_components(self.chart.as_ref(), zeta);
        let m = 2 * self.n() - 2;
        DVector::from_fn(m, |a, _| I * 0.5 * (k[(0, a + 2)] + k[(1, a + 2)]))
    }

    /// Coefficients of the `A = 0` row: `(𝔆^B_0, 𝔄^C_0)` over all `B, C`.
    pub fn row_zero(&self, zeta: C64) -> (DVector<C64>, DVector<C64>) {
        let (jc, k) = disk_components(self.chart.as_ref(), zeta);
        let m = 2 * self.n();
        let c = DVector::from_fn(m, |b, _| C64::new(if b == 0 { 1.0 } else { 0.0 }, 0.0) - I * jc[(b, 0)]);
        let a = DVector::from_fn(m, |b, _| -I * 0.5 * k[(b, 0)]);
        (c, a)
    }
}

/// Parses and normalizes a direction.
pub fn normalize_direction(v: &[C64]) -> Result<Vec<C64>> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || norm <= 1e-12 {
        return Err(AcxError::Config("direction v must be a nonzero finite vector".into()));
    }
    Ok(v.iter().map(|c| c / norm).collect())
}

/// Assembles the system for `J` along `ζ ↦ ζ·v` at the given polynomial degree.
pub fn assemble_rh(j: Structure, v: &[C64], degree: usize) -> Result<RhSystem> {
    let n = j.n();
    if v.len() != n {
        return Err(AcxError::Dimension(v.len(), format!("direction has {} components, structure has n = {n}", v.len())));
    }
    if n < 2 {
        return Err(AcxError::Dimension(n, "stationary lifts need n ≥ 2".into()));
    }
    let v = normalize_direction(v)?;
    let u = acs::unitary_to_axis(&v);
    let rotated: Structure = Arc::new(RotatedStructure::new(j, u));
    let chart = Arc::new(ChartStructure::new(rotated.clone()));
    let grid = PolarGrid::for_degree(degree);
    let boundary_angles = grid.angles;
    let pts = grid.points();
    let interior: Vec<InteriorNode> = pts
        .par_iter()
        .map(|&z| interior_node(chart.as_ref(), z))
        .collect::<Result<Vec<_>>>()?;
    let boundary: Vec<BoundaryNode> = (0..boundary_angles)
        .into_par_iter()
        .map(|k| boundary_node(chart.as_ref(), C64::from_polar(1.0, grid.angle(k))))
        .collect();
    if boundary.iter().any(|b| b.dr.iter().chain(b.dc.iter()).chain(b.g.iter()).any(|c| !(c.re.is_finite() && c.im.is_finite()))) {
        return Err(AcxError::ChartDomain("structure is undefined on the boundary circle".into()));
    }
    let r = n - 1;
    let mut f_rhs = Vec::with_capacity(r);
    let mut f_fit_residual = 0.0f64;
    for a in 0..r {
        let vals: Vec<C64> = interior.iter().map(|nd| (&nd.cr_inv * &nd.f)[a]).collect();
        let (f, res) = disk::fit_polar_values(&grid, degree.saturating_sub(1), &vals)?;
        f_fit_residual = f_fit_residual.max(res);
        f_rhs.push(f);
    }
    let g_rhs = (0..r)
        .map(|a| {
            let vals: Vec<C64> = boundary.iter().map(|b| b.g[a]).collect();
            BoundaryFunction::from_samples(&vals, degree)
        })
        .collect();
    Ok(RhSystem {
        v,
        degree,
        grid,
        boundary_angles,
        chart,
        rotated,
        interior,
        boundary,
        f_rhs,
        f_fit_residual,
        g_rhs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InvertibilityReport {
    /// Minimum singular value of the full `𝔆` over the grid (zero by construction).
    pub c_full_min_sv: f64,
    /// Minimum singular value of the `α`-rows block `𝔆_r` over the grid.
    pub c_reduced_min_sv: f64,
    pub c_reduced_cond: f64,
    pub d_min_sv: f64,
    pub d_cond: f64,
    pub warnings: Vec<String>,
    pub pass: bool,
}

/// Near-singularity threshold for the invertibility diagnostics.
pub const NEAR_SINGULAR: f64 = 1e-2;

pub fn check_invertibility(s: &RhSystem) -> InvertibilityReport {
    let svs = |m: &DMatrix<C64>| {
        let sv = m.clone().svd(false, false).singular_values;
        (sv.min(), sv.max())
    };
    let mut c_full_min = f64::INFINITY;
    let mut cr_min = f64::INFINITY;
    let mut cr_cond = 0.0f64;
    for nd in s.interior.iter().step_by(7) {
        c_full_min = c_full_min.min(svs(&s.c_full(nd.zeta)).0);
        let (lo, hi) = svs(&nd.cr);
        cr_min = cr_min.min(lo);
        cr_cond = cr_cond.max(hi / lo);
    }
    let mut d_min = f64::INFINITY;
    let mut d_cond = 0.0f64;
    for b in &s.boundary {
        let (lo, hi) = svs(&s.d_full(b.zeta));
        d_min = d_min.min(lo);
        d_cond = d_cond.max(hi / lo);
    }
    let mut warnings = Vec::new();
    if cr_min < NEAR_SINGULAR {
        warnings.push(format!("interior principal block near-singular (min singular value {cr_min:.3e})"));
    }
    if d_min < NEAR_SINGULAR {
        warnings.push(format!("boundary matrix near-singular (min singular value {d_min:.3e})"));
    }
    InvertibilityReport {
        c_full_min_sv: c_full_min,
        c_reduced_min_sv: cr_min,
        c_reduced_cond: cr_cond,
        d_min_sv: d_min,
        d_cond,
        pass: warnings.is_empty(),
        warnings,
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol_interior: f64,
    pub tol_boundary: f64,
    pub max_iterations: usize,
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol_interior: 1e-6, tol_boundary: 1e-6, max_iterations: 200, damping: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    FixedPoint,
    Collocation,
}

#[derive(Clone, Debug)]
pub struct RhSolution {
    pub g: Vec<DiskFunction>,
    pub method: SolveMethod,
    pub iterations: usize,
    /// `sup |g_ζ̄ − 𝔽(g)|` against the polynomial projection of the data.
    pub interior_residual: f64,
    /// `sup |g_ζ̄ − 𝔆_r⁻¹(𝔽̂ − …)|` against the pointwise data at off-grid points.
    pub pointwise_residual: f64,
    pub boundary_residual: f64,
    /// Number of boundary-fit singular values below `1e−8` (relative).
    pub kernel_dim: usize,
}

impl RhSolution {
    pub fn converged(&self, o: &SolveOptions) -> bool {
        self.interior_residual < o.tol_interior && self.boundary_residual < o.tol_boundary
    }
}

fn cmax(v: &DVector<C64>) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn eval_all(g: &[DiskFunction], z: C64) -> DVector<C64> {
    DVector::from_iterator(g.len(), g.iter().map(|f| f.eval(z)))
}

/// Preconditioned right side `𝔆_r⁻¹(𝔽̂ − 𝔆_c conj(g_ζ) − 𝔄_r g − 𝔄_c conj(g))`.
fn rhs_at(nd: &InteriorNode, g: &DVector<C64>, gz: &DVector<C64>) -> DVector<C64> {
    let rest = &nd.f - &nd.cc * gz.map(|c| c.conj()) - &nd.ar * g - &nd.ac * g.map(|c| c.conj());
    &nd.cr_inv * rest
}

struct BoundaryFit {
    pinv: DMatrix<f64>,
    kernel_dim: usize,
}

/// Real least-squares map from boundary targets to holomorphic corrections.
fn boundary_fit(s: &RhSystem, degree: usize) -> BoundaryFit {
    let r = s.unknowns();
    let nb = degree + 1;
    let rows = 2 * r * s.boundary.len();
    let cols = 2 * r * nb;
    let mut m = DMatrix::zeros(rows, cols);
    for (j, b) in s.boundary.iter().enumerate() {
        for k in 0..nb {
            let zk = b.zeta.powu(k as u32);
            for beta in 0..r {
                for alpha in 0..r {
                    let re_col = b.dr[(alpha, beta)] * zk + b.dc[(alpha, beta)] * zk.conj();
                    let im_col = b.dr[(alpha, beta)] * I * zk - b.dc[(alpha, beta)] * I * zk.conj();
                    let row = 2 * (j * r + alpha);
                    let cre = 2 * (beta * nb + k);
                    m[(row, cre)] = re_col.re;
                    m[(row + 1, cre)] = re_col.im;
                    m[(row, cre + 1)] = im_col.re;
                    m[(row + 1, cre + 1)] = im_col.im;
                }
            }
        }
    }
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let cut = 1e-8 * smax.max(1e-300);
    let kernel_dim = svd.singular_values.iter().filter(|&&s| s < cut).count();
    let pinv = svd.pseudo_inverse(cut).expect("SVD pseudo-inverse");
    BoundaryFit { pinv, kernel_dim }
}

fn apply_boundary_fit(s: &RhSystem, fit: &BoundaryFit, p: &[DiskFunction], degree: usize) -> Vec<DiskFunction> {
    let r = s.unknowns();
    let mut target = DVector::zeros(2 * r * s.boundary.len());
    for (j, b) in s.boundary.iter().enumerate() {
        let pv = eval_all(p, b.zeta);
        let t = &b.g - &b.dr * &pv - &b.dc * pv.map(|c| c.conj());
        for alpha in 0..r {
            target[2 * (j * r + alpha)] = t[alpha].re;
            target[2 * (j * r + alpha) + 1] = t[alpha].im;
        }
    }
    let x = &fit.pinv * target;
    let nb = degree + 1;
    (0..r)
        .map(|beta| {
            let mut h = DiskFunction::zero(degree);
            for k in 0..nb {
                h.set_coeff(k, 0, C64::new(x[2 * (beta * nb + k)], x[2 * (beta * nb + k) + 1]));
            }
            h
        })
        .collect()
}

/// Fit of the preconditioned right side for the current iterate.
fn fitted_rhs(s: &RhSystem, g: &[DiskFunction]) -> Result<Vec<DiskFunction>> {
    let r = s.unknowns();
    let gz: Vec<DiskFunction> = g.iter().map(|f| f.dzeta()).collect();
    let vals: Vec<DVector<C64>> = s
        .interior
        .par_iter()
        .map(|nd| rhs_at(nd, &eval_all(g, nd.zeta), &eval_all(&gz, nd.zeta)))
        .collect();
    (0..r)
        .map(|a| {
            let comp: Vec<C64> = vals.iter().map(|v| v[a]).collect();
            disk::fit_polar_values(&s.grid, s.degree.saturating_sub(1), &comp).map(|(f, _)| f)
        })
        .collect()
}

fn max_distance(a: &[DiskFunction], b: &[DiskFunction]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.coeff_distance(y)).fold(0.0, f64::max)
}

/// Solves the system by the fixed point `g ↦ T[𝔽(g)] + h`, `h` holomorphic
/// fitted to the boundary condition in least squares; falls back to one
/// global least-squares collocation if the iteration does not converge.
pub fn solve_rh(s: &RhSystem, o: &SolveOptions) -> Result<RhSolution> {
    let d = s.degree;
    let r = s.unknowns();
    let bfit = boundary_fit(s, d);
    let mut g: Vec<DiskFunction> = (0..r).map(|_| DiskFunction::zero(d)).collect();
    let mut last_update = f64::INFINITY;
    let mut damp = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=o.max_iterations {
        iterations = it;
        let rhs = fitted_rhs(s, &g)?;
        let p: Vec<DiskFunction> = rhs.iter().map(|f| disk::cauchy_transform(f).with_degree(d)).collect();
        let h = apply_boundary_fit(s, &bfit, &p, d);
        let candidate: Vec<DiskFunction> = p.iter().zip(&h).map(|(a, b)| a.add(b)).collect();
        let next: Vec<DiskFunction> = if damp < 1.0 {
            g.iter()
                .zip(&candidate)
                .map(|(a, b)| a.scale(C64::new(1.0 - damp, 0.0)).add(&b.scale(C64::new(damp, 0.0))))
                .collect()
        } else {
            candidate
        };
        let update = max_distance(&next, &g);
        g = next;
        if update < 1e-14 * (1.0 + g.iter().map(|f| f.max_coeff()).fold(0.0, f64::max)) {
            converged = true;
            break;
        }
        if update > last_update {
            damp = o.damping;
        }
        if !update.is_finite() {
            break;
        }
        last_update = update;
    }
    let mut method = SolveMethod::FixedPoint;
    if !converged {
        let sol = solve_collocation(s)?;
        g = sol.0;
        method = SolveMethod::Collocation;
    }
    let (interior_residual, pointwise_residual, boundary_residual) = residuals(s, &g)?;
    let out = RhSolution {
        g,
        method,
        iterations,
        interior_residual,
        pointwise_residual,
        boundary_residual,
        kernel_dim: bfit.kernel_dim,
    };
    if !out.interior_residual.is_finite() || !out.boundary_residual.is_finite() {
        return Err(AcxError::NonConvergence { iterations, last_update });
    }
    Ok(out)
}

/// Global least-squares collocation over all coefficients of `g_α`.
pub fn solve_collocation(s: &RhSystem) -> Result<(Vec<DiskFunction>, usize)> {
    let d = s.degree;
    let r = s.unknowns();
    let mons: Vec<(usize, usize)> = disk::monomials(d).collect();
    let nm = mons.len();
    let cols = 2 * r * nm;
    let rows = 2 * r * (s.interior.len() + s.boundary.len());
    let mut m = DMatrix::zeros(rows, cols);
    let mut rhs = DVector::zeros(rows);
    let mut row = 0;
    // Interior rows: g_ζ̄ + 𝔆_r⁻¹(𝔆_c conj(g_ζ) + 𝔄_r g + 𝔄_c conj(g)) = 𝔆_r⁻¹ 𝔽̂.
    for nd in &s.interior {
        let z = nd.zeta;
        let pcc = &nd.cr_inv * &nd.cc;
        let par = &nd.cr_inv * &nd.ar;
        let pac = &nd.cr_inv * &nd.ac;
        let f = &nd.cr_inv * &nd.f;
        for alpha in 0..r {
            for beta in 0..r {
                for (k, &(a, b)) in mons.iter().enumerate() {
                    let mon = z.powu(a as u32) * z.conj().powu(b as u32);
                    let dbar = if b > 0 { z.powu(a as u32) * z.conj().powu(b as u32 - 1) * b as f64 } else { c0() };
                    let dz = if a > 0 { z.powu(a as u32 - 1) * z.conj().powu(b as u32) * a as f64 } else { c0() };
                    let delta = if alpha == beta { 1.0 } else { 0.0 };
                    // coefficient c = x + iy: g_β gets c·mon, conj terms get conj(c)·conj(mon)
                    let lin = dbar * delta + par[(alpha, beta)] * mon;
                    let anti = pcc[(alpha, beta)] * dz.conj() + pac[(alpha, beta)] * mon.conj();
                    let re_col = lin + anti;
                    let im_col = lin * I - anti * I;
                    let c = 2 * (beta * nm + k);
                    m[(row, c)] += re_col.re;
                    m[(row + 1, c)] += re_col.im;
                    m[(row, c + 1)] += im_col.re;
                    m[(row + 1, c + 1)] += im_col.im;
                }
            }
            rhs[row] = f[alpha].re;
            rhs[row + 1] = f[alpha].im;
            row += 2;
        }
    }
    for b in &s.boundary {
        let z = b.zeta;
        for alpha in 0..r {
            for beta in 0..r {
                for (k, &(a, bb)) in mons.iter().enumerate() {
                    let mon = z.powu(a as u32) * z.conj().powu(bb as u32);
                    let lin = b.dr[(alpha, beta)] * mon;
                    let anti = b.dc[(alpha, beta)] * mon.conj();
                    let re_col = lin + anti;
                    let im_col = lin * I - anti * I;
                    let c = 2 * (beta * nm + k);
                    m[(row, c)] += re_col.re;
                    m[(row + 1, c)] += re_col.im;
                    m[(row, c + 1)] += im_col.re;
                    m[(row + 1, c + 1)] += im_col.im;
                }
            }
            rhs[row] = b.g[alpha].re;
            rhs[row + 1] = b.g[alpha].im;
            row += 2;
        }
    }
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let cut = 1e-8 * smax;
    let kernel = svd.singular_values.iter().filter(|&&v| v < cut).count();
    let x = svd.solve(&rhs, cut).map_err(|e| AcxError::RankDeficient(e.to_string()))?;
    let g = (0..r)
        .map(|beta| {
            let mut f = DiskFunction::zero(d);
            for (k, &(a, b)) in mons.iter().enumerate() {
                f.set_coeff(a, b, C64::new(x[2 * (beta * nm + k)], x[2 * (beta * nm + k) + 1]));
            }
            f
        })
        .collect();
    Ok((g, kernel))
}

/// Off-grid check points: ring radii between the fitting radii.
pub fn check_points(count_r: usize, count_a: usize) -> Vec<C64> {
    let mut out = Vec::new();
    for i in 0..count_r {
        let r = 0.07 + 0.9 * (i as f64 + 0.5) / count_r as f64;
        for k in 0..count_a {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.37) / count_a as f64;
            out.push(C64::from_polar(r, th));
        }
    }
    out
}

/// `(interior, pointwise, boundary)` residuals of a candidate `g`.
pub fn residuals(s: &RhSystem, g: &[DiskFunction]) -> Result<(f64, f64, f64)> {
    let rhs = fitted_rhs(s, g)?;
    let gb: Vec<DiskFunction> = g.iter().map(|f| f.dbar()).collect();
    let gz: Vec<DiskFunction> = g.iter().map(|f| f.dzeta()).collect();
    let pts = check_points(12, 24);
    let interior = pts
        .iter()
        .map(|&z| cmax(&(eval_all(&gb, z) - eval_all(&rhs, z))))
        .fold(0.0, f64::max);
    let pointwise = pts
        .par_iter()
        .map(|&z| -> Result<f64> {
            let nd = interior_node(s.chart.as_ref(), z)?;
            Ok(cmax(&(eval_all(&gb, z) - rhs_at(&nd, &eval_all(g, z), &eval_all(&gz, z)))))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let bpts = 4 * s.boundary_angles;
    let boundary = (0..bpts)
        .into_par_iter()
        .map(|k| {
            let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / bpts as f64);
            let b = boundary_node(s.chart.as_ref(), z);
            let gv = eval_all(g, z);
            cmax(&(&b.dr * &gv + &b.dc * gv.map(|c| c.conj()) - &b.g))
        })
        .reduce(|| 0.0, f64::max);
    Ok((interior, pointwise, boundary))
}

/// Tolerance for radial symmetry of inputs to [`solve_radial`].
pub const RADIAL_TOL: f64 = 1e-10;

fn check_radial(f1: &DiskFunction) -> Result<()> {
    let m = f1.angular_mass();
    if m > RADIAL_TOL {
        return Err(AcxError::NonRadial(m));
    }
    Ok(())
}

/// `g₁ = T[F₁] − h₁ + k(ζ² − 1)` with `h₁` the holomorphic extension of the
/// trace of `T[F₁]`.
///
/// For radial `F₁ = Σ c_j |ζ|^{2j}` the trace of `T[F₁]` is `C ζ̄` with
/// `C = 2∫₀¹ F₁(ρ) ρ dρ`; it has a holomorphic extension only if `C = 0`,
/// otherwise [`AcxError::RadialObstruction`] carries `C`.
pub fn solve_radial(f1: &DiskFunction, k: f64) -> Result<DiskFunction> {
    check_radial(f1)?;
    let t = disk::cauchy_transform(f1);
    let trace = t.trace();
    let c = trace.mode(-1);
    if c.norm() > 1e-8 * (1.0 + f1.max_coeff()) {
        return Err(AcxError::RadialObstruction(c.norm()));
    }
    let h1 = disk::holomorphic_part(&trace);
    let d = t.degree().max(2);
    let mut g = t.with_degree(d).sub(&h1.with_degree(d));
    g.set_coeff(2, 0, g.coeff(2, 0) + k);
    g.set_coeff(0, 0, g.coeff(0, 0) - k);
    Ok(g)
}

/// `g = T[F₁] + h` with `h` holomorphic and `g|_{∂Δ}` equal to `boundary` up
/// to its negative Fourier modes. Returns `g` and the mass of the unmatched
/// negative modes, which is zero iff the boundary condition is met exactly.
pub fn solve_radial_with_boundary(f1: &DiskFunction, boundary: &BoundaryFunction) -> Result<(DiskFunction, f64)> {
    check_radial(f1)?;
    let t = disk::cauchy_transform(f1);
    let defect = boundary.sub(&t.trace());
    let (mismatch, _) = defect.negative_mass();
    let h = disk::holomorphic_part(&defect);
    let d = t.degree().max(h.degree());
    Ok((t.with_degree(d).add(&h.with_degree(d)), mismatch))
}

/// A candidate stationary lift along `ζ ↦ ζ·v`, in chart coordinates.
#[derive(Clone)]
pub struct StationaryLift {
    pub v: Vec<C64>,
    pub g0: DiskFunction,
    pub g: Vec<DiskFunction>,
    pub lambda: BoundaryFunction,
    pub chart: Arc<ChartStructure>,
}

impl StationaryLift {
    /// Complex components `(g₀, g_{0̄}, g₁, g_{1̄}, …)` at `ζ`.
    pub fn components(&self, zeta: C64) -> Vec<C64> {
        let g0 = self.g0.eval(zeta);
        let mut out = vec![g0, g0.conj()];
        for f in &self.g {
            let v = f.eval(zeta);
            out.push(v);
            out.push(v.conj());
        }
        out
    }

    /// Point of `T*` (chart coordinates) over `ζ`.
    pub fn point(&self, zeta: C64) -> DVector<f64> {
        let m = 2 * self.chart.n();
        let mut out = DVector::zeros(2 * m);
        out[0] = zeta.re;
        out[1] = zeta.im;
        let p = lift::covector_real(&self.components(zeta));
        out.rows_mut(m, m).copy_from(&p);
        out
    }

    /// Complex components of `ζ⁻¹ · f̃(ζ)` on `∂Δ`: `Re ζ g_A − Im ζ g_B J^B_A`.
    pub fn rotated_covector(&self, zeta: C64) -> Vec<C64> {
        let (jc, _) = disk_components(self.chart.as_ref(), zeta);
        let g = self.components(zeta);
        let m = g.len();
        (0..m)
            .map(|a| {
                let mut acc = g[a] * zeta.re;
                for (b, gb) in g.iter().enumerate() {
                    acc -= gb * jc[(b, a)] * zeta.im;
                }
                acc
            })
            .collect()
    }
}

fn lambda_samples(chart: &ChartStructure, g0: &DiskFunction, g: &[DiskFunction], angles: usize) -> Vec<C64> {
    (0..angles)
        .map(|k| {
            let zeta = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / angles as f64);
            let (jc, _) = disk_components(chart, zeta);
            let g0v = g0.eval(zeta);
            let mut comps = vec![g0v, g0v.conj()];
            for f in g {
                let v = f.eval(zeta);
                comps.push(v);
                comps.push(v.conj());
            }
            let mut c0v = comps[0] * zeta.re;
            for (b, gb) in comps.iter().enumerate() {
                c0v -= gb * jc[(b, 0)] * zeta.im;
            }
            // (ζ⁻¹·f̃)_0 = λ z̄⁰ with z̄⁰ = ζ̄ on the boundary
            c0v * zeta
        })
        .collect()
}

/// Builds the lift `(ζ·v; g₀ = 1, g_α)` and extracts `λ` on `∂Δ`.
pub fn assemble_stationary_lift(s: &RhSystem, sol: &RhSolution) -> StationaryLift {
    let g0 = DiskFunction::constant(C64::new(1.0, 0.0), 0);
    lift_with_g0(s, g0, sol.g.clone())
}

/// Same as [`assemble_stationary_lift`] with an arbitrary `g₀`.
pub fn lift_with_g0(s: &RhSystem, g0: DiskFunction, g: Vec<DiskFunction>) -> StationaryLift {
    let angles = 4 * s.boundary_angles;
    let samples = lambda_samples(s.chart.as_ref(), &g0, &g, angles);
    let lambda = BoundaryFunction::from_samples(&samples, s.degree + 2);
    StationaryLift { v: s.v.clone(), g0, g, lambda, chart: s.chart.clone() }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConormalReport {
    pub lambda_imag_max: f64,
    pub lambda_min_abs: f64,
    pub annihilation: f64,
    pub holomorphy: f64,
    pub lambda_ok: bool,
    pub annihilation_ok: bool,
    pub holomorphy_ok: bool,
    pub failed: Vec<String>,
    pub pass: bool,
}

pub const LAMBDA_TOL: f64 = 1e-8;
pub const ANNIHILATION_TOL: f64 = 1e-6;
pub const HOLOMORPHY_TOL: f64 = 1e-5;

/// Grid on which lift holomorphy is checked.
pub fn holomorphy_grid() -> Vec<C64> {
    let mut out = Vec::new();
    for &r in &[0.15, 0.3, 0.42, 0.55, 0.7, 0.85] {
        for k in 0..8 {
            out.push(C64::from_polar(r, 0.3 + 2.0 * std::f64::consts::PI * k as f64 / 8.0));
        }
    }
    out
}

pub fn verify_conormal(l: &StationaryLift) -> ConormalReport {
    let m = 2 * l.chart.n();
    let angles = 256;
    let mut lambda_imag_max = 0.0f64;
    let mut lambda_min_abs = f64::INFINITY;
    let mut annihilation = 0.0f64;
    for k in 0..angles {
        let zeta = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / angles as f64);
        let cov = l.rotated_covector(zeta);
        let lam = cov[0] * zeta;
        lambda_imag_max = lambda_imag_max.max(lam.im.abs());
        lambda_min_abs = lambda_min_abs.min(lam.norm());
        // Tangent space of the sphere |z⁰| = 1 in chart coordinates.
        let p = lift::covector_real(&cov);
        let mut tangents = vec![{
            let mut t = DVector::zeros(m);
            t[0] = -zeta.im;
            t[1] = zeta.re;
            t
        }];
        for i in 2..m {
            let mut t = DVector::zeros(m);
            t[i] = 1.0;
            tangents.push(t);
        }
        let scale = p.norm().max(1e-300);
        for t in &tangents {
            annihilation = annihilation.max(p.dot(t).abs() / scale);
        }
    }
    let lifted: LiftedStructure = lift::lift_cotangent(l.chart.clone());
    let f = |z: C64| l.point(z);
    let holomorphy = lift::holomorphy_residual(&f, &lifted, &holomorphy_grid());
    let lambda_ok = lambda_imag_max < LAMBDA_TOL && lambda_min_abs > 0.0;
    let annihilation_ok = annihilation < ANNIHILATION_TOL;
    let holomorphy_ok = holomorphy < HOLOMORPHY_TOL;
    let mut failed = Vec::new();
    if !lambda_ok {
        failed.push("lambda_real_nonvanishing".to_string());
    }
    if !annihilation_ok {
        failed.push("conormal_annihilation".to_string());
    }
    if !holomorphy_ok {
        failed.push("cotangent_holomorphy".to_string());
    }
    ConormalReport {
        lambda_imag_max,
        lambda_min_abs,
        annihilation,
        holomorphy,
        lambda_ok,
        annihilation_ok,
        holomorphy_ok,
        pass: failed.is_empty(),
        failed,
    }
}

/// Boundary values of `g₁` forced by `𝔇 g = 𝔾` when `n = 2` and the
/// conjugate part of `𝔇` vanishes, so that the condition is pointwise
/// `g₁ = 𝔾 / 𝔇_r`. `None` otherwise.
pub fn radial_boundary_value(s: &RhSystem) -> Option<BoundaryFunction> {
    if s.unknowns() != 1 {
        return None;
    }
    // On the boundary, Dr g + Dc conj(g) = G pointwise; with Dc = 0 this is g = G / Dr.
    let mut samples = Vec::with_capacity(s.boundary.len());
    for b in &s.boundary {
        if b.dc[(0, 0)].norm() > 1e-12 {
            return None;
        }
        samples.push(b.g[0] / b.dr[(0, 0)]);
    }
    Some(BoundaryFunction::from_samples(&samples, s.degree))
}

/// Rotation of `T*` induced by a unitary `U` of the base, for covectors in
/// real coordinates: `p ↦ U p` (`U` orthogonal).
pub fn rotate_covector(u: &DMatrix<f64>, p: &DVector<f64>) -> DVector<f64> {
    u * p
}

/// Ambient disk point `ζ·v`.
pub fn disk_point(v: &[C64], zeta: C64) -> DVector<f64> {
    ball::to_real(&v.iter().map(|c| c * zeta).collect::<Vec<_>>())
}
