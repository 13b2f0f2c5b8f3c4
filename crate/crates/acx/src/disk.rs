//! Function calculus on the closed unit disk.
//!
//! Functions are truncated polynomials in ζ and ζ̄. On this representation
//! ∂̄ and its right inverse (the Cauchy transform) act exactly on
//! coefficients, so numerical error in the disk solvers comes only from
//! truncation and fitting.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{AcxError, Result};

/// Position of the coefficient of `ζ^a ζ̄^b` in the triangular layout.
#[inline]
pub fn tri_index(a: usize, b: usize) -> usize {
    let t = a + b;
    t * (t + 1) / 2 + b
}

/// Number of monomials `ζ^a ζ̄^b` with `a + b <= degree`.
#[inline]
pub fn monomial_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Iterates over `(a, b)` with `a + b <= degree` in storage order.
pub fn monomials(degree: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=degree).flat_map(|t| (0..=t).map(move |b| (t - b, b)))
}

/// Truncated polynomial `Σ c_{a,b} ζ^a ζ̄^b`, `a + b <= degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskFunction {
    degree: usize,
    coeffs: Vec<C64>,
}

impl DiskFunction {
    pub fn zero(degree: usize) -> Self {
        DiskFunction { degree, coeffs: vec![C64::new(0.0, 0.0); monomial_count(degree)] }
    }

    pub fn constant(c: C64, degree: usize) -> Self {
        let mut f = Self::zero(degree);
        f.coeffs[0] = c;
        f
    }

    /// `c ζ^a ζ̄^b`, stored at the smallest degree that holds it unless `degree` is larger.
    pub fn monomial(a: usize, b: usize, c: C64, degree: usize) -> Self {
        let mut f = Self::zero(degree.max(a + b));
        f.coeffs[tri_index(a, b)] = c;
        f
    }

    /// Builds a function from a coefficient rule.
    pub fn from_fn(degree: usize, mut rule: impl FnMut(usize, usize) -> C64) -> Self {
        let coeffs = monomials(degree).map(|(a, b)| rule(a, b)).collect();
        DiskFunction { degree, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        if a + b > self.degree {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[tri_index(a, b)]
        }
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, c: C64) {
        assert!(a + b <= self.degree, "monomial outside the truncation degree");
        self.coeffs[tri_index(a, b)] = c;
    }

    /// Copy with a different truncation degree (higher terms dropped).
    pub fn with_degree(&self, degree: usize) -> Self {
        Self::from_fn(degree, |a, b| self.coeff(a, b))
    }

    pub fn eval(&self, z: C64) -> C64 {
        let d = self.degree;
        let mut zp = Vec::with_capacity(d + 1);
        let mut wp = Vec::with_capacity(d + 1);
        let (mut p, mut q) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        let zc = z.conj();
        for _ in 0..=d {
            zp.push(p);
            wp.push(q);
            p *= z;
            q *= zc;
        }
        let mut acc = C64::new(0.0, 0.0);
        for (k, (a, b)) in monomials(d).enumerate() {
            let c = self.coeffs[k];
            if c.re != 0.0 || c.im != 0.0 {
                acc += c * zp[a] * wp[b];
            }
        }
        acc
    }

    /// ∂/∂ζ̄, exact: `ζ^a ζ̄^b ↦ b ζ^a ζ̄^{b−1}`.
    pub fn dbar(&self) -> Self {
        let d = self.degree.saturating_sub(1);
        Self::from_fn(d, |a, b| self.coeff(a, b + 1) * (b + 1) as f64)
    }

    /// ∂/∂ζ, exact.
    pub fn dzeta(&self) -> Self {
        let d = self.degree.saturating_sub(1);
        Self::from_fn(d, |a, b| self.coeff(a + 1, b) * (a + 1) as f64)
    }

    /// Complex conjugate function `ζ ↦ conj(f(ζ))`.
    pub fn conj(&self) -> Self {
        Self::from_fn(self.degree, |a, b| self.coeff(b, a).conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        DiskFunction { degree: self.degree, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let d = self.degree.max(o.degree);
        Self::from_fn(d, |a, b| self.coeff(a, b) + o.coeff(a, b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        let d = self.degree.max(o.degree);
        Self::from_fn(d, |a, b| self.coeff(a, b) - o.coeff(a, b))
    }

    /// Exact polynomial product.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.degree + o.degree);
        for (i, (a, b)) in monomials(self.degree).enumerate() {
            let c = self.coeffs[i];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, (p, q)) in monomials(o.degree).enumerate() {
                out.coeffs[tri_index(a + p, b + q)] += c * o.coeffs[j];
            }
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Coefficient-wise maximum distance.
    pub fn coeff_distance(&self, o: &Self) -> f64 {
        let d = self.degree.max(o.degree);
        monomials(d).map(|(a, b)| (self.coeff(a, b) - o.coeff(a, b)).norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient moduli over monomials with `a != b` (non-radial content).
    pub fn angular_mass(&self) -> f64 {
        monomials(self.degree).filter(|(a, b)| a != b).map(|(a, b)| self.coeff(a, b).norm()).sum()
    }

    /// Boundary trace: Fourier mode `k` collects `Σ_{a−b=k} c_{a,b}`.
    pub fn trace(&self) -> BoundaryFunction {
        let m = self.degree;
        let mut fourier = vec![C64::new(0.0, 0.0); 2 * m + 1];
        for (k, (a, b)) in monomials(self.degree).enumerate() {
            let mode = a as isize - b as isize;
            fourier[(mode + m as isize) as usize] += self.coeffs[k];
        }
        BoundaryFunction { m, fourier }
    }

    /// Maximum modulus over the given points.
    pub fn sup_on(&self, points: &[C64]) -> f64 {
        points.iter().map(|&z| self.eval(z).norm()).fold(0.0, f64::max)
    }
}

/// Trigonometric polynomial `Σ_{k=−m}^{m} c_k e^{ikθ}` on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFunction {
    m: usize,
    fourier: Vec<C64>,
}

impl BoundaryFunction {
    pub fn zero(m: usize) -> Self {
        BoundaryFunction { m, fourier: vec![C64::new(0.0, 0.0); 2 * m + 1] }
    }

    pub fn from_modes(m: usize, modes: &[(isize, C64)]) -> Self {
        let mut f = Self::zero(m);
        for &(k, c) in modes {
            f.set_mode(k, c);
        }
        f
    }

    /// Discrete Fourier analysis of `N` equispaced samples `θ_j = 2πj/N`.
    pub fn from_samples(samples: &[C64], m: usize) -> Self {
        let n = samples.len();
        let mut f = Self::zero(m);
        for k in -(m as isize)..=(m as isize) {
            let mut acc = C64::new(0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                let th = -2.0 * PI * (k as f64) * (j as f64) / n as f64;
                acc += s * C64::new(th.cos(), th.sin());
            }
            f.set_mode(k, acc / n as f64);
        }
        f
    }

    pub fn max_mode(&self) -> usize {
        self.m
    }

    pub fn mode(&self, k: isize) -> C64 {
        if k.unsigned_abs() > self.m {
            C64::new(0.0, 0.0)
        } else {
            self.fourier[(k + self.m as isize) as usize]
        }
    }

    pub fn set_mode(&mut self, k: isize, c: C64) {
        assert!(k.unsigned_abs() <= self.m, "mode outside the truncation");
        self.fourier[(k + self.m as isize) as usize] = c;
    }

    pub fn eval(&self, theta: f64) -> C64 {
        (-(self.m as isize)..=(self.m as isize))
            .map(|k| self.mode(k) * C64::from_polar(1.0, k as f64 * theta))
            .sum()
    }

    /// Largest violation of `c_{−k} = conj(c_k)`.
    pub fn reality_defect(&self) -> f64 {
        (0..=self.m as isize).map(|k| (self.mode(-k) - self.mode(k).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.reality_defect() <= tol
    }

    /// `sqrt(Σ_{k<0} |c_k|²)` and the same over all modes.
    pub fn negative_mass(&self) -> (f64, f64) {
        let neg: f64 = (1..=self.m as isize).map(|k| self.mode(-k).norm_sqr()).sum();
        let all: f64 = self.fourier.iter().map(|c| c.norm_sqr()).sum();
        (neg.sqrt(), all.sqrt())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let m = self.m.max(o.m);
        let mut f = Self::zero(m);
        for k in -(m as isize)..=(m as isize) {
            f.set_mode(k, self.mode(k) - o.mode(k));
        }
        f
    }

    /// Sup norm sampled on `4m + 16` equispaced angles.
    pub fn sup_norm(&self) -> f64 {
        let n = 4 * self.m + 16;
        (0..n).map(|j| self.eval(2.0 * PI * j as f64 / n as f64).norm()).fold(0.0, f64::max)
    }
}

/// Relative negative-mode mass accepted by [`holomorphic_match`].
pub const HOLOMORPHIC_MATCH_TOL: f64 = 1e-8;

/// Holomorphic polynomial whose trace is the nonnegative-mode part of `boundary`.
pub fn holomorphic_part(boundary: &BoundaryFunction) -> DiskFunction {
    let m = boundary.max_mode();
    let mut h = DiskFunction::zero(m);
    for k in 0..=m {
        h.set_coeff(k, 0, boundary.mode(k as isize));
    }
    h
}

/// Holomorphic extension of boundary data with negligible negative modes.
pub fn holomorphic_match(boundary: &BoundaryFunction) -> Result<DiskFunction> {
    let (neg, all) = boundary.negative_mass();
    let scale = all.max(1.0);
    if neg > HOLOMORPHIC_MATCH_TOL * scale {
        return Err(AcxError::NotHolomorphicallyMatchable { negative_mass: neg, total_mass: all });
    }
    Ok(holomorphic_part(boundary))
}

/// `∫_{∂Δ} f ζⁿ dζ = 2πi · (mode −(n+1) of the trace of f)`.
pub fn moment_integral(f: &DiskFunction, n: usize) -> C64 {
    let k = -(n as isize) - 1;
    C64::new(0.0, 2.0 * PI) * f.trace().mode(k)
}

/// Cauchy transform `T f(ζ) = −(1/π) ∫∫_Δ f(w)/(w − ζ) dA(w)`.
///
/// On monomials: `T[ζ^a ζ̄^b] = (ζ^a ζ̄^{b+1} − [a > b] ζ^{a−b−1}) / (b + 1)`.
pub fn cauchy_transform(f: &DiskFunction) -> DiskFunction {
    let mut out = DiskFunction::zero(f.degree() + 1);
    for (a, b) in monomials(f.degree()) {
        let c = f.coeff(a, b);
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let s = c / (b + 1) as f64;
        out.coeffs[tri_index(a, b + 1)] += s;
        if a > b {
            out.coeffs[tri_index(a - b - 1, 0)] -= s;
        }
    }
    out
}

/// Polar tensor grid: Chebyshev-spaced radii in (0, 1] times equispaced angles.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarGrid {
    pub radii: Vec<f64>,
    pub angles: usize,
}

impl PolarGrid {
    pub fn new(n_radii: usize, angles: usize) -> Self {
        let radii = (0..n_radii)
            .map(|i| (PI * (i as f64 + 1.0) / (2.0 * n_radii as f64)).sin())
            .collect();
        PolarGrid { radii, angles }
    }

    /// Default fitting grid for a given degree: 32 radii, at least 64 angles and
    /// enough angles to resolve every Fourier mode up to `degree`.
    pub fn for_degree(degree: usize) -> Self {
        let radii = 32.max(degree / 2 + 8);
        Self::new(radii, 64.max(2 * degree + 8))
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.angles as f64
    }

    pub fn points(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.radii.len() * self.angles);
        for &r in &self.radii {
            for j in 0..self.angles {
                out.push(C64::from_polar(r, self.angle(j)));
            }
        }
        out
    }
}

/// Coefficients of the radial Zernike polynomial `R_n^m(r) = Σ_k c_k r^{n−2k}`.
/// `(n, m, radial polynomial terms)` of one Zernike basis function.
type ZernikeTerm = (usize, isize, Vec<(usize, f64)>);

fn zernike_radial(n: usize, m: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for k in 0..=(n - m) / 2 {
        let num = ln_factorial(n - k);
        let den = ln_factorial(k) + ln_factorial((n + m) / 2 - k) + ln_factorial((n - m) / 2 - k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push((n - 2 * k, sign * (num - den).exp().round()));
    }
    out
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn zernike_eval(terms: &[(usize, f64)], r: f64) -> f64 {
    terms.iter().map(|&(p, c)| c * r.powi(p as i32)).sum()
}

/// Accumulates the monomial expansion of `coef · R_n^{|m|}(r) e^{imθ}`.
fn add_zernike(out: &mut DiskFunction, n: usize, m: isize, coef: C64, terms: &[(usize, f64)]) {
    let am = m.unsigned_abs();
    for &(p, c) in terms {
        let j = (p - am) / 2;
        let (a, b) = if m >= 0 { (am + j, j) } else { (j, am + j) };
        let idx = tri_index(a, b);
        debug_assert!(a + b == p && a + b <= n);
        out.coeffs[idx] += coef * c;
    }
}

/// Least-squares fit of scattered samples with a Zernike basis, returned in
/// monomial form together with the maximum sample residual.
pub fn fit(samples: &[(C64, C64)], degree: usize) -> Result<(DiskFunction, f64)> {
    let nb = monomial_count(degree);
    if samples.len() < nb {
        return Err(AcxError::DegenerateGrid(format!(
            "{} samples for {} basis functions",
            samples.len(),
            nb
        )));
    }
    let basis: Vec<ZernikeTerm> = monomials(degree)
        .map(|(a, b)| {
            let n = a + b;
            let m = a as isize - b as isize;
            (n, m, zernike_radial(n, m.unsigned_abs()))
        })
        .collect();
    let rows = samples.len();
    let mut a = DMatrix::<C64>::zeros(rows, nb);
    let mut rhs = DVector::<C64>::zeros(rows);
    for (i, &(z, v)) in samples.iter().enumerate() {
        let r = z.norm();
        let th = z.arg();
        for (j, (_, m, terms)) in basis.iter().enumerate() {
            a[(i, j)] = C64::from_polar(zernike_eval(terms, r), *m as f64 * th);
        }
        rhs[i] = v;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin.is_nan() || smin <= 1e-12 * smax {
        return Err(AcxError::DegenerateGrid(format!(
            "rank-deficient fit system (singular value ratio {:.3e})",
            smin / smax
        )));
    }
    let x = svd
        .solve(&rhs, 0.0)
        .map_err(|e| AcxError::DegenerateGrid(e.to_string()))?;
    let mut f = DiskFunction::zero(degree);
    for (j, (n, m, terms)) in basis.iter().enumerate() {
        add_zernike(&mut f, *n, *m, x[j], terms);
    }
    let res = (&a * &x - &rhs).iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok((f, res))
}

/// Least-squares fit of `f` sampled on a polar tensor grid.
///
/// The angular direction is resolved exactly by a discrete Fourier transform
/// on each ring, which decouples the problem into one small radial
/// Zernike fit per Fourier mode. Equivalent to [`fit`] on the same nodes.
pub fn fit_polar(grid: &PolarGrid, degree: usize, f: impl Fn(C64) -> C64) -> Result<(DiskFunction, f64)> {
    let values: Vec<C64> = grid.points().into_iter().map(f).collect();
    fit_polar_values(grid, degree, &values)
}

/// Relative size below which a Fourier mode of the samples is treated as zero.
pub const ROUNDOFF_MODE: f64 = 1e-13;

/// [`fit_polar`] on values given at `grid.points()` (radius-major order).
pub fn fit_polar_values(grid: &PolarGrid, degree: usize, values: &[C64]) -> Result<(DiskFunction, f64)> {
    let nr = grid.radii.len();
    let na = grid.angles;
    if na < 2 * degree + 1 {
        return Err(AcxError::DegenerateGrid(format!(
            "{na} angles cannot resolve Fourier modes up to {degree}"
        )));
    }
    if values.len() != nr * na {
        return Err(AcxError::DegenerateGrid(format!("{} values for {} nodes", values.len(), nr * na)));
    }
    let values: Vec<&[C64]> = values.chunks(na).collect();
    let mut out = DiskFunction::zero(degree);
    let mut max_res = 0.0f64;
    let rings: Vec<Vec<C64>> = (-(degree as isize)..=(degree as isize))
        .map(|m| {
            values
                .iter()
                .map(|row| {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, v) in row.iter().enumerate() {
                        acc += v * C64::from_polar(1.0, -(m as f64) * grid.angle(j));
                    }
                    acc / na as f64
                })
                .collect()
        })
        .collect();
    let scale = rings.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    for (ring, m) in rings.into_iter().zip(-(degree as isize)..=(degree as isize)) {
        let am = m.unsigned_abs();
        let ns: Vec<usize> = (am..=degree).step_by(2).collect();
        if ns.len() > nr {
            return Err(AcxError::DegenerateGrid(format!(
                "{nr} radii cannot resolve {} radial functions of mode {m}",
                ns.len()
            )));
        }
        // Round-off level modes would be amplified by the monomial conversion.
        if ring.iter().all(|c| c.norm() <= ROUNDOFF_MODE * scale) {
            for &r in &ring {
                max_res = max_res.max(r.norm());
            }
            continue;
        }
        let terms: Vec<Vec<(usize, f64)>> = ns.iter().map(|&n| zernike_radial(n, am)).collect();
        let mut a = DMatrix::<f64>::zeros(nr, ns.len());
        for (i, &r) in grid.radii.iter().enumerate() {
            for (j, t) in terms.iter().enumerate() {
                a[(i, j)] = zernike_eval(t, r);
            }
        }
        let svd = a.clone().svd(true, true);
        let re = DVector::from_iterator(nr, ring.iter().map(|c| c.re));
        let im = DVector::from_iterator(nr, ring.iter().map(|c| c.im));
        let xr = svd.solve(&re, 1e-14).map_err(|e| AcxError::DegenerateGrid(e.to_string()))?;
        let xi = svd.solve(&im, 1e-14).map_err(|e| AcxError::DegenerateGrid(e.to_string()))?;
        for (j, t) in terms.iter().enumerate() {
            add_zernike(&mut out, ns[j], m, C64::new(xr[j], xi[j]), t);
        }
        let rr = &a * &xr - &re;
        let ri = &a * &xi - &im;
        for i in 0..nr {
            max_res = max_res.max(rr[i].hypot(ri[i]));
        }
    }
    Ok((out, max_res))
}
