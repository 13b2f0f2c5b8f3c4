//! User-supplied structures on `B² ∖ {0}` from a coefficient file.
//!
//! The file lists the complex components `J^B_A` in blow-up chart coordinates
//! `(z⁰, w)` on a rectangular grid in `(Re z⁰, Im z⁰)`; the components are
//! taken constant in `w`. Format (whitespace separated, `#` starts a comment):
//!
//! ```text
//! acx-coeff 1
//! grid <nx> <ny> <xmin> <xmax> <ymin> <ymax>
//! <i> <j> <32 floats>
//! ```
//!
//! Each node line gives the 16 components `J^B_A`, row `B` major, indices in
//! the order `0, 0̄, 1, 1̄`, as `re im` pairs. Node `(i, j)` sits at
//! `(xmin + i·dx, ymin + j·dy)`. Every node appears exactly once.
//! Interpolation is Catmull–Rom bicubic, clamped at the grid edges; the
//! interpolated matrix is pushed toward `J² = −I` by one step of
//! `J ← ½(J − J⁻¹)`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::acs::{self, AcStructure, Family, CUSTOM_FD_STEP};
use crate::ball;
use crate::error::{AcxError, Result};

pub const MAGIC: &str = "acx-coeff";
pub const VERSION: u32 = 1;
pub const CHANNELS: usize = 32;
/// Upper bound on `nx·ny`.
pub const MAX_NODES: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientGrid {
    pub nx: usize,
    pub ny: usize,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    /// `values[(j·nx + i)·32 + c]`.
    pub values: Vec<f64>,
}

fn perr(line: usize, msg: impl Into<String>) -> AcxError {
    AcxError::Parse(format!("line {line}: {}", msg.into()))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| perr(line, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(perr(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| perr(line, format!("not an index: {tok:?}")))
}

impl CoefficientGrid {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or_else(|| AcxError::Parse("empty coefficient file".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 2 || h[0] != MAGIC {
            return Err(perr(ln, format!("expected header `{MAGIC} {VERSION}`")));
        }
        if h[1] != VERSION.to_string() {
            return Err(perr(ln, format!("unsupported version {:?}", h[1])));
        }
        let (ln, grid) = lines.next().ok_or_else(|| AcxError::Parse("missing grid line".into()))?;
        let g: Vec<&str> = grid.split_whitespace().collect();
        if g.len() != 7 || g[0] != "grid" {
            return Err(perr(ln, "expected `grid nx ny xmin xmax ymin ymax`"));
        }
        let nx = parse_usize(g[1], ln)?;
        let ny = parse_usize(g[2], ln)?;
        let (xmin, xmax) = (parse_f64(g[3], ln)?, parse_f64(g[4], ln)?);
        let (ymin, ymax) = (parse_f64(g[5], ln)?, parse_f64(g[6], ln)?);
        if nx < 2 || ny < 2 {
            return Err(perr(ln, "grid needs at least 2 nodes per axis"));
        }
        if nx.checked_mul(ny).is_none_or(|t| t > MAX_NODES) {
            return Err(perr(ln, format!("grid too large (max {MAX_NODES} nodes)")));
        }
        if xmin >= xmax || ymin >= ymax {
            return Err(perr(ln, "grid bounds must satisfy min < max"));
        }
        let mut values = vec![0.0; nx * ny * CHANNELS];
        let mut seen = vec![false; nx * ny];
        for (ln, l) in lines {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 2 + CHANNELS {
                return Err(perr(ln, format!("expected 2 indices and {CHANNELS} values, found {} fields", t.len())));
            }
            let i = parse_usize(t[0], ln)?;
            let j = parse_usize(t[1], ln)?;
            if i >= nx || j >= ny {
                return Err(perr(ln, format!("node ({i}, {j}) outside the {nx}×{ny} grid")));
            }
            let k = j * nx + i;
            if seen[k] {
                return Err(perr(ln, format!("duplicate node ({i}, {j})")));
            }
            seen[k] = true;
            for (c, tok) in t[2..].iter().enumerate() {
                values[k * CHANNELS + c] = parse_f64(tok, ln)?;
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(AcxError::Parse(format!("missing node ({}, {})", k % nx, k / nx)));
        }
        Ok(CoefficientGrid { nx, ny, xmin, xmax, ymin, ymax, values })
    }

    /// Samples chart components `jc(z⁰)` on a grid.
    pub fn sample(
        nx: usize,
        ny: usize,
        bounds: [f64; 4],
        jc: impl Fn(C64) -> DMatrix<C64>,
    ) -> Self {
        let [xmin, xmax, ymin, ymax] = bounds;
        let mut values = vec![0.0; nx * ny * CHANNELS];
        for j in 0..ny {
            for i in 0..nx {
                let z = C64::new(
                    xmin + (xmax - xmin) * i as f64 / (nx - 1) as f64,
                    ymin + (ymax - ymin) * j as f64 / (ny - 1) as f64,
                );
                let m = jc(z);
                let k = (j * nx + i) * CHANNELS;
                for b in 0..4 {
                    for a in 0..4 {
                        values[k + 2 * (4 * b + a)] = m[(b, a)].re;
                        values[k + 2 * (4 * b + a) + 1] = m[(b, a)].im;
                    }
                }
            }
        }
        CoefficientGrid { nx, ny, xmin, xmax, ymin, ymax, values }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{MAGIC} {VERSION}\ngrid {} {} {:?} {:?} {:?} {:?}\n",
            self.nx, self.ny, self.xmin, self.xmax, self.ymin, self.ymax
        );
        for j in 0..self.ny {
            for i in 0..self.nx {
                let _ = write!(s, "{i} {j}");
                let k = (j * self.nx + i) * CHANNELS;
                for v in &self.values[k..k + CHANNELS] {
                    let _ = write!(s, " {v:?}");
                }
                s.push('\n');
            }
        }
        s
    }

    fn node(&self, i: isize, j: isize, c: usize) -> f64 {
        let i = i.clamp(0, self.nx as isize - 1) as usize;
        let j = j.clamp(0, self.ny as isize - 1) as usize;
        self.values[(j * self.nx + i) * CHANNELS + c]
    }

    /// Interpolated components `J^B_A` at chart coordinate `z⁰`.
    pub fn components(&self, z0: C64) -> DMatrix<C64> {
        let dx = (self.xmax - self.xmin) / (self.nx - 1) as f64;
        let dy = (self.ymax - self.ymin) / (self.ny - 1) as f64;
        let gx = ((z0.re - self.xmin) / dx).clamp(0.0, (self.nx - 1) as f64);
        let gy = ((z0.im - self.ymin) / dy).clamp(0.0, (self.ny - 1) as f64);
        let (i0, j0) = ((gx.floor() as isize).min(self.nx as isize - 2), (gy.floor() as isize).min(self.ny as isize - 2));
        let (tx, ty) = (gx - i0 as f64, gy - j0 as f64);
        let wx = catmull_rom(tx);
        let wy = catmull_rom(ty);
        let mut out = [0.0; CHANNELS];
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (b, wyb) in wy.iter().enumerate() {
                for (a, wxa) in wx.iter().enumerate() {
                    acc += wxa * wyb * self.node(i0 - 1 + a as isize, j0 - 1 + b as isize, c);
                }
            }
            *o = acc;
        }
        DMatrix::from_fn(4, 4, |b, a| C64::new(out[2 * (4 * b + a)], out[2 * (4 * b + a) + 1]))
    }
}

/// Catmull–Rom weights for nodes `−1, 0, 1, 2` at parameter `t ∈ [0, 1]`.
fn catmull_rom(t: f64) -> [f64; 4] {
    let (t2, t3) = (t * t, t * t * t);
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Structure on the ball defined by a coefficient grid.
pub struct CustomStructure {
    pub grid: CoefficientGrid,
    pub source: String,
}

impl CustomStructure {
    pub fn new(grid: CoefficientGrid, source: &str) -> Self {
        CustomStructure { grid, source: source.to_string() }
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::new(CoefficientGrid::parse(&text)?, &path.display().to_string()))
    }

    /// Real matrix in chart coordinates at `y`, before projection.
    pub fn chart_matrix(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let jc = self.grid.components(C64::new(y[0], y[1]));
        acs::real_from_components(&jc).map(|c| c.re)
    }

    /// `‖J² + I‖` of the raw interpolant at `y`.
    pub fn square_defect(&self, y: &DVector<f64>) -> f64 {
        let j = self.chart_matrix(y);
        (&j * &j + DMatrix::identity(4, 4)).amax()
    }
}

fn project(j: DMatrix<f64>) -> DMatrix<f64> {
    match j.clone().try_inverse() {
        Some(ji) => (j - ji) * 0.5,
        None => j,
    }
}

impl AcStructure for CustomStructure {
    fn n(&self) -> usize {
        2
    }

    fn j(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let Ok(y) = ball::ball_to_chart_real(x) else {
            return ball::j_st(2);
        };
        let a = ball::chart_jacobian_matrix(&y);
        let Some(ai) = a.clone().try_inverse() else {
            return ball::j_st(2);
        };
        project(&a * self.chart_matrix(&y) * ai)
    }

    fn dj(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        acs::fd_partials(&|q| self.j(q), x, CUSTOM_FD_STEP)
    }

    fn family(&self) -> Family {
        Family::Custom { source: self.source.clone() }
    }
}
