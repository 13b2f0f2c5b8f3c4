//! Command-line front end for the `acx` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::acs;
use crate::ball;
use crate::calculus::{LogTau0, ScalarField, Tau0};
use crate::config::{self, RunConfig, StructureSpec};
use crate::error::{AcxError, Result};
use crate::lift::{self, LiftSpace};
use crate::ma::{self, Region};
use crate::report::{Check, Report, Table};
use crate::sampling::Sampler;
use crate::stationary::{self, SolveOptions};
use crate::variations;

#[derive(Debug, Parser)]
#[command(name = "acx", version, about = "Almost complex structures on the unit ball: stationary disks, lifts, Monge–Ampère checks")]
pub struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for JSON reports and CSV tables.
    #[arg(long, global = true, default_value = "acx-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UChoice {
    #[value(name = "log_tau0")]
    LogTau0,
    #[value(name = "tau0")]
    Tau0,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the stationary lift of the disk ζ ↦ ζ·v.
    SolveStationary {
        /// Direction as comma-separated complex numbers, e.g. "0.6,0.8i".
        #[arg(long, allow_hyphen_values = true)]
        v: String,
    },
    /// J² = −I, L-condition (i), nicety and the Nijenhuis identity.
    CheckStructure,
    /// Tangent and cotangent lifts: squares and the complex-coordinate form.
    LiftVerify,
    /// Infinitesimal variations W(ζ) = ζ·w along ζ ↦ ζ·v.
    Variations {
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        /// Defaults to a unit vector Hermitian-orthogonal to v.
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
    },
    /// J-Hessian, Monge–Ampère degeneracy and harmonicity for u.
    MaReport {
        #[arg(long, value_enum)]
        u: UChoice,
    },
    /// Green-function checks for log τ₀.
    GreenCheck,
    /// Identities, Hessian matrix and eigenvalues of the radial shell example.
    Example58,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveStationary { .. } => "solve-stationary",
            Command::CheckStructure => "check-structure",
            Command::LiftVerify => "lift-verify",
            Command::Variations { .. } => "variations",
            Command::MaReport { .. } => "ma-report",
            Command::GreenCheck => "green-check",
            Command::Example58 => "example58",
        }
    }
}

/// Stable tags naming the identity behind each check.
pub mod tags {
    pub const COMPLEX_STRUCTURE: &str = "j-squared";
    pub const L_CONDITION: &str = "l-condition-i";
    pub const NIJENHUIS: &str = "nijenhuis-ddc-identity";
    pub const TANGENT_LIFT: &str = "tangent-lift";
    pub const COTANGENT_LIFT: &str = "cotangent-lift";
    pub const RH_SYSTEM: &str = "rh-system";
    pub const CONORMAL: &str = "conormal-condition";
    pub const VARIATION: &str = "variation-equation";
    pub const VERY_NICE: &str = "very-nice-criterion";
    pub const HESSIAN: &str = "j-hessian";
    pub const MONGE_AMPERE: &str = "monge-ampere";
    pub const HARMONIC: &str = "harmonic-along-leaves";
    pub const GREEN: &str = "green-function";
    pub const EXAMPLE_IDENTITIES: &str = "shell-example-identities";
    pub const EXAMPLE_MATRIX: &str = "shell-example-matrix";
}

fn coords(x: &DVector<f64>) -> Vec<f64> {
    x.iter().cloned().collect()
}

fn check_dim(cfg: &RunConfig, v: &[C64], what: &str) -> Result<()> {
    if v.len() != cfg.n {
        return Err(AcxError::Config(format!("{what} has {} components, expected n = {}", v.len(), cfg.n)));
    }
    Ok(())
}

fn probes(cfg: &RunConfig) -> Vec<DVector<f64>> {
    acs::probe_points(cfg.n, cfg.probes.count, cfg.seed, cfg.probes.rmin, cfg.probes.rmax)
}

pub fn solve_stationary(cfg: &RunConfig, v: &str) -> Result<Report> {
    let v = config::parse_direction(v)?;
    check_dim(cfg, &v, "--v")?;
    let j = cfg.build_structure()?;
    let s = stationary::assemble_rh(j, &v, cfg.grid.degree)?;
    let inv = stationary::check_invertibility(&s);
    let opts = SolveOptions { tol_interior: cfg.tolerances.interior, tol_boundary: cfg.tolerances.boundary, ..Default::default() };
    let sol = stationary::solve_rh(&s, &opts)?;
    let lift = stationary::assemble_stationary_lift(&s, &sol);
    let con = stationary::verify_conormal(&lift);
    let mut r = Report::new("solve-stationary", &cfg.hash());
    r.check(Check::flag("invertibility", tags::RH_SYSTEM, inv.pass));
    r.check(Check::below("interior_residual", tags::RH_SYSTEM, sol.interior_residual, cfg.tolerances.interior));
    r.check(Check::below("pointwise_residual", tags::RH_SYSTEM, sol.pointwise_residual, stationary::HOLOMORPHY_TOL));
    r.check(Check::below("boundary_residual", tags::RH_SYSTEM, sol.boundary_residual, cfg.tolerances.boundary));
    r.check(Check::below("lambda_imaginary", tags::CONORMAL, con.lambda_imag_max, stationary::LAMBDA_TOL));
    r.check(Check::above("lambda_min_abs", tags::CONORMAL, con.lambda_min_abs, 0.0));
    r.check(Check::below("conormal_annihilation", tags::CONORMAL, con.annihilation, stationary::ANNIHILATION_TOL));
    r.check(Check::below("cotangent_holomorphy", tags::COTANGENT_LIFT, con.holomorphy, stationary::HOLOMORPHY_TOL));
    r.set("v", v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>());
    r.set("degree", s.degree);
    r.set("method", sol.method);
    r.set("iterations", sol.iterations);
    r.set("kernel_dim", sol.kernel_dim);
    r.set("rhs_fit_residual", s.f_fit_residual);
    r.set("invertibility", &inv);
    r.set("conormal", &con);
    let mut t = Table::new("lift", &["re_zeta", "im_zeta"]);
    for z in stationary::holomorphy_grid() {
        for (a, g) in sol.g.iter().enumerate() {
            let val = g.eval(z);
            t.push(&[z.re, z.im], &format!("re_g{}", a + 1), val.re, f64::INFINITY, true);
            t.push(&[z.re, z.im], &format!("im_g{}", a + 1), val.im, f64::INFINITY, true);
        }
    }
    for k in 0..32 {
        let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 32.0);
        let lam = lift.rotated_covector(z)[0] * z;
        t.push(&[z.re, z.im], "re_lambda", lam.re, f64::INFINITY, true);
        t.push_below(&[z.re, z.im], "abs_im_lambda", lam.im.abs(), stationary::LAMBDA_TOL);
    }
    r.table(t);
    Ok(r)
}

pub fn check_structure(cfg: &RunConfig) -> Result<Report> {
    let j = cfg.build_structure()?;
    let pts = probes(cfg);
    let m = 2 * cfg.n;
    let mut r = Report::new("check-structure", &cfg.hash());
    let mut t = Table::with_dim("points", m);
    let tol = cfg.tolerances.bracket;
    let mut sampler = Sampler::new(cfg.seed ^ 0x5eed);
    let mut sq_max = 0.0f64;
    let mut nij_max = 0.0f64;
    let mut n_max = 0.0f64;
    for p in &pts {
        let sq = acs::square_residual(j.as_ref(), std::slice::from_ref(p));
        sq_max = sq_max.max(sq);
        t.push_below(&coords(p), "j_squared_plus_identity", sq, tol);
        let l = acs::check_l_condition_i(j.as_ref(), std::slice::from_ref(p));
        t.push_below(&coords(p), "l_condition_deviation", l.deviation.max(l.leakage), 1e-9);
        let x = sampler.unit_vector(m);
        let y = sampler.unit_vector(m);
        let res = acs::nijenhuis_identity_residual(j.as_ref(), &LogTau0, &x, &y, p);
        nij_max = nij_max.max(res);
        t.push_below(&coords(p), "nijenhuis_identity", res, 2e-5);
        n_max = n_max.max(acs::nijenhuis(j.as_ref(), &x, &y, p).amax());
    }
    let l = acs::check_l_condition_i(j.as_ref(), &pts);
    r.check(Check::below("j_squared", tags::COMPLEX_STRUCTURE, sq_max, tol));
    r.check(Check::flag("l_condition_i", tags::L_CONDITION, l.pass));
    r.check(Check::below("nijenhuis_identity", tags::NIJENHUIS, nij_max, 2e-5));
    if matches!(cfg.structure, StructureSpec::Standard) {
        r.check(Check::below("nijenhuis_vanishes", tags::NIJENHUIS, n_max, 1e-8));
    }
    r.set("l_condition", &l);
    r.set("nijenhuis_sup", n_max);
    r.set("family", j.family());
    if let Some(phi) = cfg.deformation() {
        let nicety = acs::nicety(&phi, &acs::nicety_points(cfg.seed, 2 * cfg.probes.count));
        r.set("nicety", &nicety);
    }
    if cfg.n == 2 {
        let res: Vec<[f64; 3]> = pts.iter().filter_map(|p| ball::frame_bracket_residuals(p).ok()).collect();
        r.set("frame_bracket_residuals", res);
    }
    r.table(t);
    Ok(r)
}

pub fn lift_verify(cfg: &RunConfig) -> Result<Report> {
    let j = cfg.build_structure()?;
    let pts = probes(cfg);
    let m = 2 * cfg.n;
    let tol = cfg.tolerances.bracket;
    let mut r = Report::new("lift-verify", &cfg.hash());
    let mut t = Table::with_dim("points", m);
    let mut s = Sampler::new(cfg.seed ^ 0x11f7);
    let (mut tan, mut cot, mut cplx, mut std_dev) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let id = nalgebra::DMatrix::<f64>::identity(2 * m, 2 * m);
    for p in &pts {
        let q = s.gaussian_vector(m);
        let lt = lift::lift_tangent(j.clone()).eval(p, &q);
        let lc = lift::lift_cotangent(j.clone()).eval(p, &q);
        let a = (&lt * &lt + &id).amax();
        let b = (&lc * &lc + &id).amax();
        let c = lift::complex_form_discrepancy(&j, p, &q);
        tan = tan.max(a);
        cot = cot.max(b);
        cplx = cplx.max(c);
        t.push_below(&coords(p), "tangent_lift_square", a, tol);
        t.push_below(&coords(p), "cotangent_lift_square", b, tol);
        t.push_below(&coords(p), "cotangent_complex_form", c, tol);
        if matches!(cfg.structure, StructureSpec::Standard) {
            let d = (lt - lift::standard_lift(cfg.n, LiftSpace::Tangent)).amax()
                .max((lc - lift::standard_lift(cfg.n, LiftSpace::Cotangent)).amax());
            std_dev = std_dev.max(d);
            t.push(&coords(p), "standard_lift_deviation", d, 0.0, d == 0.0);
        }
    }
    r.check(Check::below("tangent_lift_square", tags::TANGENT_LIFT, tan, tol));
    r.check(Check::below("cotangent_lift_square", tags::COTANGENT_LIFT, cot, tol));
    r.check(Check::below("cotangent_complex_form", tags::COTANGENT_LIFT, cplx, tol));
    if matches!(cfg.structure, StructureSpec::Standard) {
        r.check(Check::flag("standard_lifts_exact", tags::COTANGENT_LIFT, std_dev == 0.0));
    }
    r.table(t);
    Ok(r)
}

pub fn variations_cmd(cfg: &RunConfig, v: &str, w: Option<&str>) -> Result<Report> {
    let v = config::parse_direction(v)?;
    check_dim(cfg, &v, "--v")?;
    let w = match w {
        Some(w) => config::parse_vector(w)?,
        None => variations::horizontal_direction(&v),
    };
    check_dim(cfg, &w, "--w")?;
    let j = cfg.build_structure()?;
    let phi = cfg.deformation();
    let grid = variations::disk_grid(cfg.grid.radii, cfg.grid.angles);
    variations::check_disk_domain(j.as_ref(), &v, &grid, 64)?;
    let rep = variations::very_nice_closure_test(j.clone(), phi.as_ref(), &v, &w, &grid);
    let wf = variations::coordinate_variation(&v, &w);
    let tl = variations::tangent_lift_residual(j.clone(), &wf, &grid);
    let anti = variations::variation_residual(j.as_ref(), &variations::antiholomorphic_variation(&v, &w), &grid);
    let attach = variations::boundary_attachment(&wf, 64);
    let tol = cfg.tolerances.interior;
    let mut r = Report::new("variations", &cfg.hash());
    r.check(Check::below("w_residual", tags::VARIATION, rep.w_residual, tol));
    r.check(Check::below("tangent_lift_cross_check", tags::TANGENT_LIFT, tl, tol));
    r.check(Check::above("antiholomorphic_detected", tags::VARIATION, anti, 1e-2));
    if let Some(c) = rep.consistent {
        r.check(Check::flag("jw_verdict_matches_nicety", tags::VERY_NICE, c));
    }
    r.set("v", v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>());
    r.set("w", w.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>());
    r.set("closure", &rep);
    r.set("tangent_lift_residual", tl);
    r.set("antiholomorphic_residual", anti);
    r.set("boundary_attachment", attach);
    let mut t = Table::new("disk", &["re_zeta", "im_zeta"]);
    let jw = variations::j_composed(j.clone(), &wf);
    for &z in &grid {
        let a = variations::variation_defect(j.as_ref(), &wf, z).amax();
        let b = variations::variation_defect(j.as_ref(), &jw, z).amax();
        t.push_below(&[z.re, z.im], "w_defect", a, tol);
        t.push(&[z.re, z.im], "jw_defect", b, variations::PASS_BAND, b < variations::PASS_BAND);
    }
    r.table(t);
    Ok(r)
}

pub fn ma_report(cfg: &RunConfig, u: UChoice) -> Result<Report> {
    let j = cfg.build_structure()?;
    let pts = probes(cfg);
    let m = 2 * cfg.n;
    let uf: &dyn ScalarField = match u {
        UChoice::LogTau0 => &LogTau0,
        UChoice::Tau0 => &Tau0,
    };
    let ma_tol = 1e-6;
    let nice = cfg.deformation().map(|phi| acs::nicety(&phi, &acs::nicety_points(cfg.seed, 2 * cfg.probes.count)).nice);
    let mut r = Report::new("ma-report", &cfg.hash());
    let mut t = Table::with_dim("points", m);
    let frame = ma::euclidean_frame(m);
    let (mut sym, mut herm, mut gap, mut min_eig) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    let (mut all_degenerate, mut agree, mut kernel) = (true, true, 0.0f64);
    for p in &pts {
        let h = ma::j_hessian(uf, j.as_ref(), p, &frame, "euclidean")?;
        let d = ma::ma_degeneracy(uf, j.as_ref(), p, ma_tol);
        sym = sym.max(h.symmetry_defect);
        herm = herm.max(h.j_hermitian_defect);
        gap = gap.max(h.formula_gap);
        min_eig = min_eig.min(h.min_eigenvalue());
        all_degenerate &= d.eigen_degenerate;
        agree &= d.agree;
        let c = coords(p);
        t.push(&c, "min_eigenvalue", h.min_eigenvalue(), -cfg.tolerances.psh, h.min_eigenvalue() >= -cfg.tolerances.psh);
        t.push_below(&c, "min_abs_eigenvalue", d.min_abs_eigenvalue, ma_tol);
        t.push_below(&c, "pfaffian_scaled", d.pfaffian_scaled, ma_tol);
        t.push_below(&c, "formula_gap", h.formula_gap, 1e-5);
        t.push_below(&c, "j_hermitian_defect", h.j_hermitian_defect, 1e-6);
        if let Ok((a, b)) = ma::kernel_alignment(uf, j.as_ref(), p) {
            kernel = kernel.max(a.max(b));
            t.push_below(&c, "kernel_row_norm", a.max(b), 2e-5);
        }
    }
    r.check(Check::below("hessian_symmetry", tags::HESSIAN, sym, 1e-9));
    r.check(Check::below("hessian_j_hermitian", tags::HESSIAN, herm, 1e-6));
    r.check(Check::below("hessian_formula_agreement", tags::HESSIAN, gap, 1e-5));
    r.check(Check::flag("degeneracy_detectors_agree", tags::MONGE_AMPERE, agree));
    let mut s = Sampler::new(cfg.seed ^ 0x4a11);
    let grid = variations::default_grid();
    let mut harm = Vec::new();
    for _ in 0..10 {
        let d = s.unit_vector(m);
        harm.push(ma::harmonicity_along_disk(uf, &ball::to_complex(&d), &grid));
    }
    match u {
        UChoice::LogTau0 => {
            r.check(Check::flag("monge_ampere_degenerate", tags::MONGE_AMPERE, all_degenerate));
            r.check(Check::below("harmonic_along_disks", tags::HARMONIC, harm.iter().cloned().fold(0.0, f64::max), 1e-9));
            if nice == Some(true) {
                r.check(Check::below("kernel_alignment", tags::MONGE_AMPERE, kernel, 2e-5));
            }
        }
        UChoice::Tau0 => {
            r.check(Check::above("strictly_psh", tags::HESSIAN, min_eig, 0.0));
            let dev = harm.iter().map(|h| (h - 4.0).abs()).fold(0.0, f64::max);
            r.check(Check::below("laplacian_along_disks", tags::HARMONIC, dev, 1e-6));
        }
    }
    r.set("u", uf.name());
    r.set("min_eigenvalue", min_eig);
    r.set("kernel_row_sup", kernel);
    r.set("nice", nice);
    r.set("harmonicity", harm);
    r.table(t);
    Ok(r)
}

pub fn green_check_cmd(cfg: &RunConfig) -> Result<Report> {
    let j = cfg.build_structure()?;
    let region = Region::shell(cfg.probes.rmin, cfg.probes.rmax, cfg.probes.count, cfg.seed);
    let g = ma::green_check(j.as_ref(), &region, cfg.tolerances.psh, 1e-6)?;
    let mut r = Report::new("green-check", &cfg.hash());
    r.check(Check::flag("boundary_values", tags::GREEN, g.boundary_ok));
    r.check(Check::flag("logarithmic_pole", tags::GREEN, g.pole_ok));
    r.check(Check::flag("plurisubharmonic", tags::GREEN, g.psh.psh));
    r.check(Check::flag("monge_ampere", tags::MONGE_AMPERE, g.ma_ok));
    let mut t = Table::new("shells", &["radius"]);
    for &(rad, v) in &g.boundary {
        t.push(&[rad], "sup_abs_u", v, f64::INFINITY, true);
    }
    for &(rad, lo, hi) in &g.pole {
        t.push(&[rad], "min_u_over_log_abs_z", lo, 0.5, lo > 0.5);
        t.push(&[rad], "max_u_over_log_abs_z", hi, 4.0, hi < 4.0);
    }
    r.table(t);
    r.set("green", &g);
    Ok(r)
}

pub fn example58(cfg: &RunConfig) -> Result<Report> {
    let profile = match cfg.structure {
        StructureSpec::RadialH { .. } => cfg.profile().expect("radial family"),
        _ => acs::ShellProfile::default(),
    };
    let e = ma::example58_report(profile, 20, 0.35, 0.45)?;
    let mut r = Report::new("example58", &cfg.hash());
    let id_err = e.identities.iter().map(|x| x.error).fold(0.0, f64::max);
    let entry_err = e.points.iter().map(|p| p.max_entry_error).fold(0.0, f64::max);
    let eig_err = e.points.iter().map(|p| p.eigen_error).fold(0.0, f64::max);
    r.check(Check::below("identities", tags::EXAMPLE_IDENTITIES, id_err, e.tol));
    r.check(Check::below("hessian_entries", tags::EXAMPLE_MATRIX, entry_err, e.tol));
    r.check(Check::below("eigenvalues", tags::EXAMPLE_MATRIX, eig_err, e.tol));
    r.check(Check::flag("non_psh_where_h_z_nonzero", tags::EXAMPLE_MATRIX, e.non_psh_detected));
    let ratios_ok = e.step_ratios.iter().all(|&q| (3.0..5.0).contains(&q));
    r.check(Check::flag("second_order_convergence", tags::EXAMPLE_MATRIX, ratios_ok));
    let min = e.points.iter().map(|p| p.min_eigenvalue).fold(f64::INFINITY, f64::min);
    r.check(Check::above("plurisubharmonic", tags::HESSIAN, min, -e.tol));
    let mut t = Table::with_dim("identities", 4);
    for row in &e.identities {
        t.push_below(&row.point, &row.identity, row.error, e.tol);
    }
    r.table(t);
    let mut t = Table::with_dim("hessian", 4);
    for p in &e.points {
        t.push_below(&p.point, "max_entry_error", p.max_entry_error, e.tol);
        t.push_below(&p.point, "eigen_error", p.eigen_error, e.tol);
        t.push(&p.point, "min_eigenvalue", p.min_eigenvalue, -e.tol, p.min_eigenvalue >= -e.tol);
    }
    r.table(t);
    r.set("example", &e);
    Ok(r)
}

/// Runs one command; configuration and assembly failures become error reports.
pub fn run(cfg: &RunConfig, cmd: &Command) -> Report {
    let out = match cmd {
        Command::SolveStationary { v } => solve_stationary(cfg, v),
        Command::CheckStructure => check_structure(cfg),
        Command::LiftVerify => lift_verify(cfg),
        Command::Variations { v, w } => variations_cmd(cfg, v, w.as_deref()),
        Command::MaReport { u } => ma_report(cfg, *u),
        Command::GreenCheck => green_check_cmd(cfg),
        Command::Example58 => example58(cfg),
    };
    match out {
        Ok(r) => r.finish(),
        Err(e) => Report::error(cmd.name(), &cfg.hash(), &e),
    }
}

/// Applies `ACX_THREADS` to the global thread pool.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("ACX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| AcxError::Config(format!("ACX_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(AcxError::Config("ACX_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| AcxError::Config(format!("thread pool: {e}")))
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let name = cli.command.name();
    let setup = configure_threads().and_then(|_| match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    });
    let report = match setup {
        Ok(cfg) => run(&cfg, &cli.command),
        Err(e) => Report::error(name, "", &e),
    };
    if let Some(err) = &report.error {
        eprintln!("{}", serde_json::json!({ "command": name, "error": { "kind": err.kind, "message": err.message } }));
    }
    match report.write(&cli.out) {
        Ok(files) => {
            let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{name}: {} ({} checks, {} failed{})", report.status, report.checks.len(), failed.len(),
                if failed.is_empty() { String::new() } else { format!(": {}", failed.join(", ")) });
            for f in files {
                let _ = writeln!(out, "  wrote {}", f.display());
            }
            report.exit_code()
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "command": name, "error": { "kind": "io", "message": e.to_string() } }));
            2
        }
    }
}
