//! Command-line front end: `solve`, `scan`, `verify`, `density` and `pearcey`.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 the equilibrium solve did not
//! converge, 3 a check or a module computation failed.

pub mod checks;
pub mod config;
pub mod output;

use crate::classify::{classify_point, compare_phase_boundaries, curve_tau, phase_scan, Case, Curve};
use crate::equilibrium::{extract_supports, EquilibriumSolution, GridMeasure};
use crate::error::Error;
use crate::finite_n::{compare_density, zero_report, BiorthogonalSystem};
use crate::pearcey::{pearcey_eval, weight_w};
use crate::C64;
use clap::{Parser, Subcommand};
use config::RunConfig;
use output::{fmt_f64, line_plot, heat_map, write_csv, Cell, Manifest};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "veq", version, about = "Vector equilibrium solver for the quartic two-matrix model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to VEQ_WORKERS, then `run.workers`, then the CPU count.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Solve the equilibrium problem and write the three measures.
    Solve,
    /// Classify a grid of (alpha, tau) points and draw the phase diagram.
    Scan,
    /// Run the hard numerical checks and write a pass/fail table.
    Verify,
    /// Compare the finite-n kernel diagonal with the equilibrium density.
    Density,
    /// Tabulate the Pearcey-type integrals and their ODE residuals.
    Pearcey,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

/// Exit code of an error that ends a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) => EXIT_IO,
        Error::MaxIter(_) | Error::NonConvergence(_) => EXIT_NONCONVERGENCE,
        _ => EXIT_CHECK,
    }
}

/// Parse arguments, run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("veq: {e}");
            return EXIT_IO;
        }
    };
    let workers = cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("veq: thread pool: {e}");
            return EXIT_IO;
        }
    };
    let code = pool.install(|| match cli.command {
        Command::Solve => cmd_solve(&cfg),
        Command::Scan => cmd_scan(&cfg, workers),
        Command::Verify => cmd_verify(&cfg),
        Command::Density => cmd_density(&cfg),
        Command::Pearcey => cmd_pearcey(&cfg),
    });
    match code {
        Ok(c) => c,
        Err(e) => {
            eprintln!("veq: {e}");
            exit_code(&e)
        }
    }
}

fn resolve_config(cli: &Cli) -> crate::Result<RunConfig> {
    let base = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let env_workers = match std::env::var("VEQ_WORKERS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| Error::Config(format!("VEQ_WORKERS: cannot parse '{v}'")))?),
        Err(_) => None,
    };
    base.with_overrides(cli.alpha, cli.tau, cli.out.clone(), cli.workers.or(env_workers))
}

fn prepare_out(cfg: &RunConfig, command: &str) -> crate::Result<Manifest> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::Io(format!("{}: {e}", cfg.out.display())))?;
    // the echo leaves out the output directory so runs into different directories compare equal
    let echo: String = cfg.to_text().lines().filter(|l| !l.starts_with("output.dir")).map(|l| format!("{l}\n")).collect();
    std::fs::write(cfg.out.join("config.txt"), echo)?;
    let mut m = Manifest::default();
    m.set("command", command);
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.num("model.alpha", cfg.params.alpha);
    m.num("model.tau", cfg.params.tau);
    m.set("model.v", cfg.params.v_coeffs().iter().map(|&c| fmt_f64(c)).collect::<Vec<_>>().join(" "));
    Ok(m)
}

fn measure_rows(m: &GridMeasure, cap: Option<&GridMeasure>) -> Vec<Vec<Cell>> {
    let d = m.densities();
    (0..m.nodes.len())
        .map(|i| {
            let mut r = vec![Cell::F(m.nodes[i]), Cell::F(m.cell_widths[i]), Cell::F(m.weights[i]), Cell::F(d[i])];
            if let Some(c) = cap {
                r.push(Cell::F(c.weights[i]));
                r.push(Cell::F(c.weights[i] / c.cell_widths[i]));
            }
            r
        })
        .collect()
}

fn write_solution(dir: &Path, sol: &EquilibriumSolution) -> crate::Result<()> {
    let h = ["node", "width", "weight", "density"];
    write_csv(&dir.join("mu1.csv"), &h, &measure_rows(&sol.mu1, None))?;
    write_csv(&dir.join("mu2.csv"), &["node", "width", "weight", "density", "sigma2_weight", "sigma2_density"], &measure_rows(&sol.mu2, Some(&sol.cap)))?;
    write_csv(&dir.join("mu3.csv"), &h, &measure_rows(&sol.mu3, None))?;
    let window = |m: &GridMeasure, lim: f64| -> Vec<(f64, f64)> {
        let d = m.densities();
        m.nodes.iter().zip(d).filter(|(x, _)| x.abs() <= lim).map(|(&x, d)| (x, d)).collect()
    };
    let lim = 1.5 * sol.grids.x1;
    let (a, b, c) = (window(&sol.mu1, lim), window(&sol.mu2, lim), window(&sol.mu3, lim));
    let svg = line_plot(
        "Equilibrium densities",
        "x (mu1, mu3) or y on iR (mu2)",
        "density",
        &[("mu1", &a), ("mu2", &b), ("mu3", &c)],
    );
    std::fs::write(dir.join("densities.svg"), svg)?;
    Ok(())
}

fn el_manifest(m: &mut Manifest, sol: &EquilibriumSolution) {
    let r = &sol.el_report;
    m.num("el.res_eq1", r.res_eq1);
    m.num("el.res_eq2", r.res_eq2);
    m.num("el.res_eq3", r.res_eq3);
    m.num("el.slack_min1", r.slack_min1);
    m.num("el.slack_min2", r.slack_min2);
    m.num("el.slack_min3", r.slack_min3);
    m.num("el.ell1", r.ell1);
    m.num("el.lambda2", r.lambda2);
    m.num("el.lambda3", r.lambda3);
    m.num("el.field_scale", r.scale);
}

/// Solve, classify and write `mu1.csv`, `mu2.csv`, `mu3.csv`, `densities.svg` and
/// `manifest.txt`.
pub fn cmd_solve(cfg: &RunConfig) -> crate::Result<i32> {
    let mut m = prepare_out(cfg, "solve")?;
    let manifest = cfg.out.join("manifest.txt");
    match classify_point(&cfg.params, &cfg.equilibrium) {
        Err(e) => {
            m.set("status", "error");
            m.set("error", e.to_string().replace('\n', " "));
            m.write(&manifest)?;
            eprintln!("veq: {e}");
            Ok(exit_code(&e))
        }
        Ok((pc, sol)) => {
            write_solution(&cfg.out, &sol)?;
            m.set("status", "converged");
            m.set("case", pc.case);
            m.set("flags", pc.flags_string());
            m.num("energy", sol.energy);
            m.set("iterations", sol.iterations);
            m.num("mass.mu1", sol.mu1.mass());
            m.num("mass.mu2", sol.mu2.mass());
            m.num("mass.mu3", sol.mu3.mass());
            el_manifest(&mut m, &sol);
            let sup = extract_supports(&sol)?;
            m.set("support.mu1", sup.intervals.iter().map(|(a, b)| format!("[{} {}]", fmt_f64(*a), fmt_f64(*b))).collect::<Vec<_>>().join(" "));
            m.num("support.c2", sup.c2);
            m.num("support.c3", sup.c3);
            m.set("support.origin_gap_cells", format!("{:?}", sup.origin_gap_cells));
            m.write(&manifest)?;
            println!("case {} ({} iterations); wrote {}", pc.case, sol.iterations, cfg.out.display());
            Ok(EXIT_OK)
        }
    }
}

fn is_quadratic_v(cfg: &RunConfig) -> bool {
    cfg.params.v_coeffs() == [0.0, 0.0, 0.5]
}

/// Phase scan: `phase.csv`, `boundaries.csv`, `phase.svg` and `manifest.txt`.
pub fn cmd_scan(cfg: &RunConfig, workers: usize) -> crate::Result<i32> {
    let mut m = prepare_out(cfg, "scan")?;
    let s = &cfg.scan;
    let map = phase_scan(s.alpha, s.tau, s.steps, &cfg.params, &cfg.equilibrium, workers)?;
    let mut rows = Vec::new();
    for (i, &a) in map.alpha_grid.iter().enumerate() {
        for (j, &t) in map.tau_grid.iter().enumerate() {
            let pc = &map.cases[i][j];
            rows.push(vec![Cell::F(a), Cell::F(t), Cell::S(pc.case.to_string()), Cell::S(pc.flags_string())]);
        }
    }
    write_csv(&cfg.out.join("phase.csv"), &["alpha", "tau", "case", "flags"], &rows)?;
    let report = match compare_phase_boundaries(&map) {
        Ok(r) => Some(r),
        Err(Error::EmptyBoundary) => None,
        Err(e) => return Err(e),
    };
    let brows: Vec<Vec<Cell>> = report
        .iter()
        .flat_map(|r| r.deviations.iter())
        .map(|d| {
            vec![
                Cell::F(d.point.alpha),
                Cell::F(d.point.tau),
                Cell::S(d.point.from.to_string()),
                Cell::S(d.point.to.to_string()),
                Cell::S(d.nearest.to_string()),
                Cell::F(d.deviation),
            ]
        })
        .collect();
    write_csv(&cfg.out.join("boundaries.csv"), &["alpha", "tau", "from", "to", "nearest_curve", "tau_deviation"], &brows)?;
    let curves: Vec<(&str, Vec<(f64, f64)>)> = if is_quadratic_v(cfg) {
        [(Curve::Painleve, "tau = sqrt(alpha + 2)"), (Curve::Pearcey, "tau = sqrt(-1/alpha)")]
            .into_iter()
            .map(|(c, name)| {
                let pts = (0..=400)
                    .filter_map(|k| {
                        let a = s.alpha.0 + (s.alpha.1 - s.alpha.0) * k as f64 / 400.0;
                        curve_tau(c, a).map(|t| (a, t))
                    })
                    .collect();
                (name, pts)
            })
            .collect()
    } else {
        Vec::new()
    };
    let palette = [("I", "#8dd3c7"), ("II", "#ffffb3"), ("III", "#bebada"), ("IV", "#fb8072"), ("V", "#80b1d3"), ("singular", "#fdb462"), ("unknown", "#d9d9d9")];
    let svg = heat_map("Phase diagram", &map.alpha_grid, &map.tau_grid, |i, j| map.cases[i][j].case.to_string(), &palette, &curves);
    std::fs::write(cfg.out.join("phase.svg"), svg)?;
    m.set("scan.steps", s.steps);
    for c in [Case::I, Case::II, Case::III, Case::IV, Case::V, Case::Singular, Case::Unknown] {
        let count = map.cases.iter().flatten().filter(|pc| pc.case == c).count();
        m.set(&format!("count.{c}"), count);
    }
    m.set("boundary.points", map.boundary_points.len());
    if let Some(r) = &report {
        let tau_step = if s.steps > 1 { (s.tau.1 - s.tau.0) / (s.steps - 1) as f64 } else { f64::INFINITY };
        let checked: Vec<f64> = r
            .deviations
            .iter()
            .filter(|d| matches!((d.point.from, d.point.to), (Case::I, Case::II) | (Case::II, Case::I) | (Case::III, Case::IV) | (Case::IV, Case::III)))
            .map(|d| d.deviation)
            .collect();
        m.num("boundary.max_deviation", r.max);
        m.num("boundary.mean_deviation", r.mean);
        m.num("boundary.tau_step", tau_step);
        m.set("boundary.transition_points", checked.len());
        m.num("boundary.transition_max_deviation", checked.iter().cloned().fold(0.0, f64::max));
        m.set("boundary.within_1.5_steps", checked.iter().all(|&d| d <= 1.5 * tau_step));
    }
    m.set("status", "done");
    m.write(&cfg.out.join("manifest.txt"))?;
    println!("scanned {} points; wrote {}", s.steps * s.steps, cfg.out.display());
    Ok(EXIT_OK)
}

/// Hard checks: `verify.txt` (aligned table), `verify.csv` and `manifest.txt`.
pub fn cmd_verify(cfg: &RunConfig) -> crate::Result<i32> {
    let mut m = prepare_out(cfg, "verify")?;
    let results = checks::run_all(cfg);
    let width = results.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut table = String::new();
    for c in &results {
        let line = format!(
            "{:<width$}  {:>24}  {:<28}  {}{}\n",
            c.name,
            fmt_f64(c.measured),
            c.rule,
            if c.pass { "pass" } else { "FAIL" },
            if c.note.is_empty() { String::new() } else { format!("  ({})", c.note) }
        );
        table.push_str(&line);
    }
    std::fs::write(cfg.out.join("verify.txt"), &table)?;
    let rows: Vec<Vec<Cell>> = results
        .iter()
        .map(|c| vec![Cell::S(c.name.replace(',', ";")), Cell::F(c.measured), Cell::S(c.rule.clone()), Cell::S(if c.pass { "pass" } else { "fail" }.into())])
        .collect();
    write_csv(&cfg.out.join("verify.csv"), &["check", "measured", "rule", "status"], &rows)?;
    let failed = results.iter().filter(|c| !c.pass).count();
    m.set("checks.total", results.len());
    m.set("checks.failed", failed);
    m.set("status", if failed == 0 { "pass" } else { "fail" });
    m.write(&cfg.out.join("manifest.txt"))?;
    print!("{table}");
    Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECK })
}

/// `density_n{n}.csv` with `(x, K11_diag_over_n, rho1, abs_err)` per `n`, `density.svg` and
/// `manifest.txt`.
pub fn cmd_density(cfg: &RunConfig) -> crate::Result<i32> {
    let mut m = prepare_out(cfg, "density")?;
    let (_, sol) = classify_point(&cfg.params, &cfg.equilibrium)?;
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut code = EXIT_OK;
    for &n in &cfg.density_n {
        let key = format!("n{n}");
        let sys = match BiorthogonalSystem::new(n, &cfg.params) {
            Ok(s) => s,
            Err(e) => {
                m.set(&format!("{key}.error"), e);
                code = EXIT_CHECK;
                continue;
            }
        };
        let c = compare_density(&sys, &sol)?;
        let z = zero_report(&sys)?;
        let mut rows = Vec::new();
        let mut pts = Vec::new();
        // mirror the positive-side samples so the file covers the whole support interior
        for &(x, k, r) in c.samples.iter().rev() {
            rows.push(vec![Cell::F(-x), Cell::F(k), Cell::F(r), Cell::F((k - r).abs())]);
            pts.push((-x, k));
        }
        for &(x, k, r) in &c.samples {
            rows.push(vec![Cell::F(x), Cell::F(k), Cell::F(r), Cell::F((k - r).abs())]);
            pts.push((x, k));
        }
        write_csv(&cfg.out.join(format!("density_{key}.csv")), &["x", "K11_diag_over_n", "rho1", "abs_err"], &rows)?;
        curves.push((format!("K11/n, n = {n}"), pts));
        m.num(&format!("{key}.l1"), c.l1);
        m.num(&format!("{key}.sup"), c.sup);
        m.num(&format!("{key}.mass"), c.mass);
        m.num(&format!("{key}.bio_residual"), sys.bio_residual);
        m.num(&format!("{key}.condition"), sys.moments.condition);
        m.set(&format!("{key}.precision_warning"), sys.moments.precision_warning);
        m.set(&format!("{key}.zeros_ok"), z.ok());
        println!("n = {n}: L1 {:.4e}, sup {:.4e}, mass {:.10}", c.l1, c.sup, c.mass);
    }
    let rho: Vec<(f64, f64)> = {
        let d = sol.mu1.densities();
        let lim = sol.grids.x1;
        sol.mu1.nodes.iter().zip(d).filter(|(x, _)| x.abs() <= lim).map(|(&x, d)| (x, d)).collect()
    };
    let mut series: Vec<(&str, &[(f64, f64)])> = vec![("rho1", &rho)];
    for (name, pts) in &curves {
        series.push((name.as_str(), pts));
    }
    std::fs::write(cfg.out.join("density.svg"), line_plot("Kernel diagonal against rho1", "x", "density", &series))?;
    m.set("status", if code == EXIT_OK { "done" } else { "partial" });
    m.write(&cfg.out.join("manifest.txt"))?;
    Ok(code)
}

/// `pearcey.csv` (values, first derivative and relative ODE residual on each contour over a
/// real grid), `weights.csv` (`w_0`, `w_1`, `w_2`), `pearcey.svg` and `manifest.txt`.
pub fn cmd_pearcey(cfg: &RunConfig) -> crate::Result<i32> {
    let mut m = prepare_out(cfg, "pearcey")?;
    let pc = &cfg.pearcey;
    let p = &cfg.params;
    let xs: Vec<f64> = (0..pc.points).map(|k| pc.x.0 + (pc.x.1 - pc.x.0) * k as f64 / (pc.points - 1) as f64).collect();
    let nf = pc.n as f64;
    let c1 = nf * nf * p.tau * p.tau * p.alpha;
    let c0 = nf.powi(3) * p.tau.powi(4);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for &j in &pc.contours {
        let mut pts = Vec::new();
        for &x in &xs {
            let z = C64::new(x, 0.0);
            let e = pearcey_eval(j, pc.n, z, p)?;
            let res = (e.mant[3] + e.mant[1] * c1 - e.mant[0] * z * c0).norm();
            let scale = e.abs_mant[3] + c1.abs() * e.abs_mant[1] + c0 * x.abs() * e.abs_mant[0];
            let rel = res / scale;
            worst = worst.max(rel);
            rows.push(vec![
                Cell::I(j as i64),
                Cell::F(x),
                Cell::F(e.log_scale),
                Cell::F(e.mant[0].re),
                Cell::F(e.mant[0].im),
                Cell::F(e.mant[1].re),
                Cell::F(e.mant[1].im),
                Cell::F(rel),
            ]);
            pts.push((x, e.log_scale + e.mant[0].norm().ln()));
        }
        curves.push((format!("contour {j}"), pts));
    }
    write_csv(
        &cfg.out.join("pearcey.csv"),
        &["contour", "x", "log_scale", "p_re", "p_im", "dp_re", "dp_im", "ode_rel_residual"],
        &rows,
    )?;
    let mut wrows = Vec::new();
    for &x in &xs {
        let w: Vec<f64> = (0..3).map(|j| weight_w(j, pc.n, x, p)).collect::<crate::Result<_>>()?;
        wrows.push(vec![Cell::F(x), Cell::F(w[0]), Cell::F(w[1]), Cell::F(w[2])]);
    }
    write_csv(&cfg.out.join("weights.csv"), &["x", "w0", "w1", "w2"], &wrows)?;
    let series: Vec<(&str, &[(f64, f64)])> = curves.iter().map(|(n, p)| (n.as_str(), p.as_slice())).collect();
    std::fs::write(cfg.out.join("pearcey.svg"), line_plot("log |p_j,n(x)|", "x", "log modulus", &series))?;
    m.set("pearcey.n", pc.n);
    m.num("ode.max_rel_residual", worst);
    m.set("status", "done");
    m.write(&cfg.out.join("manifest.txt"))?;
    println!("max relative ODE residual {worst:.3e}; wrote {}", cfg.out.display());
    Ok(if worst < 1e-8 { EXIT_OK } else { EXIT_CHECK })
}
