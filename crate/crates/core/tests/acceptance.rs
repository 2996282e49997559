//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the summary is always printed. The phase scan makes
//! this the slowest test (a few minutes on one core).

use std::path::Path;
use std::time::{Duration, Instant};
use veq::classify::{classify_point, compare_phase_boundaries, phase_scan, Case};
use veq::cli::checks::{self, Check};
use veq::cli::config::RunConfig;
use veq::equilibrium::{EquilibriumConfig, EquilibriumSolution};
use veq::params::ModelParams;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn from_checks(cs: &[Check], limit: Option<(Duration, Duration)>) -> Self {
        let failed: Vec<String> = cs
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} = {:e} (want {}) {}", c.name, c.measured, c.rule, c.note))
            .collect();
        let mut pass = failed.is_empty() && !cs.is_empty();
        let mut detail = if cs.is_empty() {
            "no checks ran".to_string()
        } else if failed.is_empty() {
            cs.iter()
                .map(|c| if c.measured.is_nan() { format!("{}: {}", c.name, c.note) } else { format!("{} = {:.3e}", c.name, c.measured) }).collect::<Vec<_>>().join("; ")
        } else {
            failed.join("; ")
        };
        if let Some((took, max)) = limit {
            pass &= took <= max;
            detail.push_str(&format!(" [{:.2} s, limit {} s]", took.as_secs_f64(), max.as_secs()));
        }
        Outcome { pass, detail }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn collect(r: veq::Result<Check>, name: &str) -> Vec<Check> {
    vec![r.unwrap_or_else(|e| Check::failed(name, &e))]
}

/// The four reference points of the quadratic-potential phase diagram.
const POINTS: [(f64, f64, Case); 4] = [(2.0, 0.8, Case::I), (1.0, 3.0, Case::II), (-2.0, 2.0, Case::III), (-2.5, 0.2, Case::IV)];

fn solve_points() -> Vec<(f64, f64, Case, Duration, veq::Result<(Case, EquilibriumSolution)>)> {
    let cfg = EquilibriumConfig::default();
    POINTS
        .iter()
        .map(|&(a, t, want)| {
            let (r, took) = timed(|| {
                let p = ModelParams::gaussian(a, t)?;
                classify_point(&p, &cfg).map(|(pc, sol)| (pc.case, sol))
            });
            (a, t, want, took, r)
        })
        .collect()
}

fn criterion_5(points: &[(f64, f64, Case, Duration, veq::Result<(Case, EquilibriumSolution)>)]) -> Outcome {
    let mut cs = Vec::new();
    for (a, t, want, took, r) in points {
        let at = format!("({a}, {t})");
        match r {
            Err(e) => cs.push(Check::failed(&format!("{at} solve"), e)),
            Ok((case, sol)) => {
                let el = &sol.el_report;
                let masses = [sol.mu1.mass() - 1.0, sol.mu2.mass() - 2.0 / 3.0, sol.mu3.mass() - 1.0 / 3.0];
                cs.push(Check::below(&format!("{at} mass defect"), masses.iter().map(|m| m.abs()).fold(0.0, f64::max), 1e-10));
                let over = sol.mu2.weights.iter().zip(&sol.cap.weights).map(|(m, c)| (m - c).max(-m)).fold(0.0, f64::max);
                cs.push(Check::below(&format!("{at} mu2 bound violation"), over, 1e-12));
                let sym = [&sol.mu1, &sol.mu2, &sol.mu3].iter().map(|m| m.symmetry_defect()).fold(0.0, f64::max);
                cs.push(Check::below(&format!("{at} symmetry"), sym, 1e-8));
                cs.push(Check::below(&format!("{at} EL residual"), el.res_eq1.max(el.res_eq2).max(el.res_eq3) / el.scale, 1e-3));
                let slack = el.slack_min1.min(el.slack_min2).min(el.slack_min3);
                cs.push(Check { name: format!("{at} EL slack"), measured: slack, rule: ">= -1e-6".into(), pass: slack >= -1e-6, note: String::new() });
                cs.push(Check {
                    name: format!("{at} case"),
                    measured: f64::NAN,
                    rule: format!("{want}"),
                    pass: case == want,
                    note: format!("got {case}"),
                });
            }
        }
        cs.push(Check::below(&format!("{at} seconds"), took.as_secs_f64(), 300.0));
    }
    Outcome::from_checks(&cs, None)
}

/// Runs `f` on every converged reference point and keeps the checks whose names match.
fn per_point(
    points: &[(f64, f64, Case, Duration, veq::Result<(Case, EquilibriumSolution)>)],
    f: fn(&EquilibriumSolution, &mut Vec<Check>) -> veq::Result<()>,
    keep: impl Fn(&str) -> bool,
) -> Outcome {
    let mut cs = Vec::new();
    for (a, t, _, _, r) in points {
        let at = format!("({a}, {t})");
        let Ok((_, sol)) = r else {
            cs.push(Check { name: format!("{at} solve"), measured: f64::NAN, rule: "converged".into(), pass: false, note: String::new() });
            continue;
        };
        let mut out = Vec::new();
        if let Err(e) = f(sol, &mut out) {
            out.push(Check::failed("module error", &e));
        }
        cs.extend(out.into_iter().filter(|c| keep(&c.name) || c.rule == "no error").map(|mut c| {
            c.name = format!("{at} {}", c.name);
            c
        }));
    }
    Outcome::from_checks(&cs, None)
}

fn criterion_6() -> Outcome {
    let cfg = RunConfig::default();
    let ((map, report), took) = timed(|| {
        let map = phase_scan((-3.0, 3.0), (0.2, 3.0), 9, &cfg.params, &cfg.equilibrium, 8);
        let report = map.as_ref().ok().map(compare_phase_boundaries);
        (map, report)
    });
    let map = match map {
        Ok(m) => m,
        Err(e) => return Outcome { pass: false, detail: e.to_string() },
    };
    let report = match report {
        Some(Ok(r)) => r,
        Some(Err(e)) => return Outcome { pass: false, detail: e.to_string() },
        None => unreachable!(),
    };
    let step = (3.0 - 0.2) / 8.0;
    let transitions: Vec<f64> = report
        .deviations
        .iter()
        .filter(|d| matches!((d.point.from, d.point.to), (Case::I, Case::II) | (Case::II, Case::I) | (Case::III, Case::IV) | (Case::IV, Case::III)))
        .map(|d| d.deviation)
        .collect();
    let unknown = map.cases.iter().flatten().filter(|pc| pc.case == Case::Unknown).count();
    let worst = transitions.iter().cloned().fold(0.0, f64::max);
    let cs = vec![
        Check { name: "I<->II and III<->IV boundary cells".into(), measured: transitions.len() as f64, rule: "> 0".into(), pass: !transitions.is_empty(), note: String::new() },
        Check::below("worst tau deviation / tau step", worst / step, 1.5),
        Check::below("unconverged points", unknown as f64, 0.5),
    ];
    Outcome::from_checks(&cs, Some((took, Duration::from_secs(1800))))
}

fn criterion_11() -> Outcome {
    let cfg = RunConfig::default();
    let (cs, took) = timed(|| {
        let mut cs = Vec::new();
        match classify_point(&cfg.params, &cfg.equilibrium) {
            Err(e) => cs.push(Check::failed("equilibrium at (0, 1)", &e)),
            Ok((_, sol)) => {
                if let Err(e) = checks::finite_n_checks(&cfg, &sol, &mut cs) {
                    cs.push(Check::failed("finite-n", &e));
                }
            }
        }
        cs
    });
    Outcome::from_checks(&cs, Some((took, Duration::from_secs(600))))
}

fn read_dir_bytes(dir: &Path) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)?
        .map(|e| {
            let e = e?;
            Ok((e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path())?))
        })
        .collect::<std::io::Result<_>>()?;
    files.sort();
    Ok(files)
}

fn criterion_12() -> Outcome {
    let run = || -> Result<Vec<(String, Vec<u8>)>, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let cfg = RunConfig { out: dir.path().to_path_buf(), ..RunConfig::default() };
        veq::cli::cmd_solve(&cfg).map_err(|e| e.to_string())?;
        read_dir_bytes(dir.path()).map_err(|e| e.to_string())
    };
    match (run(), run()) {
        (Ok(a), Ok(b)) => {
            let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
            let same = a.len() == b.len() && differing.is_empty();
            Outcome {
                pass: same,
                detail: if same { format!("{} files byte-identical", a.len()) } else { format!("differ: {differing:?}") },
            }
        }
        (Err(e), _) | (_, Err(e)) => Outcome { pass: false, detail: e },
    }
}

fn main() {
    let tau = 1.0;
    let p0 = ModelParams::gaussian(0.0, tau).unwrap();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    let (c, took) = timed(|| vec![checks::sigma2_closed_form(tau)]);
    results.push((1, "sigma2 closed form at alpha = 0", Outcome::from_checks(&c, Some((took, Duration::from_secs(1))))));

    let (c, took) = timed(|| collect(checks::theta_sum(tau), "theta sum"));
    results.push((2, "theta-sum identity", Outcome::from_checks(&c, Some((took, Duration::from_secs(1))))));

    let (c, took) = timed(|| collect(checks::special_integrals(tau), "special integrals"));
    results.push((3, "special sigma2 integrals", Outcome::from_checks(&c, Some((took, Duration::from_secs(10))))));

    // the expansions are exact at alpha = 0, so the error slopes are taken at alpha = -1, 1
    let mut c = Vec::new();
    for a in [-1.0, 1.0] {
        match checks::expansion_slopes(&ModelParams::gaussian(a, tau).unwrap()) {
            Ok((s, t)) => {
                c.push(Check::below(&format!("alpha = {a}: s_j slope deviation from -7/3"), s, 0.1));
                c.push(Check::below(&format!("alpha = {a}: theta_j slope deviation from -4/3"), t, 0.1));
            }
            Err(e) => c.push(Check::failed("expansion slopes", &e)),
        }
    }
    results.push((4, "asymptotic expansion slopes", Outcome::from_checks(&c, None)));

    let points = solve_points();
    results.push((5, "equilibrium certification at four phase points", criterion_5(&points)));
    results.push((6, "phase boundaries on the 9x9 scan", criterion_6()));
    results.push((7, "edge exponents", per_point(&points, checks::equilibrium_checks, |n| n.starts_with("edge exponent"))));
    results.push((8, "tail law", per_point(&points, checks::spectral_checks, |n| n.contains("tail"))));
    results.push((9, "spectral constants and curve", per_point(&points, checks::spectral_checks, |n| n.starts_with("e_") || n.contains("curve") || n.starts_with("p_3"))));

    let (c, took) = timed(|| collect(checks::pearcey_ode(&p0), "Pearcey ODE"));
    results.push((10, "Pearcey ODE", Outcome::from_checks(&c, Some((took, Duration::from_secs(30))))));

    results.push((11, "finite-n kernel", criterion_11()));
    results.push((12, "determinism of solve", criterion_12()));

    results.sort_by_key(|r| r.0);
    println!();
    for (k, name, o) in &results {
        println!("criterion {k:2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("\n{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
