//! The hard checks run by `veq verify`, each reported with its measured value and tolerance.

use crate::classify::classify_point;
use crate::equilibrium::{extract_supports, fit_edge_exponent, Edge, EquilibriumSolution};
use crate::error::{Error, Result};
use crate::finite_n::{compare_density, zero_report, BiorthogonalSystem};
use crate::params::ModelParams;
use crate::pearcey::ode_residual;
use crate::saddle::{cubic_roots, saddle_triple, s_expansion, sigma2_density, sigma2_integral_checks, theta, theta_at, theta_expansion};
use crate::spectral::{ExpansionConstants, SpectralData};
use crate::C64;
use std::f64::consts::PI;
use std::path::Path;

use super::config::RunConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable acceptance rule, e.g. `< 1e-10`.
    pub rule: String,
    pub pass: bool,
    pub note: String,
}

impl Check {
    pub fn below(name: &str, measured: f64, tol: f64) -> Self {
        Check { name: name.into(), measured, rule: format!("< {tol:e}"), pass: measured < tol, note: String::new() }
    }

    pub fn within(name: &str, measured: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            rule: format!("{target:.6} +- {tol}"),
            pass: (measured - target).abs() <= tol,
            note: String::new(),
        }
    }

    pub fn failed(name: &str, e: &Error) -> Self {
        Check { name: name.into(), measured: f64::NAN, rule: "no error".into(), pass: false, note: e.to_string() }
    }
}

/// Weyl sequence in `[0, 1)`: deterministic sample points without an RNG.
pub fn weyl(k: usize) -> f64 {
    const PHI: f64 = 0.618_033_988_749_894_8;
    (k as f64 * PHI).fract()
}

pub fn sigma2_closed_form(tau: f64) -> Check {
    let p = ModelParams::gaussian(0.0, tau).unwrap();
    let c = 3f64.sqrt() / (2.0 * PI) * tau.powf(4.0 / 3.0);
    let worst = (0..100)
        .map(|k| {
            let y = 0.01 + 20.0 * weyl(k + 1);
            let expect = c * y.powf(1.0 / 3.0);
            (sigma2_density(y, &p) - expect).abs() / expect
        })
        .fold(0.0, f64::max);
    Check::below("sigma2 closed form at alpha = 0 (relative)", worst, 1e-8)
}

pub fn theta_sum(tau: f64) -> Result<Check> {
    let mut worst = 0.0f64;
    for (ai, &a) in [-2.0, -1.0, -0.5, 0.0, 1.0, 3.0].iter().enumerate() {
        let p = ModelParams::gaussian(a, tau)?;
        for k in 0..167 {
            let x = 20.0 * (weyl(1000 * ai + k + 1) - 0.5);
            let sum: C64 = cubic_roots(C64::new(x, 0.0), &p)
                .iter().map(|&s| theta_at(s, C64::new(x, 0.0), &p)).sum();
            worst = worst.max((sum - a * a / 2.0).norm());
        }
    }
    Ok(Check::below("theta_1 + theta_2 + theta_3 - alpha^2/2", worst, 1e-10))
}

pub fn special_integrals(tau: f64) -> Result<Check> {
    let mut worst = 0.0f64;
    for a in [-1.0, 0.0, 1.0] {
        let p = ModelParams::gaussian(a, tau)?;
        for x in [0.5, 1.0, 2.0, 5.0] {
            let (r1, r2) = sigma2_integral_checks(x, &p)?;
            worst = worst.max(r1).max(r2);
        }
    }
    Ok(Check::below("sigma2 special integrals", worst, 1e-6))
}

/// Least-squares slope of `log err` against `log |z|`.
pub fn loglog_slope(r: &[f64], e: &[f64]) -> f64 {
    let n = r.len() as f64;
    let lx: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Worst deviation of the `s_j` and `theta_j` expansion-error slopes from `-7/3`, `-4/3`
/// over the four quadrants.
pub fn expansion_slopes(p: &ModelParams) -> Result<(f64, f64)> {
    let radii = [1e2, 1e3, 1e4];
    let (mut ws, mut wt) = (0.0f64, 0.0f64);
    for q in 0..4 {
        let arg = PI / 4.0 + 0.1 + q as f64 * PI / 2.0;
        for j in 1..=3 {
            let mut es = Vec::new();
            let mut et = Vec::new();
            for &r in &radii {
                let z = C64::from_polar(r, arg);
                let t = saddle_triple(z, p)?;
                let k = t.quadrant.sheet_powers()[j - 1];
                es.push((t.s[j - 1] - s_expansion(k, z, p)).norm());
                et.push((theta(j, z, p)? - theta_expansion(k, z, p)).norm());
            }
            ws = ws.max((loglog_slope(&radii, &es) + 7.0 / 3.0).abs());
            wt = wt.max((loglog_slope(&radii, &et) + 4.0 / 3.0).abs());
        }
    }
    Ok((ws, wt))
}

pub fn pearcey_ode(p: &ModelParams) -> Result<Check> {
    let mut worst = 0.0f64;
    for n in [3, 6, 12] {
        for k in 0..20 {
            let z = C64::from_polar(5.0 * weyl(2 * k + 1).sqrt(), 2.0 * PI * weyl(2 * k + 2));
            for j in 0..6 {
                let (res, scale) = ode_residual(j, n, z, p)?;
                worst = worst.max(res / scale);
            }
        }
    }
    Ok(Check::below("Pearcey ODE residual / scale", worst, 1e-8))
}

/// Masses, bounds and mirror symmetry of the measure CSVs written by `veq solve`.
pub fn measure_csvs(dir: &Path) -> Vec<Check> {
    let mut out = Vec::new();
    for (k, target) in [(1, 1.0), (2, 2.0 / 3.0), (3, 1.0 / 3.0)] {
        let name = format!("mu{k}.csv");
        let path = dir.join(&name);
        let parsed = std::fs::read_to_string(&path).map_err(Error::from).and_then(|t| parse_measure(&t));
        match parsed {
            Err(e) => out.push(Check::failed(&format!("{name} readable"), &e)),
            Ok(rows) => {
                let mass: f64 = rows.iter().map(|r| r.1).sum();
                out.push(Check::within(&format!("{name} mass"), mass, target, 1e-8));
                let neg = rows.iter().map(|r| -r.1).fold(0.0, f64::max);
                let over = rows.iter().filter_map(|r| r.2.map(|c| r.1 - c)).fold(0.0, f64::max);
                out.push(Check::below(&format!("{name} bound violation"), neg.max(over), 1e-12));
                let n = rows.len();
                let asym = (0..n).map(|i| (rows[i].1 - rows[n - 1 - i].1).abs() + (rows[i].0 + rows[n - 1 - i].0).abs()).fold(0.0, f64::max);
                out.push(Check::below(&format!("{name} mirror symmetry"), asym, 1e-8));
            }
        }
    }
    out
}

/// Rows `(node, weight, cap weight)` of a measure CSV.
fn parse_measure(text: &str) -> Result<Vec<(f64, f64, Option<f64>)>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Io("empty file".into()))?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (node, weight) = (col("node").ok_or_else(|| Error::Io("no node column".into()))?, col("weight").ok_or_else(|| Error::Io("no weight column".into()))?);
    let cap = col("sigma2_weight");
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let f: Vec<&str> = l.split(',').collect();
        let get = |c: usize| -> Result<f64> {
            f.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Io(format!("row {}: bad value in column {c}", i + 2)))
        };
        rows.push((get(node)?, get(weight)?, cap.map(get).transpose()?));
    }
    if rows.is_empty() {
        return Err(Error::Io("no rows".into()));
    }
    Ok(rows)
}

pub fn equilibrium_checks(sol: &EquilibriumSolution, out: &mut Vec<Check>) -> Result<()> {
    let r = &sol.el_report;
    let tol = sol.config.solver.el_tol;
    out.push(Check::below("EL equality residual / field scale", r.res_eq1.max(r.res_eq2).max(r.res_eq3) / r.scale, tol));
    let slack = r.slack_min1.min(r.slack_min2).min(r.slack_min3);
    out.push(Check { name: "EL inequality slack".into(), measured: slack, rule: format!(">= -{:e}", sol.config.solver.slack_tol), pass: slack >= -sol.config.solver.slack_tol, note: String::new() });
    let masses = [sol.mu1.mass() - 1.0, sol.mu2.mass() - 2.0 / 3.0, sol.mu3.mass() - 1.0 / 3.0];
    out.push(Check::below("mass defect", masses.iter().map(|m| m.abs()).fold(0.0, f64::max), 1e-10));
    let over = sol.mu2.weights.iter().zip(&sol.cap.weights).map(|(m, c)| (m - c).max(-m)).fold(0.0, f64::max);
    out.push(Check::below("0 <= mu2 <= sigma2 violation", over, 1e-12));
    let sup = extract_supports(sol)?;
    let last = sup.intervals.len() - 1;
    let b = fit_edge_exponent(sol, Edge::Right(last))?;
    out.push(Check::within("edge exponent at b_N", b.exponent, 0.5, 0.05));
    for (edge, c, name) in [(Edge::C2, sup.c2, "edge exponent at c2"), (Edge::C3, sup.c3, "edge exponent at c3")] {
        if c > 0.0 {
            out.push(Check::within(name, fit_edge_exponent(sol, edge)?.exponent, 0.5, 0.1));
        }
    }
    Ok(())
}

pub fn spectral_checks(sol: &EquilibriumSolution, out: &mut Vec<Check>) -> Result<()> {
    let p = &sol.params;
    let sd = SpectralData::new(sol);
    let k = sd.fit_expansion_constants()?;
    let (em1, e1, _) = ExpansionConstants::expected(p);
    out.push(Check::below("e_-1 relative error", (k.e_m1 / em1 - 1.0).abs(), 1e-2));
    out.push(Check::below("e_3 relative error", (k.e3 * 3.0 - 1.0).abs(), 1e-2));
    let e1_err = if e1 == 0.0 { k.e1.abs() } else { (k.e1 / e1 - 1.0).abs() };
    out.push(Check::below("e_1 error (relative, absolute at alpha = 0)", e1_err, 2e-2));
    for which in [2, 3] {
        let t = sd.tail_fit(which)?;
        out.push(Check::within(&format!("mu{which} tail exponent"), t.slope, -5.0 / 3.0, 0.05));
    }
    out.push(Check { name: "tail constant C".into(), measured: k.c, rule: "> 0".into(), pass: k.c > 0.0, note: String::new() });
    let sup = extract_supports(sol)?;
    let r = sup.intervals.last().unwrap().1.max(1.0);
    let fit = sd.fit_spectral_curve(&SpectralData::curve_samples(r))?;
    out.push(Check::below("spectral curve residual", fit.residual, 1e-2));
    out.push(Check::below("p_3 + V' coefficient error", fit.p3_error, 1e-3));
    Ok(())
}

pub fn finite_n_checks(cfg: &RunConfig, sol: &EquilibriumSolution, out: &mut Vec<Check>) -> Result<()> {
    let mut l1 = Vec::new();
    for &n in &cfg.density_n {
        let sys = BiorthogonalSystem::new(n, &cfg.params)?;
        let c = compare_density(&sys, sol)?;
        out.push(Check::within(&format!("n = {n}: int (1/n) K11(x, x) dx"), c.mass, 1.0, 1e-4));
        let z = zero_report(&sys)?;
        out.push(Check {
            name: format!("n = {n}: zeros real, simple, interlacing"),
            measured: z.max_imag,
            rule: "real, simple, interlaced".into(),
            pass: z.ok(),
            note: String::new(),
        });
        l1.push(c.l1);
    }
    if l1.len() >= 2 {
        let (first, last) = (l1[0], *l1.last().unwrap());
        out.push(Check {
            name: "L1 distance to rho_1 decreases over n".into(),
            measured: last - first,
            rule: "< 0".into(),
            pass: last < first,
            note: format!("{l1:?}"),
        });
    }
    if cfg.density_n.contains(&9) {
        let i = cfg.density_n.iter().position(|&n| n == 9).unwrap();
        out.push(Check::below("L1 distance at n = 9", l1[i], 0.1));
    }
    Ok(())
}

/// All hard checks. Module errors become failed checks.
pub fn run_all(cfg: &RunConfig) -> Vec<Check> {
    let tau = cfg.params.tau;
    let mut out = vec![sigma2_closed_form(tau)];
    let push = |out: &mut Vec<Check>, name: &str, r: Result<Check>| out.push(r.unwrap_or_else(|e| Check::failed(name, &e)));
    push(&mut out, "theta sum", theta_sum(tau));
    push(&mut out, "special integrals", special_integrals(tau));
    // the expansions are exact at alpha = 0, so the slopes are measured away from it
    let slopes = [-1.0, 1.0].iter().try_fold((0.0f64, 0.0f64), |acc, &a| {
        let (s, t) = expansion_slopes(&cfg.params.with_alpha_tau(a, tau)?)?;
        Ok::<_, Error>((acc.0.max(s), acc.1.max(t)))
    });
    match slopes {
        Ok((s, t)) => {
            out.push(Check::below("s_j expansion slope deviation from -7/3", s, 0.1));
            out.push(Check::below("theta_j expansion slope deviation from -4/3", t, 0.1));
        }
        Err(e) => out.push(Check::failed("expansion slopes", &e)),
    }
    push(&mut out, "Pearcey ODE", pearcey_ode(&cfg.params));
    match classify_point(&cfg.params, &cfg.equilibrium) {
        Err(e) => out.push(Check::failed("equilibrium solve", &e)),
        Ok((pc, sol)) => {
            out.push(Check {
                name: "case".into(),
                measured: f64::NAN,
                rule: "regular case".into(),
                pass: !matches!(pc.case, crate::classify::Case::Unknown | crate::classify::Case::Singular),
                note: format!("{} {}", pc.case, pc.flags_string()),
            });
            if let Err(e) = equilibrium_checks(&sol, &mut out) {
                out.push(Check::failed("equilibrium checks", &e));
            }
            if let Err(e) = spectral_checks(&sol, &mut out) {
                out.push(Check::failed("spectral checks", &e));
            }
            if let Err(e) = finite_n_checks(cfg, &sol, &mut out) {
                out.push(Check::failed("finite-n checks", &e));
            }
        }
    }
    if cfg.out.join("mu1.csv").exists() {
        out.extend(measure_csvs(&cfg.out));
    }
    out
}
