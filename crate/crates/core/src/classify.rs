//! Phase classification from the behavior of the supports at the origin, singularity
//! detection and phase-diagram scans.

use crate::equilibrium::{extract_supports, fit_edge_exponent, solve_equilibrium, Edge, EquilibriumConfig, EquilibriumSolution, SupportSet};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt;

/// Density threshold (relative to the maximum) below which a density is considered to vanish.
pub const SING_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    I,
    II,
    III,
    IV,
    V,
    /// Two or three supports meet at the origin.
    Singular,
    /// The solve failed.
    Unknown,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
            Case::IV => "IV",
            Case::V => "V",
            Case::Singular => "singular",
            Case::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    SingularSupportsI,
    SingularSupportsII,
    SingularSupportsIII,
    SingularInteriorMu1,
    SingularEndpointMu1,
    SingularExteriorMu1,
    SingularInteriorSigma2MinusMu2,
    SingularInteriorMu3,
    NearBoundary,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseCase {
    pub case: Case,
    pub flags: BTreeSet<Flag>,
}

impl PhaseCase {
    pub fn unknown() -> Self {
        PhaseCase { case: Case::Unknown, flags: BTreeSet::new() }
    }

    pub fn flags_string(&self) -> String {
        self.flags.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("|")
    }
}

/// Membership of the origin in a support with hysteresis: gaps of at most one cell count as
/// membership, two-cell gaps are undecided.
fn member(gap_cells: usize) -> (bool, bool) {
    (gap_cells <= 1, gap_cells == 2)
}

/// Case from the truth table on `(0 in S(mu1), 0 in S(sigma_2 - mu2), 0 in S(mu3))`.
pub fn case_from_memberships(m1: bool, m2: bool, m3: bool) -> (Case, Option<Flag>) {
    match (m1, m2, m3) {
        (true, false, true) => (Case::I, None),
        (false, false, true) => (Case::II, None),
        (false, true, false) => (Case::III, None),
        (true, false, false) => (Case::IV, None),
        (false, false, false) => (Case::V, None),
        (true, true, false) => (Case::Singular, Some(Flag::SingularSupportsI)),
        (false, true, true) => (Case::Singular, Some(Flag::SingularSupportsII)),
        (true, true, true) => (Case::Singular, Some(Flag::SingularSupportsIII)),
    }
}

pub fn classify_case(sup: &SupportSet) -> PhaseCase {
    let [g1, g2, g3] = sup.origin_gap_cells;
    let (m1, n1) = member(g1);
    let (m2, n2) = member(g2);
    let (m3, n3) = member(g3);
    let (case, flag) = case_from_memberships(m1, m2, m3);
    let mut flags: BTreeSet<Flag> = flag.into_iter().collect();
    if n1 || n2 || n3 {
        flags.insert(Flag::NearBoundary);
    }
    PhaseCase { case, flags }
}

fn local_minima_below(d: &[f64], range: std::ops::RangeInclusive<usize>, level: f64, mirrored_start: bool) -> bool {
    let (a, b) = (*range.start(), *range.end());
    (a..=b).any(|i| {
        let left = if i == a { if mirrored_start { Some(d[i]) } else { None } } else { Some(d[i - 1]) };
        let right = if i == b { None } else { Some(d[i + 1]) };
        matches!((left, right), (Some(l), Some(r)) if d[i] <= l && d[i] <= r && d[i] < level)
    })
}

/// Singular behavior visible in a solution: vanishing interior densities, endpoints that
/// are not square-root, off-support points where the `mu1` inequality becomes an equality,
/// and supports meeting at the origin.
pub fn detect_singularities(sol: &EquilibriumSolution, sup: &SupportSet) -> BTreeSet<Flag> {
    let mut flags = classify_case(sup).flags;
    let g = &sol.grids;
    let at_origin = g.edges[0][0] == 0.0;

    // mu1 interior
    let d1 = sol.density_half(0);
    let dmax = d1.iter().cloned().fold(0.0, f64::max);
    let thr = sol.config.solver.support_threshold;
    let mask: Vec<bool> = d1.iter().map(|&d| d > thr * dmax).collect();
    let mut clusters = Vec::new();
    let mut i = 0;
    while i < mask.len() {
        if mask[i] {
            let s = i;
            while i + 1 < mask.len() && mask[i + 1] {
                i += 1;
            }
            clusters.push((s, i));
        }
        i += 1;
    }
    for &(s, e) in &clusters {
        if e > s + 2 && local_minima_below(&d1, s..=e, SING_TOL * dmax, s == 0 && at_origin) {
            flags.insert(Flag::SingularInteriorMu1);
        }
    }

    // mu1 endpoints
    for k in 0..sup.intervals.len() {
        let (a, b) = sup.intervals[k];
        for (edge, x) in [(Edge::Left(k), a), (Edge::Right(k), b)] {
            if x <= 0.0 {
                continue;
            }
            if let Ok(f) = fit_edge_exponent(sol, edge) {
                if (f.exponent - 0.5).abs() > 0.2 {
                    flags.insert(Flag::SingularEndpointMu1);
                }
            }
        }
    }

    // mu1 exterior: isolated near-zero minima of the slack, away from the support
    let [g1, _, _] = g.el_functionals(&sol.half_weights);
    let ell1 = sol.el_report.ell1;
    let tol = sol.config.solver.el_tol * sol.el_report.scale;
    let near_support = |i: usize| clusters.iter().any(|&(s, e)| i + 3 >= s && i <= e + 3);
    for i in 0..g1.len() {
        if mask[i] || near_support(i) {
            continue;
        }
        let v = g1[i] - ell1;
        let l = if i == 0 { if at_origin { v } else { f64::INFINITY } } else { g1[i - 1] - ell1 };
        let r = if i + 1 < g1.len() { g1[i + 1] - ell1 } else { f64::INFINITY };
        if v < tol && v <= l && v <= r {
            flags.insert(Flag::SingularExteriorMu1);
        }
    }

    // sigma_2 - mu2 and mu3 at the origin
    if sup.origin_gap_cells[1] == 0 {
        let rho2 = sol.rho2_half();
        let core = g.specs[1].core_end;
        let mids = g.mids(1);
        let m = rho2.iter().zip(&mids).filter(|(_, x)| **x <= core).map(|(r, _)| *r).fold(0.0, f64::max);
        if rho2[0] < SING_TOL * m {
            flags.insert(Flag::SingularInteriorSigma2MinusMu2);
        }
    }
    if sup.origin_gap_cells[2] == 0 {
        let d3 = sol.density_half(2);
        let core = g.specs[2].core_end;
        let mids = g.mids(2);
        let m = d3.iter().zip(&mids).filter(|(_, x)| **x <= core).map(|(r, _)| *r).fold(0.0, f64::max);
        if d3[0] < SING_TOL * m {
            flags.insert(Flag::SingularInteriorMu3);
        }
    }
    flags
}

/// Solve and classify one parameter point.
pub fn classify_point(p: &ModelParams, cfg: &EquilibriumConfig) -> Result<(PhaseCase, EquilibriumSolution)> {
    let sol = solve_equilibrium(p, cfg)?;
    let sup = extract_supports(&sol)?;
    let mut pc = classify_case(&sup);
    pc.flags = detect_singularities(&sol, &sup);
    Ok((pc, sol))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub alpha: f64,
    pub tau: f64,
    pub from: Case,
    pub to: Case,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMap {
    pub alpha_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// `cases[i][j]` belongs to `(alpha_grid[i], tau_grid[j])`.
    pub cases: Vec<Vec<PhaseCase>>,
    pub boundary_points: Vec<BoundaryPoint>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn regular(c: Case) -> bool {
    !matches!(c, Case::Unknown | Case::Singular)
}

/// Midpoints of neighboring grid cells (in either direction) with different regular cases.
pub fn boundary_points(alpha: &[f64], tau: &[f64], cases: &[Vec<PhaseCase>]) -> Vec<BoundaryPoint> {
    let mut out = Vec::new();
    for i in 0..alpha.len() {
        for j in 0..tau.len() {
            let c = cases[i][j].case;
            if !regular(c) {
                continue;
            }
            if j + 1 < tau.len() {
                let d = cases[i][j + 1].case;
                if regular(d) && d != c {
                    out.push(BoundaryPoint { alpha: alpha[i], tau: 0.5 * (tau[j] + tau[j + 1]), from: c, to: d });
                }
            }
            if i + 1 < alpha.len() {
                let d = cases[i + 1][j].case;
                if regular(d) && d != c {
                    out.push(BoundaryPoint { alpha: 0.5 * (alpha[i] + alpha[i + 1]), tau: tau[j], from: c, to: d });
                }
            }
        }
    }
    out
}

/// Solve and classify on a `steps x steps` grid. Points are distributed over `workers`
/// threads; each solve is deterministic, so the map does not depend on the thread count.
/// A failed point is retried once with doubled iteration caps, then reported as `Unknown`.
pub fn phase_scan(
    alpha_range: (f64, f64),
    tau_range: (f64, f64),
    steps: usize,
    template: &ModelParams,
    cfg: &EquilibriumConfig,
    workers: usize,
) -> Result<PhaseMap> {
    if steps == 0 || tau_range.0 <= 0.0 {
        return Err(Error::Config("phase scan needs steps >= 1 and tau > 0".into()));
    }
    let alpha_grid = linspace(alpha_range.0, alpha_range.1, steps);
    let tau_grid = linspace(tau_range.0, tau_range.1, steps);
    let points: Vec<(usize, usize)> = (0..steps).flat_map(|i| (0..steps).map(move |j| (i, j))).collect();
    let run = |&(i, j): &(usize, usize)| -> PhaseCase {
        let p = match template.with_alpha_tau(alpha_grid[i], tau_grid[j]) {
            Ok(p) => p,
            Err(_) => return PhaseCase::unknown(),
        };
        match classify_point(&p, cfg) {
            Ok((pc, _)) => pc,
            Err(_) => {
                let mut retry = cfg.clone();
                retry.solver.max_iter *= 2;
                retry.solver.max_outer *= 2;
                classify_point(&p, &retry).map(|r| r.0).unwrap_or_else(|_| PhaseCase::unknown())
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let flat: Vec<PhaseCase> = pool.install(|| points.par_iter().map(run).collect());
    let cases: Vec<Vec<PhaseCase>> = flat.chunks(steps).map(|c| c.to_vec()).collect();
    let boundary_points = boundary_points(&alpha_grid, &tau_grid, &cases);
    Ok(PhaseMap { alpha_grid, tau_grid, cases, boundary_points })
}

/// The two transition curves of the quadratic-potential phase diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curve {
    /// `tau = sqrt(alpha + 2)`
    Painleve,
    /// `tau = sqrt(-1/alpha)`
    Pearcey,
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Curve::Painleve => "sqrt(alpha+2)",
            Curve::Pearcey => "sqrt(-1/alpha)",
        })
    }
}

pub fn curve_tau(c: Curve, alpha: f64) -> Option<f64> {
    match c {
        Curve::Painleve if alpha >= -2.0 => Some((alpha + 2.0).sqrt()),
        Curve::Pearcey if alpha < 0.0 => Some((-1.0 / alpha).sqrt()),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDeviation {
    pub point: BoundaryPoint,
    pub nearest: Curve,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryReport {
    pub deviations: Vec<BoundaryDeviation>,
    pub max: f64,
    pub mean: f64,
}

/// Distance in `tau` from each boundary point to the nearer transition curve.
pub fn compare_phase_boundaries(map: &PhaseMap) -> Result<BoundaryReport> {
    if map.boundary_points.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let deviations: Vec<BoundaryDeviation> = map
        .boundary_points
        .iter()
        .map(|bp| {
            let best = [Curve::Painleve, Curve::Pearcey]
                .into_iter()
                .filter_map(|c| curve_tau(c, bp.alpha).map(|t| (c, (bp.tau - t).abs())))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((Curve::Painleve, f64::INFINITY));
            BoundaryDeviation { point: bp.clone(), nearest: best.0, deviation: best.1 }
        })
        .collect();
    let max = deviations.iter().map(|d| d.deviation).fold(0.0, f64::max);
    let mean = deviations.iter().map(|d| d.deviation).sum::<f64>() / deviations.len() as f64;
    Ok(BoundaryReport { deviations, max, mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sup(gaps: [usize; 3]) -> SupportSet {
        SupportSet {
            intervals: vec![(-1.0, 1.0)],
            c2: 0.0,
            c3: 0.0,
            partial_masses: vec![1.0, 0.0],
            origin_gap_cells: gaps,
            near_singular: false,
        }
    }

    #[test]
    fn truth_table() {
        assert_eq!(classify_case(&sup([0, 10, 0])).case, Case::I);
        assert_eq!(classify_case(&sup([10, 10, 0])).case, Case::II);
        assert_eq!(classify_case(&sup([10, 0, 10])).case, Case::III);
        assert_eq!(classify_case(&sup([0, 10, 10])).case, Case::IV);
        assert_eq!(classify_case(&sup([10, 10, 10])).case, Case::V);
        let s = classify_case(&sup([0, 0, 10]));
        assert_eq!(s.case, Case::Singular);
        assert!(s.flags.contains(&Flag::SingularSupportsI));
        assert!(classify_case(&sup([0, 2, 0])).flags.contains(&Flag::NearBoundary));
        assert_eq!(classify_case(&sup([1, 10, 0])).case, Case::I);
    }

    #[test]
    fn multicritical_point_lies_on_both_curves() {
        assert_eq!(curve_tau(Curve::Painleve, -1.0), Some(1.0));
        assert_eq!(curve_tau(Curve::Pearcey, -1.0), Some(1.0));
        let bp = BoundaryPoint { alpha: -1.0, tau: 1.0, from: Case::I, to: Case::IV };
        let map = PhaseMap { alpha_grid: vec![], tau_grid: vec![], cases: vec![], boundary_points: vec![bp] };
        assert_eq!(compare_phase_boundaries(&map).unwrap().max, 0.0);
        let empty = PhaseMap { boundary_points: vec![], ..map };
        assert_eq!(compare_phase_boundaries(&empty), Err(Error::EmptyBoundary));
    }
}
