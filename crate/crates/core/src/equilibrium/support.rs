//! Euler-Lagrange certification, support extraction and edge-exponent fits.

use super::{linear_fit, EquilibriumSolution};
use crate::equilibrium::kernel::{cell_potential_cross, cell_potential_same};
use crate::error::{Error, Result};
use crate::saddle::field_v1;

const WINDOW_SAMPLES: usize = 100;

/// Residuals of the three variational conditions. Equality residuals are absolute; compare
/// them against `el_tol * scale`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ELReport {
    pub res_eq1: f64,
    pub res_eq2: f64,
    pub res_eq3: f64,
    pub slack_min1: f64,
    pub slack_min2: f64,
    pub slack_min3: f64,
    pub ell1: f64,
    /// Median of `2U2 - U1 - U3` on the free set; zero in the continuum problem, here a
    /// measure of the truncation of the tails.
    pub lambda2: f64,
    /// Median of `2U3 - U2 + V3` on the support of `mu3`.
    pub lambda3: f64,
    /// Field scale: `max(1, |V1| on supp mu1, |V3|)`.
    pub scale: f64,
}

fn weighted_median(vals: &[(f64, f64)]) -> f64 {
    if vals.is_empty() {
        return f64::NAN;
    }
    let mut v = vals.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = v.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(x, w) in &v {
        acc += w;
        if acc >= 0.5 * total {
            return x;
        }
    }
    v.last().unwrap().0
}

fn support_mask(dens: &[f64], reference: f64, thr: f64) -> Vec<bool> {
    dens.iter().map(|&d| d > thr * reference).collect()
}

fn core_max(sol: &EquilibriumSolution, k: usize, dens: &[f64]) -> f64 {
    let end = sol.grids.specs[k].core_end;
    sol.grids.mids(k).iter().zip(dens).filter(|(m, _)| **m <= end).map(|(_, d)| *d).fold(0.0, f64::max)
}

fn free_mask(sol: &EquilibriumSolution) -> Vec<bool> {
    let tol = sol.config.solver.active_tol;
    sol.grids.cap.iter().zip(&sol.half_weights[1]).map(|(&c, &w)| c > 0.0 && c - w > tol * c).collect()
}

/// `2U1(x) - U2(x) + V1(x)` at a real point, from exact cell integrals.
fn g1_at(sol: &EquilibriumSolution, x: f64) -> f64 {
    let g = &sol.grids;
    let mut u1 = 0.0;
    for (i, e) in g.edges[0].windows(2).enumerate() {
        let d = sol.half_weights[0][i] / (e[1] - e[0]);
        u1 += d * (cell_potential_same(e[0], e[1], x) + cell_potential_same(-e[1], -e[0], x));
    }
    let mut u2 = 0.0;
    for (i, e) in g.edges[1].windows(2).enumerate() {
        let d = sol.half_weights[1][i] / (e[1] - e[0]);
        u2 += 2.0 * d * cell_potential_cross(e[0], e[1], x);
    }
    2.0 * u1 - u2 + field_v1(x, &sol.params)
}

/// Check the variational conditions on the solved grids. Equalities are tested on the
/// detected supports (for `mu2`: on the free set `mu2 < sigma_2`), inequalities elsewhere;
/// the `mu1` inequality is also sampled on the part of `[0, X1]` outside the `mu1` mesh.
pub fn el_residuals(sol: &EquilibriumSolution) -> ELReport {
    let g = &sol.grids;
    let thr = sol.config.solver.support_threshold;
    let [g1, g2, g3] = g.el_functionals(&sol.half_weights);

    let d1 = sol.density_half(0);
    let s1 = support_mask(&d1, core_max(sol, 0, &d1), thr);
    let on1: Vec<(f64, f64)> = (0..g1.len()).filter(|&i| s1[i]).map(|i| (g1[i], sol.half_weights[0][i])).collect();
    let ell1 = weighted_median(&on1);
    let res_eq1 = on1.iter().map(|(v, _)| (v - ell1).abs()).fold(0.0, f64::max);
    let mut slack_min1 = (0..g1.len()).filter(|&i| !s1[i]).map(|i| g1[i] - ell1).fold(f64::INFINITY, f64::min);
    let (lo, hi) = (g.edges[0][0], *g.edges[0].last().unwrap());
    let mut outside = Vec::new();
    if lo > 0.0 {
        outside.extend((0..WINDOW_SAMPLES).map(|k| lo * (k as f64 + 0.5) / WINDOW_SAMPLES as f64));
    }
    if hi < g.x1 {
        outside.extend((1..=WINDOW_SAMPLES).map(|k| hi + (g.x1 - hi) * k as f64 / WINDOW_SAMPLES as f64));
    }
    for x in outside {
        slack_min1 = slack_min1.min(g1_at(sol, x) - ell1);
    }

    let free = free_mask(sol);
    let on2: Vec<(f64, f64)> = (0..g2.len()).filter(|&i| free[i]).map(|i| (g2[i], 1.0)).collect();
    let res_eq2 = on2.iter().map(|(v, _)| v.abs()).fold(0.0, f64::max);
    let slack_min2 = (0..g2.len()).filter(|&i| !free[i]).map(|i| -g2[i]).fold(f64::INFINITY, f64::min);

    let d3 = sol.density_half(2);
    let s3 = support_mask(&d3, core_max(sol, 2, &d3), thr);
    let on3: Vec<(f64, f64)> = (0..g3.len()).filter(|&i| s3[i]).map(|i| (g3[i], 1.0)).collect();
    let res_eq3 = on3.iter().map(|(v, _)| v.abs()).fold(0.0, f64::max);
    let slack_min3 = (0..g3.len()).filter(|&i| !s3[i]).map(|i| g3[i]).fold(f64::INFINITY, f64::min);

    let scale = (0..g1.len())
        .filter(|&i| s1[i])
        .map(|i| g.field1[i].abs())
        .chain(g.field3.iter().map(|v| v.abs()))
        .fold(1.0, f64::max);
    ELReport {
        res_eq1,
        res_eq2,
        res_eq3,
        slack_min1,
        slack_min2,
        slack_min3,
        ell1,
        lambda2: weighted_median(&on2),
        lambda3: weighted_median(&on3),
        scale,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportSet {
    /// `S(mu1)` as disjoint increasing intervals.
    pub intervals: Vec<(f64, f64)>,
    pub c2: f64,
    pub c3: f64,
    /// `alpha_k = mu1([a_{k+1}, inf))`, `k = 0..=N`.
    pub partial_masses: Vec<f64>,
    /// Cells between the origin and the support of `mu1`, `sigma_2 - mu2`, `mu3` on the
    /// positive half-line (`usize::MAX` when the `mu1` mesh does not reach the origin).
    pub origin_gap_cells: [usize; 3],
    /// Some origin gap is one or two cells wide: the point may be singular.
    pub near_singular: bool,
}

/// Runs of consecutive `true` cells.
fn runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &m) in mask.iter().enumerate() {
        match (m, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, mask.len() - 1));
    }
    out
}

fn mu1_clusters(sol: &EquilibriumSolution) -> Result<Vec<(usize, usize)>> {
    let d1 = sol.density_half(0);
    let mask = support_mask(&d1, core_max(sol, 0, &d1), sol.config.solver.support_threshold);
    let cl = runs(&mask);
    if cl.is_empty() {
        return Err(Error::AmbiguousSupport("mu1 has no cell above the support threshold".into()));
    }
    for w in cl.windows(2) {
        if w[1].0 - w[0].1 - 1 < 2 {
            let e = &sol.grids.edges[0];
            return Err(Error::AmbiguousSupport(format!(
                "gap of {} cell(s) between {} and {}",
                w[1].0 - w[0].1 - 1,
                e[w[0].1 + 1],
                e[w[1].0]
            )));
        }
    }
    Ok(cl)
}

fn first_free(sol: &EquilibriumSolution) -> Option<usize> {
    free_mask(sol).iter().position(|&f| f)
}

fn first_mu3(sol: &EquilibriumSolution) -> Option<usize> {
    let d3 = sol.density_half(2);
    let m = core_max(sol, 2, &d3);
    d3.iter().position(|&d| d > sol.config.solver.support_threshold * m)
}

/// Supports of the solved measures, read off the half-line cells.
pub fn extract_supports(sol: &EquilibriumSolution) -> Result<SupportSet> {
    let e1 = &sol.grids.edges[0];
    let w1 = &sol.half_weights[0];
    let cl = mu1_clusters(sol)?;
    let touches_origin = e1[0] == 0.0 && cl[0].0 == 0;
    let gap1 = if e1[0] == 0.0 { cl[0].0 } else { usize::MAX };

    let mut intervals = Vec::new();
    let mut masses = Vec::new();
    for (k, &(i0, i1)) in cl.iter().enumerate().rev() {
        if k == 0 && touches_origin {
            continue;
        }
        intervals.push((-e1[i1 + 1], -e1[i0]));
        masses.push(w1[i0..=i1].iter().sum::<f64>());
    }
    for (k, &(i0, i1)) in cl.iter().enumerate() {
        let m: f64 = w1[i0..=i1].iter().sum();
        if k == 0 && touches_origin {
            intervals.push((-e1[i1 + 1], e1[i1 + 1]));
            masses.push(2.0 * m);
        } else {
            intervals.push((e1[i0], e1[i1 + 1]));
            masses.push(m);
        }
    }
    let total: f64 = masses.iter().sum();
    let mut partial_masses = vec![1.0];
    let mut acc = total;
    for m in &masses {
        acc -= m;
        partial_masses.push(acc.max(0.0) / total);
    }
    *partial_masses.last_mut().unwrap() = 0.0;

    let e2 = &sol.grids.edges[1];
    let gap2 = first_free(sol).unwrap_or(0);
    let c2 = e2[gap2];
    let e3 = &sol.grids.edges[2];
    let gap3 = first_mu3(sol).unwrap_or(0);
    let c3 = e3[gap3];
    let origin_gap_cells = [gap1, gap2, gap3];
    let near_singular = origin_gap_cells.iter().any(|g| (1..=2).contains(g));
    Ok(SupportSet { intervals, c2, c3, partial_masses, origin_gap_cells, near_singular })
}

/// An endpoint of the extracted supports. `Left(k)` and `Right(k)` refer to
/// `SupportSet::intervals[k]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    Left(usize),
    Right(usize),
    C2,
    C3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFit {
    /// Edge location from a quadratic fit of the squared density.
    pub location: f64,
    /// Slope of `log density` against `log distance`.
    pub exponent: f64,
    pub cells: usize,
}

const FIT_LO: usize = 5;
const FIT_HI: usize = 25;
const LOCATE_CELLS: usize = 12;

fn fit_profile(edges: &[f64], rho: &[f64], start: usize, forward: bool) -> Result<EdgeFit> {
    let idx = |k: usize| -> Option<usize> {
        if forward {
            (start + k < rho.len()).then_some(start + k)
        } else {
            start.checked_sub(k)
        }
    };
    let mid = |i: usize| 0.5 * (edges[i] + edges[i + 1]);
    let m0 = mid(start);
    // edge location: rho^2 is smooth across a square-root edge
    let mut pts = Vec::new();
    for k in 1..=LOCATE_CELLS {
        if let Some(i) = idx(k) {
            pts.push((mid(i) - m0, rho[i] * rho[i]));
        }
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!("{} cells to locate the edge", pts.len())));
    }
    let boundary = if forward { edges[start] } else { edges[start + 1] };
    let h0 = edges[start + 1] - edges[start];
    let location = quadratic_root_near_zero(&pts)
        .map(|u| m0 + u)
        .filter(|e| (e - boundary).abs() <= 3.0 * h0)
        .unwrap_or(boundary);
    let mut fit = Vec::new();
    for k in FIT_LO..=FIT_HI {
        if let Some(i) = idx(k) {
            let d = (mid(i) - location).abs();
            if rho[i] > 0.0 && d > 0.0 {
                fit.push((d.ln(), rho[i].ln()));
            }
        }
    }
    if fit.len() < 5 {
        return Err(Error::InsufficientData(format!("{} usable cells for the edge fit", fit.len())));
    }
    let (exponent, _) = linear_fit(&fit);
    Ok(EdgeFit { location, exponent, cells: fit.len() })
}

/// Least-squares `y = a u^2 + b u + c`, then the real root closest to `u = 0`.
fn quadratic_root_near_zero(pts: &[(f64, f64)]) -> Option<f64> {
    let scale = pts.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(u, y) in pts {
        let v = u / scale;
        let row = [v * v, v, 1.0];
        for r in 0..3 {
            aty[r] += row[r] * y;
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let coef = solve3(ata, aty)?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    let mut roots = Vec::new();
    let disc = b * b - 4.0 * a * c;
    if a.abs() > 1e-12 * b.abs().max(c.abs()) && disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        roots.push(q / a);
        if q != 0.0 {
            roots.push(c / q);
        }
    } else if b != 0.0 {
        roots.push(-c / b);
    }
    roots.into_iter().min_by(|x, y| x.abs().total_cmp(&y.abs())).map(|v| v * scale)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        x[r] = (b[r] - (r + 1..3).map(|c| a[r][c] * x[c]).sum::<f64>()) / a[r][r];
    }
    Some(x)
}

/// Fit the vanishing exponent of the relevant density at an edge: `rho1` at the endpoints of
/// `S(mu1)`, `rho2` (density of `sigma_2 - mu2`) at `c2`, `rho3` at `c3`. The edge is located
/// by a quadratic fit of the squared density on cells 1..12; the exponent is the log-log slope
/// over cells 5..25, counted from the first support cell.
pub fn fit_edge_exponent(sol: &EquilibriumSolution, edge: Edge) -> Result<EdgeFit> {
    match edge {
        Edge::C2 => {
            let j = first_free(sol).filter(|&j| j > 0).ok_or_else(|| Error::InsufficientData("c2 = 0".into()))?;
            fit_profile(&sol.grids.edges[1], &sol.rho2_half(), j, true)
        }
        Edge::C3 => {
            let j = first_mu3(sol).filter(|&j| j > 0).ok_or_else(|| Error::InsufficientData("c3 = 0".into()))?;
            fit_profile(&sol.grids.edges[2], &sol.density_half(2), j, true)
        }
        Edge::Left(k) | Edge::Right(k) => {
            let sup = extract_supports(sol)?;
            let &(a, b) = sup
                .intervals
                .get(k)
                .ok_or_else(|| Error::InsufficientData(format!("no interval {k}")))?;
            let (x, left) = match edge {
                Edge::Left(_) => (a, true),
                _ => (b, false),
            };
            // by symmetry work on the positive half-line
            let (pos, left) = if x < 0.0 { (-x, !left) } else { (x, left) };
            if pos == 0.0 {
                return Err(Error::InsufficientData("the origin is interior to the support".into()));
            }
            let e1 = &sol.grids.edges[0];
            let cl = mu1_clusters(sol)?;
            let tol = 1e-12 * pos.max(1.0);
            let start = cl
                .iter()
                .find_map(|&(i0, i1)| {
                    if left && (e1[i0] - pos).abs() <= tol {
                        Some(i0)
                    } else if !left && (e1[i1 + 1] - pos).abs() <= tol {
                        Some(i1)
                    } else {
                        None
                    }
                })
                .ok_or_else(|| Error::InsufficientData(format!("edge at {pos} not found on the mesh")))?;
            fit_profile(e1, &sol.density_half(0), start, left)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_profile_is_recovered() {
        let edges: Vec<f64> = (0..=1000).map(|k| 0.001 * k as f64).collect();
        // support [0.3037, 1] with density sqrt(x - e) (1 + x)
        let e = 0.3037;
        let rho: Vec<f64> = edges
            .windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                if m > e {
                    (m - e).sqrt() * (1.0 + m)
                } else {
                    0.0
                }
            })
            .collect();
        let start = rho.iter().position(|&r| r > 0.0).unwrap();
        let f = fit_profile(&edges, &rho, start, true).unwrap();
        assert!((f.location - e).abs() < 1e-4, "{f:?}");
        assert!((f.exponent - 0.5).abs() < 0.05, "{f:?}");
    }

    #[test]
    fn runs_split_on_false() {
        assert_eq!(runs(&[false, true, true, false, true]), vec![(1, 2), (4, 4)]);
    }
}
