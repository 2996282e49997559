//! Cauchy transforms `F_j` of a solved equilibrium, the functions `xi_1..xi_4` on the four
//! sheets, their gluing across the cuts, the large-`z` expansion constants, the tail law
//! of `mu2` and `mu3`, and a least-squares fit of the quartic spectral curve.
//!
//! Every measure is piecewise constant on its cells, so each cell contributes a closed-form
//! logarithm to `F_j` and one-sided limits onto the support exist.

use crate::classify::Case;
use crate::equilibrium::{Axis, EquilibriumSolution, GridMeasure, SupportSet};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::saddle::{branch_saddle, critical_abscissae};
use crate::C64;
use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use std::f64::consts::PI;

/// Relative tolerance of the expansion fit.
pub const FIT_TOL: f64 = 1e-2;
/// Normalized residual bound of the spectral-curve fit.
pub const CURVE_TOL: f64 = 1e-2;
/// Minimum distance to the support, in local cell widths, for checked evaluations.
pub const MIN_CELLS_AWAY: f64 = 2.0;

/// `log(1 + u)` for complex `u`, accurate for small `|u|`; principal branch.
fn clog1p(u: C64) -> C64 {
    let re = 0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p();
    C64::new(re, u.im.atan2(1.0 + u.re))
}

/// Cauchy transform `int dmu(s)/(z - s)` of a piecewise-constant measure on one axis.
#[derive(Clone, Debug)]
pub struct CauchyTransform {
    pub axis: Axis,
    lo: Vec<f64>,
    hi: Vec<f64>,
    dens: Vec<f64>,
    /// Cells whose density exceeds the support threshold.
    support: Vec<usize>,
}

impl CauchyTransform {
    /// `threshold` is relative to the largest cell density.
    pub fn new(m: &GridMeasure, threshold: f64) -> Self {
        let lo: Vec<f64> = m.nodes.iter().zip(&m.cell_widths).map(|(x, h)| x - 0.5 * h).collect();
        let hi: Vec<f64> = m.nodes.iter().zip(&m.cell_widths).map(|(x, h)| x + 0.5 * h).collect();
        let dens = m.densities();
        let dmax = dens.iter().cloned().fold(0.0, f64::max);
        let support = (0..dens.len()).filter(|&i| dens[i] > threshold * dmax).collect();
        CauchyTransform { axis: m.axis, lo, hi, dens, support }
    }

    /// Point on the axis at coordinate `t`.
    fn point(&self, t: f64) -> C64 {
        match self.axis {
            Axis::Real => C64::new(t, 0.0),
            Axis::Imaginary => C64::new(0.0, t),
        }
    }

    /// Unchecked evaluation; continuous up to the support from either side.
    pub fn eval(&self, z: C64) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        for i in 0..self.dens.len() {
            let d = self.dens[i];
            if d == 0.0 {
                continue;
            }
            let (a, b) = (self.point(self.lo[i]), self.point(self.hi[i]));
            // real cell: log((z-a)/(z-b)); imaginary cell: i log((z-ib)/(z-ia))
            sum += match self.axis {
                Axis::Real => clog1p((b - a) / (z - b)) * d,
                Axis::Imaginary => clog1p((a - b) / (z - a)) * C64::new(0.0, d),
            };
        }
        sum
    }

    /// Smallest distance from `z` to a support cell, in widths of that cell.
    pub fn cells_away(&self, z: C64) -> f64 {
        let (along, off) = match self.axis {
            Axis::Real => (z.re, z.im.abs()),
            Axis::Imaginary => (z.im, z.re.abs()),
        };
        self.support
            .iter()
            .map(|&i| {
                let gap = (self.lo[i] - along).max(along - self.hi[i]).max(0.0);
                gap.hypot(off) / (self.hi[i] - self.lo[i])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Width of the cell nearest to coordinate `t` along the axis.
    fn local_width(&self, t: f64) -> f64 {
        let i = self.lo.partition_point(|&l| l <= t).saturating_sub(1);
        self.hi[i] - self.lo[i]
    }

    /// Density of the cell containing `t`.
    pub fn density_at(&self, t: f64) -> f64 {
        let i = self.lo.partition_point(|&l| l <= t).saturating_sub(1);
        if t >= self.lo[i] && t <= self.hi[i] {
            self.dens[i]
        } else {
            0.0
        }
    }
}

/// Large-`z` expansion `xi_2(z) = e_{-1} z^{1/3} + e_1 z^{-1/3} + e_3 z^{-1} + e_5 z^{-5/3}` in
/// the first quadrant, and the tail constant `C = e_5 - alpha^3 tau^{-2/3} / 81`. The fit also
/// carries `z^{-7/3}` and `z^{-3}` terms, which otherwise leak into `e_3` and `e_5`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionConstants {
    pub e_m1: f64,
    pub e1: f64,
    pub e3: f64,
    pub e5: f64,
    pub c: f64,
    /// Max fit residual relative to `max |xi_2|` over the samples.
    pub residual: f64,
}

impl ExpansionConstants {
    /// The values the expansion must take: `(tau^{4/3}, -(alpha/3) tau^{2/3}, 1/3)`.
    pub fn expected(p: &ModelParams) -> (f64, f64, f64) {
        (p.tau.powf(4.0 / 3.0), -p.alpha / 3.0 * p.tau.powf(2.0 / 3.0), 1.0 / 3.0)
    }
}

/// Quartic `xi^4 + p_3 xi^3 + p_2 xi^2 + p_1 xi + p_0` with real polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCurveFit {
    /// `coeffs[k]` holds the monomial coefficients of `p_k(z)`.
    pub coeffs: [Vec<f64>; 4],
    /// Largest `|quartic(xi_j(z))| / max(1, |xi|)^4` over samples and sheets.
    pub residual: f64,
    /// Largest discarded imaginary part, relative to the coefficient scale.
    pub imag_discarded: f64,
    /// Max relative deviation of `p_3` from `-V'`.
    pub p3_error: f64,
}

/// Tail law `density ~ prefactor * t^slope` fitted over `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    pub slope: f64,
    /// Prefactor with the slope held at `-5/3`.
    pub prefactor: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Gluing mismatch across one cut.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GluingCheck {
    /// Largest extrapolated `|xi_{j,+} - xi_{j+1,-}|` over the probe points.
    pub mismatch: f64,
    /// Largest `|xi|` at the probe points.
    pub scale: f64,
    pub points: usize,
}

/// Mismatches across `S(mu1)`, `S(sigma_2 - mu2)` and `S(mu3)`; `None` for an empty cut.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GluingReport {
    pub cuts: [Option<GluingCheck>; 3],
}

impl GluingReport {
    /// Worst mismatch relative to its scale.
    pub fn relative(&self) -> f64 {
        self.cuts.iter().flatten().map(|c| c.mismatch / c.scale.max(1.0)).fold(0.0, f64::max)
    }
}

/// Evaluators attached to a converged solution.
pub struct SpectralData<'a> {
    pub sol: &'a EquilibriumSolution,
    pub transforms: [CauchyTransform; 3],
}

/// Which one-sided limit to take on a cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Plus,
    Minus,
}

impl<'a> SpectralData<'a> {
    pub fn new(sol: &'a EquilibriumSolution) -> Self {
        let th = sol.config.solver.support_threshold;
        SpectralData {
            sol,
            transforms: [
                CauchyTransform::new(&sol.mu1, th),
                CauchyTransform::new(&sol.mu2, th),
                CauchyTransform::new(&sol.mu3, th),
            ],
        }
    }

    fn params(&self) -> &ModelParams {
        &self.sol.params
    }

    /// `F_j(z)`, `j` in `1..=3`, at least two cells away from `S(mu_j)`.
    pub fn cauchy_f(&self, j: usize, z: C64) -> Result<C64> {
        let t = &self.transforms[j - 1];
        let away = t.cells_away(z);
        if away <= MIN_CELLS_AWAY {
            return Err(Error::TooCloseToSupport(format!(
                "z = {z} is {away:.2} cells from the support of mu{j}"
            )));
        }
        Ok(t.eval(z))
    }

    /// `xi_j(z)`, `j` in `1..=4`, away from the cuts of sheet `j`.
    pub fn xi(&self, j: usize, z: C64) -> Result<C64> {
        let p = self.params();
        let f = |k: usize| self.cauchy_f(k, z);
        let ts = |k: usize| branch_saddle(k, z, p).map(|s| s * p.tau);
        match j {
            1 => Ok(p.dv_c(z) - f(1)?),
            2 => Ok(f(1)? - f(2)? + ts(1)?),
            3 => Ok(f(2)? - f(3)? + ts(2)?),
            4 => Ok(f(3)? + ts(3)?),
            _ => Err(Error::Config(format!("sheet index {j} is not in 1..=4"))),
        }
    }

    /// Unchecked `xi_j` used for one-sided limits.
    fn xi_raw(&self, j: usize, z: C64) -> Result<C64> {
        let p = self.params();
        let f = |k: usize| self.transforms[k - 1].eval(z);
        let ts = |k: usize| branch_saddle(k, z, p).map(|s| s * p.tau);
        Ok(match j {
            1 => p.dv_c(z) - f(1),
            2 => f(1) - f(2) + ts(1)?,
            3 => f(2) - f(3) + ts(2)?,
            _ => f(3) + ts(3)?,
        })
    }

    /// Richardson-extrapolated `xi_j(w + side * delta * n) - xi_{j+1}(w - side * delta * n)`
    /// with `n` the unit normal and `delta = 2^{-k} h`, `k = 1..=5`.
    fn glue_at(&self, j: usize, w: C64, normal: C64, h: f64) -> Result<(f64, f64)> {
        let mut last = [C64::new(0.0, 0.0); 2];
        let mut scale = 0.0f64;
        for k in 1..=5 {
            let d = normal * (h * 0.5f64.powi(k));
            let mut diff = C64::new(0.0, 0.0);
            for side in [Side::Plus, Side::Minus] {
                let s = if side == Side::Plus { d } else { -d };
                let a = self.xi_raw(j, w + s)?;
                let b = self.xi_raw(j + 1, w - s)?;
                scale = scale.max(a.norm()).max(b.norm());
                // both sides must glue; keep the worse one
                let dd = a - b;
                if dd.norm() > diff.norm() {
                    diff = dd;
                }
            }
            last = [last[1], diff];
        }
        Ok(((2.0 * last[1] - last[0]).norm(), scale))
    }

    /// Gluing of consecutive sheets across the three cuts at interior support points.
    pub fn check_gluing(&self, sup: &SupportSet) -> Result<GluingReport> {
        let mut cuts = [None, None, None];
        // S(mu1): quarter points of each interval on the positive side
        let t1 = &self.transforms[0];
        let mut pts1 = Vec::new();
        for &(a, b) in &sup.intervals {
            if b <= 0.0 {
                continue;
            }
            let a = a.max(0.0);
            for f in [0.25, 0.5, 0.75] {
                pts1.push(a + f * (b - a));
            }
        }
        cuts[0] = Some(self.glue_cut(1, &pts1, t1, C64::new(0.0, 1.0))?);

        let outer = sup.intervals.last().map_or(1.0, |iv| iv.1).max(1.0);
        // S(sigma_2 - mu2) = [i c2, i inf)
        let t2 = &self.transforms[1];
        let pts2: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|f| sup.c2 + f * outer.max(sup.c2)).collect();
        cuts[1] = Some(self.glue_cut(2, &pts2, t2, C64::new(1.0, 0.0))?);

        // S(mu3) = [c3, inf), avoiding x* where V_3 is not smooth
        let t3 = &self.transforms[2];
        let xs = critical_abscissae(self.params()).x_star;
        let mut pts3: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|f| sup.c3 + f * outer.max(sup.c3)).collect();
        if xs > sup.c3 {
            pts3.push(0.5 * (sup.c3 + xs));
        }
        pts3.retain(|x| (x - xs).abs() > 0.05 * xs.max(1.0));
        cuts[2] = Some(self.glue_cut(3, &pts3, t3, C64::new(0.0, 1.0))?);
        Ok(GluingReport { cuts })
    }

    fn glue_cut(&self, j: usize, pts: &[f64], t: &CauchyTransform, normal: C64) -> Result<GluingCheck> {
        let mut mismatch = 0.0f64;
        let mut scale = 0.0f64;
        for &x in pts {
            let h = t.local_width(x);
            // probe the midpoint of the containing cell
            let i = t.lo.partition_point(|&l| l <= x).saturating_sub(1);
            let mid = 0.5 * (t.lo[i] + t.hi[i]);
            let (m, s) = self.glue_at(j, t.point(mid), normal, h)?;
            mismatch = mismatch.max(m);
            scale = scale.max(s);
        }
        Ok(GluingCheck { mismatch, scale, points: pts.len() })
    }

    /// `(1/(2 pi i)) (xi_{1,+} - xi_{1,-})(x)` at a real point of `S(mu1)`.
    pub fn recovered_density_mu1(&self, x: f64) -> Result<f64> {
        let t = &self.transforms[0];
        let d = C64::new(0.0, 1e-3 * t.local_width(x));
        let w = C64::new(x, 0.0);
        let jump = self.xi_raw(1, w + d)? - self.xi_raw(1, w - d)?;
        Ok((jump / C64::new(0.0, 2.0 * PI)).re)
    }

    /// Fit of `xi_2` along the ray `arg z = pi/4` at radii `10^2..10^4`.
    pub fn fit_expansion_constants(&self) -> Result<ExpansionConstants> {
        let p = self.params();
        let dir = C64::from_polar(1.0, PI / 4.0);
        let n = 41;
        let zs: Vec<C64> = (0..n).map(|k| dir * 10f64.powf(2.0 + 2.0 * k as f64 / (n - 1) as f64)).collect();
        let vals: Vec<C64> = zs.iter().map(|&z| self.xi(2, z)).collect::<Result<_>>()?;
        let pows = [1.0 / 3.0, -1.0 / 3.0, -1.0, -5.0 / 3.0, -7.0 / 3.0, -3.0];
        let cols: Vec<Vec<C64>> = pows.iter().map(|&a| zs.iter().map(|z| z.powf(a)).collect()).collect();
        let coef = complex_lstsq_real(&cols, &vals);
        let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let residual = (0..n)
            .map(|i| (vals[i] - (0..pows.len()).map(|k| cols[k][i] * coef[k]).sum::<C64>()).norm())
            .fold(0.0, f64::max)
            / scale;
        if !(residual < FIT_TOL) {
            return Err(Error::Fit(format!("expansion of xi_2: relative residual {residual:.3e}")));
        }
        let c = coef[3] - p.alpha.powi(3) / 81.0 * p.tau.powf(-2.0 / 3.0);
        Ok(ExpansionConstants { e_m1: coef[0], e1: coef[1], e3: coef[2], e5: coef[3], c, residual })
    }

    /// Sample set: 32 points on each of the circles `|z| = 3 R` and `10 R`, staying 0.1 rad
    /// clear of both axes.
    pub fn curve_samples(r: f64) -> Vec<C64> {
        let mut out = Vec::with_capacity(64);
        for rad in [3.0 * r, 10.0 * r] {
            for q in 0..4 {
                for k in 0..8 {
                    let a = 0.1 + (k as f64 + 0.5) / 8.0 * (PI / 2.0 - 0.2);
                    out.push(C64::from_polar(rad, q as f64 * PI / 2.0 + a));
                }
            }
        }
        out
    }

    /// Least-squares fit of the coefficients `p_k(z)` of the quartic satisfied by
    /// `xi_1..xi_4` from their elementary symmetric functions at the samples.
    pub fn fit_spectral_curve(&self, samples: &[C64]) -> Result<SpectralCurveFit> {
        let p = self.params();
        let d = p.deg_v();
        // degree caps from the behaviour at both points at infinity
        let caps = [d, d - 1, d.saturating_sub(2), d - 1];
        let mut xis = Vec::with_capacity(samples.len());
        for &z in samples {
            let mut x = [C64::new(0.0, 0.0); 4];
            for j in 0..4 {
                x[j] = self.xi(j + 1, z)?;
            }
            xis.push(x);
        }
        let sym: Vec<[C64; 4]> = xis.iter().map(elementary_symmetric).collect();
        let mut coeffs: [Vec<f64>; 4] = Default::default();
        let mut imag_discarded = 0.0f64;
        for k in 0..4 {
            // p_3 = -e_1, p_2 = e_2, p_1 = -e_3, p_0 = e_4
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            let target: Vec<C64> = sym.iter().map(|e| e[3 - k] * sign).collect();
            let cols: Vec<Vec<C64>> = (0..=caps[k]).map(|m| samples.iter().map(|z| z.powu(m as u32)).collect()).collect();
            let c = complex_lstsq(&cols, &target);
            let cs = c.iter().map(|v| v.norm()).fold(1e-300, f64::max);
            imag_discarded = imag_discarded.max(c.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / cs);
            coeffs[k] = c.iter().map(|v| v.re).collect();
        }
        let mut residual = 0.0f64;
        for (z, x) in samples.iter().zip(&xis) {
            let pk: Vec<C64> = coeffs.iter().map(|c| c.iter().rev().fold(C64::new(0.0, 0.0), |a, &v| a * z + v)).collect();
            let norm = x.iter().map(|v| v.norm()).fold(1.0, f64::max).powi(4);
            for &xi in x {
                let q = xi.powu(4) + pk[3] * xi.powu(3) + pk[2] * xi * xi + pk[1] * xi + pk[0];
                residual = residual.max(q.norm() / norm);
            }
        }
        let dv = p.dv_coeffs();
        let dscale = dv.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let p3_error = (0..coeffs[3].len().max(dv.len()))
            .map(|m| (coeffs[3].get(m).copied().unwrap_or(0.0) + dv.get(m).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
            / dscale;
        if !(residual < CURVE_TOL) {
            return Err(Error::Fit(format!("spectral curve residual {residual:.3e}")));
        }
        Ok(SpectralCurveFit { coeffs, residual, imag_discarded, p3_error })
    }

    /// Tail law of `mu2` (`which = 2`) or `mu3` (`which = 3`) over the outer decade before
    /// the truncation buffer, `[T/100, T/10]`.
    pub fn tail_fit(&self, which: usize) -> Result<TailFit> {
        let (k, far) = match which {
            2 => (1, self.sol.config.grid.y2),
            3 => (2, self.sol.config.grid.x3),
            _ => return Err(Error::Config(format!("tail law is defined for mu2 and mu3, not mu{which}"))),
        };
        let (lo, hi) = (far / 100.0, far / 10.0);
        let mids = self.sol.grids.mids(k);
        let dens = self.sol.density_half(k);
        let (slope, _) = crate::equilibrium::tail_law(&mids, &dens, lo, hi)?;
        let logs: Vec<f64> = mids
            .iter()
            .zip(&dens)
            .filter(|(m, d)| **m >= lo && **m <= hi && **d > 0.0)
            .map(|(m, d)| d.ln() + 5.0 / 3.0 * m.ln())
            .collect();
        let prefactor = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
        Ok(TailFit { slope, prefactor, lo, hi })
    }

    pub fn tail_exponent(&self, which: usize) -> Result<f64> {
        self.tail_fit(which).map(|t| t.slope)
    }
}

/// `[e_1, e_2, e_3, e_4]` of four numbers.
fn elementary_symmetric(x: &[C64; 4]) -> [C64; 4] {
    let mut e = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    for &v in x {
        for k in (1..=4).rev() {
            e[k] = e[k] + e[k - 1] * v;
        }
    }
    [e[1], e[2], e[3], e[4]]
}

/// Column-scaled real least squares.
fn lstsq(a: Mat<f64>, b: &[f64]) -> Vec<f64> {
    let (m, n) = (a.nrows(), a.ncols());
    let norms: Vec<f64> = (0..n).map(|j| (0..m).map(|i| a[(i, j)].powi(2)).sum::<f64>().sqrt().max(1e-300)).collect();
    let a = Mat::from_fn(m, n, |i, j| a[(i, j)] / norms[j]);
    let rhs = Mat::from_fn(m, 1, |i, _| b[i]);
    let x = a.qr().solve_lstsq(&rhs);
    (0..n).map(|j| x[(j, 0)] / norms[j]).collect()
}

/// Complex data, real unknowns: `sum_k x_k cols[k] ~ b`.
fn complex_lstsq_real(cols: &[Vec<C64>], b: &[C64]) -> Vec<f64> {
    let m = b.len();
    let a = Mat::from_fn(2 * m, cols.len(), |i, k| if i < m { cols[k][i].re } else { cols[k][i - m].im });
    let rhs: Vec<f64> = b.iter().map(|v| v.re).chain(b.iter().map(|v| v.im)).collect();
    lstsq(a, &rhs)
}

/// Complex unknowns through the real embedding.
fn complex_lstsq(cols: &[Vec<C64>], b: &[C64]) -> Vec<C64> {
    let m = b.len();
    let n = cols.len();
    let a = Mat::from_fn(2 * m, 2 * n, |i, j| {
        let (k, imag_unknown) = (j / 2, j % 2 == 1);
        let c = if i < m { cols[k][i] } else { cols[k][i - m] };
        let v = if imag_unknown { c * C64::new(0.0, 1.0) } else { c };
        if i < m {
            v.re
        } else {
            v.im
        }
    });
    let rhs: Vec<f64> = b.iter().map(|v| v.re).chain(b.iter().map(|v| v.im)).collect();
    let x = lstsq(a, &rhs);
    (0..n).map(|k| C64::new(x[2 * k], x[2 * k + 1])).collect()
}

/// Genus of the four-sheeted surface: `N - 1` in Cases I-III, `N` in Cases IV and V.
pub fn genus(sup: &SupportSet, case: Case) -> Result<usize> {
    let n = sup.intervals.iter().filter(|iv| iv.1 > 0.0).count();
    match case {
        Case::I | Case::II | Case::III => Ok(n.saturating_sub(1)),
        Case::IV | Case::V => Ok(n),
        other => Err(Error::AmbiguousSupport(format!("no genus for a {other} point"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure(axis: Axis, edges: &[f64], w: &[f64]) -> GridMeasure {
        GridMeasure::from_half(axis, edges, w)
    }

    #[test]
    fn uniform_density_matches_closed_form() {
        // uniform density 1/2 on [-1, 1]: F(z) = (1/2) log((z+1)/(z-1))
        let n = 50;
        let edges: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let w = vec![0.5 / n as f64; n];
        let t = CauchyTransform::new(&measure(Axis::Real, &edges, &w), 1e-4);
        for z in [C64::new(0.3, 0.7), C64::new(-2.0, 0.1), C64::new(40.0, -3.0), C64::new(1e6, 1e6)] {
            let exact = ((z + 1.0) / (z - 1.0)).ln() * 0.5;
            assert!((t.eval(z) - exact).norm() < 1e-13 * (1.0 + exact.norm()));
        }
        // one-sided limit on the support: PV -/+ i pi rho
        let x = 0.31;
        let up = t.eval(C64::new(x, 1e-12));
        let pv = 0.5 * ((1.0 + x) / (1.0 - x)).ln();
        assert!((up - C64::new(pv, -PI * 0.5)).norm() < 1e-9);
    }

    #[test]
    fn imaginary_axis_measure_is_odd() {
        let edges = [0.0, 0.5, 1.5, 4.0];
        let w = [0.1, 0.2, 0.05];
        let t = CauchyTransform::new(&measure(Axis::Imaginary, &edges, &w), 1e-4);
        let z = C64::new(0.7, 2.2);
        assert!((t.eval(z) + t.eval(-z)).norm() < 1e-14);
        // far field: mass / z
        let zf = C64::new(3e5, 4e5);
        assert!((t.eval(zf) * zf - 0.7).norm() < 1e-9);
        assert!(t.cells_away(C64::new(0.1, 1.0)) < 2.0);
        assert!(t.cells_away(C64::new(5.0, 1.0)) > 2.0);
    }

    #[test]
    fn symmetric_functions_of_roots() {
        let r = [C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(-1.0, 1.0), C64::new(0.5, -2.0)];
        let e = elementary_symmetric(&r);
        for &x in &r {
            let q = x.powu(4) - e[0] * x.powu(3) + e[1] * x * x - e[2] * x + e[3];
            assert!(q.norm() < 1e-12);
        }
    }
}
