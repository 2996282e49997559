//! Biorthogonal polynomials of the two-matrix model at small `n`, the transformed functions
//! `Q_{k,n}`, the correlation kernel `K_11` and its diagonal against the equilibrium density.
//!
//! Both families are expanded in Chebyshev polynomials scaled to a window: `T_k(x / L_x)`
//! for `p_k` and `T_l(y / L_y)` for `q_l`. The inner `y`-integrals are Pearcey moments on the
//! real line, so
//!
//! ```text
//! J_l(x) = e^{-n V(x)} int T_l(y / L_y) e^{-n(W(y) - tau x y)} dy
//! B_{kl} = int T_k(x / L_x) J_l(x) dx
//! ```
//!
//! and a triangular factorization `B = L D U` gives `p_k`, `q_l` and `h_k^2` up to the
//! monic normalization.

use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::pearcey::contour_moments;
use crate::quad::gauss_legendre_unit;
use crate::C64;
use faer::Mat;
use rayon::prelude::*;

/// Largest `n` handled in double precision.
pub const N_MAX: usize = 12;
/// Relative biorthogonality tolerance.
pub const BIO_TOL: f64 = 1e-8;
/// Relative kernel tolerance.
pub const KERNEL_TOL: f64 = 1e-6;
/// Condition number of `B` above which results are flagged.
pub const COND_WARN: f64 = 1e12;
/// The outer window ends where the integrand drops below `e^{-WINDOW_DEPTH}` of its peak.
const WINDOW_DEPTH: f64 = 69.1;
/// The Chebyshev windows end where the marginal weights drop by `e^{-BASIS_DEPTH}`; wider
/// windows cost several digits in the conditioning of `B` at `n = 12`.
const BASIS_DEPTH: f64 = 4.0;
const PANELS: usize = 48;
const PANEL_POINTS: usize = 20;

/// `T_0(t), ..., T_{m-1}(t)`.
pub fn chebyshev_values(t: f64, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    if m > 0 {
        v[0] = 1.0;
    }
    if m > 1 {
        v[1] = t;
    }
    for k in 2..m {
        v[k] = 2.0 * t * v[k - 1] - v[k - 2];
    }
    v
}

/// `c[l][k]`: coefficient of `t^k` in `T_l(t)`, `l < m`.
pub fn chebyshev_monomial(m: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; m]; m];
    for l in 0..m {
        match l {
            0 => c[0][0] = 1.0,
            1 => c[1][1] = 1.0,
            _ => {
                for k in 0..m {
                    let up = if k > 0 { 2.0 * c[l - 1][k - 1] } else { 0.0 };
                    c[l][k] = up - c[l - 2][k];
                }
            }
        }
    }
    c
}

/// Zeros of `sum_k a_k T_k(t)` from the eigenvalues of the colleague matrix.
pub fn chebyshev_roots(a: &[f64]) -> Result<Vec<C64>> {
    let mut a = a.to_vec();
    while a.len() > 1 && *a.last().unwrap() == 0.0 {
        a.pop();
    }
    let k = a.len() - 1;
    if k == 0 {
        return Ok(Vec::new());
    }
    if k == 1 {
        return Ok(vec![C64::new(-a[0] / a[1], 0.0)]);
    }
    let lead = a[k];
    let m = Mat::from_fn(k, k, |i, j| {
        let mut v = 0.0;
        if i == 0 {
            if j == 1 {
                v = 1.0;
            }
        } else if j + 1 == i || j == i + 1 {
            v = 0.5;
        }
        if i == k - 1 {
            v -= a[j] / (2.0 * lead);
        }
        v
    });
    m.eigenvalues()
        .map(|ev| ev.into_iter().map(|c| C64::new(c.re, c.im)).collect())
        .map_err(|e| Error::NonConvergence(format!("colleague eigenvalues: {e:?}")))
}

/// Quadrature nodes on `[0, x_max]` (the integrands have definite parity).
fn half_nodes(x_max: f64, panels: usize, points: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre_unit(points);
    let h = x_max / panels as f64;
    let mut out = Vec::with_capacity(panels * points);
    for p in 0..panels {
        for &(t, w) in &rule {
            out.push((h * (p as f64 + t), h * w));
        }
    }
    out
}

/// Bimoment matrix and everything needed to evaluate the inner functions `J_l`.
#[derive(Clone, Debug)]
pub struct Bimoments {
    pub n: usize,
    pub params: ModelParams,
    /// `B_{kl}` for `k, l < size`, in units of `exp(log_shift)`.
    pub b: Vec<Vec<f64>>,
    pub lx: f64,
    pub ly: f64,
    /// Half-width of the outer integration window.
    pub x_max: f64,
    pub log_shift: f64,
    /// 2-norm condition number of `B`.
    pub condition: f64,
    pub precision_warning: bool,
    /// Monomial coefficients of `T_l`, cached.
    cheb: Vec<Vec<f64>>,
}

impl Bimoments {
    pub fn size(&self) -> usize {
        self.b.len()
    }

    /// `J_0(x), ..., J_{size-1}(x)` in units of `exp(log_shift)`.
    pub fn inner(&self, x: f64) -> Result<Vec<f64>> {
        inner_values(&self.params, self.n, self.size(), self.ly, &self.cheb, x, self.log_shift)
    }

    /// `T_k(x / L_x)` for `k < size`.
    pub fn basis(&self, x: f64) -> Vec<f64> {
        chebyshev_values(x / self.lx, self.size())
    }
}

/// `J_l(x)` with the moments of `e^{-n(W(y) - tau x y)}` on the real line.
fn inner_values(p: &ModelParams, n: usize, m: usize, ly: f64, cheb: &[Vec<f64>], x: f64, shift: f64) -> Result<Vec<f64>> {
    let mom = contour_moments(0, n, C64::new(x, 0.0), m, 0, p)?;
    let nt = n as f64 * p.tau;
    // (n tau y)^k -> (y / L_y)^k
    let mut f = vec![1.0; m];
    for k in 1..m {
        f[k] = f[k - 1] / (ly * nt);
    }
    let scale = (mom.log_scale - n as f64 * p.v(x) - shift).exp();
    Ok((0..m)
        .map(|l| (0..=l).map(|k| cheb[l][k] * f[k] * mom.mant[k].re).sum::<f64>() * scale)
        .collect())
}

/// Log of the integrand `e^{-n V(x)} int e^{-n(W - tau x y)} dy`.
fn log_weight(p: &ModelParams, n: usize, x: f64) -> Result<f64> {
    let m = contour_moments(0, n, C64::new(x, 0.0), 1, 0, p)?;
    Ok(m.log_scale + m.mant[0].re.abs().ln() - n as f64 * p.v(x))
}

/// Where the Laplace estimate `-n(W(y) - V^*(tau y))` of the `y`-marginal drops `depth`
/// below its peak; `V^*` is the Legendre transform of `V` over `[-x_max, x_max]`.
fn y_window(p: &ModelParams, n: usize, x_max: f64, depth: f64) -> f64 {
    let xs: Vec<f64> = (0..=2000).map(|i| x_max * (i as f64 / 1000.0 - 1.0)).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| p.v(x)).collect();
    let g = |y: f64| {
        let u = p.tau * y;
        let vstar = xs.iter().zip(&vs).map(|(x, v)| u * x - v).fold(f64::NEG_INFINITY, f64::max);
        -(n as f64) * (p.w(y) - vstar)
    };
    let mut peak = g(0.0);
    let mut y = 0.0;
    loop {
        y += 0.02;
        let v = g(y);
        peak = peak.max(v);
        if v < peak - depth || y > 1e3 {
            return y;
        }
    }
}

/// Bimoments `B_{kl}`, `k, l <= kmax - 1`, for a model at size `n`.
pub fn bimoments(n: usize, kmax: usize, p: &ModelParams) -> Result<Bimoments> {
    if n == 0 || n % 3 != 0 || n > N_MAX {
        return Err(Error::Config(format!("n = {n} must be a positive multiple of 3 up to {N_MAX}")));
    }
    if kmax == 0 || kmax > n + 1 {
        return Err(Error::Config(format!("kmax = {kmax} must lie in 1..={}", n + 1)));
    }
    // outer window: walk out past the peak until the integrand has dropped by WINDOW_DEPTH
    let step = 0.05;
    let mut peak = log_weight(p, n, 0.0)?;
    let mut x = 0.0;
    let mut lx = f64::NAN;
    let x_max = loop {
        x += step;
        let g = log_weight(p, n, x)?;
        peak = peak.max(g);
        if lx.is_nan() && g < peak - BASIS_DEPTH {
            lx = x;
        }
        if g < peak - WINDOW_DEPTH {
            break x;
        }
        if x > 1e4 {
            return Err(Error::Quadrature("outer window did not close by x = 1e4".into()));
        }
    };
    let lx = if lx.is_nan() { x_max } else { lx };
    let ly = y_window(p, n, x_max, BASIS_DEPTH);
    let cheb = chebyshev_monomial(kmax);
    let nodes = half_nodes(x_max, PANELS, PANEL_POINTS);
    let inner: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&(x, _)| inner_values(p, n, kmax, ly, &cheb, x, peak))
        .collect::<Result<_>>()?;
    let mut b = vec![vec![0.0; kmax]; kmax];
    for (i, &(x, w)) in nodes.iter().enumerate() {
        let t = chebyshev_values(x / lx, kmax);
        for k in 0..kmax {
            for l in 0..kmax {
                // parity: the mirrored half doubles even products and cancels odd ones
                if (k + l) % 2 == 0 {
                    b[k][l] += 2.0 * w * t[k] * inner[i][l];
                }
            }
        }
    }
    let bm = Mat::from_fn(kmax, kmax, |i, j| b[i][j]);
    let sv = bm.singular_values().map_err(|e| Error::NonConvergence(format!("singular values: {e:?}")))?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = smax / smin;
    Ok(Bimoments {
        n,
        params: p.clone(),
        b,
        lx,
        ly,
        x_max,
        log_shift: peak,
        condition,
        precision_warning: !(condition < COND_WARN),
        cheb,
    })
}

/// Biorthogonal families `p_k`, `q_l` (`k, l < n`) and their norms.
#[derive(Clone, Debug)]
pub struct BiorthogonalSystem {
    pub n: usize,
    pub moments: Bimoments,
    /// `p_coeffs[k][i]`: coefficient of `T_i(x / L_x)` in the monic `p_k`.
    pub p_coeffs: Vec<Vec<f64>>,
    /// `q_coeffs[l][j]`: coefficient of `T_j(y / L_y)` in the monic `q_l`.
    pub q_coeffs: Vec<Vec<f64>>,
    /// `h_k^2`, in units of `exp(log_shift)`.
    pub h_sq: Vec<f64>,
    /// Largest `|int p_k q_l w - delta_kl h_k^2| / h_k^2`.
    pub bio_residual: f64,
}

/// Leading monomial coefficient of `T_k(x / L)`.
fn cheb_lead(k: usize, l: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        2f64.powi(k as i32 - 1) / l.powi(k as i32)
    }
}

/// `B = L D U` without pivoting; `p = L^{-1}`, `q = U^{-T}` rows, `h^2 = D`, then monic.
pub fn biorthogonalize(bm: Bimoments) -> Result<BiorthogonalSystem> {
    let n = bm.n;
    if bm.size() < n {
        return Err(Error::Config(format!("bimoments of size {} cannot carry n = {n}", bm.size())));
    }
    let b: Vec<Vec<f64>> = (0..n).map(|i| bm.b[i][..n].to_vec()).collect();
    let bscale = b.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    // Doolittle with D split out
    let mut l = vec![vec![0.0; n]; n];
    let mut u = vec![vec![0.0; n]; n];
    let mut d = vec![0.0; n];
    for k in 0..n {
        let mut dk = b[k][k];
        for j in 0..k {
            dk -= l[k][j] * d[j] * u[j][k];
        }
        if !(dk > 1e-14 * bscale) {
            return Err(Error::SingularMoment(k));
        }
        d[k] = dk;
        l[k][k] = 1.0;
        u[k][k] = 1.0;
        for i in k + 1..n {
            let mut s = b[i][k];
            let mut t = b[k][i];
            for j in 0..k {
                s -= l[i][j] * d[j] * u[j][k];
                t -= l[k][j] * d[j] * u[j][i];
            }
            l[i][k] = s / dk;
            u[k][i] = t / dk;
        }
    }
    // rows of L^{-1} and of U^{-T}
    let linv = lower_unit_inverse(&l);
    let ut: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| u[j][i]).collect()).collect();
    let uinv_t = lower_unit_inverse(&ut);
    let mut p_coeffs = vec![vec![0.0; n]; n];
    let mut q_coeffs = vec![vec![0.0; n]; n];
    let mut h_sq = vec![0.0; n];
    for k in 0..n {
        let lp = cheb_lead(k, bm.lx);
        let lq = cheb_lead(k, bm.ly);
        for i in 0..=k {
            p_coeffs[k][i] = linv[k][i] / lp;
            q_coeffs[k][i] = uinv_t[k][i] / lq;
        }
        h_sq[k] = d[k] / (lp * lq);
    }
    // residual of P B Q^T against diag(h^2); precision exhaustion is reported, not returned
    let mut bio_residual = 0.0f64;
    for k in 0..n {
        let row_start = bio_residual;
        for m in 0..n {
            let mut v = 0.0;
            for i in 0..=k {
                for j in 0..=m {
                    v += p_coeffs[k][i] * b[i][j] * q_coeffs[m][j];
                }
            }
            if k == m {
                v -= h_sq[k];
            }
            bio_residual = bio_residual.max(v.abs() / h_sq[k]);
        }
        if bio_residual >= BIO_TOL && row_start < BIO_TOL {
            return Err(Error::SingularMoment(k));
        }
    }
    Ok(BiorthogonalSystem { n, moments: bm, p_coeffs, q_coeffs, h_sq, bio_residual })
}

fn lower_unit_inverse(l: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        inv[c][c] = 1.0;
        for r in c + 1..n {
            let s: f64 = (c..r).map(|j| l[r][j] * inv[j][c]).sum();
            inv[r][c] = -s;
        }
    }
    inv
}

impl BiorthogonalSystem {
    /// Build the system for `V`, `W`, `tau` at size `n`.
    pub fn new(n: usize, p: &ModelParams) -> Result<Self> {
        biorthogonalize(bimoments(n, n, p)?)
    }

    /// `p_k(x)`.
    pub fn p(&self, k: usize, x: f64) -> f64 {
        let t = self.moments.basis(x);
        (0..=k).map(|i| self.p_coeffs[k][i] * t[i]).sum()
    }

    /// Monomial coefficients of `p_k` (index = power).
    pub fn p_monomial(&self, k: usize) -> Vec<f64> {
        let c = chebyshev_monomial(k + 1);
        let lx = self.moments.lx;
        (0..=k)
            .map(|m| (m..=k).map(|i| self.p_coeffs[k][i] * c[i][m]).sum::<f64>() / lx.powi(m as i32))
            .collect()
    }

    /// Zeros of `p_k`, sorted by real part.
    pub fn zeros(&self, k: usize) -> Result<Vec<C64>> {
        let mut z: Vec<C64> = chebyshev_roots(&self.p_coeffs[k][..=k])?.into_iter().map(|r| r * self.moments.lx).collect();
        z.sort_by(|a, b| a.re.total_cmp(&b.re));
        Ok(z)
    }

    /// `Q_0(x), ..., Q_{n-1}(x)` in units of `exp(log_shift)`.
    pub fn transformed_q_all(&self, x: f64) -> Result<Vec<f64>> {
        let j = self.moments.inner(x)?;
        Ok((0..self.n).map(|k| (0..=k).map(|i| self.q_coeffs[k][i] * j[i]).sum()).collect())
    }

    /// `Q_{k,n}(x) = e^{-n V(x)} int q_k(y) e^{-n(W(y) - tau x y)} dy`, in units of
    /// `exp(log_shift)`.
    pub fn transformed_q(&self, k: usize, x: f64) -> Result<f64> {
        Ok(self.transformed_q_all(x)?[k])
    }

    /// `K_11(x, y) = sum_{k<n} p_k(x) Q_k(y) / h_k^2`.
    pub fn kernel(&self, x: f64, y: f64) -> Result<f64> {
        let q = self.transformed_q_all(y)?;
        Ok((0..self.n).map(|k| self.p(k, x) * q[k] / self.h_sq[k]).sum())
    }

    pub fn kernel_eval(&self, x: f64, y: f64) -> Result<KernelEval> {
        Ok(KernelEval { n: self.n, x, y, value: self.kernel(x, y)? })
    }

    /// `(1/n) K_11(x, x)`.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.kernel(x, x)? / self.n as f64)
    }

    /// `int (1/n) K_11(x, x) dx` on a quadrature grid independent of the bimoment grid.
    pub fn kernel_mass(&self) -> Result<f64> {
        let nodes = half_nodes(self.moments.x_max, PANELS + 11, PANEL_POINTS - 4);
        let vals: Vec<f64> = nodes.par_iter().map(|&(x, _)| self.density(x)).collect::<Result<_>>()?;
        Ok(2.0 * nodes.iter().zip(&vals).map(|((_, w), v)| w * v).sum::<f64>())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelEval {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Zeros of every `p_k` real and simple, and consecutive families interlacing.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroReport {
    /// Largest `|Im|` over all zeros, relative to the window.
    pub max_imag: f64,
    /// Smallest gap between consecutive zeros of one `p_k`, relative to the window.
    pub min_gap: f64,
    /// `interlaced[k]`: zeros of `p_k` and `p_{k+1}` interlace.
    pub interlaced: Vec<bool>,
}

impl ZeroReport {
    pub fn ok(&self) -> bool {
        self.max_imag < 1e-8 && self.min_gap > 1e-10 && self.interlaced.iter().all(|&b| b)
    }
}

pub fn zero_report(sys: &BiorthogonalSystem) -> Result<ZeroReport> {
    let lx = sys.moments.lx;
    let mut max_imag = 0.0f64;
    let mut min_gap = f64::INFINITY;
    let mut zs = Vec::with_capacity(sys.n);
    for k in 0..sys.n {
        let z = sys.zeros(k)?;
        for w in z.windows(2) {
            min_gap = min_gap.min((w[1].re - w[0].re) / lx);
        }
        max_imag = z.iter().fold(max_imag, |m, c| m.max(c.im.abs() / lx));
        zs.push(z.iter().map(|c| c.re).collect::<Vec<f64>>());
    }
    let interlaced = (1..sys.n.saturating_sub(1).max(1))
        .filter(|&k| k + 1 < sys.n)
        .map(|k| {
            let (a, b) = (&zs[k], &zs[k + 1]);
            (0..a.len()).all(|i| b[i] < a[i] && a[i] < b[i + 1])
        })
        .collect();
    Ok(ZeroReport { max_imag, min_gap, interlaced })
}

/// `(1/n) K_11(x, x)` against the equilibrium density of `mu1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityComparison {
    pub n: usize,
    /// `int |(1/n) K_11(x, x) - rho_1(x)| dx` over the support interior.
    pub l1: f64,
    pub sup: f64,
    /// `int (1/n) K_11(x, x) dx` over the real line.
    pub mass: f64,
    /// `(x, (1/n) K_11(x, x), rho_1(x))` at the positive interior cell midpoints.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Compare on the interior of `S(mu1)`: positive cell midpoints, two cells in from each edge.
pub fn compare_density(sys: &BiorthogonalSystem, sol: &EquilibriumSolution) -> Result<DensityComparison> {
    let m = &sol.mu1;
    let dens = m.densities();
    let dmax = dens.iter().cloned().fold(0.0, f64::max);
    let thr = sol.config.solver.support_threshold * dmax;
    let idx: Vec<usize> = (0..m.nodes.len()).filter(|&i| m.nodes[i] > 0.0).collect();
    let inside: Vec<bool> = idx.iter().map(|&i| dens[i] > thr).collect();
    let mut keep = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        let lo = a.saturating_sub(2);
        let hi = (a + 2).min(idx.len() - 1);
        if (lo..=hi).all(|b| inside[b]) {
            keep.push(i);
        }
    }
    let vals: Vec<f64> = keep.par_iter().map(|&i| sys.density(m.nodes[i])).collect::<Result<_>>()?;
    // the interior rho is reported as a density of the normalized measure; K is in units of
    // exp(log_shift) in both p Q and h^2, so the ratio is absolute
    let mut l1 = 0.0;
    let mut sup = 0.0f64;
    let mut samples = Vec::with_capacity(keep.len());
    for (&i, &k) in keep.iter().zip(&vals) {
        let e = (k - dens[i]).abs();
        l1 += 2.0 * e * m.cell_widths[i];
        sup = sup.max(e);
        samples.push((m.nodes[i], k, dens[i]));
    }
    let mass = sys.kernel_mass()?;
    Ok(DensityComparison { n: sys.n, l1, sup, mass, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_tables_agree() {
        let c = chebyshev_monomial(6);
        for &t in &[-0.9, -0.2, 0.4, 0.77] {
            let v = chebyshev_values(t, 6);
            for l in 0..6 {
                let m: f64 = (0..6).map(|k| c[l][k] * t.powi(k as i32)).sum();
                assert!((m - v[l]).abs() < 1e-13);
                assert!((v[l] - (l as f64 * t.acos()).cos()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn colleague_roots() {
        // T_3 has zeros cos((2j+1) pi / 6)
        let r = chebyshev_roots(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        let mut re: Vec<f64> = r.iter().map(|c| c.re).collect();
        re.sort_by(f64::total_cmp);
        let expect = [-(3f64.sqrt()) / 2.0, 0.0, 3f64.sqrt() / 2.0];
        for (a, b) in re.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-13);
        }
        // 2 T_0 + T_1 - T_2 = 3 + t - 2 t^2: zeros -1 and 3/2
        let mut r: Vec<f64> = chebyshev_roots(&[2.0, 1.0, -1.0]).unwrap().iter().map(|c| c.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 1.0).abs() < 1e-13 && (r[1] - 1.5).abs() < 1e-13);
    }

    #[test]
    fn weak_coupling_gives_hermite() {
        // tau -> 0 decouples the weight and p_k tend to monic Hermite for e^{-n x^2 / 2}. B
        // degenerates to rank one (h_k^2 ~ tau^k), so tau = 1e-6 exhausts double precision
        let p = ModelParams::gaussian(0.0, 1e-6).unwrap();
        assert!(matches!(BiorthogonalSystem::new(3, &p), Err(Error::SingularMoment(_))));
        let p = ModelParams::gaussian(0.0, 1e-3).unwrap();
        let sys = BiorthogonalSystem::new(3, &p).unwrap();
        let m = sys.p_monomial(2);
        assert!((m[2] - 1.0).abs() < 1e-10);
        assert!((m[0] + 1.0 / 3.0).abs() < 1e-5, "{m:?}");
        assert!(m[1].abs() < 1e-10);
        let m1 = sys.p_monomial(1);
        assert!(m1[0].abs() < 1e-12 && (m1[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weak_coupling_factorizes_bimoments() {
        let p = ModelParams::gaussian(0.5, 1e-6).unwrap();
        let n = 6;
        let bm = bimoments(n, n, &p).unwrap();
        let rule = gauss_legendre_unit(40);
        let one_d = |l: f64, half: f64, f: &dyn Fn(f64) -> f64| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for q in 0..200 {
                for &(t, w) in &rule {
                    let x = -half + 2.0 * half * (q as f64 + t) / 200.0;
                    let tv = chebyshev_values(x / l, n);
                    for k in 0..n {
                        out[k] += w * 2.0 * half / 200.0 * tv[k] * f(x);
                    }
                }
            }
            out
        };
        let nf = n as f64;
        let a = one_d(bm.lx, bm.x_max, &|x| (-nf * p.v(x)).exp());
        let b = one_d(bm.ly, 4.0, &|y| (-nf * p.w(y)).exp());
        for k in 0..n {
            for l in 0..n {
                let expect = a[k] * b[l] / (a[0] * b[0]);
                assert!((bm.b[k][l] / bm.b[0][0] - expect).abs() < 1e-5, "{k} {l}");
            }
        }
    }

    #[test]
    fn gaussian_system_is_biorthogonal() {
        let p = ModelParams::gaussian(0.0, 1.0).unwrap();
        let sys = BiorthogonalSystem::new(6, &p).unwrap();
        assert!(sys.bio_residual < BIO_TOL, "{}", sys.bio_residual);
        assert!(sys.h_sq.iter().all(|&h| h > 0.0));
        assert!(!sys.moments.precision_warning);
        for k in 0..6 {
            let m = sys.p_monomial(k);
            assert!((m[k] - 1.0).abs() < 1e-9);
        }
        // Fubini: int p_k Q_l dx = delta_kl h_k^2
        let nodes = half_nodes(sys.moments.x_max, 64, 16);
        let mut g = vec![vec![0.0; 6]; 6];
        for &(x, w) in &nodes {
            let q = sys.transformed_q_all(x).unwrap();
            let qm = sys.transformed_q_all(-x).unwrap();
            for k in 0..6 {
                for l in 0..6 {
                    g[k][l] += w * (sys.p(k, x) * q[l] + sys.p(k, -x) * qm[l]);
                }
            }
        }
        for k in 0..6 {
            for l in 0..6 {
                let e = if k == l { sys.h_sq[k] } else { 0.0 };
                assert!((g[k][l] - e).abs() < 1e-7 * sys.h_sq[k], "{k} {l} {}", g[k][l]);
            }
        }
        assert!(zero_report(&sys).unwrap().ok());
        assert!((sys.kernel_mass().unwrap() - 1.0).abs() < 1e-6);
    }
}
