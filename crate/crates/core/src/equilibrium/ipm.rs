//! Primal-dual interior-point method (Mehrotra predictor-corrector) for
//!
//! ```text
//! minimize 1/2 x'Hx + c'x   subject to   sum_{i in B_k} x_i = m_k,   0 <= x <= u
//! ```
//!
//! with disjoint index blocks `B_k` and upper bounds `u_i` that may be infinite. `H` only
//! needs to be positive definite on the null space of the block-sum constraints; the
//! Newton matrix is regularized with `rho A'A`, which leaves the solution unchanged.

use crate::error::{Error, Result};
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use std::ops::Range;

pub struct QpProblem<'a> {
    pub h: &'a Mat<f64>,
    pub c: &'a [f64],
    pub blocks: &'a [Range<usize>],
    pub masses: &'a [f64],
    /// `f64::INFINITY` where there is no upper bound. Must be positive.
    pub upper: &'a [f64],
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// Multipliers of the block-sum constraints.
    pub y: Vec<f64>,
    /// Multipliers of `x >= 0`.
    pub z: Vec<f64>,
    /// Multipliers of `x <= u` (zero where unbounded).
    pub s: Vec<f64>,
    pub iterations: usize,
    /// Final max-norm of the dual residual, relative to `1 + |c|_inf`.
    pub dual_residual: f64,
    /// Final mean complementarity product.
    pub mu: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct QpOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions { tol: 1e-12, max_iter: 200 }
    }
}

fn max_step(v: &[f64], dv: &[f64], mask: Option<&[bool]>) -> f64 {
    let mut a = 1.0f64;
    for i in 0..v.len() {
        if mask.map_or(true, |m| m[i]) && dv[i] < 0.0 {
            a = a.min(-v[i] / dv[i]);
        }
    }
    a
}

pub fn solve_qp(prob: &QpProblem, opts: QpOptions) -> Result<QpSolution> {
    let n = prob.c.len();
    let nb = prob.blocks.len();
    let capped: Vec<bool> = prob.upper.iter().map(|u| u.is_finite()).collect();
    let ncap = capped.iter().filter(|&&b| b).count();
    let block_of = {
        let mut v = vec![usize::MAX; n];
        for (k, r) in prob.blocks.iter().enumerate() {
            for i in r.clone() {
                v[i] = k;
            }
        }
        v
    };
    // start: uniform inside each block, strictly inside the box
    let mut x = vec![0.0; n];
    for (k, r) in prob.blocks.iter().enumerate() {
        let v = prob.masses[k] / r.len() as f64;
        for i in r.clone() {
            x[i] = if capped[i] { v.min(0.5 * prob.upper[i]) } else { v };
        }
    }
    // slack of the upper bound, carried as its own iterate so it keeps full relative
    // precision when x approaches a large cap
    let mut t: Vec<f64> = (0..n).map(|i| if capped[i] { prob.upper[i] - x[i] } else { 1.0 }).collect();
    let mut z = vec![1.0; n];
    let mut s: Vec<f64> = capped.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
    let mut y = vec![0.0; nb];
    let hmax = (0..n).map(|i| prob.h[(i, i)].abs()).fold(0.0, f64::max);
    let mut rho = 4.0 * hmax + 1.0;
    let cscale = 1.0 + prob.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mscale = prob.masses.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);

    let mut hx = vec![0.0; n];
    let mut iterations = 0;
    let mut last_rd;
    let mut last_mu;
    loop {
        // residuals
        let xm = faer::col::Col::from_fn(n, |i| x[i]);
        let hxc = prob.h * &xm;
        for i in 0..n {
            hx[i] = hxc[i];
        }
        let rd: Vec<f64> = (0..n).map(|i| hx[i] + prob.c[i] - y[block_of[i]] - z[i] + s[i]).collect();
        let rp: Vec<f64> = (0..nb).map(|k| prob.blocks[k].clone().map(|i| x[i]).sum::<f64>() - prob.masses[k]).collect();
        let comp: f64 = (0..n).map(|i| x[i] * z[i] + if capped[i] { t[i] * s[i] } else { 0.0 }).sum();
        let mu = comp / (n + ncap) as f64;
        let rd_norm = rd.iter().fold(0.0f64, |m, v| m.max(v.abs())) / cscale;
        let rp_norm = rp.iter().fold(0.0f64, |m, v| m.max(v.abs())) / mscale;
        last_rd = rd_norm;
        last_mu = mu;
        if rd_norm < opts.tol && rp_norm < 1e-13 && mu < opts.tol * 1e-2 {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::MaxIter(format!(
                "interior-point solver: {iterations} iterations, dual residual {rd_norm:.3e}, mu {mu:.3e}"
            )));
        }
        iterations += 1;

        let diag: Vec<f64> = (0..n).map(|i| z[i] / x[i] + if capped[i] { s[i] / t[i] } else { 0.0 }).collect();
        if diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::NonConvergence(format!("interior-point iterate left the interior at iteration {iterations}")));
        }
        let llt = loop {
            let m = Mat::from_fn(n, n, |i, j| {
                let mut v = prob.h[(i, j)];
                if block_of[i] == block_of[j] {
                    v += rho;
                }
                if i == j {
                    v += diag[i];
                }
                v
            });
            match m.llt(Side::Lower) {
                Ok(l) => break l,
                Err(_) => {
                    rho *= 10.0;
                    if rho > 1e20 {
                        return Err(Error::MaxIter("interior-point Newton matrix is not positive definite".into()));
                    }
                }
            }
        };
        // D^{-1} A'
        let at = Mat::from_fn(n, nb, |i, k| if block_of[i] == k { 1.0 } else { 0.0 });
        let dinv_at = llt.solve(&at);
        let schur = Mat::from_fn(nb, nb, |k, l| prob.blocks[k].clone().map(|i| dinv_at[(i, l)]).sum::<f64>());
        let schur_llt = schur.llt(Side::Lower).map_err(|_| Error::MaxIter("singular Schur complement".into()))?;

        let newton = |rc_z: &[f64], rc_s: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
            // Z dx + X dz = rc_z,  T ds - S dx = rc_s (capped only)
            let rhs = Mat::from_fn(n, 1, |i, _| {
                let mut r = -rd[i] + rc_z[i] / x[i];
                if capped[i] {
                    r -= rc_s[i] / t[i];
                }
                r - rho * rp[block_of[i]]
            });
            let u = llt.solve(&rhs);
            let sr = Mat::from_fn(nb, 1, |k, _| -rp[k] - prob.blocks[k].clone().map(|i| u[(i, 0)]).sum::<f64>());
            let dy = schur_llt.solve(&sr);
            let dx: Vec<f64> = (0..n).map(|i| u[(i, 0)] + (0..nb).map(|k| dinv_at[(i, k)] * dy[(k, 0)]).sum::<f64>()).collect();
            let dz: Vec<f64> = (0..n).map(|i| (rc_z[i] - z[i] * dx[i]) / x[i]).collect();
            let ds: Vec<f64> = (0..n).map(|i| if capped[i] { (rc_s[i] + s[i] * dx[i]) / t[i] } else { 0.0 }).collect();
            (dx, (0..nb).map(|k| dy[(k, 0)]).collect(), dz, ds)
        };
        let steps = |dx: &[f64], dz: &[f64], ds: &[f64]| {
            let dt: Vec<f64> = dx.iter().map(|v| -v).collect();
            let ap = max_step(&x, dx, None).min(max_step(&t, &dt, Some(&capped)));
            let ad = max_step(&z, dz, None).min(max_step(&s, ds, Some(&capped)));
            (ap, ad)
        };
        // predictor
        let rc_z: Vec<f64> = (0..n).map(|i| -x[i] * z[i]).collect();
        let rc_s: Vec<f64> = (0..n).map(|i| if capped[i] { -t[i] * s[i] } else { 0.0 }).collect();
        let (dxa, _, dza, dsa) = newton(&rc_z, &rc_s);
        let (ap, ad) = steps(&dxa, &dza, &dsa);
        let comp_aff: f64 = (0..n)
            .map(|i| {
                let mut v = (x[i] + ap * dxa[i]) * (z[i] + ad * dza[i]);
                if capped[i] {
                    v += (t[i] - ap * dxa[i]) * (s[i] + ad * dsa[i]);
                }
                v
            })
            .sum();
        let sigma = (comp_aff / comp).powi(3).clamp(0.0, 1.0);
        // corrector
        let target = sigma * mu;
        let rc_z: Vec<f64> = (0..n).map(|i| -x[i] * z[i] + target - dxa[i] * dza[i]).collect();
        let rc_s: Vec<f64> = (0..n)
            .map(|i| if capped[i] { -t[i] * s[i] + target + dxa[i] * dsa[i] } else { 0.0 })
            .collect();
        let (dx, dy, dz, ds) = newton(&rc_z, &rc_s);
        let (ap, ad) = steps(&dx, &dz, &ds);
        let ap = (0.995 * ap).min(1.0);
        let ad = (0.995 * ad).min(1.0);
        for i in 0..n {
            x[i] += ap * dx[i];
            if capped[i] {
                t[i] -= ap * dx[i];
            }
            z[i] += ad * dz[i];
            s[i] += ad * ds[i];
        }
        for k in 0..nb {
            y[k] += ad * dy[k];
        }
    }
    Ok(QpSolution { x, y, z, s, iterations, dual_residual: last_rd, mu: last_mu })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_and_simplex_constrained_quadratic() {
        // minimize 1/2 |x - p|^2 on {sum x = 1, 0 <= x <= 0.4}: projection onto a capped simplex
        let p = [0.9, 0.5, -0.2, 0.1];
        let h = Mat::<f64>::identity(4, 4);
        let c: Vec<f64> = p.iter().map(|v| -v).collect();
        let upper = [0.4; 4];
        let blocks = [0..4];
        let sol = solve_qp(
            &QpProblem { h: &h, c: &c, blocks: &blocks, masses: &[1.0], upper: &upper },
            QpOptions::default(),
        )
        .unwrap();
        // KKT: x = clamp(p + y, 0, 0.4) with y fixed by the mass, here y = 0.1
        let lam = sol.y[0];
        assert!((lam - 0.1).abs() < 1e-9);
        let expect: Vec<f64> = p.iter().map(|v| (v + lam).clamp(0.0, 0.4)).collect();
        for i in 0..4 {
            assert!((sol.x[i] - expect[i]).abs() < 1e-9);
        }
        assert!((sol.x.iter().sum::<f64>() - 1.0).abs() < 1e-13);
    }
}
