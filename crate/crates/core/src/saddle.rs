//! Saddle points of `W(s) - tau z s`: the three branches `s_j` of `s^3 + alpha s = tau z`,
//! their action values `theta_j`, the constraint density `sigma_2` on the imaginary axis,
//! the external fields `V_1`, `V_3`, and the auxiliary density `sigma_3`.
//!
//! Sheet cuts. For `alpha >= 0`: sheet 1 is cut along `iR` with `|Im z| >= y*`, sheet 2
//! along `R` and those same imaginary rays, sheet 3 along `R`. For `alpha < 0`: sheet 1
//! is cut along `iR`, sheet 2 along `iR` and `|x| >= x*`, sheet 3 along `|x| >= x*`.
//! On the real axis, wherever the roots are real, sheets are labeled by the ordering
//! `W(s_1) - tau x s_1 <= W(s_2) - tau x s_2 <= W(s_3) - tau x s_3`; exact ties go to the
//! larger root.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad;
use crate::C64;
use std::f64::consts::PI;

/// `e^{2 pi i / 3}`.
pub const OMEGA: C64 = C64::new(-0.5, 0.866_025_403_784_438_6);
/// Relative residual bound for roots of the saddle equation.
pub const ROOT_TOL: f64 = 1e-12;
/// Absolute distance under which a point counts as lying on a cut or an axis.
pub const CUT_TOL: f64 = 1e-9;
/// Absolute tolerance of [`sigma2_integral_checks`].
pub const QUAD_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrant {
    I,
    II,
    III,
    IV,
    RealAxis,
    ImagAxis,
}

impl Quadrant {
    pub fn of(z: C64) -> Self {
        if z.im.abs() <= CUT_TOL {
            Quadrant::RealAxis
        } else if z.re.abs() <= CUT_TOL {
            Quadrant::ImagAxis
        } else {
            match (z.re > 0.0, z.im > 0.0) {
                (true, true) => Quadrant::I,
                (false, true) => Quadrant::II,
                (false, false) => Quadrant::III,
                (true, false) => Quadrant::IV,
            }
        }
    }

    /// Power `k` of `omega` in the large-`z` behaviour `s_j ~ omega^k (tau z)^{1/3}`,
    /// for sheets 1, 2, 3. Only meaningful for open quadrants.
    pub fn sheet_powers(self) -> [u32; 3] {
        match self {
            Quadrant::I | Quadrant::RealAxis | Quadrant::ImagAxis => [0, 1, 2],
            Quadrant::II => [1, 0, 2],
            Quadrant::III => [2, 0, 1],
            Quadrant::IV => [0, 2, 1],
        }
    }
}

/// The three saddles at `z`, labeled by sheet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleTriple {
    pub s: [C64; 3],
    pub z: C64,
    pub quadrant: Quadrant,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalAbscissae {
    pub x_star: f64,
    pub y_star: f64,
}

pub fn critical_abscissae(p: &ModelParams) -> CriticalAbscissae {
    let c = |a: f64| (2.0 / p.tau) * (a / 3.0).powf(1.5);
    if p.alpha < 0.0 {
        CriticalAbscissae { x_star: c(-p.alpha), y_star: 0.0 }
    } else {
        CriticalAbscissae { x_star: 0.0, y_star: c(p.alpha) }
    }
}

fn cubic_residual(s: C64, a: f64, q: C64) -> C64 {
    s * s * s + s * a - q
}

fn polish(mut s: C64, a: f64, q: C64) -> C64 {
    for _ in 0..4 {
        let f = cubic_residual(s, a, q);
        let d = s * s * 3.0 + a;
        if d.norm() == 0.0 {
            break;
        }
        let next = s - f / d;
        if cubic_residual(next, a, q).norm() >= f.norm() {
            break;
        }
        s = next;
    }
    s
}

fn cmp_re_im(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Roots of `s^3 + alpha s = tau z`, sorted by real part and then imaginary part.
pub fn cubic_roots(z: C64, p: &ModelParams) -> [C64; 3] {
    depressed_cubic_roots(p.alpha, z * p.tau)
}

/// Roots of `s^3 + a s = q`, polished and sorted as in [`cubic_roots`].
pub fn depressed_cubic_roots(a: f64, q: C64) -> [C64; 3] {
    // Cardano with the cancellation-free choice of square root.
    let half = q * 0.5;
    let disc = (half * half + a * a * a / 27.0).sqrt();
    let t = if (half + disc).norm() >= (half - disc).norm() { half + disc } else { half - disc };
    let mut r = if t.norm() == 0.0 {
        [C64::new(0.0, 0.0); 3]
    } else {
        let u = t.cbrt();
        let v = -a / (u * 3.0);
        [u + v, OMEGA * u + OMEGA.conj() * v, OMEGA.conj() * u + OMEGA * v]
    };
    for s in r.iter_mut() {
        *s = polish(*s, a, q);
    }
    r.sort_by(cmp_re_im);
    r
}

/// Three-term large-`z` expansion of the root `~ omega^k (tau z)^{1/3}`.
pub fn s_expansion(k: u32, z: C64, p: &ModelParams) -> C64 {
    let u = OMEGA.powu(k) * (z * p.tau).cbrt();
    let a = p.alpha;
    u - a / 3.0 / u + a * a * a / 81.0 / u.powu(5)
}

/// Four-term large-`z` expansion of `theta` on the sheet with power `k`.
pub fn theta_expansion(k: u32, z: C64, p: &ModelParams) -> C64 {
    let u = OMEGA.powu(k) * (z * p.tau).cbrt();
    let a = p.alpha;
    let u2 = u * u;
    u2 * u2 * 0.75 - u2 * (a / 2.0) + a * a / 6.0 - a * a * a / 54.0 / u2
}

/// Labeled real saddles at real `x`: all three when the roots are real, else only `s_1`.
pub fn real_saddles(x: f64, p: &ModelParams) -> [Option<f64>; 3] {
    let a = p.alpha;
    let q = p.tau * x;
    let f = |s: f64| p.w(s) - q * s;
    if 4.0 * a * a * a + 27.0 * q * q <= 0.0 {
        let mut r: Vec<f64> = cubic_roots(C64::new(x, 0.0), p).iter().map(|s| s.re).collect();
        for s in r.iter_mut() {
            *s = polish(C64::new(*s, 0.0), a, C64::new(q, 0.0)).re;
        }
        r.sort_by(|u, v| f(*u).total_cmp(&f(*v)).then(v.total_cmp(u)));
        [Some(r[0]), Some(r[1]), Some(r[2])]
    } else {
        // single real root: the one with the smallest imaginary part
        let r = cubic_roots(C64::new(x, 0.0), p);
        let s = r.iter().min_by(|u, v| u.im.abs().total_cmp(&v.im.abs())).unwrap();
        let s = polish(C64::new(s.re, 0.0), a, C64::new(q, 0.0)).re;
        [Some(s), None, None]
    }
}

/// The real global minimizer `s_1(x)` of `W(s) - tau x s`.
pub fn s1_real(x: f64, p: &ModelParams) -> f64 {
    real_saddles(x, p)[0].unwrap()
}

/// Whether the non-real point `z` lies on the imaginary-axis part of the cut of sheet `j`.
fn on_imaginary_cut(j: usize, z: C64, p: &ModelParams) -> bool {
    if z.re.abs() > CUT_TOL || j == 3 {
        return false;
    }
    if p.alpha < 0.0 {
        true
    } else {
        z.im.abs() >= critical_abscissae(p).y_star - CUT_TOL
    }
}

fn best_assignment(targets: &[C64; 3], roots: &[C64; 3]) -> ([C64; 3], f64) {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best = ([roots[0], roots[1], roots[2]], f64::INFINITY);
    for pm in PERMS {
        let d = (0..3).map(|i| (roots[pm[i]] - targets[i]).norm()).fold(0.0, f64::max);
        if d < best.1 {
            best = ([roots[pm[0]], roots[pm[1]], roots[pm[2]]], d);
        }
    }
    best
}

fn min_separation(r: &[C64; 3]) -> f64 {
    (r[0] - r[1]).norm().min((r[0] - r[2]).norm()).min((r[1] - r[2]).norm())
}

/// Labeled saddles at `z` in an open quadrant: matched to the asymptotic table at large
/// radius and continued along the ray towards `z`.
fn quadrant_saddles(z: C64, p: &ModelParams) -> [C64; 3] {
    let quad = Quadrant::of(z);
    let ks = quad.sheet_powers();
    let dir = z / z.norm();
    let r_match = 10.0 * 1f64.max(p.alpha.abs().powf(1.5)) / p.tau;
    let mut r = z.norm().max(r_match);
    let z0 = dir * r;
    let targets = [
        s_expansion(ks[0], z0, p),
        s_expansion(ks[1], z0, p),
        s_expansion(ks[2], z0, p),
    ];
    let (mut cur, _) = best_assignment(&targets, &cubic_roots(z0, p));
    let target_r = z.norm();
    let mut dr = 0.25 * r;
    while r > target_r {
        let rn = (r - dr).max(target_r);
        let roots = cubic_roots(dir * rn, p);
        let (next, moved) = best_assignment(&cur, &roots);
        let sep = min_separation(&roots).min(min_separation(&cur));
        if moved < 0.3 * sep || dr < 1e-14 * r.max(1.0) {
            cur = next;
            r = rn;
            dr *= 1.5;
        } else {
            dr *= 0.5;
        }
    }
    cur
}

/// All three labeled saddles at `z`, or the first sheet whose cut contains `z`.
pub fn saddle_triple(z: C64, p: &ModelParams) -> Result<SaddleTriple> {
    let quadrant = Quadrant::of(z);
    let s = match quadrant {
        Quadrant::RealAxis => {
            let r = real_saddles(z.re, p);
            let mut out = [C64::new(0.0, 0.0); 3];
            for j in 0..3 {
                out[j] = C64::new(r[j].ok_or(Error::Cut(z, j + 1))?, 0.0);
            }
            out
        }
        Quadrant::ImagAxis => {
            for j in 1..=3 {
                if on_imaginary_cut(j, z, p) {
                    return Err(Error::Cut(z, j));
                }
            }
            axis_limit(z, p)
        }
        _ => quadrant_saddles(z, p),
    };
    Ok(SaddleTriple { s, z, quadrant })
}

/// Values on the uncut part of the imaginary axis: continue from the right half-plane
/// and polish at `z`.
fn axis_limit(z: C64, p: &ModelParams) -> [C64; 3] {
    let z = C64::new(0.0, z.im);
    let eps = 1e-6 * z.norm().max(1.0);
    let near = quadrant_saddles(z + eps, p);
    let q = z * p.tau;
    let mut out = near;
    for s in out.iter_mut() {
        *s = polish(*s, p.alpha, q);
    }
    out
}

/// `s_j(z)` for sheet `j` in `1..=3`.
pub fn branch_saddle(j: usize, z: C64, p: &ModelParams) -> Result<C64> {
    assert!((1..=3).contains(&j), "sheet index must be 1, 2 or 3");
    match Quadrant::of(z) {
        Quadrant::RealAxis => real_saddles(z.re, p)[j - 1]
            .map(|s| C64::new(s, 0.0))
            .ok_or(Error::Cut(z, j)),
        Quadrant::ImagAxis => {
            if on_imaginary_cut(j, z, p) {
                Err(Error::Cut(z, j))
            } else {
                Ok(axis_limit(z, p)[j - 1])
            }
        }
        _ => Ok(quadrant_saddles(z, p)[j - 1]),
    }
}

/// `theta = -W(s) + tau z s` at a given saddle.
pub fn theta_at(s: C64, z: C64, p: &ModelParams) -> C64 {
    -p.w_c(s) + z * s * p.tau
}

/// `theta_j(z) = -W(s_j(z)) + tau z s_j(z)`.
pub fn theta(j: usize, z: C64, p: &ModelParams) -> Result<C64> {
    let s = branch_saddle(j, z, p)?;
    Ok(theta_at(s, z, p))
}

/// Density of `sigma_2` at `z = iy`: `(tau/pi) max Re s` over the roots, zero on `|y| < y*`.
pub fn sigma2_density(y: f64, p: &ModelParams) -> f64 {
    if y.abs() < critical_abscissae(p).y_star {
        return 0.0;
    }
    let r = cubic_roots(C64::new(0.0, y.abs()), p);
    (p.tau / PI) * r.iter().map(|s| s.re).fold(0.0, f64::max)
}

/// `V_1(x) = V(x) + min_s (W(s) - tau x s) = V(x) - theta_1(x)`.
pub fn field_v1(x: f64, p: &ModelParams) -> f64 {
    let s = s1_real(x, p);
    p.v(x) + p.w(s) - p.tau * x * s
}

/// `V_3(x) = theta_2(x) - theta_3(x)` on `(-x*, x*)`, zero elsewhere.
pub fn field_v3(x: f64, p: &ModelParams) -> f64 {
    if p.alpha >= 0.0 || x.abs() >= critical_abscissae(p).x_star {
        return 0.0;
    }
    match real_saddles(x, p) {
        [_, Some(s2), Some(s3)] => {
            let f = |s: f64| p.w(s) - p.tau * x * s;
            (f(s3) - f(s2)).max(0.0)
        }
        _ => 0.0,
    }
}

/// Density of `sigma_3`: `(tau/pi) Im s_{2,+}(x)`, zero on `(-x*, x*)`.
pub fn sigma3_density(x: f64, p: &ModelParams) -> f64 {
    let q = p.tau * x;
    if 4.0 * p.alpha.powi(3) + 27.0 * q * q <= 0.0 {
        return 0.0;
    }
    let r = cubic_roots(C64::new(x, 0.0), p);
    (p.tau / PI) * r.iter().map(|s| s.im.abs()).fold(0.0, f64::max)
}

/// `d s_1 / dx = tau / (3 s_1^2 + alpha)` on the real axis.
pub fn s1_real_derivative(x: f64, p: &ModelParams) -> f64 {
    let s = s1_real(x, p);
    p.tau / (3.0 * s * s + p.alpha)
}

/// Residuals of the two closed-form integrals against `sigma_2`:
/// `|int dsigma_2(z)/(x-z)^2 + tau s_1'(x)|` and `|int dsigma_2(z)/(x-z^2) - tau s_1(sqrt x)/sqrt x|`.
pub fn sigma2_integral_checks(x: f64, p: &ModelParams) -> Result<(f64, f64)> {
    assert!(x > 0.0, "x must be positive");
    let (i1, i2) = sigma2_integrals(x, p)?;
    let e1 = -p.tau * s1_real_derivative(x, p);
    let sx = x.sqrt();
    let e2 = p.tau * s1_real(sx, p) / sx;
    Ok(((i1 - e1).abs(), (i2 - e2).abs()))
}

/// The two integrals `int dsigma_2(z)/(x-z)^2` and `int dsigma_2(z)/(x-z^2)` over `iR`.
pub fn sigma2_integrals(x: f64, p: &ModelParams) -> Result<(f64, f64)> {
    let ys = critical_abscissae(p).y_star;
    let t0 = ys.max(1.0);
    let g = |t: f64| {
        let d = sigma2_density(t, p);
        let x2 = x * x;
        let t2 = t * t;
        C64::new(d * (x2 - t2) / ((x2 + t2) * (x2 + t2)), d / (x + t2))
    };
    // core: t = y* + u^2 removes the square-root onset at y*
    let umax = (t0 - ys).sqrt();
    let (core, _) = quad::adaptive(|u| g(ys + u * u) * (2.0 * u), 0.0, umax, QUAD_TOL * 0.1, 1e-13, 4000)?;
    // tail: t = t0 / s^3 makes the t^{-5/3} decay smooth at s = 0
    let (tail, _) = quad::adaptive(
        |s| {
            if s == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                g(t0 / (s * s * s)) * (3.0 * t0 / s.powi(4))
            }
        },
        0.0,
        1.0,
        QUAD_TOL * 0.1,
        1e-13,
        4000,
    )?;
    let total = (core + tail) * 2.0;
    Ok((total.re, total.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, t: f64) -> ModelParams {
        ModelParams::gaussian(a, t).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn cubic_roots_trivial_cases() {
        let i = C64::new(0.0, 1.0);
        let r = cubic_roots(C64::new(0.0, 0.0), &params(1.0, 1.0));
        assert!(close(r[0], -i, 1e-14) && close(r[1], 0.0.into(), 1e-14) && close(r[2], i, 1e-14));
        let r = cubic_roots(C64::new(0.0, 0.0), &params(-1.0, 1.0));
        assert!(close(r[0], (-1.0).into(), 1e-14) && close(r[2], 1.0.into(), 1e-14));
        let r = cubic_roots(C64::new(1.0, 0.0), &params(0.0, 1.0));
        assert!(close(r[0], OMEGA.conj(), 1e-14));
        assert!(close(r[1], OMEGA, 1e-14));
        assert!(close(r[2], 1.0.into(), 1e-14));
    }

    #[test]
    fn branch_values_on_the_real_axis() {
        let p = params(-1.0, 1.0);
        let s = branch_saddle(1, C64::new(2.0, 0.0), &p).unwrap();
        assert!((s.re - 1.521_379_706_804_567_5).abs() < 1e-12 && s.im == 0.0);
        let s = branch_saddle(3, C64::new(0.1, 0.0), &p).unwrap();
        assert!((s.re + 0.101_031_257_881_010_8).abs() < 1e-12);
        let s = branch_saddle(1, C64::new(8.0, 0.0), &params(0.0, 1.0)).unwrap();
        assert!((s.re - 2.0).abs() < 1e-13);
    }

    #[test]
    fn cuts_are_reported() {
        let p = params(1.0, 1.0);
        assert!(matches!(branch_saddle(2, C64::new(3.0, 0.0), &p), Err(Error::Cut(_, 2))));
        assert!(matches!(branch_saddle(1, C64::new(0.0, 2.0), &p), Err(Error::Cut(_, 1))));
        // below y* the imaginary axis is not a cut
        assert!(branch_saddle(1, C64::new(0.0, 0.2), &p).is_ok());
        let p = params(-1.0, 1.0);
        assert!(matches!(branch_saddle(1, C64::new(0.0, 0.2), &p), Err(Error::Cut(_, 1))));
        assert!(branch_saddle(3, C64::new(0.0, 0.2), &p).is_ok());
    }

    #[test]
    fn theta_values() {
        let p = params(-1.0, 1.0);
        let z0 = C64::new(0.0, 0.0);
        assert!(theta(3, z0, &p).unwrap().norm() < 1e-15);
        assert!((theta(2, z0, &p).unwrap().re - 0.25).abs() < 1e-14);
        let sum: C64 = (1..=3).map(|j| theta(j, C64::new(0.3, 0.0), &p).unwrap()).sum();
        assert!((sum.re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn critical_abscissae_values() {
        let c = critical_abscissae(&params(-3.0, 2.0));
        assert!((c.x_star - 1.0).abs() < 1e-15 && c.y_star == 0.0);
        let c = critical_abscissae(&params(3.0, 2.0));
        assert!((c.y_star - 1.0).abs() < 1e-15 && c.x_star == 0.0);
        let c = critical_abscissae(&params(0.0, 0.7));
        assert!(c.x_star == 0.0 && c.y_star == 0.0);
    }

    #[test]
    fn sigma2_values() {
        let d = sigma2_density(1.0, &params(0.0, 1.0));
        assert!((d - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-14);
        assert_eq!(sigma2_density(0.2, &params(1.0, 1.0)), 0.0);
        assert!((sigma2_density(0.0, &params(-1.0, 1.0)) - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn field_values() {
        assert!(field_v1(0.0, &params(0.0, 1.0)).abs() < 1e-15);
        assert!((field_v1(0.0, &params(-1.0, 1.0)) + 0.25).abs() < 1e-15);
        assert_eq!(field_v3(0.4, &params(2.0, 1.0)), 0.0);
        assert!((field_v3(0.0, &params(-1.0, 1.0)) - 0.25).abs() < 1e-15);
        let xs = critical_abscissae(&params(-1.0, 1.0)).x_star;
        assert!(field_v3(xs * (1.0 - 1e-9), &params(-1.0, 1.0)) < 1e-10);
        // large-x behaviour at alpha = 0
        let p = params(0.0, 1.0);
        let x: f64 = 1e3;
        assert!((field_v1(x, &p) - (x * x / 2.0 - 0.75 * x.powf(4.0 / 3.0))).abs() < 1e-6);
    }

    #[test]
    fn sigma3_values() {
        assert_eq!(sigma3_density(0.1, &params(-1.0, 1.0)), 0.0);
        let d = sigma3_density(1.0, &params(0.0, 1.0));
        assert!((d - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-14);
        let p = params(-0.5, 1.3);
        assert_eq!(sigma3_density(2.0, &p), sigma3_density(-2.0, &p));
    }

    #[test]
    fn special_integrals_at_alpha_zero() {
        let p = params(0.0, 1.0);
        let (i1, i2) = sigma2_integrals(1.0, &p).unwrap();
        assert!((i1 + 1.0 / 3.0).abs() < 1e-7, "{i1}");
        assert!((i2 - 1.0).abs() < 1e-7, "{i2}");
        let (r1, r2) = sigma2_integral_checks(2.0, &params(1.0, 1.0)).unwrap();
        assert!(r1 < 1e-6 && r2 < 1e-6);
    }

    #[test]
    fn quadrant_table_at_large_z() {
        let p = params(0.7, 1.2);
        for z in [C64::new(300.0, 200.0), C64::new(-300.0, 200.0), C64::new(-300.0, -200.0), C64::new(300.0, -200.0)] {
            let t = saddle_triple(z, &p).unwrap();
            let ks = t.quadrant.sheet_powers();
            for j in 0..3 {
                assert!((t.s[j] - s_expansion(ks[j], z, &p)).norm() < 1e-6);
            }
        }
    }
}
