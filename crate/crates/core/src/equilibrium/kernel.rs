//! Logarithmic interaction of piecewise-constant densities.
//!
//! Matrix entries are exact cell averages of `-log|u - v|` (both cells on one axis) or of
//! `-log|x - i t| = -1/2 log(x^2 + t^2)` (a real cell against an imaginary one). Nearby
//! pairs use closed-form antiderivatives; well separated pairs use tensor Gauss–Legendre,
//! whose order is picked from the separation ratio.

use crate::quad::gauss_legendre_unit;
use faer::Mat;
use rayon::prelude::*;
use std::sync::OnceLock;

fn rules() -> &'static [Vec<(f64, f64)>; 3] {
    static R: OnceLock<[Vec<(f64, f64)>; 3]> = OnceLock::new();
    R.get_or_init(|| [gauss_legendre_unit(3), gauss_legendre_unit(4), gauss_legendre_unit(8)])
}

fn rule_for(ratio: f64) -> Option<&'static [(f64, f64)]> {
    let r = rules();
    if ratio > 100.0 {
        Some(&r[0])
    } else if ratio > 20.0 {
        Some(&r[1])
    } else if ratio > 3.0 {
        Some(&r[2])
    } else {
        None
    }
}

/// `G'' = log|u|`: `G(u) = u^2/2 log|u| - 3u^2/4`.
fn g_same(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u * (0.5 * u.abs().ln() - 0.75)
    }
}

/// `d^2 F / dx dt = log(x^2 + t^2)`.
fn f_cross(x: f64, t: f64) -> f64 {
    if x == 0.0 && t == 0.0 {
        return 0.0;
    }
    let mut v = x * t * (x * x + t * t).ln() - 3.0 * x * t;
    if x != 0.0 {
        v += x * x * (t / x).atan();
    }
    if t != 0.0 {
        v += t * t * (x / t).atan();
    }
    v
}

/// Mean of `-log|u - v|` over `[a1, b1] x [a2, b2]`.
pub fn avg_same(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let d1 = b1 - a1;
    let d2 = b2 - a2;
    let sep = (a2 - b1).max(a1 - b2).max(0.0);
    match rule_for(sep / d1.max(d2)) {
        Some(rule) => {
            let mut s = 0.0;
            for &(x, wx) in rule {
                let u = a1 + d1 * x;
                for &(y, wy) in rule {
                    s -= wx * wy * (u - (a2 + d2 * y)).abs().ln();
                }
            }
            s
        }
        None => {
            let i = g_same(b1 - a2) - g_same(a1 - a2) - g_same(b1 - b2) + g_same(a1 - b2);
            -i / (d1 * d2)
        }
    }
}

fn dist_to_origin(a: f64, b: f64) -> f64 {
    if a <= 0.0 && b >= 0.0 {
        0.0
    } else {
        a.abs().min(b.abs())
    }
}

/// Mean of `-1/2 log(x^2 + t^2)` over `x in [a1, b1]`, `t in [a2, b2]`.
pub fn avg_cross(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let d1 = b1 - a1;
    let d2 = b2 - a2;
    let dist = dist_to_origin(a1, b1).hypot(dist_to_origin(a2, b2));
    match rule_for(dist / d1.max(d2)) {
        Some(rule) => {
            let mut s = 0.0;
            for &(x, wx) in rule {
                let u = a1 + d1 * x;
                for &(y, wy) in rule {
                    let v = a2 + d2 * y;
                    s -= 0.5 * wx * wy * (u * u + v * v).ln();
                }
            }
            s
        }
        None => {
            let i = f_cross(b1, b2) - f_cross(a1, b2) - f_cross(b1, a2) + f_cross(a1, a2);
            -0.5 * i / (d1 * d2)
        }
    }
}

/// Symmetrized same-axis kernel on half-line cells: entry `(i, j)` couples cell `i` with
/// cell `j` and its mirror image.
pub fn same_axis_matrix(edges: &[f64]) -> Mat<f64> {
    let n = edges.len() - 1;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| {
                    avg_same(edges[i], edges[i + 1], edges[j], edges[j + 1])
                        + avg_same(edges[i], edges[i + 1], -edges[j + 1], -edges[j])
                })
                .collect()
        })
        .collect();
    Mat::from_fn(n, n, |i, j| if j <= i { rows[i][j] } else { rows[j][i] })
}

/// Symmetrized real-by-imaginary kernel on half-line cells (all four mirror images
/// coincide, hence the factor 2).
pub fn cross_matrix(real_edges: &[f64], imag_edges: &[f64]) -> Mat<f64> {
    let n = real_edges.len() - 1;
    let m = imag_edges.len() - 1;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| 2.0 * avg_cross(real_edges[i], real_edges[i + 1], imag_edges[j], imag_edges[j + 1]))
                .collect()
        })
        .collect();
    Mat::from_fn(n, m, |i, j| rows[i][j])
}

/// `int_a^b -log|x - s| ds`.
pub fn cell_potential_same(a: f64, b: f64, x: f64) -> f64 {
    let d = b - a;
    let sep = (a - x).max(x - b).max(0.0);
    if sep > 4.0 * d {
        rules()[2].iter().map(|&(u, w)| -w * d * (x - (a + d * u)).abs().ln()).sum()
    } else {
        let prim = |u: f64| if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
        -(prim(b - x) - prim(a - x))
    }
}

/// `int_a^b -1/2 log(x^2 + t^2) dt`.
pub fn cell_potential_cross(a: f64, b: f64, x: f64) -> f64 {
    let d = b - a;
    let dist = dist_to_origin(a, b).hypot(x);
    if dist > 4.0 * d {
        rules()[2]
            .iter()
            .map(|&(u, w)| {
                let t = a + d * u;
                -0.5 * w * d * (x * x + t * t).ln()
            })
            .sum()
    } else {
        let ax = x.abs();
        let prim = |t: f64| {
            if ax == 0.0 {
                if t == 0.0 {
                    0.0
                } else {
                    2.0 * (t * t.abs().ln() - t)
                }
            } else {
                t * (ax * ax + t * t).ln() - 2.0 * t + 2.0 * ax * (t / ax).atan()
            }
        };
        -0.5 * (prim(b) - prim(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_real;

    fn brute_same(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
        let inner = |x: f64| cell_potential_same(a2, b2, x);
        adaptive_real(inner, a1, b1, 1e-14, 1e-13, 4000).unwrap().0 / ((b1 - a1) * (b2 - a2))
    }

    #[test]
    fn point_potentials_match_quadrature() {
        for &(a, b, x) in &[(0.0, 1.0, 0.3), (0.2, 0.7, 2.0), (-1.0, 1.0, 0.0), (3.0, 3.5, 100.0)] {
            let e = cell_potential_same(a, b, x);
            let mut q = adaptive_real(|s| -(x - s).abs().ln(), a, x.clamp(a, b), 1e-14, 1e-13, 4000).unwrap().0;
            q += adaptive_real(|s| -(x - s).abs().ln(), x.clamp(a, b), b, 1e-14, 1e-13, 4000).unwrap().0;
            assert!((e - q).abs() < 1e-10, "{a} {b} {x}");
            let e = cell_potential_cross(a, b, x + 0.1);
            let q = adaptive_real(|t| -0.5 * ((x + 0.1) * (x + 0.1) + t * t).ln(), a, b, 1e-14, 1e-13, 4000).unwrap().0;
            assert!((e - q).abs() < 1e-10, "{a} {b} {x}");
        }
    }

    #[test]
    fn diagonal_is_minus_log_width_plus_three_halves() {
        for &h in &[1e-3, 0.37, 12.0] {
            let v = avg_same(2.0, 2.0 + h, 2.0, 2.0 + h);
            assert!((v - (-(h as f64).ln() + 1.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn same_axis_matches_nested_quadrature() {
        for &(a1, b1, a2, b2) in &[(0.0, 0.1, 0.1, 0.3), (0.0, 0.1, 0.5, 0.6), (1.0, 2.0, 40.0, 41.0), (0.0, 0.2, -0.2, 0.0)] {
            let e = avg_same(a1, b1, a2, b2);
            assert!((e - brute_same(a1, b1, a2, b2)).abs() < 1e-11, "{a1} {b1} {a2} {b2}");
        }
    }

    #[test]
    fn cross_matches_nested_quadrature() {
        for &(a1, b1, a2, b2) in &[(0.0, 0.1, 0.0, 0.2), (0.3, 0.5, 0.0, 0.1), (0.0, 0.1, 5.0, 5.5), (2.0, 3.0, 1.0, 1.5)] {
            let e = avg_cross(a1, b1, a2, b2);
            let inner = |x: f64| cell_potential_cross(a2, b2, x);
            let b = adaptive_real(inner, a1, b1, 1e-14, 1e-13, 4000).unwrap().0 / ((b1 - a1) * (b2 - a2));
            assert!((e - b).abs() < 1e-11, "{a1} {b1} {a2} {b2}: {e} vs {b}");
        }
    }
}
