//! Quadrature helpers: fixed Gauss–Legendre rules (nodes from `gauss-quad`) and a
//! globally adaptive Gauss–Kronrod 7/15 integrator for complex integrands.

use crate::error::{Error, Result};
use crate::C64;
use gauss_quad::legendre::GaussLegendre;
use std::collections::BinaryHeap;
use std::num::NonZeroUsize;

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`, ordered by node.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    let mut v: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<const N: usize, F: FnMut(f64) -> [C64; N]>(f: &mut F, a: f64, b: f64) -> ([C64; N], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc.map(|v| v * WGK[7]);
    let mut rg = fc.map(|v| v * WG[3]);
    for j in 0..7 {
        let dx = h * XGK[j];
        let lo = f(c - dx);
        let hi = f(c + dx);
        for i in 0..N {
            let s = lo[i] + hi[i];
            rk[i] += s * WGK[j];
            if j % 2 == 1 {
                rg[i] += s * WG[j / 2];
            }
        }
    }
    let mut err = 0.0f64;
    for i in 0..N {
        err = err.max(((rk[i] - rg[i]) * h).norm());
    }
    (rk.map(|v| v * h), err)
}

struct Seg<const N: usize> {
    a: f64,
    b: f64,
    val: [C64; N],
    err: f64,
}
impl<const N: usize> PartialEq for Seg<N> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<const N: usize> Eq for Seg<N> {}
impl<const N: usize> PartialOrd for Seg<N> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<const N: usize> Ord for Seg<N> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Adaptive integral of a vector-valued `f` over `[a, b]`. The error of a segment is the
/// largest component error; iteration stops when the summed error is below
/// `max(abs_tol, rel_tol * max_i |I_i|)` and fails after `max_segments` bisections.
pub fn adaptive_n<const N: usize, F: FnMut(f64) -> [C64; N]>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<([C64; N], f64)> {
    let size = |v: &[C64; N]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(&mut f, a, b);
    let mut total = v;
    let mut err = e;
    heap.push(Seg { a, b, val: v, err: e });
    let mut n = 1;
    while err > abs_tol.max(rel_tol * size(&total)) {
        if n >= max_segments {
            return Err(Error::Quadrature(format!(
                "error estimate {err:.3e} after {n} segments on [{a}, {b}]"
            )));
        }
        let s = heap.pop().unwrap();
        let m = 0.5 * (s.a + s.b);
        let (v1, e1) = gk15(&mut f, s.a, m);
        let (v2, e2) = gk15(&mut f, m, s.b);
        for i in 0..N {
            total[i] += v1[i] + v2[i] - s.val[i];
        }
        err += e1 + e2 - s.err;
        heap.push(Seg { a: s.a, b: m, val: v1, err: e1 });
        heap.push(Seg { a: m, b: s.b, val: v2, err: e2 });
        n += 1;
    }
    // resum in a fixed order to shed rounding in the running totals
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut total = [C64::new(0.0, 0.0); N];
    let mut err = 0.0;
    for s in &segs {
        for i in 0..N {
            total[i] += s.val[i];
        }
        err += s.err;
    }
    Ok((total, err))
}

/// Adaptive integral of a complex scalar integrand; see [`adaptive_n`].
pub fn adaptive<F: FnMut(f64) -> C64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<(C64, f64)> {
    let (v, e) = adaptive_n(|x| [f(x)], a, b, abs_tol, rel_tol, max_segments)?;
    Ok((v[0], e))
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<(f64, f64)> {
    let (v, e) = adaptive(|x| C64::new(f(x), 0.0), a, b, abs_tol, rel_tol, max_segments)?;
    Ok((v.re, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let r = gauss_legendre_unit(6);
        let s: f64 = r.iter().map(|&(x, w)| w * x.powi(11)).sum();
        assert!((s - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let (v, _) = adaptive_real(|x| x.sqrt().recip(), 0.0, 1.0, 1e-10, 1e-12, 2000).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn adaptive_complex_oscillatory() {
        let (v, _) = adaptive(|x| C64::new(0.0, 7.0 * x).exp(), 0.0, 1.0, 1e-13, 1e-13, 200).unwrap();
        let exact = (C64::new(0.0, 7.0).exp() - 1.0) / C64::new(0.0, 7.0);
        assert!((v - exact).norm() < 1e-12);
    }
}
