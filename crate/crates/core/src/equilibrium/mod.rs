//! Discretized three-measure equilibrium problem.
//!
//! All three measures are even, so each is represented by its restriction to a half-line
//! mesh (`[lo, end]` on the real axis for `mu1` and `mu3`, `t >= 0` on `iR` for `mu2`). A half
//! weight `w_i` puts mass `w_i` on cell `i` and again on its mirror image; the half masses
//! are therefore `1/2, 1/3, 1/6`. Kernel matrices hold exact cell averages of the log
//! kernel summed over mirror images, so the quadratic form below is the discrete energy
//! itself (not an approximation of it by point evaluations).

pub mod ipm;
pub mod kernel;
pub mod mesh;
mod support;

pub use support::{el_residuals, extract_supports, fit_edge_exponent, Edge, EdgeFit, ELReport, SupportSet};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad::gauss_legendre_unit;
use crate::saddle::{critical_abscissae, field_v1, field_v3, sigma2_density};
use crate::C64;
use faer::Mat;
use ipm::{solve_qp, QpOptions, QpProblem};
use mesh::{MeshSpec, Zone};
use std::ops::Range;

/// Half masses of `mu1, mu2, mu3`.
pub const HALF_MASS: [f64; 3] = [0.5, 1.0 / 3.0, 1.0 / 6.0];

const TAIL_GRADE: f64 = 0.06;
const EDGE_ZONE_CELLS: usize = 40;
/// Spacing reduction of the origin zone added when supports touch at the origin.
const ORIGIN_ZONE_REFINE: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Real,
    Imaginary,
}

/// A symmetric discrete measure. For `Axis::Imaginary` the node `t` stands for `it`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure {
    pub axis: Axis,
    pub nodes: Vec<f64>,
    pub cell_widths: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GridMeasure {
    /// Mirror a half-line measure given by its cell edges and half weights.
    pub fn from_half(axis: Axis, edges: &[f64], half_weights: &[f64]) -> Self {
        let n = half_weights.len();
        let mut nodes = Vec::with_capacity(2 * n);
        let mut cell_widths = Vec::with_capacity(2 * n);
        let mut weights = Vec::with_capacity(2 * n);
        for i in (0..n).rev() {
            nodes.push(-0.5 * (edges[i] + edges[i + 1]));
            cell_widths.push(edges[i + 1] - edges[i]);
            weights.push(half_weights[i]);
        }
        for i in 0..n {
            nodes.push(0.5 * (edges[i] + edges[i + 1]));
            cell_widths.push(edges[i + 1] - edges[i]);
            weights.push(half_weights[i]);
        }
        GridMeasure { axis, nodes, cell_widths, weights }
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.cell_widths).map(|(w, h)| w / h).collect()
    }

    /// `max |w(x) - w(-x)|` over mirrored node pairs.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.nodes.len();
        (0..n / 2)
            .map(|i| {
                let j = n - 1 - i;
                (self.weights[i] - self.weights[j]).abs().max((self.nodes[i] + self.nodes[j]).abs())
            })
            .fold(0.0, f64::max)
    }

    /// The positive half: `(midpoint, width, weight)`.
    pub fn half(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.nodes.len();
        (n / 2..n).map(move |i| (self.nodes[i], self.cell_widths[i], self.weights[i]))
    }

    fn point(&self, i: usize) -> C64 {
        match self.axis {
            Axis::Real => C64::new(self.nodes[i], 0.0),
            Axis::Imaginary => C64::new(0.0, self.nodes[i]),
        }
    }
}

/// Discrete logarithmic potential `sum_i w_i (-log|x - s_i|)`. When `x` coincides with a node
/// of the measure the self term is replaced by its cell average `-log(width) + 3/2`.
pub fn potential_u(measure: &GridMeasure, points: &[C64]) -> Vec<f64> {
    points
        .iter()
        .map(|&x| {
            let mut u = 0.0;
            for i in 0..measure.nodes.len() {
                let d = (x - measure.point(i)).norm();
                let h = measure.cell_widths[i];
                u += measure.weights[i] * if d <= 1e-12 * h { -h.ln() + 1.5 } else { -d.ln() };
            }
            u
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    /// Truncation of the `mu1` domain; `None` picks the confinement margin rule.
    pub x1: Option<f64>,
    pub y2: f64,
    pub x3: f64,
    /// Cells of the symmetric core meshes (both sides counted).
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub tail_tol: f64,
    pub refine_edges: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { x1: None, y2: 1e9, x3: 1e9, n1: 300, n2: 300, n3: 300, tail_tol: 1e-3, refine_edges: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Iteration cap of each interior-point solve.
    pub max_iter: usize,
    /// Block-coordinate cycles before the joint solve.
    pub max_outer: usize,
    /// Relative energy change allowed in the verification cycle.
    pub outer_tol: f64,
    pub ipm_tol: f64,
    pub support_threshold: f64,
    pub active_tol: f64,
    /// Equality residual bound, relative to the field scale.
    pub el_tol: f64,
    pub slack_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 200,
            max_outer: 2,
            outer_tol: 1e-9,
            ipm_tol: 1e-11,
            support_threshold: 1e-4,
            active_tol: 1e-8,
            el_tol: 1e-3,
            slack_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EquilibriumConfig {
    pub grid: GridConfig,
    pub solver: SolverConfig,
}

/// Meshes, fields and kernel matrices of one discretization (half-line cells throughout).
#[derive(Clone, Debug)]
pub struct Grids {
    pub specs: [MeshSpec; 3],
    pub edges: [Vec<f64>; 3],
    /// Mass of `sigma_2` per `mu2` cell (midpoint rule).
    pub cap: Vec<f64>,
    /// Cell averages of `V_1` and `V_3`.
    pub field1: Vec<f64>,
    pub field3: Vec<f64>,
    pub k11: Mat<f64>,
    pub k22: Mat<f64>,
    pub k33: Mat<f64>,
    /// `mu1` cells by `mu2` cells.
    pub k12: Mat<f64>,
    /// `mu3` cells by `mu2` cells.
    pub k32: Mat<f64>,
    /// Truncation of the `mu1` domain (may exceed the `mu1` mesh after refinement).
    pub x1: f64,
}

fn cell_average(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre_unit(8);
    rule.iter().map(|&(u, w)| w * f(a + (b - a) * u)).sum()
}

impl Grids {
    pub fn assemble(p: &ModelParams, specs: [MeshSpec; 3], x1: f64) -> Result<Self> {
        let edges = [specs[0].edges(), specs[1].edges(), specs[2].edges()];
        let cells = |k: usize| edges[k].windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>();
        let field1: Vec<f64> = cells(0).iter().map(|&(a, b)| cell_average(|x| field_v1(x, p), a, b)).collect();
        let field3: Vec<f64> = cells(2).iter().map(|&(a, b)| cell_average(|x| field_v3(x, p), a, b)).collect();
        let cap: Vec<f64> = cells(1).iter().map(|&(a, b)| sigma2_density(0.5 * (a + b), p) * (b - a)).collect();
        if 2.0 * cap.iter().sum::<f64>() < 2.0 / 3.0 {
            return Err(Error::Config("total mass of the constraint is below 2/3; enlarge the imaginary-axis mesh".into()));
        }
        Ok(Grids {
            k11: kernel::same_axis_matrix(&edges[0]),
            k22: kernel::same_axis_matrix(&edges[1]),
            k33: kernel::same_axis_matrix(&edges[2]),
            k12: kernel::cross_matrix(&edges[0], &edges[1]),
            k32: kernel::cross_matrix(&edges[2], &edges[1]),
            specs,
            edges,
            cap,
            field1,
            field3,
            x1,
        })
    }

    pub fn len(&self, k: usize) -> usize {
        self.edges[k].len() - 1
    }

    pub fn mids(&self, k: usize) -> Vec<f64> {
        self.edges[k].windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn widths(&self, k: usize) -> Vec<f64> {
        self.edges[k].windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Cell-averaged Euler-Lagrange functionals `2U1 - U2 + V1`, `2U2 - U1 - U3`,
    /// `2U3 - U2 + V3` for half weights `w`.
    pub fn el_functionals(&self, w: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
        let u11 = matvec(&self.k11, &w[0]);
        let u22 = matvec(&self.k22, &w[1]);
        let u33 = matvec(&self.k33, &w[2]);
        let u2_1 = matvec(&self.k12, &w[1]);
        let u2_3 = matvec(&self.k32, &w[1]);
        let u1_2 = matvec_t(&self.k12, &w[0]);
        let u3_2 = matvec_t(&self.k32, &w[2]);
        let g1 = (0..self.len(0)).map(|i| 2.0 * u11[i] - u2_1[i] + self.field1[i]).collect();
        let g2 = (0..self.len(1)).map(|i| 2.0 * u22[i] - u1_2[i] - u3_2[i]).collect();
        let g3 = (0..self.len(2)).map(|i| 2.0 * u33[i] - u2_3[i] + self.field3[i]).collect();
        [g1, g2, g3]
    }

    /// Discrete energy of the full (mirrored) measures.
    pub fn energy(&self, w: &[Vec<f64>; 3]) -> f64 {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let u11 = matvec(&self.k11, &w[0]);
        let u22 = matvec(&self.k22, &w[1]);
        let u33 = matvec(&self.k33, &w[2]);
        let u2_1 = matvec(&self.k12, &w[1]);
        let u2_3 = matvec(&self.k32, &w[1]);
        2.0 * (dot(&w[0], &u11) + dot(&w[1], &u22) + dot(&w[2], &u33) - dot(&w[0], &u2_1) - dot(&w[2], &u2_3)
            + dot(&w[0], &self.field1)
            + dot(&w[2], &self.field3))
    }

    fn free_cells(&self, k: usize) -> Vec<usize> {
        if k == 1 {
            (0..self.len(1)).filter(|&i| self.cap[i] > 0.0).collect()
        } else {
            (0..self.len(k)).collect()
        }
    }

    fn block(&self, k: usize, l: usize) -> Box<dyn Fn(usize, usize) -> f64 + '_> {
        match (k, l) {
            (0, 0) => Box::new(|i, j| 4.0 * self.k11[(i, j)]),
            (1, 1) => Box::new(|i, j| 4.0 * self.k22[(i, j)]),
            (2, 2) => Box::new(|i, j| 4.0 * self.k33[(i, j)]),
            (0, 1) => Box::new(|i, j| -2.0 * self.k12[(i, j)]),
            (1, 0) => Box::new(|i, j| -2.0 * self.k12[(j, i)]),
            (2, 1) => Box::new(|i, j| -2.0 * self.k32[(i, j)]),
            (1, 2) => Box::new(|i, j| -2.0 * self.k32[(j, i)]),
            _ => Box::new(|_, _| 0.0),
        }
    }

    fn linear_term(&self, k: usize) -> Vec<f64> {
        match k {
            0 => self.field1.iter().map(|v| 2.0 * v).collect(),
            2 => self.field3.iter().map(|v| 2.0 * v).collect(),
            _ => vec![0.0; self.len(1)],
        }
    }
}

fn matvec(m: &Mat<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

fn matvec_t(m: &Mat<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)] * v[i]).sum()).collect()
}

/// Smallest `X > 1` (on a 0.01 grid) with `V1(X) - 2 log X > min V1 + 20`.
pub fn confinement_radius(p: &ModelParams) -> Result<f64> {
    let mut vmin = field_v1(0.0, p);
    for k in 1..=1_000_000 {
        let x = 0.01 * k as f64;
        let v = field_v1(x, p);
        vmin = vmin.min(v);
        if x > 1.0 && v - 2.0 * x.ln() > vmin + 20.0 {
            return Ok(x);
        }
    }
    Err(Error::Config("external field does not confine mu1".into()))
}

/// Bound on the mass a `t^{-5/3}` tail with prefactor `c` leaves beyond `t` on both sides.
pub fn tail_mass_bound(c: f64, t: f64) -> f64 {
    3.0 * c * t.powf(-2.0 / 3.0)
}

fn validate(cfg: &GridConfig) -> Result<()> {
    for (name, n) in [("n1", cfg.n1), ("n2", cfg.n2), ("n3", cfg.n3)] {
        if n < 64 {
            return Err(Error::Config(format!("{name} = {n} is below the minimum of 64")));
        }
    }
    for (name, v) in [("y2", cfg.y2), ("x3", cfg.x3), ("tail_tol", cfg.tail_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("{name} must be positive and finite")));
        }
    }
    if let Some(x1) = cfg.x1 {
        if !(x1 > 0.0 && x1.is_finite()) {
            return Err(Error::Config("x1 must be positive and finite".into()));
        }
    }
    Ok(())
}

/// Uniform cores with graded tails and a zone at `x*` or `y*` (stage one of the solver).
pub fn build_grids(p: &ModelParams, cfg: &GridConfig) -> Result<Grids> {
    validate(cfg)?;
    let x1 = match cfg.x1 {
        Some(x) => x,
        None => confinement_radius(p)?,
    };
    let crit = critical_abscissae(p);
    let r = x1.max(1.5 * crit.x_star).max(1.5 * crit.y_star);
    for (name, far) in [("y2", cfg.y2), ("x3", cfg.x3)] {
        if far <= r {
            return Err(Error::Config(format!("{name} = {far} does not exceed the core radius {r}")));
        }
        let tail = tail_mass_bound(1.0, far);
        if tail > cfg.tail_tol {
            return Err(Error::Config(format!(
                "{name} = {far} leaves an estimated tail mass {tail:.3e} above tail_tol = {:.3e}",
                cfg.tail_tol
            )));
        }
    }
    let spec = |end: f64, n: usize, far: Option<f64>, crit: f64| {
        let h_core = end / (n / 2) as f64;
        let zones = if crit > 0.0 {
            vec![Zone::around(crit, critical_zone_h(h_core, crit), EDGE_ZONE_CELLS)]
        } else {
            Vec::new()
        };
        MeshSpec { lo: 0.0, core_end: end, h_core, far, tail_grade: TAIL_GRADE, zones }
    };
    Grids::assemble(
        p,
        [
            spec(x1, cfg.n1, None, 0.0),
            spec(r, cfg.n2, Some(cfg.y2), crit.y_star),
            spec(r, cfg.n3, Some(cfg.x3), crit.x_star),
        ],
        x1,
    )
}

/// Minimize the discrete energy over block `k` (0, 1, 2 for `mu1, mu2, mu3`) with the other
/// two blocks fixed. Returns the new half weights and the iteration count.
fn solve_block(g: &Grids, w: &[Vec<f64>; 3], k: usize, cfg: &SolverConfig) -> Result<(Vec<f64>, usize)> {
    let idx = g.free_cells(k);
    let hk = g.block(k, k);
    let h = Mat::from_fn(idx.len(), idx.len(), |a, b| hk(idx[a], idx[b]));
    let mut c = g.linear_term(k);
    for l in 0..3 {
        if l != k {
            let hkl = g.block(k, l);
            for i in 0..c.len() {
                c[i] += (0..w[l].len()).map(|j| hkl(i, j) * w[l][j]).sum::<f64>();
            }
        }
    }
    let c: Vec<f64> = idx.iter().map(|&i| c[i]).collect();
    let upper: Vec<f64> = idx.iter().map(|&i| if k == 1 { g.cap[i] } else { f64::INFINITY }).collect();
    let blocks = [0..idx.len()];
    let sol = solve_qp(
        &QpProblem { h: &h, c: &c, blocks: &blocks, masses: &[HALF_MASS[k]], upper: &upper },
        QpOptions { tol: cfg.ipm_tol, max_iter: cfg.max_iter },
    )?;
    let mut out = vec![0.0; g.len(k)];
    for (a, &i) in idx.iter().enumerate() {
        out[i] = sol.x[a];
    }
    Ok((out, sol.iterations))
}

/// Joint minimization over all three blocks. Returns half weights, the multipliers of the
/// three mass constraints (in units of the Euler-Lagrange functionals) and the iteration count.
fn solve_joint(g: &Grids, cfg: &SolverConfig) -> Result<([Vec<f64>; 3], [f64; 3], usize)> {
    let idx: [Vec<usize>; 3] = [g.free_cells(0), g.free_cells(1), g.free_cells(2)];
    let offs = [0, idx[0].len(), idx[0].len() + idx[1].len()];
    let n = offs[2] + idx[2].len();
    let which = |a: usize| if a >= offs[2] { 2 } else if a >= offs[1] { 1 } else { 0 };
    let blocks: Vec<Box<dyn Fn(usize, usize) -> f64 + '_>> =
        (0..9).map(|kl| g.block(kl / 3, kl % 3)).collect();
    let h = Mat::from_fn(n, n, |a, b| {
        let (k, l) = (which(a), which(b));
        blocks[3 * k + l](idx[k][a - offs[k]], idx[l][b - offs[l]])
    });
    let lin = [g.linear_term(0), g.linear_term(1), g.linear_term(2)];
    let c: Vec<f64> = (0..n).map(|a| {
        let k = which(a);
        lin[k][idx[k][a - offs[k]]]
    }).collect();
    let upper: Vec<f64> = (0..n)
        .map(|a| if which(a) == 1 { g.cap[idx[1][a - offs[1]]] } else { f64::INFINITY })
        .collect();
    let ranges: [Range<usize>; 3] = [0..offs[1], offs[1]..offs[2], offs[2]..n];
    let sol = solve_qp(
        &QpProblem { h: &h, c: &c, blocks: &ranges, masses: &HALF_MASS, upper: &upper },
        QpOptions { tol: cfg.ipm_tol, max_iter: cfg.max_iter },
    )?;
    let mut w = [vec![0.0; g.len(0)], vec![0.0; g.len(1)], vec![0.0; g.len(2)]];
    for k in 0..3 {
        for (a, &i) in idx[k].iter().enumerate() {
            w[k][i] = sol.x[offs[k] + a];
        }
    }
    Ok((w, [0.5 * sol.y[0], 0.5 * sol.y[1], 0.5 * sol.y[2]], sol.iterations))
}

fn initial_weights(g: &Grids) -> [Vec<f64>; 3] {
    let uniform = |k: usize| {
        let n = g.len(k);
        vec![HALF_MASS[k] / n as f64; n]
    };
    let total: f64 = g.cap.iter().sum();
    let w2 = g.cap.iter().map(|c| c * HALF_MASS[1] / total).collect();
    [uniform(0), w2, uniform(2)]
}

#[derive(Clone, Debug)]
pub struct EquilibriumSolution {
    pub mu1: GridMeasure,
    pub mu2: GridMeasure,
    pub mu3: GridMeasure,
    /// Discretized `sigma_2` on the nodes of `mu2`.
    pub cap: GridMeasure,
    pub ell1: f64,
    pub energy: f64,
    /// Energy after each sub-solve of the final discretization.
    pub energies: Vec<f64>,
    /// Interior-point iterations over all sub-solves.
    pub iterations: usize,
    pub el_report: ELReport,
    /// Multipliers of the three mass constraints in the final joint solve.
    pub multipliers: [f64; 3],
    pub params: ModelParams,
    pub config: EquilibriumConfig,
    pub grids: Grids,
    /// Half weights aligned with `grids`.
    pub half_weights: [Vec<f64>; 3],
}

impl EquilibriumSolution {
    fn from_parts(
        p: &ModelParams,
        cfg: &EquilibriumConfig,
        grids: Grids,
        w: [Vec<f64>; 3],
        energies: Vec<f64>,
        iterations: usize,
        multipliers: [f64; 3],
    ) -> Self {
        let mu1 = GridMeasure::from_half(Axis::Real, &grids.edges[0], &w[0]);
        let mu2 = GridMeasure::from_half(Axis::Imaginary, &grids.edges[1], &w[1]);
        let mu3 = GridMeasure::from_half(Axis::Real, &grids.edges[2], &w[2]);
        let cap = GridMeasure::from_half(Axis::Imaginary, &grids.edges[1], &grids.cap);
        let energy = *energies.last().unwrap();
        let mut sol = EquilibriumSolution {
            mu1,
            mu2,
            mu3,
            cap,
            ell1: multipliers[0],
            energy,
            energies,
            iterations,
            el_report: ELReport::default(),
            multipliers,
            params: p.clone(),
            config: cfg.clone(),
            grids,
            half_weights: w,
        };
        sol.el_report = el_residuals(&sol);
        sol.ell1 = sol.el_report.ell1;
        sol
    }

    /// Densities of `sigma_2 - mu2` on the `mu2` half cells.
    pub fn rho2_half(&self) -> Vec<f64> {
        let h = self.grids.widths(1);
        (0..h.len()).map(|i| ((self.grids.cap[i] - self.half_weights[1][i]) / h[i]).max(0.0)).collect()
    }

    pub fn density_half(&self, k: usize) -> Vec<f64> {
        let h = self.grids.widths(k);
        self.half_weights[k].iter().zip(&h).map(|(w, h)| w / h).collect()
    }
}

/// Block cycles, joint solve and a verification cycle on one discretization.
fn solve_on(
    g: &Grids,
    cfg: &SolverConfig,
    cycles: usize,
) -> Result<([Vec<f64>; 3], Vec<f64>, usize, [f64; 3])> {
    let mut iterations = 0;
    let mut energies = Vec::new();
    if cycles > 0 {
        let mut w = initial_weights(g);
        energies.push(g.energy(&w));
        for _ in 0..cycles {
            for k in [2, 0, 1] {
                let (wk, it) = solve_block(g, &w, k, cfg)?;
                w[k] = wk;
                iterations += it;
                energies.push(g.energy(&w));
            }
        }
    }
    let (mut w, mult, it) = solve_joint(g, cfg)?;
    iterations += it;
    let e_joint = g.energy(&w);
    energies.push(e_joint);
    for k in [2, 0, 1] {
        let (wk, it) = solve_block(g, &w, k, cfg)?;
        w[k] = wk;
        iterations += it;
        energies.push(g.energy(&w));
    }
    let e_final = *energies.last().unwrap();
    if (e_final - e_joint).abs() > cfg.outer_tol * e_joint.abs().max(1.0) {
        return Err(Error::NonConvergence(format!(
            "verification cycle moved the energy from {e_joint:.15e} to {e_final:.15e}"
        )));
    }
    Ok((w, energies, iterations, mult))
}

/// Meshes for the second stage: the `mu1` mesh shrinks to a window around the coarse
/// support, and uniform fine zones are laid around every edge and critical point.
pub fn refined_specs(coarse: &EquilibriumSolution, margin_factor: f64) -> Result<[MeshSpec; 3]> {
    let g = &coarse.grids;
    let p = &coarse.params;
    let cfg = &coarse.config.grid;
    let sup = extract_supports(coarse)?;
    let crit = critical_abscissae(p);
    let edge_at = |e: Edge, fallback: f64| fit_edge_exponent(coarse, e).map(|f| f.location).unwrap_or(fallback);

    // mu1 window
    let pos: Vec<(f64, f64, usize)> = sup
        .intervals
        .iter()
        .enumerate()
        .filter(|(_, iv)| iv.1 > 0.0)
        .map(|(k, iv)| (iv.0, iv.1, k))
        .collect();
    let first = pos.first().ok_or_else(|| Error::AmbiguousSupport("mu1 has no support".into()))?;
    let last = pos.last().unwrap();
    let lo_sup = first.0.max(0.0);
    let h1 = g.specs[0].h_core;
    let m = (0.1 * (last.1 - lo_sup)).max(4.0 * h1) * margin_factor;
    let mut lo = (lo_sup - m).max(0.0);
    if lo < m {
        lo = 0.0;
    }
    let hi = (last.1 + m).min(g.x1);
    let h_core = (hi - lo) / (cfg.n1 / 2) as f64;
    let mut features: Vec<f64> = Vec::new();
    for &(a, b, k) in &pos {
        if a > 0.0 {
            features.push(edge_at(Edge::Left(k), a));
        }
        features.push(edge_at(Edge::Right(k), b));
    }
    let zones1 = features
        .iter()
        .map(|&e| {
            let d = features
                .iter()
                .filter(|&&f| f != e)
                .map(|f| (f - e).abs())
                .chain(std::iter::once(2.0 * e))
                .fold(f64::INFINITY, f64::min);
            Zone::around(e, edge_zone_h(h_core, d), EDGE_ZONE_CELLS)
        })
        .collect();
    let spec1 = MeshSpec { lo, core_end: hi, h_core, far: None, tail_grade: TAIL_GRADE, zones: zones1 };

    // mu2 and mu3
    let mut spec2 = g.specs[1].clone();
    let mut spec3 = g.specs[2].clone();
    // two consecutive supports meeting at the origin on the coarse mesh: a gap of mu2 or
    // mu3 there may be narrower than one cell
    let gaps = sup.origin_gap_cells;
    if gaps[1] == 0 && (gaps[0] == 0 || gaps[2] == 0) {
        for spec in [&mut spec2, &mut spec3] {
            spec.zones.push(Zone::around(0.0, spec.h_core / ORIGIN_ZONE_REFINE, EDGE_ZONE_CELLS));
        }
    }
    if sup.c2 > 0.0 {
        let c2 = edge_at(Edge::C2, sup.c2);
        let mut d = c2;
        if crit.y_star > 0.0 {
            d = d.min(c2 - crit.y_star);
        }
        spec2.zones.push(Zone::around(c2, edge_zone_h(spec2.h_core, d), EDGE_ZONE_CELLS));
    }
    if sup.c3 > 0.0 {
        let c3 = edge_at(Edge::C3, sup.c3);
        let d = c3.min(crit.x_star - c3);
        spec3.zones.push(Zone::around(c3, edge_zone_h(spec3.h_core, d), EDGE_ZONE_CELLS));
    }
    Ok([spec1, spec2, spec3])
}

/// Zone spacing at `x*` or `y*`; small critical points get enough cells to resolve a gap
/// of the measure inside them.
fn critical_zone_h(h_core: f64, x: f64) -> f64 {
    (h_core / 4.0).min(x / 50.0).max(h_core / 500.0)
}

fn edge_zone_h(h_core: f64, dist_other: f64) -> f64 {
    let d = if dist_other > 0.0 { dist_other } else { h_core };
    (h_core / 6.0).min(d / 50.0).max(h_core / 500.0)
}

/// Solve the equilibrium problem: block-coordinate cycles over `(mu3, mu1, mu2)` from a
/// feasible start, a joint interior-point solve, and a verification cycle that must leave
/// the energy unchanged. With `refine_edges` the solve is repeated on edge-refined meshes.
pub fn solve_equilibrium(p: &ModelParams, cfg: &EquilibriumConfig) -> Result<EquilibriumSolution> {
    let grids = build_grids(p, &cfg.grid)?;
    let (w, energies, iterations, mult) = solve_on(&grids, &cfg.solver, cfg.solver.max_outer)?;
    let mut sol = EquilibriumSolution::from_parts(p, cfg, grids, w, energies, iterations, mult);
    if cfg.grid.refine_edges {
        let mut last_err = None;
        for margin in [1.0, 2.0] {
            let specs = refined_specs(&sol, margin)?;
            let x1 = sol.grids.x1;
            let g2 = Grids::assemble(p, specs, x1)?;
            let (w, energies, it, mult) = solve_on(&g2, &cfg.solver, 0)?;
            let fine = EquilibriumSolution::from_parts(p, cfg, g2, w, energies, sol.iterations + it, mult);
            if fine.el_report.slack_min1 >= -cfg.solver.slack_tol {
                sol = fine;
                last_err = None;
                break;
            }
            last_err = Some(fine.el_report.clone());
        }
        if let Some(r) = last_err {
            return Err(Error::NonConvergence(format!("refined mu1 window violates the inequality condition: {r:?}")));
        }
    }
    let r = &sol.el_report;
    let tol = cfg.solver.el_tol * r.scale;
    if r.res_eq1 > tol || r.res_eq2 > tol || r.res_eq3 > tol {
        return Err(Error::NonConvergence(format!("Euler-Lagrange residuals above {tol:.3e}: {r:?}")));
    }
    Ok(sol)
}

/// Minimize over one measure with the other two held fixed (`which` in 1..=3). The fixed
/// measures are read from `current`, which must live on `grids`.
pub fn solve_single(which: usize, current: &[GridMeasure; 3], grids: &Grids, cfg: &SolverConfig) -> Result<GridMeasure> {
    if !(1..=3).contains(&which) {
        return Err(Error::Config(format!("measure index {which} is not in 1..=3")));
    }
    let w: [Vec<f64>; 3] = std::array::from_fn(|k| {
        let m = &current[k];
        m.weights[m.weights.len() / 2..].to_vec()
    });
    for k in 0..3 {
        if w[k].len() != grids.len(k) {
            return Err(Error::Config(format!("measure {} does not live on the given grids", k + 1)));
        }
    }
    let k = which - 1;
    let (wk, _) = solve_block(grids, &w, k, cfg)?;
    let axis = if k == 1 { Axis::Imaginary } else { Axis::Real };
    Ok(GridMeasure::from_half(axis, &grids.edges[k], &wk))
}

/// Least-squares fit `density ~ C t^slope` over half cells with midpoints in `[lo, hi]`.
pub fn tail_law(mids: &[f64], dens: &[f64], lo: f64, hi: f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = mids
        .iter()
        .zip(dens)
        .filter(|(m, d)| **m >= lo && **m <= hi && **d > 0.0)
        .map(|(m, d)| (m.ln(), d.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!("{} tail cells in [{lo}, {hi}]", pts.len())));
    }
    let (slope, icpt) = linear_fit(&pts);
    Ok((slope, icpt.exp()))
}

pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_of_simple_measures() {
        let m = GridMeasure { axis: Axis::Real, nodes: vec![0.0], cell_widths: vec![1e-3], weights: vec![1.0] };
        let u = potential_u(&m, &[C64::new(std::f64::consts::E, 0.0)]);
        assert!((u[0] + 1.0).abs() < 1e-14);
        let m = GridMeasure { axis: Axis::Real, nodes: vec![-1.0, 1.0], cell_widths: vec![0.1, 0.1], weights: vec![0.5, 0.5] };
        assert!(potential_u(&m, &[C64::new(0.0, 0.0)])[0].abs() < 1e-15);
    }

    #[test]
    fn cap_vanishes_inside_y_star_and_grows() {
        let p = ModelParams::gaussian(1.0, 3.0).unwrap();
        let cfg = GridConfig { n1: 64, n2: 256, n3: 64, y2: 1e6, x3: 1e6, ..Default::default() };
        let g = build_grids(&p, &cfg).unwrap();
        let ys = critical_abscissae(&p).y_star;
        let mids = g.mids(1);
        let dens: Vec<f64> = g.cap.iter().zip(g.widths(1)).map(|(c, h)| c / h).collect();
        for i in 0..mids.len() {
            if mids[i] < ys {
                assert_eq!(g.cap[i], 0.0);
            }
            if i > 0 {
                assert!(dens[i] >= dens[i - 1]);
            }
        }
    }

    #[test]
    fn short_truncation_is_rejected() {
        let p = ModelParams::gaussian(0.0, 1.0).unwrap();
        let cfg = GridConfig { y2: 300.0, x3: 300.0, ..Default::default() };
        assert!(matches!(build_grids(&p, &cfg), Err(Error::Config(_))));
        let cfg = GridConfig { n1: 32, ..Default::default() };
        assert!(matches!(build_grids(&p, &cfg), Err(Error::Config(_))));
    }
}
