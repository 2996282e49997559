//! Run configuration: a flat `key = value` file with dotted namespaces, plus flag overrides.
//!
//! ```text
//! # comments and blank lines are ignored
//! model.alpha = -0.5
//! model.tau = 1.2
//! model.v = 0, 0, 0.5
//! grid.n1 = 300
//! density.n = 3, 6, 9
//! ```

use crate::equilibrium::EquilibriumConfig;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub alpha: (f64, f64),
    pub tau: (f64, f64),
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PearceyConfig {
    pub n: usize,
    pub contours: Vec<usize>,
    pub x: (f64, f64),
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub equilibrium: EquilibriumConfig,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub scan: ScanConfig,
    pub density_n: Vec<usize>,
    pub pearcey: PearceyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::gaussian(0.0, 1.0).unwrap(),
            equilibrium: EquilibriumConfig::default(),
            out: PathBuf::from("veq-out"),
            workers: None,
            scan: ScanConfig { alpha: (-3.0, 3.0), tau: (0.2, 3.0), steps: 9 },
            density_n: vec![3, 6, 9],
            pearcey: PearceyConfig { n: 6, contours: (0..6).collect(), x: (-5.0, 5.0), points: 201 },
        }
    }
}

/// Every accepted key; anything else is rejected.
pub const KEYS: &[&str] = &[
    "model.alpha",
    "model.tau",
    "model.v",
    "grid.x1",
    "grid.y2",
    "grid.x3",
    "grid.n1",
    "grid.n2",
    "grid.n3",
    "grid.tail_tol",
    "grid.refine_edges",
    "solver.max_iter",
    "solver.max_outer",
    "solver.outer_tol",
    "solver.ipm_tol",
    "solver.support_threshold",
    "solver.active_tol",
    "solver.el_tol",
    "solver.slack_tol",
    "output.dir",
    "run.workers",
    "scan.alpha_min",
    "scan.alpha_max",
    "scan.tau_min",
    "scan.tau_max",
    "scan.steps",
    "density.n",
    "pearcey.n",
    "pearcey.contours",
    "pearcey.x_min",
    "pearcey.x_max",
    "pearcey.points",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| num(key, s.trim())).collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut alpha = cfg.params.alpha;
        let mut tau = cfg.params.tau;
        let mut v = cfg.params.v_coeffs().to_vec();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (key, val) = (key.trim(), val.trim());
            let g = &mut cfg.equilibrium.grid;
            let s = &mut cfg.equilibrium.solver;
            match key {
                "model.alpha" => alpha = num(key, val)?,
                "model.tau" => tau = num(key, val)?,
                "model.v" => v = list(key, val)?,
                "grid.x1" => g.x1 = if val == "auto" { None } else { Some(num(key, val)?) },
                "grid.y2" => g.y2 = num(key, val)?,
                "grid.x3" => g.x3 = num(key, val)?,
                "grid.n1" => g.n1 = num(key, val)?,
                "grid.n2" => g.n2 = num(key, val)?,
                "grid.n3" => g.n3 = num(key, val)?,
                "grid.tail_tol" => g.tail_tol = num(key, val)?,
                "grid.refine_edges" => g.refine_edges = num(key, val)?,
                "solver.max_iter" => s.max_iter = num(key, val)?,
                "solver.max_outer" => s.max_outer = num(key, val)?,
                "solver.outer_tol" => s.outer_tol = num(key, val)?,
                "solver.ipm_tol" => s.ipm_tol = num(key, val)?,
                "solver.support_threshold" => s.support_threshold = num(key, val)?,
                "solver.active_tol" => s.active_tol = num(key, val)?,
                "solver.el_tol" => s.el_tol = num(key, val)?,
                "solver.slack_tol" => s.slack_tol = num(key, val)?,
                "output.dir" => cfg.out = PathBuf::from(val),
                "run.workers" => cfg.workers = Some(num(key, val)?),
                "scan.alpha_min" => cfg.scan.alpha.0 = num(key, val)?,
                "scan.alpha_max" => cfg.scan.alpha.1 = num(key, val)?,
                "scan.tau_min" => cfg.scan.tau.0 = num(key, val)?,
                "scan.tau_max" => cfg.scan.tau.1 = num(key, val)?,
                "scan.steps" => cfg.scan.steps = num(key, val)?,
                "density.n" => cfg.density_n = list(key, val)?,
                "pearcey.n" => cfg.pearcey.n = num(key, val)?,
                "pearcey.contours" => cfg.pearcey.contours = list(key, val)?,
                "pearcey.x_min" => cfg.pearcey.x.0 = num(key, val)?,
                "pearcey.x_max" => cfg.pearcey.x.1 = num(key, val)?,
                "pearcey.points" => cfg.pearcey.points = num(key, val)?,
                _ => return Err(Error::Config(format!("line {}: unknown key '{key}'", lineno + 1))),
            }
        }
        cfg.params = ModelParams::new(alpha, tau, &v)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_overrides(mut self, alpha: Option<f64>, tau: Option<f64>, out: Option<PathBuf>, workers: Option<usize>) -> Result<Self> {
        if alpha.is_some() || tau.is_some() {
            self.params = self.params.with_alpha_tau(alpha.unwrap_or(self.params.alpha), tau.unwrap_or(self.params.tau))?;
        }
        if let Some(o) = out {
            self.out = o;
        }
        if workers.is_some() {
            self.workers = workers;
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let g = &self.equilibrium.grid;
        if g.n1 < 8 || g.n2 < 8 || g.n3 < 8 {
            return Err(Error::Config("grid.n1, grid.n2, grid.n3 must be at least 8".into()));
        }
        if self.scan.steps == 0 || !(self.scan.tau.0 > 0.0) || self.scan.tau.1 < self.scan.tau.0 || self.scan.alpha.1 < self.scan.alpha.0 {
            return Err(Error::Config("scan needs steps >= 1, 0 < tau_min <= tau_max, alpha_min <= alpha_max".into()));
        }
        if let Some(&n) = self.density_n.iter().find(|&&n| n == 0 || n % 3 != 0 || n > crate::finite_n::N_MAX) {
            return Err(Error::Config(format!("density.n entry {n} must be a multiple of 3 in 3..={}", crate::finite_n::N_MAX)));
        }
        if self.pearcey.n == 0 || self.pearcey.points < 2 || self.pearcey.contours.iter().any(|&j| j > 5) {
            return Err(Error::Config("pearcey needs n >= 1, points >= 2 and contours in 0..=5".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// The configuration as `key = value` lines, in [`KEYS`] order; parses back to itself.
    pub fn to_text(&self) -> String {
        let g = &self.equilibrium.grid;
        let s = &self.equilibrium.solver;
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let joinu = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        for key in KEYS {
            let val = match *key {
                "model.alpha" => format!("{:?}", self.params.alpha),
                "model.tau" => format!("{:?}", self.params.tau),
                "model.v" => join(self.params.v_coeffs()),
                "grid.x1" => g.x1.map_or("auto".into(), |x| format!("{x:?}")),
                "grid.y2" => format!("{:?}", g.y2),
                "grid.x3" => format!("{:?}", g.x3),
                "grid.n1" => g.n1.to_string(),
                "grid.n2" => g.n2.to_string(),
                "grid.n3" => g.n3.to_string(),
                "grid.tail_tol" => format!("{:?}", g.tail_tol),
                "grid.refine_edges" => g.refine_edges.to_string(),
                "solver.max_iter" => s.max_iter.to_string(),
                "solver.max_outer" => s.max_outer.to_string(),
                "solver.outer_tol" => format!("{:?}", s.outer_tol),
                "solver.ipm_tol" => format!("{:?}", s.ipm_tol),
                "solver.support_threshold" => format!("{:?}", s.support_threshold),
                "solver.active_tol" => format!("{:?}", s.active_tol),
                "solver.el_tol" => format!("{:?}", s.el_tol),
                "solver.slack_tol" => format!("{:?}", s.slack_tol),
                "output.dir" => self.out.display().to_string(),
                "run.workers" => match self.workers {
                    Some(w) => w.to_string(),
                    None => continue,
                },
                "scan.alpha_min" => format!("{:?}", self.scan.alpha.0),
                "scan.alpha_max" => format!("{:?}", self.scan.alpha.1),
                "scan.tau_min" => format!("{:?}", self.scan.tau.0),
                "scan.tau_max" => format!("{:?}", self.scan.tau.1),
                "scan.steps" => self.scan.steps.to_string(),
                "density.n" => joinu(&self.density_n),
                "pearcey.n" => self.pearcey.n.to_string(),
                "pearcey.contours" => joinu(&self.pearcey.contours),
                "pearcey.x_min" => format!("{:?}", self.pearcey.x.0),
                "pearcey.x_max" => format!("{:?}", self.pearcey.x.1),
                "pearcey.points" => self.pearcey.points.to_string(),
                _ => unreachable!(),
            };
            out.push_str(&format!("{key} = {val}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_rejection() {
        let cfg = RunConfig::parse("model.alpha = -0.5\nmodel.v = 0, 0, 1, 0, 0.25\ngrid.n1 = 200 # coarse\n\ndensity.n = 3,6").unwrap();
        assert_eq!(cfg.params.alpha, -0.5);
        assert_eq!(cfg.params.deg_v(), 4);
        assert_eq!(cfg.equilibrium.grid.n1, 200);
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert!(matches!(RunConfig::parse("grid.nope = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("model.tau = -1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("density.n = 4"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("model.alpha"), Err(Error::Config(_))));
    }
}
