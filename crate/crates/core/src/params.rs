//! Model parameters: the even potential `V`, the quartic `W(y) = y^4/4 + alpha y^2/2`
//! and the coupling `tau`.

use crate::error::{Error, Result};

/// Parameters of the two-matrix model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub tau: f64,
    /// Monomial coefficients of `V`, index = power. Odd entries are zero.
    v: Vec<f64>,
}

impl ModelParams {
    /// `v_coeffs[k]` is the coefficient of `x^k`; odd powers must vanish and the
    /// leading coefficient must sit on an even power of degree at least 2.
    pub fn new(alpha: f64, tau: f64, v_coeffs: &[f64]) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        if !alpha.is_finite() {
            return Err(Error::Config("alpha must be finite".into()));
        }
        let mut v = v_coeffs.to_vec();
        while v.last() == Some(&0.0) {
            v.pop();
        }
        if v.iter().skip(1).step_by(2).any(|&c| c != 0.0) {
            return Err(Error::Config("V must be even: odd coefficients must be zero".into()));
        }
        let deg = v.len().saturating_sub(1);
        if deg < 2 || v[deg] <= 0.0 {
            return Err(Error::Config(
                "V needs degree >= 2 with a positive leading coefficient".into(),
            ));
        }
        Ok(Self { alpha, tau, v })
    }

    /// `V(x) = x^2/2`, the potential of the phase diagram.
    pub fn gaussian(alpha: f64, tau: f64) -> Result<Self> {
        Self::new(alpha, tau, &[0.0, 0.0, 0.5])
    }

    pub fn v_coeffs(&self) -> &[f64] {
        &self.v
    }

    pub fn deg_v(&self) -> usize {
        self.v.len() - 1
    }

    pub fn with_alpha_tau(&self, alpha: f64, tau: f64) -> Result<Self> {
        Self::new(alpha, tau, &self.v)
    }

    pub fn v(&self, x: f64) -> f64 {
        self.v.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn v_c(&self, z: crate::C64) -> crate::C64 {
        self.v
            .iter()
            .rev()
            .fold(crate::C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Coefficients of `V'`.
    pub fn dv_coeffs(&self) -> Vec<f64> {
        self.v
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect()
    }

    pub fn dv(&self, x: f64) -> f64 {
        self.dv_coeffs().iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn dv_c(&self, z: crate::C64) -> crate::C64 {
        self.dv_coeffs()
            .iter()
            .rev()
            .fold(crate::C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn w(&self, s: f64) -> f64 {
        let s2 = s * s;
        s2 * s2 / 4.0 + self.alpha * s2 / 2.0
    }

    pub fn w_c(&self, s: crate::C64) -> crate::C64 {
        let s2 = s * s;
        s2 * s2 / 4.0 + s2 * (self.alpha / 2.0)
    }
}
