//! Physical parameters and Boltzmann weights.
//!
//! The Boltzmann constant is fixed to 1, so couplings and temperature share
//! units and only the ratios `J/T`, `Jp/T`, `Jsl/T` are observable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings of the three interaction classes and the temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    /// Nearest-neighbour (parent/child) coupling.
    #[serde(rename = "J")]
    pub j: f64,
    /// Prolonged next-nearest-neighbour (grandparent/grandchild) coupling.
    #[serde(rename = "Jp")]
    pub jp: f64,
    /// Same-level nearest-neighbour (sibling) coupling.
    #[serde(rename = "Jsl")]
    pub jsl: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

impl CouplingParams {
    /// Validated constructor.
    pub fn new(j: f64, jp: f64, jsl: f64, t: f64) -> Result<Self> {
        let p = CouplingParams { j, jp, jsl, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("J", self.j), ("Jp", self.jp), ("Jsl", self.jsl), ("T", self.t)] {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite, got {v}")));
            }
        }
        if self.t <= 0.0 {
            return Err(Error::domain(format!("T must be positive, got {}", self.t)));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.t
    }

    /// Boltzmann weights `a = e^{J/T}`, `b = e^{Jp/T}`, `c = e^{Jsl/T}`.
    pub fn weights(&self) -> Result<BoltzmannWeights> {
        self.validate()?;
        Ok(BoltzmannWeights::from_logs(
            self.j / self.t,
            self.jp / self.t,
            self.jsl / self.t,
            1.0 / self.t,
        ))
    }
}

/// Dimensionless Boltzmann weights. The logarithms are kept alongside the
/// weights so that large couplings can be handled in log-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoltzmannWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub beta: f64,
    ln_a: f64,
    ln_b: f64,
    ln_c: f64,
}

impl BoltzmannWeights {
    /// Builds weights from `ln a = βJ`, `ln b = βJp`, `ln c = βJsl`.
    pub fn from_logs(ln_a: f64, ln_b: f64, ln_c: f64, beta: f64) -> Self {
        BoltzmannWeights {
            a: ln_a.exp(),
            b: ln_b.exp(),
            c: ln_c.exp(),
            beta,
            ln_a,
            ln_b,
            ln_c,
        }
    }

    pub fn ln_a(&self) -> f64 {
        self.ln_a
    }

    pub fn ln_b(&self) -> f64 {
        self.ln_b
    }

    pub fn ln_c(&self) -> f64 {
        self.ln_c
    }
}

/// Free-function form of [`CouplingParams::weights`].
pub fn weights(params: &CouplingParams) -> Result<BoltzmannWeights> {
    params.weights()
}
