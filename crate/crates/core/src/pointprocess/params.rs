use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intensity bookkeeping for the two Cox models. The per-line (per-orbit)
/// mark intensity is always derived from the coupling, never stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelParams {
    /// Lines with intensity `lambda` per unit `r`, marks `mu = c / lambda`
    /// per unit length.
    CoxLine { c: f64, lambda: f64 },
    /// `n` orbits carrying Poisson(`mu = c / n`) satellites each.
    Satellites { c: f64, n: u64 },
}

impl ModelParams {
    pub fn cox_line(c: f64, lambda: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param(format!(
                "c must be a nonnegative finite number, got {c}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(ModelParams::CoxLine { c, lambda })
    }

    pub fn satellites(c: f64, n: u64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param(format!(
                "c must be a nonnegative finite number, got {c}"
            )));
        }
        if n == 0 {
            return Err(Error::param("orbit count n must be at least 1"));
        }
        Ok(ModelParams::Satellites { c, n })
    }

    pub fn c(&self) -> f64 {
        match *self {
            ModelParams::CoxLine { c, .. } | ModelParams::Satellites { c, .. } => c,
        }
    }

    /// Mark intensity: per unit length for lines, per orbit for satellites.
    pub fn mu(&self) -> f64 {
        match *self {
            ModelParams::CoxLine { c, lambda } => c / lambda,
            ModelParams::Satellites { c, n } => c / n as f64,
        }
    }

    /// The asymptotic parameter: `lambda` or `n`.
    pub fn scale(&self) -> f64 {
        match *self {
            ModelParams::CoxLine { lambda, .. } => lambda,
            ModelParams::Satellites { n, .. } => n as f64,
        }
    }

    pub fn model_name(&self) -> &'static str {
        match self {
            ModelParams::CoxLine { .. } => "cox-line",
            ModelParams::Satellites { .. } => "satellites",
        }
    }
}
