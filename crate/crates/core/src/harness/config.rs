use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coxmodels::TargetIntensity;
use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::pointprocess::{
    planar_region_set, spherical_region_set, Labeled, PlanarRegion, SphericalRegion,
};

pub const MIN_REPS: u32 = 1000;
pub const MIN_SWEEP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    CoxLine,
    Satellites,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::CoxLine => "cox-line",
            Model::Satellites => "satellites",
        }
    }

    /// Name of the swept parameter.
    pub fn param_name(self) -> &'static str {
        match self {
            Model::CoxLine => "lambda",
            Model::Satellites => "n",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cox-line" => Ok(Model::CoxLine),
            "satellites" => Ok(Model::Satellites),
            other => Err(Error::config(
                "model",
                format!("unknown model {other:?} (cox-line | satellites)"),
            )),
        }
    }
}

/// Named region sets used for count diagnostics and the functional family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RegionPreset {
    /// Plane: 4×4 grid cells plus 3 annuli. Sphere: 6 bands plus 4 caps.
    #[default]
    Default,
    /// Plane: grid cells only. Sphere: bands only.
    Cells,
}

impl RegionPreset {
    pub fn name(self) -> &'static str {
        match self {
            RegionPreset::Default => "default",
            RegionPreset::Cells => "cells",
        }
    }

    pub fn planar(self, window: &Window) -> Vec<Labeled<PlanarRegion>> {
        let mut all = planar_region_set(window);
        if self == RegionPreset::Cells {
            all.truncate(16);
        }
        all
    }

    pub fn spherical(self) -> Vec<Labeled<SphericalRegion>> {
        let mut all = spherical_region_set();
        if self == RegionPreset::Cells {
            all.truncate(6);
        }
        all
    }
}

impl std::str::FromStr for RegionPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(RegionPreset::Default),
            "cells" => Ok(RegionPreset::Cells),
            other => Err(Error::config(
                "regions",
                format!("unknown preset {other:?} (default | cells)"),
            )),
        }
    }
}

/// One convergence experiment: a model swept along its limit parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub c: f64,
    /// `lambda_n` values (cox-line) or orbit counts (satellites).
    pub sweep: Vec<f64>,
    /// Observation window; cox-line only.
    pub window: Option<Window>,
    pub reps: u32,
    pub regions: RegionPreset,
    pub seed: u64,
    pub target_intensity: TargetIntensity,
    /// Replicates for the `auto` intensity calibration.
    pub calibration_reps: u32,
}

// Every key optional so missing ones get a field-level message rather than
// a generic parse error.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    experiment: Option<RawExperiment>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    model: Option<String>,
    c: Option<f64>,
    sweep: Option<Vec<f64>>,
    window: Option<String>,
    reps: Option<i64>,
    regions: Option<String>,
    seed: Option<i64>,
    target_intensity: Option<String>,
    calibration_reps: Option<i64>,
}

fn required<T>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(field, "missing required key"))
}

fn count(v: i64, field: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| {
        Error::config(
            field,
            format!("expected a count in 0..=4294967295, got {v}"),
        )
    })
}

/// Pulls the offending key out of a serde message such as
/// "unknown field `foo`, expected one of ...".
fn field_of(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .filter(|_| message.contains("unknown field"))
        .unwrap_or("experiment")
        .to_string()
}

impl ExperimentConfig {
    /// Satellites, `c = 2`, `n` in {10, 20, 40, 80, 160}, 10⁴ replicates.
    pub fn converge_sat(seed: u64) -> Self {
        Self {
            model: Model::Satellites,
            c: 2.0,
            sweep: vec![10.0, 20.0, 40.0, 80.0, 160.0],
            window: None,
            reps: 10_000,
            regions: RegionPreset::Default,
            seed,
            target_intensity: TargetIntensity::Auto,
            calibration_reps: 10_000,
        }
    }

    /// Cox-line, `c = 1`, unit disk, `lambda` in {5, ..., 80}, 10⁴ replicates.
    pub fn converge_cox(seed: u64) -> Self {
        Self {
            model: Model::CoxLine,
            c: 1.0,
            sweep: vec![5.0, 10.0, 20.0, 40.0, 80.0],
            window: Some(Window::unit_disk()),
            reps: 10_000,
            regions: RegionPreset::Default,
            seed,
            target_intensity: TargetIntensity::Auto,
            calibration_reps: 100_000,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            Error::config(field_of(&msg), msg)
        })?;
        let raw = required(raw.experiment, "experiment")?;
        let model: Model = required(raw.model, "model")?.parse()?;
        let defaults = match model {
            Model::CoxLine => Self::converge_cox(0),
            Model::Satellites => Self::converge_sat(0),
        };
        let window = raw
            .window
            .map(|w| {
                w.parse::<Window>()
                    .map_err(|e| Error::config("window", e.to_string()))
            })
            .transpose()?;
        let cfg = Self {
            model,
            c: required(raw.c, "c")?,
            sweep: required(raw.sweep, "sweep")?,
            window: match model {
                Model::CoxLine => Some(required(window, "window")?),
                Model::Satellites => window,
            },
            reps: count(required(raw.reps, "reps")?, "reps")?,
            regions: raw
                .regions
                .as_deref()
                .map_or(Ok(RegionPreset::Default), str::parse)?,
            seed: {
                let s = required(raw.seed, "seed")?;
                u64::try_from(s).map_err(|_| {
                    Error::config("seed", format!("expected a nonnegative integer, got {s}"))
                })?
            },
            target_intensity: raw.target_intensity.as_deref().map_or(
                Ok(TargetIntensity::Auto),
                |s| {
                    s.parse()
                        .map_err(|e: Error| Error::config("target_intensity", e.to_string()))
                },
            )?,
            calibration_reps: raw
                .calibration_reps
                .map_or(Ok(defaults.calibration_reps), |v| {
                    count(v, "calibration_reps")
                })?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        let list = self
            .sweep
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let mut s = format!(
            "[experiment]\nmodel = \"{}\"\nc = {:?}\nsweep = [{list}]\n",
            self.model.name(),
            self.c
        );
        if let Some(w) = &self.window {
            s += &format!("window = \"{w}\"\n");
        }
        let target = match self.target_intensity {
            TargetIntensity::C => "c",
            TargetIntensity::HalfC => "half-c",
            TargetIntensity::Auto => "auto",
        };
        s += &format!(
            "reps = {}\nregions = \"{}\"\nseed = {}\ntarget_intensity = \"{target}\"\ncalibration_reps = {}\n",
            self.reps,
            self.regions.name(),
            self.seed,
            self.calibration_reps
        );
        s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::config(
                "c",
                format!("must be positive and finite, got {}", self.c),
            ));
        }
        if self.sweep.len() < MIN_SWEEP {
            return Err(Error::config(
                "sweep",
                format!(
                    "needs at least {MIN_SWEEP} values, got {}",
                    self.sweep.len()
                ),
            ));
        }
        if self.sweep.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("sweep", "values must be strictly increasing"));
        }
        match self.model {
            Model::CoxLine => {
                if let Some(v) = self.sweep.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(Error::config(
                        "sweep",
                        format!("lambda values must be positive, got {v}"),
                    ));
                }
                match &self.window {
                    None => return Err(Error::config("window", "cox-line needs a window")),
                    Some(w) if !(w.area() > 0.0) => {
                        return Err(Error::config("window", "window must have positive area"))
                    }
                    _ => {}
                }
            }
            Model::Satellites => {
                if let Some(v) = self
                    .sweep
                    .iter()
                    .find(|v| !(**v >= 1.0 && v.fract() == 0.0 && **v <= u32::MAX as f64))
                {
                    return Err(Error::config(
                        "sweep",
                        format!("orbit counts must be positive integers, got {v}"),
                    ));
                }
                if self.window.is_some() {
                    return Err(Error::config(
                        "window",
                        "satellites live on the sphere; window applies to cox-line only",
                    ));
                }
            }
        }
        if self.reps < MIN_REPS {
            return Err(Error::config(
                "reps",
                format!("must be at least {MIN_REPS}, got {}", self.reps),
            ));
        }
        if self.target_intensity == TargetIntensity::Auto && self.calibration_reps < 2 {
            return Err(Error::config(
                "calibration_reps",
                "auto calibration needs at least 2 replicates",
            ));
        }
        Ok(())
    }
}
