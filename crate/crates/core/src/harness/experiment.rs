use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Model};
use super::plot::{loglog_svg, Series};
use super::{fmt_f64, schema_line};
use crate::coxmodels::{
    calibrate_target, Calibration, Coupling, CoxLineCoupling, SatelliteCoupling,
};
use crate::diagnostics::{
    count_tv_max, rate_regression, wasserstein_lower_bound_paired, DistanceEstimate, RateFit,
};
use crate::error::{Error, Result};
use crate::functional::lipschitz_family;
use crate::geometry::Window;
use crate::pointprocess::{Labeled, ModelParams, Region};
use crate::rng::{replicates, RngStream};
use crate::steinbound::{cox_bound, satellite_bound, BoundReport, QuadratureSpec};

pub const SLOPE_RANGE: (f64, f64) = (-1.3, -0.7);
pub const MIN_R_SQUARED: f64 = 0.9;

// Stream task ids; the sweep index is the stream's point field.
const TASK_PAIRS: u16 = 1;
const TASK_CALIBRATION: u16 = 2;
const TASK_MARGINAL: u16 = 3;
const TASK_BOOTSTRAP: u16 = 4;

const PLANAR_CLOSE_PAIR: [f64; 3] = [0.05, 0.15, 0.4];
const SPHERICAL_CLOSE_PAIR: [f64; 3] = [0.1, 0.3, 0.6];
const KMAX: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub param: f64,
    pub params: ModelParams,
    pub calibration: Calibration,
    /// `P(model != Poisson)` under the coupling.
    pub prob_differ: f64,
    /// Lower bound on the Wasserstein distance.
    pub distance: DistanceEstimate,
    /// Largest per-region count TV against `Poisson(tau |A|)`, from
    /// unconditional model draws.
    pub count_tv: DistanceEstimate,
    pub bound: BoundReport,
}

impl SweepRow {
    pub const CSV_HEADER: [&'static str; 21] = [
        "model",
        "index",
        "param",
        "c",
        "target_mode",
        "tau",
        "tau_over_c",
        "prob_differ",
        "w_lower",
        "w_estimate",
        "w_stderr",
        "w_witness",
        "count_tv_lower",
        "count_tv_estimate",
        "count_tv_stderr",
        "count_tv_region",
        "bound",
        "quadrature_error",
        "within_bound",
        "reps",
        "seed",
    ];

    /// Certified lower bound at most the theoretical bound plus 3 stderr.
    pub fn within_bound(&self) -> bool {
        self.distance.value <= self.bound.bound_value + 3.0 * self.distance.stderr
    }

    fn record(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let cal = &self.calibration;
        vec![
            cfg.model.name().to_string(),
            self.index.to_string(),
            fmt_f64(self.param),
            fmt_f64(cal.nominal_c),
            serde_json::to_value(cal.mode)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            fmt_f64(cal.tau),
            fmt_f64(cal.tau / cal.nominal_c),
            fmt_f64(self.prob_differ),
            fmt_f64(self.distance.value),
            fmt_f64(self.distance.estimate),
            fmt_f64(self.distance.stderr),
            self.distance.witness.clone(),
            fmt_f64(self.count_tv.value),
            fmt_f64(self.count_tv.estimate),
            fmt_f64(self.count_tv.stderr),
            self.count_tv.witness.clone(),
            fmt_f64(self.bound.bound_value),
            fmt_f64(self.bound.quadrature_error),
            self.within_bound().to_string(),
            cfg.reps.to_string(),
            cfg.seed.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
    /// Fit of `log w_estimate` on `log param`.
    pub fit: RateFit,
    pub elapsed_secs: Vec<f64>,
    pub total_secs: f64,
}

impl ExperimentResult {
    pub fn all_within_bound(&self) -> bool {
        self.rows.iter().all(SweepRow::within_bound)
    }

    pub fn rate_in_range(&self) -> bool {
        (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&self.fit.slope)
            && self.fit.r_squared >= MIN_R_SQUARED
    }

    pub fn passes(&self) -> bool {
        self.all_within_bound() && self.rate_in_range()
    }
}

/// Paths written by [`run_experiment`] into its output directory.
pub struct ExperimentFiles {
    pub results: PathBuf,
    pub fit: PathBuf,
    pub meta: PathBuf,
    pub plot: PathBuf,
}

impl ExperimentFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            results: dir.join("results.csv"),
            fit: dir.join("fit.csv"),
            meta: dir.join("meta.json"),
            plot: dir.join("convergence.svg"),
        }
    }
}

struct RowSink {
    csv: csv::Writer<BufWriter<File>>,
}

impl RowSink {
    fn create(path: &Path) -> Result<Self> {
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "{}", schema_line())?;
        let mut csv = csv::Writer::from_writer(file);
        csv.write_record(SweepRow::CSV_HEADER).map_err(csv_err)?;
        csv.flush()?;
        Ok(Self { csv })
    }

    fn push(&mut self, row: &SweepRow, cfg: &ExperimentConfig) -> Result<()> {
        self.csv.write_record(row.record(cfg)).map_err(csv_err)?;
        // one complete row on disk per finished sweep point
        self.csv.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn coupled_distance<C, R>(
    coupling: &C,
    family_regions: &[Labeled<R>],
    close_pair: &[f64],
    tau: f64,
    cfg: &ExperimentConfig,
    index: u16,
) -> Result<(DistanceEstimate, DistanceEstimate)>
where
    C: Coupling,
    R: Region<C::Point> + Clone + Sync,
{
    let family = lipschitz_family(family_regions, KMAX, close_pair);
    let stream = |task| RngStream::for_replicate(cfg.seed, task, index, 0);
    let pairs = replicates(stream(TASK_PAIRS), cfg.reps, |_, rng| {
        coupling.sample_differing(rng)
    });
    let distance = wasserstein_lower_bound_paired(&pairs, coupling.prob_differ(), &family)?;
    drop(pairs);
    let marginal = replicates(stream(TASK_MARGINAL), cfg.reps, |_, rng| {
        coupling.sample_pair(rng).0
    });
    let count_tv = count_tv_max(
        &marginal,
        family_regions,
        tau,
        &mut stream(TASK_BOOTSTRAP).rng(),
    );
    Ok((distance, count_tv))
}

fn run_point(
    cfg: &ExperimentConfig,
    index: usize,
    param: f64,
    spec: &QuadratureSpec,
) -> Result<SweepRow> {
    let point =
        u16::try_from(index).map_err(|_| Error::config("sweep", "at most 65536 sweep values"))?;
    let cal_stream = RngStream::for_replicate(cfg.seed, TASK_CALIBRATION, point, 0);
    match cfg.model {
        Model::CoxLine => {
            let window = cfg
                .window
                .ok_or_else(|| Error::config("window", "cox-line needs a window"))?;
            let params = ModelParams::cox_line(cfg.c, param)?;
            let calibration = calibrate_target(
                &params,
                &window,
                cfg.target_intensity,
                cfg.calibration_reps,
                cal_stream,
            )?;
            let coupling = CoxLineCoupling::new(&params, &window, calibration.tau, spec)?;
            let scales: Vec<f64> = PLANAR_CLOSE_PAIR
                .iter()
                .map(|d| d * window.inner_radius())
                .collect();
            let regions = cfg.regions.planar(&window);
            let (distance, count_tv) =
                coupled_distance(&coupling, &regions, &scales, calibration.tau, cfg, point)?;
            Ok(SweepRow {
                index,
                param,
                params,
                calibration,
                prob_differ: coupling.prob_differ(),
                distance,
                count_tv,
                bound: cox_bound(&params, &window, spec)?,
            })
        }
        Model::Satellites => {
            let params = ModelParams::satellites(cfg.c, param as u64)?;
            let calibration = calibrate_target(
                &params,
                &Window::unit_disk(),
                cfg.target_intensity,
                cfg.calibration_reps,
                cal_stream,
            )?;
            let coupling = SatelliteCoupling::new(&params, calibration.tau)?;
            let regions = cfg.regions.spherical();
            let (distance, count_tv) = coupled_distance(
                &coupling,
                &regions,
                &SPHERICAL_CLOSE_PAIR,
                calibration.tau,
                cfg,
                point,
            )?;
            Ok(SweepRow {
                index,
                param,
                params,
                calibration,
                prob_differ: coupling.prob_differ(),
                distance,
                count_tv,
                bound: satellite_bound(&params)?,
            })
        }
    }
}

/// Runs the sweep. With `out`, `results.csv` gains one flushed row per
/// finished point, so a failure midway leaves the completed rows on disk;
/// `fit.csv`, `meta.json` and (with `plots`) `convergence.svg` follow at the
/// end.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    plots: bool,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let files = out.map(ExperimentFiles::in_dir);
    let mut sink = files
        .as_ref()
        .map(|f| RowSink::create(&f.results))
        .transpose()?;
    let spec = QuadratureSpec::default();
    let start = Instant::now();
    let mut rows = Vec::with_capacity(cfg.sweep.len());
    let mut elapsed_secs = Vec::with_capacity(cfg.sweep.len());
    for (i, &param) in cfg.sweep.iter().enumerate() {
        let t = Instant::now();
        let row = run_point(cfg, i, param, &spec)?;
        if let Some(s) = sink.as_mut() {
            s.push(&row, cfg)?;
        }
        elapsed_secs.push(t.elapsed().as_secs_f64());
        rows.push(row);
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.param, r.distance.estimate))
        .collect();
    let fit = rate_regression(&points)?;
    let result = ExperimentResult {
        config: cfg.clone(),
        rows,
        fit,
        elapsed_secs,
        total_secs: start.elapsed().as_secs_f64(),
    };
    if let Some(files) = &files {
        write_fit(&files.fit, &result)?;
        write_meta(&files.meta, &result)?;
        if plots {
            std::fs::write(&files.plot, convergence_plot(&result))?;
        }
    }
    Ok(result)
}

fn write_fit(path: &Path, r: &ExperimentResult) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{}", schema_line())?;
    let mut csv = csv::Writer::from_writer(file);
    csv.write_record([
        "model",
        "points",
        "slope",
        "intercept",
        "r_squared",
        "slope_lo",
        "slope_hi",
        "in_range",
    ])
    .map_err(csv_err)?;
    csv.write_record([
        r.config.model.name().to_string(),
        r.fit.pairs.len().to_string(),
        fmt_f64(r.fit.slope),
        fmt_f64(r.fit.intercept),
        fmt_f64(r.fit.r_squared),
        fmt_f64(SLOPE_RANGE.0),
        fmt_f64(SLOPE_RANGE.1),
        r.rate_in_range().to_string(),
    ])
    .map_err(csv_err)?;
    csv.flush()?;
    Ok(())
}

fn write_meta(path: &Path, r: &ExperimentResult) -> Result<()> {
    let c = r.config.c;
    let meta = serde_json::json!({
        "schema_version": super::SCHEMA_VERSION,
        "crate_version": env!("CARGO_PKG_VERSION"),
        "config": r.config,
        "elapsed_secs_per_point": r.elapsed_secs,
        "total_elapsed_secs": r.total_secs,
        "intensity_convention": {
            "nominal_c": c,
            "half_c": 0.5 * c,
            "target_mode": r.config.target_intensity,
            "tau": r.rows.iter().map(|row| row.calibration.tau).collect::<Vec<_>>(),
            "tau_over_c": r.rows.iter().map(|row| row.calibration.tau / c).collect::<Vec<_>>(),
        },
        "fit": {
            "slope": r.fit.slope,
            "intercept": r.fit.intercept,
            "r_squared": r.fit.r_squared,
            "in_range": r.rate_in_range(),
        },
        "all_within_bound": r.all_within_bound(),
    });
    let text =
        serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn convergence_plot(r: &ExperimentResult) -> String {
    let xs = || r.rows.iter().map(|row| row.param);
    let fitted = xs()
        .map(|x| (x, (r.fit.intercept + r.fit.slope * x.ln()).exp()))
        .collect();
    loglog_svg(
        &format!(
            "{} convergence (seed {})",
            r.config.model.name(),
            r.config.seed
        ),
        r.config.model.param_name(),
        "distance",
        &[
            Series::points(
                "W lower-bound estimate",
                "#1f77b4",
                xs().zip(r.rows.iter().map(|row| row.distance.estimate))
                    .collect(),
            ),
            Series::line(
                "theoretical bound",
                "#d62728",
                xs().zip(r.rows.iter().map(|row| row.bound.bound_value))
                    .collect(),
            ),
            Series::dashed(&format!("fit, slope {:.3}", r.fit.slope), "#7f7f7f", fitted),
        ],
    )
}
