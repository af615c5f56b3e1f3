use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use coxpp::coxmodels::{sample_cox_line, sample_satellites};
use coxpp::harness::{
    run_checks, run_experiment, CheckGroup, ExperimentConfig, ExperimentResult, Model,
    ValidationOptions,
};
use coxpp::steinbound::{cox_bound, satellite_bound, BoundReport};
use coxpp::{AnyConfiguration, Error, ModelParams, QuadratureSpec, RngStream, Window};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "coxpp",
    version,
    about = "Cox point processes vs Poisson: simulation, bounds, experiments, checks"
)]
struct Cli {
    /// Master seed (default 1; overrides the config file's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replicates per sweep point or per check (overrides defaults and the config file).
    #[arg(long, global = true)]
    reps: Option<u32>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Experiment config (TOML with an [experiment] table).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    plots: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one realization and write it to points.csv.
    Simulate {
        model: ModelArg,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Evaluate the explicit distance bound.
    Bound {
        model: ModelArg,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run a convergence sweep; writes results.csv, fit.csv and meta.json.
    Experiment { which: ExperimentArg },
    /// Run validation checks; writes validation.csv.
    Check { which: CheckArg },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    CoxLine,
    Satellites,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    ConvergeCox,
    ConvergeSat,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Mecke,
    Invariance,
    Glauber,
    Coarea,
    All,
}

#[derive(Args)]
struct ParamArgs {
    /// Limit intensity c.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Line intensity (cox-line).
    #[arg(long, default_value_t = 10.0)]
    lambda: f64,
    /// Orbit count (satellites).
    #[arg(long, default_value_t = 20)]
    n: u64,
    /// Window descriptor, `disk:cx,cy,r` or `rect:x0,y0,x1,y1` (cox-line).
    #[arg(long, default_value = "disk:0,0,1")]
    window: String,
}

impl ParamArgs {
    fn resolve(&self, model: ModelArg) -> coxpp::Result<(ModelParams, Window)> {
        let window: Window = self.window.parse()?;
        let params = match model {
            ModelArg::CoxLine => ModelParams::cox_line(self.c, self.lambda)?,
            ModelArg::Satellites => ModelParams::satellites(self.c, self.n)?,
        };
        Ok((params, window))
    }
}

/// Exit status 2 for bad input, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config { .. } | Error::InvalidParameter(_) | Error::InvalidWindow(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// `Ok(false)` means a check or acceptance condition failed.
fn run(cli: &Cli) -> anyhow::Result<bool> {
    if cli.config.is_some() && !matches!(cli.command, Command::Experiment { .. }) {
        return Err(Error::Config {
            field: "--config".into(),
            message: "only the experiment subcommand reads a config file".into(),
        }
        .into());
    }
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Simulate { model, params } => simulate(*model, params, seed, &cli.out),
        Command::Bound { model, params } => bound(*model, params, &cli.out),
        Command::Experiment { which } => experiment(cli, *which),
        Command::Check { which } => check(cli, *which, seed),
    }
}

fn simulate(model: ModelArg, args: &ParamArgs, seed: u64, out: &Path) -> anyhow::Result<bool> {
    let (params, window) = args.resolve(model)?;
    let mut rng = RngStream::new(seed, 0).rng();
    let (cfg, parents) = match model {
        ModelArg::CoxLine => {
            let s = sample_cox_line(&params, &window, &mut rng)?;
            (AnyConfiguration::Planar(s.points), s.lines.len())
        }
        ModelArg::Satellites => {
            let s = sample_satellites(&params, &mut rng)?;
            (AnyConfiguration::Spherical(s.points), s.orbits.len())
        }
    };
    let path = out.join("points.csv");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    cfg.write_csv(&mut file)?;
    std::io::Write::flush(&mut file)?;
    let summary = serde_json::json!({
        "params": params,
        "window": matches!(model, ModelArg::CoxLine).then(|| window.to_string()),
        "seed": seed,
        "stream": 0,
        "parents": parents,
        "points": cfg.len(),
        "output": path.display().to_string(),
    });
    println!("{summary}");
    Ok(true)
}

fn bound(model: ModelArg, args: &ParamArgs, out: &Path) -> anyhow::Result<bool> {
    let (params, window) = args.resolve(model)?;
    let report: BoundReport = match model {
        ModelArg::CoxLine => cox_bound(&params, &window, &QuadratureSpec::default())?,
        ModelArg::Satellites => satellite_bound(&params)?,
    };
    let text = format!("{}\n{}\n", BoundReport::CSV_HEADER, report.csv_row());
    print!("{text}");
    let closed = report
        .closed_form
        .map_or_else(|| "none".to_string(), |v| format!("{v:.12}"));
    println!(
        "{} bound {:.12} (quadrature error {:.1e}, closed form {closed})",
        report.params.model_name(),
        report.bound_value,
        report.quadrature_error
    );
    std::fs::write(out.join("bound.csv"), text)?;
    Ok(report.consistent())
}

fn experiment(cli: &Cli, which: ExperimentArg) -> anyhow::Result<bool> {
    let model = match which {
        ExperimentArg::ConvergeCox => Model::CoxLine,
        ExperimentArg::ConvergeSat => Model::Satellites,
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_path(path)?;
            if cfg.model != model {
                return Err(Error::Config {
                    field: "model".into(),
                    message: format!(
                        "config describes {} but the subcommand runs {}",
                        cfg.model.name(),
                        model.name()
                    ),
                }
                .into());
            }
            cfg
        }
        None => match model {
            Model::CoxLine => ExperimentConfig::converge_cox(DEFAULT_SEED),
            Model::Satellites => ExperimentConfig::converge_sat(DEFAULT_SEED),
        },
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = cli.reps {
        cfg.reps = reps;
    }
    let result = run_experiment(&cfg, Some(&cli.out), cli.plots)?;
    report_experiment(&result);
    Ok(result.passes())
}

fn report_experiment(r: &ExperimentResult) {
    println!(
        "{:>10} {:>12} {:>12} {:>12} {:>12} {:>8}  witness",
        r.config.model.param_name(),
        "w_lower",
        "w_estimate",
        "bound",
        "tau",
        "ok"
    );
    for row in &r.rows {
        println!(
            "{:>10} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.6} {:>8}  {}",
            row.param,
            row.distance.value,
            row.distance.estimate,
            row.bound.bound_value,
            row.calibration.tau,
            row.within_bound(),
            row.distance.witness
        );
    }
    println!(
        "slope {:.4}, r^2 {:.4}, in range: {}; target intensity tau/c = {:.4} (c = {})",
        r.fit.slope,
        r.fit.r_squared,
        r.rate_in_range(),
        r.rows
            .last()
            .map_or(f64::NAN, |row| row.calibration.tau / r.config.c),
        r.config.c
    );
}

fn check(cli: &Cli, which: CheckArg, seed: u64) -> anyhow::Result<bool> {
    let groups = match which {
        CheckArg::Mecke => vec![CheckGroup::Mecke],
        CheckArg::Invariance => vec![CheckGroup::Invariance],
        CheckArg::Glauber => vec![CheckGroup::Glauber],
        CheckArg::Coarea => vec![CheckGroup::Coarea],
        CheckArg::All => CheckGroup::ALL.to_vec(),
    };
    if cli.reps == Some(0) {
        bail!(Error::Config {
            field: "--reps".into(),
            message: "must be positive".into()
        });
    }
    let report = run_checks(&ValidationOptions {
        seed,
        groups,
        reps: cli.reps,
    });
    let path = cli.out.join("validation.csv");
    report.write_csv(&path)?;
    let failed: Vec<_> = report.failures().collect();
    for f in &failed {
        println!(
            "FAIL {}: lhs {:.6e} rhs {:.6e} tolerance {:.3e}",
            f.check_name, f.lhs, f.rhs, f.tolerance
        );
    }
    println!(
        "{} checks, {} failed; wrote {}",
        report.rows.len(),
        failed.len(),
        path.display()
    );
    Ok(failed.is_empty())
}
