use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::csv_err;
use super::{fmt_f64, schema_line};
use crate::diagnostics::{
    invariance_check, invariance_functional_check, mecke_check_bpp, mecke_check_ppp, IdentityCheck,
    MeckeFunctional, RegionTv,
};
use crate::error::Result;
use crate::functional::{check_family, Functional};
use crate::geometry::{Point2, Window};
use crate::glauber::{
    contraction_estimate, generator_apply, semigroup_composition_check, semigroup_sample,
    semigroup_trajectory_consistency, GlauberSpec,
};
use crate::pointprocess::{
    planar_region_set, sample_ppp_window, sample_uniform_sphere, spherical_region_set,
    Configuration, Labeled, ModelParams, PlanarRegion,
};
use crate::rng::{replicates, RngStream};
use crate::steinbound::{
    chord_square_integral, coarea_check, cox_bound, Integrand, QuadratureSpec,
};

/// Identity checks: `|lhs - rhs| <= 3` combined stderr.
pub const IDENTITY_K: f64 = 3.0;
pub const COAREA_TOLERANCE: f64 = 1e-6;
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-8;

pub const MECKE_REPS: u32 = 100_000;
pub const INVARIANCE_REPS: u32 = 100_000;
pub const GLAUBER_REPS: u32 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckGroup {
    Mecke,
    Invariance,
    Glauber,
    Coarea,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 4] = [
        CheckGroup::Mecke,
        CheckGroup::Invariance,
        CheckGroup::Glauber,
        CheckGroup::Coarea,
    ];

    fn task_base(self) -> u16 {
        match self {
            CheckGroup::Mecke => 0x100,
            CheckGroup::Invariance => 0x200,
            CheckGroup::Glauber => 0x300,
            CheckGroup::Coarea => 0x400,
        }
    }
}

/// One line of `validation.csv`. For TV rows `lhs` is the TV, `rhs` is 0,
/// `stderr` is the `1/sqrt(reps)` noise scale and `tolerance` is the
/// `2/sqrt(reps)` floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
}

impl CheckRow {
    pub const CSV_HEADER: [&'static str; 7] = [
        "check_name",
        "lhs",
        "rhs",
        "stderr",
        "tolerance",
        "pass",
        "seed",
    ];

    fn two_sided(name: String, lhs: f64, rhs: f64, stderr: f64, tolerance: f64, seed: u64) -> Self {
        Self {
            check_name: name,
            lhs,
            rhs,
            stderr,
            tolerance,
            pass: (lhs - rhs).abs() <= tolerance,
            seed,
        }
    }

    fn identity(name: String, lhs: f64, rhs: f64, stderr: f64, seed: u64) -> Self {
        Self::two_sided(name, lhs, rhs, stderr, IDENTITY_K * stderr + 1e-12, seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    pub seed: u64,
    pub groups: Vec<CheckGroup>,
    /// Replaces every group's default replicate count.
    pub reps: Option<u32>,
}

impl ValidationOptions {
    pub fn all(seed: u64) -> Self {
        Self {
            seed,
            groups: CheckGroup::ALL.to_vec(),
            reps: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: Vec<CheckRow>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "{}", schema_line())?;
        let mut csv = csv::Writer::from_writer(buf);
        csv.write_record(CheckRow::CSV_HEADER).map_err(csv_err)?;
        for r in &self.rows {
            csv.write_record([
                r.check_name.clone(),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                fmt_f64(r.stderr),
                fmt_f64(r.tolerance),
                r.pass.to_string(),
                r.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
        csv.into_inner()
            .map_err(|e| std::io::Error::other(e.to_string()).into())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

/// All groups at their default replicate counts.
pub fn run_validation_suite(seed: u64) -> ValidationReport {
    run_checks(&ValidationOptions::all(seed))
}

/// Runs the selected groups in [`CheckGroup::ALL`] order. A check that
/// errors is recorded as a failed row and the suite continues.
pub fn run_checks(opts: &ValidationOptions) -> ValidationReport {
    let mut rows = Vec::new();
    for group in CheckGroup::ALL
        .into_iter()
        .filter(|g| opts.groups.contains(g))
    {
        let stream = |k: u16| RngStream::for_replicate(opts.seed, group.task_base() + k, 0, 0);
        let ctx = Ctx {
            seed: opts.seed,
            reps: opts.reps,
            rows: &mut rows,
        };
        match group {
            CheckGroup::Mecke => mecke(ctx, stream),
            CheckGroup::Invariance => invariance(ctx, stream),
            CheckGroup::Glauber => glauber(ctx, stream),
            CheckGroup::Coarea => coarea(ctx),
        }
    }
    ValidationReport { rows }
}

struct Ctx<'a> {
    seed: u64,
    reps: Option<u32>,
    rows: &'a mut Vec<CheckRow>,
}

impl Ctx<'_> {
    fn reps(&self, default: u32) -> u32 {
        self.reps.unwrap_or(default)
    }

    fn failed(&mut self, name: String, err: impl std::fmt::Display) {
        eprintln!("{name}: {err}");
        self.rows.push(CheckRow {
            check_name: name,
            lhs: f64::NAN,
            rhs: f64::NAN,
            stderr: f64::NAN,
            tolerance: f64::NAN,
            pass: false,
            seed: self.seed,
        });
    }

    fn identity(&mut self, c: &IdentityCheck) {
        self.rows.push(CheckRow::identity(
            c.name.clone(),
            c.lhs,
            c.rhs,
            c.stderr(),
            self.seed,
        ));
        if let Some(a) = c.analytic {
            self.rows.push(CheckRow::identity(
                format!("{}:lhs_vs_oracle", c.name),
                c.lhs,
                a,
                c.stderr_lhs,
                self.seed,
            ));
            self.rows.push(CheckRow::identity(
                format!("{}:rhs_vs_oracle", c.name),
                c.rhs,
                a,
                c.stderr_rhs,
                self.seed,
            ));
        }
    }

    fn tv(&mut self, prefix: &str, res: &[RegionTv], reps: u32) {
        let scale = 1.0 / (reps as f64).sqrt();
        for r in res {
            self.rows.push(CheckRow {
                check_name: format!("{prefix}:{}", r.region),
                lhs: r.tv,
                rhs: 0.0,
                stderr: scale,
                tolerance: r.threshold,
                pass: r.passes(),
                seed: self.seed,
            });
        }
    }
}

/// Each registry functional unmarked and marked by the first region.
fn mecke_functionals<R: Clone>(regions: &[Labeled<R>]) -> Vec<MeckeFunctional<R>> {
    let family = check_family(regions);
    let mut out: Vec<MeckeFunctional<R>> = family
        .iter()
        .map(|f| MeckeFunctional {
            mark: None,
            inner: f.clone(),
        })
        .collect();
    out.extend(family.into_iter().map(|f| MeckeFunctional {
        mark: Some(regions[0].clone()),
        inner: f,
    }));
    out
}

fn pick<R: Clone>(all: Vec<Labeled<R>>, idx: &[usize]) -> Vec<Labeled<R>> {
    idx.iter().map(|&i| all[i].clone()).collect()
}

fn mecke(mut ctx: Ctx, stream: impl Fn(u16) -> RngStream) {
    let reps = ctx.reps(MECKE_REPS);
    let window = Window::unit_square();
    let planar = pick(planar_region_set(&window), &[0, 6, 17]);
    for (j, f) in mecke_functionals(&planar).iter().enumerate() {
        ctx.identity(&mecke_check_ppp(f, 5.0, &window, reps, stream(j as u16)));
    }
    let spherical = pick(spherical_region_set(), &[0, 3, 6]);
    for (j, f) in mecke_functionals(&spherical).iter().enumerate() {
        let c = mecke_check_bpp(
            f,
            10,
            |rng| sample_uniform_sphere(rng),
            1.0,
            reps,
            stream(0x80 + j as u16),
        );
        ctx.identity(&c);
    }
}

pub const INVARIANCE_LAMBDA: f64 = 2.0;
pub const INVARIANCE_TIMES: [f64; 3] = [0.25, 0.5, 0.75];

fn invariance(mut ctx: Ctx, stream: impl Fn(u16) -> RngStream) {
    let reps = ctx.reps(INVARIANCE_REPS);
    let window = Window::unit_square();
    let regions = planar_region_set(&window);
    for (k, t) in INVARIANCE_TIMES.into_iter().enumerate() {
        let name = format!("invariance:t={t}");
        match invariance_check(
            INVARIANCE_LAMBDA,
            &window,
            t,
            &regions,
            reps,
            stream(k as u16),
        ) {
            Ok(res) => ctx.tv(&name, &res, reps),
            Err(e) => ctx.failed(name, e),
        }
        let name = format!("invariance_joint:t={t}");
        let joint = joint_indicators(&regions);
        match invariance_functional_check(
            INVARIANCE_LAMBDA,
            &window,
            t,
            &joint,
            reps,
            stream(k as u16),
        ) {
            Ok(res) => res.iter().for_each(|c| {
                ctx.identity(&IdentityCheck {
                    name: format!("{name}:{}", c.name),
                    ..c.clone()
                })
            }),
            Err(e) => ctx.failed(name, e),
        }
    }
}

/// Two-region product indicators: adjacent cells, cell against annulus,
/// nested annuli.
fn joint_indicators<R: Clone>(regions: &[Labeled<R>]) -> Vec<Functional<R>> {
    [
        (0, vec![0], 1, vec![0]),
        (5, vec![1], 16, vec![1]),
        (16, vec![0], 17, vec![0, 1]),
        (0, vec![1, 2], 18, vec![0]),
    ]
    .into_iter()
    .map(|(a, set_a, b, set_b)| Functional::Product {
        a: regions[a].clone(),
        set_a,
        b: regions[b].clone(),
        set_b,
    })
    .collect()
}

pub const GLAUBER_TIMES: [f64; 3] = [0.5, 2.0, 20.0];
pub const CONTRACTION_TIMES: [f64; 3] = [0.5, 1.0, 2.0];

/// Eight points packed into a corner: far from the stationary law.
fn corner_cluster() -> Configuration<Point2> {
    (0..8).map(|i| Point2::new(0.02 * i as f64, 0.03)).collect()
}

fn identity_from_samples(ctx: &mut Ctx, name: String, a: &[f64], b: Option<&[f64]>) {
    let (ma, sa) = crate::diagnostics::mean_se(a);
    let (mb, sb) = b.map_or((0.0, 0.0), crate::diagnostics::mean_se);
    ctx.rows
        .push(CheckRow::identity(name, ma, mb, sa.hypot(sb), ctx.seed));
}

fn glauber(mut ctx: Ctx, stream: impl Fn(u16) -> RngStream) {
    let reps = ctx.reps(GLAUBER_REPS);
    let spec = GlauberSpec::new(Window::unit_square(), 2.0, 1.0).expect("valid spec");
    let regions = pick(planar_region_set(&spec.window), &[0, 5, 18]);
    let omega0 = corner_cluster();
    let family = check_family(&regions);

    for (k, t) in GLAUBER_TIMES.into_iter().enumerate() {
        let res =
            semigroup_trajectory_consistency(&omega0, &spec, t, &regions, reps, stream(k as u16));
        ctx.tv(&format!("glauber_trajectory:t={t}"), &res, reps);
    }
    let res = semigroup_composition_check(&omega0, &spec, 0.4, 0.8, &regions, reps, stream(0x10));
    ctx.tv("glauber_semigroup:s=0.4,t=0.8", &res, reps);

    for (j, f) in family.iter().enumerate() {
        let j = j as u16;
        let pt = replicates(stream(0x20 + j), reps, |_, rng| {
            let phi = sample_ppp_window(&spec.window, spec.lambda, rng);
            f.eval(&semigroup_sample(&phi, 1.0, &spec, rng))
        });
        let direct = replicates(stream(0x40 + j), reps, |_, rng| {
            f.eval(&sample_ppp_window(&spec.window, spec.lambda, rng))
        });
        identity_from_samples(
            &mut ctx,
            format!("glauber_stationary:t=1:{}", f.name()),
            &pt,
            Some(&direct),
        );

        let gen = replicates(stream(0x60 + j), reps, |_, rng| {
            let phi = sample_ppp_window(&spec.window, spec.lambda, rng);
            generator_apply(f, &phi, &spec, 4, rng).0
        });
        identity_from_samples(
            &mut ctx,
            format!("glauber_generator:{}", f.name()),
            &gen,
            None,
        );
    }

    let z = Point2::new(0.1, 0.05);
    let lipschitz: Vec<&Functional<PlanarRegion>> =
        family.iter().filter(|f| f.is_lipschitz()).collect();
    for (k, t) in CONTRACTION_TIMES.into_iter().enumerate() {
        for (j, f) in lipschitz.iter().enumerate() {
            let name = format!("glauber_contraction:t={t}:{}", f.name());
            let s = stream(0x80 + 0x20 * k as u16 + j as u16);
            match contraction_estimate(f, &omega0, z, t, &spec, reps, s) {
                Ok(e) => {
                    let bound = (-t).exp();
                    let tolerance = IDENTITY_K * e.stderr;
                    ctx.rows.push(CheckRow {
                        check_name: name,
                        lhs: e.mean_abs,
                        rhs: bound,
                        stderr: e.stderr,
                        tolerance,
                        pass: e.mean_abs <= bound + tolerance,
                        seed: ctx.seed,
                    });
                }
                Err(e) => ctx.failed(name, e),
            }
        }
    }
}

fn coarea(mut ctx: Ctx) {
    let spec = QuadratureSpec::default();
    let one = Integrand::Constant { value: 1.0 };
    let cases: Vec<(Integrand, Window, f64, f64)> = vec![
        (one.clone(), Window::unit_square(), 0.0, 1.0),
        (one.clone(), Window::unit_disk(), 0.0, 0.5),
        (
            one,
            Window::disk(Point2::new(5.0, 1.0), 1.0).expect("valid disk"),
            0.0,
            1.0,
        ),
        (
            Integrand::Gaussian {
                center: Point2::new(0.4, 0.6),
                sigma: 0.3,
            },
            Window::unit_square(),
            0.3,
            1.0,
        ),
        (
            Integrand::Monomial { px: 2, py: 1 },
            Window::unit_square(),
            0.3,
            1.0,
        ),
    ];
    for (f, w, theta, expected) in cases {
        let name = format!("coarea_ratio:{}:{w}:theta={theta}", f.name());
        match coarea_check(&f, &w, theta, &spec) {
            Ok(r) => ctx.rows.push(CheckRow::two_sided(
                name,
                r.ratio,
                expected,
                r.error,
                COAREA_TOLERANCE,
                ctx.seed,
            )),
            Err(e) => ctx.failed(name, e),
        }
    }
    // chord-square integral of a disk is 16 R^3 / 3 wherever it sits
    for (cx, cy, r) in [(0.0, 0.0, 1.0), (0.0, 0.0, 0.5), (0.3, -0.2, 2.0)] {
        let w = Window::disk(Point2::new(cx, cy), r).expect("valid disk");
        let name = format!("chord_square_closed_form:{w}");
        match chord_square_integral(&w, &spec) {
            Ok(e) => ctx.rows.push(CheckRow::two_sided(
                name,
                e.value,
                16.0 * r * r * r / 3.0,
                e.error,
                CLOSED_FORM_TOLERANCE,
                ctx.seed,
            )),
            Err(e) => ctx.failed(name, e),
        }
    }
    for lambda in [5.0, 80.0] {
        let name = format!("cox_bound_closed_form:lambda={lambda}");
        let report = ModelParams::cox_line(1.0, lambda)
            .and_then(|p| cox_bound(&p, &Window::unit_disk(), &spec));
        match report {
            Ok(b) => ctx.rows.push(CheckRow::two_sided(
                name,
                b.bound_value,
                b.closed_form.unwrap_or(f64::NAN),
                b.quadrature_error,
                CLOSED_FORM_TOLERANCE,
                ctx.seed,
            )),
            Err(e) => ctx.failed(name, e),
        }
    }
}
