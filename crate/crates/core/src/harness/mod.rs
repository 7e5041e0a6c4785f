//! JSON-configured experiments, CSV/JSON artifacts, presets and the self-test.

mod config;
pub mod selftest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

pub use config::{
    ExperimentConfig, ExperimentKind, GSpec, KernelSpec, NamedG, NamedSymbol, Powers, Symbol, SymbolSpec,
    ALPHA_TOLERANCE,
};

use crate::arg_2pi;
use crate::clark::{clark_measure, ClarkMeasure};
use crate::error::{Error, Result};
use crate::modelspace::{default_quadrature, tm_basis, ModelBasis};
use crate::szego::{
    example1_zeros, example2_run, fixed_alpha_sweep, szego_g_sweep, szego_power_sweep, weight_operator, ConvergenceRow,
    RealFastSearch, SweepOptions, ZeroSequence,
};
use crate::tto::{delta_average, delta_operator, OperatorMatrix};

/// Relative error allowed at the largest `n` of a trend check.
pub const TREND_RELATIVE_TOLERANCE: f64 = 0.10;

pub const PRESET_NAMES: [&str; 4] = ["classical", "harmonic", "example1", "example2"];

/// Process exit status of an experiment or the self-test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    /// Numerical breakdown or I/O failure.
    Failure,
    Config,
    Tolerance,
    HypothesisSearch,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::Config => 2,
            ExitStatus::Tolerance => 3,
            ExitStatus::HypothesisSearch => 4,
        }
    }

    pub fn from_error(err: &Error) -> Self {
        match err {
            Error::Config(_) | Error::BoundaryGuard { .. } | Error::InvalidArgument(_) | Error::NotUnimodular(_) => {
                ExitStatus::Config
            }
            Error::HypothesisSearch(_) => ExitStatus::HypothesisSearch,
            _ => ExitStatus::Failure,
        }
    }
}

/// A declared tolerance and whether it held.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    /// Passes when `value ≤ tol`.
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value <= tol, format!("{value:e} <= {tol:e}"))
    }

    pub fn ledger_line(&self) -> String {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        format!("{mark}  {}  ({})", self.name, self.detail)
    }
}

/// A file produced by an experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub rows: serde_json::Value,
    pub checks: Vec<Check>,
    pub versions: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn checks(&self) -> &[Check] {
        &self.summary.checks
    }

    pub fn status(&self) -> ExitStatus {
        if self.checks().iter().all(|c| c.passed) {
            ExitStatus::Success
        } else {
            ExitStatus::Tolerance
        }
    }

    pub fn summary_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.summary)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes every artifact and `<name>_summary.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.artifacts.len() + 1);
        for a in &self.artifacts {
            let path = dir.join(&a.file_name);
            std::fs::write(&path, &a.contents)?;
            written.push(path);
        }
        let path = dir.join(format!("{}_summary.json", self.summary.config.name));
        std::fs::write(&path, self.summary_json()?)?;
        written.push(path);
        Ok(written)
    }
}

fn versions() -> serde_json::Value {
    serde_json::json!({
        "tto-core": env!("CARGO_PKG_VERSION"),
        "schema": 1,
    })
}

/// Shortest round-trip scientific notation, so repeated runs are byte-identical.
pub fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

pub fn sweep_csv(rows: &[ConvergenceRow]) -> String {
    let with_delta = rows.iter().any(|r| r.delta_norm.is_some());
    let mut s = String::from("n,trace_re,trace_im,limit_re,limit_im,abs_error");
    if with_delta {
        s.push_str(",delta_norm");
    }
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{},{}",
            r.n,
            fmt_float(r.trace_value.re),
            fmt_float(r.trace_value.im),
            fmt_float(r.limit_value.re),
            fmt_float(r.limit_value.im),
            fmt_float(r.abs_error)
        );
        if with_delta {
            let _ = write!(s, ",{}", fmt_float(r.delta_norm.unwrap_or(f64::NAN)));
        }
        s.push('\n');
    }
    s
}

/// `(Arg ζ_k, weight_k)` rows with `Arg` in `[0, 2π)`.
pub fn clark_csv(mu: &ClarkMeasure) -> String {
    let mut s = String::from("arg,weight\n");
    for (z, w) in mu.atoms().iter().zip(mu.weights()) {
        let _ = writeln!(s, "{},{}", fmt_float(arg_2pi(*z)), fmt_float(*w));
    }
    s
}

pub fn operator_csv(op: &OperatorMatrix) -> Result<String> {
    let mut buf = Vec::new();
    op.write_csv(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn zeros_json(zeros: &[Complex64]) -> serde_json::Value {
    serde_json::Value::Array(zeros.iter().map(|z| serde_json::json!([z.re, z.im])).collect())
}

fn rows_json(rows: &[ConvergenceRow]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|r| {
                let mut v = serde_json::json!({
                    "n": r.n,
                    "trace_re": r.trace_value.re,
                    "trace_im": r.trace_value.im,
                    "limit_re": r.limit_value.re,
                    "limit_im": r.limit_value.im,
                    "abs_error": r.abs_error,
                });
                if let Some(d) = r.delta_norm {
                    v["delta_norm"] = serde_json::json!(d);
                }
                v
            })
            .collect(),
    )
}

/// Error decreasing from the first to the last `n`, and relative error at
/// the last `n` within [`TREND_RELATIVE_TOLERANCE`]. The relative error is
/// taken against `max(|limit|, scale)`, so a vanishing limit is measured on
/// the size of the integrand.
pub fn trend_checks(label: &str, rows: &[ConvergenceRow], scale: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    if rows.len() >= 2 {
        out.push(Check::new(
            format!("{label}: error at n={} below error at n={}", last.n, first.n),
            last.abs_error < first.abs_error || last.abs_error <= 1e-12,
            format!("{:e} vs {:e}", last.abs_error, first.abs_error),
        ));
    }
    let denom = last.limit_value.norm().max(scale);
    out.push(Check::at_most(
        format!("{label}: relative error at n={}", last.n),
        last.abs_error / denom,
        TREND_RELATIVE_TOLERANCE,
    ));
    out
}

fn is_classical_two_cos(config: &ExperimentConfig) -> bool {
    config.sequence == ZeroSequence::ConstantZero && config.symbol == SymbolSpec::Named(NamedSymbol::TwoCos)
}

fn sweep_options(config: &ExperimentConfig) -> SweepOptions {
    SweepOptions {
        quadrature_points: config.quadrature_points,
    }
}

fn basis_for(config: &ExperimentConfig, n: usize) -> Result<ModelBasis> {
    let product = config.sequence.product(n)?;
    let m = config.quadrature_points.unwrap_or_else(|| default_quadrature(&product));
    tm_basis(&product, m)
}

/// Runs a validated experiment. Tolerance failures are reported in the
/// checks, not as errors.
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    let (rows, checks, artifacts) = match config.experiment {
        ExperimentKind::Power => run_power(config)?,
        ExperimentKind::Functional => run_functional(config)?,
        ExperimentKind::FixedAlpha => run_fixed_alpha(config)?,
        ExperimentKind::Example1 => run_example1(config)?,
        ExperimentKind::Example2 => run_example2(config)?,
    };
    Ok(Outcome {
        summary: Summary {
            config: config.clone(),
            rows,
            checks,
            versions: versions(),
        },
        artifacts,
    })
}

type Parts = (serde_json::Value, Vec<Check>, Vec<Artifact>);

fn run_power(config: &ExperimentConfig) -> Result<Parts> {
    let symbol = config.symbol.build(&config.sequence)?;
    let f = |z: Complex64| symbol.eval(z);
    let mut rows = serde_json::Map::new();
    let mut checks = Vec::new();
    let mut artifacts = Vec::new();
    for p in config.p.to_vec() {
        let table = format!("{}_p{p}", config.name);
        let sweep = szego_power_sweep(&config.sequence, f, p, &config.ns, sweep_options(config))?;
        if is_classical_two_cos(config) && p == 2 {
            let worst = sweep
                .iter()
                .map(|r| (r.trace_value - Complex64::new(2.0 * (r.n as f64 - 1.0) / r.n as f64, 0.0)).norm())
                .fold(0.0, f64::max);
            checks.push(Check::at_most(format!("{table}: rows equal 2(n-1)/n"), worst, 1e-10));
            if let Some(r) = sweep.iter().find(|r| r.n == 256) {
                checks.push(Check::at_most(
                    format!("{table}: abs_error at n=256"),
                    r.abs_error,
                    0.008,
                ));
            }
        }
        if !config.sequence.is_blaschke() {
            checks.extend(trend_checks(&table, &sweep, symbol.abs_moment(p)));
        }
        rows.insert(table.clone(), rows_json(&sweep));
        artifacts.push(Artifact {
            file_name: format!("{table}.csv"),
            contents: sweep_csv(&sweep),
        });
    }
    checks.push(weight_average_check(config)?);
    Ok((serde_json::Value::Object(rows), checks, artifacts))
}

/// `T[1/|B'|]` against the midpoint average of `Δ^α` at the smallest `n`.
fn weight_average_check(config: &ExperimentConfig) -> Result<Check> {
    let n = config.ns[0];
    let basis = basis_for(config, n)?;
    let avg = delta_average(&basis, config.alpha_nodes)?;
    let w = weight_operator(&basis);
    Ok(Check::at_most(
        format!("weight operator equals the alpha-average of Delta at n={n}"),
        w.frobenius_distance(&avg)?,
        1e-6,
    ))
}

fn run_functional(config: &ExperimentConfig) -> Result<Parts> {
    let symbol = config.symbol.build(&config.sequence)?;
    let g = config.g.clone().expect("validated");
    let opts = sweep_options(config);
    let real = |z: Complex64| symbol.eval(z).re;
    let sweep = szego_g_sweep(&config.sequence, real, |x| g.eval(x), &config.ns, opts)?;
    let table = format!("{}_g", config.name);
    let mut checks = Vec::new();
    if let Some(coeffs) = g.polynomial() {
        let complex = |z: Complex64| symbol.eval(z);
        let mut combo = vec![Complex64::new(0.0, 0.0); config.ns.len()];
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let rows = szego_power_sweep(&config.sequence, complex, k as u32, &config.ns, opts)?;
            for (acc, r) in combo.iter_mut().zip(&rows) {
                *acc += r.trace_value * c;
            }
        }
        let worst = sweep
            .iter()
            .zip(&combo)
            .map(|(r, c)| (r.trace_value - c).norm())
            .fold(0.0, f64::max);
        checks.push(Check::at_most(
            format!("{table}: matches the power-sweep combination"),
            worst,
            1e-9,
        ));
    }
    if is_classical_two_cos(config) && g == GSpec::Named(NamedG::Abs) {
        checks.push(Check::at_most(
            format!("{table}: limit equals 4/pi"),
            (sweep[0].limit_value.re - config::ABS_TWO_COS_MEAN).abs(),
            1e-8,
        ));
    }
    if !config.sequence.is_blaschke() {
        let scale = crate::szego::circle_mean(|z| Complex64::new(g.eval(real(z)).abs(), 0.0)).re;
        checks.extend(trend_checks(&table, &sweep, scale));
    }
    let mut rows = serde_json::Map::new();
    rows.insert(table.clone(), rows_json(&sweep));
    Ok((
        serde_json::Value::Object(rows),
        checks,
        vec![Artifact {
            file_name: format!("{table}.csv"),
            contents: sweep_csv(&sweep),
        }],
    ))
}

fn run_fixed_alpha(config: &ExperimentConfig) -> Result<Parts> {
    let symbol = config.symbol.build(&config.sequence)?;
    let f = |z: Complex64| symbol.eval(z);
    let mut rows = serde_json::Map::new();
    let mut checks = Vec::new();
    let mut artifacts = Vec::new();
    for p in config.p.to_vec() {
        let table = format!("{}_alpha_p{p}", config.name);
        let sweep = fixed_alpha_sweep(
            &config.sequence,
            config.alpha(),
            f,
            p,
            &config.ns,
            sweep_options(config),
        )?;
        if !config.sequence.is_blaschke() {
            let mut worst = f64::NEG_INFINITY;
            for r in &sweep {
                let bound = 2.0 / config.sequence.blaschke_sum(r.n)?;
                worst = worst.max(r.delta_norm.unwrap_or(f64::INFINITY) - bound);
            }
            checks.push(Check::new(
                format!("{table}: norm of Delta within 2/sum(1-|lambda|)"),
                worst <= 1e-12,
                format!("largest excess {worst:e}"),
            ));
            checks.extend(trend_checks(&table, &sweep, symbol.abs_moment(p)));
        }
        rows.insert(table.clone(), rows_json(&sweep));
        artifacts.push(Artifact {
            file_name: format!("{table}.csv"),
            contents: sweep_csv(&sweep),
        });
    }
    Ok((serde_json::Value::Object(rows), checks, artifacts))
}

fn run_example1(config: &ExperimentConfig) -> Result<Parts> {
    let levels = config.levels.unwrap_or(5);
    let report = example1_zeros(levels)?;
    let mut checks = Vec::new();
    for l in &report.levels {
        checks.push(Check::new(
            format!("example1 level {}: min |B'| >= {}/100", l.level, l.level),
            l.min_derivative >= l.bound,
            format!("{:e} >= {:e}", l.min_derivative, l.bound),
        ));
    }
    let increasing = report
        .levels
        .windows(2)
        .all(|w| w[1].min_derivative > w[0].min_derivative);
    checks.push(Check::new(
        "example1: min |B'| strictly increasing across levels",
        increasing,
        format!("{} levels", report.levels.len()),
    ));
    let decreasing = report.levels.windows(2).all(|w| w[1].delta_norm < w[0].delta_norm);
    checks.push(Check::new(
        "example1: norm of Delta decreasing across levels",
        decreasing,
        format!("{} levels", report.levels.len()),
    ));

    let mut csv = String::from("level,n,min_derivative,bound,delta_norm,blaschke_sum\n");
    for l in &report.levels {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            l.level,
            l.n,
            fmt_float(l.min_derivative),
            fmt_float(l.bound),
            fmt_float(l.delta_norm),
            fmt_float(l.blaschke_sum)
        );
    }
    let n = report.levels.last().map_or(0, |l| l.n);
    let product = report.sequence.product(n)?;
    let mu = clark_measure(&product, Complex64::new(1.0, 0.0))?;
    let rows = serde_json::json!({
        "levels": serde_json::to_value(&report.levels)?,
        "zeros": zeros_json(product.zeros()),
    });
    Ok((
        rows,
        checks,
        vec![
            Artifact {
                file_name: format!("{}_levels.csv", config.name),
                contents: csv,
            },
            Artifact {
                file_name: format!("{}_clark.csv", config.name),
                contents: clark_csv(&mu),
            },
        ],
    ))
}

fn run_example2(config: &ExperimentConfig) -> Result<Parts> {
    let search = config.search.unwrap_or_default();
    let n = config.ns[0];
    let report = example2_run(search, n)?;
    let nine_pi = 9.0 * std::f64::consts::PI;
    let checks = vec![
        Check::at_most(
            "example2: trace_direct equals trace_formula",
            (report.trace_direct - report.trace_formula).norm(),
            1e-9,
        ),
        Check::new(
            "example2: |trace| > 1/3",
            report.bound_ok,
            format!("{:e}", report.trace_direct.norm()),
        ),
        Check::new(
            "example2: |B'| >= 9 pi at atoms other than -1",
            report.min_bprime_off_arc >= nine_pi,
            format!("{:e}", report.min_bprime_off_arc),
        ),
        Check::at_most("example2: |B'(-1)| <= 3/2", report.b_prime_at_minus1, 1.5),
        Check::at_most("example2: sup of |B'| on J <= 11/10", report.arc_max_bprime, 1.1),
    ];
    let product = report.sequence.product(n)?;
    let one = Complex64::new(1.0, 0.0);
    let mu = clark_measure(&product, one)?;
    let basis = ModelBasis::new(&product)?;
    let delta = delta_operator(&basis, one)?;
    let rows = serde_json::json!({
        "example2": [serde_json::to_value(&report)?],
        "zeros": zeros_json(product.zeros()),
    });
    Ok((
        rows,
        checks,
        vec![
            Artifact {
                file_name: format!("{}_clark.csv", config.name),
                contents: clark_csv(&mu),
            },
            Artifact {
                file_name: format!("{}_delta.csv", config.name),
                contents: operator_csv(&delta)?,
            },
        ],
    ))
}

/// Pinned acceptance experiments.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = |experiment, sequence, ns: Vec<usize>, p| ExperimentConfig {
        name: name.to_string(),
        experiment,
        sequence,
        symbol: SymbolSpec::Named(NamedSymbol::TwoCos),
        alpha: [1.0, 0.0],
        p,
        g: None,
        ns,
        quadrature_points: None,
        alpha_nodes: 512,
        output_path: None,
        levels: None,
        search: None,
    };
    let config = match name {
        "classical" => base(
            ExperimentKind::Power,
            ZeroSequence::ConstantZero,
            vec![8, 16, 32, 64, 128, 256],
            Powers::One(2),
        ),
        "harmonic" => base(
            ExperimentKind::Power,
            ZeroSequence::RadialHarmonic,
            vec![20, 40, 80, 160],
            Powers::Many(vec![1, 2]),
        ),
        "example1" => ExperimentConfig {
            levels: Some(5),
            ..base(ExperimentKind::Example1, ZeroSequence::Circles, vec![], Powers::One(1))
        },
        "example2" => {
            let search = RealFastSearch::default();
            ExperimentConfig {
                search: Some(search),
                ..base(
                    ExperimentKind::Example2,
                    ZeroSequence::RealFast {
                        c: search.c,
                        q: search.q_start,
                    },
                    vec![6],
                    Powers::One(1),
                )
            }
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown preset {name:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    config.validate()?;
    Ok(config)
}
