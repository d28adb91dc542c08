//! Parameter sweeps and the table format behind the command-line front end.
//!
//! Sweeps are configured through a flat `key = value` file. A value is a
//! scalar (`sigma = 0.2`), a comma list (`r = 0.3, 0.6, 1.0`), or an axis
//! `start:stop:points` with an optional `:log` suffix for geometric
//! spacing. Results are emitted as CSV or TSV with a header row, floats
//! printed with 17 significant digits, and UNIX newlines.

use std::collections::BTreeMap;
use std::io::Write;

use crate::analytic::{
    budget_from_input, enhancement, enhancement_at_optimum, fisher_budget,
    fisher_information, improvement_ratio, optimal_squeezing_fraction, InputSpec, SqueezingMode,
};
use crate::error::{Error, Result};
use crate::estimator::{simulate_measurement, Bs3Model};
use crate::fock::{self, OracleOptions};

/// At most this many axis-valued entries per config; higher-dimensional
/// scans should use explicit lists.
const MAX_AXES: usize = 2;

/// An evenly spaced scan axis, linear or geometric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl Axis {
    pub fn new(start: f64, stop: f64, points: usize, log: bool) -> Result<Self> {
        if points < 2 {
            return Err(Error::Config(format!(
                "axis needs at least 2 points, got {points}"
            )));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::Config(format!(
                "axis endpoints must be finite, got {start}:{stop}"
            )));
        }
        if log && (start <= 0.0 || stop <= 0.0) {
            return Err(Error::Config(format!(
                "log axis endpoints must be positive, got {start}:{stop}"
            )));
        }
        Ok(Self {
            start,
            stop,
            points,
            log,
        })
    }

    /// The grid values, endpoints included exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let f = i as f64 / (n - 1) as f64;
            let v = if self.log {
                (self.start.ln() * (1.0 - f) + self.stop.ln() * f).exp()
            } else {
                self.start * (1.0 - f) + self.stop * f
            };
            out.push(v);
        }
        // guard endpoints against rounding in the interpolation
        out[0] = self.start;
        out[n - 1] = self.stop;
        out
    }
}

/// One parsed config value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    List(Vec<f64>),
    Axis(Axis),
}

impl Value {
    fn expand(&self) -> Vec<f64> {
        match self {
            Value::Scalar(x) => vec![*x],
            Value::List(xs) => xs.clone(),
            Value::Axis(a) => a.values(),
        }
    }
}

/// A flat `key = value` configuration.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parses config text: one `key = value` per line, `#` starts a
    /// comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut axes = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Config(format!("line {}: bad key {key:?}", lineno + 1)));
            }
            let value = parse_value(value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
            if matches!(value, Value::Axis(_)) {
                axes += 1;
                if axes > MAX_AXES {
                    return Err(Error::Config(format!(
                        "at most {MAX_AXES} axis entries are allowed; use explicit lists"
                    )));
                }
            }
            if entries.insert(key.to_string(), value).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Rejects keys outside the given set, so typos surface instead of
    /// silently falling back to defaults.
    fn restrict(&self, allowed: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown key {key:?}; expected one of {allowed:?}"
                )));
            }
        }
        Ok(())
    }

    fn scalar(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(Value::Scalar(x)) => Ok(*x),
            Some(_) => Err(Error::Config(format!("{key} must be a single number"))),
        }
    }

    /// A list of values; scalars become one-element lists and axes expand
    /// to their grid.
    fn values(&self, key: &str, default: &[f64]) -> Vec<f64> {
        self.entries
            .get(key)
            .map(Value::expand)
            .unwrap_or_else(|| default.to_vec())
    }

    fn axis(&self, key: &str, default: Axis) -> Result<Axis> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(Value::Axis(a)) => Ok(*a),
            Some(_) => Err(Error::Config(format!(
                "{key} must be an axis `start:stop:points[:log]`"
            ))),
        }
    }
}

fn parse_value(text: &str) -> Result<Value> {
    if text.is_empty() {
        return Err(Error::Config("empty value".into()));
    }
    let num = |tok: &str| -> Result<f64> {
        tok.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("not a number: {tok:?}")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let log = match parts.as_slice() {
            [_, _, _] => false,
            [_, _, _, tag] if *tag == "log" => true,
            _ => {
                return Err(Error::Config(format!(
                    "bad axis {text:?}; expected start:stop:points[:log]"
                )))
            }
        };
        let points = parts[2]
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad point count: {:?}", parts[2])))?;
        return Ok(Value::Axis(Axis::new(num(parts[0])?, num(parts[1])?, points, log)?));
    }
    if text.contains(',') {
        let xs = text
            .split(',')
            .map(num)
            .collect::<Result<Vec<f64>>>()?;
        return Ok(Value::List(xs));
    }
    Ok(Value::Scalar(num(text)?))
}

/// Output format of [`write_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Tsv,
}

impl OutputFormat {
    fn separator(&self) -> char {
        match self {
            OutputFormat::Csv => ',',
            OutputFormat::Tsv => '\t',
        }
    }
}

/// A rectangular numeric result table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Writes a table with a header row, `%.16e` floats and UNIX newlines, so
/// a read-back is bit-exact.
pub fn write_table(out: &mut dyn Write, table: &Table, format: OutputFormat) -> Result<()> {
    let sep = format.separator();
    let mut line = String::new();
    for (i, name) in table.columns.iter().enumerate() {
        if i > 0 {
            line.push(sep);
        }
        line.push_str(name);
    }
    line.push('\n');
    out.write_all(line.as_bytes())?;
    for row in &table.rows {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(sep);
            }
            line.push_str(&format!("{v:.16e}"));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Parses a table previously written by [`write_table`].
pub fn read_table(text: &str, format: OutputFormat) -> Result<Table> {
    let sep = format.separator();
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty table".into()))?;
    let columns: Vec<String> = header.split(sep).map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(sep)
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Config(format!("row {}: not a number: {tok:?}", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != columns.len() {
            return Err(Error::Config(format!(
                "row {}: expected {} fields, got {}",
                i + 1,
                columns.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

fn format_fraction(mu: f64) -> String {
    // column-name friendly: 0.125 -> "0.125"
    format!("{mu}")
}

/// Enhancement factor versus the number of lost photons for a set of
/// squeezing fractions. Keys: `n_loss` (axis), `mu` (list).
pub fn run_fig4(cfg: &RunConfig) -> Result<Table> {
    cfg.restrict(&["n_loss", "mu"])?;
    let axis = cfg.axis("n_loss", Axis::new(0.0, 2.0, 201, false)?)?;
    let mus = cfg.values("mu", &[0.5, 0.125, 0.03125, 0.0078125]);
    for &mu in &mus {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Config(format!("mu = {mu} outside [0, 1]")));
        }
    }
    let mut columns = vec!["n_loss".to_string()];
    columns.extend(mus.iter().map(|&mu| format!("enhancement_mu_{}", format_fraction(mu))));
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for n_loss in axis.values() {
        let mut row = vec![n_loss];
        row.extend(mus.iter().map(|&mu| enhancement(mu, n_loss)));
        table.push(row);
    }
    Ok(table)
}

/// Enhancement at the optimal squeezing fraction compared with the
/// balanced split `mu = 1/2`. Keys: `n_loss` (axis).
pub fn run_fig5(cfg: &RunConfig) -> Result<Table> {
    cfg.restrict(&["n_loss"])?;
    let axis = cfg.axis("n_loss", Axis::new(1e-3, 1e5, 161, true)?)?;
    let mut table = Table::new(&[
        "n_loss",
        "mu_optimal",
        "enhancement_optimal",
        "enhancement_half",
    ]);
    for n_loss in axis.values() {
        table.push(vec![
            n_loss,
            optimal_squeezing_fraction(n_loss),
            enhancement_at_optimum(n_loss),
            enhancement(0.5, n_loss),
        ]);
    }
    Ok(table)
}

/// Improvement of the optimal squeezing fraction over the balanced split.
/// Keys: `n_loss` (axis).
pub fn run_fig6(cfg: &RunConfig) -> Result<Table> {
    cfg.restrict(&["n_loss"])?;
    let axis = cfg.axis("n_loss", Axis::new(1e-3, 1e5, 161, true)?)?;
    let mut table = Table::new(&["n_loss", "improvement_ratio"]);
    for n_loss in axis.values() {
        table.push(vec![n_loss, improvement_ratio(n_loss)]);
    }
    Ok(table)
}

/// Result of [`run_compare`].
#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub table: Table,
    /// Largest relative deviation between the oracle and the closed form
    /// over the completed grid points.
    pub worst_deviation: f64,
    /// Grid points whose deviation exceeded the tolerance.
    pub violations: usize,
    /// Grid points skipped because the cutoff cap was too small.
    pub skipped: usize,
}

/// Cross-checks the closed-form Fisher information against the Fock-space
/// oracle over a parameter grid. Keys: `alpha`, `r`, `sigma` (lists).
///
/// Grid points whose truncated state would exceed the cutoff cap are kept
/// in the table with `status = 0` and NaN oracle columns rather than
/// aborting the sweep.
pub fn run_compare(
    cfg: &RunConfig,
    opts: &OracleOptions,
    tolerance: f64,
    ideal_squeezing: bool,
) -> Result<CompareOutcome> {
    cfg.restrict(&["alpha", "r", "sigma"])?;
    if !(tolerance > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tolerance}")));
    }
    let alphas = cfg.values("alpha", &[0.5, 1.0]);
    let rs = cfg.values("r", &[0.3, 0.6, 1.0]);
    let sigmas = cfg.values("sigma", &[0.0, 0.1, 0.3]);

    let mut table = Table::new(&[
        "alpha",
        "r",
        "sigma",
        "n_total",
        "mu",
        "n_loss",
        "f_analytic",
        "f_budget",
        "f_oracle",
        "rel_deviation",
        "estimator_sensitivity",
        "sld_residual",
        "tail_mass",
        "cutoff",
        "status",
    ]);
    let mut worst = 0.0f64;
    let mut violations = 0usize;
    let mut skipped = 0usize;
    for &alpha in &alphas {
        for &r in &rs {
            for &sigma in &sigmas {
                let spec = InputSpec::new(alpha, r, sigma)?;
                let budget = budget_from_input(&spec)?;
                let f_analytic = fisher_information(&spec);
                let mode = if ideal_squeezing {
                    SqueezingMode::Ideal
                } else {
                    SqueezingMode::Checked(r)
                };
                let f_budget = fisher_budget(&budget, mode)?;
                let mut row = vec![
                    alpha,
                    r,
                    sigma,
                    budget.n_total(),
                    budget.mu(),
                    budget.n_loss(),
                    f_analytic,
                    f_budget,
                ];
                match fock::analyze(&spec, opts) {
                    Ok(report) => {
                        let dev = (report.qfi - f_analytic).abs() / f_analytic;
                        worst = worst.max(dev);
                        if dev > tolerance {
                            violations += 1;
                        }
                        row.extend([
                            report.qfi,
                            dev,
                            report.estimator_sensitivity,
                            report.sld_residual,
                            report.tail_mass,
                            report.cutoff_used as f64,
                            1.0,
                        ]);
                    }
                    Err(Error::CutoffTooSmall { cutoff, tail, .. }) => {
                        skipped += 1;
                        row.extend([
                            f64::NAN,
                            f64::NAN,
                            f64::NAN,
                            f64::NAN,
                            tail,
                            cutoff as f64,
                            0.0,
                        ]);
                    }
                    Err(e) => return Err(e),
                }
                table.push(row);
            }
        }
    }
    Ok(CompareOutcome {
        table,
        worst_deviation: worst,
        violations,
        skipped,
    })
}

/// Simulates the explicit measurement chain, once with the ideal
/// displacement and once per finite local-oscillator transmittance. Keys:
/// `alpha`, `r`, `sigma`, `phi` (scalars), `transmittance` (list).
///
/// The ideal displacement appears as `transmittance = 0`.
pub fn run_measure(cfg: &RunConfig, opts: &OracleOptions) -> Result<Table> {
    cfg.restrict(&["alpha", "r", "sigma", "phi", "transmittance"])?;
    let alpha = cfg.scalar("alpha", 1.0)?;
    let r = cfg.scalar("r", 1.0)?;
    let sigma = cfg.scalar("sigma", 0.2)?;
    let phi = cfg.scalar("phi", 0.0)?;
    let ts = cfg.values("transmittance", &[0.1, 0.01, 0.001]);
    let spec = InputSpec::new(alpha, r, sigma)?;
    let f_analytic = fisher_information(&spec);

    let mut table = Table::new(&[
        "transmittance",
        "mean",
        "variance",
        "slope",
        "sensitivity",
        "f_analytic",
        "rel_deviation",
        "cutoff",
    ]);
    let mut record = |t: f64, model: Bs3Model| -> Result<()> {
        let out = simulate_measurement(&spec, phi, model, opts)?;
        table.push(vec![
            t,
            out.mean,
            out.variance,
            out.slope,
            out.sensitivity,
            f_analytic,
            (out.sensitivity - f_analytic).abs() / f_analytic,
            out.cutoff_used as f64,
        ]);
        Ok(())
    };
    record(0.0, Bs3Model::ExactDisplacement)?;
    for &t in &ts {
        record(t, Bs3Model::FiniteTransmittance(t))?;
    }
    Ok(table)
}
