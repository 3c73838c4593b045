//! Command-line front end.
//!
//! Inputs are dimensionless (`k a1^2`, `L/a1`, `R/a1`). Settings are merged
//! from flags, then an optional flat JSON config file, then defaults. Output
//! is CSV with `#` metadata lines or a JSON object with `metadata` and `rows`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analytic::{self, QuantumNumbers};
use crate::corrections::{self, MinimalLength};
use crate::error::Error;
use crate::geometry::Curvature;
use crate::oracle::{self, LevelRecord, ValidationPlan};
use crate::specfun;
use crate::units::UnitScales;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "CURVED_HYDROGEN_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNBOUND: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "hydrogen-curvature",
    version,
    about = "Hydrogen spectra on spaces of constant curvature"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels with curvature and minimal-length terms.
    Spectrum(CommonArgs),
    /// Normalized radial wavefunction of one level.
    Wavefunction(CommonArgs),
    /// Cross-check closed-form levels against the finite-difference solver.
    Validate(CommonArgs),
    /// Flat-space and Jacobi-to-Laguerre limit studies.
    Limits(CommonArgs),
    /// Sizes of curvature and minimal-length effects.
    Effects(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Atomic,
    Ev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Curvature k a1^2.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "ratio")]
    pub kappa: Option<f64>,
    /// Comma-separated curvatures (validate, limits).
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub kappas: Option<Vec<f64>>,
    /// Curvature radius R/a1; negative for hyperbolic space.
    #[arg(long, allow_negative_numbers = true)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub nmax: Option<u32>,
    #[arg(short = 'n')]
    pub n: Option<u32>,
    #[arg(short = 'l')]
    pub l: Option<u32>,
    /// Every l < n instead of s-states only (spectrum).
    #[arg(long)]
    pub all_l: bool,
    /// L/a1, or "planck".
    #[arg(long)]
    pub minimal_length: Option<String>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Dirichlet or table radius in units of a1.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Samples in a wavefunction table.
    #[arg(long)]
    pub points: Option<usize>,
    /// Energy precision in eV for the length bound (effects).
    #[arg(long)]
    pub precision_ev: Option<f64>,
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Accepts a number or a name for the minimal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSpec {
    Ratio(f64),
    Named(String),
}

/// Keys accepted in a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kappa: Option<f64>,
    pub kappas: Option<Vec<f64>>,
    pub ratio: Option<f64>,
    pub nmax: Option<u32>,
    pub n: Option<u32>,
    pub l: Option<u32>,
    pub all_l: Option<bool>,
    pub minimal_length: Option<LengthSpec>,
    pub grid_n: Option<usize>,
    pub rmax: Option<f64>,
    pub points: Option<usize>,
    pub precision_ev: Option<f64>,
    pub units: Option<Units>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Spectrum,
    Wavefunction,
    Validate,
    Limits,
    Effects,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    /// `k a1^2` of single-curvature commands.
    pub kappa: f64,
    /// Curvature list of validate and limits.
    pub kappas: Option<Vec<f64>>,
    pub n_max: u32,
    pub n: u32,
    pub l: Option<u32>,
    pub all_l: bool,
    /// `L/a1`, absent when not given.
    pub minimal_length: Option<f64>,
    pub minimal_length_label: String,
    pub grid_n: Option<usize>,
    pub r_max: Option<f64>,
    pub points: usize,
    pub precision_ev: f64,
    pub units: Units,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// A failed run: exit code and message.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoValidBranch { .. } => EXIT_UNBOUND,
            Error::Config(_)
            | Error::Parameter(_)
            | Error::QuantumNumbers { .. }
            | Error::NonFiniteCurvature(_)
            | Error::Domain { .. }
            | Error::InvalidDomain(_) => EXIT_CONFIG,
            _ => EXIT_OTHER,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn read_config_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("{name} must be finite, got {v}")))
    }
}

fn kappa_from_ratio(ratio: f64) -> Result<f64, CliError> {
    if !(ratio.is_finite() && ratio != 0.0) {
        return Err(CliError::config(format!(
            "ratio must be finite and nonzero, got {ratio}"
        )));
    }
    Ok(ratio.signum() / (ratio * ratio))
}

fn resolve_length(length: &LengthSpec, scales: &UnitScales) -> Result<(f64, String), CliError> {
    match length {
        LengthSpec::Ratio(x) => {
            MinimalLength::new(*x).map_err(CliError::from)?;
            Ok((*x, format!("{x}")))
        }
        LengthSpec::Named(name) if name.eq_ignore_ascii_case("planck") => {
            Ok((scales.planck_ratio(), "planck".into()))
        }
        LengthSpec::Named(text) => {
            let x: f64 = text.parse().map_err(|_| {
                CliError::config(format!(
                    "minimal length must be a number or 'planck', got '{text}'"
                ))
            })?;
            MinimalLength::new(x).map_err(CliError::from)?;
            Ok((x, text.clone()))
        }
    }
}

/// Merges flags over a config file over defaults.
///
/// The file comes from `--config`, else from `env_config` (the value of
/// [`CONFIG_ENV`]).
pub fn resolve(
    command: CommandKind,
    args: &CommonArgs,
    env_config: Option<PathBuf>,
    scales: &UnitScales,
) -> Result<RunConfig, CliError> {
    let file = match args.config.clone().or(env_config) {
        Some(p) => read_config_file(&p)?,
        None => FileConfig::default(),
    };
    if file.kappa.is_some() && file.ratio.is_some() {
        return Err(CliError::config("config file sets both kappa and ratio"));
    }
    if args.kappa.is_some() && args.ratio.is_some() {
        return Err(CliError::config(
            "--kappa and --ratio are mutually exclusive",
        ));
    }

    let kappa = if let Some(k) = args.kappa {
        finite("kappa", k)?
    } else if let Some(r) = args.ratio {
        kappa_from_ratio(r)?
    } else if let Some(k) = file.kappa {
        finite("kappa", k)?
    } else if let Some(r) = file.ratio {
        kappa_from_ratio(r)?
    } else {
        0.0
    };
    let explicit_kappa = args.kappa.is_some()
        || args.ratio.is_some()
        || file.kappa.is_some()
        || file.ratio.is_some();

    let kappas = match args.kappas.clone().or(file.kappas.clone()) {
        Some(list) => {
            if list.is_empty() {
                return Err(CliError::config("curvature list is empty"));
            }
            for &k in &list {
                finite("kappas entry", k)?;
            }
            Some(list)
        }
        None if explicit_kappa => Some(vec![kappa]),
        None => None,
    };

    let length_spec = match &args.minimal_length {
        Some(s) => Some(LengthSpec::Named(s.clone())),
        None => file.minimal_length.clone(),
    };
    let (minimal_length, minimal_length_label) = match length_spec {
        Some(length) => {
            let (x, label) = resolve_length(&length, scales)?;
            (Some(x), label)
        }
        None => (None, "0".into()),
    };

    let n_max = args.nmax.or(file.nmax).unwrap_or(4);
    if n_max == 0 {
        return Err(CliError::config("nmax must be at least 1"));
    }
    let n = args.n.or(file.n).unwrap_or(1);
    if n == 0 {
        return Err(CliError::config("n must be at least 1"));
    }
    let l = args.l.or(file.l);
    let grid_n = args.grid_n.or(file.grid_n);
    if let Some(g) = grid_n {
        if g < 4 {
            return Err(CliError::config(format!(
                "grid-n must be at least 4, got {g}"
            )));
        }
    }
    let r_max = args.rmax.or(file.rmax);
    if let Some(r) = r_max {
        if !(r.is_finite() && r > 0.0) {
            return Err(CliError::config(format!("rmax must be positive, got {r}")));
        }
    }
    let points = args.points.or(file.points).unwrap_or(401);
    if points < 2 {
        return Err(CliError::config("points must be at least 2"));
    }
    let precision_ev = args.precision_ev.or(file.precision_ev).unwrap_or(1e-12);
    if !(precision_ev.is_finite() && precision_ev >= 0.0) {
        return Err(CliError::config(format!(
            "precision must be non-negative, got {precision_ev}"
        )));
    }

    Ok(RunConfig {
        command,
        kappa,
        kappas,
        n_max,
        n,
        l,
        all_l: args.all_l || file.all_l.unwrap_or(false),
        minimal_length,
        minimal_length_label,
        grid_n,
        r_max,
        points,
        precision_ev,
        units: args.units.or(file.units).unwrap_or(Units::Atomic),
        format: args.format.or(file.format).unwrap_or(Format::Csv),
        out: args.out.clone().or(file.out),
    })
}

/// Rendered table of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Map<String, Value>,
    pub rows: Vec<Map<String, Value>>,
}

impl Table {
    fn new<T: Serialize>(records: &[T]) -> Self {
        let rows = records
            .iter()
            .map(|r| match serde_json::to_value(r) {
                Ok(Value::Object(m)) => m,
                _ => Map::new(),
            })
            .collect();
        Table {
            metadata: Map::new(),
            rows,
        }
    }

    fn meta(&mut self, key: &str, value: impl Serialize) {
        self.metadata.insert(
            key.into(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut root = Map::new();
                root.insert("metadata".into(), Value::Object(self.metadata.clone()));
                root.insert(
                    "rows".into(),
                    Value::Array(self.rows.iter().cloned().map(Value::Object).collect()),
                );
                let mut s = serde_json::to_string_pretty(&Value::Object(root)).unwrap_or_default();
                s.push('\n');
                s
            }
            Format::Csv => self.render_csv(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {}", csv_cell(v));
        }
        let columns: Vec<String> = self
            .rows
            .first()
            .map(|r| r.keys().cloned().collect())
            .unwrap_or_default();
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(&columns);
        for row in &self.rows {
            let cells: Vec<String> = columns
                .iter()
                .map(|c| row.get(c).map_or(String::new(), csv_cell))
                .collect();
            let _ = w.write_record(&cells);
        }
        let bytes = w.into_inner().unwrap_or_default();
        out.push_str(&String::from_utf8_lossy(&bytes));
        out
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => {
            if n.is_f64() {
                format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN))
            } else {
                n.to_string()
            }
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub n: u32,
    pub l: u32,
    pub bound: bool,
    pub e_base: Option<f64>,
    pub e_ml_shift: Option<f64>,
    pub e_curvature: Option<f64>,
    pub e_total: Option<f64>,
    /// Shifts relative to `|E_base|`.
    pub rel_ml_shift: Option<f64>,
    pub rel_curvature: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionRow {
    pub r: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    /// `flat` or `jacobi`.
    pub study: String,
    pub m: u32,
    /// Curvature `k a1^2` or Jacobi `nu`.
    pub parameter: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectsReport {
    pub kappa: f64,
    pub minimal_length_ratio: f64,
    pub planck_q: f64,
    pub ml_relative_n2: f64,
    pub curvature_relative_n2: f64,
    pub crossover_n: Option<f64>,
    pub crossover_relative: Option<f64>,
    pub transition_level: Option<f64>,
    /// Curvature term relative to `|E_n|` at `n = 1e18`.
    pub curvature_relative_n1e18: f64,
    pub precision_ev: f64,
    pub length_bound_a1: f64,
    pub length_bound_m: f64,
}

/// Result of a command before it is written out.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub exit_code: i32,
}

fn curvature(kappa_dimless: f64, scales: &UnitScales) -> Result<Curvature, CliError> {
    Ok(Curvature::new(
        scales.kappa_from_dimensionless(kappa_dimless),
    )?)
}

fn energy_out(e: f64, units: Units, scales: &UnitScales) -> f64 {
    match units {
        Units::Atomic => e,
        Units::Ev => scales.energy_to_ev(e),
    }
}

fn units_label(units: Units) -> &'static str {
    match units {
        Units::Atomic => "atomic",
        Units::Ev => "ev",
    }
}

pub fn cmd_spectrum(cfg: &RunConfig, scales: &UnitScales) -> Result<Outcome, CliError> {
    let kappa = curvature(cfg.kappa, scales)?;
    let length = MinimalLength::new(cfg.minimal_length.unwrap_or(0.0))?;
    let mut rows = Vec::new();
    for n in 1..=cfg.n_max {
        let ls: Vec<u32> = match (cfg.l, cfg.all_l) {
            (Some(l), _) => vec![l],
            (None, true) => (0..n).collect(),
            (None, false) => vec![0],
        };
        for l in ls {
            let Ok(qn) = QuantumNumbers::new(n, l) else {
                continue;
            };
            let bound = analytic::bound_state_admissible(qn, kappa, scales);
            if !bound {
                rows.push(SpectrumRow {
                    n,
                    l,
                    bound,
                    e_base: None,
                    e_ml_shift: None,
                    e_curvature: None,
                    e_total: None,
                    rel_ml_shift: None,
                    rel_curvature: None,
                });
                continue;
            }
            let c = corrections::combined_level(qn, kappa, length, scales);
            let u = cfg.units;
            rows.push(SpectrumRow {
                n,
                l,
                bound,
                e_base: Some(energy_out(c.base, u, scales)),
                e_ml_shift: Some(energy_out(c.ml_shift, u, scales)),
                e_curvature: Some(energy_out(c.curvature_term, u, scales)),
                e_total: Some(energy_out(c.total, u, scales)),
                rel_ml_shift: Some(c.ml_shift / c.base.abs()),
                rel_curvature: Some(c.curvature_term / c.base.abs()),
            });
        }
    }
    let mut table = Table::new(&rows);
    table.meta("command", "spectrum");
    table.meta("kappa", cfg.kappa);
    table.meta("minimal_length", &cfg.minimal_length_label);
    table.meta("units", units_label(cfg.units));
    Ok(Outcome {
        table,
        exit_code: EXIT_OK,
    })
}

pub fn cmd_wavefunction(cfg: &RunConfig, scales: &UnitScales) -> Result<Outcome, CliError> {
    let kappa = curvature(cfg.kappa, scales)?;
    let l = cfg.l.unwrap_or(0);
    let qn = QuantumNumbers::new(cfg.n, l)?;
    if !analytic::bound_state_admissible(qn, kappa, scales) {
        return Err(Error::NoValidBranch {
            n: qn.n(),
            l,
            kappa: kappa.value(),
        }
        .into());
    }
    let grid = match cfg.r_max {
        Some(r) => {
            let mut end = r * scales.bohr_radius;
            if let Some(e) = kappa.domain_end() {
                end = end.min(e);
            }
            (0..cfg.points)
                .map(|i| end * i as f64 / (cfg.points - 1) as f64)
                .collect()
        }
        None => analytic::default_grid(qn, kappa, scales, cfg.points),
    };
    let t = analytic::radial_wavefunction(qn, kappa, scales, &grid)?;
    let (r_scale, g_scale) = match cfg.units {
        Units::Atomic => (1.0, 1.0),
        Units::Ev => (scales.length_to_m(1.0), scales.length_to_m(1.0).powf(-1.5)),
    };
    let rows: Vec<WavefunctionRow> = t
        .grid
        .iter()
        .zip(&t.values)
        .map(|(&r, &g)| WavefunctionRow {
            r: r * r_scale,
            g: g * g_scale,
        })
        .collect();
    let mut table = Table::new(&rows);
    table.meta("command", "wavefunction");
    table.meta("n", qn.n());
    table.meta("l", qn.l());
    table.meta("m", qn.m());
    table.meta("kappa", cfg.kappa);
    table.meta("norm", t.norm);
    table.meta("node_count", t.node_count());
    table.meta("imaginary_fraction", t.imaginary_fraction);
    table.meta("units", units_label(cfg.units));
    Ok(Outcome {
        table,
        exit_code: EXIT_OK,
    })
}

pub fn cmd_validate(cfg: &RunConfig, scales: &UnitScales) -> Result<Outcome, CliError> {
    let plan = ValidationPlan {
        kappas: cfg
            .kappas
            .clone()
            .unwrap_or_else(|| ValidationPlan::default().kappas),
        n_max: cfg.n_max,
        l: cfg.l,
        grid_n: cfg.grid_n,
        r_max: cfg.r_max,
        ..ValidationPlan::default()
    };
    if plan.kappas.is_empty() {
        return Err(CliError::config("validation matrix is empty"));
    }
    let report = oracle::validate(&plan, scales)?;
    if report.records.is_empty() {
        return Err(CliError::config("validation matrix has no bound levels"));
    }
    let passes = report.passes();
    let mut table = Table::new::<LevelRecord>(&report.records);
    table.meta("command", "validate");
    table.meta("extrapolation", &report.extrapolation);
    table.meta("eigenvalue_tolerance", oracle::EIGENVALUE_ACCEPT);
    table.meta("residual_tolerance", oracle::RESIDUAL_ACCEPT);
    table.meta("grids", &report.grids);
    table.meta("passed", passes);
    Ok(Outcome {
        table,
        exit_code: if passes { EXIT_OK } else { EXIT_VALIDATION },
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Curvatures of the default flat-limit study.
pub fn default_limit_kappas() -> Vec<f64> {
    let mut ks = vec![0.0];
    ks.extend((0..7).map(|j| 1e-6 * 2f64.powi(j)));
    ks
}

/// Jacobi `nu` values of the limit study, half-decades from `1e2` to `1e6`.
pub fn limit_nus() -> Vec<f64> {
    (0..9).map(|j| 10f64.powf(2.0 + 0.5 * j as f64)).collect()
}

pub fn cmd_limits(cfg: &RunConfig, scales: &UnitScales) -> Result<Outcome, CliError> {
    let qn = QuantumNumbers::new(cfg.n.max(1), cfg.l.unwrap_or(0))?;
    let kappa_values = cfg.kappas.clone().unwrap_or_else(default_limit_kappas);
    let curvatures = kappa_values
        .iter()
        .map(|&k| curvature(k, scales))
        .collect::<Result<Vec<_>, _>>()?;
    let end = 20f64.max(3.0 * (qn.n() as f64).powi(2)) * scales.bohr_radius;
    let grid: Vec<f64> = (0..=2000).map(|i| end * i as f64 / 2000.0).collect();
    let gaps = analytic::flat_limit_gap(qn, &curvatures, &grid, scales)?;

    let mut rows = Vec::new();
    let mut flat_pts = Vec::new();
    for (&k, &gap) in kappa_values.iter().zip(&gaps) {
        rows.push(LimitRow {
            study: "flat".into(),
            m: qn.m(),
            parameter: k,
            gap,
        });
        flat_pts.push((k.abs(), gap));
    }
    let mut jacobi_slopes = Map::new();
    for m in 0..=5u32 {
        let mut pts = Vec::new();
        for nu in limit_nus() {
            let gap = specfun::jacobi_laguerre_limit_gap(m as usize, 1.0, nu, 1.0)?;
            rows.push(LimitRow {
                study: "jacobi".into(),
                m,
                parameter: nu,
                gap,
            });
            pts.push((nu, gap));
        }
        if m > 0 {
            jacobi_slopes.insert(m.to_string(), Value::from(loglog_slope(&pts)));
        }
    }
    let mut table = Table::new(&rows);
    table.meta("command", "limits");
    table.meta("n", qn.n());
    table.meta("l", qn.l());
    table.meta("flat_slope", loglog_slope(&flat_pts));
    table.meta("jacobi_alpha", 1.0);
    table.meta("jacobi_x", 1.0);
    table.meta("jacobi_slopes", Value::Object(jacobi_slopes));
    Ok(Outcome {
        table,
        exit_code: EXIT_OK,
    })
}

pub fn cmd_effects(cfg: &RunConfig, scales: &UnitScales) -> Result<Outcome, CliError> {
    let kappa = curvature(cfg.kappa, scales)?;
    let length = MinimalLength::new(cfg.minimal_length.unwrap_or_else(|| scales.planck_ratio()))?;
    let crossover = if cfg.kappa != 0.0 && length.ratio() > 0.0 {
        match corrections::crossover_level(kappa, length, scales) {
            Ok(c) => Some(c),
            Err(Error::NoCrossover { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let transition = if cfg.kappa > 0.0 {
        Some(analytic::transition_level(kappa, scales)?)
    } else {
        None
    };
    let bound =
        corrections::length_bound_from_precision(scales.energy_from_ev(cfg.precision_ev), scales)?;
    let report = EffectsReport {
        kappa: cfg.kappa,
        minimal_length_ratio: length.ratio(),
        planck_q: corrections::planck_q(scales),
        ml_relative_n2: corrections::relative_shift_s(2, length).abs(),
        curvature_relative_n2: corrections::relative_curvature_term(2.0, cfg.kappa).abs(),
        crossover_n: crossover.map(|c| c.n),
        crossover_relative: crossover.map(|c| c.relative_magnitude),
        transition_level: transition,
        curvature_relative_n1e18: corrections::relative_curvature_term(1e18, cfg.kappa).abs(),
        precision_ev: cfg.precision_ev,
        length_bound_a1: bound.ratio(),
        length_bound_m: bound.meters(scales),
    };
    let mut table = Table::new(&[report]);
    table.meta("command", "effects");
    table.meta("minimal_length", &cfg.minimal_length_label);
    Ok(Outcome {
        table,
        exit_code: EXIT_OK,
    })
}

pub fn execute(cfg: &RunConfig, scales: &UnitScales) -> Result<Outcome, CliError> {
    match cfg.command {
        CommandKind::Spectrum => cmd_spectrum(cfg, scales),
        CommandKind::Wavefunction => cmd_wavefunction(cfg, scales),
        CommandKind::Validate => cmd_validate(cfg, scales),
        CommandKind::Limits => cmd_limits(cfg, scales),
        CommandKind::Effects => cmd_effects(cfg, scales),
    }
}

/// Parses `argv`, runs the command, writes output and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (kind, args) = match &cli.command {
        Command::Spectrum(a) => (CommandKind::Spectrum, a),
        Command::Wavefunction(a) => (CommandKind::Wavefunction, a),
        Command::Validate(a) => (CommandKind::Validate, a),
        Command::Limits(a) => (CommandKind::Limits, a),
        Command::Effects(a) => (CommandKind::Effects, a),
    };
    let scales = UnitScales::atomic();
    let env_config = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    let result = resolve(kind, args, env_config, &scales).and_then(|cfg| {
        let outcome = execute(&cfg, &scales)?;
        let text = outcome.table.render(cfg.format);
        match &cfg.out {
            Some(path) => std::fs::write(path, text).map_err(|e| CliError {
                code: EXIT_OTHER,
                message: format!("cannot write {}: {e}", path.display()),
            })?,
            None => print!("{text}"),
        }
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => {
            if code == EXIT_VALIDATION {
                eprintln!("validation failed: some level exceeds the tolerances");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn au() -> UnitScales {
        UnitScales::atomic()
    }

    fn cfg(kind: CommandKind, args: &[&str]) -> Result<RunConfig, CliError> {
        let mut argv = vec!["hydrogen-curvature", "spectrum"];
        argv.extend_from_slice(args);
        let cli = Cli::try_parse_from(argv).map_err(|e| CliError::config(e.to_string()))?;
        let Command::Spectrum(a) = cli.command else {
            unreachable!()
        };
        resolve(kind, &a, None, &au())
    }

    fn f(row: &Map<String, Value>, key: &str) -> f64 {
        row[key].as_f64().unwrap()
    }

    #[test]
    fn spectrum_flat() {
        let c = cfg(CommandKind::Spectrum, &["--kappa", "0", "--nmax", "3"]).unwrap();
        let out = cmd_spectrum(&c, &au()).unwrap();
        let e: Vec<f64> = out.table.rows.iter().map(|r| f(r, "e_total")).collect();
        assert_eq!(e[0], -0.5);
        assert_eq!(e[1], -0.125);
        assert!((e[2] + 0.055_555_555_555_555_6).abs() < 1e-16);
    }

    #[test]
    fn spectrum_hyperbolic_cutoff() {
        let c = cfg(CommandKind::Spectrum, &["--kappa", "-0.01", "--nmax", "5"]).unwrap();
        let out = cmd_spectrum(&c, &au()).unwrap();
        let bound: Vec<bool> = out
            .table
            .rows
            .iter()
            .map(|r| r["bound"].as_bool().unwrap())
            .collect();
        assert_eq!(bound, vec![true, true, true, false, false]);
        assert!(out.table.rows[3]["e_total"].is_null());
    }

    #[test]
    fn spectrum_tiny_effects() {
        let c = cfg(
            CommandKind::Spectrum,
            &[
                "--kappa",
                "1e-72",
                "--nmax",
                "2",
                "--minimal-length",
                "planck",
                "--units",
                "ev",
            ],
        )
        .unwrap();
        let out = cmd_spectrum(&c, &au()).unwrap();
        let row = &out.table.rows[1];
        assert!((f(row, "rel_curvature") - 1.2e-71).abs() < 1e-80);
        let ml = f(row, "rel_ml_shift");
        assert!(ml > 1e-48 && ml < 1.5e-48);
        assert!((f(row, "e_base") + 13.605693 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_sets_kappa() {
        let c = cfg(CommandKind::Spectrum, &["--ratio", "10"]).unwrap();
        assert!((c.kappa - 0.01).abs() < 1e-17);
        let c = cfg(CommandKind::Spectrum, &["--ratio", "-10"]).unwrap();
        assert!((c.kappa + 0.01).abs() < 1e-17);
        assert!(cfg(CommandKind::Spectrum, &["--ratio", "10", "--kappa", "0.1"]).is_err());
        assert_eq!(
            cfg(CommandKind::Spectrum, &["--ratio", "0"])
                .unwrap_err()
                .code,
            EXIT_CONFIG
        );
    }

    #[test]
    fn bad_minimal_length() {
        let e = cfg(CommandKind::Spectrum, &["--minimal-length", "huge"]).unwrap_err();
        assert_eq!(e.code, EXIT_CONFIG);
        let e = cfg(CommandKind::Spectrum, &["--minimal-length", "-1"]).unwrap_err();
        assert_eq!(e.code, EXIT_CONFIG);
    }

    #[test]
    fn wavefunction_ground_state() {
        let c = cfg(
            CommandKind::Wavefunction,
            &["--kappa", "0", "-n", "1", "-l", "0"],
        )
        .unwrap();
        let out = cmd_wavefunction(&c, &au()).unwrap();
        for row in &out.table.rows {
            assert!((f(row, "g") - 2.0 * (-f(row, "r")).exp()).abs() < 1e-14);
        }
        assert_eq!(out.table.metadata["node_count"], 0);
    }

    #[test]
    fn wavefunction_sphere_nodes() {
        let c = cfg(
            CommandKind::Wavefunction,
            &["--kappa", "0.04", "-n", "2", "-l", "0"],
        )
        .unwrap();
        let out = cmd_wavefunction(&c, &au()).unwrap();
        assert_eq!(out.table.metadata["node_count"], 1);
    }

    #[test]
    fn wavefunction_unbound_exit() {
        let c = cfg(
            CommandKind::Wavefunction,
            &["--kappa", "-0.01", "-n", "4", "-l", "0"],
        )
        .unwrap();
        assert_eq!(cmd_wavefunction(&c, &au()).unwrap_err().code, EXIT_UNBOUND);
    }

    #[test]
    fn validate_coarse_grid_reports_order_two() {
        let c = cfg(
            CommandKind::Validate,
            &[
                "--kappa", "0", "--nmax", "2", "--grid-n", "200", "--rmax", "40",
            ],
        )
        .unwrap();
        let out = cmd_validate(&c, &au()).unwrap();
        assert_eq!(out.exit_code, EXIT_VALIDATION);
        for row in &out.table.rows {
            assert!((f(row, "convergence_order") - 2.0).abs() < 0.3);
        }
    }

    #[test]
    fn empty_kappa_list() {
        assert_eq!(
            run(["hydrogen-curvature", "validate", "--kappas", ""]),
            EXIT_CONFIG
        );
    }

    #[test]
    fn limits_slopes() {
        let c = cfg(CommandKind::Limits, &["-n", "2"]).unwrap();
        let out = cmd_limits(&c, &au()).unwrap();
        let slope = out.table.metadata["flat_slope"].as_f64().unwrap();
        assert!((slope - 1.0).abs() < 0.1, "{slope}");
        for (_, s) in out.table.metadata["jacobi_slopes"].as_object().unwrap() {
            assert!((s.as_f64().unwrap() + 1.0).abs() < 0.1);
        }
        for row in &out.table.rows {
            let zero_row = (row["study"] == "flat" && f(row, "parameter") == 0.0)
                || (row["study"] == "jacobi" && row["m"] == 0);
            if zero_row {
                assert_eq!(f(row, "gap"), 0.0);
            }
        }
    }

    #[test]
    fn effects_report() {
        let c = cfg(
            CommandKind::Effects,
            &["--ratio", "1e36", "--minimal-length", "planck"],
        )
        .unwrap();
        let out = cmd_effects(&c, &au()).unwrap();
        let row = &out.table.rows[0];
        assert!((f(row, "planck_q") + 1.9e-48).abs() < 0.1e-48);
        let n = f(row, "crossover_n");
        assert!(n > 3e4 && n < 3e5);
        assert!((f(row, "curvature_relative_n1e18") - 1.0).abs() < 1e-6);
        let m = f(row, "length_bound_m");
        assert!(m > 1e-18 && m < 1e-17);
    }

    #[test]
    fn csv_layout() {
        let c = cfg(CommandKind::Spectrum, &["--nmax", "2"]).unwrap();
        let text = cmd_spectrum(&c, &au()).unwrap().table.render(Format::Csv);
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# command: spectrum"));
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert!(header.starts_with("n,l,bound,e_base"));
        assert!(text.contains("-5.0000000000000000e-1"));
    }

    #[test]
    fn json_round_trip() {
        let c = cfg(CommandKind::Spectrum, &["--kappa", "-0.01", "--nmax", "5"]).unwrap();
        let text = cmd_spectrum(&c, &au()).unwrap().table.render(Format::Json);
        let v: Value = serde_json::from_str(&text).unwrap();
        let rows: Vec<SpectrumRow> = serde_json::from_value(v["rows"].clone()).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(!rows[4].bound);
    }

    #[test]
    fn config_file_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"kappa": 0.04, "nmax": 7, "format": "json"}"#).unwrap();
        let args = CommonArgs {
            nmax: Some(2),
            ..CommonArgs::default()
        };
        let c = resolve(CommandKind::Spectrum, &args, Some(path.clone()), &au()).unwrap();
        assert_eq!(c.kappa, 0.04);
        assert_eq!(c.n_max, 2);
        assert_eq!(c.format, Format::Json);

        std::fs::write(&path, r#"{"kappa": 0.04, "ratio": 3}"#).unwrap();
        assert!(resolve(
            CommandKind::Spectrum,
            &CommonArgs::default(),
            Some(path.clone()),
            &au()
        )
        .is_err());
        std::fs::write(&path, r#"{"colour": 1}"#).unwrap();
        assert!(resolve(
            CommandKind::Spectrum,
            &CommonArgs::default(),
            Some(path),
            &au()
        )
        .is_err());
    }
}
