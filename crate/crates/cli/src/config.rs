//! Experiment configuration: defaults, flat key-value config files, and CLI
//! overrides.
//!
//! Config files are plain text, one `key = value` per line, `#` comments.
//! Lists are comma-separated; energy grids also accept `start:step:stop`
//! (inclusive) in dB over N0.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Bounds,
    Protocol,
    Mc,
    Figure,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Bounds => "bounds",
            Mode::Protocol => "protocol",
            Mode::Mc => "mc",
            Mode::Figure => "figure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Numeric1,
    Numeric2,
    Numeric3,
    Numeric4,
}

impl FigureId {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "numeric1" => Some(FigureId::Numeric1),
            "numeric2" => Some(FigureId::Numeric2),
            "numeric3" => Some(FigureId::Numeric3),
            "numeric4" => Some(FigureId::Numeric4),
            _ => None,
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FigureId::Numeric1 => "numeric1",
            FigureId::Numeric2 => "numeric2",
            FigureId::Numeric3 => "numeric3",
            FigureId::Numeric4 => "numeric4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Single,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

/// A configuration error with enough context to point at the offending
/// line/field.
#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError {
        message: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub figure_id: Option<FigureId>,
    /// Energy grid in dB over N0 (or linear E/N0 when `linear_energy`).
    pub e_over_n0_db: Vec<f64>,
    pub linear_energy: bool,
    pub b_list: Vec<u32>,
    pub rho_list: Vec<f64>,
    pub alpha: f64,
    /// Fixed threshold; when unset the lambda grid is searched per point.
    pub lambda: Option<f64>,
    pub lambda_grid: Vec<f64>,
    pub mu: f64,
    pub theta: Option<f64>,
    pub source: SourceKind,
    pub protocol: ProtocolKind,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<String>,
    pub format: OutputFormat,
}

pub fn default_lambda_grid() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

pub fn default_energy_grid_db() -> Vec<f64> {
    (0..=40).map(|i| 0.5 * i as f64).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Bounds,
            figure_id: None,
            e_over_n0_db: default_energy_grid_db(),
            linear_energy: false,
            b_list: vec![2, 4, 6, 8],
            rho_list: vec![],
            alpha: 0.0,
            lambda: None,
            lambda_grid: default_lambda_grid(),
            mu: 1.0,
            theta: None,
            source: SourceKind::Uniform,
            protocol: ProtocolKind::Single,
            trials: 10_000,
            seed: 0,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

fn parse_f64(field: &str, v: &str) -> Result<f64, ConfigError> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| err(format!("field `{field}`: expected a number, got `{v}`")))
}

fn parse_f64_list(field: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    if let Some((a, rest)) = v.split_once(':') {
        if let Some((step, stop)) = rest.split_once(':') {
            let start = parse_f64(field, a)?;
            let step = parse_f64(field, step)?;
            let stop = parse_f64(field, stop)?;
            if !(step > 0.0) || stop < start {
                return Err(err(format!(
                    "field `{field}`: range `{v}` needs step > 0 and stop >= start"
                )));
            }
            let n = ((stop - start) / step).round() as usize;
            return Ok((0..=n).map(|i| start + i as f64 * step).collect());
        }
    }
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64(field, s))
        .collect()
}

impl ExperimentConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "mode" => {
                self.mode = match v {
                    "bounds" => Mode::Bounds,
                    "protocol" => Mode::Protocol,
                    "mc" => Mode::Mc,
                    "figure" => Mode::Figure,
                    _ => return Err(err(format!("field `mode`: unknown mode `{v}`"))),
                }
            }
            "figure_id" => {
                self.figure_id = Some(
                    FigureId::parse(v)
                        .ok_or_else(|| err(format!("field `figure_id`: unknown id `{v}`")))?,
                )
            }
            "e_over_n0_db" => self.e_over_n0_db = parse_f64_list(key, v)?,
            "linear_energy" => {
                self.linear_energy = v
                    .parse::<bool>()
                    .map_err(|_| err(format!("field `linear_energy`: expected bool, got `{v}`")))?
            }
            "b_list" => {
                self.b_list = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim()
                            .parse::<u32>()
                            .map_err(|_| err(format!("field `b_list`: expected integers, got `{s}`")))
                    })
                    .collect::<Result<_, _>>()?
            }
            "rho_list" => self.rho_list = parse_f64_list(key, v)?,
            "alpha" => self.alpha = parse_f64(key, v)?,
            "lambda" => self.lambda = Some(parse_f64(key, v)?),
            "lambda_grid" => self.lambda_grid = parse_f64_list(key, v)?,
            "mu" => self.mu = parse_f64(key, v)?,
            "theta" => self.theta = Some(parse_f64(key, v)?),
            "source" => {
                self.source = match v {
                    "uniform" => SourceKind::Uniform,
                    "gaussian" => SourceKind::Gaussian,
                    _ => return Err(err(format!("field `source`: expected uniform|gaussian, got `{v}`"))),
                }
            }
            "protocol" => {
                self.protocol = match v {
                    "single" => ProtocolKind::Single,
                    "dual" => ProtocolKind::Dual,
                    _ => return Err(err(format!("field `protocol`: expected single|dual, got `{v}`"))),
                }
            }
            "trials" => {
                self.trials = v
                    .parse::<u64>()
                    .map_err(|_| err(format!("field `trials`: expected an integer, got `{v}`")))?
            }
            "seed" => {
                self.seed = v
                    .parse::<u64>()
                    .map_err(|_| err(format!("field `seed`: expected an integer, got `{v}`")))?
            }
            "out" => self.out = Some(v.to_string()),
            "format" => {
                self.format = match v {
                    "csv" => OutputFormat::Csv,
                    "jsonl" => OutputFormat::Jsonl,
                    _ => return Err(err(format!("field `format`: expected csv|jsonl, got `{v}`"))),
                }
            }
            _ => return Err(err(format!("unknown field `{key}`"))),
        }
        Ok(())
    }

    /// Parse a flat key-value config file on top of the current values.
    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("{}:{}: expected `key = value`", path.display(), idx + 1)))?;
            self.set(key.trim(), value).map_err(|e| {
                err(format!("{}:{}: {}", path.display(), idx + 1, e.message))
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.e_over_n0_db.is_empty() {
            return Err(err("field `e_over_n0_db`: energy grid must be non-empty"));
        }
        if self.e_over_n0_db.iter().any(|v| !v.is_finite()) {
            return Err(err("field `e_over_n0_db`: grid points must be finite"));
        }
        if self.linear_energy && self.e_over_n0_db.iter().any(|&v| !(v > 0.0)) {
            return Err(err("field `e_over_n0_db`: linear energies must be > 0"));
        }
        if self.b_list.is_empty() {
            return Err(err("field `b_list`: must be non-empty"));
        }
        if self.b_list.iter().any(|&b| b == 0 || b > 16) {
            return Err(err("field `b_list`: B must lie in 1..=16"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(err("field `alpha`: must lie in [0,1]"));
        }
        if let Some(l) = self.lambda {
            if !(0.0..1.0).contains(&l) {
                return Err(err("field `lambda`: must lie in [0,1)"));
            }
        }
        if self.lambda_grid.is_empty() {
            return Err(err("field `lambda_grid`: must be non-empty"));
        }
        if self.lambda_grid.iter().any(|l| !(0.0..1.0).contains(l)) {
            return Err(err("field `lambda_grid`: entries must lie in [0,1)"));
        }
        if !(self.mu > 0.0 && self.mu < 2.0) {
            return Err(err("field `mu`: must lie in (0,2)"));
        }
        if self.rho_list.iter().any(|r| !(r.abs() <= 1.0)) {
            return Err(err("field `rho_list`: entries must lie in [-1,1]"));
        }
        if self.trials == 0 {
            return Err(err("field `trials`: must be >= 1"));
        }
        if self.mode == Mode::Figure && self.figure_id.is_none() {
            return Err(err("figure mode needs `figure_id` (numeric1..numeric4)"));
        }
        Ok(())
    }

    /// Linear E/N0 grid regardless of input convention.
    pub fn energy_grid_linear(&self) -> Vec<f64> {
        self.e_over_n0_db
            .iter()
            .map(|&v| {
                if self.linear_energy {
                    v
                } else {
                    10f64.powf(v / 10.0)
                }
            })
            .collect()
    }

    /// Key-value dump for output headers; sorted, stable.
    pub fn header_entries(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("mode".into(), self.mode.to_string());
        if let Some(id) = self.figure_id {
            m.insert("figure_id".into(), id.to_string());
        }
        m.insert(
            "e_over_n0_db".into(),
            self.e_over_n0_db
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("linear_energy".into(), self.linear_energy.to_string());
        m.insert(
            "b_list".into(),
            self.b_list
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert(
            "rho_list".into(),
            self.rho_list
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("alpha".into(), self.alpha.to_string());
        m.insert(
            "lambda".into(),
            self.lambda.map_or("grid".into(), |l| l.to_string()),
        );
        m.insert("lambda_grid_len".into(), self.lambda_grid.len().to_string());
        m.insert("mu".into(), self.mu.to_string());
        m.insert(
            "theta".into(),
            self.theta.map_or("auto".into(), |t| t.to_string()),
        );
        m.insert(
            "source".into(),
            match self.source {
                SourceKind::Uniform => "uniform".into(),
                SourceKind::Gaussian => "gaussian".into(),
            },
        );
        m.insert(
            "protocol".into(),
            match self.protocol {
                ProtocolKind::Single => "single".into(),
                ProtocolKind::Dual => "dual".into(),
            },
        );
        m.insert("trials".into(), self.trials.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}
