use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use pttrap::io::Json;

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

pub fn numerical<E: fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Flags shared by every command. Unset flags fall back to `--config`, then
/// to the defaults in [`RunConfig::resolve`].
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Inverse-square coupling g (>= -1/4)
    #[arg(long)]
    pub g: Option<f64>,
    /// Root index k (>= 1)
    #[arg(long)]
    pub k: Option<usize>,
    /// Imaginary coordinate shift c
    #[arg(long)]
    pub c: Option<f64>,
    /// Trap frequency squared for the constant schedule
    #[arg(long)]
    pub omega2: Option<f64>,
    /// Initial box length
    #[arg(long = "L0")]
    pub l0: Option<f64>,
    /// Initial wall speed
    #[arg(long = "Ldot0")]
    pub ldot0: Option<f64>,
    /// Evaluation time (end of the window for scale and evolve)
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of output samples (grid intervals for evolve)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Scale-equation tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Frequency schedule: constant, zero, or table:<csv with t,omega2 rows>
    #[arg(long)]
    pub schedule: Option<String>,
    /// key=value file merged beneath the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Command-specific flags, all optional.
#[derive(Debug, Clone, Default)]
pub struct Extras {
    pub count: Option<usize>,
    pub fullline: bool,
    pub nmax: Option<usize>,
    pub conj: Option<String>,
    pub dt: Option<f64>,
    pub snapshot_every: Option<usize>,
    pub report: Option<PathBuf>,
    pub inject_fault: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Constant,
    Zero,
    Table(PathBuf),
}

impl ScheduleSpec {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "constant" => Ok(ScheduleSpec::Constant),
            "zero" => Ok(ScheduleSpec::Zero),
            other => match other.strip_prefix("table:") {
                Some(path) if !path.is_empty() => Ok(ScheduleSpec::Table(PathBuf::from(path))),
                _ => Err(CliError::Config(format!("unknown schedule {other:?} (constant, zero, table:<path>)"))),
            },
        }
    }

    fn describe(&self) -> String {
        match self {
            ScheduleSpec::Constant => "constant".into(),
            ScheduleSpec::Zero => "zero".into(),
            ScheduleSpec::Table(p) => format!("table:{}", p.display()),
        }
    }
}

/// Fully resolved configuration; echoed verbatim into the manifest.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub g: f64,
    pub k: usize,
    pub c: f64,
    pub omega2: f64,
    pub l0: f64,
    pub ldot0: f64,
    pub t: f64,
    pub grid: usize,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub schedule: ScheduleSpec,
    pub count: usize,
    pub fullline: bool,
    pub nmax: usize,
    pub conj: String,
    pub dt: f64,
    pub snapshot_every: usize,
    pub report: Option<PathBuf>,
    pub inject_fault: f64,
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

struct Layer {
    file: BTreeMap<String, String>,
}

impl Layer {
    fn pick<T: FromStr>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        let from_file = self.file.remove(key);
        if let Some(v) = flag {
            return Ok(v);
        }
        match from_file {
            Some(s) => s.parse().map_err(|_| CliError::Config(format!("bad value for {key}: {s:?}"))),
            None => Ok(default),
        }
    }

    fn pick_opt<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let from_file = self.file.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        from_file
            .map(|s| s.parse().map_err(|_| CliError::Config(format!("bad value for {key}: {s:?}"))))
            .transpose()
    }
}

pub const DEFAULT_GRID: usize = 201;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_COUNT: usize = 5;
pub const DEFAULT_NMAX: usize = 2;

impl RunConfig {
    pub fn resolve(command: &'static str, common: &CommonArgs, extras: &Extras) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let mut l = Layer { file };
        let cfg = RunConfig {
            command,
            g: l.pick("g", common.g, 0.0)?,
            k: l.pick("k", common.k, 1)?,
            c: l.pick("c", common.c, 0.0)?,
            omega2: l.pick("omega2", common.omega2, 0.0)?,
            l0: l.pick("L0", common.l0, 1.0)?,
            ldot0: l.pick("Ldot0", common.ldot0, 0.0)?,
            t: l.pick("t", common.t, if command == "scale" || command == "evolve" { 0.1 } else { 0.0 })?,
            grid: l.pick("grid", common.grid, DEFAULT_GRID)?,
            tol: l.pick("tol", common.tol, DEFAULT_TOL)?,
            format: l.pick("format", common.format, Format::Csv)?,
            out: l.pick_opt("out", common.out.clone())?,
            schedule: ScheduleSpec::parse(&l.pick("schedule", common.schedule.clone(), "constant".to_string())?)?,
            count: l.pick("count", extras.count, DEFAULT_COUNT)?,
            fullline: l.pick("fullline", extras.fullline.then_some(true), false)?,
            nmax: l.pick("nmax", extras.nmax, DEFAULT_NMAX)?,
            conj: l.pick("conj", extras.conj.clone(), "both".to_string())?,
            dt: l.pick("dt", extras.dt, DEFAULT_DT)?,
            snapshot_every: l.pick("snapshot_every", extras.snapshot_every, 0)?,
            report: l.pick_opt("report", extras.report.clone())?,
            inject_fault: l.pick("inject_fault", extras.inject_fault, 0.0)?,
        };
        if !l.file.is_empty() {
            let keys: Vec<&str> = l.file.keys().map(String::as_str).collect();
            return Err(CliError::Config(format!("unknown config keys: {}", keys.join(", "))));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        for (name, v) in [("g", self.g), ("c", self.c), ("omega2", self.omega2), ("Ldot0", self.ldot0), ("t", self.t)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        pttrap::modes::order_from_coupling(self.g).map_err(|e| CliError::Config(e.to_string()))?;
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return bad(format!("L0 must be positive, got {}", self.l0));
        }
        if self.t < 0.0 {
            return bad(format!("t must be >= 0, got {}", self.t));
        }
        if self.grid < 2 {
            return bad("grid must be at least 2".into());
        }
        if !(self.tol >= pttrap::trapdyn::MIN_TOL && self.tol < 1.0) {
            return bad(format!("tol must lie in [{}, 1), got {}", pttrap::trapdyn::MIN_TOL, self.tol));
        }
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if !matches!(self.conj.as_str(), "both" | "shift" | "continued") {
            return bad(format!("conj must be both, shift or continued, got {:?}", self.conj));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !self.inject_fault.is_finite() {
            return bad("inject_fault must be finite".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(Json::Null, |p| Json::from(p.display().to_string()));
        Json::object()
            .with("command", self.command)
            .with("g", self.g)
            .with("k", self.k)
            .with("c", self.c)
            .with("omega2", self.omega2)
            .with("L0", self.l0)
            .with("Ldot0", self.ldot0)
            .with("t", self.t)
            .with("grid", self.grid)
            .with("tol", self.tol)
            .with("format", self.format.as_str())
            .with("out", path(&self.out))
            .with("schedule", self.schedule.describe())
            .with("count", self.count)
            .with("fullline", self.fullline)
            .with("nmax", self.nmax)
            .with("conj", self.conj.as_str())
            .with("dt", self.dt)
            .with("snapshot_every", self.snapshot_every)
            .with("report", path(&self.report))
            .with("inject_fault", self.inject_fault)
    }
}
