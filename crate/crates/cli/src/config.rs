//! Run configuration: a TOML document with unit-bearing quantities.
//!
//! Parsing is strict (unknown keys are rejected) and every value is
//! normalized to SI. [`RunConfig::to_canonical`] writes the fully resolved
//! configuration back out in a fixed key order; parsing that text again
//! yields the same configuration and the same text.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use gncorr_core::mc::{ExperimentParams, CELLS_PER_CHUNK};
use gncorr_core::SourceKind;
use toml::{Table, Value};

pub const DEFAULT_WAVELENGTH: f64 = 532e-9;
pub const DEFAULT_SPACING: f64 = 250e-6;
pub const DEFAULT_SLIT_WIDTH: f64 = 25e-6;
pub const DEFAULT_MAX_HARMONIC: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("unit error in `{key}`: {message}")]
    Unit { key: String, message: String },
    #[error("invalid `{key}`: {message}")]
    Constraint { key: String, message: String },
}

impl ConfigError {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::Syntax { .. } => "syntax",
            ConfigError::UnknownKey { .. } => "unknown-key",
            ConfigError::Unit { .. } => "unit",
            ConfigError::Constraint { .. } => "constraint",
        }
    }

    fn constraint(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Constraint {
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn unit(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Unit {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Mc,
    Fit,
    Report,
    MagicSearch,
    Figure,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Mc => "mc",
            Mode::Fit => "fit",
            Mode::Report => "report",
            Mode::MagicSearch => "magic-search",
            Mode::Figure => "figure",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "analytic" => Mode::Analytic,
            "mc" => Mode::Mc,
            "fit" => Mode::Fit,
            "report" => Mode::Report,
            "magic-search" => Mode::MagicSearch,
            "figure" => Mode::Figure,
            _ => return Err(format!(
                "unknown mode `{s}` (expected analytic, mc, fit, report, magic-search or figure)"
            )),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureTarget {
    Fig1,
    Fig2b,
    Fig4,
}

impl FigureTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureTarget::Fig1 => "fig1",
            FigureTarget::Fig2b => "fig2b",
            FigureTarget::Fig4 => "fig4",
        }
    }
}

impl FromStr for FigureTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fig1" => Ok(FigureTarget::Fig1),
            "fig2b" => Ok(FigureTarget::Fig2b),
            "fig4" => Ok(FigureTarget::Fig4),
            _ => Err(format!(
                "unknown figure `{s}` (expected fig1, fig2b or fig4)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn extension(self) -> &'static str {
        self.as_str()
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

/// Where the fit and report modes take their scan from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    Analytic,
    Mc,
}

impl DataSource {
    pub fn as_str(self) -> &'static str {
        match self {
            DataSource::Analytic => "analytic",
            DataSource::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detectors {
    /// Magic positions shifted by a common offset (rad).
    Magic { offset: f64 },
    /// Phases (rad) of the fixed detectors 2..N.
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSettings {
    pub n: usize,
    pub kind: SourceKind,
    pub spacing: f64,
    pub slit_width: f64,
    pub wavelength: f64,
    pub sub_sources: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    pub coherence_time: f64,
    /// `None` selects the per-order default window.
    pub window: Option<f64>,
    pub singles_rate: f64,
    pub windows: u64,
    pub windows_per_cell: u64,
    pub efficiency: f64,
    pub dead_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub max_harmonic: usize,
    pub data: DataSource,
    /// CSV scan to fit instead of generating one.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    /// File (or directory for figures); `None` writes to standard output,
    /// or to the working directory for figures.
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub target: Option<FigureTarget>,
    pub seed: u64,
    pub source: SourceSettings,
    pub detectors: Detectors,
    pub scan: ScanSettings,
    pub mc: McSettings,
    pub fit: FitSettings,
    pub output: OutputSettings,
}

impl McSettings {
    /// Experiment parameters for an order-`n` run with the given seed.
    pub fn params(&self, n: usize, seed: u64) -> ExperimentParams {
        ExperimentParams {
            coherence_time: self.coherence_time,
            window: self
                .window
                .unwrap_or_else(|| gncorr_core::mc::default_window(n)),
            singles_rate: self.singles_rate,
            n_windows: self.windows,
            windows_per_cell: self.windows_per_cell,
            detector_efficiency: self.efficiency,
            dead_time: self.dead_time,
            rng_seed: seed,
        }
    }
}

const TOP_KEYS: &[&str] = &[
    "mode",
    "target",
    "seed",
    "source",
    "detectors",
    "scan",
    "mc",
    "fit",
    "output",
];
const SOURCE_KEYS: &[&str] = &[
    "n",
    "kind",
    "spacing",
    "slit_width",
    "wavelength",
    "sub_sources",
];
const DETECTOR_KEYS: &[&str] = &["phases", "offset"];
const SCAN_KEYS: &[&str] = &["start", "stop", "points"];
const MC_KEYS: &[&str] = &[
    "coherence_time",
    "window",
    "singles_rate",
    "windows",
    "windows_per_cell",
    "efficiency",
    "dead_time",
];
const FIT_KEYS: &[&str] = &["max_harmonic", "data", "input"];
const OUTPUT_KEYS: &[&str] = &["path", "format"];

fn sections() -> [(&'static str, &'static [&'static str]); 6] {
    [
        ("source", SOURCE_KEYS),
        ("detectors", DETECTOR_KEYS),
        ("scan", SCAN_KEYS),
        ("mc", MC_KEYS),
        ("fit", FIT_KEYS),
        ("output", OUTPUT_KEYS),
    ]
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses TOML text into a table, reporting syntax errors by position.
pub fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ConfigError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// Sets `dotted.key = value` in `table`, creating sections as needed. The
/// value is read as a TOML value, falling back to a bare string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        ConfigError::constraint(assignment, "override must have the form key=value")
    })?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::constraint(key, "empty key segment"));
    }
    let mut cursor = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cursor
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::constraint(key, format!("`{part}` is not a section")))?;
    }
    cursor.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn check_keys(table: &Table) -> Result<()> {
    for (key, value) in table {
        if !TOP_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key: key.clone() });
        }
        if let Some((_, allowed)) = sections().into_iter().find(|(name, _)| name == key) {
            let sub = value
                .as_table()
                .ok_or_else(|| ConfigError::constraint(key, "expected a section"))?;
            for k in sub.keys() {
                if !allowed.contains(&k.as_str()) {
                    return Err(ConfigError::UnknownKey {
                        key: format!("{key}.{k}"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Reads a table or section, keeping track of dotted key names.
struct Reader<'a> {
    prefix: &'a str,
    table: Option<&'a Table>,
}

impl<'a> Reader<'a> {
    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn name(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn string(&self, key: &str) -> Result<Option<&'a str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(ConfigError::constraint(
                &self.name(key),
                "expected a string",
            )),
        }
    }

    fn parsed<T: FromStr<Err = String>>(&self, key: &str) -> Result<Option<T>> {
        self.string(key)?
            .map(|s| {
                s.parse()
                    .map_err(|e| ConfigError::constraint(&self.name(key), e))
            })
            .transpose()
    }

    fn integer(&self, key: &str, min: i64) -> Result<Option<i64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= min => Ok(Some(*i)),
            Some(Value::Integer(i)) => Err(ConfigError::constraint(
                &self.name(key),
                format!("must be at least {min}, got {i}"),
            )),
            Some(_) => Err(ConfigError::constraint(
                &self.name(key),
                "expected an integer",
            )),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(ConfigError::constraint(
                &self.name(key),
                "expected a number",
            )),
        }
    }

    fn quantity(&self, key: &str, dim: Dimension) -> Result<Option<f64>> {
        let name = self.name(key);
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => parse_quantity(s, dim)
                .map(Some)
                .map_err(|m| ConfigError::unit(&name, m)),
            // zero is zero in any unit
            Some(Value::Integer(0)) => Ok(Some(0.0)),
            Some(Value::Float(f)) if *f == 0.0 => Ok(Some(0.0)),
            Some(Value::Integer(_) | Value::Float(_)) => Err(ConfigError::unit(
                &name,
                format!(
                    "a {} needs an explicit unit, e.g. \"{}\"",
                    dim.noun(),
                    dim.example()
                ),
            )),
            Some(_) => Err(ConfigError::constraint(&name, "expected a quantity string")),
        }
    }

    fn phase(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => phase_value(v)
                .map(Some)
                .map_err(|m| ConfigError::unit(&self.name(key), m)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Dimension {
    Length,
    Time,
    Rate,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, i32)] {
        match self {
            Dimension::Length => &[
                ("m", 0),
                ("mm", -3),
                ("um", -6),
                ("μm", -6),
                ("µm", -6),
                ("nm", -9),
            ],
            Dimension::Time => &[
                ("s", 0),
                ("ms", -3),
                ("us", -6),
                ("μs", -6),
                ("µs", -6),
                ("ns", -9),
                ("ps", -12),
            ],
            Dimension::Rate => &[("Hz", 0), ("kHz", 3), ("MHz", 6)],
        }
    }

    fn noun(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Rate => "rate",
        }
    }

    fn example(self) -> &'static str {
        match self {
            Dimension::Length => "250 um",
            Dimension::Time => "50 ns",
            Dimension::Rate => "200 kHz",
        }
    }

    fn si(self) -> &'static str {
        self.units()[0].0
    }
}

fn parse_quantity(text: &str, dim: Dimension) -> std::result::Result<f64, String> {
    let t = text.trim();
    let split = t
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(t.len());
    // an exponent marker directly followed by a letter belongs to the unit
    let (num, unit) = t.split_at(split);
    let (num, unit) = match num.strip_suffix(['e', 'E']) {
        Some(stripped) if !unit.is_empty() => (stripped, &t[stripped.len()..]),
        _ => (num, unit),
    };
    let unit = unit.trim();
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("cannot read a number from \"{text}\""))?;
    let scale = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let known: Vec<&str> = dim.units().iter().map(|(u, _)| *u).collect();
            if unit.is_empty() {
                format!(
                    "\"{text}\" has no unit; expected one of {}",
                    known.join(", ")
                )
            } else {
                format!(
                    "`{unit}` is not a {} unit; expected one of {}",
                    dim.noun(),
                    known.join(", ")
                )
            }
        })?;
    // dividing by an exact power of ten keeps "50 ns" equal to 50e-9
    let si = if scale < 0 {
        value / 10f64.powi(-scale)
    } else {
        value * 10f64.powi(scale)
    };
    if !si.is_finite() {
        return Err(format!("\"{text}\" is not finite"));
    }
    Ok(si)
}

/// Phases in radians: a bare number, or a string such as "-2 pi", "pi/2",
/// "0.5 rad" or "90 deg".
fn phase_value(v: &Value) -> std::result::Result<f64, String> {
    let out = match v {
        Value::Float(f) => *f,
        Value::Integer(i) => *i as f64,
        Value::String(s) => parse_phase(s)?,
        _ => return Err("expected a phase in radians".into()),
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err("phase is not finite".into())
    }
}

fn parse_phase(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    let bad = || format!("cannot read a phase from \"{text}\"");
    let (body, divisor) = match t.split_once('/') {
        Some((b, d)) => (b.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t, 1.0),
    };
    let (coeff, scale) = if let Some(c) = body.strip_suffix("pi").or_else(|| body.strip_suffix("π"))
    {
        (c.trim(), PI)
    } else if let Some(c) = body.strip_suffix("rad") {
        (c.trim(), 1.0)
    } else if let Some(c) = body.strip_suffix("deg") {
        (c.trim(), PI / 180.0)
    } else {
        (body, 1.0)
    };
    let coeff = match coeff.trim_end_matches('*').trim() {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coeff * scale / divisor)
}

impl RunConfig {
    /// Parses configuration text.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_table(&parse_table(text)?)
    }

    /// Parses configuration text with `key=value` overrides applied first.
    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table = parse_table(text)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(&table)
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        check_keys(table)?;
        let top = Reader {
            prefix: "",
            table: Some(table),
        };
        let section = |name: &'static str| Reader {
            prefix: name,
            table: table.get(name).and_then(Value::as_table),
        };

        let mode = top.parsed::<Mode>("mode")?.unwrap_or(Mode::Analytic);
        let target = top.parsed::<FigureTarget>("target")?;
        if mode == Mode::Figure && target.is_none() {
            return Err(ConfigError::constraint(
                "target",
                "figure mode needs a target (fig1, fig2b or fig4)",
            ));
        }
        if mode != Mode::Figure && target.is_some() {
            return Err(ConfigError::constraint(
                "target",
                "only meaningful in figure mode",
            ));
        }
        let seed = top.integer("seed", 0)?.unwrap_or(0) as u64;

        let src = section("source");
        let n = match src.integer("n", 2)? {
            Some(n) => n as usize,
            None if mode == Mode::Figure => 2,
            None => {
                return Err(ConfigError::constraint(
                    "source.n",
                    "the number of sources is required",
                ))
            }
        };
        let kind = match src.string("kind")? {
            Some(s) => s
                .parse::<SourceKind>()
                .map_err(|e| ConfigError::constraint("source.kind", e.to_string()))?,
            None => SourceKind::Tls,
        };
        let spacing = src
            .quantity("spacing", Dimension::Length)?
            .unwrap_or(DEFAULT_SPACING);
        let default_width = if kind == SourceKind::Spe {
            0.0
        } else {
            DEFAULT_SLIT_WIDTH
        };
        let slit_width = src
            .quantity("slit_width", Dimension::Length)?
            .unwrap_or(default_width);
        let wavelength = src
            .quantity("wavelength", Dimension::Length)?
            .unwrap_or(DEFAULT_WAVELENGTH);
        let sub_sources = src
            .integer("sub_sources", 1)?
            .map_or(gncorr_core::source::DEFAULT_SUB_SOURCES, |v| v as usize);
        if !(spacing > 0.0) {
            return Err(ConfigError::constraint(
                "source.spacing",
                "must be positive",
            ));
        }
        if !(wavelength > 0.0) {
            return Err(ConfigError::constraint(
                "source.wavelength",
                "must be positive",
            ));
        }
        if !(0.0..spacing).contains(&slit_width) {
            return Err(ConfigError::constraint(
                "source.slit_width",
                "must be non-negative and smaller than the spacing",
            ));
        }
        if kind == SourceKind::Spe && slit_width > 0.0 {
            return Err(ConfigError::constraint(
                "source.slit_width",
                "single-photon emitters are point sources; use 0 m",
            ));
        }

        let det = section("detectors");
        let offset = det.phase("offset")?;
        let detectors = match det.get("phases") {
            None => Detectors::Magic {
                offset: offset.unwrap_or(0.0),
            },
            Some(Value::String(s)) if s == "magic" => Detectors::Magic {
                offset: offset.unwrap_or(0.0),
            },
            Some(Value::Array(items)) => {
                if offset.is_some() {
                    return Err(ConfigError::constraint(
                        "detectors.offset",
                        "only applies to magic positions",
                    ));
                }
                let phases = items
                    .iter()
                    .map(phase_value)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|m| ConfigError::unit("detectors.phases", m))?;
                if phases.len() + 1 != n {
                    return Err(ConfigError::constraint(
                        "detectors.phases",
                        format!(
                            "{n} sources need {} fixed phases, got {}",
                            n - 1,
                            phases.len()
                        ),
                    ));
                }
                Detectors::Fixed(phases)
            }
            Some(_) => {
                return Err(ConfigError::constraint(
                    "detectors.phases",
                    "expected \"magic\" or a list of phases",
                ))
            }
        };

        let sc = section("scan");
        let start = sc.phase("start")?.unwrap_or(-PI);
        let stop = sc.phase("stop")?.unwrap_or(PI);
        let points = sc.integer("points", 2)?.unwrap_or(201) as usize;
        if !(stop > start) {
            return Err(ConfigError::constraint(
                "scan.stop",
                "must exceed scan.start",
            ));
        }

        let mc = section("mc");
        let defaults = ExperimentParams::for_order(n);
        let mc = McSettings {
            coherence_time: mc
                .quantity("coherence_time", Dimension::Time)?
                .unwrap_or(defaults.coherence_time),
            window: mc.quantity("window", Dimension::Time)?,
            singles_rate: mc
                .quantity("singles_rate", Dimension::Rate)?
                .unwrap_or(defaults.singles_rate),
            windows: mc
                .integer("windows", 1)?
                .map_or(defaults.n_windows, |v| v as u64),
            windows_per_cell: mc
                .integer("windows_per_cell", 1)?
                .map_or(defaults.windows_per_cell, |v| v as u64),
            efficiency: mc
                .number("efficiency")?
                .unwrap_or(defaults.detector_efficiency),
            dead_time: mc.quantity("dead_time", Dimension::Time)?.unwrap_or(0.0),
        };
        if mc.windows_per_cell > u64::MAX / CELLS_PER_CHUNK {
            return Err(ConfigError::constraint("mc.windows_per_cell", "too large"));
        }
        mc.params(n, seed)
            .validate()
            .map_err(|e| ConfigError::constraint("mc", e.to_string()))?;

        let fit = section("fit");
        let fit = FitSettings {
            max_harmonic: fit
                .integer("max_harmonic", 1)?
                .map_or(DEFAULT_MAX_HARMONIC, |v| v as usize),
            data: match fit.string("data")? {
                None | Some("analytic") => DataSource::Analytic,
                Some("mc") => DataSource::Mc,
                Some(other) => {
                    return Err(ConfigError::constraint(
                        "fit.data",
                        format!("unknown data source `{other}` (expected analytic or mc)"),
                    ))
                }
            },
            input: fit.string("input")?.map(PathBuf::from),
        };

        let out = section("output");
        let output = OutputSettings {
            path: out.string("path")?.map(PathBuf::from),
            format: out
                .parsed::<OutputFormat>("format")?
                .unwrap_or(OutputFormat::Csv),
        };

        Ok(RunConfig {
            mode,
            target,
            seed,
            source: SourceSettings {
                n,
                kind,
                spacing,
                slit_width,
                wavelength,
                sub_sources,
            },
            detectors,
            scan: ScanSettings {
                start,
                stop,
                points,
            },
            mc,
            fit,
            output,
        })
    }

    /// Fully resolved configuration in canonical TOML form.
    pub fn to_canonical(&self) -> String {
        let q = |v: f64, unit: &str| Value::String(format!("{} {unit}", fmt_f64(v))).to_string();
        let s = |v: &str| Value::String(v.to_string()).to_string();
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "mode = {}", s(self.mode.as_str()));
        if let Some(t) = self.target {
            let _ = writeln!(w, "target = {}", s(t.as_str()));
        }
        let _ = writeln!(w, "seed = {}", self.seed);

        let src = &self.source;
        let _ = writeln!(w, "\n[source]");
        let _ = writeln!(w, "n = {}", src.n);
        let _ = writeln!(w, "kind = {}", s(src.kind.as_str()));
        let _ = writeln!(w, "spacing = {}", q(src.spacing, Dimension::Length.si()));
        let _ = writeln!(
            w,
            "slit_width = {}",
            q(src.slit_width, Dimension::Length.si())
        );
        let _ = writeln!(
            w,
            "wavelength = {}",
            q(src.wavelength, Dimension::Length.si())
        );
        let _ = writeln!(w, "sub_sources = {}", src.sub_sources);

        let _ = writeln!(w, "\n[detectors]");
        match &self.detectors {
            Detectors::Magic { offset } => {
                let _ = writeln!(w, "phases = \"magic\"");
                let _ = writeln!(w, "offset = {}", fmt_f64(*offset));
            }
            Detectors::Fixed(p) => {
                let list: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
                let _ = writeln!(w, "phases = [{}]", list.join(", "));
            }
        }

        let _ = writeln!(w, "\n[scan]");
        let _ = writeln!(w, "start = {}", fmt_f64(self.scan.start));
        let _ = writeln!(w, "stop = {}", fmt_f64(self.scan.stop));
        let _ = writeln!(w, "points = {}", self.scan.points);

        let mc = &self.mc;
        let _ = writeln!(w, "\n[mc]");
        let _ = writeln!(
            w,
            "coherence_time = {}",
            q(mc.coherence_time, Dimension::Time.si())
        );
        if let Some(win) = mc.window {
            let _ = writeln!(w, "window = {}", q(win, Dimension::Time.si()));
        }
        let _ = writeln!(
            w,
            "singles_rate = {}",
            q(mc.singles_rate, Dimension::Rate.si())
        );
        let _ = writeln!(w, "windows = {}", mc.windows);
        let _ = writeln!(w, "windows_per_cell = {}", mc.windows_per_cell);
        let _ = writeln!(w, "efficiency = {}", fmt_f64(mc.efficiency));
        let _ = writeln!(w, "dead_time = {}", q(mc.dead_time, Dimension::Time.si()));

        let _ = writeln!(w, "\n[fit]");
        let _ = writeln!(w, "max_harmonic = {}", self.fit.max_harmonic);
        let _ = writeln!(w, "data = {}", s(self.fit.data.as_str()));
        if let Some(p) = &self.fit.input {
            let _ = writeln!(w, "input = {}", s(&p.to_string_lossy()));
        }

        let _ = writeln!(w, "\n[output]");
        if let Some(p) = &self.output.path {
            let _ = writeln!(w, "path = {}", s(&p.to_string_lossy()));
        }
        let _ = writeln!(w, "format = {}", s(self.output.format.as_str()));
        out
    }
}

/// Shortest round-trip decimal that TOML reads back as a float.
fn fmt_f64(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}
