//! Dispatch of a [`RunConfig`] to the analysis pipelines.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use gncorr_core::analysis::{
    fit_slit_geometry, magic_search, resolution_report, AngleScan, FitResult,
};
use gncorr_core::analytic::{linspace, CorrelationScan};
use gncorr_core::geometry::{abbe_aperture, angle_from_phase};
use gncorr_core::mc::mc_scan_detailed;
use gncorr_core::{
    aperture_all_detectors, aperture_scan_detector, fit_noon, scan, DetectorConfig, Error,
    SourceArray, SourceKind,
};
use serde_json::Value;

use crate::config::{ConfigError, DataSource, Detectors, FigureTarget, Mode, RunConfig};
use crate::output::{write_atomic, Cell, Document, Provenance, Table, WriteError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("bad input {}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {0}")]
    Write(#[from] WriteError),
}

impl CliError {
    /// 2 configuration/domain, 3 capacity, 4 statistics, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => 2,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::UnreachablePhase { .. } => 2,
                Error::Capacity { .. } => 3,
                Error::InsufficientStatistics(_)
                | Error::ResolutionInsufficient(_)
                | Error::Inconsistent { .. }
                | Error::SearchFailed { .. } => 4,
            },
            CliError::Read { .. } | CliError::Write(_) => 5,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    /// One-line human summary.
    pub summary: String,
    /// Files written.
    pub written: Vec<PathBuf>,
    /// Output destined for standard output when no path is configured.
    pub stdout: Option<Vec<u8>>,
}

fn source(cfg: &RunConfig) -> Result<SourceArray> {
    let s = &cfg.source;
    Ok(SourceArray::new(s.n, s.spacing, s.wavelength, s.kind)?
        .with_slit_width(s.slit_width)?
        .with_sub_sources(s.sub_sources)?)
}

fn detectors(cfg: &RunConfig, src: &SourceArray) -> Result<DetectorConfig> {
    Ok(match &cfg.detectors {
        Detectors::Magic { offset } => DetectorConfig::magic(src, *offset)?,
        Detectors::Fixed(p) => DetectorConfig::with_fixed(p)?,
    })
}

fn grid(cfg: &RunConfig) -> Vec<f64> {
    linspace(cfg.scan.start, cfg.scan.stop, cfg.scan.points)
}

fn scan_table(scan: &CorrelationScan) -> Table {
    let errs = scan.uncertainties();
    let mut t = if errs.is_some() {
        Table::new(&["delta1_rad", "g_value", "g_stderr"])
    } else {
        Table::new(&["delta1_rad", "g_value"])
    };
    for (i, (&d, &g)) in scan.deltas().iter().zip(scan.values()).enumerate() {
        let mut row = vec![Cell::from(d), Cell::from(g)];
        if let Some(e) = errs {
            row.push(Cell::from(e[i]));
        }
        t.push(row);
    }
    t
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize")
}

fn fit_summary(fit: &FitResult) -> String {
    format!("nu={} V={:.6}", fit.harmonic, fit.visibility)
}

fn read_scan(path: &Path, src: &SourceArray, cfg: &DetectorConfig) -> Result<CorrelationScan> {
    let bad = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(text.as_slice());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let xi = column("delta1_rad").ok_or_else(|| bad("missing column delta1_rad".into()))?;
    let yi = column("g_value").ok_or_else(|| bad("missing column g_value".into()))?;
    let ei = column("g_stderr");
    let (mut xs, mut ys, mut es) = (Vec::new(), Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    bad(format!(
                        "row {}: column {} is not a number",
                        line + 2,
                        i + 1
                    ))
                })
        };
        xs.push(num(xi)?);
        ys.push(num(yi)?);
        if let Some(i) = ei {
            es.push(num(i)?);
        }
    }
    let errs = ei.map(|_| es);
    Ok(CorrelationScan::new(
        xs,
        ys,
        errs,
        src.clone(),
        cfg.clone(),
    )?)
}

/// Scan for the fit and report modes.
fn data_scan(cfg: &RunConfig, src: &SourceArray, det: &DetectorConfig) -> Result<CorrelationScan> {
    if let Some(path) = &cfg.fit.input {
        return read_scan(path, src, det);
    }
    match cfg.fit.data {
        DataSource::Analytic => Ok(scan(src, det, &grid(cfg))?),
        DataSource::Mc => {
            let params = cfg.mc.params(src.n_sources(), cfg.seed);
            Ok(mc_scan_detailed(src, det, &grid(cfg), &params)?.0)
        }
    }
}

fn single(cfg: &RunConfig) -> Result<(Document, String)> {
    let src = source(cfg)?;
    let label = format!("{} N={} {}", cfg.mode.as_str(), src.n_sources(), src.kind());
    match cfg.mode {
        Mode::Analytic => {
            let det = detectors(cfg, &src)?;
            let s = scan(&src, &det, &grid(cfg))?;
            let fit = fit_noon(&s, cfg.fit.max_harmonic).ok();
            let summary = match &fit {
                Some(f) => format!("{label}: {}", fit_summary(f)),
                None => format!("{label}: {} points", s.len()),
            };
            let result = fit.map(|f| serde_json::json!({ "fit": to_value(&f) }));
            Ok((
                Document {
                    table: scan_table(&s),
                    result,
                },
                summary,
            ))
        }
        Mode::Mc => {
            let det = detectors(cfg, &src)?;
            let params = cfg.mc.params(src.n_sources(), cfg.seed);
            let (s, tallies) = mc_scan_detailed(&src, &det, &grid(cfg), &params)?;
            let mut table = scan_table(&s);
            table.columns.push("coincidences".into());
            for (row, t) in table.rows.iter_mut().zip(&tallies) {
                row.push(Cell::from(t.coincidences));
            }
            let fit = fit_noon(&s, cfg.fit.max_harmonic).ok();
            let summary = match &fit {
                Some(f) => format!("{label}: {}", fit_summary(f)),
                None => format!("{label}: {} points", s.len()),
            };
            let mut result = serde_json::json!({ "tallies": to_value(&tallies) });
            if let Some(f) = fit {
                result["fit"] = to_value(&f);
            }
            Ok((
                Document {
                    table,
                    result: Some(result),
                },
                summary,
            ))
        }
        Mode::Fit => {
            let det = detectors(cfg, &src)?;
            let s = data_scan(cfg, &src, &det)?;
            let fit = fit_noon(&s, cfg.fit.max_harmonic)?;
            let mut table = scan_table(&s);
            table.columns.push("g_fit".into());
            for (row, &d) in table.rows.iter_mut().zip(s.deltas()) {
                row.push(Cell::from(fit.model(d)));
            }
            let summary = format!("{label}: {}", fit_summary(&fit));
            Ok((
                Document {
                    table,
                    result: Some(to_value(&fit)),
                },
                summary,
            ))
        }
        Mode::Report => {
            let det = detectors(cfg, &src)?;
            let s = data_scan(cfg, &src, &det)?;
            let report = resolution_report(&s)?;
            let summary = format!(
                "{label}: M={} d={:.6e} m gain={}",
                report.peak_count, report.recovered_d, report.gain_factor
            );
            let value = to_value(&report);
            Ok((
                Document {
                    table: Table::from_fields(&value),
                    result: Some(value),
                },
                summary,
            ))
        }
        Mode::MagicSearch => {
            // magic positions are a property of point emitters
            let point = src.clone().with_slit_width(0.0)?;
            let found = magic_search(&point)?;
            let mut table = Table::new(&["detector", "phase_rad"]);
            for (i, &p) in found.phases.iter().enumerate() {
                table.push(vec![Cell::from(i + 2), Cell::from(p)]);
            }
            let summary = format!("{label}: purity={:.3e}", found.purity);
            Ok((
                Document {
                    table,
                    result: Some(to_value(&found)),
                },
                summary,
            ))
        }
        Mode::Figure => unreachable!("figures write several files"),
    }
}

fn figure_files(
    cfg: &RunConfig,
    target: FigureTarget,
) -> Result<(Vec<(String, Document)>, String)> {
    let s = &cfg.source;
    let tls = |n: usize, spacing: f64, width: f64| -> Result<SourceArray> {
        Ok(SourceArray::new(n, spacing, s.wavelength, SourceKind::Tls)?
            .with_slit_width(width)?
            .with_sub_sources(s.sub_sources)?)
    };
    let mut files = Vec::new();
    let summary = match target {
        FigureTarget::Fig1 => {
            let g = grid(cfg);
            let mut visibilities = Vec::new();
            for n in 2..=5 {
                let point = tls(n, s.spacing, 0.0)?;
                let wide = tls(n, s.spacing, s.slit_width)?;
                let det = DetectorConfig::magic(&point, 0.0)?;
                let a = scan(&point, &det, &g)?;
                let b = scan(&wide, &det, &g)?;
                let mut t = Table::new(&["delta1_rad", "g_point", "g_envelope"]);
                for ((&d, &x), &y) in g.iter().zip(a.values()).zip(b.values()) {
                    t.push(vec![Cell::from(d), Cell::from(x), Cell::from(y)]);
                }
                let fit = fit_noon(&a, cfg.fit.max_harmonic).ok();
                if let Some(f) = &fit {
                    visibilities.push(format!("V{n}={:.6}", f.visibility));
                }
                let result = fit.map(|f| serde_json::json!({ "point_fit": to_value(&f) }));
                files.push((format!("fig1_n{n}"), Document { table: t, result }));
            }
            format!("figure fig1: {}", visibilities.join(" "))
        }
        FigureTarget::Fig2b => {
            let mut t = Table::new(&["n", "aperture_abbe", "aperture_scan", "aperture_all"]);
            for n in 2..=6usize {
                let src = tls(n, s.wavelength / 2.0, 0.0)?;
                let offset = if n == 2 { 0.0 } else { -PI };
                let det = DetectorConfig::magic(&src, offset)?;
                let half = PI / (n - 1) as f64;
                t.push(vec![
                    Cell::from(n),
                    Cell::from(abbe_aperture(&src)),
                    Cell::from(aperture_scan_detector((-half, half), &src)?),
                    Cell::from(aperture_all_detectors(&det, &src)?),
                ]);
            }
            files.push((
                "fig2b".to_string(),
                Document {
                    table: t,
                    result: None,
                },
            ));
            "figure fig2b: apertures for N=2..6 at d=lambda/2".to_string()
        }
        FigureTarget::Fig4 => {
            let g = grid(cfg);
            let mut parts = Vec::new();
            for n in 2..=5 {
                let src = tls(n, s.spacing, s.slit_width)?;
                let det = DetectorConfig::magic(&src, 0.0)?;
                let params = cfg.mc.params(n, cfg.seed);
                let (mc, tallies) = mc_scan_detailed(&src, &det, &g, &params)?;
                let fixed = det
                    .fixed_phases()
                    .iter()
                    .map(|&p| angle_from_phase(&src, p))
                    .collect::<gncorr_core::Result<Vec<_>>>()?;
                let fit = fit_slit_geometry(
                    &AngleScan::from_scan(&mc)?,
                    &fixed,
                    s.wavelength,
                    SourceKind::Tls,
                )?;
                let mut t = Table::new(&["delta1_rad", "g_value", "g_stderr", "g_fit"]);
                let errs = mc.uncertainties().expect("Monte Carlo scans carry errors");
                for i in 0..g.len() {
                    t.push(vec![
                        Cell::from(g[i]),
                        Cell::from(mc.values()[i]),
                        Cell::from(errs[i]),
                        Cell::from(fit.curve[i]),
                    ]);
                }
                parts.push(format!("V{n}e={:.4}", fit.visibility));
                let result = serde_json::json!({
                    "geometry_fit": to_value(&fit),
                    "coincidences": tallies.iter().map(|t| t.coincidences).collect::<Vec<_>>(),
                });
                files.push((
                    format!("fig4_n{n}"),
                    Document {
                        table: t,
                        result: Some(result),
                    },
                ));
            }
            format!("figure fig4: {}", parts.join(" "))
        }
    };
    Ok((files, summary))
}

/// Executes a configuration, writing its outputs.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let provenance = Provenance::new(cfg.seed, cfg.to_canonical());
    let format = cfg.output.format;
    if cfg.mode == Mode::Figure {
        let target = cfg.target.ok_or_else(|| ConfigError::Constraint {
            key: "target".into(),
            message: "figure mode needs a target".into(),
        })?;
        let (files, summary) = figure_files(cfg, target)?;
        let dir = cfg
            .output
            .path
            .clone()
            .unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|source| {
            CliError::Write(WriteError {
                path: dir.clone(),
                source,
            })
        })?;
        let mut written = Vec::new();
        for (stem, doc) in files {
            let path = dir.join(format!("{stem}.{}", format.extension()));
            write_atomic(&path, &doc.render(format, &provenance))?;
            written.push(path);
        }
        return Ok(RunOutcome {
            summary,
            written,
            stdout: None,
        });
    }
    let (doc, summary) = single(cfg)?;
    let bytes = doc.render(format, &provenance);
    match &cfg.output.path {
        Some(path) => {
            write_atomic(path, &bytes)?;
            Ok(RunOutcome {
                summary,
                written: vec![path.clone()],
                stdout: None,
            })
        }
        None => Ok(RunOutcome {
            summary,
            written: Vec::new(),
            stdout: Some(bytes),
        }),
    }
}
