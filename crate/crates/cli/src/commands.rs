use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qfisher::collective::{Axis, Direction};
use qfisher::criteria::evaluate_gamma;
use qfisher::interferometer::{crb_report, CrbReport, FisherProbe, MeasurementSpec, PhaseSetting, DEFAULT_THETA};
use qfisher::landscape::{
    d_plane_sample, dicke_polytope_sample, landmark_consistency, noise_line, separable_polytope_sample,
    DickePlane, GEOMETRY_TOL,
};
use qfisher::qfi::{gamma_c_with, spin_moments};
use qfisher::states::{from_spec_capped, StateSpec};

use crate::report::TOOL_VERSION;
use crate::{AnalysisConfig, CliError, CliResult, ErrorKind, ReportDocument};

pub fn load_spec(path: &Path) -> CliResult<StateSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

pub fn analyze_spec(spec: StateSpec, cfg: &AnalysisConfig) -> CliResult<ReportDocument> {
    let state = from_spec_capped(&spec, cfg.dimension_cap)?;
    let gamma = gamma_c_with(&state, cfg.eps_rank)?;
    let variance_sum = spin_moments(&state).variances().iter().sum();
    let eval = evaluate_gamma(&gamma, variance_sum, cfg.tol_violation)?;
    Ok(ReportDocument::new(spec, cfg, &gamma, variance_sum, eval))
}

pub fn analyze_file(path: &Path, cfg: &AnalysisConfig) -> CliResult<ReportDocument> {
    analyze_spec(load_spec(path)?, cfg).map_err(|e| e.at(path))
}

/// Analyzes files in parallel; results keep input order.
pub fn analyze_files(paths: &[PathBuf], cfg: &AnalysisConfig) -> Vec<CliResult<ReportDocument>> {
    paths.par_iter().map(|p| analyze_file(p, cfg)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandscapeFamily {
    Landmarks,
    DPlane,
    SFill,
    DFill,
    NoiseLine,
}

impl FromStr for LandscapeFamily {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "landmarks" => Self::Landmarks,
            "d_plane" | "d-plane" => Self::DPlane,
            "s_fill" | "s-fill" => Self::SFill,
            "d_fill" | "d-fill" => Self::DFill,
            "noise_line" | "noise-line" => Self::NoiseLine,
            other => return Err(CliError::validation(format!("unknown landscape family '{other}'"))),
        })
    }
}

/// One row of a point-cloud table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub label: String,
    pub f_x: f64,
    pub f_y: f64,
    pub f_z: f64,
    pub note: String,
    pub spec: String,
}

impl LandscapeRow {
    fn new(label: String, p: [f64; 3], note: String, spec: &StateSpec) -> Self {
        LandscapeRow {
            label,
            f_x: p[0],
            f_y: p[1],
            f_z: p[2],
            note,
            spec: serde_json::to_string(spec).expect("spec serializes"),
        }
    }
}

pub struct LandscapeRequest {
    pub family: LandscapeFamily,
    pub n_qubits: usize,
    pub count: usize,
    pub seed: u64,
    /// State for the noise line; GHZ along z when absent.
    pub base: Option<StateSpec>,
}

fn check_cap(n_qubits: usize, cfg: &AnalysisConfig) -> CliResult<()> {
    let dim = 1usize.checked_shl(n_qubits as u32).unwrap_or(usize::MAX);
    if n_qubits > 0 && dim > cfg.dimension_cap {
        return Err(qfisher::Error::DimensionCap { dim, cap: cfg.dimension_cap }.into());
    }
    Ok(())
}

pub fn landscape_rows(req: &LandscapeRequest, cfg: &AnalysisConfig) -> CliResult<Vec<LandscapeRow>> {
    let n = req.n_qubits;
    check_cap(n, cfg)?;
    match req.family {
        LandscapeFamily::Landmarks => {
            let report = landmark_consistency(n, GEOMETRY_TOL)?;
            report
                .checks
                .iter()
                .map(|c| {
                    let spec = qfisher::landscape::landmark_spec(&c.label, n)?;
                    let note = if c.consistent {
                        "matches tabulated".to_string()
                    } else {
                        format!("tabulated ({}, {}, {})", c.tabulated[0], c.tabulated[1], c.tabulated[2])
                    };
                    Ok(LandscapeRow::new(c.label.clone(), c.computed, note, &spec))
                })
                .collect()
        }
        LandscapeFamily::DPlane => {
            let plane = DickePlane::new(n)?;
            (0..req.count as u64)
                .into_par_iter()
                .map(|i| {
                    let s = d_plane_sample(&plane, req.seed, i)?;
                    let note = if s.in_triangle { "in_triangle" } else { "outside_triangle" };
                    let spec = s.point.provenance.clone().expect("sample carries its spec");
                    Ok(LandscapeRow::new(format!("d{i}"), s.point.p, note.into(), &spec))
                })
                .collect()
        }
        LandscapeFamily::SFill | LandscapeFamily::DFill => {
            let plane = match req.family {
                LandscapeFamily::DFill => Some(DickePlane::new(n)?),
                _ => None,
            };
            (0..req.count as u64)
                .into_par_iter()
                .map(|i| {
                    let r = match &plane {
                        Some(p) => dicke_polytope_sample(p, req.seed, i)?,
                        None => separable_polytope_sample(n, req.seed, i)?,
                    };
                    let note = format!("target ({}, {}, {}); error {:e}", r.target[0], r.target[1], r.target[2], r.error());
                    Ok(LandscapeRow::new(format!("q{i}"), r.realized, note, &r.spec))
                })
                .collect()
        }
        LandscapeFamily::NoiseLine => {
            let base = req.base.clone().unwrap_or(StateSpec::Ghz { n_qubits: n, basis: Axis::Z });
            let state = from_spec_capped(&base, cfg.dimension_cap)?;
            let steps = req.count.max(2);
            let grid: Vec<f64> = (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect();
            let line = noise_line(&state, &grid)?;
            Ok(line
                .rows
                .iter()
                .map(|r| {
                    let spec = StateSpec::WhiteNoiseMix { p: r.p, inner: Box::new(base.clone()) };
                    let diag = [r.direct[0][0], r.direct[1][1], r.direct[2][2]];
                    LandscapeRow::new(format!("p={}", r.p), diag, format!("residual {:e}", r.residual), &spec)
                })
                .collect())
        }
    }
}

/// Writes rows with a header line. A closed downstream pipe is not an error.
pub fn write_csv<W: Write>(rows: &[LandscapeRow], out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let result = (|| -> Result<(), csv::Error> {
        if rows.is_empty() {
            w.write_record(["label", "f_x", "f_y", "f_z", "note", "spec"])?;
        }
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    })();
    match result {
        Err(e) => match e.kind() {
            csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            _ => Err(CliError::new(ErrorKind::Validation, e.to_string())),
        },
        Ok(()) => Ok(()),
    }
}

/// "x", "y", "z", or three comma-separated components (normalized).
pub fn parse_direction(s: &str) -> CliResult<Direction> {
    if let Ok(axis) = s.parse::<Axis>() {
        return Ok(Direction::along(axis));
    }
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::validation(format!("cannot parse direction '{s}'")))?;
    let arr: [f64; 3] = parts
        .try_into()
        .map_err(|_| CliError::validation(format!("direction '{s}' needs three components")))?;
    Ok(Direction::normalized(arr)?)
}

/// "parity-x", "local-y", "spin", "random" or "random:SEED".
pub fn parse_measurement(s: &str, direction: Direction, default_seed: u64) -> CliResult<MeasurementSpec> {
    let bad = || CliError::validation(format!("unknown measurement '{s}'"));
    let (head, tail) = s.split_once(['-', ':']).unwrap_or((s, ""));
    Ok(match head {
        "parity" => MeasurementSpec::Parity { axis: tail.parse().map_err(|_| bad())? },
        "local" => MeasurementSpec::Local { axis: tail.parse().map_err(|_| bad())? },
        "spin" if tail.is_empty() => MeasurementSpec::SpinEigenbasis { direction },
        "random" => MeasurementSpec::Random {
            seed: if tail.is_empty() { default_seed } else { tail.parse().map_err(|_| bad())? },
        },
        _ => return Err(bad()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrbDocument {
    pub tool_version: String,
    pub input: StateSpec,
    pub measurement: MeasurementSpec,
    #[serde(flatten)]
    pub report: CrbReport,
}

pub fn crb(
    spec: StateSpec,
    direction: Direction,
    measurement: MeasurementSpec,
    theta: Option<f64>,
    cfg: &AnalysisConfig,
) -> CliResult<CrbDocument> {
    let state = from_spec_capped(&spec, cfg.dimension_cap)?;
    let setting = PhaseSetting::new(theta.unwrap_or(DEFAULT_THETA), direction)?;
    let meas = measurement.build(state.n_qubits())?;
    let probe = FisherProbe { step: cfg.fd_step, ..Default::default() };
    let report = crb_report(&state, &setting, &meas, probe, cfg.tol_violation)?;
    Ok(CrbDocument { tool_version: TOOL_VERSION.into(), input: spec, measurement, report })
}
