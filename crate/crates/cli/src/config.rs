//! Configuration file loading.
//!
//! The format is nested key-value text: one `section.key = value` per line,
//! `#` starts a comment, units spelled out in the key names. The raw string
//! map is kept alongside the resolved configuration so outputs can echo the
//! exact inputs and the verify command can re-run from an output file alone.

use std::collections::BTreeMap;
use std::path::Path;

use dwva_core::hg_pointer::BeamGeometry;
use dwva_core::selection_states::phase_for_probability;
use dwva_core::spectrum_lab::{TraceConfig, WindowKind};
use dwva_core::{DarkPort, SystemConfig};

use crate::calibrate::Calibration;
use crate::error::{CliError, Result};

const KNOWN_KEYS: &[&str] = &[
    "system.wavelength_nm",
    "system.waist_mm",
    "system.phi1_rad",
    "system.p_theta",
    "system.phi2_rad",
    "system.p_phi",
    "system.eta_opt",
    "system.input_power_uw",
    "system.lo_power_mw",
    "system.lever_arm_mm",
    "system.mod_freq_yaw_hz",
    "system.mod_freq_pitch_hz",
    "trace.sample_rate_hz",
    "trace.duration_s",
    "trace.rbw_hz",
    "trace.seed",
    "trace.window",
    "calibration.yaw_slope_nrad_per_mv",
    "calibration.pitch_slope_nrad_per_mv",
    "drive.yaw_mv",
    "drive.pitch_mv",
    "sweep.kind",
    "sweep.points",
    "sweep.points_port_ii",
    "sweep.points_provenance",
    "sweep.trials",
    "sweep.ports",
];

/// Verbatim key-value entries, kept sorted for stable echoes and digests.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "line {}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            if value.is_empty() {
                return Err(CliError::Config(format!(
                    "line {}: empty value for '{key}'",
                    lineno + 1
                )));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn from_file(path: &Path) -> Result<RawConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
        RawConfig::parse(&text)
    }

    /// Sets or overrides a key (CLI flags funnel through here).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown key '{key}'")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
    }

    fn f64_value(&self, key: &str) -> Result<f64> {
        let raw = self.required(key)?;
        raw.parse::<f64>()
            .map_err(|_| CliError::Config(format!("'{key}' is not a number: '{raw}'")))
    }

    fn f64_optional(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|_| CliError::Config(format!("'{key}' is not a number: '{raw}'"))),
        }
    }

    fn u64_value(&self, key: &str) -> Result<u64> {
        let raw = self.required(key)?;
        raw.parse::<u64>()
            .map_err(|_| CliError::Config(format!("'{key}' is not an unsigned integer: '{raw}'")))
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.required(key)?;
        let points: Vec<f64> = raw
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("'{key}' entry is not a number: '{s}'")))
            })
            .collect::<Result<_>>()?;
        if points.is_empty() {
            return Err(CliError::Config(format!("'{key}' lists no points")));
        }
        Ok(points)
    }
}

/// Sweep kinds, one per reproduced experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Spectra and angle linearity versus drive voltage.
    Voltage,
    /// SNR versus post-selection probability at fixed drive and power.
    Postselection,
    /// SNR and minimum angles versus input power at fixed drive.
    Power,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Voltage => "voltage",
            SweepKind::Postselection => "postselection",
            SweepKind::Power => "power",
        }
    }

    pub fn parse(s: &str) -> Result<SweepKind> {
        match s {
            "voltage" => Ok(SweepKind::Voltage),
            "postselection" => Ok(SweepKind::Postselection),
            "power" => Ok(SweepKind::Power),
            other => Err(CliError::Config(format!(
                "'sweep.kind' must be voltage|postselection|power, got '{other}'"
            ))),
        }
    }

    /// Units of `sweep.points` for this kind.
    pub fn point_unit(self) -> &'static str {
        match self {
            SweepKind::Voltage => "mV",
            SweepKind::Postselection => "probability",
            SweepKind::Power => "uW",
        }
    }
}

/// Parsed sweep request.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// Swept settings: mV, probability or uW depending on `kind`.
    pub points: Vec<f64>,
    /// Probability list for the second port when it differs (postselection
    /// sweeps only).
    pub points_port_ii: Option<Vec<f64>>,
    pub trials: usize,
    pub ports: Vec<DarkPort>,
}

impl SweepSpec {
    pub fn points_for(&self, port: DarkPort) -> &[f64] {
        match (port, &self.points_port_ii) {
            (DarkPort::II, Some(points)) => points,
            _ => &self.points,
        }
    }
}

/// Fully resolved run configuration plus its verbatim source.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub raw: RawConfig,
    pub system: SystemConfig,
    pub trace: TraceConfig,
    pub calibration: Calibration,
    pub drive_yaw_v: f64,
    pub drive_pitch_v: f64,
    pub sweep: Option<SweepSpec>,
}

fn phase_from_keys(
    raw: &RawConfig,
    phi_key: &str,
    probability_key: &str,
) -> Result<f64> {
    match (raw.f64_optional(phi_key)?, raw.f64_optional(probability_key)?) {
        (Some(_), Some(_)) => Err(CliError::Config(format!(
            "set either '{phi_key}' or '{probability_key}', not both"
        ))),
        (Some(phi), None) => Ok(phi),
        (None, Some(p)) => phase_for_probability(p).map_err(|_| {
            CliError::Config(format!("'{probability_key}' must lie in (0, 1), got {p}"))
        }),
        (None, None) => Err(CliError::Config(format!(
            "missing required key '{phi_key}' (or '{probability_key}')"
        ))),
    }
}

pub fn resolve(raw: &RawConfig) -> Result<ExperimentConfig> {
    let geom = BeamGeometry::new(
        raw.f64_value("system.waist_mm")? * 1e-3,
        raw.f64_value("system.wavelength_nm")? * 1e-9,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;

    let system = SystemConfig {
        geom,
        phi1: phase_from_keys(raw, "system.phi1_rad", "system.p_theta")?,
        phi2: phase_from_keys(raw, "system.phi2_rad", "system.p_phi")?,
        eta_opt: raw.f64_value("system.eta_opt")?,
        input_power: raw.f64_value("system.input_power_uw")? * 1e-6,
        lo_power: raw.f64_value("system.lo_power_mw")? * 1e-3,
        lever_arm: raw.f64_value("system.lever_arm_mm")? * 1e-3,
        mod_freq_yaw: raw.f64_value("system.mod_freq_yaw_hz")?,
        mod_freq_pitch: raw.f64_value("system.mod_freq_pitch_hz")?,
    };
    system
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let window = match raw.required("trace.window")? {
        "hann" => WindowKind::Hann,
        "rectangular" => WindowKind::Rectangular,
        other => {
            return Err(CliError::Config(format!(
                "'trace.window' must be hann|rectangular, got '{other}'"
            )))
        }
    };
    let trace = TraceConfig {
        sample_rate: raw.f64_value("trace.sample_rate_hz")?,
        duration: raw.f64_value("trace.duration_s")?,
        rbw: raw.f64_value("trace.rbw_hz")?,
        seed: raw.u64_value("trace.seed")?,
        window,
    };
    trace
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if trace.sample_rate <= 2.0 * system.mod_freq_yaw.max(system.mod_freq_pitch) {
        return Err(CliError::Config(format!(
            "'trace.sample_rate_hz' = {} must exceed twice the drive frequencies",
            trace.sample_rate
        )));
    }

    // nrad/mV equals urad/V.
    let calibration = Calibration::new(
        raw.f64_value("calibration.yaw_slope_nrad_per_mv")? * 1e-6,
        raw.f64_value("calibration.pitch_slope_nrad_per_mv")? * 1e-6,
    )?;

    let drive_yaw_v = raw.f64_value("drive.yaw_mv")? * 1e-3;
    let drive_pitch_v = raw.f64_value("drive.pitch_mv")? * 1e-3;

    let sweep = match raw.get("sweep.kind") {
        None => None,
        Some(kind) => {
            let kind = SweepKind::parse(kind)?;
            let points = raw.f64_list("sweep.points")?;
            let points_port_ii = match raw.get("sweep.points_port_ii") {
                Some(_) if kind != SweepKind::Postselection => {
                    return Err(CliError::Config(
                        "'sweep.points_port_ii' applies to postselection sweeps only".into(),
                    ))
                }
                Some(_) => Some(raw.f64_list("sweep.points_port_ii")?),
                None => None,
            };
            let trials = match raw.get("sweep.trials") {
                None => 20,
                Some(_) => raw.u64_value("sweep.trials")? as usize,
            };
            if trials == 0 {
                return Err(CliError::Config("'sweep.trials' must be at least 1".into()));
            }
            let ports = match raw.get("sweep.ports") {
                None => vec![DarkPort::I, DarkPort::II],
                Some(list) => {
                    let mut ports = Vec::new();
                    for token in list.split(|c: char| c == ',' || c.is_whitespace()) {
                        match token {
                            "" => {}
                            "i" => ports.push(DarkPort::I),
                            "ii" => ports.push(DarkPort::II),
                            other => {
                                return Err(CliError::Config(format!(
                                    "'sweep.ports' entries must be i|ii, got '{other}'"
                                )))
                            }
                        }
                    }
                    if ports.is_empty() {
                        return Err(CliError::Config("'sweep.ports' lists no ports".into()));
                    }
                    ports
                }
            };
            Some(SweepSpec {
                kind,
                points,
                points_port_ii,
                trials,
                ports,
            })
        }
    };
    if let Some(spec) = &sweep {
        validate_sweep_points(spec)?;
    }

    Ok(ExperimentConfig {
        raw: raw.clone(),
        system,
        trace,
        calibration,
        drive_yaw_v,
        drive_pitch_v,
        sweep,
    })
}

fn validate_sweep_points(spec: &SweepSpec) -> Result<()> {
    let all_points = spec
        .points
        .iter()
        .chain(spec.points_port_ii.iter().flatten());
    for &p in all_points {
        match spec.kind {
            SweepKind::Voltage => {
                if p < 0.0 || !p.is_finite() {
                    return Err(CliError::Config(format!(
                        "voltage sweep points must be non-negative mV, got {p}"
                    )));
                }
            }
            SweepKind::Postselection => {
                if !(p > 0.0 && p < 1.0) {
                    // Degenerate post-selection is a physics precondition,
                    // surfaced with its own error class and exit code.
                    return Err(CliError::Physics(
                        dwva_core::Error::DegeneratePostselection { probability: p },
                    ));
                }
            }
            SweepKind::Power => {
                if p <= 0.0 || !p.is_finite() {
                    return Err(CliError::Config(format!(
                        "power sweep points must be positive uW, got {p}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Built-in experiment presets, shipped as config files in the repository.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "baseline-50uw",
        include_str!("../configs/baseline-50uw.conf"),
    ),
    (
        "postselection-scan",
        include_str!("../configs/postselection-scan.conf"),
    ),
    ("power-scan", include_str!("../configs/power-scan.conf")),
];

pub fn preset(name: &str) -> Result<RawConfig> {
    for (preset_name, text) in PRESETS {
        if *preset_name == name {
            return RawConfig::parse(text);
        }
    }
    let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
    Err(CliError::Config(format!(
        "unknown preset '{name}'; available: {}",
        names.join(", ")
    )))
}
