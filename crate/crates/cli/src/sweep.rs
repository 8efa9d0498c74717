//! Sweep execution: the three reproduced experiments as tables, plus the
//! single-point spectrum and minimum-angle reports.
//!
//! Monte-Carlo trials fan out over a worker pool; every (port, point, trial)
//! job derives its own seed substream from the base seed, so output bytes do
//! not depend on scheduling.

use rayon::prelude::*;

use dwva_core::detection::{self, PhotonBudget};
use dwva_core::selection_states::phase_for_probability;
use dwva_core::spectrum_lab::{
    bench_spectra, derive_seed, port_spectrum, realized_rbw, write_psd, DriveSettings,
};
use dwva_core::{DarkPort, SystemConfig};

use crate::config::{ExperimentConfig, SweepKind, SweepSpec};
use crate::error::{CliError, Result};
use crate::table::{fmt_float, standard_meta, OutputFormat, Table};

fn port_label(port: DarkPort) -> &'static str {
    match port {
        DarkPort::I => "i",
        DarkPort::II => "ii",
    }
}

fn port_tag(port: DarkPort) -> u64 {
    match port {
        DarkPort::I => 1,
        DarkPort::II => 2,
    }
}

fn kind_tag(kind: SweepKind) -> u64 {
    match kind {
        SweepKind::Voltage => 1,
        SweepKind::Postselection => 2,
        SweepKind::Power => 3,
    }
}

fn mod_freq(cfg: &ExperimentConfig, port: DarkPort) -> f64 {
    match port {
        DarkPort::I => cfg.system.mod_freq_yaw,
        DarkPort::II => cfg.system.mod_freq_pitch,
    }
}

fn drive_angle(cfg: &ExperimentConfig, port: DarkPort) -> f64 {
    match port {
        DarkPort::I => cfg.calibration.yaw_angle(cfg.drive_yaw_v),
        DarkPort::II => cfg.calibration.pitch_angle(cfg.drive_pitch_v),
    }
}

/// One Monte-Carlo spectrum job, fully self-describing.
struct McJob {
    system: SystemConfig,
    port: DarkPort,
    angle: f64,
    freq: f64,
    seed: u64,
}

/// Per-(port, point) aggregate over trials.
struct McStat {
    mean_db: f64,
    std_db: f64,
}

fn run_jobs(cfg: &ExperimentConfig, jobs: Vec<McJob>, trials: usize) -> Result<Vec<McStat>> {
    let readings: std::result::Result<Vec<f64>, dwva_core::Error> = jobs
        .par_iter()
        .map(|job| {
            let tc = cfg.trace.with_seed(job.seed);
            let ps = port_spectrum(&job.system, job.port, job.angle, job.freq, &tc)?;
            ps.peak_snr_db(job.freq)
        })
        .collect();
    let readings = readings.map_err(CliError::from)?;
    Ok(readings
        .chunks(trials)
        .map(|chunk| {
            let mean = chunk.iter().sum::<f64>() / chunk.len() as f64;
            let var = if chunk.len() > 1 {
                chunk.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (chunk.len() - 1) as f64
            } else {
                0.0
            };
            McStat {
                mean_db: mean,
                std_db: var.sqrt(),
            }
        })
        .collect())
}

fn analytic_snr_db(system: &SystemConfig, port: DarkPort, angle: f64, rbw: f64) -> Result<f64> {
    Ok(detection::snr_at(system, port, angle, 1.0 / rbw)?.snr_db)
}

/// Spectra and SNR versus drive voltage (`sweep.points` in mV).
pub fn run_voltage_sweep(cfg: &ExperimentConfig, spec: &SweepSpec) -> Result<Table> {
    let rbw = realized_rbw(&cfg.trace).map_err(CliError::from)?;
    let mut table = Table::new(vec![
        "port",
        "voltage_mv",
        "angle_rad",
        "peak_snr_db_analytic",
        "peak_snr_db_mc",
        "mc_std_db",
    ]);

    let mut jobs = Vec::new();
    let mut rows_meta = Vec::new();
    for &port in &spec.ports {
        for (point_idx, &mv) in spec.points.iter().enumerate() {
            let angle = cfg.calibration.angle(port, mv * 1e-3);
            let freq = mod_freq(cfg, port);
            for trial in 0..spec.trials {
                jobs.push(McJob {
                    system: cfg.system.clone(),
                    port,
                    angle,
                    freq,
                    seed: derive_seed(
                        cfg.trace.seed,
                        &[kind_tag(spec.kind), port_tag(port), point_idx as u64, trial as u64],
                    ),
                });
            }
            rows_meta.push((port, mv, angle));
        }
    }
    let stats = run_jobs(cfg, jobs, spec.trials)?;

    for ((port, mv, angle), stat) in rows_meta.into_iter().zip(stats) {
        let analytic = analytic_snr_db(&cfg.system, port, angle, rbw)?;
        table.row(vec![
            port_label(port).to_string(),
            fmt_float(mv),
            fmt_float(angle),
            fmt_float(analytic),
            fmt_float(stat.mean_db),
            fmt_float(stat.std_db),
        ]);
    }
    Ok(table)
}

/// SNR versus post-selection probability (`sweep.points` as probabilities).
pub fn run_postselection_sweep(cfg: &ExperimentConfig, spec: &SweepSpec) -> Result<Table> {
    let rbw = realized_rbw(&cfg.trace).map_err(CliError::from)?;
    let mut table = Table::new(vec![
        "port",
        "probability",
        "phi_rad",
        "rel_snr_db_analytic",
        "peak_snr_db_analytic",
        "peak_snr_db_mc",
        "mc_std_db",
    ]);

    let mut jobs = Vec::new();
    let mut rows_meta = Vec::new();
    for &port in &spec.ports {
        let points = spec.points_for(port);
        let reference_p = points[0];
        for (point_idx, &p) in points.iter().enumerate() {
            let phi = phase_for_probability(p).map_err(CliError::from)?;
            let mut system = cfg.system.clone();
            match port {
                DarkPort::I => system.phi1 = phi,
                DarkPort::II => system.phi2 = phi,
            }
            let angle = drive_angle(cfg, port);
            let freq = mod_freq(cfg, port);
            for trial in 0..spec.trials {
                jobs.push(McJob {
                    system: system.clone(),
                    port,
                    angle,
                    freq,
                    seed: derive_seed(
                        cfg.trace.seed,
                        &[kind_tag(spec.kind), port_tag(port), point_idx as u64, trial as u64],
                    ),
                });
            }
            rows_meta.push((port, p, phi, reference_p, system));
        }
    }
    let stats = run_jobs(cfg, jobs, spec.trials)?;

    for ((port, p, phi, reference_p, system), stat) in rows_meta.into_iter().zip(stats) {
        let angle = drive_angle(cfg, port);
        let analytic = analytic_snr_db(&system, port, angle, rbw)?;
        // Fixed input and drive: the SNR scales as (1 - p).
        let rel = 10.0 * ((1.0 - p) / (1.0 - reference_p)).log10();
        table.row(vec![
            port_label(port).to_string(),
            fmt_float(p),
            fmt_float(phi),
            fmt_float(rel),
            fmt_float(analytic),
            fmt_float(stat.mean_db),
            fmt_float(stat.std_db),
        ]);
    }
    Ok(table)
}

/// SNR and minimum measurable angles versus input power (`sweep.points` in uW).
pub fn run_power_sweep(cfg: &ExperimentConfig, spec: &SweepSpec) -> Result<Table> {
    let rbw = realized_rbw(&cfg.trace).map_err(CliError::from)?;
    let mut table = Table::new(vec![
        "port",
        "input_power_uw",
        "peak_snr_db_analytic",
        "peak_snr_db_mc",
        "mc_std_db",
        "min_angle_rad",
        "min_displacement_pm",
    ]);

    let mut jobs = Vec::new();
    let mut rows_meta = Vec::new();
    for &port in &spec.ports {
        for (point_idx, &uw) in spec.points.iter().enumerate() {
            let mut system = cfg.system.clone();
            system.input_power = uw * 1e-6;
            let angle = drive_angle(cfg, port);
            let freq = mod_freq(cfg, port);
            for trial in 0..spec.trials {
                jobs.push(McJob {
                    system: system.clone(),
                    port,
                    angle,
                    freq,
                    seed: derive_seed(
                        cfg.trace.seed,
                        &[kind_tag(spec.kind), port_tag(port), point_idx as u64, trial as u64],
                    ),
                });
            }
            rows_meta.push((port, uw, system));
        }
    }
    let stats = run_jobs(cfg, jobs, spec.trials)?;

    for ((port, uw, system), stat) in rows_meta.into_iter().zip(stats) {
        let angle = drive_angle(cfg, port);
        let analytic = analytic_snr_db(&system, port, angle, rbw)?;
        // Instrument-limit columns at the configured resolution bandwidth.
        let budget = PhotonBudget::from_config(&system, 1.0 / cfg.trace.rbw)?;
        let limits = detection::min_angles(&system, &budget)?;
        let (min_angle, min_disp) = match port {
            DarkPort::I => (limits.yaw_min, limits.displacement_yaw),
            DarkPort::II => (limits.pitch_min, limits.displacement_pitch),
        };
        table.row(vec![
            port_label(port).to_string(),
            fmt_float(uw),
            fmt_float(analytic),
            fmt_float(stat.mean_db),
            fmt_float(stat.std_db),
            fmt_float(min_angle),
            fmt_float(min_disp / 1e-12),
        ]);
    }
    Ok(table)
}

/// Runs the sweep named by the configuration.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let spec = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("configuration defines no sweep section".into()))?;
    let mut table = match spec.kind {
        SweepKind::Voltage => run_voltage_sweep(cfg, &spec)?,
        SweepKind::Postselection => run_postselection_sweep(cfg, &spec)?,
        SweepKind::Power => run_power_sweep(cfg, &spec)?,
    };
    table.meta = standard_meta(cfg, &format!("sweep.{}", spec.kind.as_str()), "sweep");
    table.meta("sweep.point_unit", spec.kind.point_unit());
    table.meta(
        "realized_rbw_hz",
        realized_rbw(&cfg.trace).map_err(CliError::from)?,
    );
    table.meta(
        "note",
        "peak_snr_db_analytic is evaluated at the realized resolution bandwidth; \
         min-angle columns use the configured one",
    );
    Ok(table)
}

/// Sweep output file bytes for a given format.
pub fn sweep_file_contents(cfg: &ExperimentConfig, format: OutputFormat) -> Result<String> {
    let mut table = run_sweep(cfg)?;
    table.meta("run.format", format.as_str());
    Ok(table.render(format))
}

/// Minimum measurable angles for the configured operating point.
pub fn min_angle_table(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(vec![
        "port",
        "input_power_uw",
        "postselection_p",
        "integration_time_s",
        "min_angle_rad",
        "min_displacement_pm",
    ]);
    table.meta = standard_meta(cfg, "min-angle", "min-angle");
    let integration_time = 1.0 / cfg.trace.rbw;
    let budget = PhotonBudget::from_config(&cfg.system, integration_time)?;
    let limits = detection::min_angles(&cfg.system, &budget)?;
    for (port, p, angle, disp) in [
        (
            DarkPort::I,
            cfg.system.postselection_probability_yaw(),
            limits.yaw_min,
            limits.displacement_yaw,
        ),
        (
            DarkPort::II,
            cfg.system.postselection_probability_pitch(),
            limits.pitch_min,
            limits.displacement_pitch,
        ),
    ] {
        table.row(vec![
            port_label(port).to_string(),
            fmt_float(cfg.system.input_power / 1e-6),
            fmt_float(p),
            fmt_float(integration_time),
            fmt_float(angle),
            fmt_float(disp / 1e-12),
        ]);
    }
    Ok(table)
}

pub fn min_angle_contents(cfg: &ExperimentConfig, format: OutputFormat) -> Result<String> {
    let mut table = min_angle_table(cfg)?;
    table.meta("run.format", format.as_str());
    Ok(table.render(format))
}

/// Spectrum file bytes for one dark port at the configured drives.
///
/// Both axes are driven simultaneously, as on the bench; each port's trace
/// still draws from its own noise substream.
pub fn spectrum_file_contents(cfg: &ExperimentConfig, port: DarkPort) -> Result<String> {
    let drives = DriveSettings {
        yaw_amplitude_rad: cfg.calibration.yaw_angle(cfg.drive_yaw_v),
        pitch_amplitude_rad: cfg.calibration.pitch_angle(cfg.drive_pitch_v),
    };
    let (ps_i, ps_ii) = bench_spectra(&cfg.system, &drives, &cfg.trace)?;
    let ps = match port {
        DarkPort::I => ps_i,
        DarkPort::II => ps_ii,
    };

    let mut meta = standard_meta(cfg, "spectrum", "simulate-spectrum");
    meta.push(("run.port".to_string(), port_label(port).to_string()));
    let header: Vec<String> = meta.iter().map(|(k, v)| format!("{k} = {v}")).collect();

    let mut bytes = Vec::new();
    write_psd(&mut bytes, &ps, &header)
        .map_err(|e| CliError::io("rendering spectrum", e))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}
