use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dwva_cli::config::{preset, resolve, ExperimentConfig, RawConfig};
use dwva_cli::error::{CliError, Result};
use dwva_cli::sweep::{min_angle_contents, spectrum_file_contents, sweep_file_contents};
use dwva_cli::table::OutputFormat;
use dwva_cli::verify::verify_file;
use dwva_cli::Calibration;
use dwva_core::DarkPort;

/// Simulator of a two-axis beam-deflection metrology bench: cascaded
/// weak-value amplification stages with first-order-mode post-selection and
/// balanced homodyne readout.
#[derive(Parser)]
#[command(name = "dwva", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigSource {
    /// Configuration file (see README for the key schema).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset: baseline-50uw, postselection-scan or power-scan.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct Overrides {
    /// Override trace.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override sweep.trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Override trace.duration_s.
    #[arg(long)]
    duration_s: Option<f64>,
    /// Override any config key, e.g. --set system.input_power_uw=100.
    #[arg(long, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PortArg {
    I,
    Ii,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Records,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Records => OutputFormat::Records,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Voltage,
    Postselection,
    Power,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize dark-port spectra at the configured drives and write them
    /// as two-column text files.
    SimulateSpectrum {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        overrides: Overrides,
        /// Which dark port(s) to record.
        #[arg(long, value_enum, default_value = "both")]
        port: PortArg,
        /// Output path prefix; files are written as
        /// `<prefix>.port-<i|ii>.psd.txt`.
        #[arg(long, default_value = "dwva-spectrum")]
        out: PathBuf,
    },
    /// Run the configured sweep and emit its table.
    Sweep {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        overrides: Overrides,
        /// Override sweep.kind from the configuration.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the minimum measurable angles for the configured operating
    /// point.
    MinAngle {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive voltage-to-angle calibration slopes from anchor points.
    Calibrate {
        /// Yaw anchor voltage [mV].
        #[arg(long)]
        yaw_mv: f64,
        /// Yaw angle measured at that voltage [nrad].
        #[arg(long)]
        yaw_nrad: f64,
        /// Pitch anchor voltage [mV].
        #[arg(long)]
        pitch_mv: f64,
        /// Pitch angle measured at that voltage [nrad].
        #[arg(long)]
        pitch_nrad: f64,
    },
    /// Re-run the experiment embedded in an output file and confirm the
    /// bytes reproduce.
    Verify { file: PathBuf },
}

fn load_raw(source: &ConfigSource, overrides: &Overrides) -> Result<RawConfig> {
    let mut raw = match (&source.config, &source.preset) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "pass either --config or --preset, not both".into(),
            ))
        }
        (Some(path), None) => RawConfig::from_file(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => preset("baseline-50uw")?,
    };
    if let Some(seed) = overrides.seed {
        raw.set("trace.seed", &seed.to_string())?;
    }
    if let Some(trials) = overrides.trials {
        raw.set("sweep.trials", &trials.to_string())?;
    }
    if let Some(duration) = overrides.duration_s {
        raw.set("trace.duration_s", &duration.to_string())?;
    }
    for pair in &overrides.set {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            CliError::Config(format!("--set expects KEY=VALUE, got '{pair}'"))
        })?;
        raw.set(key.trim(), value.trim())?;
    }
    Ok(raw)
}

fn load(source: &ConfigSource, overrides: &Overrides) -> Result<ExperimentConfig> {
    resolve(&load_raw(source, overrides)?)
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_output(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::SimulateSpectrum {
            source,
            overrides,
            port,
            out,
        } => {
            let cfg = load(&source, &overrides)?;
            let ports: &[DarkPort] = match port {
                PortArg::I => &[DarkPort::I],
                PortArg::Ii => &[DarkPort::II],
                PortArg::Both => &[DarkPort::I, DarkPort::II],
            };
            for &p in ports {
                let contents = spectrum_file_contents(&cfg, p)?;
                let label = match p {
                    DarkPort::I => "i",
                    DarkPort::II => "ii",
                };
                let path = PathBuf::from(format!("{}.port-{label}.psd.txt", out.display()));
                write_output(&path, &contents)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Sweep {
            source,
            overrides,
            kind,
            format,
            out,
        } => {
            let mut raw = load_raw(&source, &overrides)?;
            if let Some(kind) = kind {
                let kind = match kind {
                    KindArg::Voltage => "voltage",
                    KindArg::Postselection => "postselection",
                    KindArg::Power => "power",
                };
                raw.set("sweep.kind", kind)?;
            }
            let cfg = resolve(&raw)?;
            let contents = sweep_file_contents(&cfg, format.into())?;
            emit(&out, &contents)
        }
        Command::MinAngle {
            source,
            overrides,
            format,
            out,
        } => {
            let cfg = load(&source, &overrides)?;
            let contents = min_angle_contents(&cfg, format.into())?;
            emit(&out, &contents)
        }
        Command::Calibrate {
            yaw_mv,
            yaw_nrad,
            pitch_mv,
            pitch_nrad,
        } => {
            let cal = Calibration::from_anchors(
                yaw_mv * 1e-3,
                yaw_nrad * 1e-9,
                pitch_mv * 1e-3,
                pitch_nrad * 1e-9,
            )?;
            // rad/V to nrad/mV is a factor 1e6; lines paste into a config.
            println!(
                "calibration.yaw_slope_nrad_per_mv = {}",
                cal.yaw_slope_rad_per_v() * 1e6
            );
            println!(
                "calibration.pitch_slope_nrad_per_mv = {}",
                cal.pitch_slope_rad_per_v() * 1e6
            );
            Ok(())
        }
        Command::Verify { file } => {
            verify_file(&file)?;
            println!("ok: {} reproduces from its embedded configuration", file.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("dwva: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
