//! Monte-Carlo synthesis of balanced-detector difference traces and Welch
//! power-spectrum estimation.
//!
//! Traces are normalized to the local oscillator: the shot noise is a unit
//! variance white Gaussian per sample, and a sinusoidal drive appears as a
//! tone whose amplitude is calibrated so that the one-sided PSD's
//! tone-to-floor ratio equals the analytic detection SNR at an integration
//! time of one over the resolution bandwidth. Spectra therefore read like a
//! spectrum analyzer: the peak reports the tone power, the floor reports the
//! shot-noise power per resolution bandwidth.
//!
//! The reported resolution bandwidth is the equivalent noise bandwidth of
//! the windowed estimator, which for a Hann window is wider than the bin
//! spacing; every consumer that compares against analytic SNR must use the
//! realized value from the spectrum, not the requested one.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::detection::PhotonBudget;
use crate::error::{Error, Result};
use crate::hg_pointer::Deflection;
use crate::wva_pipeline::{dark_port, DarkPort, DarkPortState, SystemConfig};

/// Minimum number of averaged segments for a usable Welch estimate.
pub const MIN_SEGMENTS: usize = 8;

/// Peaks must clear the floor by this much to be catalogued.
const PEAK_THRESHOLD_DB: f64 = 6.0;

/// Linear power floor guard against `log10(0)`.
const PSD_MIN: f64 = 1e-30;

/// Spectral window applied to Welch segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowKind {
    Hann,
    Rectangular,
}

impl WindowKind {
    fn coefficient(self, i: usize, n: usize) -> f64 {
        match self {
            WindowKind::Rectangular => 1.0,
            WindowKind::Hann => {
                0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
            }
        }
    }
}

/// Sampling and analysis settings for a synthesized trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig {
    pub sample_rate: f64,
    pub duration: f64,
    /// Requested resolution bandwidth [Hz]; the estimator reports what it
    /// actually realized.
    pub rbw: f64,
    pub seed: u64,
    pub window: WindowKind,
}

impl TraceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("sample_rate", self.sample_rate),
            ("duration", self.duration),
            ("rbw", self.rbw),
        ] {
            if value <= 0.0 || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.duration * self.rbw < 4.0 {
            return Err(Error::InvalidParameter(format!(
                "duration {} s too short for rbw {} Hz (need duration >= 4/rbw)",
                self.duration, self.rbw
            )));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        (self.sample_rate * self.duration).round() as usize
    }

    /// Returns a copy with a different seed.
    pub fn with_seed(&self, seed: u64) -> TraceConfig {
        TraceConfig {
            seed,
            ..self.clone()
        }
    }

    fn segment_len(&self) -> Result<usize> {
        let mut nfft = (self.sample_rate / self.rbw).round() as usize;
        if nfft % 2 == 1 {
            nfft += 1;
        }
        if nfft < 16 {
            return Err(Error::InvalidParameter(format!(
                "sample_rate/rbw = {} gives segments shorter than 16 samples",
                self.sample_rate / self.rbw
            )));
        }
        Ok(nfft)
    }
}

/// Equivalent noise bandwidth the Welch estimator will realize for `tc`,
/// without synthesizing anything.
pub fn realized_rbw(tc: &TraceConfig) -> Result<f64> {
    tc.validate()?;
    let nfft = tc.segment_len()?;
    let (sum_w, sum_w2) = window_sums(tc.window, nfft);
    Ok(tc.sample_rate * sum_w2 / (sum_w * sum_w))
}

fn window_sums(window: WindowKind, nfft: usize) -> (f64, f64) {
    let mut sum_w = 0.0;
    let mut sum_w2 = 0.0;
    for i in 0..nfft {
        let w = window.coefficient(i, nfft);
        sum_w += w;
        sum_w2 += w * w;
    }
    (sum_w, sum_w2)
}

/// A sampled difference-signal record in local-oscillator-normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

/// A catalogued spectral peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub freq_hz: f64,
    pub snr_db: f64,
}

/// One-sided power spectrum, in dB of power per resolution bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    /// Ascending frequency grid from DC to Nyquist [Hz].
    pub freqs: Vec<f64>,
    /// Power per resolution bandwidth [dB].
    pub psd_db: Vec<f64>,
    /// Realized resolution bandwidth (equivalent noise bandwidth) [Hz].
    pub rbw: f64,
    pub sample_rate: f64,
    /// Median off-peak level [dB].
    pub floor_db: f64,
    /// Local maxima at least 6 dB above the floor.
    pub peaks: Vec<SpectralPeak>,
}

impl PowerSpectrum {
    /// Analytic shot-noise level for a unit-variance trace, in the same dB
    /// units as `psd_db`.
    pub fn shot_reference_db(&self) -> f64 {
        10.0 * (2.0 * self.rbw / self.sample_rate).log10()
    }

    pub fn nearest_bin(&self, freq_hz: f64) -> Result<usize> {
        let max_hz = *self.freqs.last().expect("non-empty spectrum");
        if !(0.0..=max_hz).contains(&freq_hz) {
            return Err(Error::OutOfBand { freq_hz, max_hz });
        }
        let df = self.freqs[1] - self.freqs[0];
        Ok(((freq_hz / df).round() as usize).min(self.freqs.len() - 1))
    }

    /// Nearest-bin reading minus the floor [dB]. No interpolation.
    pub fn peak_snr_db(&self, at_hz: f64) -> Result<f64> {
        let bin = self.nearest_bin(at_hz)?;
        Ok(self.psd_db[bin] - self.floor_db)
    }
}

/// Nearest-bin peak SNR readout; see [`PowerSpectrum::peak_snr_db`].
pub fn peak_snr_db(ps: &PowerSpectrum, at_hz: f64) -> Result<f64> {
    ps.peak_snr_db(at_hz)
}

/// Expected nearest-bin reading for a tone of the given analytic SNR: the
/// tone bin also holds one resolution bandwidth of shot noise, so the
/// reading converges to `10 log10(snr_linear + 1)`, not to the SNR itself.
pub fn expected_peak_reading_db(snr_db: f64) -> f64 {
    10.0 * (10f64.powf(snr_db / 10.0) + 1.0).log10()
}

/// Splitmix-style mix of a base seed with a stream of context words; used
/// to give every port, sweep point and trial its own documented substream.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    let mut z = base;
    for &w in words {
        z ^= w.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Synthesizes the balanced difference trace for a sinusoidal drive.
///
/// Sample `i` is `a sin(2 pi f t_i) + n_i` with `n_i` i.i.d. standard
/// normal shot noise from a counter-based generator seeded by `tc.seed`.
/// The tone amplitude is `a = 4 |A_w| k w0 sqrt(rate / fs)` with `rate` the
/// dark-port photon rate, which makes the PSD tone-to-floor ratio equal the
/// analytic SNR at integration time `1/rbw` for any window and any
/// realized bandwidth.
pub fn synthesize_trace(
    state: &DarkPortState,
    budget: &PhotonBudget,
    mod_freq: f64,
    angle_amplitude: f64,
    tc: &TraceConfig,
) -> Result<TimeTrace> {
    tc.validate()?;
    let nyquist = tc.sample_rate / 2.0;
    if mod_freq > nyquist {
        return Err(Error::Aliasing {
            mod_freq_hz: mod_freq,
            nyquist_hz: nyquist,
        });
    }
    let geom = state.pointer.geometry();
    let k = geom.transverse_wavenumber(angle_amplitude);
    let k_waist = k * geom.waist();
    if k_waist.abs() > crate::hg_pointer::FIRST_ORDER_KICK_LIMIT {
        return Err(Error::FirstOrderRegime {
            k_waist: k_waist.abs(),
            limit: crate::hg_pointer::FIRST_ORDER_KICK_LIMIT,
        });
    }

    let rate = budget.port_rate(state.port);
    let amplitude =
        4.0 * state.weak_value.magnitude() * k_waist.abs() * (rate / tc.sample_rate).sqrt();

    let n = tc.num_samples();
    let omega = 2.0 * std::f64::consts::PI * mod_freq / tc.sample_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let noise: f64 = StandardNormal.sample(&mut rng);
        samples.push(amplitude * (omega * i as f64).sin() + noise);
    }
    Ok(TimeTrace {
        samples,
        sample_rate: tc.sample_rate,
    })
}

/// Welch PSD of a trace: mean of 50%-overlapped windowed periodograms.
///
/// The segment length is `sample_rate / rbw` rounded to an even integer, so
/// drives at multiples of the requested bandwidth land on bin centers. Tone
/// powers are exact (coherent-gain normalization); the realized resolution
/// bandwidth reported back is the window's equivalent noise bandwidth.
pub fn welch_psd(trace: &TimeTrace, tc: &TraceConfig) -> Result<PowerSpectrum> {
    tc.validate()?;
    let nfft = tc.segment_len()?;
    let hop = nfft / 2;
    if trace.samples.len() < nfft {
        return Err(Error::InsufficientData {
            segments: 0,
            required: MIN_SEGMENTS,
        });
    }
    let segments = (trace.samples.len() - nfft) / hop + 1;
    if segments < MIN_SEGMENTS {
        return Err(Error::InsufficientData {
            segments,
            required: MIN_SEGMENTS,
        });
    }

    let window: Vec<f64> = (0..nfft).map(|i| tc.window.coefficient(i, nfft)).collect();
    let (sum_w, sum_w2) = window_sums(tc.window, nfft);

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(nfft);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    let half = nfft / 2;
    let mut accum = vec![0.0f64; half + 1];
    for seg in 0..segments {
        let start = seg * hop;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex64::new(trace.samples[start + i] * window[i], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (k, acc) in accum.iter_mut().enumerate() {
            *acc += buf[k].norm_sqr();
        }
    }

    // Coherent-gain normalization: a bin-centered sinusoid of amplitude A
    // reads A^2/2 after the one-sided doubling.
    let norm = 1.0 / (sum_w * sum_w * segments as f64);
    let psd_db: Vec<f64> = accum
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || k == half { 1.0 } else { 2.0 };
            10.0 * (one_sided * p * norm).max(PSD_MIN).log10()
        })
        .collect();

    let df = trace.sample_rate / nfft as f64;
    let freqs: Vec<f64> = (0..=half).map(|k| k as f64 * df).collect();
    let rbw = trace.sample_rate * sum_w2 / (sum_w * sum_w);

    // Provisional floor over the non-DC bins, peaks, then the off-peak floor.
    let provisional = median(&psd_db[1..]);
    let peaks = find_peaks(&freqs, &psd_db, provisional);
    let floor_db = off_peak_floor(&freqs, &psd_db, &peaks, df).unwrap_or(provisional);
    let peaks = peaks
        .into_iter()
        .map(|p| SpectralPeak {
            freq_hz: p.freq_hz,
            snr_db: p.snr_db + provisional - floor_db,
        })
        .collect();

    Ok(PowerSpectrum {
        freqs,
        psd_db,
        rbw,
        sample_rate: trace.sample_rate,
        floor_db,
        peaks,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in psd"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    }
}

fn find_peaks(freqs: &[f64], psd_db: &[f64], floor_db: f64) -> Vec<SpectralPeak> {
    let mut candidates: Vec<usize> = (1..psd_db.len().saturating_sub(1))
        .filter(|&k| {
            psd_db[k] - floor_db >= PEAK_THRESHOLD_DB
                && psd_db[k] >= psd_db[k - 1]
                && psd_db[k] >= psd_db[k + 1]
        })
        .collect();
    candidates.sort_by(|&a, &b| psd_db[b].partial_cmp(&psd_db[a]).expect("no NaN"));
    let mut accepted: Vec<usize> = Vec::new();
    for k in candidates {
        if accepted.iter().all(|&a| k.abs_diff(a) > 5) {
            accepted.push(k);
        }
    }
    accepted.sort_unstable();
    accepted
        .into_iter()
        .map(|k| SpectralPeak {
            freq_hz: freqs[k],
            snr_db: psd_db[k] - floor_db,
        })
        .collect()
}

fn off_peak_floor(
    freqs: &[f64],
    psd_db: &[f64],
    peaks: &[SpectralPeak],
    df: f64,
) -> Option<f64> {
    let guard = 4.0 * df;
    let kept: Vec<f64> = freqs
        .iter()
        .zip(psd_db)
        .skip(1)
        .filter(|(f, _)| peaks.iter().all(|p| (**f - p.freq_hz).abs() > guard))
        .map(|(_, &p)| p)
        .collect();
    if kept.is_empty() {
        None
    } else {
        Some(median(&kept))
    }
}

/// Drive amplitudes applied to the actuator for one bench run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSettings {
    pub yaw_amplitude_rad: f64,
    pub pitch_amplitude_rad: f64,
}

/// Per-port seed substreams: the detectors are independent instruments.
fn port_stream(port: DarkPort) -> u64 {
    match port {
        DarkPort::I => 1,
        DarkPort::II => 2,
    }
}

/// Synthesizes and analyzes one dark port driven at one frequency.
///
/// The port trace draws from a per-port substream of `tc.seed`, so the same
/// port sees the same noise whether or not the other axis is driven.
pub fn port_spectrum(
    cfg: &SystemConfig,
    port: DarkPort,
    angle_amplitude: f64,
    mod_freq: f64,
    tc: &TraceConfig,
) -> Result<PowerSpectrum> {
    let d = match port {
        DarkPort::I => Deflection::new(angle_amplitude, 0.0, &cfg.geom),
        DarkPort::II => Deflection::new(0.0, angle_amplitude, &cfg.geom),
    };
    let state = dark_port(cfg, &d, port)?;
    let budget = PhotonBudget::from_config(cfg, 1.0 / tc.rbw)?;
    let port_tc = tc.with_seed(derive_seed(tc.seed, &[port_stream(port)]));
    let trace = synthesize_trace(&state, &budget, mod_freq, angle_amplitude, &port_tc)?;
    welch_psd(&trace, &port_tc)
}

/// One full bench run: both axes driven simultaneously at their own
/// frequencies, both dark ports recorded and analyzed.
pub fn bench_spectra(
    cfg: &SystemConfig,
    drives: &DriveSettings,
    tc: &TraceConfig,
) -> Result<(PowerSpectrum, PowerSpectrum)> {
    let d = Deflection::new(drives.yaw_amplitude_rad, drives.pitch_amplitude_rad, &cfg.geom);
    let budget = PhotonBudget::from_config(cfg, 1.0 / tc.rbw)?;

    let state_i = dark_port(cfg, &d, DarkPort::I)?;
    let tc_i = tc.with_seed(derive_seed(tc.seed, &[port_stream(DarkPort::I)]));
    let trace_i = synthesize_trace(
        &state_i,
        &budget,
        cfg.mod_freq_yaw,
        drives.yaw_amplitude_rad,
        &tc_i,
    )?;

    let state_ii = dark_port(cfg, &d, DarkPort::II)?;
    let tc_ii = tc.with_seed(derive_seed(tc.seed, &[port_stream(DarkPort::II)]));
    let trace_ii = synthesize_trace(
        &state_ii,
        &budget,
        cfg.mod_freq_pitch,
        drives.pitch_amplitude_rad,
        &tc_ii,
    )?;

    Ok((welch_psd(&trace_i, &tc_i)?, welch_psd(&trace_ii, &tc_ii)?))
}

/// Writes a spectrum as two-column text `(frequency_hz, psd_db)` with
/// `#`-prefixed header lines echoing the full configuration.
pub fn write_psd<W: std::io::Write>(
    out: &mut W,
    ps: &PowerSpectrum,
    header: &[String],
) -> std::io::Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# realized_rbw_hz = {}", ps.rbw)?;
    writeln!(out, "# floor_db = {:.6}", ps.floor_db)?;
    for peak in &ps.peaks {
        writeln!(
            out,
            "# peak: freq_hz = {} snr_db = {:.3}",
            peak.freq_hz, peak.snr_db
        )?;
    }
    writeln!(out, "# columns: frequency_hz psd_db")?;
    for (f, p) in ps.freqs.iter().zip(&ps.psd_db) {
        writeln!(out, "{f:.6e} {p:.6e}")?;
    }
    Ok(())
}
