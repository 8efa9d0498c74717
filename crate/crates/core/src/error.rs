//! Error type shared by all simulation modules.

use std::fmt;

/// Errors surfaced by the simulation library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The overlap between post- and pre-selection states is numerically
    /// zero, so the weak value and the dark-port amplification are undefined.
    ZeroOverlap,
    /// `|k·w0|` is outside the regime where the first-order mode expansion
    /// of the momentum kick is valid; callers should use the exact variant.
    FirstOrderRegime { k_waist: f64, limit: f64 },
    /// A pointer expansion was expected to be a pure fundamental mode.
    NotFundamental,
    /// The local-oscillator photon number must be positive to form a
    /// balanced difference signal.
    NonPositiveLo,
    /// Modulation frequency exceeds the Nyquist limit of the trace.
    Aliasing { mod_freq_hz: f64, nyquist_hz: f64 },
    /// The trace is too short to average the required number of segments
    /// at the requested resolution bandwidth.
    InsufficientData { segments: usize, required: usize },
    /// Requested frequency lies outside the spectrum's frequency grid.
    OutOfBand { freq_hz: f64, max_hz: f64 },
    /// Post-selection probability outside the open interval (0, 1).
    DegeneratePostselection { probability: f64 },
    /// Parameter validation failure; the message names the offending field.
    InvalidParameter(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroOverlap => {
                write!(f, "post-selection overlap is zero; weak value undefined")
            }
            Error::FirstOrderRegime { k_waist, limit } => write!(
                f,
                "|k*waist| = {k_waist:.3e} exceeds first-order kick limit {limit}"
            ),
            Error::NotFundamental => {
                write!(f, "pointer expansion is not a pure fundamental mode")
            }
            Error::NonPositiveLo => {
                write!(f, "local-oscillator photon number must be positive")
            }
            Error::Aliasing {
                mod_freq_hz,
                nyquist_hz,
            } => write!(
                f,
                "modulation at {mod_freq_hz} Hz exceeds Nyquist frequency {nyquist_hz} Hz"
            ),
            Error::InsufficientData { segments, required } => write!(
                f,
                "trace yields {segments} Welch segments, {required} required"
            ),
            Error::OutOfBand { freq_hz, max_hz } => {
                write!(f, "{freq_hz} Hz outside spectrum range [0, {max_hz}] Hz")
            }
            Error::DegeneratePostselection { probability } => write!(
                f,
                "post-selection probability {probability} outside (0, 1)"
            ),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
