//! Dark-port output states of the cascaded two-stage amplification chain.
//!
//! Stage one is the ring interferometer: the yaw kick interferes into the
//! first-order horizontal mode at its dark port. The bright-port beam passes
//! an image rotator (which relabels the vertical first-order lobe as
//! horizontal) and a lossy link into the two-arm interferometer, whose dark
//! port carries the pitch signal. Each dark-port pointer is stored with its
//! signal mode amplified by `1/sqrt(p)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hg_pointer::{Axis, BeamGeometry, Deflection, PointerExpansion};
use crate::selection_states::{
    composite_selection, postselection_probability, sagnac_postselection, sagnac_preselection,
    weak_value, SagnacPort, WeakInteraction, WeakValue,
};

/// All physical parameters of the bench.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub geom: BeamGeometry,
    /// Ring-interferometer relative phase [rad]; sets the yaw post-selection.
    pub phi1: f64,
    /// Two-arm relative phase [rad]; sets the pitch post-selection.
    pub phi2: f64,
    /// Pure optical transmission between the interferometers, in (0, 1].
    /// The effective inter-stage efficiency seen by the pitch channel also
    /// includes the ring bright-port factor; see [`SystemConfig::effective_eta`].
    pub eta_opt: f64,
    /// Input power into the first stage [W].
    pub input_power: f64,
    /// Local-oscillator power at each balanced detector [W].
    pub lo_power: f64,
    /// Distance between actuator pivot points [m]; sets the
    /// angle-to-displacement conversion `d = l sin(angle) / 2`.
    pub lever_arm: f64,
    /// Yaw drive frequency [Hz].
    pub mod_freq_yaw: f64,
    /// Pitch drive frequency [Hz].
    pub mod_freq_pitch: f64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("phi1", self.phi1),
            ("phi2", self.phi2),
            ("eta_opt", self.eta_opt),
            ("input_power", self.input_power),
            ("lo_power", self.lo_power),
            ("lever_arm", self.lever_arm),
            ("mod_freq_yaw", self.mod_freq_yaw),
            ("mod_freq_pitch", self.mod_freq_pitch),
        ];
        for (name, value) in positive {
            if value <= 0.0 || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.eta_opt > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "eta_opt must be <= 1, got {}",
                self.eta_opt
            )));
        }
        if self.phi1 >= 2.0 * std::f64::consts::PI || self.phi2 >= 2.0 * std::f64::consts::PI {
            return Err(Error::InvalidParameter(
                "interferometer phases must lie in (0, 2 pi)".into(),
            ));
        }
        Ok(())
    }

    /// Dark-port post-selection probability of the yaw stage, `sin^2(phi1/2)`.
    pub fn postselection_probability_yaw(&self) -> f64 {
        (self.phi1 / 2.0).sin().powi(2)
    }

    /// Local post-selection probability of the pitch stage, `sin^2(phi2/2)`.
    pub fn postselection_probability_pitch(&self) -> f64 {
        (self.phi2 / 2.0).sin().powi(2)
    }

    /// Effective inter-stage efficiency: optical transmission times the
    /// ring bright-port fraction `cos^2(phi1/2)`. This is the single number
    /// that divides the pitch-stage power bookkeeping.
    pub fn effective_eta(&self) -> f64 {
        self.eta_opt * (self.phi1 / 2.0).cos().powi(2)
    }
}

/// Which dark port a state came out of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DarkPort {
    I,
    II,
}

/// Post-selected pointer state at a dark port.
///
/// The stored first-order coefficient is `-i w0 A_w k / sqrt(p)`, i.e. the
/// amplified signal mode; probabilities and weak values ride alongside so
/// detection can reconstruct unamplified quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkPortState {
    pub port: DarkPort,
    pub pointer: PointerExpansion,
    pub postselection_probability: f64,
    pub weak_value: WeakValue,
}

impl DarkPortState {
    /// `w0 |A_w| k`, the detected signal-mode weight with the post-selection
    /// amplification removed; equals `|c1| sqrt(p)`.
    pub fn signal_mode_weight(&self) -> f64 {
        self.pointer.coefficient(1).norm() * self.postselection_probability.sqrt()
    }
}

fn check_phase(phi: f64, name: &str) -> Result<()> {
    if !phi.is_finite() || phi <= 0.0 || phi >= 2.0 * std::f64::consts::PI {
        if phi == 0.0 {
            return Err(Error::ZeroOverlap);
        }
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, 2 pi), got {phi}"
        )));
    }
    Ok(())
}

fn amplified_pointer(
    axis: Axis,
    geom: BeamGeometry,
    interaction: &WeakInteraction,
    weak_value: Complex64,
    k: f64,
    probability: f64,
) -> Result<PointerExpansion> {
    let k_waist = k * geom.waist();
    if k_waist.abs() > crate::hg_pointer::FIRST_ORDER_KICK_LIMIT {
        return Err(Error::FirstOrderRegime {
            k_waist: k_waist.abs(),
            limit: crate::hg_pointer::FIRST_ORDER_KICK_LIMIT,
        });
    }
    let c1 =
        -Complex64::i() * interaction.coupling * weak_value * k_waist / probability.sqrt();
    PointerExpansion::from_coefficients(axis, vec![Complex64::new(1.0, 0.0), c1], geom)
}

/// Output state at the yaw dark port.
pub fn dark_port_i(cfg: &SystemConfig, d: &Deflection) -> Result<DarkPortState> {
    check_phase(cfg.phi1, "phi1")?;
    let pre = sagnac_preselection(cfg.phi1);
    let post = sagnac_postselection(SagnacPort::Dark);
    let probability = postselection_probability(&pre, &post)?;
    if probability < crate::selection_states::OVERLAP_EPSILON {
        return Err(Error::ZeroOverlap);
    }
    let interaction = WeakInteraction::unit(crate::selection_states::yaw_operator());
    let aw = weak_value(&interaction.operator, &pre, &post)?;
    let pointer = amplified_pointer(
        Axis::Horizontal,
        cfg.geom,
        &interaction,
        aw.value(),
        d.kx(),
        probability,
    )?;
    Ok(DarkPortState {
        port: DarkPort::I,
        pointer,
        postselection_probability: probability,
        weak_value: aw,
    })
}

/// Output state at the pitch dark port.
///
/// The pitch kick excites the vertical first-order mode; the image rotator
/// between the stages relabels it horizontal, so only the axis tag changes.
/// The stored probability is the local `sin^2(phi2/2)` of the second stage.
pub fn dark_port_ii(cfg: &SystemConfig, d: &Deflection) -> Result<DarkPortState> {
    check_phase(cfg.phi2, "phi2")?;
    let sel = composite_selection(cfg.phi1, cfg.phi2);
    let interaction = WeakInteraction::unit(sel.op);
    let aw = weak_value(&interaction.operator, &sel.pre, &sel.post)?;
    let probability = cfg.postselection_probability_pitch();
    if probability < crate::selection_states::OVERLAP_EPSILON {
        return Err(Error::ZeroOverlap);
    }
    let pointer = amplified_pointer(
        Axis::Vertical,
        cfg.geom,
        &interaction,
        aw.value(),
        d.ky(),
        probability,
    )?
    .with_axis(Axis::Horizontal);
    Ok(DarkPortState {
        port: DarkPort::II,
        pointer,
        postselection_probability: probability,
        weak_value: aw,
    })
}

/// Builds the dark-port state for either port from the same deflection.
pub fn dark_port(cfg: &SystemConfig, d: &Deflection, port: DarkPort) -> Result<DarkPortState> {
    match port {
        DarkPort::I => dark_port_i(cfg, d),
        DarkPort::II => dark_port_ii(cfg, d),
    }
}

/// Optical powers through the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagePowers {
    /// Power out of the yaw dark port [W].
    pub dark_i: f64,
    /// Power out of the ring bright port, before the inter-stage loss [W].
    pub bright_i: f64,
    /// Power entering the two-arm interferometer [W].
    pub to_umz: f64,
    /// Power out of the pitch dark port [W].
    pub dark_ii: f64,
}

/// Power bookkeeping through both stages.
///
/// The first stage splits the input losslessly (`dark_i + bright_i` is the
/// input power by construction); the optical loss sits entirely on the link
/// into the second stage.
pub fn stage_power_budget(cfg: &SystemConfig) -> StagePowers {
    let p1 = cfg.postselection_probability_yaw();
    let dark_i = cfg.input_power * p1;
    let bright_i = cfg.input_power - dark_i;
    let to_umz = bright_i * cfg.eta_opt;
    let dark_ii = to_umz * cfg.postselection_probability_pitch();
    StagePowers {
        dark_i,
        bright_i,
        to_umz,
        dark_ii,
    }
}
