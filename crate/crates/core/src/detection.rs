//! Balanced homodyne detection: difference signal, shot-noise-limited SNR,
//! and minimum resolvable angles.
//!
//! The difference photocurrent between the two detectors, normalized to the
//! local-oscillator amplitude, has mean `2 sqrt(N_port) |A_w| k w0` and unit
//! quadrature noise for coherent light. All photon numbers are counted over
//! one integration time (the reciprocal of the spectral resolution
//! bandwidth unless overridden).

use crate::error::{Error, Result};
use crate::wva_pipeline::{DarkPort, DarkPortState, SystemConfig};

/// Planck constant times the speed of light [J m].
pub const PLANCK_TIMES_C: f64 = 1.98644586e-25;

/// Photon count collected from `power` over `integration_time`:
/// `N = P T lambda / (h c)`.
pub fn photons_from_power(power_w: f64, wavelength_m: f64, integration_time_s: f64) -> f64 {
    power_w * integration_time_s * wavelength_m / PLANCK_TIMES_C
}

/// Photon numbers at every tap of the bench for one integration time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBudget {
    pub photons_in: f64,
    pub photons_lo: f64,
    pub photons_dark_i: f64,
    pub photons_dark_ii: f64,
    pub integration_time: f64,
}

impl PhotonBudget {
    /// Builds the budget from the bench configuration.
    ///
    /// Dark-port counts follow the post-selection probabilities, with the
    /// pitch channel additionally attenuated by the effective inter-stage
    /// efficiency.
    pub fn from_config(cfg: &SystemConfig, integration_time: f64) -> Result<Self> {
        if integration_time <= 0.0 || !integration_time.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "integration_time must be positive, got {integration_time}"
            )));
        }
        cfg.validate()?;
        let lambda = cfg.geom.wavelength();
        let photons_in = photons_from_power(cfg.input_power, lambda, integration_time);
        let photons_lo = photons_from_power(cfg.lo_power, lambda, integration_time);
        Ok(Self {
            photons_in,
            photons_lo,
            photons_dark_i: photons_in * cfg.postselection_probability_yaw(),
            photons_dark_ii: photons_in
                * cfg.effective_eta()
                * cfg.postselection_probability_pitch(),
            integration_time,
        })
    }

    pub fn photons_at(&self, port: DarkPort) -> f64 {
        match port {
            DarkPort::I => self.photons_dark_i,
            DarkPort::II => self.photons_dark_ii,
        }
    }

    /// Photon arrival rate at a dark port [1/s].
    pub fn port_rate(&self, port: DarkPort) -> f64 {
        self.photons_at(port) / self.integration_time
    }
}

/// Mean, noise and SNR of one balanced measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    /// Mean difference count [sqrt(photons) * sqrt(photons)].
    pub signal_mean: f64,
    /// Shot-noise standard deviation of the difference count.
    pub noise_std: f64,
    pub snr_linear: f64,
    /// `10 log10(snr_linear)`; negative infinity at zero signal.
    pub snr_db: f64,
}

fn detection_result(n_lo: f64, n_port: f64, mode_weight: f64) -> DetectionResult {
    let signal_mean = 2.0 * (n_lo * n_port).sqrt() * mode_weight;
    let noise_std = n_lo.sqrt();
    let snr_linear = 4.0 * n_port * mode_weight * mode_weight;
    DetectionResult {
        signal_mean,
        noise_std,
        snr_linear,
        snr_db: 10.0 * snr_linear.log10(),
    }
}

/// Difference count between the two detectors for a dark-port state.
///
/// `signal_mean = sqrt(N_lo) * 2 sqrt(N_port) |A_w| k w0`, with unit
/// quadrature noise scaled by `sqrt(N_lo)`.
pub fn photon_number_difference(
    state: &DarkPortState,
    budget: &PhotonBudget,
) -> Result<DetectionResult> {
    if budget.photons_lo <= 0.0 || budget.photons_lo.is_nan() {
        return Err(Error::NonPositiveLo);
    }
    Ok(detection_result(
        budget.photons_lo,
        budget.photons_at(state.port),
        state.signal_mode_weight(),
    ))
}

/// Shot-noise-limited SNR: `(2 sqrt(N_port) |A_w| k w0)^2`.
///
/// The local-oscillator count cancels between signal and noise, so the SNR
/// fields are meaningful even for a zero-power local oscillator.
pub fn snr(state: &DarkPortState, budget: &PhotonBudget) -> DetectionResult {
    detection_result(
        budget.photons_lo,
        budget.photons_at(state.port),
        state.signal_mode_weight(),
    )
}

/// Analytic detection result for one port at one drive angle: builds the
/// deflection on the port's axis, the dark-port state and the photon budget
/// for the given integration time, then evaluates [`snr`].
pub fn snr_at(
    cfg: &SystemConfig,
    port: DarkPort,
    angle_amplitude: f64,
    integration_time: f64,
) -> Result<DetectionResult> {
    let d = match port {
        DarkPort::I => crate::hg_pointer::Deflection::new(angle_amplitude, 0.0, &cfg.geom),
        DarkPort::II => crate::hg_pointer::Deflection::new(0.0, angle_amplitude, &cfg.geom),
    };
    let state = crate::wva_pipeline::dark_port(cfg, &d, port)?;
    let budget = PhotonBudget::from_config(cfg, integration_time)?;
    Ok(snr(&state, &budget))
}

/// Minimum resolvable angles and their displacement equivalents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinAngleResult {
    pub yaw_min: f64,
    pub pitch_min: f64,
    pub displacement_yaw: f64,
    pub displacement_pitch: f64,
}

/// Smallest angles with unit SNR:
///
/// ```text
/// yaw_min   = lambda / (4 pi w0 sqrt(N_in)       cos(phi1/2))
/// pitch_min = lambda / (4 pi w0 sqrt(N_in * eta) cos(phi2/2))
/// ```
///
/// using the small-angle form of the wavenumber, as everywhere the closed
/// form is quoted; displacements use the exact lever-arm relation.
pub fn min_angles(cfg: &SystemConfig, budget: &PhotonBudget) -> Result<MinAngleResult> {
    if budget.photons_in <= 0.0 || budget.photons_in.is_nan() {
        return Err(Error::InvalidParameter(
            "photons_in must be positive for a minimum-angle estimate".into(),
        ));
    }
    let lambda = cfg.geom.wavelength();
    let w0 = cfg.geom.waist();
    let four_pi = 4.0 * std::f64::consts::PI;
    let yaw_min = lambda / (four_pi * w0 * budget.photons_in.sqrt() * (cfg.phi1 / 2.0).cos());
    let pitch_min = lambda
        / (four_pi
            * w0
            * (budget.photons_in * cfg.effective_eta()).sqrt()
            * (cfg.phi2 / 2.0).cos());
    Ok(MinAngleResult {
        yaw_min,
        pitch_min,
        displacement_yaw: angle_to_displacement(yaw_min, cfg.lever_arm),
        displacement_pitch: angle_to_displacement(pitch_min, cfg.lever_arm),
    })
}

/// Mirror-tilt geometry: `d = l sin(angle) / 2`, no small-angle shortcut.
pub fn angle_to_displacement(angle_rad: f64, lever_arm_m: f64) -> f64 {
    lever_arm_m * angle_rad.sin() / 2.0
}

/// Inverse of [`angle_to_displacement`].
pub fn displacement_to_angle(displacement_m: f64, lever_arm_m: f64) -> f64 {
    (2.0 * displacement_m / lever_arm_m).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hg_pointer::{BeamGeometry, Deflection};
    use crate::selection_states::phase_for_probability;
    use crate::wva_pipeline::{dark_port_i, dark_port_ii};
    use proptest::prelude::*;

    const UW: f64 = 1e-6;
    const MW: f64 = 1e-3;
    const MM: f64 = 1e-3;
    const NM: f64 = 1e-9;
    const PM: f64 = 1e-12;

    fn config() -> SystemConfig {
        SystemConfig {
            geom: BeamGeometry::new(1.0 * MM, 1064.0 * NM).unwrap(),
            phi1: phase_for_probability(0.13).unwrap(),
            phi2: phase_for_probability(0.20).unwrap(),
            eta_opt: 0.92,
            input_power: 50.0 * UW,
            lo_power: 1.0 * MW,
            lever_arm: 19.0 * MM,
            mod_freq_yaw: 5_000.0,
            mod_freq_pitch: 6_000.0,
        }
    }

    fn yaw_for_k_waist(cfg: &SystemConfig, k_waist: f64) -> f64 {
        let k = k_waist / cfg.geom.waist();
        (k * cfg.geom.wavelength() / (2.0 * std::f64::consts::PI)).asin()
    }

    #[test]
    fn photon_count_constants_arithmetic() {
        let power = 50.0 * UW;
        let lambda = 1064.0 * NM;
        let n = photons_from_power(power, lambda, 0.1);
        assert!((n - 2.678e13).abs() / 2.678e13 < 1e-3);
        // Exact route through the constant.
        assert_eq!(n, power * 0.1 * lambda / PLANCK_TIMES_C);
    }

    #[test]
    fn photon_count_zero_power_and_linearity() {
        assert_eq!(photons_from_power(0.0, 1064.0 * NM, 0.1), 0.0);
        let n1 = photons_from_power(3.0 * UW, 1064.0 * NM, 0.1);
        let n2 = photons_from_power(3.0 * UW, 1064.0 * NM, 0.2);
        assert!((n2 / n1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn budget_port_counts_follow_probabilities() {
        let cfg = config();
        let b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
        assert!((b.photons_dark_i / b.photons_in - 0.13).abs() < 1e-12);
        let expected_ii = cfg.effective_eta() * 0.20;
        assert!((b.photons_dark_ii / b.photons_in - expected_ii).abs() < 1e-12);
    }

    #[test]
    fn zero_deflection_zero_signal() {
        let cfg = config();
        let b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
        let s = dark_port_i(&cfg, &Deflection::new(0.0, 0.0, &cfg.geom)).unwrap();
        let r = photon_number_difference(&s, &b).unwrap();
        assert_eq!(r.signal_mean, 0.0);
        assert_eq!(r.snr_linear, 0.0);
        assert!(r.snr_db.is_infinite() && r.snr_db < 0.0);
    }

    #[test]
    fn signal_mean_substitution_identity() {
        // signal = sqrt(N_lo) * 2 sqrt(N_in) cos(phi1/2) * k w0, because the
        // amplification cancels against the post-selection attenuation.
        let cfg = config();
        let b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
        let k_waist = 1e-4;
        let yaw = yaw_for_k_waist(&cfg, k_waist);
        let s = dark_port_i(&cfg, &Deflection::new(yaw, 0.0, &cfg.geom)).unwrap();
        let r = photon_number_difference(&s, &b).unwrap();
        let expected =
            b.photons_lo.sqrt() * 2.0 * b.photons_in.sqrt() * (cfg.phi1 / 2.0).cos() * k_waist;
        assert!((r.signal_mean - expected).abs() / expected < 1e-12);
        assert_eq!(r.noise_std, b.photons_lo.sqrt());
    }

    #[test]
    fn zero_lo_is_rejected_for_difference_signal() {
        let cfg = config();
        let mut b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
        b.photons_lo = 0.0;
        let s = dark_port_i(&cfg, &Deflection::new(0.0, 0.0, &cfg.geom)).unwrap();
        assert_eq!(photon_number_difference(&s, &b), Err(Error::NonPositiveLo));
    }

    #[test]
    fn doubling_kick_adds_six_db() {
        let cfg = config();
        let b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
        let s1 = dark_port_i(
            &cfg,
            &Deflection::new(yaw_for_k_waist(&cfg, 5e-5), 0.0, &cfg.geom),
        )
        .unwrap();
        let s2 = dark_port_i(
            &cfg,
            &Deflection::new(yaw_for_k_waist(&cfg, 1e-4), 0.0, &cfg.geom),
        )
        .unwrap();
        let delta = snr(&s2, &b).snr_db - snr(&s1, &b).snr_db;
        assert!((delta - 6.0206).abs() < 1e-3, "delta = {delta}");
    }

    #[test]
    fn snr_ratio_follows_one_minus_p() {
        let mut cfg = config();
        let b_time = 0.1;
        let yaw = yaw_for_k_waist(&cfg, 1e-4);
        let snr_at = |p: f64, cfg: &mut SystemConfig| {
            cfg.phi1 = phase_for_probability(p).unwrap();
            let b = PhotonBudget::from_config(cfg, b_time).unwrap();
            let s = dark_port_i(cfg, &Deflection::new(yaw, 0.0, &cfg.geom)).unwrap();
            snr(&s, &b).snr_linear
        };
        let nearly_zero = snr_at(1e-9, &mut cfg);
        for p in [0.05, 0.13, 0.5, 0.9] {
            let ratio = snr_at(p, &mut cfg) / nearly_zero;
            assert!(
                (ratio - (1.0 - p)).abs() < 1e-6,
                "p = {p}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn snr_is_unity_at_minimum_angle() {
        let cfg = config();
        let b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
        let angles = min_angles(&cfg, &b).unwrap();
        let s = dark_port_i(&cfg, &Deflection::new(angles.yaw_min, 0.0, &cfg.geom)).unwrap();
        let r = snr(&s, &b);
        // The closed form uses sin(theta) ~ theta; at prad scales the
        // difference is far below the assertion tolerance.
        assert!((r.snr_linear - 1.0).abs() < 1e-9, "snr {}", r.snr_linear);
        assert!(r.snr_db.abs() < 1e-8);

        let s2 = dark_port_ii(&cfg, &Deflection::new(0.0, angles.pitch_min, &cfg.geom)).unwrap();
        let r2 = snr(&s2, &b);
        assert!((r2.snr_linear - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_angle_power_and_probability_ratio() {
        // 16x the power at p = 0.5% versus the base point at p = 13%.
        let mut cfg_a = config();
        cfg_a.input_power = 800.0 * UW;
        cfg_a.phi1 = phase_for_probability(0.005).unwrap();
        let budget_a = PhotonBudget::from_config(&cfg_a, 0.1).unwrap();
        let a = min_angles(&cfg_a, &budget_a).unwrap();

        let cfg_b = config();
        let budget_b = PhotonBudget::from_config(&cfg_b, 0.1).unwrap();
        let b = min_angles(&cfg_b, &budget_b).unwrap();

        let ratio = a.yaw_min / b.yaw_min;
        assert!((ratio - 0.2338).abs() < 5e-4, "ratio = {ratio}");
    }

    #[test]
    fn min_angle_square_root_law() {
        let cfg = config();
        let b1 = PhotonBudget::from_config(&cfg, 0.1).unwrap();
        let mut cfg4 = cfg.clone();
        cfg4.input_power *= 4.0;
        let b4 = PhotonBudget::from_config(&cfg4, 0.1).unwrap();
        let m1 = min_angles(&cfg, &b1).unwrap();
        let m4 = min_angles(&cfg4, &b4).unwrap();
        assert!((m4.yaw_min / m1.yaw_min - 0.5).abs() < 1e-12);
    }

    #[test]
    fn min_angle_monotone_in_power_and_phase() {
        let mut last = f64::INFINITY;
        for power_uw in [50.0, 100.0, 400.0, 800.0] {
            let mut cfg = config();
            cfg.input_power = power_uw * UW;
            let b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
            let m = min_angles(&cfg, &b).unwrap();
            assert!(m.yaw_min < last);
            last = m.yaw_min;
        }
        last = f64::INFINITY;
        // Smaller p means larger cos(phi1/2), hence smaller yaw_min.
        for p in [0.9, 0.5, 0.13, 0.005] {
            let mut cfg = config();
            cfg.phi1 = phase_for_probability(p).unwrap();
            let b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
            let m = min_angles(&cfg, &b).unwrap();
            assert!(m.yaw_min < last);
            last = m.yaw_min;
        }
    }

    #[test]
    fn min_angles_match_root_solved_unit_snr() {
        // Bisection on the exact SNR(k) = 1, converted back to an angle,
        // against the closed form.
        let mut cfg = config();
        let mut seed = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            cfg.input_power = (20.0 + 780.0 * next()) * UW;
            cfg.phi1 = phase_for_probability(0.002 + 0.6 * next()).unwrap();
            let b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
            let closed = min_angles(&cfg, &b).unwrap().yaw_min;

            let snr_of_angle = |angle: f64| {
                let s = dark_port_i(&cfg, &Deflection::new(angle, 0.0, &cfg.geom)).unwrap();
                snr(&s, &b).snr_linear
            };
            let mut lo = closed * 0.5;
            let mut hi = closed * 2.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if snr_of_angle(mid) < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let solved = 0.5 * (lo + hi);
            assert!(
                ((solved - closed) / closed).abs() < 1e-9,
                "closed {closed}, solved {solved}"
            );
        }
    }

    #[test]
    fn displacement_conversion_measured_anchors() {
        let l = 19.0 * MM;
        let d_yaw = angle_to_displacement(83e-12, l);
        let d_pitch = angle_to_displacement(89e-12, l);
        assert!((d_yaw - 0.79 * PM).abs() < 0.01 * PM, "{} pm", d_yaw / PM);
        assert!((d_pitch - 0.85 * PM).abs() < 0.01 * PM, "{} pm", d_pitch / PM);
        assert_eq!(angle_to_displacement(0.0, l), 0.0);
    }

    proptest! {
        /// SNR independent of the local-oscillator strength.
        #[test]
        fn snr_independent_of_lo(lo_mw in 0.01f64..50.0, k_scale in 0.1f64..10.0) {
            let mut cfg = config();
            cfg.lo_power = lo_mw * MW;
            let b = PhotonBudget::from_config(&cfg, 0.1).unwrap();
            let yaw = yaw_for_k_waist(&cfg, 1e-5 * k_scale);
            let s = dark_port_i(&cfg, &Deflection::new(yaw, 0.0, &cfg.geom)).unwrap();
            let r = snr(&s, &b);

            let mut cfg_ref = config();
            cfg_ref.lo_power = 1.0 * MW;
            let b_ref = PhotonBudget::from_config(&cfg_ref, 0.1).unwrap();
            let r_ref = snr(&s, &b_ref);
            prop_assert!((r.snr_linear / r_ref.snr_linear - 1.0).abs() < 1e-12);
        }

        /// Angle -> displacement -> angle is the identity for small angles.
        #[test]
        fn displacement_round_trip(angle_urad in 1e-6f64..1e3) {
            let angle = angle_urad * 1e-6;
            let l = 19.0 * MM;
            let back = displacement_to_angle(angle_to_displacement(angle, l), l);
            prop_assert!((back - angle).abs() <= 1e-12 * angle.max(1e-18));
        }
    }
}
