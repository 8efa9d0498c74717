//! Actuator voltage-to-angle calibration.
//!
//! The actuator pair deflects the beam linearly with drive voltage and
//! produces no deflection at rest, so the map is a slope through zero for
//! each axis. Slopes are pinned from measured (voltage, angle) anchor pairs.

use dwva_core::DarkPort;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    yaw_slope_rad_per_v: f64,
    pitch_slope_rad_per_v: f64,
}

impl Calibration {
    pub fn new(yaw_slope_rad_per_v: f64, pitch_slope_rad_per_v: f64) -> Result<Self> {
        for (name, v) in [
            ("yaw slope", yaw_slope_rad_per_v),
            ("pitch slope", pitch_slope_rad_per_v),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(CliError::Config(format!(
                    "calibration {name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            yaw_slope_rad_per_v,
            pitch_slope_rad_per_v,
        })
    }

    /// Slopes from one measured anchor per axis (zero intercept).
    pub fn from_anchors(
        yaw_anchor_v: f64,
        yaw_anchor_rad: f64,
        pitch_anchor_v: f64,
        pitch_anchor_rad: f64,
    ) -> Result<Self> {
        if yaw_anchor_v <= 0.0 || pitch_anchor_v <= 0.0 {
            return Err(CliError::Config(
                "calibration anchor voltages must be positive".into(),
            ));
        }
        Self::new(yaw_anchor_rad / yaw_anchor_v, pitch_anchor_rad / pitch_anchor_v)
    }

    pub fn yaw_slope_rad_per_v(&self) -> f64 {
        self.yaw_slope_rad_per_v
    }

    pub fn pitch_slope_rad_per_v(&self) -> f64 {
        self.pitch_slope_rad_per_v
    }

    pub fn yaw_angle(&self, volts: f64) -> f64 {
        self.yaw_slope_rad_per_v * volts
    }

    pub fn pitch_angle(&self, volts: f64) -> f64 {
        self.pitch_slope_rad_per_v * volts
    }

    /// Angle induced on the axis detected by `port`.
    pub fn angle(&self, port: DarkPort, volts: f64) -> f64 {
        match port {
            DarkPort::I => self.yaw_angle(volts),
            DarkPort::II => self.pitch_angle(volts),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes_from_anchor_pairs() {
        // 0.4 mV <-> 0.32 nrad and 0.2 mV <-> 0.43 nrad.
        let cal = Calibration::from_anchors(0.4e-3, 0.32e-9, 0.2e-3, 0.43e-9).unwrap();
        // 0.8 nrad/mV and 2.15 nrad/mV.
        assert!((cal.yaw_slope_rad_per_v() - 0.8e-6).abs() < 1e-18);
        assert!((cal.pitch_slope_rad_per_v() - 2.15e-6).abs() < 1e-18);
    }

    #[test]
    fn zero_intercept() {
        let cal = Calibration::new(0.8e-6, 2.15e-6).unwrap();
        assert_eq!(cal.yaw_angle(0.0), 0.0);
        assert_eq!(cal.pitch_angle(0.0), 0.0);
    }

    #[test]
    fn rejects_nonpositive_slopes() {
        assert!(Calibration::new(0.0, 1e-6).is_err());
        assert!(Calibration::new(1e-6, -1.0).is_err());
    }
}
