//! Hermite-Gaussian transverse-mode algebra.
//!
//! Pointer states are expanded over one-dimensional Hermite-Gaussian modes.
//! The normalization convention used throughout: the intensity distribution
//! of the fundamental mode along each axis has variance `waist^2`, so the
//! first-order mode is exactly `psi1(x) = (x/waist) * psi0(x)` and is
//! automatically unit-norm. In this convention
//!
//! ```text
//! psi_n(x) = (2 pi w0^2)^(-1/4) * He_n(x / w0) / sqrt(n!) * exp(-x^2 / (4 w0^2))
//! ```
//!
//! with `He_n` the probabilists' Hermite polynomials.
//!
//! A beam deflection acts on each axis as the momentum kick `exp(i k x)`; in
//! this basis that is a unitary displacement whose matrix elements are
//! analytic, so both the first-order and the exact mode decomposition are
//! available without quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest `|k * waist|` accepted by the first-order kick expansion.
///
/// Beyond this the dropped second-order term exceeds 2% and callers are
/// directed to [`apply_deflection_exact`].
pub const FIRST_ORDER_KICK_LIMIT: f64 = 0.2;

/// Default truncation for the exact kick decomposition; the residual weight
/// is below 1e-10 for every `|k * waist|` this simulator operates at.
pub const DEFAULT_MAX_ORDER: usize = 8;

/// Tolerance for recognizing a pure fundamental-mode expansion.
const FUNDAMENTAL_TOLERANCE: f64 = 1e-12;

/// Index of a one-dimensional Hermite-Gaussian mode (0 = fundamental).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HgModeIndex(pub usize);

impl HgModeIndex {
    pub fn order(self) -> usize {
        self.0
    }
}

/// Transverse axis a one-dimensional expansion lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Beam waist and wavelength of the pointer beam.
///
/// `waist` is the per-axis standard deviation of the fundamental mode's
/// intensity distribution (see the module docs for the convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    waist: f64,
    wavelength: f64,
}

impl BeamGeometry {
    pub fn new(waist_m: f64, wavelength_m: f64) -> Result<Self> {
        if waist_m <= 0.0 || !waist_m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "waist must be positive, got {waist_m}"
            )));
        }
        if wavelength_m <= 0.0 || !wavelength_m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "wavelength must be positive, got {wavelength_m}"
            )));
        }
        Ok(Self {
            waist: waist_m,
            wavelength: wavelength_m,
        })
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Transverse wavenumber imparted by a deflection: `k = 2 pi sin(angle) / lambda`.
    pub fn transverse_wavenumber(&self, angle_rad: f64) -> f64 {
        2.0 * std::f64::consts::PI * angle_rad.sin() / self.wavelength
    }
}

/// A two-axis beam deflection with its derived transverse wavenumbers.
///
/// `kx` and `ky` are always recomputed from the angles at construction, so
/// the pair can never go out of sync with `yaw`/`pitch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deflection {
    yaw: f64,
    pitch: f64,
    kx: f64,
    ky: f64,
}

impl Deflection {
    pub fn new(yaw_rad: f64, pitch_rad: f64, geom: &BeamGeometry) -> Self {
        Self {
            yaw: yaw_rad,
            pitch: pitch_rad,
            kx: geom.transverse_wavenumber(yaw_rad),
            ky: geom.transverse_wavenumber(pitch_rad),
        }
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn kx(&self) -> f64 {
        self.kx
    }

    pub fn ky(&self) -> f64 {
        self.ky
    }

    /// Wavenumber relevant for an expansion on `axis`.
    pub fn wavenumber(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Horizontal => self.kx,
            Axis::Vertical => self.ky,
        }
    }
}

/// Coefficients of a transverse beam over the HG basis along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerExpansion {
    axis: Axis,
    coefficients: Vec<Complex64>,
    geom: BeamGeometry,
}

impl PointerExpansion {
    /// A pure fundamental-mode pointer.
    pub fn tem00(axis: Axis, geom: BeamGeometry) -> Self {
        Self {
            axis,
            coefficients: vec![Complex64::new(1.0, 0.0)],
            geom,
        }
    }

    pub fn from_coefficients(
        axis: Axis,
        coefficients: Vec<Complex64>,
        geom: BeamGeometry,
    ) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter(
                "pointer expansion needs at least one coefficient".into(),
            ));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "pointer coefficients must be finite".into(),
            ));
        }
        Ok(Self {
            axis,
            coefficients,
            geom,
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Relabels the axis without touching the coefficients (an ideal image
    /// rotator swapping the first-order lobe orientation).
    pub fn with_axis(mut self, axis: Axis) -> Self {
        self.axis = axis;
        self
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Coefficient of mode `n`; zero beyond the truncation order.
    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.coefficients
            .get(n)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Highest mode order carried by this expansion.
    pub fn truncation_order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn waist(&self) -> f64 {
        self.geom.waist
    }

    pub fn geometry(&self) -> &BeamGeometry {
        &self.geom
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// True when the expansion is the fundamental mode with unit amplitude.
    pub fn is_fundamental(&self) -> bool {
        (self.coefficient(0) - Complex64::new(1.0, 0.0)).norm() <= FUNDAMENTAL_TOLERANCE
            && self
                .coefficients
                .iter()
                .skip(1)
                .all(|c| c.norm() <= FUNDAMENTAL_TOLERANCE)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Probabilists' Hermite polynomial `He_n(u)` by the three-term recurrence.
fn hermite_prob(n: usize, u: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => u,
        _ => {
            let mut prev = 1.0;
            let mut cur = u;
            for k in 1..n {
                let next = u * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// One-dimensional HG mode amplitude `psi_n(x)` in the module's convention.
pub fn hg_amplitude(mode: HgModeIndex, x: f64, geom: &BeamGeometry) -> f64 {
    let w0 = geom.waist();
    let u = x / w0;
    let norm = (2.0 * std::f64::consts::PI * w0 * w0).powf(-0.25);
    norm * hermite_prob(mode.order(), u) / factorial(mode.order()).sqrt()
        * (-x * x / (4.0 * w0 * w0)).exp()
}

/// Fundamental-mode amplitude `psi0(x, y)`, separable in the two axes.
///
/// The squared amplitude integrates to one over the plane and has per-axis
/// intensity variance `waist^2`.
pub fn tem00_amplitude(x: f64, y: f64, geom: &BeamGeometry) -> f64 {
    hg_amplitude(HgModeIndex(0), x, geom) * hg_amplitude(HgModeIndex(0), y, geom)
}

/// First-order mode amplitude along one axis: `psi1(x) = (x/waist) psi0(x)`.
pub fn first_order_mode(x: f64, geom: &BeamGeometry) -> f64 {
    hg_amplitude(HgModeIndex(1), x, geom)
}

/// First-order momentum kick on a pure fundamental pointer.
///
/// The kick `exp(i k x) ~ 1 + i k x` maps `psi0` to `psi0 + i k w0 psi1`,
/// so the returned expansion has `c0 = 1` and `c1 = i k w0` on the axis the
/// expansion lives on. The result is deliberately not renormalized.
pub fn apply_deflection_first_order(
    p: &PointerExpansion,
    d: &Deflection,
) -> Result<PointerExpansion> {
    if !p.is_fundamental() {
        return Err(Error::NotFundamental);
    }
    let k = d.wavenumber(p.axis);
    let k_waist = k * p.waist();
    if k_waist.abs() > FIRST_ORDER_KICK_LIMIT {
        return Err(Error::FirstOrderRegime {
            k_waist: k_waist.abs(),
            limit: FIRST_ORDER_KICK_LIMIT,
        });
    }
    let coefficients = vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, k_waist),
    ];
    PointerExpansion::from_coefficients(p.axis, coefficients, p.geom)
}

/// Associated Laguerre polynomial `L_n^(a)(x)` by the three-term recurrence.
fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 1.0 + a - x,
        _ => {
            let mut prev = 1.0;
            let mut cur = 1.0 + a - x;
            for k in 1..n {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Matrix elements `<m| exp(i k x) |n>` of the exact kick up to `max_order`.
///
/// In this mode basis the kick is the displacement operator with purely
/// imaginary argument `i k w0`, so for `b = k * waist`:
///
/// ```text
/// M[m][n] = exp(-b^2/2) * (i b)^|m-n| * sqrt(min! / max!) * L_min^(|m-n|)(b^2)
/// ```
///
/// Rows/columns are indexed by mode order; the matrix is unitary in the
/// untruncated limit.
pub fn displacement_matrix(k_waist: f64, max_order: usize) -> Vec<Vec<Complex64>> {
    let b = k_waist;
    let gauss = (-b * b / 2.0).exp();
    let dim = max_order + 1;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (row, row_vec) in m.iter_mut().enumerate() {
        for (col, entry) in row_vec.iter_mut().enumerate() {
            let lo = row.min(col);
            let hi = row.max(col);
            let diff = hi - lo;
            let ib_pow = Complex64::new(0.0, b).powu(diff as u32);
            let ratio = (factorial(lo) / factorial(hi)).sqrt();
            *entry = ib_pow * gauss * ratio * laguerre(lo, diff as f64, b * b);
        }
    }
    m
}

/// Kick coefficients `c_n = <psi_n| exp(i k x) |psi_0>` for a fundamental
/// input, truncated at `max_order`.
pub fn displacement_coefficients(k_waist: f64, max_order: usize) -> Vec<Complex64> {
    let b = k_waist;
    let gauss = (-b * b / 2.0).exp();
    (0..=max_order)
        .map(|n| Complex64::new(0.0, b).powu(n as u32) * gauss / factorial(n).sqrt())
        .collect()
}

/// Exact momentum kick, decomposed over the HG basis up to `max_order`.
///
/// Works for any input expansion; for a pure fundamental the result is the
/// column `c_n = (i k w0)^n exp(-k^2 w0^2 / 2) / sqrt(n!)`, whose weights sum
/// to one as `max_order` grows.
pub fn apply_deflection_exact(
    p: &PointerExpansion,
    d: &Deflection,
    max_order: usize,
) -> Result<PointerExpansion> {
    if max_order < 1 {
        return Err(Error::InvalidParameter(
            "max_order must be at least 1".into(),
        ));
    }
    let k = d.wavenumber(p.axis);
    let k_waist = k * p.waist();
    let coefficients = if p.is_fundamental() {
        displacement_coefficients(k_waist, max_order)
    } else {
        let m = displacement_matrix(k_waist, max_order);
        (0..=max_order)
            .map(|row| {
                (0..=max_order.min(p.truncation_order()))
                    .map(|col| m[row][col] * p.coefficient(col))
                    .sum()
            })
            .collect()
    };
    PointerExpansion::from_coefficients(p.axis, coefficients, p.geom)
}
