//! Discrete path-space algebra for the two interferometers.
//!
//! The ring interferometer has two counter-propagating paths, the unbalanced
//! two-arm interferometer has a transmissive and a reflective path. States
//! are complex amplitude vectors over those paths (or their tensor product),
//! operators are small dense matrices, and weak values come straight from
//! `<f|A|i> / <f|i>`. Closed forms such as `i cot(phi/2)` are reserved for
//! the tests; the implementation stays on the matrix route.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Overlaps smaller than this are treated as zero post-selection.
pub const OVERLAP_EPSILON: f64 = 1e-15;

const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// Basis a path state is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathBasis {
    /// Ring paths: clockwise, counterclockwise.
    Sagnac,
    /// Two-arm paths: transmitted, reflected.
    Umz,
    /// Tensor product, ring paths first.
    Composite,
}

impl PathBasis {
    pub fn dim(self) -> usize {
        match self {
            PathBasis::Sagnac | PathBasis::Umz => 2,
            PathBasis::Composite => 4,
        }
    }
}

/// Output port of the ring interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SagnacPort {
    Bright,
    Dark,
}

/// Unit-norm complex amplitude vector over interferometer paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    amplitudes: Vec<Complex64>,
    basis: PathBasis,
}

impl PathState {
    /// Builds a selection state, enforcing dimension and unit norm.
    pub fn new(amplitudes: Vec<Complex64>, basis: PathBasis) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::InvalidParameter(format!(
                "state dimension {} does not match basis dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "selection state norm^2 = {norm_sqr}, expected 1"
            )));
        }
        Ok(Self { amplitudes, basis })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn basis(&self) -> PathBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &PathState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidParameter(format!(
                "overlap between dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product with ring-path factor first.
    pub fn tensor(&self, other: &PathState) -> PathState {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PathState {
            amplitudes,
            basis: PathBasis::Composite,
        }
    }

    /// Multiplies by a global phase `exp(i alpha)`; observables must not care.
    pub fn with_global_phase(&self, alpha: f64) -> PathState {
        let phase = Complex64::from_polar(1.0, alpha);
        PathState {
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
            basis: self.basis,
        }
    }
}

/// Dense operator on a path space, with a verified hermiticity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOperator {
    matrix: Vec<Complex64>,
    dim: usize,
    hermitian: bool,
}

impl PathOperator {
    /// Builds an operator from a row-major square matrix.
    pub fn from_matrix(matrix: Vec<Complex64>, dim: usize) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "matrix of {} entries is not {dim}x{dim}",
                matrix.len()
            )));
        }
        let hermitian = (0..dim).all(|r| {
            (0..dim).all(|c| (matrix[r * dim + c] - matrix[c * dim + r].conj()).norm() <= 1e-12)
        });
        Ok(Self {
            matrix,
            dim,
            hermitian,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self {
            matrix,
            dim,
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    /// Applies the operator to a state vector (result is generally not
    /// normalized).
    pub fn apply(&self, state: &PathState) -> Result<Vec<Complex64>> {
        if state.dim() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "operator dimension {} does not match state dimension {}",
                self.dim,
                state.dim()
            )));
        }
        Ok((0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.entry(r, c) * state.amplitudes[c])
                    .sum()
            })
            .collect())
    }

    /// Kronecker product, left factor on the ring-path space.
    pub fn kron(&self, other: &PathOperator) -> PathOperator {
        let dim = self.dim * other.dim;
        let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
        for ar in 0..self.dim {
            for ac in 0..self.dim {
                for br in 0..other.dim {
                    for bc in 0..other.dim {
                        let row = ar * other.dim + br;
                        let col = ac * other.dim + bc;
                        matrix[row * dim + col] = self.entry(ar, ac) * other.entry(br, bc);
                    }
                }
            }
        }
        PathOperator {
            matrix,
            dim,
            hermitian: self.hermitian && other.hermitian,
        }
    }
}

/// One weak path-pointer coupling `U = exp(-i g A k x)`, expanded to first
/// order in `k x` everywhere downstream.
///
/// The coupling constant is retained as a field (it stays at unity in every
/// shipped configuration, with the interaction time absorbed into it) so the
/// evolution operator is fully represented.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakInteraction {
    pub coupling: f64,
    pub operator: PathOperator,
}

impl WeakInteraction {
    /// Unit-coupling interaction, the operating point of the whole bench.
    pub fn unit(operator: PathOperator) -> Self {
        Self {
            coupling: 1.0,
            operator,
        }
    }
}

/// Complex amplification factor of a weak measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValue(pub Complex64);

impl WeakValue {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }
}

/// Ring-interferometer input superposition with relative phase `phi1`:
/// `(exp(-i phi1/2) |cw> + exp(i phi1/2) |ccw>) / sqrt(2)`.
pub fn sagnac_preselection(phi1: f64) -> PathState {
    let half = 0.5 * phi1;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    PathState {
        amplitudes: vec![
            Complex64::from_polar(inv_sqrt2, -half),
            Complex64::from_polar(inv_sqrt2, half),
        ],
        basis: PathBasis::Sagnac,
    }
}

/// Ring-interferometer output projections `(|cw> +/- |ccw>) / sqrt(2)`.
pub fn sagnac_postselection(port: SagnacPort) -> PathState {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let sign = match port {
        SagnacPort::Bright => 1.0,
        SagnacPort::Dark => -1.0,
    };
    PathState {
        amplitudes: vec![
            Complex64::new(inv_sqrt2, 0.0),
            Complex64::new(sign * inv_sqrt2, 0.0),
        ],
        basis: PathBasis::Sagnac,
    }
}

/// Two-arm interferometer input superposition with locked phase `phi2`.
pub fn umz_preselection(phi2: f64) -> PathState {
    let half = 0.5 * phi2;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    PathState {
        amplitudes: vec![
            Complex64::from_polar(inv_sqrt2, -half),
            Complex64::from_polar(inv_sqrt2, half),
        ],
        basis: PathBasis::Umz,
    }
}

/// Dark-output projection of the two-arm interferometer: `(|T> - |R>) / sqrt(2)`.
pub fn umz_postselection_dark() -> PathState {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    PathState {
        amplitudes: vec![
            Complex64::new(inv_sqrt2, 0.0),
            Complex64::new(-inv_sqrt2, 0.0),
        ],
        basis: PathBasis::Umz,
    }
}

/// Path-population difference on the ring space, the measurement operator
/// coupled to the yaw kick: `|cw><cw| - |ccw><ccw|`.
pub fn yaw_operator() -> PathOperator {
    PathOperator {
        matrix: vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ],
        dim: 2,
        hermitian: true,
    }
}

/// Path-population difference on the two-arm space: `|T><T| - |R><R|`.
pub fn umz_population_difference() -> PathOperator {
    PathOperator {
        matrix: vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ],
        dim: 2,
        hermitian: true,
    }
}

/// Measurement operator coupled to the pitch kick on the composite space.
///
/// The ring-space factor is written as `|cw><cw| + |ccw><ccw|`, i.e. the
/// identity, taken literally; the two-arm factor carries the population
/// difference.
pub fn pitch_operator() -> PathOperator {
    PathOperator::identity(2).kron(&umz_population_difference())
}

/// Weak value `<f|A|i> / <f|i>`.
pub fn weak_value(op: &PathOperator, pre: &PathState, post: &PathState) -> Result<WeakValue> {
    let denominator = post.overlap(pre)?;
    if denominator.norm() < OVERLAP_EPSILON {
        return Err(Error::ZeroOverlap);
    }
    let applied = op.apply(pre)?;
    let numerator: Complex64 = post
        .amplitudes()
        .iter()
        .zip(&applied)
        .map(|(f, a)| f.conj() * a)
        .sum();
    Ok(WeakValue(numerator / denominator))
}

/// Post-selection probability `|<post|pre>|^2`.
pub fn postselection_probability(pre: &PathState, post: &PathState) -> Result<f64> {
    Ok(post.overlap(pre)?.norm_sqr())
}

/// Pre/post-selection states and measurement operator for the pitch stage.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSelection {
    pub pre: PathState,
    pub post: PathState,
    pub op: PathOperator,
}

/// Builds the composite (ring x two-arm) selection for the pitch channel:
/// pre-selection `|i>|i'>`, post-selection through the ring bright port and
/// the two-arm dark port, and the pitch measurement operator.
pub fn composite_selection(phi1: f64, phi2: f64) -> CompositeSelection {
    let pre = sagnac_preselection(phi1).tensor(&umz_preselection(phi2));
    let post = sagnac_postselection(SagnacPort::Bright).tensor(&umz_postselection_dark());
    CompositeSelection {
        pre,
        post,
        op: pitch_operator(),
    }
}

/// Relative phase that realizes a given dark-port post-selection probability:
/// `phi = 2 asin(sqrt(p))`.
pub fn phase_for_probability(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DegeneratePostselection { probability: p });
    }
    Ok(2.0 * p.sqrt().asin())
}
