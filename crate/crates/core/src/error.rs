//! Error type shared across the crate.

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum HomError {
    /// A binary matrix/constraint operation received mismatched shapes.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A sample point with gauge >= 1 was passed where compact containment in
    /// the open constraint set is required.
    NotCompactlyContained { gauge: f64 },
    /// The macroscopic gradient lies outside the open constraint set.
    InfeasibleMacroGradient { gauge: f64 },
    /// The alternating-projection distance iteration did not reach tolerance.
    ProjectionDiverged { iterations: usize, residual: f64 },
    /// An operation that certifies on samples received an empty sample set.
    EmptySamples,
    /// The 1-d duality oracle refuses non-convex kernels.
    NonConvexKernel,
    /// A radial ladder ended with an oscillating tail: neither a finite limit
    /// nor a blow-up can be reported.
    UndecidedRadialLimit { oscillation: f64 },
    /// Mesh, ladder or multiplicity parameters do not tile/divide as required.
    IncompatibleMesh(&'static str),
    /// A constructor or operation precondition failed.
    InvalidParameter(&'static str),
}

impl fmt::Display for HomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomError::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            HomError::NotCompactlyContained { gauge } => {
                write!(f, "sample with gauge {gauge} is not compactly contained")
            }
            HomError::InfeasibleMacroGradient { gauge } => {
                write!(f, "macroscopic gradient has gauge {gauge} >= 1")
            }
            HomError::ProjectionDiverged {
                iterations,
                residual,
            } => write!(
                f,
                "distance projection did not converge after {iterations} iterations (residual {residual:e})"
            ),
            HomError::EmptySamples => write!(f, "empty sample set"),
            HomError::NonConvexKernel => write!(f, "kernel is not convex on its domain"),
            HomError::UndecidedRadialLimit { oscillation } => write!(
                f,
                "radial ladder undecided: tail oscillation {oscillation:e} above tolerance"
            ),
            HomError::IncompatibleMesh(msg) => write!(f, "incompatible mesh: {msg}"),
            HomError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for HomError {}

pub type Result<T> = core::result::Result<T, HomError>;
