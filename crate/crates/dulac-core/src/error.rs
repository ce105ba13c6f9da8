use core::fmt;

/// Failures reported by the core operations.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Construction data violates a type invariant.
    Invalid(&'static str),
    NotTangent,
    NotSolvable { lambda: f64 },
    ZeroDerivation,
    Unramified,
    NotUnramified,
    NotMildlyRamified,
    NotTangentToIdentity,
    NoConvergence,
    Indifferent,
    ResonanceResidual { lambda: f64, residual: f64 },
    PreconditionFailed(&'static str),
    StepUnderflow { t: f64, h: f64 },
    LiftExited(&'static str),
    RadiusExceeded { radius: f64 },
    FitIllConditioned,
    DeterminationMismatch { residual: f64 },
    BadParameters(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(s) => write!(f, "invalid input: {s}"),
            Error::NotTangent => f.write_str("series is not tangent to the identity (need a=1, b=0)"),
            Error::NotSolvable { lambda } => {
                write!(f, "difference equation not solvable at exponent {lambda}")
            }
            Error::ZeroDerivation => f.write_str("derivation is zero"),
            Error::Unramified => f.write_str("input is unramified"),
            Error::NotUnramified => f.write_str("input is not unramified"),
            Error::NotMildlyRamified => f.write_str("input is not mildly ramified"),
            Error::NotTangentToIdentity => f.write_str("germ is not tangent to the identity"),
            Error::NoConvergence => f.write_str("iteration did not converge"),
            Error::Indifferent => f.write_str("germ is indifferent"),
            Error::ResonanceResidual { lambda, residual } => {
                write!(f, "resonant homological equation at exponent {lambda} (residual {residual:e})")
            }
            Error::PreconditionFailed(s) => write!(f, "precondition failed: {s}"),
            Error::StepUnderflow { t, h } => write!(f, "step size {h:e} underflow at t={t}"),
            Error::LiftExited(s) => write!(f, "lift left the adapted domain: {s}"),
            Error::RadiusExceeded { radius } => write!(f, "point outside reliability radius {radius}"),
            Error::FitIllConditioned => f.write_str("germ fit is ill-conditioned"),
            Error::DeterminationMismatch { residual } => {
                write!(f, "determination formulas disagree (residual {residual:e})")
            }
            Error::BadParameters(s) => write!(f, "bad parameters: {s}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

impl core::error::Error for Error {}
