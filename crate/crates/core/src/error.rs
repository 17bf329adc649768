//! Error types shared across the library.

use std::fmt;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by parameter validation and numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated its domain constraint.
    InvalidParameter {
        /// Name of the offending parameter.
        name: &'static str,
        /// The value that was rejected.
        value: f64,
        /// The constraint that was violated.
        constraint: &'static str,
    },
    /// The channel noise is at or beyond the classical teleportation limit
    /// `delta < 2 * eta`; the amplification/beam-splitting decomposition
    /// does not exist there (the gain diverges).
    BeyondClassicalTeleportationLimit { eta: f64, delta: f64 },
    /// An attack parameter pair maps to an unphysical transmission `g * kappa > 1`.
    UnphysicalTransmission { g: f64, kappa: f64 },
    /// A root-finding bracket does not enclose a sign change.
    NonBracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// An iterative routine exhausted its subdivision or iteration budget.
    NonConvergence {
        /// Which routine gave up.
        context: &'static str,
        /// Budget that was exhausted.
        limit: u64,
    },
    /// The tail bound is only valid on part of the outcome axis; the given
    /// point violates one of its preconditions.
    BoundOutOfDomain {
        x: f64,
        /// The precondition that failed, e.g. `x > 4*sqrt(eta)*alpha/delta`.
        precondition: &'static str,
    },
    /// A postselection window accepted no simulated rounds, which is distinct
    /// from estimating zero information.
    EmptyAcceptance,
    /// The boundary solver could not bracket a sign change of the advantage
    /// gap in `delta`. Carries the sampled `(delta, max_gap)` profile for
    /// diagnostics.
    BoundaryNotBracketed { profile: Vec<(f64, f64)> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter {
                name,
                value,
                constraint,
            } => write!(f, "invalid parameter {name} = {value}: requires {constraint}"),
            Error::BeyondClassicalTeleportationLimit { eta, delta } => write!(
                f,
                "delta >= 2*eta (delta = {delta}, eta = {eta}): beyond classical teleportation limit"
            ),
            Error::UnphysicalTransmission { g, kappa } => write!(
                f,
                "g*kappa = {} > 1: unphysical line transmission",
                g * kappa
            ),
            Error::NonBracketing { lo, hi, f_lo, f_hi } => write!(
                f,
                "f({lo}) = {f_lo} and f({hi}) = {f_hi} have the same sign: no root bracketed"
            ),
            Error::NonConvergence { context, limit } => {
                write!(f, "{context}: no convergence within budget {limit}")
            }
            Error::BoundOutOfDomain { x, precondition } => {
                write!(f, "tail bound undefined at x = {x}: requires {precondition}")
            }
            Error::EmptyAcceptance => {
                write!(f, "postselection window accepted no rounds")
            }
            Error::BoundaryNotBracketed { profile } => {
                write!(
                    f,
                    "advantage gap does not change sign across the delta bracket; sampled profile: "
                )?;
                for (d, g) in profile {
                    write!(f, "({d:.6}, {g:.3e}) ")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for Error {}
