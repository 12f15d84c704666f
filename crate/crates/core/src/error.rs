//! Crate-wide error type. Variants carry the module name so batch drivers
//! can surface module-qualified codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic: rational frequency (continued fraction terminated at depth {depth})")]
    RationalFrequency { depth: usize },

    #[error("arithmetic: insufficient depth (need index {needed}, stored {stored})")]
    InsufficientDepth { needed: usize, stored: usize },

    #[error("arithmetic: {0}")]
    BadFrequencyInput(String),

    #[error("model: phase lies outside the analyticity strip (|Im| = {im_abs} > eps0 = {eps0})")]
    OutOfStrip { im_abs: f64, eps0: f64 },

    #[error("model: not in localization regime (L = {lyapunov} <= beta = {beta})")]
    NotInLocalizationRegime { lyapunov: f64, beta: f64 },

    #[error("annulus: point outside the closed annulus (|z| = {modulus}, R = {radius})")]
    OutsideAnnulus { modulus: f64, radius: f64 },

    #[error("annulus: {0}")]
    BadAnnulusInput(String),

    #[error("annulus: zero inventory inconsistent with argument-principle count (count {count}, located {located})")]
    InventoryIntegrity { count: i64, located: usize },

    #[error("annulus: family structure not detected ({0})")]
    FamilyStructure(String),

    #[error("zeros: function vanishes on the contour and nudging failed")]
    ZeroOnContour,

    #[error("zeros: phase-tracking step rejected (function varies too fast for the node budget)")]
    PhaseTracking,

    #[error("zeros: winding number did not stabilize to an integer (got {winding})")]
    NonIntegerWinding { winding: f64 },

    #[error("zeros: expected count {expected}, argument principle gives {actual}")]
    UnexpectedZeroCount { expected: i64, actual: i64 },

    #[error("zeros: zero inventory unavailable at this scale")]
    InventoryUnavailable,

    #[error("acceleration: window too narrow ({points} grid points in window, need at least 4)")]
    WindowTooNarrow { points: usize },

    #[error("deviation: grid insufficient ({0})")]
    GridInsufficient(String),

    #[error("deviation: regime check failed: {0}")]
    Regime(String),

    #[error("localization: resonant interval (log-denominator {log_den} below floor)")]
    ResonantInterval { log_den: f64 },

    #[error("localization: overlapping resonant regimes (delta1 too large)")]
    OverlappingRegimes,

    #[error("localization: {0}")]
    BadBox(String),

    #[error("{module}: invalid argument: {message}")]
    InvalidArgument {
        module: &'static str,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(module: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            module,
            message: message.into(),
        }
    }
}
