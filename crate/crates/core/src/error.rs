use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("budget exhausted: {placed} of {requested} holes placed before radii fell below {min_radius:e}")]
    BudgetExhausted {
        placed: usize,
        requested: usize,
        min_radius: f64,
    },

    #[error("transversality unachievable for hole {hole} after {attempts} placements")]
    TransversalityUnachievable { hole: usize, attempts: usize },

    #[error("degenerate arrangement: circles {a} and {b} ({reason})")]
    DegenerateArrangement { a: usize, b: usize, reason: String },

    #[error("missing dictionary entry g[{level},{index}]")]
    MissingDictionary { level: usize, index: usize },

    #[error("zero-free certification failed at level {level} after {attempts} attempts")]
    ZeroFreeCertificationFailed { level: usize, attempts: usize },

    #[error("function vanishes on region (|f| = {modulus:e} at z1 = {at})")]
    ZeroOnRegion { at: Complex64, modulus: f64 },

    #[error("no admissible cut level after {attempts} candidates (stage {stage})")]
    NoAdmissibleCut { stage: usize, attempts: usize },

    #[error("no regular value found after {attempts} candidates (stage {stage})")]
    NoRegularValue { stage: usize, attempts: usize },

    #[error("path passes within {distance:e} of a zero or pole at z1 = {at}")]
    SingularityProximity { at: Complex64, distance: f64 },

    #[error("adaptive step collapsed near z1 = {at}")]
    StepCollapse { at: Complex64 },

    #[error("fiber undefined: f_{stage} vanishes at z1 = {at}")]
    ZeroOfF { stage: usize, at: Complex64 },

    #[error("cut-curve tracing diverged near z1 = {at}: {reason}")]
    TracingDivergence { at: Complex64, reason: String },

    #[error("integrand pole within {distance:e} of the contour at z1 = {at}")]
    PoleProximity { at: Complex64, distance: f64 },

    #[error("unsupported document version {found} (expected major {expected})")]
    UnsupportedVersion { found: String, expected: u32 },

    #[error("stage {stage} not available (tower has {built} stages)")]
    StageOutOfRange { stage: usize, built: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether a seeded search ran out of candidates (as opposed to bad input).
    pub fn is_retry_exhaustion(&self) -> bool {
        matches!(
            self,
            Error::BudgetExhausted { .. }
                | Error::TransversalityUnachievable { .. }
                | Error::ZeroFreeCertificationFailed { .. }
                | Error::NoAdmissibleCut { .. }
                | Error::NoRegularValue { .. }
        )
    }
}
