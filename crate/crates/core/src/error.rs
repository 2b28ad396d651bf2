use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdent { name: String, offset: usize },

    #[error("domain error in `{expr}` at {at}: {reason}")]
    Domain {
        expr: String,
        at: f64,
        reason: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("speed falls below the null tolerance at u = {at}")]
    NullSegment { at: f64 },

    #[error("adaptive quadrature did not converge on [{lo}, {hi}]")]
    NonConvergence { lo: f64, hi: f64 },

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("tangent is null or timelike at u = {at}")]
    NullTangent { at: f64 },

    #[error("first curvature vanishes at u = {at} (k1 = {k})")]
    DegenerateK1 { at: f64, k: f64 },

    #[error("second curvature vanishes at u = {at} (k2 = {k})")]
    DegenerateK2 { at: f64, k: f64 },

    #[error("third curvature vanishes at u = {at} (k3 = {k})")]
    DegenerateK3 { at: f64, k: f64 },

    #[error("frame sign {which} is not close to +-1 at u = {at} (projection {value})")]
    InconsistentSign {
        which: &'static str,
        at: f64,
        value: f64,
    },

    #[error("mu1*k1^2 + mu2*k2^2 vanishes ({value})")]
    DegenerateDenominator { value: f64 },

    #[error("causal case changes along the grid: {0}")]
    CaseChange(String),

    #[error("mate curve is irregular (speed {speed}) near u = {at}")]
    MateIrregular { at: f64, speed: f64 },

    #[error("mate curve is not a special Frenet curve at {0}")]
    MateNotFrenet(String),

    #[error("hypothesis e4* = -+e2 not met: {0}")]
    HypothesisNotMet(String),

    #[error("inner factor -A + AC - B^2 vanishes at u = {at} ({value})")]
    SingularInner { at: f64, value: f64 },

    #[error("degenerate family member: k2 vanishes at every probe")]
    DegenerateMember,

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code used in CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "Syntax",
            Error::UnknownIdent { .. } => "UnknownIdent",
            Error::Domain { .. } => "Domain",
            Error::InvalidInput(_) => "InvalidInput",
            Error::NullSegment { .. } => "NullSegment",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NullTangent { .. } => "NullTangent",
            Error::DegenerateK1 { .. } => "DegenerateK1",
            Error::DegenerateK2 { .. } => "DegenerateK2",
            Error::DegenerateK3 { .. } => "DegenerateK3",
            Error::InconsistentSign { .. } => "InconsistentSign",
            Error::DegenerateDenominator { .. } => "DegenerateDenominator",
            Error::CaseChange(_) => "CaseChange",
            Error::MateIrregular { .. } => "MateIrregular",
            Error::MateNotFrenet(_) => "MateNotFrenet",
            Error::HypothesisNotMet(_) => "HypothesisNotMet",
            Error::SingularInner { .. } => "SingularInner",
            Error::DegenerateMember => "DegenerateMember",
            Error::Io(_) => "Io",
        }
    }

    /// Input errors map to exit code 2, numerical failures to 3.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownIdent { .. }
                | Error::Domain { .. }
                | Error::InvalidInput(_)
                | Error::OutOfRange { .. }
                | Error::Io(_)
        )
    }
}
