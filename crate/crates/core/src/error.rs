use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-finite input to expit: {0}")]
    NonFinite(f64),

    #[error("conditioning event {{{event}}} has probability zero")]
    DegenerateEvent { event: String },

    #[error(
        "odds ratio undefined for risks ({risk1}, {risk0}): a risk lies on the boundary of [0, 1]"
    )]
    UndefinedOdds { risk1: f64, risk0: f64 },

    #[error("Monte Carlo subset {{{subset}}} has {count} samples, fewer than the minimum {min}")]
    SubsetTooSmall {
        subset: String,
        count: u64,
        min: u64,
    },

    #[error("Monte Carlo sample size {n} is below the minimum {min}")]
    SampleSizeTooSmall { n: u64, min: u64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("{estimand}: {source}")]
    Estimand {
        estimand: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by a parameter vector whose law puts zero mass
    /// on a conditioning event (as opposed to malformed input).
    pub fn is_degenerate(&self) -> bool {
        match self {
            Error::DegenerateEvent { .. }
            | Error::UndefinedOdds { .. }
            | Error::SubsetTooSmall { .. } => true,
            Error::Estimand { source, .. } => source.is_degenerate(),
            _ => false,
        }
    }
}
