use thiserror::Error;

pub type Result<T, E = IspError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IspError {
    #[error("{name} = {value} is outside the domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("could not bracket the first zero of {kind}_{order}: {detail}")]
    Bracketing {
        kind: &'static str,
        order: u32,
        detail: String,
    },

    #[error("quadrature did not converge (achieved relative tolerance {achieved:.3e})")]
    Quadrature { achieved: f64 },

    #[error("negative radicand {value:.3e} in A_{order}({kappa0})")]
    NegativeRadicand { order: i64, kappa0: f64, value: f64 },

    #[error("spectrum horizon {horizon} is too short for kappa0 = {kappa0}: {detail}")]
    Horizon {
        horizon: usize,
        kappa0: f64,
        detail: String,
    },

    #[error("mode {mode} is degenerate: A_|m|(kappa0) = 0")]
    DegenerateMode { mode: i64 },

    #[error("singular value of mode {mode} is not invertible (underflow)")]
    SigmaUnderflow { mode: i64 },

    #[error("{samples} boundary samples cannot resolve {modes} modes without aliasing (need at least {required})")]
    Aliasing {
        samples: usize,
        modes: usize,
        required: usize,
    },

    #[error("no stable band: lower bandwidth bound is 0 for kappa0 = {kappa0}")]
    NoStableBand { kappa0: f64 },

    #[error("malformed csv at line {line}: {detail}")]
    Csv { line: usize, detail: String },
}

impl IspError {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        IspError::Domain {
            name,
            value,
            reason,
        }
    }

    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            IspError::Bracketing { .. }
                | IspError::Quadrature { .. }
                | IspError::NegativeRadicand { .. }
                | IspError::DegenerateMode { .. }
                | IspError::SigmaUnderflow { .. }
        )
    }
}
