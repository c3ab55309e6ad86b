use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Pipeline stage an error originated from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Stage {
    GaussianFit,
    LikelihoodChoice,
    EtaEstimation,
    SecondStepFit,
    Covariance,
    Aggregation,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::GaussianFit => "gaussian_fit",
            Stage::LikelihoodChoice => "likelihood_choice",
            Stage::EtaEstimation => "eta_estimation",
            Stage::SecondStepFit => "second_step_fit",
            Stage::Covariance => "covariance",
            Stage::Aggregation => "aggregation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge: achieved relative error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("no sign change of the estimating equation on [{lo:e}, {hi:e}]; the likelihood/innovation pair violates the tail condition")]
    NoBracket { lo: f64, hi: f64 },

    #[error("root refinement did not converge after {iterations} iterations")]
    RootNotConverged { iterations: usize },

    #[error("matrix is singular or not positive definite at `{parameter}`")]
    Singular { parameter: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// True for failures of an iterative numerical method rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Quadrature { .. }
            | Error::NoBracket { .. }
            | Error::RootNotConverged { .. }
            | Error::Singular { .. }
            | Error::Degenerate(_) => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
