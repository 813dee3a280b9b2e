use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scenario, uncertainty model or parameter set violates an invariant.
    /// `field` is a dotted path into the offending structure.
    #[error("validation failed at `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("cannot construct scenario: {0}")]
    Construction(String),

    #[error("argument outside its domain: {0}")]
    Domain(String),

    /// The constraint set itself is empty (selection counts, budgets).
    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    /// No relaxed point with finite objective could be found.
    #[error("no selection with finite CRLB found: {0}")]
    InfeasibleInformation(String),

    /// No point satisfies the eavesdropper CRLB threshold of the joint problem.
    #[error("eavesdropper CRLB threshold rho = {rho} unreachable (best relaxed value {best})")]
    RhoInfeasible { rho: f64, best: f64 },

    #[error("information matrix is singular at the evaluation point; move the point into the interior")]
    Singular,

    #[error("projection did not converge after {sweeps} sweeps (residual {residual:e})")]
    ProjectionNonConvergence { sweeps: usize, residual: f64 },

    #[error("exhaustive search refused: {count} candidate subsets exceed the cap of {cap}")]
    TooManySubsets { count: u128, cap: u128 },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by an empty feasible region or an unreachable
    /// threshold, as opposed to numerical failures or bad input.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self.root(),
            Error::Infeasible(_) | Error::InfeasibleInformation(_) | Error::RhoInfeasible { .. }
        )
    }
}
