use std::fmt;

use nodesel::Error;

/// Failure of a subcommand, classified by exit code.
#[derive(Clone, Debug)]
pub enum CliError {
    /// Bad flags or inputs (exit 2).
    Usage(String),
    /// Empty feasible set or unreachable threshold (exit 3).
    Infeasible(String),
    /// Numerical failure inside a solver (exit 4).
    Solver(String),
    /// `--verify-row` replay differs from the recorded row (exit 1).
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Mismatch(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        if e.is_infeasibility() {
            return CliError::Infeasible(msg);
        }
        match e.root() {
            Error::Singular | Error::ProjectionNonConvergence { .. } => CliError::Solver(msg),
            _ => CliError::Usage(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let code = |e: Error| CliError::from(e).exit_code();
        assert_eq!(code(Error::Singular), 4);
        assert_eq!(code(Error::ProjectionNonConvergence { sweeps: 3, residual: 1.0 }), 4);
        assert_eq!(code(Error::Infeasible("x".into())), 3);
        assert_eq!(code(Error::RhoInfeasible { rho: 1.0, best: 2.0 }), 3);
        assert_eq!(code(Error::InfeasibleInformation("x".into())), 3);
        assert_eq!(code(Error::Domain("x".into())), 2);
        assert_eq!(code(Error::TooManySubsets { count: 10, cap: 1 }), 2);
        assert_eq!(CliError::Mismatch("x".into()).exit_code(), 1);
    }
}
