use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty contact region")]
    EmptyContactRegion,

    #[error("empty point set")]
    EmptyPointSet,

    #[error("non-compressive field (total normal force {total_normal_force} N)")]
    NonCompressiveField { total_normal_force: f64 },

    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: String,
    },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("obstacle of height {height} m cannot be reached by a sole of length {sole_length} m")]
    ObstacleTooTall { height: f64, sole_length: f64 },

    #[error("degenerate arch geometry: b*sin(alpha+beta) = {value}")]
    DegenerateArch { value: f64 },

    #[error("singular matrix (reciprocal condition estimate {rcond:e})")]
    SingularMatrix { rcond: f64 },

    #[error("constraint degeneracy: reduced constraint matrix is singular (rcond {rcond:e})")]
    ConstraintDegeneracy { rcond: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence {
        iterations: usize,
        best_residual: f64,
        best_iterate: Vec<f64>,
        residual_history: Vec<f64>,
    },

    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("total vertical force is not positive ({total} N)")]
    ZeroVerticalForce { total: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            constraint: constraint.into(),
        }
    }
}
