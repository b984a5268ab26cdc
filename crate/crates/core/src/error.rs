use std::fmt;

use thiserror::Error;

/// A direction in parameter space along which the data carry (almost) no
/// information.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDirection {
    /// Singular value of the stacked Jacobian along this direction,
    /// relative to the largest one.
    pub relative_singular_value: f64,
    /// Parameter names with their (unit-norm) coefficients. Entries below
    /// 1e-3 in magnitude are dropped.
    pub components: Vec<(String, f64)>,
}

impl fmt::Display for NullDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, c)) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(if *c < 0.0 { " - " } else { " + " })?;
                write!(f, "{:.3}*{}", c.abs(), name)?;
            } else {
                write!(f, "{:.3}*{}", c, name)?;
            }
        }
        write!(f, " (rel. s.v. {:.1e})", self.relative_singular_value)
    }
}

fn join_directions(dirs: &[NullDirection]) -> String {
    dirs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{source_name}:{line}: {field}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        field: String,
        message: String,
    },

    #[error("parameters are not identifiable from this data; null-space directions: {}", join_directions(.directions))]
    NotIdentifiable { directions: Vec<NullDirection> },

    #[error("identification did not converge after {iterations} iterations (correction history: {history:?})")]
    NonConvergence {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("non-finite Jacobian entry for parameter `{parameter}`")]
    Numerical { parameter: String },

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("campaign failed: {failed} of {trials} trials could not be identified")]
    CampaignFailed { failed: usize, trials: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(
        source_name: &str,
        line: usize,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the numbers rather than by malformed input:
    /// singular plans, non-convergence, failed campaigns.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(
            self,
            Error::NotIdentifiable { .. }
                | Error::NonConvergence { .. }
                | Error::Infeasible(_)
                | Error::CampaignFailed { .. }
                | Error::Numerical { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
