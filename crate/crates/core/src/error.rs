use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Best operating point found by a search that never met the error target.
#[derive(Debug, Clone, PartialEq)]
pub struct Shortfall {
    /// Parameter at which the smallest bound was observed (slot count or threshold).
    pub at: f64,
    /// Smallest error bound found (including any Monte Carlo margin).
    pub best_bound: f64,
    pub target: f64,
}

impl fmt::Display for Shortfall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "best bound {:.4e} at {} exceeds target {:.4e}",
            self.best_bound, self.at, self.target
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {constraint}")]
    Config { field: String, constraint: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("infeasible: {0}")]
    Infeasible(Shortfall),

    /// The trajectories were truncated below the threshold the search needed.
    #[error("trajectories censored at {ceiling} nats are too short for this search")]
    Censored { ceiling: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            constraint: constraint.into(),
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
