use thiserror::Error;

/// Errors produced by kernel/volume evaluators and the numerical oracles.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its validity interval (bad `m`, `b`, tolerance, ...).
    #[error("parameter error: {0}")]
    Param(String),

    /// An evaluation point is on or outside the domain boundary.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature did not reach the requested tolerance. Carries the
    /// partial value and its error estimate.
    #[error("quadrature did not converge: value={value}, err_est={err_est}")]
    Convergence { value: f64, err_est: f64 },

    /// The shadow boundary polyline is not a simple star-shaped curve.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Too many gauge directions had no chart solution.
    #[error("gauge coverage error: {failed} of {total} directions unsolved")]
    Coverage { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the CLI (0 ok, 1 verify failure, 2 bad
    /// parameters, 3 non-convergence, 4 i/o).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Param(_) | Error::Domain(_) => 2,
            Error::Convergence { .. } | Error::Geometry(_) | Error::Coverage { .. } => 3,
            Error::Io(_) => 4,
        }
    }
}
