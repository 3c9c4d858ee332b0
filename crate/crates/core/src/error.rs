use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Physics,
    Convergence,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("cannot parse quantity '{token}': {reason}")]
    Unit { token: String, reason: String },
    #[error("field point ({:.4e}, {:.4e}, {:.4e}) m lies on a conductor axis", .0[0], .0[1], .0[2])]
    Singular([f64; 3]),
    #[error("point ({:.4e}, {:.4e}, {:.4e}) m lies inside a surface or conductor", .0[0], .0[1], .0[2])]
    InsideSurface([f64; 3]),
    #[error("no trap minimum found: {0}")]
    NoMinimum(String),
    #[error("stationary point is a saddle (curvature eigenvalue {0:.3e} J/m^2)")]
    Saddle(f64),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Unit { .. } => ErrorKind::Config,
            Error::NonConvergence { .. } => ErrorKind::Convergence,
            _ => ErrorKind::Physics,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
