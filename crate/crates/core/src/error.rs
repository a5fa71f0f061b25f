use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// The serving point sits at the farthest reachable distance, so the
    /// conditional interferer law has no mass left.
    #[error("degenerate conditioning: F_R(r_0) = 1 at r_0 = {r0}")]
    DegenerateCondition { r0: f64 },

    #[error("quadrature did not converge in {context}: error {error:.3e} > tolerance {tolerance:.3e}")]
    Quadrature {
        context: String,
        error: f64,
        tolerance: f64,
    },

    #[error("jet order {have} is below the required order {need}")]
    OrderMismatch { have: usize, need: usize },

    #[error("scenario parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Prefixes the context of a quadrature failure so nested integrals
    /// report which sub-integral gave up.
    pub fn within(self, outer: &str) -> Self {
        match self {
            Error::Quadrature {
                context,
                error,
                tolerance,
            } => Error::Quadrature {
                context: format!("{outer} / {context}"),
                error,
                tolerance,
            },
            other => other,
        }
    }
}
