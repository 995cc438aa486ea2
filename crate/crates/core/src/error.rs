use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("degenerate evolution: norm {norm:.3e} at t = {t}")]
    DegenerateEvolution { t: f64, norm: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    Stiffness { t: f64, h: f64 },

    #[error("post-selection starved: probability {probability:.3e}")]
    PostSelectionStarved { probability: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
