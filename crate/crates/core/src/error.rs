use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (max |a_ij - conj(a_ji)| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("Hamiltonian must be diagonal (max off-diagonal modulus {deviation:e})")]
    NotDiagonal { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("state is no longer a valid density matrix at iteration {iteration}: {reason}")]
    StateDrift { iteration: usize, reason: String },

    #[error("unknown metric '{0}'")]
    UnknownMetric(String),

    #[error("iterations M = {iterations} is not a multiple of root N = {root}")]
    NotWholeCycles { iterations: usize, root: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
