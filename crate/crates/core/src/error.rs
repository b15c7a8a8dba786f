use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid star graph: {0}")]
    InvalidGraph(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    /// The leapfrog stability bound `dt * omega_max < 2` is violated.
    #[error(
        "CFL bound violated: dt * omega_max = {product} >= 2 (dt = {dt}, omega_max = {omega_max})"
    )]
    Cfl {
        dt: f64,
        omega_max: f64,
        product: f64,
    },

    #[error("field state shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite entry in field state: {0}")]
    NonFinite(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid wave packet: {0}")]
    InvalidPacket(String),

    #[error("integration blew up at step {step} (max |phi| = {max_abs:e})")]
    BlowUp { step: u64, max_abs: f64 },

    #[error("experiment invalid: {0}")]
    ExperimentInvalid(String),

    #[error("no single {kind} constant fits the phases (max cross residual {max_residual:e})")]
    InconsistentFamily {
        kind: &'static str,
        max_residual: f64,
    },

    #[error("junction family {0} has no lattice realisation")]
    UnsupportedFamily(String),
}
