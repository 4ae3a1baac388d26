use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("vertex index {index} out of range for {n} vertices")]
    InvalidVertex { index: usize, n: usize },

    #[error("unknown vertex label `{0}`")]
    UnknownLabel(String),

    #[error("vertex set is empty")]
    EmptyVertexSet,

    #[error("function has {got} entries, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at vertex {0}")]
    NonFinite(usize),

    #[error("p must exceed 1 (got {0})")]
    InvalidExponent(f64),

    #[error("Lebesgue exponent q must be at least 1 (got {0})")]
    InvalidLebesgueExponent(f64),

    #[error("potential is negative at vertex {0}")]
    NegativePotential(usize),

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("zero function has no Rayleigh quotient")]
    ZeroFunction,

    #[error("positive part vanishes identically; no Nehari projection exists")]
    NoPositivePart,

    #[error("H_p norm vanishes; no Nehari projection exists")]
    ZeroNorm,

    #[error("energy evaluation overflowed")]
    Overflow,

    #[error("t must be positive (got {0})")]
    NonPositiveScale(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("graph too large for exhaustive search ({n} vertices, limit {limit})")]
    GraphTooLarge { n: usize, limit: usize },

    #[error("no seed converged (best energy {best_energy}, residual {best_residual})")]
    NoConvergence {
        best_energy: f64,
        best_residual: f64,
    },

    #[error("mountain-pass path collapsed repeatedly")]
    PathCollapse,

    #[error("invalid potential well: {0}")]
    InvalidWell(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
