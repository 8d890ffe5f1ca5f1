use thiserror::Error;

/// Everything that can go wrong while configuring or running a simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// The configuration document is not well formed or violates the schema.
    #[error("config parse error: {0}")]
    Parse(String),

    /// The configuration parsed but describes an unphysical or unsupported system.
    #[error("invalid configuration: {0}")]
    Validation(String),

    /// A function was evaluated outside its domain (e.g. the kernel at zero separation).
    #[error("domain error: {0}")]
    Domain(String),

    /// Bad argument to a library call (unknown atom, index out of range, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The requested state space does not fit into the configured memory cap.
    #[error("capacity exceeded: basis of dimension {dim} needs ~{required_bytes} bytes, cap is {cap_bytes} bytes")]
    Capacity {
        dim: usize,
        required_bytes: u64,
        cap_bytes: u64,
    },

    /// NaN/Inf during integration or a failed decomposition.
    #[error("numerical failure: {message}")]
    Numerical { message: String, dump: String },

    /// A decay run stopped making progress.
    #[error("decay did not complete: {message} (slowest collective rate {slowest_rate:.3e} Γ)")]
    Timeout { message: String, slowest_rate: f64 },

    /// A driven run never reached an electronic steady state.
    #[error("no steady state by t = {t_max} / Γ: {diagnostic}")]
    NoConvergence { t_max: f64, diagnostic: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Validation(_) => "validation",
            Error::Domain(_) => "domain",
            Error::Argument(_) => "argument",
            Error::Capacity { .. } => "capacity",
            Error::Numerical { .. } => "numerical",
            Error::Timeout { .. } => "timeout",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Io(_) => "io",
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Validation(_) | Error::Argument(_) => 2,
            Error::Domain(_)
            | Error::Numerical { .. }
            | Error::Timeout { .. }
            | Error::NoConvergence { .. } => 3,
            Error::Capacity { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
