use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used to pick a process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: parameters, configuration, or malformed amplitudes.
    Config,
    /// A numerical routine failed on valid input.
    Numerical,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "atomic Gaussian does not fit the m grid: need N_A/2 > 2*sigma_A + |m0|, \
         got N_A/2 = {half_count} and 2*sigma_A + |m0| = {required}"
    )]
    GaussianOutsideGrid { half_count: f64, required: f64 },

    #[error("atom number N_A = {0} must be even and positive (odd N_A gives half-integer m)")]
    OddAtomNumber(u32),

    #[error("two-index field amplitude at (s={s}, n={n}) violates |n| <= s with s - n even")]
    ParityViolation { s: i64, n: i64 },

    #[error("amplitudes are not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error(
        "Hermite mode k={k} is not representable on an integer grid \
         (half-wavelength {half_wavelength:.3} < 1)"
    )]
    ModeUnresolved { k: usize, half_wavelength: f64 },

    #[error("singular value decomposition of a {rows}x{cols} matrix did not converge")]
    Factorization { rows: usize, cols: usize },

    #[error("at tau = {tau}: {source}")]
    AtTau {
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Factorization { .. } => ErrorKind::Numerical,
            Error::AtTau { source, .. } => source.kind(),
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Config,
        }
    }

    pub(crate) fn at_tau(self, tau: f64) -> Error {
        Error::AtTau {
            tau,
            source: Box::new(self),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
