use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside the domain")]
    Domain { what: &'static str, value: f64 },

    #[error("unsupported Debye pair (m={m}, k={k})")]
    UnsupportedPair { m: u32, k: u32 },

    #[error("quadrature budget of {budget} subdivisions exhausted")]
    QuadratureBudget { budget: usize },

    #[error("{what} did not converge within {budget} terms")]
    NonConvergent { what: &'static str, budget: usize },

    #[error("n = {n} is outside the supported range {lo}..={hi}")]
    OutOfRange { n: usize, lo: usize, hi: usize },

    #[error("root finder failed: {0}")]
    RootFinder(String),

    #[error("argument {re}+{im}i lies outside the sector |arg v| <= pi/4")]
    Sector { re: f64, im: f64 },

    #[error("invalid sampler configuration: {0}")]
    SamplerConfig(String),

    #[error("no sample of size {n} after {attempts} attempts")]
    RejectionBudget { n: usize, attempts: u64 },

    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
