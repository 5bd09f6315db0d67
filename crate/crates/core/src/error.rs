use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("invalid material data: {0}")]
    Material(String),

    #[error("reluctivity evaluated at negative flux density {0}")]
    NegativeFluxDensity(f64),

    #[error("reluctivity table line {line}: {msg}")]
    Table { line: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("zero pivot in tridiagonal factorization at row {row}")]
    SingularTridiagonal { row: usize },

    #[error("vanishing Schur complement ({value:e}) in bordered solve")]
    ZeroSchur { value: f64 },

    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("time step failed at index {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid time grid: {0}")]
    TimeGrid(String),

    #[error("invalid hierarchy: {0}")]
    Hierarchy(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("worker {worker} failed: {source}")]
    Worker {
        worker: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed message: {0}")]
    Message(String),

    #[error("config line {line}: key `{key}`: {msg}")]
    Config { line: usize, key: String, msg: String },

    #[error("config: {0}")]
    ConfigFile(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn at_step(self, index: usize) -> Error {
        Error::Step {
            index,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
