use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("nested loop at {line}:{column}: loop bodies must not contain loops")]
    NestedLoop { line: usize, column: usize },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("mapping is not solvable: variables {} depend nonlinearly on themselves", .cycle.join(" -> "))]
    NotSolvable { cycle: Vec<String> },

    #[error("degree {degree} is too small: monomial `{monomial}` cannot be linearized")]
    DegreeTooSmall { degree: u32, monomial: String },

    #[error("size limit exceeded: {what} has dimension {size} (cap {cap})")]
    SizeLimit {
        what: String,
        size: usize,
        cap: usize,
    },

    #[error("families are expressed over different monomial bases")]
    BasisMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. } | Error::NestedLoop { .. } => 2,
            Error::NotSolvable { .. } => 3,
            Error::SizeLimit { .. } => 4,
            Error::DegreeTooSmall { .. } => 5,
            Error::UnboundVariable(_) | Error::BasisMismatch => 6,
            Error::Io(_) | Error::InvalidArgument(_) => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
