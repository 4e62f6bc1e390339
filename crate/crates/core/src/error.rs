use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operator {op} out of range or not applicable")]
    InvalidOperator { op: usize },
    #[error("malformed path: {0}")]
    MalformedPath(String),
    #[error("unsupported start mode: {0}")]
    UnsupportedMode(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("unsupported cost scheme: {0}")]
    UnsupportedScheme(String),
    #[error("invalid abstract state: {0}")]
    InvalidAbstractState(String),
    #[error("pattern database built for a different abstraction")]
    WrongPdb,
    #[error("corrupt pattern database: {0}")]
    CorruptPdb(String),
    #[error("unsupported symmetry: {0}")]
    UnsupportedSymmetry(String),
    #[error("pattern databases use different scales ({0} vs {1})")]
    ScaleMismatch(u64, u64),
    #[error("residual costs are not stored in this pattern database")]
    ResidualsUnavailable,
    #[error("no pattern databases supplied")]
    MissingPdb,
    #[error("budget exceeded: {what} (generated {generated}, expanded {expanded})")]
    BudgetExceeded {
        what: String,
        generated: u64,
        expanded: u64,
    },
    #[error("goal unreachable from start")]
    Unsolvable,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown abstract state `{0}`")]
    UnknownAbstractState(String),
    #[error("value {0} does not fit the table word")]
    WordOverflow(u64),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
