use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unsupported fragment: {0}")]
    UnsupportedFragment(String),
    #[error("gap-order constraints combined with lookahead: monitoring such properties is not solvable in general")]
    UnsupportedGc,
    #[error("constraint graph exceeded the limit of {0} nodes; no finite summary established")]
    NodeLimit(usize),
    #[error("automaton exceeded the limit of {0} states")]
    StateLimit(usize),
    #[error("alphabet over {0} atoms exceeds the limit of {1}")]
    AtomLimit(usize, usize),
    #[error("trace: {0}")]
    Trace(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }
}
