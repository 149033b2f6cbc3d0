use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("fault targets gate {0}, which has no path to any output")]
    DeadFaultSite(usize),

    #[error("seed has {gates} gates but the layout holds at most {max}")]
    SeedTooLarge { gates: usize, max: usize },

    #[error("seed does not match layout: {0}")]
    SeedMismatch(String),

    #[error("genotype layouts differ")]
    LayoutMismatch,

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("no unlocked {0} left to mutate")]
    AllLocked(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{format} line {line}: {msg}")]
    Parse {
        format: &'static str,
        line: usize,
        msg: String,
    },

    #[error("malformed {format}: {msg}")]
    Malformed { format: &'static str, msg: String },

    #[error("cannot select from an empty population")]
    EmptyPopulation,

    #[error("migration needs at least two islands")]
    SingletonGrid,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid hex genotype: {0}")]
    Hex(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(format: &'static str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            format,
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn malformed(format: &'static str, msg: impl Into<String>) -> Self {
        Error::Malformed {
            format,
            msg: msg.into(),
        }
    }
}
