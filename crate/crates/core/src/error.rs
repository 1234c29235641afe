use txt2pi::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),
    #[error("no valid assignment exists in the {0} split")]
    SplitExhausted(String),
    #[error("step called on a finished episode")]
    SteppedAfterDone,
    #[error("alphabet has {0} characters, need at least 3")]
    AlphabetTooSmall(usize),
    #[error("zero denominator: {0}")]
    DivisionDomain(String),
    #[error("template pack: {0}")]
    Pack(String),
    #[error("cannot parse statement {0:?}")]
    Unparseable(String),
    #[error("statement {0:?} matches more than one reading")]
    AmbiguousTemplate(String),
    #[error("document has no statement for {0}")]
    MissingStatement(String),
    #[error("document states {0} more than once")]
    ConflictingStatement(String),
    #[error("no plan: {0}")]
    NoPlan(String),
    #[error("log version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("replay diverged: {0}")]
    ReplayMismatch(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
