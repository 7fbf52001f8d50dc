use thiserror::Error;

/// Errors raised by the library. Domain errors only; usage errors belong to the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty domain")]
    EmptyDomain,
    #[error("image of element {element} is {image}, outside 0..{n}")]
    OutOfRangeImage { element: usize, image: usize, n: usize },
    #[error("element {element} out of range 0..{n}")]
    ElementOutOfRange { element: usize, n: usize },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("duplicate predicate `{0}`")]
    DuplicatePredicate(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("signature mismatch")]
    SignatureMismatch,
    #[error("restriction to an empty set")]
    EmptyRestriction,

    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("wrong arity for `{0}`")]
    Arity(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("formula is not clean")]
    NotClean,
    #[error("formula has an unguarded quantifier")]
    NotGuarded,
    #[error("eta is not functional at element {element}: {images} images")]
    EtaNotFunctional { element: usize, images: usize },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("cannot project rank {from} type to rank {to}")]
    RankIncrease { from: usize, to: usize },
    #[error("transport needs rank at least 1")]
    RankZero,
    #[error("rank too low: need at least {needed}, got {got}")]
    RankTooLow { needed: usize, got: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("realizability preconditions failed: {0}")]
    PreconditionFailed(String),
    #[error("greedy construction stuck at element {element}: {diagnostics}")]
    Stuck { element: usize, diagnostics: String },
    #[error("missing cut predicates: {0}")]
    MissingCutPredicates(String),
    #[error("no hub available for terminal type {0}")]
    NoHubAvailable(usize),
    #[error("hub elements {0} and {1} are too close")]
    HubsTooClose(usize, usize),
    #[error("terminal element {0} has fewer hub elements than copies")]
    InsufficientHubs(usize),
    #[error("schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
