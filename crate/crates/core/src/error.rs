use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("subsystem label `{0}` appears in both factors")]
    LabelCollision(String),
    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),
    #[error("subsystem `{label}` has dimension {dim}, expected {expected}")]
    WrongDimension {
        label: String,
        dim: usize,
        expected: usize,
    },
    #[error("amplitude vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operator and state are defined over different subsystems")]
    DimsMismatch,
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("conditioning on a zero-amplitude branch")]
    EmptyBranch,
    #[error("unknown pointer label `{label}` for subsystem `{subsystem}`")]
    UnknownPointerLabel { subsystem: String, label: String },
    #[error("comparer `{0}` is not in its ready state")]
    ComparerNotReady(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("negative probability {value} at cell (a={a}, b={b}, A={x}, B={y})")]
    NegativeProbability {
        a: usize,
        b: usize,
        x: usize,
        y: usize,
        value: f64,
    },
    #[error("probability {value} above one at cell (a={a}, b={b}, A={x}, B={y})")]
    ProbabilityAboveOne {
        a: usize,
        b: usize,
        x: usize,
        y: usize,
        value: f64,
    },
    #[error("row (a={a}, b={b}) sums to {sum} (deficit {deficit})")]
    Normalization {
        a: usize,
        b: usize,
        sum: f64,
        deficit: f64,
    },
    #[error("table has {got} entries, scenario requires {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("invalid hidden-variable model: {0}")]
    InvalidModel(String),
    #[error("sign model supports at most 32 settings per side, got {0}")]
    TooManySettings(usize),

    #[error("expected two outcomes per side, scenario has {a} and {b}")]
    NonBinaryOutcomes { a: usize, b: usize },
    #[error("classical enumeration requires a 2x2 setting scenario, got {a}x{b}")]
    WrongScenarioShape { a: usize, b: usize },
    #[error("unknown setting `{0}`")]
    UnknownSetting(String),
    #[error("zero entry at lambda {lambda}, cell (a={a}, b={b}, A={x}, B={y}); strictly positive tables required")]
    PositivityViolation {
        lambda: usize,
        a: usize,
        b: usize,
        x: usize,
        y: usize,
    },
    #[error("scenario declares no parallel setting pair")]
    NoParallelPair,

    #[error("malformed timeline: {0}")]
    MalformedTimeline(String),
    #[error("region-3 slab [{lo}, {hi}] does not lie strictly before the measurements")]
    SlabNotBefore { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("could not parse input: {0}")]
    Parse(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
