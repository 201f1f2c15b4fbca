use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("formula is not co-safe: {0}")]
    NotCoSafe(String),
    #[error("atom `{0}` is used by the formula but not declared")]
    AtomNotDeclared(String),
    #[error("at most {max} atoms are supported, got {got}")]
    TooManyAtoms { got: usize, max: usize },
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("observation for state {state} is not one of its possible patterns")]
    InvalidKnowledge { state: usize },
    #[error("state {state} was already observed with a different successor set")]
    InconsistentKnowledge { state: usize },
    #[error("{count} unknown states exceed the enumeration cap of {cap}")]
    TooManyUnknowns { count: usize, cap: usize },
    #[error("label atom `{0}` is not part of the automaton alphabet")]
    AtomMismatch(String),
    #[error("negative edge weight on {from} -> {to}")]
    NegativeWeight { from: usize, to: usize },

    #[error("arena exceeds the cap of {cap} vertices")]
    ArenaTooLarge { cap: usize },
    #[error("not a play: step {step} is not an arena edge")]
    NotAPlay { step: usize },

    #[error("no strategy is guaranteed to satisfy the task")]
    UnrealizableTask,
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("environment is not compatible with the model: {0}")]
    IncompatibleEnvironment(String),
    #[error("strategy has no decision for state {x} (automaton state {q})")]
    StrategyIncomplete { x: usize, q: usize },
    #[error("strategy does not terminate within {steps} steps")]
    NonTermination { steps: usize },
    #[error("strategy moves from {from} to {to}, which is not an available transition")]
    IllegalMove { from: usize, to: usize },
    #[error("no accepting path is left from state {x} under current knowledge")]
    StuckNoPath { x: usize },

    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),
    #[error("no admissible instance found after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("malformed grid at line {line}: {msg}")]
    MalformedGrid { line: usize, msg: String },
    #[error("unknown glyph `{ch}` at line {line}, column {col}")]
    UnknownGlyph { line: usize, col: usize, ch: char },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "SyntaxError",
            Error::NotCoSafe(_) => "NotCoSafe",
            Error::AtomNotDeclared(_) => "AtomNotDeclared",
            Error::TooManyAtoms { .. } => "TooManyAtoms",
            Error::InvalidAutomaton(_) => "InvalidAutomaton",
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvalidKnowledge { .. } => "InvalidKnowledge",
            Error::InconsistentKnowledge { .. } => "InconsistentKnowledge",
            Error::TooManyUnknowns { .. } => "TooManyUnknowns",
            Error::AtomMismatch(_) => "AtomMismatch",
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::ArenaTooLarge { .. } => "ArenaTooLarge",
            Error::NotAPlay { .. } => "NotAPlay",
            Error::UnrealizableTask => "UnrealizableTask",
            Error::Invariant(_) => "Invariant",
            Error::IncompatibleEnvironment(_) => "IncompatibleEnvironment",
            Error::StrategyIncomplete { .. } => "StrategyIncomplete",
            Error::NonTermination { .. } => "NonTermination",
            Error::IllegalMove { .. } => "IllegalMove",
            Error::StuckNoPath { .. } => "StuckNoPath",
            Error::SearchSpaceTooLarge(_) => "SearchSpaceTooLarge",
            Error::GenerationFailed { .. } => "GenerationFailed",
            Error::MalformedGrid { .. } => "MalformedGrid",
            Error::UnknownGlyph { .. } => "UnknownGlyph",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
