//! Shared error type.

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// Resource guards (`JumpBlowup`, `LassoBoundExceeded`, `GameBudgetExceeded`,
/// `StateSpaceExceeded`) are deliberate refusals to start a computation whose
/// size bound was exceeded; they are distinct from malformed-input errors so
/// that callers (in particular the CLI) can map them to a dedicated exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// Syntactically invalid HOA input.
    #[error("HOA parse error at line {line}: {msg}")]
    MalformedHoa { line: usize, msg: String },

    /// HOA input uses an acceptance condition other than transition-based Büchi.
    #[error("unsupported acceptance condition: {0} (only `1 Inf(0)` Büchi is supported)")]
    UnsupportedAcceptance(String),

    /// More atomic propositions than the letter encoding supports.
    #[error("{0} atomic propositions exceed the supported maximum of 20")]
    TooManyAps(usize),

    /// An automaton failed structural validation.
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    /// The same transition triple occurs both accepting and non-accepting.
    #[error("conflicting transition: state {src} on letter {letter:#b} to state {dst} is declared both accepting and non-accepting")]
    ConflictingTransition { src: usize, letter: u32, dst: usize },

    /// Two automata that must share an alphabet do not.
    #[error("alphabet mismatch: left has APs {left:?}, right has APs {right:?}")]
    AlphabetMismatch { left: Vec<String>, right: Vec<String> },

    /// A subset image grew past the bound for enumerating its power set.
    #[error("jump enumeration refused: subset image has {size} states (> {limit}); pass singleton jumps or reduce the automaton")]
    JumpBlowup { size: usize, limit: usize },

    /// Bounded language comparison would enumerate too many lasso words.
    #[error("lasso enumeration refused: {count} words exceed the bound of {limit}")]
    LassoBoundExceeded { count: u128, limit: u64 },

    /// A simulation game grew past the configured node budget.
    #[error("simulation game exceeded the node budget of {budget} states")]
    GameBudgetExceeded { budget: usize },

    /// The strategy-enumeration game solver only handles tiny games.
    #[error("strategy enumeration refused: game has {states} states (> {limit})")]
    GameTooLargeForEnumeration { states: usize, limit: usize },

    /// A model expansion (e.g. from guarded commands) grew past its bound.
    #[error("state space exceeded the bound of {limit} states")]
    StateSpaceExceeded { limit: usize },

    /// Syntactically invalid explicit-MDP or guarded-command input.
    #[error("model parse error at line {line}: {msg}")]
    MalformedModel { line: usize, msg: String },

    /// An MDP failed structural validation.
    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    /// A probability distribution does not sum to one.
    #[error("distribution for state {state}, action {action} sums to {sum} (expected 1 within 1e-9)")]
    DistributionSum { state: usize, action: String, sum: f64 },

    /// A product or environment needs a single-initial-state automaton.
    #[error("operation requires an automaton with a single initial state, got {0}")]
    MultipleInitialStates(usize),

    /// The proposed reference automaton is not language-equivalent to the input.
    #[error("reference mismatch: lasso word {word} is accepted by {accepted} but not by {rejected}")]
    ReferenceMismatch { word: String, accepted: String, rejected: String },

    /// Invalid key=value configuration input.
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error is a deliberate size-bound refusal rather than a
    /// malformed input; callers map these to a dedicated exit code.
    pub fn is_resource_guard(&self) -> bool {
        matches!(
            self,
            Error::JumpBlowup { .. }
                | Error::LassoBoundExceeded { .. }
                | Error::GameBudgetExceeded { .. }
                | Error::StateSpaceExceeded { .. }
        )
    }
}
