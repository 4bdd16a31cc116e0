use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate {kind} name `{name}`")]
    Duplicate { kind: &'static str, name: String },

    #[error("invalid event table: {0}")]
    EventTable(String),

    #[error("state `{state}` already has a transition on event `{event}`")]
    Nondeterministic { state: String, event: String },

    #[error("index {index} out of range for {kind} (size {size})")]
    OutOfRange {
        kind: &'static str,
        index: usize,
        size: usize,
    },

    #[error("automata do not share one event table")]
    AlphabetMismatch,

    #[error("state order: {0}")]
    StateOrder(String),

    #[error("synthesis yields no supervisor: the initial state is removed")]
    EmptySupervisor,

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("unknown agent {0}")]
    UnknownAgent(usize),

    #[error("invalid agent mapping: {0}")]
    InvalidMapping(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("control equivalence violated: {0}")]
    NotEquivalent(String),
}
