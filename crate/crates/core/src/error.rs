use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid representation: {0}")]
    Representation(String),
    #[error("point lies outside dom h")]
    Domain,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("evaluation error in component {component}: {msg}")]
    Evaluation { component: usize, msg: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("membership error: {0}")]
    Membership(String),
    #[error("only one piece is active; use the smooth solver")]
    SmoothCase,
    #[error("step error: {0}")]
    Step(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("schema error at {pointer}: {msg}")]
    Schema { pointer: String, msg: String },
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
