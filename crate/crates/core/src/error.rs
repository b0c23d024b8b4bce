use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two divided-difference nodes are (nearly) coincident; the plain
    /// recursion cannot be used on them.
    #[error("nodes {first} and {second} are degenerate (separation {separation:e})")]
    DegenerateNodes { first: usize, second: usize, separation: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("step size underflow at t = {t}: {reason}")]
    Stiffness { t: f64, reason: String },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("config parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
