use thiserror::Error;

use crate::engine::{IllegalReason, MoveDescriptor};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("q_{index} does not fit in 64 bits; the largest representable index is {safe_bound}")]
    Overflow { index: usize, safe_bound: usize },

    #[error("illegal move {mv}: {reason}")]
    IllegalMove {
        mv: MoveDescriptor,
        reason: IllegalReason,
    },

    #[error("move {step}: {source}")]
    Replay { step: usize, source: Box<Error> },

    #[error("game is not finished after {moves} moves")]
    Unfinished { moves: usize },

    #[error(
        "search budget of {budget} states exceeded \
         (largest completed frontier: {completed_frontier} states)"
    )]
    ResourceLimit {
        budget: usize,
        completed_frontier: usize,
    },

    #[error("degenerate distribution: standard deviation is zero")]
    DegenerateDistribution,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}
