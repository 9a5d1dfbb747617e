//! The Fibonacci Quilt sequence and the two-player Fibonacci Quilt Game.
//!
//! The sequence 1, 2, 3, 4, 5, 7, 9, 12, 16, ... is the set of integers
//! placed on the log-cabin spiral where each new cell holds the smallest
//! integer with no sum of non-adjacent earlier cells. Decompositions that
//! avoid adjacent cells are called FQ-legal.
//!
//! The game starts from `n` copies of `q_1 = 1`. Each turn rewrites a pair
//! of terms that cannot coexist in an FQ-legal decomposition into one or
//! two terms that can, preserving the total. The player who makes the last
//! move wins.
//!
//! Module map:
//!
//! - [`sequence`]: term generation and identity checks.
//! - [`decomposition`]: FQ-legality, enumeration, `L(n)` / `l(n)`.
//! - [`engine`]: game states, the move table, move application.
//! - [`analysis`]: exhaustive search over the game graph.
//! - [`simulation`]: seeded random playouts and length statistics.
//! - [`replay`]: the line-oriented move log format.
//! - [`verify`]: the full invariant suite behind `fibquilt verify`.
//!
//! All interfaces use 1-based sequence indices, so `q(1) == 1`.

pub mod analysis;
pub mod decomposition;
pub mod engine;
mod error;
pub mod replay;
pub mod sequence;
pub mod simulation;
pub mod verify;

pub use analysis::{GameGraphSummary, Parities, SearchBudget};
pub use decomposition::{
    enumerate_decompositions, extremal_counts, is_fq_legal, sequence_from_definition,
    Decomposition, ExtremalCounts,
};
pub use engine::{GameRecord, GameState, IllegalReason, MoveDescriptor, Player, Rule, Variant};
pub use error::{Error, Result};
pub use sequence::{q, QuiltSequence};
pub use simulation::{LengthDistribution, MomentDiffs};
