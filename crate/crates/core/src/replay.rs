//! Line-oriented move logs.
//!
//! ```text
//! # odd game on 6
//! n=6
//! R3a
//! R1a
//! R5
//! R4a:i=1
//! R2a
//! ```
//!
//! The first non-comment line is `n=<N>`; every following line holds one
//! serialized move. `#` starts a comment and blank lines are ignored. The
//! same format backs session journals in the service.

use std::fmt::Write as _;

use crate::engine::{play_line, GameRecord, GameState, MoveDescriptor};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveLog {
    pub n: u64,
    pub moves: Vec<MoveDescriptor>,
}

impl MoveLog {
    pub fn new(n: u64) -> Self {
        Self {
            n,
            moves: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut moves = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| Error::Parse(format!("line {}: {e}", lineno + 1));
            match n {
                None => {
                    let value = line
                        .strip_prefix("n=")
                        .ok_or_else(|| at(Error::Parse("expected n=<N> header".into())))?;
                    n = Some(
                        value
                            .trim()
                            .parse::<u64>()
                            .map_err(|_| at(Error::Parse(format!("bad n {value:?}"))))?,
                    );
                }
                Some(_) => moves.push(line.parse().map_err(at)?),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing n=<N> header".into()))?;
        Ok(Self { n, moves })
    }

    pub fn header(&self) -> String {
        format!("n={}\n", self.n)
    }

    pub fn render(&self) -> String {
        let mut out = self.header();
        for mv in &self.moves {
            let _ = writeln!(out, "{mv}");
        }
        out
    }

    /// Replays the moves without requiring a finished game.
    pub fn state(&self) -> Result<GameState> {
        play_line(self.n, &self.moves)
    }

    /// Replays the moves and requires them to end the game.
    pub fn into_record(self) -> Result<GameRecord> {
        GameRecord::replay(self.n, None, self.moves)
    }
}
