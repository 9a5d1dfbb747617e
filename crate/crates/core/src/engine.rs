//! Game states and the move table of the Fibonacci Quilt Game.
//!
//! A state is a multiset of sequence indices. Each rule consumes a pair of
//! terms that may not appear together in an FQ-legal decomposition and
//! produces one or two terms with the same total:
//!
//! | rule | rewrite |
//! |------|---------|
//! | R1a | `q1 q2 -> q3` |
//! | R1b (i >= 2) | `qi q(i+1) -> q(i+3)` |
//! | R2a | `q1 q5 -> q2 q4`, only when no other move exists |
//! | R2b (i >= 2) | `qi q(i+4) -> q(i+5)` |
//! | R3a | `q1^2 -> q2` |
//! | R3b | `q2^2 -> q4` |
//! | R3c | `q3^2 -> q2 q4` |
//! | R3d | `q4^2 -> q1 q6` (A) or `q3 q5` (B) |
//! | R3e | `q5^2 -> q1 q7` |
//! | R3f | `q6^2 -> q2 q8` (A) or `q5 q7` (B) |
//! | R3g (i >= 7) | `qi^2 -> q(i-5) q(i+2)` |
//! | R4a (i = 1, 2) | `qi q(i+3) -> q(i+4)` |
//! | R4b | `q3 q6 -> q1 q7` |
//! | R4c (i = 4, 5) | `qi q(i+3) -> q1 q(i+4)` |
//! | R4d | `q6 q9 -> q2 q10` |
//! | R4e (i >= 7) | `qi q(i+3) -> q(i-5) q(i+4)` |
//! | R5 | `q1 q3 -> q4` |
//!
//! R3f variant B is `q6^2 -> q5 q7` (7 + 7 = 5 + 9). The form
//! `q6^2 -> q3 q7` sometimes given for this rule sums to 12 rather than 14
//! and would break conservation of the total; `{5, 7}` is the only other
//! FQ-legal two-term split of 14.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::decomposition::{is_fq_legal, Decomposition};
use crate::sequence::q;
use crate::{Error, Result};

/// Shown wherever the rule table is printed.
pub const R3F_ERRATUM: &str = "R3f:B is q6^2 -> q5 & q7 (7+7 = 5+9). The form \
    q6^2 -> q3 & q7 sometimes given for this rule sums to 3+9 = 12, not 14, so it would not conserve the \
    total; {5,7} is the only other FQ-legal two-term split of 14 besides {2,8}.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    R1a,
    R1b,
    R2a,
    R2b,
    R3a,
    R3b,
    R3c,
    R3d,
    R3e,
    R3f,
    R3g,
    R4a,
    R4b,
    R4c,
    R4d,
    R4e,
    R5,
}

impl Rule {
    pub const ALL: [Rule; 17] = [
        Rule::R1a,
        Rule::R1b,
        Rule::R2a,
        Rule::R2b,
        Rule::R3a,
        Rule::R3b,
        Rule::R3c,
        Rule::R3d,
        Rule::R3e,
        Rule::R3f,
        Rule::R3g,
        Rule::R4a,
        Rule::R4b,
        Rule::R4c,
        Rule::R4d,
        Rule::R4e,
        Rule::R5,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Rule::R1a => "R1a",
            Rule::R1b => "R1b",
            Rule::R2a => "R2a",
            Rule::R2b => "R2b",
            Rule::R3a => "R3a",
            Rule::R3b => "R3b",
            Rule::R3c => "R3c",
            Rule::R3d => "R3d",
            Rule::R3e => "R3e",
            Rule::R3f => "R3f",
            Rule::R3g => "R3g",
            Rule::R4a => "R4a",
            Rule::R4b => "R4b",
            Rule::R4c => "R4c",
            Rule::R4d => "R4d",
            Rule::R4e => "R4e",
            Rule::R5 => "R5",
        }
    }

    /// Admissible values of the index parameter, for parameterized rules.
    pub fn index_range(self) -> Option<(usize, usize)> {
        match self {
            Rule::R1b | Rule::R2b => Some((2, usize::MAX)),
            Rule::R3g | Rule::R4e => Some((7, usize::MAX)),
            Rule::R4a => Some((1, 2)),
            Rule::R4c => Some((4, 5)),
            _ => None,
        }
    }

    pub fn has_variants(self) -> bool {
        matches!(self, Rule::R3d | Rule::R3f)
    }

    /// Rules that replace two terms by one. A shortest game uses nothing else.
    pub fn reduces_term_count(self) -> bool {
        matches!(
            self,
            Rule::R1a | Rule::R1b | Rule::R2b | Rule::R3a | Rule::R3b | Rule::R4a | Rule::R5
        )
    }

    /// Template of the rewrite, e.g. `q_i & q_{i+1} -> q_{i+3}`.
    pub fn template(self) -> &'static str {
        match self {
            Rule::R1a => "q_1 & q_2 -> q_3",
            Rule::R1b => "q_i & q_{i+1} -> q_{i+3}  (i >= 2)",
            Rule::R2a => "q_1 & q_5 -> q_2 & q_4  (only when no other move is possible)",
            Rule::R2b => "q_i & q_{i+4} -> q_{i+5}  (i >= 2)",
            Rule::R3a => "q_1^2 -> q_2",
            Rule::R3b => "q_2^2 -> q_4",
            Rule::R3c => "q_3^2 -> q_2 & q_4",
            Rule::R3d => "q_4^2 -> q_1 & q_6 (A) | q_3 & q_5 (B)",
            Rule::R3e => "q_5^2 -> q_1 & q_7",
            Rule::R3f => "q_6^2 -> q_2 & q_8 (A) | q_5 & q_7 (B, corrected)",
            Rule::R3g => "q_i^2 -> q_{i-5} & q_{i+2}  (i >= 7)",
            Rule::R4a => "q_i & q_{i+3} -> q_{i+4}  (i = 1, 2)",
            Rule::R4b => "q_3 & q_6 -> q_1 & q_7",
            Rule::R4c => "q_i & q_{i+3} -> q_1 & q_{i+4}  (i = 4, 5)",
            Rule::R4d => "q_6 & q_9 -> q_2 & q_10",
            Rule::R4e => "q_i & q_{i+3} -> q_{i-5} & q_{i+4}  (i >= 7)",
            Rule::R5 => "q_1 & q_3 -> q_4",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.tag() == s)
            .ok_or_else(|| Error::Parse(format!("unknown rule tag {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    A,
    B,
}

/// One application of a rule: the rule, its index parameter when it has
/// one, and the chosen variant for R3d and R3f.
///
/// Serialized as `R2a`, `R1b:i=4`, `R3d:A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MoveDescriptor {
    rule: Rule,
    index: Option<usize>,
    variant: Option<Variant>,
}

/// Terms consumed and produced by one move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rewrite {
    pub consumed: [usize; 2],
    produced: [usize; 2],
    produced_len: usize,
}

impl Rewrite {
    fn one(consumed: [usize; 2], p: usize) -> Self {
        Self {
            consumed,
            produced: [p, 0],
            produced_len: 1,
        }
    }

    fn two(consumed: [usize; 2], a: usize, b: usize) -> Self {
        Self {
            consumed,
            produced: [a, b],
            produced_len: 2,
        }
    }

    pub fn produced(&self) -> &[usize] {
        &self.produced[..self.produced_len]
    }
}

impl MoveDescriptor {
    /// Validates the parameter range and variant presence for `rule`.
    pub fn new(rule: Rule, index: Option<usize>, variant: Option<Variant>) -> Result<Self> {
        match (rule.index_range(), index) {
            (Some((lo, hi)), Some(i)) if (lo..=hi).contains(&i) => {}
            (Some((lo, hi)), Some(i)) => {
                let range = if hi == usize::MAX {
                    format!("i >= {lo}")
                } else {
                    format!("{lo} <= i <= {hi}")
                };
                return Err(Error::InvalidArgument(format!(
                    "{rule} requires {range}, got i={i}"
                )));
            }
            (Some(_), None) => {
                return Err(Error::InvalidArgument(format!(
                    "{rule} requires an index parameter"
                )))
            }
            (None, Some(_)) => {
                return Err(Error::InvalidArgument(format!(
                    "{rule} takes no index parameter"
                )))
            }
            (None, None) => {}
        }
        if rule.has_variants() != variant.is_some() {
            return Err(Error::InvalidArgument(if rule.has_variants() {
                format!("{rule} requires a variant (A or B)")
            } else {
                format!("{rule} takes no variant")
            }));
        }
        Ok(Self {
            rule,
            index,
            variant,
        })
    }

    fn fixed(rule: Rule) -> Self {
        Self {
            rule,
            index: None,
            variant: None,
        }
    }

    fn indexed(rule: Rule, i: usize) -> Self {
        Self {
            rule,
            index: Some(i),
            variant: None,
        }
    }

    fn choice(rule: Rule, variant: Variant) -> Self {
        Self {
            rule,
            index: None,
            variant: Some(variant),
        }
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn index(&self) -> Option<usize> {
        self.index
    }

    pub fn variant(&self) -> Option<Variant> {
        self.variant
    }

    pub fn rewrite(&self) -> Rewrite {
        let i = self.index.unwrap_or(0);
        match (self.rule, self.variant) {
            (Rule::R1a, _) => Rewrite::one([1, 2], 3),
            (Rule::R1b, _) => Rewrite::one([i, i + 1], i + 3),
            (Rule::R2a, _) => Rewrite::two([1, 5], 2, 4),
            (Rule::R2b, _) => Rewrite::one([i, i + 4], i + 5),
            (Rule::R3a, _) => Rewrite::one([1, 1], 2),
            (Rule::R3b, _) => Rewrite::one([2, 2], 4),
            (Rule::R3c, _) => Rewrite::two([3, 3], 2, 4),
            (Rule::R3d, Some(Variant::B)) => Rewrite::two([4, 4], 3, 5),
            (Rule::R3d, _) => Rewrite::two([4, 4], 1, 6),
            (Rule::R3e, _) => Rewrite::two([5, 5], 1, 7),
            (Rule::R3f, Some(Variant::B)) => Rewrite::two([6, 6], 5, 7),
            (Rule::R3f, _) => Rewrite::two([6, 6], 2, 8),
            (Rule::R3g, _) => Rewrite::two([i, i], i - 5, i + 2),
            (Rule::R4a, _) => Rewrite::one([i, i + 3], i + 4),
            (Rule::R4b, _) => Rewrite::two([3, 6], 1, 7),
            (Rule::R4c, _) => Rewrite::two([i, i + 3], 1, i + 4),
            (Rule::R4d, _) => Rewrite::two([6, 9], 2, 10),
            (Rule::R4e, _) => Rewrite::two([i, i + 3], i - 5, i + 4),
            (Rule::R5, _) => Rewrite::one([1, 3], 4),
        }
    }

    /// Human-readable rewrite of this instance, e.g.
    /// `q4 & q4 -> q3 & q5  (4+4 = 3+5)`.
    pub fn rewrite_text(&self) -> String {
        let rw = self.rewrite();
        let names = |ix: &[usize]| {
            ix.iter()
                .map(|i| format!("q{i}"))
                .collect::<Vec<_>>()
                .join(" & ")
        };
        let values = |ix: &[usize]| {
            ix.iter()
                .map(|&i| q(i).to_string())
                .collect::<Vec<_>>()
                .join("+")
        };
        format!(
            "{} -> {}  ({} = {})",
            names(&rw.consumed),
            names(rw.produced()),
            values(&rw.consumed),
            values(rw.produced())
        )
    }

    /// Change of the square-root monovariant caused by this move.
    pub fn monovariant_delta(&self) -> f64 {
        let rw = self.rewrite();
        let root = |i: &usize| (*i as f64).sqrt();
        rw.produced().iter().map(root).sum::<f64>() - rw.consumed.iter().map(root).sum::<f64>()
    }
}

impl fmt::Display for MoveDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rule.tag())?;
        if let Some(i) = self.index {
            write!(f, ":i={i}")?;
        }
        match self.variant {
            Some(Variant::A) => f.write_str(":A"),
            Some(Variant::B) => f.write_str(":B"),
            None => Ok(()),
        }
    }
}

impl FromStr for MoveDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let rule: Rule = parts.next().unwrap_or_default().parse()?;
        let mut index = None;
        let mut variant = None;
        for part in parts {
            match part {
                "A" if variant.is_none() => variant = Some(Variant::A),
                "B" if variant.is_none() => variant = Some(Variant::B),
                _ => match part.strip_prefix("i=") {
                    Some(k) if index.is_none() && variant.is_none() => {
                        index = Some(k.parse::<usize>().map_err(|_| {
                            Error::Parse(format!("bad index parameter in move {s:?}"))
                        })?);
                    }
                    _ => return Err(Error::Parse(format!("malformed move {s:?}"))),
                },
            }
        }
        MoveDescriptor::new(rule, index, variant).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Parse(format!("{msg} in move {s:?}")),
            other => other,
        })
    }
}

impl Serialize for MoveDescriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MoveDescriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IllegalReason {
    /// The terms the rule consumes are not all present.
    NotApplicable,
    /// R2a while some other move is available, whether or not its own
    /// terms are present.
    Gated,
}

impl fmt::Display for IllegalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IllegalReason::NotApplicable => "rule not applicable in this state",
            IllegalReason::Gated => {
                "gate violation: R2a is only allowed when no other move is possible"
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    Player1,
    Player2,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Player1 => Player::Player2,
            Player::Player2 => Player::Player1,
        }
    }

    /// Whose turn it is after `moves_played` moves.
    pub fn to_move(moves_played: usize) -> Player {
        if moves_played.is_multiple_of(2) {
            Player::Player1
        } else {
            Player::Player2
        }
    }

    /// Winner of a finished game of `length` moves: the last mover. A
    /// zero-move game goes to Player 2, since Player 1 faces a terminal
    /// position and cannot move.
    pub fn winner_for_length(length: usize) -> Player {
        Player::to_move(length).opponent()
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Player1 => "Player1",
            Player::Player2 => "Player2",
        })
    }
}

/// A multiset of sequence indices with a fixed total value.
///
/// Equality, ordering and hashing are canonical: two states compare equal
/// iff they hold the same indices with the same multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameState {
    // counts[k] is the multiplicity of index k+1; no trailing zeros.
    counts: Vec<u32>,
    total: u64,
}

impl GameState {
    /// `n` copies of `q_1`.
    pub fn initial(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let copies = u32::try_from(n).map_err(|_| {
            Error::InvalidArgument(format!(
                "n = {n} exceeds the supported maximum {}",
                u32::MAX
            ))
        })?;
        Ok(Self {
            counts: vec![copies],
            total: n,
        })
    }

    /// Builds a state from `(index, multiplicity)` pairs; repeated indices
    /// accumulate and zero multiplicities are ignored.
    pub fn from_counts<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, u32)>,
    {
        let mut counts: Vec<u32> = Vec::new();
        let mut total = 0u64;
        for (i, m) in pairs {
            if i == 0 {
                return Err(Error::InvalidArgument("index 0 does not exist".into()));
            }
            if m == 0 {
                continue;
            }
            let term = crate::QuiltSequence::standard()
                .term(i)
                .ok_or_else(|| Error::InvalidArgument(format!("no term with index {i}")))?;
            total = term
                .checked_mul(m as u64)
                .and_then(|v| v.checked_add(total))
                .ok_or_else(|| Error::InvalidArgument("state total overflows".into()))?;
            if counts.len() < i {
                counts.resize(i, 0);
            }
            counts[i - 1] = counts[i - 1]
                .checked_add(m)
                .ok_or_else(|| Error::InvalidArgument("multiplicity overflows".into()))?;
        }
        if counts.is_empty() {
            return Err(Error::InvalidArgument("empty state".into()));
        }
        Ok(Self { counts, total })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Multiplicity of index `i` (0 when absent).
    pub fn count(&self, i: usize) -> u32 {
        i.checked_sub(1)
            .and_then(|k| self.counts.get(k))
            .copied()
            .unwrap_or(0)
    }

    /// Present `(index, multiplicity)` pairs in increasing index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(k, &m)| (k + 1, m))
    }

    pub fn largest_index(&self) -> usize {
        self.counts.len()
    }

    /// Number of terms counted with multiplicity.
    pub fn term_count(&self) -> u64 {
        self.counts.iter().map(|&m| m as u64).sum()
    }

    /// Sum of the term values, recomputed from scratch.
    pub fn value_sum(&self) -> u64 {
        self.entries().map(|(i, m)| q(i) * m as u64).sum()
    }

    /// Sum of `multiplicity * sqrt(index)`.
    pub fn monovariant(&self) -> f64 {
        self.entries()
            .map(|(i, m)| m as f64 * (i as f64).sqrt())
            .sum()
    }

    fn has(&self, i: usize) -> bool {
        self.count(i) > 0
    }

    /// Moves whose consumed terms are present, before the R2a gate.
    fn ungated_moves(&self, out: &mut Vec<MoveDescriptor>) {
        for (i, m) in self.entries() {
            if m >= 2 {
                match i {
                    1 => out.push(MoveDescriptor::fixed(Rule::R3a)),
                    2 => out.push(MoveDescriptor::fixed(Rule::R3b)),
                    3 => out.push(MoveDescriptor::fixed(Rule::R3c)),
                    4 | 6 => {
                        let rule = if i == 4 { Rule::R3d } else { Rule::R3f };
                        out.push(MoveDescriptor::choice(rule, Variant::A));
                        out.push(MoveDescriptor::choice(rule, Variant::B));
                    }
                    5 => out.push(MoveDescriptor::fixed(Rule::R3e)),
                    _ => {}
                }
                if i >= 7 {
                    out.push(MoveDescriptor::indexed(Rule::R3g, i));
                }
            }
            if self.has(i + 1) {
                out.push(if i == 1 {
                    MoveDescriptor::fixed(Rule::R1a)
                } else {
                    MoveDescriptor::indexed(Rule::R1b, i)
                });
            }
            if i >= 2 && self.has(i + 4) {
                out.push(MoveDescriptor::indexed(Rule::R2b, i));
            }
            if self.has(i + 3) {
                out.push(match i {
                    1 | 2 => MoveDescriptor::indexed(Rule::R4a, i),
                    3 => MoveDescriptor::fixed(Rule::R4b),
                    4 | 5 => MoveDescriptor::indexed(Rule::R4c, i),
                    6 => MoveDescriptor::fixed(Rule::R4d),
                    _ => MoveDescriptor::indexed(Rule::R4e, i),
                });
            }
            if i == 1 && self.has(3) {
                out.push(MoveDescriptor::fixed(Rule::R5));
            }
        }
    }

    /// Every legal move, once per (rule, index, variant), in rule-table
    /// order. R2a appears only when it is the sole applicable move.
    pub fn legal_moves(&self) -> Vec<MoveDescriptor> {
        let mut moves = Vec::new();
        self.ungated_moves(&mut moves);
        if moves.is_empty() && self.has(1) && self.has(5) {
            moves.push(MoveDescriptor::fixed(Rule::R2a));
        }
        moves.sort_unstable();
        moves
    }

    pub fn is_terminal(&self) -> bool {
        self.legal_moves().is_empty()
    }

    fn consumable(&self, rw: &Rewrite) -> bool {
        let [a, b] = rw.consumed;
        if a == b {
            self.count(a) >= 2
        } else {
            self.has(a) && self.has(b)
        }
    }

    /// Why `mv` cannot be played here, or `None` if it is legal.
    pub fn check_move(&self, mv: &MoveDescriptor) -> Option<IllegalReason> {
        if mv.rule == Rule::R2a {
            let mut others = Vec::new();
            self.ungated_moves(&mut others);
            if !others.is_empty() {
                return Some(IllegalReason::Gated);
            }
        }
        if !self.consumable(&mv.rewrite()) {
            return Some(IllegalReason::NotApplicable);
        }
        None
    }

    pub fn apply(&self, mv: &MoveDescriptor) -> Result<GameState> {
        if let Some(reason) = self.check_move(mv) {
            return Err(Error::IllegalMove { mv: *mv, reason });
        }
        let rw = mv.rewrite();
        let mut counts = self.counts.clone();
        for &i in &rw.consumed {
            counts[i - 1] -= 1;
        }
        for &i in rw.produced() {
            if counts.len() < i {
                counts.resize(i, 0);
            }
            counts[i - 1] += 1;
        }
        while counts.last() == Some(&0) {
            counts.pop();
        }
        Ok(GameState {
            counts,
            total: self.total,
        })
    }

    /// The state as a decomposition, when every multiplicity is 1 and the
    /// index set is FQ-legal.
    pub fn to_decomposition(&self) -> Option<Decomposition> {
        if self.entries().any(|(_, m)| m != 1) {
            return None;
        }
        let indices: Vec<usize> = self.entries().map(|(i, _)| i).collect();
        if !is_fq_legal(&indices) {
            return None;
        }
        Decomposition::new(indices).ok()
    }
}

/// `{1^3,4^1,6^2}`
impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (i, m)) in self.entries().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}^{m}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for GameState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed state {s:?}"));
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(bad)?;
        let mut pairs = Vec::new();
        let mut last = 0usize;
        for item in inner.split(',') {
            let (i, m) = item.trim().split_once('^').ok_or_else(bad)?;
            let i: usize = i.parse().map_err(|_| bad())?;
            let m: u32 = m.parse().map_err(|_| bad())?;
            if i <= last || m == 0 {
                return Err(bad());
            }
            last = i;
            pairs.push((i, m));
        }
        GameState::from_counts(pairs).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Parse(format!("{msg} in state {s:?}")),
            other => other,
        })
    }
}

impl Serialize for GameState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GameState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Plays `moves` from `initial_state(n)`, returning the reached state.
/// The game need not be finished.
pub fn play_line(n: u64, moves: &[MoveDescriptor]) -> Result<GameState> {
    let mut state = GameState::initial(n)?;
    for (k, mv) in moves.iter().enumerate() {
        state = state.apply(mv).map_err(|e| Error::Replay {
            step: k + 1,
            source: Box::new(e),
        })?;
    }
    Ok(state)
}

/// A complete game: its moves, final decomposition and winner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub n: u64,
    pub seed: Option<u64>,
    pub moves: Vec<MoveDescriptor>,
    #[serde(rename = "final")]
    pub final_decomposition: Decomposition,
    pub length: usize,
    pub winner: Player,
}

impl GameRecord {
    /// Replays `moves` and checks that they form a finished game.
    pub fn replay(n: u64, seed: Option<u64>, moves: Vec<MoveDescriptor>) -> Result<Self> {
        let state = play_line(n, &moves)?;
        if !state.is_terminal() {
            return Err(Error::Unfinished { moves: moves.len() });
        }
        let final_decomposition = state
            .to_decomposition()
            .ok_or_else(|| Error::Internal(format!("terminal state {state} is not FQ-legal")))?;
        Ok(Self {
            n,
            seed,
            length: moves.len(),
            winner: Player::winner_for_length(moves.len()),
            moves,
            final_decomposition,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> GameState {
        s.parse().unwrap()
    }

    fn mv(s: &str) -> MoveDescriptor {
        s.parse().unwrap()
    }

    fn moves(s: &GameState) -> Vec<String> {
        s.legal_moves().iter().map(|m| m.to_string()).collect()
    }

    #[test]
    fn initial_states() {
        let s = GameState::initial(4).unwrap();
        assert_eq!(s.to_string(), "{1^4}");
        assert_eq!(s.total(), 4);
        assert!(GameState::initial(1).unwrap().is_terminal());
        assert_eq!(GameState::initial(9).unwrap().monovariant(), 9.0);
        assert!(matches!(
            GameState::initial(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn legal_move_examples() {
        assert_eq!(moves(&st("{1^2}")), ["R3a"]);
        assert_eq!(moves(&st("{1^1,5^1}")), ["R2a"]);
        assert_eq!(moves(&st("{1^1,3^1,5^1}")), ["R5"]);
        assert_eq!(moves(&st("{4^2}")), ["R3d:A", "R3d:B"]);
        assert_eq!(moves(&st("{6^2}")), ["R3f:A", "R3f:B"]);
        assert_eq!(moves(&st("{1^2,2^1}")), ["R1a", "R3a"]);
        assert_eq!(
            moves(&st("{1^1,2^1,4^1,5^1}")),
            ["R1a", "R1b:i=4", "R4a:i=1", "R4a:i=2"]
        );
    }

    #[test]
    fn every_rule_fires_somewhere() {
        let cases = [
            ("{1^1,2^1}", "R1a"),
            ("{4^1,5^1}", "R1b:i=4"),
            ("{1^1,5^1}", "R2a"),
            ("{3^1,7^1}", "R2b:i=3"),
            ("{1^2}", "R3a"),
            ("{2^2}", "R3b"),
            ("{3^2}", "R3c"),
            ("{4^2}", "R3d:B"),
            ("{5^2}", "R3e"),
            ("{6^2}", "R3f:B"),
            ("{9^2}", "R3g:i=9"),
            ("{2^1,5^1}", "R4a:i=2"),
            ("{3^1,6^1}", "R4b"),
            ("{5^1,8^1}", "R4c:i=5"),
            ("{6^1,9^1}", "R4d"),
            ("{8^1,11^1}", "R4e:i=8"),
            ("{1^1,3^1}", "R5"),
        ];
        for (state, m) in cases {
            let s = st(state);
            let m = mv(m);
            assert!(s.legal_moves().contains(&m), "{m} in {s}");
            let next = s.apply(&m).unwrap();
            assert_eq!(next.value_sum(), s.value_sum(), "{m} conserves value");
        }
    }

    #[test]
    fn apply_examples() {
        assert_eq!(
            st("{1^4}").apply(&mv("R3a")).unwrap().to_string(),
            "{1^2,2^1}"
        );
        let after = st("{1^1,5^1}").apply(&mv("R2a")).unwrap();
        assert_eq!(after.to_string(), "{2^1,4^1}");
        assert_eq!(after.total(), 6);
        let after = st("{7^2}").apply(&mv("R3g:i=7")).unwrap();
        assert_eq!(after.to_string(), "{2^1,9^1}");
        assert_eq!(after.value_sum(), 18);
    }

    #[test]
    fn illegal_moves_are_classified() {
        let s = st("{1^2,5^1}");
        assert_eq!(
            s.apply(&mv("R2a")),
            Err(Error::IllegalMove {
                mv: mv("R2a"),
                reason: IllegalReason::Gated
            })
        );
        assert_eq!(
            s.apply(&mv("R3b")),
            Err(Error::IllegalMove {
                mv: mv("R3b"),
                reason: IllegalReason::NotApplicable
            })
        );
        assert_eq!(
            st("{2^1,4^1}").check_move(&mv("R2a")),
            Some(IllegalReason::NotApplicable)
        );
    }

    #[test]
    fn terminal_examples() {
        assert!(st("{2^1,4^1}").is_terminal());
        assert!(!st("{1^1,5^1}").is_terminal());
        assert!(st("{1^1}").is_terminal());
        assert!(!st("{1^1,3^1}").is_terminal());
    }

    #[test]
    fn monovariant_examples() {
        let s = st("{1^1,5^1}");
        assert!((s.monovariant() - (1.0 + 5f64.sqrt())).abs() < 1e-12);
        let t = s.apply(&mv("R2a")).unwrap();
        assert!((t.monovariant() - (2f64.sqrt() + 2.0)).abs() < 1e-12);
        let d = mv("R1b:i=2").monovariant_delta();
        assert!((d - (5f64.sqrt() - 3f64.sqrt() - 2f64.sqrt())).abs() < 1e-12);
        assert!(d < 0.0);
    }

    #[test]
    fn move_serialization() {
        for s in ["R3d:A", "R1b:i=4", "R2a", "R3f:B", "R4a:i=1", "R3g:i=12"] {
            assert_eq!(mv(s).to_string(), s);
        }
        for bad in [
            "R1b", "R1b:i=1", "R3d", "R3a:A", "R2a:i=1", "R4a:i=3", "R4c:i=6", "R9", "R3d:C",
            "R1b:i=x", "R3d:A:B", "",
        ] {
            assert!(
                bad.parse::<MoveDescriptor>().is_err(),
                "{bad:?} should fail"
            );
        }
    }

    #[test]
    fn state_serialization() {
        let s = st("{1^3,4^1,6^2}");
        assert_eq!(s.to_string(), "{1^3,4^1,6^2}");
        assert_eq!(s.total(), 3 + 4 + 14);
        for bad in [
            "{}",
            "1^3",
            "{4^1,1^3}",
            "{1^0}",
            "{0^1}",
            "{1^3,1^2}",
            "{a^1}",
        ] {
            assert!(bad.parse::<GameState>().is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn winner_convention() {
        assert_eq!(Player::winner_for_length(0), Player::Player2);
        assert_eq!(Player::winner_for_length(1), Player::Player1);
        assert_eq!(Player::winner_for_length(4), Player::Player2);
        assert_eq!(Player::to_move(0), Player::Player1);
    }

    #[test]
    fn replay_odd_six() {
        let line: Vec<_> = ["R3a", "R1a", "R5", "R4a:i=1", "R2a"].map(mv).to_vec();
        let rec = GameRecord::replay(6, None, line).unwrap();
        assert_eq!(rec.length, 5);
        assert_eq!(rec.final_decomposition.indices(), &[4, 2]);
        assert_eq!(rec.winner, Player::Player1);
    }

    #[test]
    fn replay_errors() {
        let err = GameRecord::replay(6, None, vec![mv("R3a"), mv("R2a")]).unwrap_err();
        assert!(matches!(err, Error::Replay { step: 2, .. }));
        let err = GameRecord::replay(6, None, vec![mv("R3a")]).unwrap_err();
        assert_eq!(err, Error::Unfinished { moves: 1 });
    }
}
