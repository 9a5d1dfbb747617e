//! Exhaustive analysis of the game graph.
//!
//! Move legality depends only on the current multiset, so positions are
//! plain [`GameState`]s with no history attached. The reachable graph is
//! acyclic: every move except R2a strictly lowers the square-root
//! monovariant and R2a occurs at most once along any play. Exploration
//! still checks for cycles and reports one as an internal error.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::decomposition::{extremal_counts, is_fq_legal};
use crate::engine::{GameRecord, GameState, MoveDescriptor, Player};
use crate::sequence::QuiltSequence;
use crate::{Error, Result};

/// Upper bound on the number of distinct states a search may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_states: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_states: 5_000_000,
        }
    }
}

impl SearchBudget {
    pub fn new(max_states: usize) -> Self {
        Self { max_states }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Parities {
    pub even: bool,
    pub odd: bool,
}

impl Parities {
    pub const EVEN: Parities = Parities {
        even: true,
        odd: false,
    };
    pub const BOTH: Parities = Parities {
        even: true,
        odd: true,
    };

    fn flipped(self) -> Parities {
        Parities {
            even: self.odd,
            odd: self.even,
        }
    }

    fn union(self, other: Parities) -> Parities {
        Parities {
            even: self.even || other.even,
            odd: self.odd || other.odd,
        }
    }

    pub fn labels(self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.even {
            out.push("even");
        }
        if self.odd {
            out.push("odd");
        }
        out
    }
}

impl Serialize for Parities {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.labels().serialize(serializer)
    }
}

/// Every state reachable from `initial_state(n)` with its outgoing moves.
pub struct StateGraph {
    n: u64,
    states: Vec<GameState>,
    edges: Vec<Vec<(MoveDescriptor, u32)>>,
    // children before parents
    post_order: Vec<u32>,
}

const ROOT: u32 = 0;

impl StateGraph {
    pub fn explore(n: u64, budget: SearchBudget) -> Result<Self> {
        let root = GameState::initial(n)?;
        let mut index: HashMap<GameState, u32> = HashMap::new();
        let mut states = vec![root.clone()];
        let mut edges: Vec<Vec<(MoveDescriptor, u32)>> = vec![Vec::new()];
        index.insert(root, ROOT);

        let mut frontier = vec![ROOT];
        let mut largest_frontier = 0;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &id in &frontier {
                let state = states[id as usize].clone();
                let mut out = Vec::new();
                for mv in state.legal_moves() {
                    let child = state.apply(&mv)?;
                    let child_id = match index.get(&child) {
                        Some(&c) => c,
                        None => {
                            if states.len() >= budget.max_states {
                                return Err(Error::ResourceLimit {
                                    budget: budget.max_states,
                                    completed_frontier: largest_frontier,
                                });
                            }
                            let c = states.len() as u32;
                            index.insert(child.clone(), c);
                            states.push(child);
                            edges.push(Vec::new());
                            next.push(c);
                            c
                        }
                    };
                    out.push((mv, child_id));
                }
                edges[id as usize] = out;
            }
            largest_frontier = largest_frontier.max(frontier.len());
            frontier = next;
        }

        let post_order = post_order(&edges)?;
        Ok(Self {
            n,
            states,
            edges,
            post_order,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn states(&self) -> &[GameState] {
        &self.states
    }

    fn dp<T: Copy>(
        &self,
        terminal: T,
        mut combine: impl FnMut(&[(MoveDescriptor, u32)], &[T]) -> T,
    ) -> Vec<T> {
        let mut values = vec![terminal; self.states.len()];
        for &v in &self.post_order {
            let out = &self.edges[v as usize];
            if !out.is_empty() {
                values[v as usize] = combine(out, &values);
            }
        }
        values
    }

    /// Shortest distance from every state to a terminal state.
    pub fn min_lengths(&self) -> Vec<usize> {
        self.dp(0usize, |out, d| {
            1 + out.iter().map(|&(_, c)| d[c as usize]).min().unwrap_or(0)
        })
    }

    /// Longest distance from every state to a terminal state.
    pub fn max_lengths(&self) -> Vec<usize> {
        self.dp(0usize, |out, d| {
            1 + out.iter().map(|&(_, c)| d[c as usize]).max().unwrap_or(0)
        })
    }

    pub fn parities(&self) -> Vec<Parities> {
        self.dp(Parities::EVEN, |out, p| {
            out.iter().fold(Parities::default(), |acc, &(_, c)| {
                acc.union(p[c as usize].flipped())
            })
        })
    }

    /// `true` where the player to move wins under optimal play.
    pub fn mover_wins(&self) -> Vec<bool> {
        self.dp(false, |out, w| out.iter().any(|&(_, c)| !w[c as usize]))
    }

    /// Number of distinct complete games from each state, saturating.
    pub fn game_counts(&self) -> Vec<u128> {
        self.dp(1u128, |out, g| {
            out.iter()
                .fold(0u128, |acc, &(_, c)| acc.saturating_add(g[c as usize]))
        })
    }

    /// For each state on some shortest game from the root, the moves that
    /// stay on a shortest game.
    pub fn shortest_game_moves(&self) -> Vec<(GameState, MoveDescriptor)> {
        let to_end = self.min_lengths();
        let mut from_root = vec![usize::MAX; self.states.len()];
        from_root[ROOT as usize] = 0;
        let mut queue = VecDeque::from([ROOT]);
        while let Some(v) = queue.pop_front() {
            for &(_, c) in &self.edges[v as usize] {
                if from_root[c as usize] == usize::MAX {
                    from_root[c as usize] = from_root[v as usize] + 1;
                    queue.push_back(c);
                }
            }
        }
        let best = to_end[ROOT as usize];
        let mut out = Vec::new();
        for (v, moves) in self.edges.iter().enumerate() {
            if from_root[v] == usize::MAX || from_root[v] + to_end[v] != best {
                continue;
            }
            for &(mv, c) in moves {
                if from_root[v] + 1 + to_end[c as usize] == best {
                    out.push((self.states[v].clone(), mv));
                }
            }
        }
        out
    }
}

/// Iterative depth-first post-order; fails on a cycle.
fn post_order(edges: &[Vec<(MoveDescriptor, u32)>]) -> Result<Vec<u32>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; edges.len()];
    let mut order = Vec::with_capacity(edges.len());
    let mut stack: Vec<(u32, usize)> = Vec::new();
    for start in 0..edges.len() as u32 {
        if mark[start as usize] != Mark::New {
            continue;
        }
        mark[start as usize] = Mark::Open;
        stack.push((start, 0));
        while let Some(top) = stack.last_mut() {
            let (v, next) = *top;
            if let Some(&(_, c)) = edges[v as usize].get(next) {
                top.1 += 1;
                match mark[c as usize] {
                    Mark::New => {
                        mark[c as usize] = Mark::Open;
                        stack.push((c, 0));
                    }
                    Mark::Open => {
                        return Err(Error::Internal("the state graph contains a cycle".into()))
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v as usize] = Mark::Done;
                order.push(v);
                stack.pop();
            }
        }
    }
    Ok(order)
}

/// Breadth-first search from `initial_state(n)` to the nearest terminal
/// state; returns the witness game.
pub fn shortest_game(n: u64, budget: SearchBudget) -> Result<GameRecord> {
    let root = GameState::initial(n)?;
    if root.is_terminal() {
        return GameRecord::replay(n, None, Vec::new());
    }
    // parent[state] = (predecessor, move)
    let mut parent: HashMap<GameState, Option<(GameState, MoveDescriptor)>> = HashMap::new();
    parent.insert(root.clone(), None);
    let mut frontier = vec![root];
    let mut largest_frontier = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for state in &frontier {
            for mv in state.legal_moves() {
                let child = state.apply(&mv)?;
                if parent.contains_key(&child) {
                    continue;
                }
                if parent.len() >= budget.max_states {
                    return Err(Error::ResourceLimit {
                        budget: budget.max_states,
                        completed_frontier: largest_frontier,
                    });
                }
                parent.insert(child.clone(), Some((state.clone(), mv)));
                if child.is_terminal() {
                    let mut moves = vec![mv];
                    let mut cursor = state.clone();
                    while let Some(Some((prev, m))) = parent.get(&cursor) {
                        moves.push(*m);
                        cursor = prev.clone();
                    }
                    moves.reverse();
                    return GameRecord::replay(n, None, moves);
                }
                next.push(child);
            }
        }
        largest_frontier = largest_frontier.max(frontier.len());
        frontier = next;
    }
    Err(Error::Internal(format!(
        "no terminal state reachable from n = {n}"
    )))
}

/// Length of the shortest game on `n`.
pub fn min_game_length(n: u64, budget: SearchBudget) -> Result<usize> {
    shortest_game(n, budget).map(|g| g.length)
}

/// Parities of the lengths of all complete games on `n`.
pub fn reachable_parities(n: u64, budget: SearchBudget) -> Result<Parities> {
    let graph = StateGraph::explore(n, budget)?;
    Ok(graph.parities()[ROOT as usize])
}

#[derive(Debug, Clone)]
pub struct WinnerSolution {
    pub n: u64,
    pub winner: Player,
    /// One winning move for every reachable state that is won by the
    /// player to move; the first such move in legal-move order.
    pub strategy: HashMap<GameState, MoveDescriptor>,
    pub reachable_states: usize,
}

impl WinnerSolution {
    pub fn winning_move(&self, state: &GameState) -> Option<MoveDescriptor> {
        self.strategy.get(state).copied()
    }

    pub fn is_mover_win(&self, state: &GameState) -> bool {
        self.strategy.contains_key(state)
    }
}

/// Backward induction over the reachable graph. Terminal positions are
/// losses for the player to move.
pub fn solve_winner(n: u64, budget: SearchBudget) -> Result<WinnerSolution> {
    let graph = StateGraph::explore(n, budget)?;
    Ok(solve_graph(&graph))
}

pub fn solve_graph(graph: &StateGraph) -> WinnerSolution {
    let wins = graph.mover_wins();
    let mut strategy = HashMap::new();
    for (v, out) in graph.edges.iter().enumerate() {
        if !wins[v] {
            continue;
        }
        if let Some(&(mv, _)) = out.iter().find(|&&(_, c)| !wins[c as usize]) {
            strategy.insert(graph.states[v].clone(), mv);
        }
    }
    WinnerSolution {
        n: graph.n,
        winner: if wins[ROOT as usize] {
            Player::Player1
        } else {
            Player::Player2
        },
        strategy,
        reachable_states: graph.state_count(),
    }
}

#[derive(Debug, Clone)]
pub struct GameEnumeration {
    pub games: Vec<GameRecord>,
    pub truncated: bool,
}

/// Largest `n` accepted by [`enumerate_games`].
pub const MAX_ENUMERATION_N: u64 = 10;

/// All distinct complete move sequences on `n`, depth-first in legal-move
/// order, stopping after `cap` games.
pub fn enumerate_games(n: u64, cap: usize) -> Result<GameEnumeration> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(Error::InvalidArgument(format!(
            "game enumeration needs 1 <= n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let mut out = GameEnumeration {
        games: Vec::new(),
        truncated: false,
    };
    let mut line = Vec::new();
    walk(n, &GameState::initial(n)?, &mut line, cap, &mut out)?;
    Ok(out)
}

fn walk(
    n: u64,
    state: &GameState,
    line: &mut Vec<MoveDescriptor>,
    cap: usize,
    out: &mut GameEnumeration,
) -> Result<()> {
    let moves = state.legal_moves();
    if moves.is_empty() {
        if out.games.len() >= cap {
            out.truncated = true;
        } else {
            out.games.push(GameRecord::replay(n, None, line.clone())?);
        }
        return Ok(());
    }
    for mv in moves {
        if out.truncated {
            break;
        }
        let child = state.apply(&mv)?;
        line.push(mv);
        walk(n, &child, line, cap, out)?;
        line.pop();
    }
    Ok(())
}

/// Brute force over all index pairs `a < b` with `q_a + q_b = 2 q_i`,
/// keeping the FQ-legal ones.
pub fn two_term_split_check(i: usize) -> Result<Vec<(usize, usize)>> {
    if !(3..=30).contains(&i) {
        return Err(Error::InvalidArgument(format!(
            "split check needs 3 <= i <= 30, got {i}"
        )));
    }
    let seq = QuiltSequence::standard();
    let target = 2 * crate::q(i);
    let top = seq.count_at_most(target);
    let mut pairs = Vec::new();
    for a in 1..=top {
        for b in a + 1..=top {
            if crate::q(a) + crate::q(b) == target && is_fq_legal(&[a, b]) {
                pairs.push((a, b));
            }
        }
    }
    Ok(pairs)
}

/// Where `max_length` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthSource {
    Exhaustive,
    Observed,
}

/// The JSON object emitted by `fibquilt analyze`. Fields that were not
/// requested, or could not be computed within budget, are `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameGraphSummary {
    pub n: u64,
    #[serde(rename = "L")]
    pub max_terms: usize,
    #[serde(rename = "l")]
    pub min_terms: usize,
    pub reachable_states: Option<usize>,
    pub min_length: Option<usize>,
    pub max_length: Option<usize>,
    pub max_length_source: Option<LengthSource>,
    pub parities: Option<Parities>,
    pub winner_optimal: Option<Player>,
    pub shortest_game: Option<Vec<MoveDescriptor>>,
    pub games: Option<Vec<Vec<MoveDescriptor>>>,
    pub games_truncated: Option<bool>,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub budget: SearchBudget,
    pub min_length: bool,
    pub parities: bool,
    pub winner: bool,
    pub games: bool,
    pub games_cap: usize,
    /// Random playouts used for `max_length` when the graph is too large.
    pub fallback_trials: usize,
    pub fallback_seed: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            budget: SearchBudget::default(),
            min_length: true,
            parities: true,
            winner: true,
            games: false,
            games_cap: 10_000,
            fallback_trials: 1_000,
            fallback_seed: 0,
        }
    }
}

pub fn analyze(n: u64, opts: &AnalyzeOptions) -> Result<GameGraphSummary> {
    let counts = extremal_counts(n)?;
    let mut summary = GameGraphSummary {
        n,
        max_terms: counts.max_terms,
        min_terms: counts.min_terms,
        reachable_states: None,
        min_length: None,
        max_length: None,
        max_length_source: None,
        parities: None,
        winner_optimal: None,
        shortest_game: None,
        games: None,
        games_truncated: None,
    };

    match StateGraph::explore(n, opts.budget) {
        Ok(graph) => {
            summary.reachable_states = Some(graph.state_count());
            summary.max_length = Some(graph.max_lengths()[ROOT as usize]);
            summary.max_length_source = Some(LengthSource::Exhaustive);
            if opts.parities {
                summary.parities = Some(graph.parities()[ROOT as usize]);
            }
            if opts.winner {
                summary.winner_optimal = Some(solve_graph(&graph).winner);
            }
        }
        Err(Error::ResourceLimit { .. }) if !opts.parities && !opts.winner => {
            let dist = crate::simulation::run_distribution(
                n,
                opts.fallback_trials.max(1),
                opts.fallback_seed,
            )?;
            summary.max_length = dist.histogram.keys().next_back().map(|&l| l as usize);
            summary.max_length_source = Some(LengthSource::Observed);
        }
        Err(e) => return Err(e),
    }

    if opts.min_length {
        let witness = shortest_game(n, opts.budget)?;
        summary.min_length = Some(witness.length);
        summary.shortest_game = Some(witness.moves);
    }
    if opts.games {
        let listing = enumerate_games(n, opts.games_cap)?;
        summary.games = Some(listing.games.into_iter().map(|g| g.moves).collect());
        summary.games_truncated = Some(listing.truncated);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Rule;

    fn budget() -> SearchBudget {
        SearchBudget::default()
    }

    #[test]
    fn min_lengths_small() {
        assert_eq!(min_game_length(1, budget()).unwrap(), 0);
        assert_eq!(min_game_length(4, budget()).unwrap(), 3);
        assert_eq!(min_game_length(7, budget()).unwrap(), 6);
    }

    #[test]
    fn shortest_witness_reduces_terms_every_move() {
        for n in 1..=20 {
            let g = shortest_game(n, budget()).unwrap();
            assert!(
                g.moves.iter().all(|m| m.rule().reduces_term_count()),
                "n={n}: {:?}",
                g.moves
            );
        }
    }

    #[test]
    fn enumeration_counts() {
        for n in 1..=3 {
            assert_eq!(enumerate_games(n, 100).unwrap().games.len(), 1);
        }
        let four = enumerate_games(4, 100).unwrap();
        assert_eq!(four.games.len(), 2);
        assert!(four.games.iter().all(|g| g.length == 3));
        let five = enumerate_games(5, 100).unwrap();
        assert_eq!(five.games.len(), 4);
        assert!(five.games.iter().all(|g| g.length == 4));
        assert!(!five.truncated);
    }

    #[test]
    fn enumeration_cap_truncates() {
        let e = enumerate_games(8, 3).unwrap();
        assert_eq!(e.games.len(), 3);
        assert!(e.truncated);
        assert!(enumerate_games(11, 10).is_err());
        assert!(enumerate_games(0, 10).is_err());
    }

    #[test]
    fn parity_examples() {
        assert_eq!(reachable_parities(6, budget()).unwrap(), Parities::BOTH);
        assert_eq!(reachable_parities(5, budget()).unwrap(), Parities::EVEN);
        assert_eq!(reachable_parities(1, budget()).unwrap(), Parities::EVEN);
    }

    #[test]
    fn winner_examples() {
        assert_eq!(solve_winner(2, budget()).unwrap().winner, Player::Player1);
        assert_eq!(solve_winner(4, budget()).unwrap().winner, Player::Player1);
        assert_eq!(solve_winner(5, budget()).unwrap().winner, Player::Player2);
        assert_eq!(solve_winner(1, budget()).unwrap().winner, Player::Player2);
    }

    #[test]
    fn strategy_moves_to_losing_positions() {
        let sol = solve_winner(12, budget()).unwrap();
        for (state, mv) in &sol.strategy {
            let next = state.apply(mv).unwrap();
            assert!(!sol.is_mover_win(&next), "{state} --{mv}--> {next}");
        }
    }

    #[test]
    fn split_examples() {
        assert_eq!(two_term_split_check(7).unwrap(), vec![(2, 9)]);
        assert_eq!(two_term_split_check(4).unwrap(), vec![(1, 6), (3, 5)]);
        assert_eq!(two_term_split_check(6).unwrap(), vec![(2, 8), (5, 7)]);
        assert!(two_term_split_check(2).is_err());
        assert!(two_term_split_check(31).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let err = StateGraph::explore(20, SearchBudget::new(50))
            .err()
            .unwrap();
        assert!(matches!(err, Error::ResourceLimit { budget: 50, .. }));
        let err = shortest_game(20, SearchBudget::new(50)).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { budget: 50, .. }));
    }

    #[test]
    fn analyze_falls_back_to_observed_max() {
        let opts = AnalyzeOptions {
            budget: SearchBudget::new(50),
            min_length: false,
            parities: false,
            winner: false,
            fallback_trials: 20,
            ..AnalyzeOptions::default()
        };
        let s = analyze(20, &opts).unwrap();
        assert_eq!(s.max_length_source, Some(LengthSource::Observed));
        assert!(s.max_length.unwrap() >= 20 - s.max_terms);
        assert_eq!(s.reachable_states, None);
    }

    #[test]
    fn analyze_full() {
        let s = analyze(
            6,
            &AnalyzeOptions {
                games: true,
                ..AnalyzeOptions::default()
            },
        )
        .unwrap();
        assert_eq!(s.min_length, Some(4));
        assert_eq!(s.max_length, Some(5));
        assert_eq!(s.parities, Some(Parities::BOTH));
        assert_eq!(s.max_length_source, Some(LengthSource::Exhaustive));
        assert!(s.games.unwrap().len() >= 2);
    }

    #[test]
    fn r2a_appears_in_some_graphs() {
        let graph = StateGraph::explore(6, budget()).unwrap();
        let has = graph
            .edges
            .iter()
            .flatten()
            .any(|(m, _)| m.rule() == Rule::R2a);
        assert!(has);
    }
}
