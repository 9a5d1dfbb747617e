use fibquilt::analysis::{
    enumerate_games, min_game_length, reachable_parities, Parities, SearchBudget, StateGraph,
};
use fibquilt::{
    enumerate_decompositions, extremal_counts, is_fq_legal, q, sequence_from_definition,
    Decomposition, GameState, MoveDescriptor, QuiltSequence, Rule,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Walks a random line of play from `n` ones, choosing by `seed`.
fn random_line(n: u64, seed: u64) -> Vec<(GameState, MoveDescriptor, GameState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = GameState::initial(n).unwrap();
    let mut steps = Vec::new();
    loop {
        let moves = state.legal_moves();
        if moves.is_empty() {
            return steps;
        }
        let mv = moves[rng.gen_range(0..moves.len())];
        let next = state.apply(&mv).unwrap();
        steps.push((state, mv, next.clone()));
        state = next;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn moves_conserve_value_and_respect_the_gate(n in 1u64..120, seed in any::<u64>()) {
        let steps = random_line(n, seed);
        let mut gated = 0;
        for (before, mv, after) in &steps {
            prop_assert_eq!(after.value_sum(), n);
            if mv.rule() == Rule::R2a {
                gated += 1;
                prop_assert_eq!(before.legal_moves(), vec![*mv]);
                prop_assert!(after.monovariant() > before.monovariant());
            } else {
                prop_assert!(after.monovariant() < before.monovariant());
            }
            let delta = after.monovariant() - before.monovariant();
            prop_assert!((delta - mv.monovariant_delta()).abs() < 1e-9);
        }
        prop_assert!(gated <= 1);
    }

    #[test]
    fn terminal_iff_fq_legal(n in 1u64..80, seed in any::<u64>(), cut in 0usize..200) {
        let steps = random_line(n, seed);
        let state = match steps.get(cut) {
            Some((s, _, _)) => s.clone(),
            None => steps.last().map_or_else(|| GameState::initial(n).unwrap(), |s| s.2.clone()),
        };
        prop_assert_eq!(state.is_terminal(), state.to_decomposition().is_some());
        let mut indices = Vec::new();
        for (i, m) in state.entries() {
            indices.extend(std::iter::repeat_n(i, m as usize));
        }
        prop_assert_eq!(state.is_terminal(), is_fq_legal(&indices));
    }

    #[test]
    fn state_text_round_trips(n in 1u64..60, seed in any::<u64>()) {
        for (s, mv, _) in random_line(n, seed) {
            prop_assert_eq!(s.to_string().parse::<GameState>().unwrap(), s.clone());
            prop_assert_eq!(mv.to_string().parse::<MoveDescriptor>().unwrap(), mv);
        }
    }

    #[test]
    fn decompositions_are_legal_and_exact(n in 1u64..5_000) {
        let all = enumerate_decompositions(n).unwrap();
        prop_assert!(!all.is_empty());
        for d in &all {
            prop_assert!(d.is_fq_legal());
            prop_assert_eq!(d.terms().iter().sum::<u64>(), n);
            let again = Decomposition::new(d.indices().to_vec()).unwrap();
            prop_assert_eq!(&again, d);
        }
        let c = extremal_counts(n).unwrap();
        prop_assert_eq!(c.max_terms, all.iter().map(Decomposition::len).max().unwrap());
        prop_assert_eq!(c.min_terms, all.iter().map(Decomposition::len).min().unwrap());
    }
}

#[test]
fn definition_scan_matches_recurrence() {
    let scanned = sequence_from_definition(25);
    assert_eq!(scanned, QuiltSequence::generate(25).unwrap().terms());
    assert_eq!(q(25), scanned[24]);
}

#[test]
fn gate_fires_at_most_once_in_every_small_game() {
    for n in 1..=10 {
        let games = enumerate_games(n, 1_000_000).unwrap();
        assert!(!games.truncated);
        for g in &games.games {
            let r2a = g.moves.iter().filter(|m| m.rule() == Rule::R2a).count();
            assert!(r2a <= 1, "n={n}: {:?}", g.moves);
        }
    }
}

#[test]
fn state_graphs_are_acyclic() {
    // explore() rejects cycles; reaching the end is the assertion
    for n in [10, 25, 40] {
        let g = StateGraph::explore(n, SearchBudget::default()).unwrap();
        assert!(g.edge_count() >= g.state_count() - 1);
    }
}

#[test]
fn shortest_game_removes_one_term_per_move() {
    for n in 1..=30 {
        let most = extremal_counts(n).unwrap().max_terms;
        assert_eq!(
            min_game_length(n, SearchBudget::default()).unwrap(),
            n as usize - most
        );
    }
}

#[test]
fn both_parities_from_six_to_thirty() {
    for n in 1..=5 {
        assert_ne!(
            reachable_parities(n, SearchBudget::default()).unwrap(),
            Parities::BOTH
        );
    }
    for n in 6..=30 {
        assert_eq!(
            reachable_parities(n, SearchBudget::default()).unwrap(),
            Parities::BOTH
        );
    }
}
