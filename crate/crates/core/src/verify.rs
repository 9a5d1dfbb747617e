//! The invariant suite run by `fibquilt verify`.

use serde::Serialize;

use crate::analysis::{min_game_length, two_term_split_check, SearchBudget};
use crate::decomposition::{enumerate_decompositions, extremal_counts, sequence_from_definition};
use crate::sequence::{verify_identities, QuiltSequence};
use crate::simulation::random_playout;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_result(name: &'static str, result: Result<Option<String>>) -> Self {
        match result {
            Ok(None) => Self {
                name,
                passed: true,
                detail: "ok".into(),
            },
            Ok(Some(failure)) => Self {
                name,
                passed: false,
                detail: failure,
            },
            Err(e) => Self {
                name,
                passed: false,
                detail: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub identities_to: usize,
    pub definition_terms: usize,
    pub completeness_to: u64,
    pub shortest_game_to: u64,
    pub splits_to: usize,
    pub playouts: u64,
    pub playout_n: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            identities_to: 30,
            definition_terms: 25,
            completeness_to: 500,
            shortest_game_to: 30,
            splits_to: 20,
            playouts: 1_000,
            playout_n: 50,
        }
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_result("sequence-identities", check_identities(cfg)),
        CheckOutcome::from_result("definition-oracle", check_definition(cfg)),
        CheckOutcome::from_result("decomposition-completeness", check_completeness(cfg)),
        CheckOutcome::from_result("shortest-game", check_shortest(cfg)),
        CheckOutcome::from_result("two-term-splits", check_splits(cfg)),
        CheckOutcome::from_result("playout-invariants", check_playouts(cfg)),
    ]
}

fn check_identities(cfg: &SuiteConfig) -> Result<Option<String>> {
    let report = verify_identities(cfg.identities_to)?;
    Ok(report
        .first_failure
        .map(|f| format!("{} fails at n = {}", f.identity, f.n)))
}

fn check_definition(cfg: &SuiteConfig) -> Result<Option<String>> {
    let generated = QuiltSequence::generate(cfg.definition_terms)?;
    let defined = sequence_from_definition(cfg.definition_terms);
    Ok(generated
        .terms()
        .iter()
        .zip(&defined)
        .position(|(a, b)| a != b)
        .map(|k| {
            format!(
                "term {}: recurrence gives {}, definition gives {}",
                k + 1,
                generated.terms()[k],
                defined[k]
            )
        }))
}

fn check_completeness(cfg: &SuiteConfig) -> Result<Option<String>> {
    for n in 1..=cfg.completeness_to {
        let all = enumerate_decompositions(n)?;
        if all.is_empty() {
            return Ok(Some(format!("{n} has no FQ-legal decomposition")));
        }
        if let Some(bad) = all.iter().find(|d| !d.is_fq_legal() || d.value() != n) {
            return Ok(Some(format!("{n}: bad decomposition {bad}")));
        }
    }
    Ok(None)
}

fn check_shortest(cfg: &SuiteConfig) -> Result<Option<String>> {
    for n in 1..=cfg.shortest_game_to {
        let shortest = min_game_length(n, SearchBudget::default())?;
        let bound = n as usize - extremal_counts(n)?.max_terms;
        if shortest != bound {
            return Ok(Some(format!(
                "n = {n}: shortest game {shortest}, n - L(n) = {bound}"
            )));
        }
    }
    Ok(None)
}

fn check_splits(cfg: &SuiteConfig) -> Result<Option<String>> {
    for i in 7..=cfg.splits_to {
        let pairs = two_term_split_check(i)?;
        if pairs != [(i - 5, i + 2)] {
            return Ok(Some(format!("i = {i}: legal splits {pairs:?}")));
        }
    }
    Ok(None)
}

fn check_playouts(cfg: &SuiteConfig) -> Result<Option<String>> {
    for seed in 0..cfg.playouts {
        // random_playout enforces the R2a and monovariant checks itself.
        let game = random_playout(cfg.playout_n, seed)?;
        if !game.final_decomposition.is_fq_legal() {
            return Ok(Some(format!("seed {seed}: final state not FQ-legal")));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_suite_passes() {
        let cfg = SuiteConfig {
            identities_to: 20,
            definition_terms: 12,
            completeness_to: 60,
            shortest_game_to: 12,
            splits_to: 12,
            playouts: 20,
            playout_n: 20,
        };
        for outcome in run_suite(&cfg) {
            assert!(outcome.passed, "{outcome:?}");
        }
    }
}
