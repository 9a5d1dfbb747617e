//! Seeded random playouts and game-length statistics.
//!
//! Every playout draws uniformly among the distinct legal moves. Trial `t`
//! of a run with seed `s` uses `ChaCha8Rng::seed_from_u64(s)` switched to
//! stream `t`, so each trial is reproducible on its own and results do not
//! depend on how trials are scheduled across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{GameRecord, GameState, Rule};
use crate::{Error, Result};

pub const PRNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3)";
pub const PRNG_DERIVATION: &str = "ChaCha8Rng::seed_from_u64(seed) then set_stream(trial)";

/// Moves beyond `SAFETY_FACTOR * n` mean termination is broken.
pub const SAFETY_FACTOR: u64 = 10;

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Plays a uniformly random game, checking along the way that R2a is
/// used at most once and that every other move lowers the monovariant.
pub fn playout_with<R: Rng>(n: u64, seed: Option<u64>, rng: &mut R) -> Result<GameRecord> {
    let mut state = GameState::initial(n)?;
    let mut moves = Vec::new();
    let mut r2a_uses = 0;
    let cap = SAFETY_FACTOR.saturating_mul(n);
    loop {
        let legal = state.legal_moves();
        if legal.is_empty() {
            break;
        }
        if moves.len() as u64 >= cap {
            return Err(Error::Internal(format!(
                "random game on {n} exceeded {cap} moves"
            )));
        }
        let mv = legal[rng.gen_range(0..legal.len())];
        let next = state.apply(&mv)?;
        if mv.rule() == Rule::R2a {
            r2a_uses += 1;
            if r2a_uses > 1 {
                return Err(Error::Internal(format!(
                    "R2a played twice in a game on {n}"
                )));
            }
        } else if next.monovariant() >= state.monovariant() {
            return Err(Error::Internal(format!(
                "{mv} did not lower the monovariant at {state}"
            )));
        }
        moves.push(mv);
        state = next;
    }
    let record = GameRecord::replay(n, seed, moves)?;
    debug_assert!(record.final_decomposition.is_fq_legal());
    Ok(record)
}

/// One uniformly random game; identical `(n, seed)` give identical records.
/// Equal to trial 0 of [`run_distribution`] with the same seed.
pub fn random_playout(n: u64, seed: u64) -> Result<GameRecord> {
    playout_with(n, Some(seed), &mut trial_rng(seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CentralMoments {
    pub m2: f64,
    pub m4: f64,
    pub m6: f64,
}

/// Relative differences between sample central moments and those of the
/// Gaussian with the same mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentDiffs {
    pub d2: f64,
    pub d4: f64,
    pub d6: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrngInfo {
    pub algorithm: &'static str,
    pub derivation: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthDistribution {
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub histogram: BTreeMap<u64, u64>,
    pub mean: f64,
    pub stddev: f64,
    pub central_moments: CentralMoments,
    /// `None` when the variance is zero or there is a single trial.
    pub gaussian_diffs: Option<MomentDiffs>,
    /// Games of length `>= 2n`; never observed in practice and logged.
    pub long_games: u64,
    /// Shortest and longest observed lengths.
    pub min_length: u64,
    pub max_length: u64,
    pub prng: PrngInfo,
}

impl LengthDistribution {
    /// Builds the statistics from a histogram of `length -> count`.
    pub fn from_histogram(n: u64, seed: u64, histogram: BTreeMap<u64, u64>) -> Result<Self> {
        let trials: u64 = histogram.values().sum();
        if trials == 0 {
            return Err(Error::InvalidArgument("empty histogram".into()));
        }
        let total = trials as f64;
        let mean = histogram
            .iter()
            .map(|(&l, &c)| l as f64 * c as f64)
            .sum::<f64>()
            / total;
        let moment = |k: i32| {
            histogram
                .iter()
                .map(|(&l, &c)| (l as f64 - mean).powi(k) * c as f64)
                .sum::<f64>()
                / total
        };
        let central_moments = CentralMoments {
            m2: moment(2),
            m4: moment(4),
            m6: moment(6),
        };
        let long_games = histogram.range(2 * n..).map(|(_, &c)| c).sum();
        let mut dist = Self {
            n,
            trials,
            seed,
            mean,
            stddev: central_moments.m2.sqrt(),
            central_moments,
            gaussian_diffs: None,
            long_games,
            min_length: *histogram.keys().next().unwrap(),
            max_length: *histogram.keys().next_back().unwrap(),
            histogram,
            prng: PrngInfo {
                algorithm: PRNG_ALGORITHM,
                derivation: PRNG_DERIVATION,
            },
        };
        dist.gaussian_diffs = gaussian_moment_diffs(&dist).ok();
        Ok(dist)
    }

    /// `length,count` rows with a header.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("length,count\n");
        for (l, c) in &self.histogram {
            out.push_str(&format!("{l},{c}\n"));
        }
        out
    }
}

/// `d_k = |m_k - g_k| / g_k` for `k = 2, 4, 6`, where the matched Gaussian
/// has `g_2 = s^2`, `g_4 = 3 s^4`, `g_6 = 15 s^6` and `s^2` is the sample
/// variance. `d_2` is zero by construction.
pub fn gaussian_moment_diffs(dist: &LengthDistribution) -> Result<MomentDiffs> {
    if dist.trials < 2 {
        return Err(Error::InvalidArgument(
            "moment comparison needs at least two trials".into(),
        ));
    }
    let var = dist.central_moments.m2;
    if var <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    let rel = |sample: f64, gaussian: f64| (sample - gaussian).abs() / gaussian;
    Ok(MomentDiffs {
        d2: rel(dist.central_moments.m2, var),
        d4: rel(dist.central_moments.m4, 3.0 * var.powi(2)),
        d6: rel(dist.central_moments.m6, 15.0 * var.powi(3)),
    })
}

/// Runs `trials` independent playouts in parallel and aggregates their
/// lengths.
pub fn run_distribution(n: u64, trials: usize, seed: u64) -> Result<LengthDistribution> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    GameState::initial(n)?;
    let lengths: Vec<u64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| playout_with(n, Some(seed), &mut trial_rng(seed, t)).map(|g| g.length as u64))
        .collect::<Result<_>>()?;
    let mut histogram = BTreeMap::new();
    for l in lengths {
        *histogram.entry(l).or_insert(0u64) += 1;
    }
    let dist = LengthDistribution::from_histogram(n, seed, histogram)?;
    if dist.long_games > 0 {
        tracing::warn!(
            n,
            long_games = dist.long_games,
            max_length = dist.max_length,
            "observed games of length >= 2n"
        );
    }
    Ok(dist)
}
