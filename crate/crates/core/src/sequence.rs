//! Generation of the Fibonacci Quilt sequence.
//!
//! Terms are produced by `q_i = q_{i-3} + q_{i-2}` from the seeds
//! `1, 2, 3, 4`. The longer recurrence `q_{n+1} = q_n + q_{n-4}` and the
//! partial-sum identity `q_1 + ... + q_n = q_{n+5} - 6` are checked by
//! [`check_identities`], never used to build terms.

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::{Error, Result};

const SEEDS: [u64; 4] = [1, 2, 3, 4];

/// Terms `q_1..=q_max` of the Fibonacci Quilt sequence.
///
/// Immutable once built and cheap to share between threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiltSequence {
    // terms[k] holds q_{k+1}
    terms: Vec<u64>,
}

impl QuiltSequence {
    pub fn generate(max_index: usize) -> Result<Self> {
        if max_index == 0 {
            return Err(Error::InvalidArgument(
                "max_index must be at least 1".into(),
            ));
        }
        let safe_bound = max_safe_index();
        if max_index > safe_bound {
            return Err(Error::Overflow {
                index: max_index,
                safe_bound,
            });
        }
        Ok(Self {
            terms: standard().terms[..max_index].to_vec(),
        })
    }

    /// Every term that fits in a `u64`.
    pub fn standard() -> &'static QuiltSequence {
        standard()
    }

    pub fn max_index(&self) -> usize {
        self.terms.len()
    }

    /// `q_i`, or `None` outside `1..=max_index`.
    pub fn term(&self, i: usize) -> Option<u64> {
        i.checked_sub(1).and_then(|k| self.terms.get(k)).copied()
    }

    /// Terms in index order; `terms()[0]` is `q_1`.
    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn index_of_value(&self, v: u64) -> Option<usize> {
        self.terms.binary_search(&v).ok().map(|k| k + 1)
    }

    /// Number of terms `<= v`, which is also the largest index whose term
    /// is at most `v` (0 when `v == 0`).
    pub fn count_at_most(&self, v: u64) -> usize {
        self.terms.partition_point(|&t| t <= v)
    }

    pub fn verify_identities(&self) -> IdentityReport {
        check_identities(&self.terms)
    }
}

fn standard() -> &'static QuiltSequence {
    static TABLE: OnceLock<QuiltSequence> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut terms = SEEDS.to_vec();
        loop {
            let k = terms.len();
            match terms[k - 3].checked_add(terms[k - 2]) {
                Some(next) => terms.push(next),
                None => break,
            }
        }
        QuiltSequence { terms }
    })
}

/// The largest index whose term is representable as a `u64`.
pub fn max_safe_index() -> usize {
    standard().terms.len()
}

/// `q_i` from the shared table.
///
/// # Panics
///
/// If `i == 0` or `q_i` does not fit in a `u64`.
pub fn q(i: usize) -> u64 {
    standard()
        .term(i)
        .unwrap_or_else(|| panic!("q_{i} is outside the representable range"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `q_{n+1} = q_n + q_{n-4}` for `n >= 6`.
    RecurrenceA,
    /// `q_{n+1} = q_{n-1} + q_{n-2}` for `n >= 5`.
    RecurrenceB,
    /// `q_1 + ... + q_n = q_{n+5} - 6`.
    PartialSum,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Identity::RecurrenceA => "q(n+1) = q(n) + q(n-4)",
            Identity::RecurrenceB => "q(n+1) = q(n-1) + q(n-2)",
            Identity::PartialSum => "sum q(1..n) = q(n+5) - 6",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityFailure {
    pub identity: Identity,
    /// The `n` at which the identity first fails.
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub recurrence_a_ok: bool,
    pub recurrence_b_ok: bool,
    pub sum_identity_ok: bool,
    pub first_failure: Option<IdentityFailure>,
}

impl IdentityReport {
    pub fn all_ok(&self) -> bool {
        self.recurrence_a_ok && self.recurrence_b_ok && self.sum_identity_ok
    }
}

/// Checks the three identities at every `n` where all referenced terms
/// are present in `terms` (`terms[0]` is `q_1`).
pub fn check_identities(terms: &[u64]) -> IdentityReport {
    let q = |i: usize| terms[i - 1] as u128;
    let len = terms.len();
    let mut failures = Vec::new();

    let first_a = (6..len).find(|&n| q(n + 1) != q(n) + q(n - 4));
    if let Some(n) = first_a {
        failures.push(IdentityFailure {
            identity: Identity::RecurrenceA,
            n,
        });
    }
    let first_b = (5..len).find(|&n| q(n + 1) != q(n - 1) + q(n - 2));
    if let Some(n) = first_b {
        failures.push(IdentityFailure {
            identity: Identity::RecurrenceB,
            n,
        });
    }
    let mut partial = 0u128;
    let mut first_sum = None;
    for n in 1..=len.saturating_sub(5) {
        partial += q(n);
        if partial + 6 != q(n + 5) {
            first_sum = Some(n);
            break;
        }
    }
    if let Some(n) = first_sum {
        failures.push(IdentityFailure {
            identity: Identity::PartialSum,
            n,
        });
    }

    IdentityReport {
        recurrence_a_ok: first_a.is_none(),
        recurrence_b_ok: first_b.is_none(),
        sum_identity_ok: first_sum.is_none(),
        first_failure: failures.into_iter().min_by_key(|f| f.n),
    }
}

/// Generates `q_1..=q_max_index` and checks the identities over it.
pub fn verify_identities(max_index: usize) -> Result<IdentityReport> {
    Ok(QuiltSequence::generate(max_index)?.verify_identities())
}
