//! FQ-legal decompositions.
//!
//! A set of distinct indices is FQ-legal when no two of them differ by
//! 1, 3 or 4 and it does not contain both 1 and 3. These are exactly the
//! sets of cells on the quilt spiral that pairwise share no wall.

use std::fmt;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::sequence::{q, QuiltSequence};
use crate::{Error, Result};

/// Index distances that make two terms adjacent on the quilt.
const FORBIDDEN_DISTANCES: [usize; 4] = [0, 1, 3, 4];

pub fn is_fq_legal(indices: &[usize]) -> bool {
    if indices.is_empty() || indices.contains(&0) {
        return false;
    }
    if indices.contains(&1) && indices.contains(&3) {
        return false;
    }
    indices.iter().enumerate().all(|(a, &x)| {
        indices[a + 1..]
            .iter()
            .all(|&y| !FORBIDDEN_DISTANCES.contains(&x.abs_diff(y)))
    })
}

/// A sum of distinct sequence terms, stored by strictly decreasing index.
///
/// Construction does not require legality; [`Decomposition::is_fq_legal`]
/// answers that.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawDecomposition")]
pub struct Decomposition {
    indices: Vec<usize>,
    value: u64,
}

#[derive(Deserialize)]
struct RawDecomposition {
    indices: Vec<usize>,
    value: u64,
}

impl TryFrom<RawDecomposition> for Decomposition {
    type Error = Error;

    fn try_from(raw: RawDecomposition) -> Result<Self> {
        let decomposition = Decomposition::new(raw.indices)?;
        if decomposition.value != raw.value {
            return Err(Error::Parse(format!(
                "decomposition value {} does not match its terms ({})",
                raw.value, decomposition.value
            )));
        }
        Ok(decomposition)
    }
}

impl Decomposition {
    /// Accepts indices in any order; they must be distinct and nonzero.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("empty decomposition".into()));
        }
        indices.sort_unstable_by(|a, b| b.cmp(a));
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "repeated index in {indices:?}"
            )));
        }
        let seq = QuiltSequence::standard();
        let mut value = 0u64;
        for &i in &indices {
            let term = seq
                .term(i)
                .ok_or_else(|| Error::InvalidArgument(format!("no term with index {i}")))?;
            value = value
                .checked_add(term)
                .ok_or_else(|| Error::InvalidArgument("decomposition value overflows".into()))?;
        }
        Ok(Self { indices, value })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Term values, largest first.
    pub fn terms(&self) -> Vec<u64> {
        self.indices.iter().map(|&i| q(i)).collect()
    }

    pub fn is_fq_legal(&self) -> bool {
        is_fq_legal(&self.indices)
    }
}

/// `28+16+4+2 [11,9,4,2]`
impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.terms().iter().map(u64::to_string).collect();
        let indices: Vec<String> = self.indices.iter().map(usize::to_string).collect();
        write!(f, "{} [{}]", terms.join("+"), indices.join(","))
    }
}

/// Depth-first search for FQ-legal index sets over `terms` (positional,
/// 1-based) summing to `target`. Indices are chosen in decreasing order and
/// `visit` sees each set largest index first.
fn search_legal<F>(terms: &[u64], target: u64, mut visit: F) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    // prefix[k] = terms[0] + ... + terms[k-1]
    let mut prefix = Vec::with_capacity(terms.len() + 1);
    prefix.push(0u128);
    for &t in terms {
        prefix.push(prefix.last().unwrap() + t as u128);
    }
    let top = terms.partition_point(|&t| t <= target);
    let mut chosen = Vec::new();
    descend(terms, &prefix, top, target, &mut chosen, &mut visit)
}

fn descend<F>(
    terms: &[u64],
    prefix: &[u128],
    top: usize,
    remaining: u64,
    chosen: &mut Vec<usize>,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    for idx in (1..=top).rev() {
        // Even all of q_1..q_idx together fall short.
        if prefix[idx] < remaining as u128 {
            break;
        }
        let value = terms[idx - 1];
        if value > remaining || !compatible(chosen, idx) {
            continue;
        }
        chosen.push(idx);
        let flow = if value == remaining {
            visit(chosen)
        } else {
            descend(terms, prefix, idx - 1, remaining - value, chosen, visit)
        };
        chosen.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

/// `chosen` is legal and strictly decreasing with every entry above `idx`.
/// At most two chosen indices can lie within distance 4 of `idx`, and they
/// are the last two.
fn compatible(chosen: &[usize], idx: usize) -> bool {
    chosen.iter().rev().take(2).all(|&c| {
        let d = c - idx;
        !FORBIDDEN_DISTANCES.contains(&d) && !(idx == 1 && c == 3)
    })
}

/// Every FQ-legal decomposition of `n`, ordered by decreasing index list
/// (largest leading index first).
pub fn enumerate_decompositions(n: u64) -> Result<Vec<Decomposition>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let seq = QuiltSequence::standard();
    let mut found = Vec::new();
    let _ = search_legal(seq.terms(), n, |indices| {
        found.push(Decomposition {
            indices: indices.to_vec(),
            value: n,
        });
        ControlFlow::Continue(())
    });
    found.sort_by(|a, b| b.indices.cmp(&a.indices));
    Ok(found)
}

/// Maximum (`L(n)`) and minimum (`l(n)`) term counts over the FQ-legal
/// decompositions of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExtremalCounts {
    #[serde(rename = "L")]
    pub max_terms: usize,
    #[serde(rename = "l")]
    pub min_terms: usize,
}

pub fn extremal_counts(n: u64) -> Result<ExtremalCounts> {
    let all = enumerate_decompositions(n)?;
    let max_terms = all.iter().map(Decomposition::len).max();
    let min_terms = all.iter().map(Decomposition::len).min();
    match (max_terms, min_terms) {
        (Some(max_terms), Some(min_terms)) => Ok(ExtremalCounts {
            max_terms,
            min_terms,
        }),
        _ => Err(Error::Internal(format!(
            "{n} has no FQ-legal decomposition"
        ))),
    }
}

/// Builds the first `count` terms straight from the defining property:
/// scan upward and keep every integer that has no FQ-legal decomposition
/// over the terms kept so far.
///
/// Shares nothing with the recurrence generator in [`crate::sequence`].
pub fn sequence_from_definition(count: usize) -> Vec<u64> {
    let mut terms: Vec<u64> = Vec::with_capacity(count);
    let mut m = 0u64;
    while terms.len() < count {
        m += 1;
        let representable = search_legal(&terms, m, |_| ControlFlow::Break(())).is_break();
        if !representable {
            terms.push(m);
        }
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::*;

    fn index_lists(n: u64) -> Vec<Vec<usize>> {
        enumerate_decompositions(n)
            .unwrap()
            .into_iter()
            .map(|d| d.indices().to_vec())
            .collect()
    }

    #[test]
    fn legality_examples() {
        assert!(is_fq_legal(&[1, 6]));
        assert!(is_fq_legal(&[3, 5]));
        assert!(!is_fq_legal(&[1, 3]));
        assert!(!is_fq_legal(&[2, 6]));
        assert!(!is_fq_legal(&[5, 4]));
        assert!(!is_fq_legal(&[7, 4]));
        assert!(!is_fq_legal(&[2, 2]));
        assert!(is_fq_legal(&[2, 4]));
        assert!(is_fq_legal(&[11, 9, 4, 2]));
        assert!(!is_fq_legal(&[]));
        assert!(!is_fq_legal(&[0]));
    }

    #[test]
    fn eight_has_two_decompositions() {
        assert_eq!(index_lists(8), vec![vec![6, 1], vec![5, 3]]);
    }

    #[test]
    fn fifty() {
        let lists = index_lists(50);
        assert!(lists.contains(&vec![13, 1]));
        assert!(lists.contains(&vec![11, 9, 4, 2]));
        let counts = extremal_counts(50).unwrap();
        assert_eq!((counts.max_terms, counts.min_terms), (4, 2));
    }

    #[test]
    fn small_values() {
        assert_eq!(index_lists(1), vec![vec![1]]);
        assert_eq!(index_lists(4), vec![vec![4]]);
        let c4 = extremal_counts(4).unwrap();
        assert_eq!((c4.max_terms, c4.min_terms), (1, 1));
        let c8 = extremal_counts(8).unwrap();
        assert_eq!((c8.max_terms, c8.min_terms), (2, 2));
        assert!(enumerate_decompositions(0).is_err());
    }

    #[test]
    fn definition_oracle_prefix() {
        assert_eq!(sequence_from_definition(6), vec![1, 2, 3, 4, 5, 7]);
        // 6 is the first integer skipped, via 2 + 4.
        let first = sequence_from_definition(5);
        assert!(!first.contains(&6));
        assert!(is_fq_legal(&[2, 4]));
    }

    #[test]
    fn display() {
        let d = Decomposition::new(vec![2, 4, 9, 11]).unwrap();
        assert_eq!(d.to_string(), "28+16+4+2 [11,9,4,2]");
        assert_eq!(d.value(), 50);
    }

    #[test]
    fn construction_errors() {
        assert!(Decomposition::new(vec![]).is_err());
        assert!(Decomposition::new(vec![3, 3]).is_err());
        assert!(Decomposition::new(vec![0]).is_err());
    }

    #[test]
    fn serde_rejects_wrong_value() {
        let ok: Decomposition = serde_json::from_str(r#"{"indices":[6,1],"value":8}"#).unwrap();
        assert_eq!(ok.indices(), &[6, 1]);
        assert!(serde_json::from_str::<Decomposition>(r#"{"indices":[6,1],"value":9}"#).is_err());
    }
}
