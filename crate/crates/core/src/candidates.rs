//! Candidate model sets.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Result, SoilError};
use crate::path::SolutionPath;

pub const MAX_ALL_SUBSETS_P: usize = 20;

/// Description-length complexity of a model with `size` of `p` variables:
/// `s log(e p / s) + 2 log(s + 2)`, and `2 log 2` for the empty model.
pub fn complexity(size: usize, p: usize) -> f64 {
    if size == 0 {
        2.0 * std::f64::consts::LN_2
    } else {
        let s = size as f64;
        s * (std::f64::consts::E * p as f64 / s).ln() + 2.0 * (s + 2.0).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateModel {
    support: Vec<usize>,
    complexity: f64,
}

impl CandidateModel {
    /// Sorted, deduplicated support; indices must lie in `[0, p)`.
    pub fn new(mut support: Vec<usize>, p: usize) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if let Some(&j) = support.last() {
            if j >= p {
                return Err(SoilError::DimensionMismatch { expected: p, found: j + 1 });
            }
        }
        let complexity = complexity(support.len(), p);
        Ok(Self { support, complexity })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn size(&self) -> usize {
        self.support.len()
    }

    pub fn complexity(&self) -> f64 {
        self.complexity
    }

    pub fn contains(&self, j: usize) -> bool {
        self.support.binary_search(&j).is_ok()
    }
}

/// Distinct supports over a common dimension, ordered by (size, lexicographic).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    p: usize,
    models: Vec<CandidateModel>,
}

impl CandidateSet {
    pub fn from_supports<I>(supports: I, p: usize) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let mut distinct = BTreeSet::new();
        for s in supports {
            let m = CandidateModel::new(s, p)?;
            distinct.insert((m.size(), m.support));
        }
        let models = distinct
            .into_iter()
            .map(|(_, s)| CandidateModel::new(s, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { p, models })
    }

    /// Builds a set that keeps duplicate supports, in the given order. Used to
    /// check that weighting treats identical candidates symmetrically.
    pub fn with_duplicates<I>(supports: I, p: usize) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let models = supports
            .into_iter()
            .map(|s| CandidateModel::new(s, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { p, models })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn models(&self) -> &[CandidateModel] {
        &self.models
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CandidateModel> {
        self.models.iter()
    }

    pub fn position(&self, support: &[usize]) -> Option<usize> {
        self.models.iter().position(|m| m.support == support)
    }

    /// Drops models larger than `max_size`.
    pub fn capped(mut self, max_size: usize) -> Self {
        self.models.retain(|m| m.size() <= max_size);
        self
    }
}

/// One candidate per distinct support along the path.
pub fn extract_supports(path: &SolutionPath, p: usize) -> Result<CandidateSet> {
    if path.p != p {
        return Err(SoilError::DimensionMismatch { expected: p, found: path.p });
    }
    CandidateSet::from_supports(path.entries.iter().map(|e| e.support()), p)
}

/// Default support-size cap for merged sets: `floor(n/2) - 2`, so that every
/// model can be fitted on half of the rows.
pub fn default_max_support(n: usize) -> usize {
    (n / 2).saturating_sub(2)
}

/// Union of candidate sets, deduplicated, keeping models of size at most
/// `max_support_size`.
pub fn merge_sets(sets: &[CandidateSet], max_support_size: usize) -> Result<CandidateSet> {
    let p = match sets.first() {
        Some(s) => s.p,
        None => return Err(SoilError::ConfigInvalid("no candidate sets to merge".into())),
    };
    if let Some(other) = sets.iter().find(|s| s.p != p) {
        return Err(SoilError::DimensionMismatch { expected: p, found: other.p });
    }
    let merged = CandidateSet::from_supports(
        sets.iter().flat_map(|s| s.models.iter().map(|m| m.support.clone())),
        p,
    )?;
    Ok(merged.capped(max_support_size))
}

/// Every subset of `0..p`, including the empty model.
pub fn all_subsets(p: usize) -> Result<CandidateSet> {
    if p > MAX_ALL_SUBSETS_P {
        return Err(SoilError::TooLarge(p));
    }
    let supports = (0u32..(1u32 << p)).map(|mask| (0..p).filter(|&j| mask & (1 << j) != 0).collect());
    CandidateSet::from_supports(supports, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::PathEntry;
    use crate::penalty::PenaltyKind;
    use proptest::prelude::*;

    fn path_with(supports: &[&[usize]], p: usize) -> SolutionPath {
        let entries = supports
            .iter()
            .enumerate()
            .map(|(l, s)| {
                let mut coefficients = vec![0.0; p];
                for &j in *s {
                    coefficients[j] = 1.0;
                }
                PathEntry {
                    lambda: 1.0 / (l + 1) as f64,
                    intercept: 0.0,
                    coefficients,
                    sweeps: 1,
                }
            })
            .collect();
        SolutionPath {
            kind: PenaltyKind::Lasso,
            p,
            entries,
        }
    }

    fn supports(set: &CandidateSet) -> Vec<Vec<usize>> {
        set.iter().map(|m| m.support().to_vec()).collect()
    }

    #[test]
    fn empty_model_complexity() {
        assert_eq!(complexity(0, 10), 2.0 * 2f64.ln());
        let c1 = complexity(1, 10);
        assert!((c1 - (10f64.ln() + 1.0 + 2.0 * 3f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn complexity_strictly_increasing() {
        for p in [1usize, 2, 5, 20, 200] {
            for s in 1..p {
                assert!(complexity(s + 1, p) > complexity(s, p), "p={p} s={s}");
            }
        }
    }

    #[test]
    fn zero_path_gives_single_empty_model() {
        let set = extract_supports(&path_with(&[&[], &[], &[]], 4), 4).unwrap();
        assert_eq!(supports(&set), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn path_supports_are_deduplicated() {
        let set = extract_supports(&path_with(&[&[1], &[1], &[1, 2]], 4), 4).unwrap();
        assert_eq!(supports(&set), vec![vec![1], vec![1, 2]]);
    }

    #[test]
    fn merge_examples() {
        let a = CandidateSet::from_supports(vec![vec![1], vec![2]], 5).unwrap();
        let b = CandidateSet::from_supports(vec![vec![2], vec![3]], 5).unwrap();
        let m = merge_sets(&[a.clone(), b], 5).unwrap();
        assert_eq!(supports(&m), vec![vec![1], vec![2], vec![3]]);
        assert_eq!(merge_sets(&[a.clone(), a.clone()], 5).unwrap(), a);
        let c = CandidateSet::from_supports(vec![vec![1]], 6).unwrap();
        assert!(matches!(merge_sets(&[a, c], 5), Err(SoilError::DimensionMismatch { .. })));
    }

    #[test]
    fn merge_applies_size_cap() {
        let a = CandidateSet::from_supports(vec![vec![], vec![0, 1, 2], vec![0]], 5).unwrap();
        let m = merge_sets(&[a], 2).unwrap();
        assert_eq!(supports(&m), vec![vec![], vec![0]]);
        assert_eq!(default_max_support(100), 48);
        assert_eq!(default_max_support(3), 0);
    }

    #[test]
    fn all_subset_counts() {
        let s = all_subsets(2).unwrap();
        assert_eq!(supports(&s), vec![vec![], vec![0], vec![1], vec![0, 1]]);
        assert_eq!(all_subsets(8).unwrap().len(), 256);
        assert_eq!(all_subsets(21).unwrap_err(), SoilError::TooLarge(21));
    }

    #[test]
    fn out_of_range_index_rejected() {
        assert!(CandidateModel::new(vec![4], 4).is_err());
    }

    fn arb_set(p: usize) -> impl Strategy<Value = CandidateSet> {
        prop::collection::vec(prop::collection::btree_set(0..p, 0..=p), 0..12)
            .prop_map(move |v| CandidateSet::from_supports(v.into_iter().map(|s| s.into_iter().collect()), p).unwrap())
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_associative(a in arb_set(6), b in arb_set(6), c in arb_set(6)) {
            let ab = merge_sets(&[a.clone(), b.clone()], 6).unwrap();
            let ba = merge_sets(&[b.clone(), a.clone()], 6).unwrap();
            prop_assert_eq!(&ab, &ba);
            let left = merge_sets(&[ab, c.clone()], 6).unwrap();
            let bc = merge_sets(&[b, c], 6).unwrap();
            let right = merge_sets(&[a, bc], 6).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn extracted_indices_in_range(rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 7), 1..10)) {
            let entries = rows
                .into_iter()
                .map(|coefficients| PathEntry {
                    lambda: 1.0,
                    intercept: 0.0,
                    coefficients: coefficients.into_iter().map(|v| if v.abs() < 0.5 { 0.0 } else { v }).collect(),
                    sweeps: 1,
                })
                .collect();
            let path = SolutionPath { kind: PenaltyKind::Lasso, p: 7, entries };
            let set = extract_supports(&path, 7).unwrap();
            prop_assert!(set.iter().all(|m| m.support().iter().all(|&j| j < 7)));
            let sizes: Vec<usize> = set.iter().map(|m| m.size()).collect();
            prop_assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
