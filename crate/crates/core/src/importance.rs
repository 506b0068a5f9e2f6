//! Importance scores, thresholded selection and selection-error counts.

use serde::Serialize;

use crate::candidates::CandidateSet;
use crate::error::{Result, SoilError};
use crate::weighting::WeightVector;

const CLIP_SLACK: f64 = 1e-12;

/// Per-variable importance `S_j`, the total weight of candidates containing `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceVector {
    pub values: Vec<f64>,
    pub names: Vec<String>,
}

impl ImportanceVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `S_j = sum_k w_k 1(j in A_k)`. Values are clipped to `[0, 1]` only within
/// floating slack; larger excursions are left visible.
pub fn soil(w: &WeightVector, cands: &CandidateSet, names: &[String]) -> Result<ImportanceVector> {
    if w.len() != cands.len() {
        return Err(SoilError::LengthMismatch {
            left: w.len(),
            right: cands.len(),
        });
    }
    if names.len() != cands.p() {
        return Err(SoilError::DimensionMismatch {
            expected: cands.p(),
            found: names.len(),
        });
    }
    let mut values = vec![0.0; cands.p()];
    for (&wk, model) in w.as_slice().iter().zip(cands.iter()) {
        for &j in model.support() {
            values[j] += wk;
        }
    }
    for v in &mut values {
        if *v > 1.0 && *v <= 1.0 + CLIP_SLACK {
            *v = 1.0;
        } else if *v < 0.0 && *v >= -CLIP_SLACK {
            *v = 0.0;
        }
    }
    Ok(ImportanceVector {
        values,
        names: names.to_vec(),
    })
}

/// Outcome of keeping the variables with importance above a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub threshold: f64,
    pub selected: Vec<usize>,
    /// True variables with `S_j <= c`; present only when the truth is known.
    pub missed_true: Option<usize>,
    /// Non-true variables with `S_j > c`.
    pub over_selected: Option<usize>,
    pub symmetric_difference: Option<usize>,
}

/// `A_c = {j : S_j > c}` (strict), with error counts against `truth` if given.
pub fn threshold_select(imp: &ImportanceVector, c: f64, truth: Option<&[usize]>) -> Result<SelectionReport> {
    if !(c > 0.0 && c < 1.0) {
        return Err(SoilError::BadThreshold(c));
    }
    let selected: Vec<usize> = (0..imp.len()).filter(|&j| imp.values[j] > c).collect();
    let (missed, over) = match truth {
        Some(t) => {
            let missed = t.iter().filter(|&&j| imp.values[j] <= c).count();
            let over = selected.iter().filter(|j| !t.contains(j)).count();
            (Some(missed), Some(over))
        }
        None => (None, None),
    };
    Ok(SelectionReport {
        threshold: c,
        selected,
        missed_true: missed,
        over_selected: over,
        symmetric_difference: missed.zip(over).map(|(a, b)| a + b),
    })
}

/// Indices by decreasing importance, ties broken by ascending index.
pub fn rank_variables(imp: &ImportanceVector) -> Vec<usize> {
    let mut order: Vec<usize> = (0..imp.len()).collect();
    order.sort_by(|&a, &b| imp.values[b].total_cmp(&imp.values[a]).then(a.cmp(&b)));
    order
}

/// `sum_k w_k |A_k symmetric-difference truth|`, the quantity whose
/// convergence to zero defines consistent weighting.
pub fn weighted_symmetric_difference(w: &WeightVector, cands: &CandidateSet, truth: &[usize]) -> f64 {
    w.as_slice()
        .iter()
        .zip(cands.iter())
        .map(|(&wk, model)| {
            let missing = truth.iter().filter(|&&j| !model.contains(j)).count();
            let extra = model.support().iter().filter(|j| !truth.contains(j)).count();
            wk * (missing + extra) as f64
        })
        .sum()
}
