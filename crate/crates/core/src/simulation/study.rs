use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Dataset, Task};
use crate::error::{Result, SoilError};
use crate::fit::ols_fit;
use crate::importance::{rank_variables, threshold_select, weighted_symmetric_difference, ImportanceVector, SelectionReport};
use crate::pipeline::{compute_importance, SoilConfig};
use crate::rng::{derive_seed, stream_rng};
use crate::weighting::WeightingMethod;

use super::scenario::{generate_scenario, ScenarioConfig};

/// Weighting configuration shared by every replication, plus the thresholds
/// at which selections are scored. The ARM seed is replaced per replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyOptions {
    pub soil: SoilConfig,
    pub thresholds: Vec<f64>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            soil: SoilConfig::default(),
            thresholds: vec![0.5],
        }
    }
}

impl StudyOptions {
    pub fn validate(&self) -> Result<()> {
        self.soil.validate()?;
        for &c in &self.thresholds {
            if !(c > 0.0 && c < 1.0) {
                return Err(SoilError::BadThreshold(c));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRecord {
    pub method: WeightingMethod,
    pub importance: Vec<f64>,
    /// Support of the highest-weight candidate.
    pub top_model: Vec<usize>,
    /// Weight of the empty model, zero if it is not a candidate.
    pub empty_model_weight: f64,
    pub weighted_symdiff: f64,
    pub selections: Vec<SelectionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub n_candidates: usize,
    pub contains_truth: bool,
    pub methods: Vec<MethodRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionSummary {
    pub method: WeightingMethod,
    pub threshold: f64,
    pub mean_missed: f64,
    pub mean_over_selected: f64,
    pub mean_symdiff: f64,
    pub se_symdiff: f64,
    /// `mean_symdiff / r*`; absent when the true support is empty.
    pub mean_symdiff_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: WeightingMethod,
    pub mean_importance: Vec<f64>,
    pub std_error: Vec<f64>,
    pub mean_weighted_symdiff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub names: Vec<String>,
    pub true_support: Vec<usize>,
    pub replications: usize,
    pub methods: Vec<MethodSummary>,
    pub selection_stats: Vec<SelectionSummary>,
    pub per_replication: Vec<ReplicationRecord>,
}

impl StudyResult {
    pub fn method(&self, method: WeightingMethod) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn selection(&self, method: WeightingMethod, threshold: f64) -> Option<&SelectionSummary> {
        self.selection_stats
            .iter()
            .find(|s| s.method == method && s.threshold == threshold)
    }
}

fn record_replication(
    data: &Dataset,
    truth: &[usize],
    replication: usize,
    seed: u64,
    opts: &StudyOptions,
) -> Result<ReplicationRecord> {
    let cfg = SoilConfig {
        seed: derive_seed(seed, replication as u64),
        ..opts.soil.clone()
    };
    let result = compute_importance(data, &cfg)?;
    let cands = &result.candidates;
    let empty_pos = cands.position(&[]);
    let methods = result
        .methods
        .iter()
        .map(|m| {
            let selections = opts
                .thresholds
                .iter()
                .map(|&c| threshold_select(&m.importance, c, Some(truth)))
                .collect::<Result<Vec<_>>>()?;
            Ok(MethodRecord {
                method: m.method,
                importance: m.importance.values.clone(),
                top_model: cands.models()[m.weights.argmax()].support().to_vec(),
                empty_model_weight: empty_pos.map_or(0.0, |k| m.weights.as_slice()[k]),
                weighted_symdiff: weighted_symmetric_difference(&m.weights, cands, truth),
                selections,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicationRecord {
        replication,
        n_candidates: cands.len(),
        contains_truth: cands.position(truth).is_some(),
        methods,
    })
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(
    names: Vec<String>,
    truth: Vec<usize>,
    methods: &[WeightingMethod],
    thresholds: &[f64],
    records: Vec<ReplicationRecord>,
) -> StudyResult {
    let p = names.len();
    let r_star = truth.len();
    let mut summaries = Vec::new();
    let mut selection_stats = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        let per = |f: &dyn Fn(&MethodRecord) -> f64| records.iter().map(move |r| f(&r.methods[mi])).collect::<Vec<_>>();
        let (mut mean_importance, mut std_error) = (Vec::with_capacity(p), Vec::with_capacity(p));
        for j in 0..p {
            let vals = per(&|m| m.importance[j]);
            let (mean, se) = mean_and_se(vals.iter().copied());
            mean_importance.push(mean);
            std_error.push(se);
        }
        let wsd = per(&|m| m.weighted_symdiff);
        summaries.push(MethodSummary {
            method,
            mean_importance,
            std_error,
            mean_weighted_symdiff: mean_and_se(wsd.iter().copied()).0,
        });
        for (ti, &threshold) in thresholds.iter().enumerate() {
            let count = |f: fn(&SelectionReport) -> Option<usize>| per(&|m| f(&m.selections[ti]).unwrap_or(0) as f64);
            let missed = count(|s| s.missed_true);
            let over = count(|s| s.over_selected);
            let symdiff = count(|s| s.symmetric_difference);
            let (mean_symdiff, se_symdiff) = mean_and_se(symdiff.iter().copied());
            selection_stats.push(SelectionSummary {
                method,
                threshold,
                mean_missed: mean_and_se(missed.iter().copied()).0,
                mean_over_selected: mean_and_se(over.iter().copied()).0,
                mean_symdiff,
                se_symdiff,
                mean_symdiff_ratio: (r_star > 0).then(|| mean_symdiff / r_star as f64),
            });
        }
    }
    StudyResult {
        names,
        true_support: truth,
        replications: records.len(),
        methods: summaries,
        selection_stats,
        per_replication: records,
    }
}

/// Replicates the scenario `cfg.replications` times. Replication `r` draws
/// its data from stream `(cfg.seed, r)` and its ARM splits from a seed
/// derived from the same pair, so results do not depend on thread count.
pub fn run_study(cfg: &ScenarioConfig, opts: &StudyOptions) -> Result<StudyResult> {
    cfg.validate()?;
    opts.validate()?;
    let records = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let sim = generate_scenario(cfg, r)?;
            record_replication(&sim.data, &sim.true_support, r, cfg.seed, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(cfg.names(), cfg.true_support(), &opts.soil.methods, &opts.thresholds, records))
}

/// Guided simulation: keep the `top_m` highest-ranked variables of
/// `base_importance`, fit them by OLS, regenerate `Y = X b + sigma N(0, 1)`
/// on the original design and recompute every importance. The kept
/// variables play the role of the true support.
pub fn cross_examination(
    data: &Dataset,
    base_importance: &ImportanceVector,
    top_m: usize,
    replications: usize,
    seed: u64,
    opts: &StudyOptions,
) -> Result<StudyResult> {
    data.require_task(Task::Regression)?;
    opts.validate()?;
    if base_importance.len() != data.n_cols() {
        return Err(SoilError::DimensionMismatch {
            expected: data.n_cols(),
            found: base_importance.len(),
        });
    }
    if top_m < 1 || top_m > data.n_cols() {
        return Err(SoilError::ConfigInvalid(format!(
            "top must be in 1..={}, got {top_m}",
            data.n_cols()
        )));
    }
    if replications < 1 {
        return Err(SoilError::ConfigInvalid("replications must be >= 1".into()));
    }
    let mut kept: Vec<usize> = rank_variables(base_importance)[..top_m].to_vec();
    kept.sort_unstable();
    let fit = ols_fit(data, &kept)?;
    let n = data.n_rows();
    let fitted: Vec<f64> = (0..n).map(|i| fit.predict_row(data, i)).collect();
    let records = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let y = DVector::from_iterator(
                n,
                fitted
                    .iter()
                    .map(|&m| m + fit.sigma_hat * rng.sample::<f64, _>(StandardNormal)),
            );
            let regenerated = data.with_response(y)?;
            record_replication(&regenerated, &kept, r, seed, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(
        data.names().to_vec(),
        kept,
        &opts.soil.methods,
        &opts.thresholds,
        records,
    ))
}
