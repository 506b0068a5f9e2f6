//! Model weights: data-splitting (ARM), BIC with a complexity prior (BIC-p),
//! and generalized fiducial probabilities.
//!
//! All schemes work with unnormalized log-scores and normalize them with a
//! log-sum-exp, since the raw products of densities underflow for moderate n.
//! Every scheme multiplies by the prior `exp(-psi * C_k)` where applicable.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::candidates::CandidateSet;
use crate::data::{Dataset, Task};
use crate::error::{Result, SoilError};
use crate::fit::{bernoulli_log_lik, logistic_fit, logistic_fit_rows, ols_fit, ols_fit_rows, SIGMA_FLOOR};
use crate::rng::stream_rng;

pub const DEFAULT_PSI: f64 = 0.5;
pub const DEFAULT_SPLITS: usize = 100;
pub const DEFAULT_FIDUCIAL_GAMMA: f64 = 1.0;
/// RSS floor for the fiducial score.
pub const RSS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeightingMethod {
    #[serde(rename = "arm")]
    Arm,
    #[serde(rename = "bic-p")]
    BicP,
    #[serde(rename = "fiducial")]
    Fiducial,
}

impl WeightingMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightingMethod::Arm => "arm",
            WeightingMethod::BicP => "bic-p",
            WeightingMethod::Fiducial => "fiducial",
        }
    }

    /// Report label, e.g. `SOIL-ARM`.
    pub fn label(self) -> &'static str {
        match self {
            WeightingMethod::Arm => "SOIL-ARM",
            WeightingMethod::BicP => "SOIL-BIC-p",
            WeightingMethod::Fiducial => "SOIL-fiducial",
        }
    }
}

impl std::fmt::Display for WeightingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for WeightingMethod {
    type Err = SoilError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arm" | "soil-arm" => Ok(WeightingMethod::Arm),
            "bic-p" | "bicp" | "bic" | "soil-bic-p" => Ok(WeightingMethod::BicP),
            "fiducial" | "gfi" => Ok(WeightingMethod::Fiducial),
            other => Err(SoilError::ConfigInvalid(format!("unknown weighting method '{other}'"))),
        }
    }
}

/// A probability vector over candidate models.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Accepts a nonnegative vector summing to one within 1e-10.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.is_empty() || w.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-10 {
            return Err(SoilError::ConfigInvalid("weights are not a probability vector".into()));
        }
        Ok(Self(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest weight; the first one on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &w) in self.0.iter().enumerate() {
            if w > self.0[best] {
                best = k;
            }
        }
        best
    }
}

/// `w_k = exp(s_k - logsumexp(s))`; entries equal to `-inf` get weight 0.
pub fn normalize_log_weights(log_scores: &[f64]) -> Result<WeightVector> {
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(SoilError::AllInfinite);
    }
    let shifted: Vec<f64> = log_scores.iter().map(|&s| (s - max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    Ok(WeightVector(shifted.into_iter().map(|v| v / total).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub psi: f64,
    pub n_splits: usize,
    pub seed: u64,
    pub sigma_floor: f64,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self {
            psi: DEFAULT_PSI,
            n_splits: DEFAULT_SPLITS,
            seed: 0,
            sigma_floor: SIGMA_FLOOR,
        }
    }
}

impl ArmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_splits < 1 {
            return Err(SoilError::ConfigInvalid("ARM needs at least one split".into()));
        }
        if !(self.psi >= 0.0) {
            return Err(SoilError::ConfigInvalid(format!("psi must be >= 0, got {}", self.psi)));
        }
        if !(self.sigma_floor > 0.0) {
            return Err(SoilError::ConfigInvalid("sigma floor must be positive".into()));
        }
        Ok(())
    }
}

/// Random halving of `0..n` for split number `split`: the training half has
/// `ceil(n/2)` rows, the test half the rest. Both halves are sorted.
pub fn split_rows(n: usize, seed: u64, split: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rng = stream_rng(seed, split as u64);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let n_train = n.div_ceil(2);
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Log-scores of one split: each candidate is fitted on `train` and scored by
/// its predictive log-likelihood on `test` plus `-psi * C_k`. Gaussian
/// regression drops the constant `-(|test|/2) log(2 pi)`, which is common to
/// every candidate. Candidates that cannot be fitted score `-inf`.
pub fn arm_split_log_scores(
    data: &Dataset,
    cands: &CandidateSet,
    train: &[usize],
    test: &[usize],
    cfg: &ArmConfig,
) -> Vec<f64> {
    let y = data.y();
    let psi = cfg.psi;
    cands
        .iter()
        .map(|model| {
            let prior = -psi * model.complexity();
            match data.task() {
                Task::Regression => match ols_fit_rows(data, model.support(), train, cfg.sigma_floor) {
                    Ok(fit) => {
                        let sigma = fit.sigma_hat;
                        let sq: f64 = test
                            .iter()
                            .map(|&i| (y[i] - fit.predict_row(data, i)).powi(2))
                            .sum();
                        prior - test.len() as f64 * sigma.ln() - sq / (2.0 * sigma * sigma)
                    }
                    Err(_) => f64::NEG_INFINITY,
                },
                Task::Classification => match logistic_fit_rows(data, model.support(), train) {
                    Ok(fit) => {
                        prior
                            + test
                                .iter()
                                .map(|&i| bernoulli_log_lik(y[i], fit.probability(data, i)))
                                .sum::<f64>()
                    }
                    Err(_) => f64::NEG_INFINITY,
                },
            }
        })
        .collect()
}

fn arm_weights_impl(data: &Dataset, cands: &CandidateSet, cfg: &ArmConfig) -> Result<WeightVector> {
    cfg.validate()?;
    check_candidates(data, cands)?;
    if data.n_rows() < 4 {
        return Err(SoilError::InvalidDataset("ARM needs at least 4 rows".into()));
    }
    let per_split: Vec<Vec<f64>> = (0..cfg.n_splits)
        .into_par_iter()
        .map(|split| {
            let (train, test) = split_rows(data.n_rows(), cfg.seed, split);
            let scores = arm_split_log_scores(data, cands, &train, &test, cfg);
            normalize_log_weights(&scores)
                .map(WeightVector::into_vec)
                .map_err(|_| SoilError::NoFittableCandidate { split })
        })
        .collect::<Result<_>>()?;
    let mut avg = vec![0.0; cands.len()];
    for w in &per_split {
        for (a, v) in avg.iter_mut().zip(w) {
            *a += v;
        }
    }
    let l = cfg.n_splits as f64;
    let avg: Vec<f64> = avg.into_iter().map(|v| v / l).collect();
    let sum: f64 = avg.iter().sum();
    Ok(WeightVector(avg.into_iter().map(|v| v / sum).collect()))
}

/// ARM weights for Gaussian regression, averaged over `cfg.n_splits` splits.
pub fn arm_weights_regression(data: &Dataset, cands: &CandidateSet, cfg: &ArmConfig) -> Result<WeightVector> {
    data.require_task(Task::Regression)?;
    arm_weights_impl(data, cands, cfg)
}

/// ARM weights for binary logistic regression.
pub fn arm_weights_logistic(data: &Dataset, cands: &CandidateSet, cfg: &ArmConfig) -> Result<WeightVector> {
    data.require_task(Task::Classification)?;
    let ones = data.y().iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == data.n_rows() {
        return Err(SoilError::OneClassOnly);
    }
    arm_weights_impl(data, cands, cfg)
}

/// ARM weights for either task.
pub fn arm_weights(data: &Dataset, cands: &CandidateSet, cfg: &ArmConfig) -> Result<WeightVector> {
    match data.task() {
        Task::Regression => arm_weights_regression(data, cands, cfg),
        Task::Classification => arm_weights_logistic(data, cands, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicPConfig {
    pub psi: f64,
    /// Multiplier of `s_k log n` in the regression criterion.
    pub regression_penalty: f64,
    /// Multiplier of `s_k log n` in the logistic criterion.
    pub classification_penalty: f64,
}

impl Default for BicPConfig {
    fn default() -> Self {
        Self {
            psi: DEFAULT_PSI,
            regression_penalty: 1.0,
            classification_penalty: 2.0,
        }
    }
}

impl BicPConfig {
    pub fn with_psi(psi: f64) -> Self {
        Self { psi, ..Self::default() }
    }
}

/// BIC-p log-score `-I_k/2 - psi C_k` with `I_k = -2 loglik + penalty * s log n`.
pub fn bic_p_log_score(log_likelihood: f64, size: usize, complexity: f64, n: usize, psi: f64, penalty: f64) -> f64 {
    let info = -2.0 * log_likelihood + penalty * size as f64 * (n as f64).ln();
    -info / 2.0 - psi * complexity
}

/// BIC-p weights from full-data maximum likelihood fits.
pub fn bic_p_weights(data: &Dataset, cands: &CandidateSet, cfg: &BicPConfig) -> Result<WeightVector> {
    check_candidates(data, cands)?;
    if !(cfg.psi >= 0.0) {
        return Err(SoilError::ConfigInvalid(format!("psi must be >= 0, got {}", cfg.psi)));
    }
    let n = data.n_rows();
    let scores: Vec<f64> = cands
        .models()
        .par_iter()
        .map(|model| {
            let (ll, penalty) = match data.task() {
                Task::Regression => (ols_fit(data, model.support()).map(|f| f.log_likelihood), cfg.regression_penalty),
                Task::Classification => (
                    logistic_fit(data, model.support()).map(|f| f.log_likelihood),
                    cfg.classification_penalty,
                ),
            };
            match ll {
                Ok(ll) => bic_p_log_score(ll, model.size(), model.complexity(), n, cfg.psi, penalty),
                Err(_) => f64::NEG_INFINITY,
            }
        })
        .collect();
    normalize_log_weights(&scores)
}

/// `log R(A)` for a model of `size` variables with residual sum of squares
/// `rss` among `p` predictors and `n` rows:
/// `lgamma((n-s)/2) - ((n-s-1)/2) log(pi RSS) - ((s+1)/2) log n - gamma log C(p, s)`.
pub fn fiducial_log_score(n: usize, p: usize, size: usize, rss: f64, gamma: f64) -> f64 {
    if n < size + 2 {
        return f64::NEG_INFINITY;
    }
    let rss = rss.max(RSS_FLOOR);
    let nf = n as f64;
    let s = size as f64;
    ln_gamma((nf - s) / 2.0) - (nf - s - 1.0) / 2.0 * (std::f64::consts::PI * rss).ln() - (s + 1.0) / 2.0 * nf.ln()
        - gamma * ln_binomial(p as u64, size as u64)
}

/// Generalized fiducial model probabilities (regression only).
pub fn fiducial_weights(data: &Dataset, cands: &CandidateSet, gamma: f64) -> Result<WeightVector> {
    data.require_task(Task::Regression)?;
    check_candidates(data, cands)?;
    let (n, p) = (data.n_rows(), data.n_cols());
    let scores: Vec<f64> = cands
        .models()
        .par_iter()
        .map(|model| match ols_fit(data, model.support()) {
            Ok(fit) => fiducial_log_score(n, p, model.size(), fit.rss, gamma),
            Err(_) => f64::NEG_INFINITY,
        })
        .collect();
    normalize_log_weights(&scores)
}

fn check_candidates(data: &Dataset, cands: &CandidateSet) -> Result<()> {
    if cands.p() != data.n_cols() {
        return Err(SoilError::DimensionMismatch {
            expected: data.n_cols(),
            found: cands.p(),
        });
    }
    if cands.is_empty() {
        return Err(SoilError::ConfigInvalid("empty candidate set".into()));
    }
    Ok(())
}
