//! Unpenalized least-squares and logistic fits on a subset of columns.
//!
//! Every fit includes an unpenalized intercept. Fits can be restricted to a
//! subset of rows, which is how the data-splitting weights train on one half
//! of the sample and score the other.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::{Dataset, Task};
use crate::error::{Result, SoilError};

/// Floor applied to the residual scale of a least-squares fit.
pub const SIGMA_FLOOR: f64 = 1e-8;
/// Ridge jitter added to the weighted normal equations in IRLS.
pub const IRLS_JITTER: f64 = 1e-10;
/// Fitted probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]`.
pub const PROB_CLAMP: f64 = 1e-10;
pub const IRLS_TOL: f64 = 1e-8;
pub const IRLS_MAX_ITER: usize = 100;
/// Slope magnitude beyond which a logistic fit is flagged as separated.
pub const SEPARATION_BOUND: f64 = 30.0;

// Squared sine of the angle between a normalized column and the span of the
// preceding ones, below which the design is treated as singular.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub rss: f64,
    pub sigma_hat: f64,
    pub log_likelihood: f64,
    pub n_rows: usize,
}

impl LinearFit {
    pub fn predict_row(&self, data: &Dataset, row: usize) -> f64 {
        let x = data.x();
        self.support
            .iter()
            .zip(&self.coefficients)
            .fold(self.intercept, |acc, (&j, &b)| acc + b * x[(row, j)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticFit {
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
    /// Set when a slope exceeded [`SEPARATION_BOUND`] and iteration stopped.
    pub separated: bool,
}

impl LogisticFit {
    pub fn linear_predictor(&self, data: &Dataset, row: usize) -> f64 {
        let x = data.x();
        self.support
            .iter()
            .zip(&self.coefficients)
            .fold(self.intercept, |acc, (&j, &b)| acc + b * x[(row, j)])
    }

    /// Clamped probability of class 1.
    pub fn probability(&self, data: &Dataset, row: usize) -> f64 {
        clamp_prob(sigmoid(self.linear_predictor(data, row)))
    }
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Bernoulli log-likelihood of one observation with clamping.
pub fn bernoulli_log_lik(y: f64, p: f64) -> f64 {
    let p = clamp_prob(p);
    y * p.ln() + (1.0 - y) * (1.0 - p).ln()
}

fn validate_support(support: &[usize], p: usize) -> Result<()> {
    let mut seen = vec![false; p];
    for &j in support {
        if j >= p {
            return Err(SoilError::DimensionMismatch { expected: p, found: j + 1 });
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(SoilError::ConfigInvalid(format!("duplicate column {j} in support")));
        }
    }
    Ok(())
}

fn check_size(support: &[usize], rows: usize) -> Result<()> {
    if support.len() + 1 >= rows {
        return Err(SoilError::TooManyVariables {
            size: support.len(),
            rows,
        });
    }
    Ok(())
}

/// Least-squares fit on all rows.
pub fn ols_fit(data: &Dataset, support: &[usize]) -> Result<LinearFit> {
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    ols_fit_rows(data, support, &rows, SIGMA_FLOOR)
}

/// Least-squares fit of the response on `support` (plus intercept), using
/// only `rows`. The residual scale is the maximum-likelihood estimate
/// `sqrt(RSS / rows)`, floored at `sigma_floor`.
pub fn ols_fit_rows(data: &Dataset, support: &[usize], rows: &[usize], sigma_floor: f64) -> Result<LinearFit> {
    validate_support(support, data.n_cols())?;
    let m = rows.len();
    check_size(support, m)?;
    let k = support.len() + 1;
    let x = data.x();
    let y = data.y();

    let mut design = DMatrix::from_fn(m, k, |r, c| if c == 0 { 1.0 } else { x[(rows[r], support[c - 1])] });
    // Unit-norm columns make the rank test scale free.
    let mut norms = Vec::with_capacity(k);
    for mut col in design.column_iter_mut() {
        let nrm = col.norm();
        if nrm == 0.0 {
            return Err(SoilError::RankDeficient);
        }
        col /= nrm;
        norms.push(nrm);
    }
    let qr = design.clone().qr();
    let r = qr.r();
    for i in 0..k {
        if r[(i, i)].powi(2) < RANK_TOL {
            return Err(SoilError::RankDeficient);
        }
    }
    let mut qty = DVector::from_iterator(m, rows.iter().map(|&i| y[i]));
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, k).into_owned();
    let scaled = r.solve_upper_triangular(&rhs).ok_or(SoilError::RankDeficient)?;
    let beta: Vec<f64> = scaled.iter().zip(&norms).map(|(b, s)| b / s).collect();

    let intercept = beta[0];
    let coefficients = beta[1..].to_vec();
    let rss: f64 = rows
        .iter()
        .map(|&i| {
            let fitted = support
                .iter()
                .zip(&coefficients)
                .fold(intercept, |acc, (&j, &b)| acc + b * x[(i, j)]);
            let e = y[i] - fitted;
            e * e
        })
        .sum();
    let sigma_hat = (rss / m as f64).sqrt().max(sigma_floor);
    let var = sigma_hat * sigma_hat;
    let log_likelihood = -(m as f64 / 2.0) * (2.0 * std::f64::consts::PI * var).ln() - rss / (2.0 * var);
    Ok(LinearFit {
        support: support.to_vec(),
        coefficients,
        intercept,
        rss,
        sigma_hat,
        log_likelihood,
        n_rows: m,
    })
}

/// Logistic fit on all rows.
pub fn logistic_fit(data: &Dataset, support: &[usize]) -> Result<LogisticFit> {
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    logistic_fit_rows(data, support, &rows)
}

/// Maximum-likelihood logistic fit by iteratively reweighted least squares.
///
/// Iterates Newton steps `(X'WX + jitter I) d = X'(y - p)` from zero until the
/// largest coefficient change falls below [`IRLS_TOL`] or [`IRLS_MAX_ITER`]
/// steps have been taken. A slope larger than [`SEPARATION_BOUND`] stops the
/// iteration and sets `separated`, as does reaching the cap unconverged.
pub fn logistic_fit_rows(data: &Dataset, support: &[usize], rows: &[usize]) -> Result<LogisticFit> {
    data.require_task(Task::Classification)?;
    validate_support(support, data.n_cols())?;
    let m = rows.len();
    let y = data.y();
    let ones = rows.iter().filter(|&&i| y[i] == 1.0).count();
    if ones == 0 || ones == m {
        return Err(SoilError::OneClassOnly);
    }
    check_size(support, m)?;
    let k = support.len() + 1;
    let x = data.x();
    // Row-major copy of the restricted design, intercept first.
    let mut design = Vec::with_capacity(m * k);
    for &i in rows {
        design.push(1.0);
        design.extend(support.iter().map(|&j| x[(i, j)]));
    }
    let yr: Vec<f64> = rows.iter().map(|&i| y[i]).collect();

    // Rank check on the unweighted Gram matrix of normalized columns.
    let mut acc = vec![0.0; k * k];
    for row in design.chunks_exact(k) {
        accumulate_lower(&mut acc, row, 1.0);
    }
    if !gram_full_rank(&to_symmetric(&acc, k)) {
        return Err(SoilError::RankDeficient);
    }

    let mut beta = DVector::<f64>::zeros(k);
    beta[0] = (ones as f64 / (m - ones) as f64).ln();
    let mut grad = DVector::<f64>::zeros(k);
    let mut iterations = 0;
    let mut separated = false;
    let mut converged = false;
    while iterations < IRLS_MAX_ITER {
        iterations += 1;
        acc.fill(0.0);
        grad.fill(0.0);
        for (row, &yi) in design.chunks_exact(k).zip(&yr) {
            let eta: f64 = row.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
            let p = sigmoid(eta);
            accumulate_lower(&mut acc, row, p * (1.0 - p));
            let resid = yi - p;
            for (g, a) in grad.iter_mut().zip(row) {
                *g += resid * a;
            }
        }
        let mut hess = to_symmetric(&acc, k);
        for d in 0..k {
            hess[(d, d)] += IRLS_JITTER;
        }
        let chol = hess.cholesky().ok_or(SoilError::RankDeficient)?;
        let step = chol.solve(&grad);
        if step.iter().any(|v| !v.is_finite()) {
            return Err(SoilError::RankDeficient);
        }
        beta += &step;
        if beta.iter().skip(1).any(|b| b.abs() > SEPARATION_BOUND) {
            separated = true;
            break;
        }
        if step.amax() < IRLS_TOL {
            converged = true;
            break;
        }
    }
    // An MLE that is still moving after the iteration cap is diverging.
    separated |= !converged;

    let intercept = beta[0];
    let coefficients: Vec<f64> = beta.iter().skip(1).copied().collect();
    let log_likelihood = design
        .chunks_exact(k)
        .zip(&yr)
        .map(|(row, &yi)| {
            let eta: f64 = row.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
            bernoulli_log_lik(yi, sigmoid(eta))
        })
        .sum();
    Ok(LogisticFit {
        support: support.to_vec(),
        coefficients,
        intercept,
        log_likelihood,
        iterations,
        separated,
    })
}

/// Adds `w * row row'` to the lower triangle of a row-major `k x k` buffer.
fn accumulate_lower(acc: &mut [f64], row: &[f64], w: f64) {
    let k = row.len();
    for r in 0..k {
        let wr = w * row[r];
        let dst = &mut acc[r * k..r * k + r + 1];
        for (d, &v) in dst.iter_mut().zip(&row[..=r]) {
            *d += wr * v;
        }
    }
}

fn to_symmetric(acc: &[f64], k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |r, c| if c <= r { acc[r * k + c] } else { acc[c * k + r] })
}

fn gram_full_rank(gram: &DMatrix<f64>) -> bool {
    let k = gram.nrows();
    let scale: Vec<f64> = (0..k).map(|d| gram[(d, d)].sqrt()).collect();
    if scale.contains(&0.0) {
        return false;
    }
    let normalized = DMatrix::from_fn(k, k, |r, c| gram[(r, c)] / (scale[r] * scale[c]));
    match normalized.cholesky() {
        Some(ch) => {
            let l = ch.l();
            (0..k).all(|d| l[(d, d)] * l[(d, d)] > RANK_TOL)
        }
        None => false,
    }
}
