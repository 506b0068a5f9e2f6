//! Penalized solution paths by cyclic coordinate descent.
//!
//! Columns are centered and scaled to unit (population) standard deviation
//! before fitting and coefficients are mapped back to the original scale. The
//! intercept is never penalized. For regression the objective is
//! `RSS / (2n) + sum_j p_lambda(b_j)`; for classification the negative mean
//! log-likelihood replaces `RSS / (2n)` and each coordinate is updated through
//! a quadratic majorizer with curvature 1/4.

use serde::Serialize;

use crate::data::{Dataset, Task};
use crate::error::{Result, SoilError};
use crate::fit::sigmoid;
use crate::penalty::{penalty_value, threshold, univariate_minimizer, PenaltyKind};

pub const CD_TOL: f64 = 1e-7;
pub const CD_MAX_SWEEPS: usize = 1000;
pub const DEFAULT_LAMBDA_COUNT: usize = 100;

const LOGISTIC_CURVATURE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub gamma: f64,
    pub lambdas: Vec<f64>,
    /// Stop the path once more than this many coefficients are nonzero.
    pub max_active: Option<usize>,
}

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, lambdas: Vec<f64>) -> Result<Self> {
        let spec = Self {
            kind,
            gamma: kind.default_gamma(),
            lambdas,
            max_active: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_active(mut self, max_active: usize) -> Self {
        self.max_active = Some(max_active);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate_gamma(self.gamma)?;
        if self.lambdas.is_empty() {
            return Err(SoilError::InvalidPenalty("empty lambda grid".into()));
        }
        if self.lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(SoilError::InvalidPenalty("lambdas must be positive and finite".into()));
        }
        if self.lambdas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(SoilError::InvalidPenalty("lambda grid must be strictly decreasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEntry {
    pub lambda: f64,
    pub intercept: f64,
    /// Original-scale coefficients, length p.
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
}

impl PathEntry {
    pub fn support(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionPath {
    pub kind: PenaltyKind,
    pub p: usize,
    pub entries: Vec<PathEntry>,
}

/// Centered, unit-variance copy of the design.
#[derive(Debug, Clone)]
pub(crate) struct Standardized {
    pub n: usize,
    pub p: usize,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Column-major; columns with zero variance are left as zeros.
    pub z: Vec<f64>,
}

impl Standardized {
    pub fn new(data: &Dataset) -> Self {
        let (n, p) = (data.n_rows(), data.n_cols());
        let mut means = Vec::with_capacity(p);
        let mut scales = Vec::with_capacity(p);
        let mut z = vec![0.0; n * p];
        for j in 0..p {
            let col = data.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            means.push(mean);
            if sd > 1e-12 * (1.0 + mean.abs()) {
                scales.push(sd);
                for (dst, v) in z[j * n..(j + 1) * n].iter_mut().zip(col) {
                    *dst = (v - mean) / sd;
                }
            } else {
                scales.push(0.0);
            }
        }
        Self { n, p, means, scales, z }
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.z[j * self.n..(j + 1) * self.n]
    }

    fn usable(&self, j: usize) -> bool {
        self.scales[j] > 0.0
    }

    /// Maps standardized coefficients to the original scale.
    fn unscale(&self, b: &[f64], intercept_std: f64) -> (f64, Vec<f64>) {
        let coefs: Vec<f64> = b
            .iter()
            .zip(&self.scales)
            .map(|(&bj, &s)| if s > 0.0 { bj / s } else { 0.0 })
            .collect();
        let shift: f64 = coefs.iter().zip(&self.means).map(|(c, m)| c * m).sum();
        (intercept_std - shift, coefs)
    }

    fn rescale(&self, coefs: &[f64]) -> Vec<f64> {
        coefs.iter().zip(&self.scales).map(|(&c, &s)| c * s).collect()
    }
}

/// Smallest lambda at which every penalized coefficient is zero:
/// `max_j |z_j'(y - ybar)| / n` over standardized columns.
pub fn lambda_max(data: &Dataset) -> f64 {
    let std = Standardized::new(data);
    lambda_max_std(&std, data)
}

fn lambda_max_std(std: &Standardized, data: &Dataset) -> f64 {
    let n = std.n as f64;
    let y = data.y();
    let ybar = y.iter().sum::<f64>() / n;
    (0..std.p)
        .map(|j| {
            std.col(j)
                .iter()
                .zip(y.iter())
                .map(|(z, yi)| z * (yi - ybar))
                .sum::<f64>()
                .abs()
                / n
        })
        .fold(0.0, f64::max)
}

/// `count` log-spaced values from `top` down to `top * ratio`.
pub fn log_spaced_grid(top: f64, ratio: f64, count: usize) -> Vec<f64> {
    let step = ratio.ln() / (count as f64 - 1.0);
    (0..count).map(|l| top * (step * l as f64).exp()).collect()
}

/// Default grid: `count` log-spaced values from lambda_max down to
/// `0.01 * lambda_max` (n > p) or `0.05 * lambda_max` (n <= p).
pub fn default_lambda_grid(data: &Dataset, count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(SoilError::ConfigInvalid(format!("lambda count must be >= 2, got {count}")));
    }
    let top = lambda_max(data);
    if !(top > 0.0) {
        return Err(SoilError::ConfigInvalid(
            "response is unrelated to every column (lambda_max = 0)".into(),
        ));
    }
    let ratio = if data.n_rows() > data.n_cols() { 0.01 } else { 0.05 };
    Ok(log_spaced_grid(top, ratio, count))
}

/// Solution path over `spec.lambdas`, warm-started from one lambda to the next.
pub fn penalized_path(data: &Dataset, spec: &PenaltySpec) -> Result<SolutionPath> {
    spec.validate()?;
    let std = Standardized::new(data);
    let entries = match data.task() {
        Task::Regression => regression_path(data, &std, spec)?,
        Task::Classification => logistic_path(data, &std, spec)?,
    };
    Ok(SolutionPath {
        kind: spec.kind,
        p: data.n_cols(),
        entries,
    })
}

fn regression_path(data: &Dataset, std: &Standardized, spec: &PenaltySpec) -> Result<Vec<PathEntry>> {
    let n = std.n;
    let nf = n as f64;
    let ybar = data.y().iter().sum::<f64>() / nf;
    let mut resid: Vec<f64> = data.y().iter().map(|v| v - ybar).collect();
    let mut b = vec![0.0; std.p];
    let mut entries = Vec::with_capacity(spec.lambdas.len());
    for &lambda in &spec.lambdas {
        let mut sweep = |b: &mut [f64], active_only: bool| -> f64 {
            let mut max_change: f64 = 0.0;
            for j in 0..std.p {
                if !std.usable(j) || (active_only && b[j] == 0.0) {
                    continue;
                }
                let col = std.col(j);
                let grad: f64 = col.iter().zip(&resid).map(|(z, r)| z * r).sum::<f64>() / nf;
                let updated = threshold(spec.kind, grad + b[j], lambda, spec.gamma);
                let delta = updated - b[j];
                if delta != 0.0 {
                    for (r, z) in resid.iter_mut().zip(col) {
                        *r -= delta * z;
                    }
                    b[j] = updated;
                    max_change = max_change.max(delta.abs());
                }
            }
            max_change
        };
        let sweeps = run_active_set(&mut b, &mut sweep, lambda)?;
        if exceeds_active(&b, spec.max_active) {
            break;
        }
        let (intercept, coefficients) = std.unscale(&b, ybar);
        entries.push(PathEntry {
            lambda,
            intercept,
            coefficients,
            sweeps,
        });
    }
    Ok(entries)
}

fn logistic_path(data: &Dataset, std: &Standardized, spec: &PenaltySpec) -> Result<Vec<PathEntry>> {
    let n = std.n;
    let nf = n as f64;
    let y: Vec<f64> = data.y().iter().copied().collect();
    let ybar = y.iter().sum::<f64>() / nf;
    if ybar == 0.0 || ybar == 1.0 {
        return Err(SoilError::OneClassOnly);
    }
    let mut b0 = (ybar / (1.0 - ybar)).ln();
    let mut eta = vec![b0; n];
    let mut prob: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
    let mut b = vec![0.0; std.p];
    let mut entries = Vec::with_capacity(spec.lambdas.len());
    let a = LOGISTIC_CURVATURE;
    for &lambda in &spec.lambdas {
        let mut sweep = |b: &mut [f64], active_only: bool| -> f64 {
            let mean_resid = y.iter().zip(&prob).map(|(yi, pi)| yi - pi).sum::<f64>() / nf;
            let step0 = mean_resid / a;
            let mut max_change = step0.abs();
            if step0 != 0.0 {
                b0 += step0;
                for (e, p) in eta.iter_mut().zip(prob.iter_mut()) {
                    *e += step0;
                    *p = sigmoid(*e);
                }
            }
            for j in 0..std.p {
                if !std.usable(j) || (active_only && b[j] == 0.0) {
                    continue;
                }
                let col = std.col(j);
                let grad: f64 = col
                    .iter()
                    .zip(y.iter().zip(&prob))
                    .map(|(z, (yi, pi))| z * (yi - pi))
                    .sum::<f64>()
                    / nf;
                let u = b[j] + grad / a;
                // With a = 1/4 the nonconvex surrogates can have a distant
                // global minimum while zero is still a local one; a zero
                // coefficient stays put in that case, which keeps the top of
                // the path empty and never raises the objective.
                let updated = if b[j] == 0.0 && (a * u).abs() <= lambda {
                    0.0
                } else {
                    univariate_minimizer(spec.kind, u, lambda, spec.gamma, a)
                };
                let delta = updated - b[j];
                if delta != 0.0 {
                    for ((e, p), z) in eta.iter_mut().zip(prob.iter_mut()).zip(col) {
                        *e += delta * z;
                        *p = sigmoid(*e);
                    }
                    b[j] = updated;
                    max_change = max_change.max(delta.abs());
                }
            }
            if !b0.is_finite() {
                return f64::NAN;
            }
            max_change
        };
        let sweeps = run_active_set(&mut b, &mut sweep, lambda)?;
        if exceeds_active(&b, spec.max_active) {
            break;
        }
        let (intercept, coefficients) = std.unscale(&b, b0);
        entries.push(PathEntry {
            lambda,
            intercept,
            coefficients,
            sweeps,
        });
    }
    Ok(entries)
}

fn exceeds_active(b: &[f64], max_active: Option<usize>) -> bool {
    max_active.is_some_and(|m| b.iter().filter(|&&v| v != 0.0).count() > m)
}

/// Alternates full sweeps with sweeps over the current active set until a
/// full sweep moves no coefficient by more than [`CD_TOL`].
fn run_active_set<F>(b: &mut [f64], sweep: &mut F, lambda: f64) -> Result<usize>
where
    F: FnMut(&mut [f64], bool) -> f64,
{
    let mut sweeps = 0;
    let check = |change: f64, b: &[f64]| {
        if change.is_finite() && b.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(SoilError::NonFinite { lambda })
        }
    };
    loop {
        let change = sweep(b, false);
        sweeps += 1;
        check(change, b)?;
        if change < CD_TOL || sweeps >= CD_MAX_SWEEPS {
            return Ok(sweeps);
        }
        loop {
            let change = sweep(b, true);
            sweeps += 1;
            check(change, b)?;
            if change < CD_TOL || sweeps >= CD_MAX_SWEEPS {
                break;
            }
        }
        if sweeps >= CD_MAX_SWEEPS {
            return Ok(sweeps);
        }
    }
}

/// Regression objective `RSS / (2n) + sum_j p_lambda(b_j)` evaluated on the
/// standardized scale for original-scale coefficients.
pub fn regression_objective(data: &Dataset, kind: PenaltyKind, gamma: f64, lambda: f64, coefficients: &[f64]) -> f64 {
    let std = Standardized::new(data);
    let b = std.rescale(coefficients);
    let n = std.n as f64;
    let ybar = data.y().iter().sum::<f64>() / n;
    let mut resid: Vec<f64> = data.y().iter().map(|v| v - ybar).collect();
    for (j, &bj) in b.iter().enumerate() {
        if bj != 0.0 {
            for (r, z) in resid.iter_mut().zip(std.col(j)) {
                *r -= bj * z;
            }
        }
    }
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    rss / (2.0 * n) + b.iter().map(|&v| penalty_value(kind, v, lambda, gamma)).sum::<f64>()
}
