//! Reference computations written without the library's numerics: dense
//! Gaussian elimination instead of QR, factorial sums instead of lgamma,
//! bitmask enumeration instead of candidate sets.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use soil_core::{CandidateSet, Dataset, Task};

pub fn gaussian_data(n: usize, p: usize, seed: u64, beta: &[(usize, f64)], noise: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let y = DVector::from_fn(n, |i, _| {
        beta.iter().map(|&(j, b)| b * x[(i, j)]).sum::<f64>() + 1.5 + noise * rng.sample::<f64, _>(StandardNormal)
    });
    Dataset::with_default_names(x, y, Task::Regression).unwrap()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for c in 0..k {
        let piv = (c..k).max_by(|&r, &s| a[r][c].abs().total_cmp(&a[s][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in (c + 1)..k {
            let f = a[r][c] / a[c][c];
            for cc in c..k {
                a[r][cc] -= f * a[c][cc];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = ((r + 1)..k).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Intercept-first least-squares coefficients from the normal equations,
/// and the residual sum of squares, over `rows`.
pub fn normal_equations_ols(data: &Dataset, support: &[usize], rows: &[usize]) -> (Vec<f64>, f64) {
    let k = support.len() + 1;
    let row = |i: usize| -> Vec<f64> {
        std::iter::once(1.0).chain(support.iter().map(|&j| data.x()[(i, j)])).collect()
    };
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for &i in rows {
        let r = row(i);
        for a in 0..k {
            xty[a] += r[a] * data.y()[i];
            for b in 0..k {
                xtx[a][b] += r[a] * r[b];
            }
        }
    }
    let beta = solve_dense(xtx, xty).expect("singular oracle system");
    let rss = rows
        .iter()
        .map(|&i| {
            let fit: f64 = row(i).iter().zip(&beta).map(|(a, b)| a * b).sum();
            (data.y()[i] - fit).powi(2)
        })
        .sum();
    (beta, rss)
}

pub fn complexity_direct(s: usize, p: usize) -> f64 {
    if s == 0 {
        return 2.0 * 2f64.ln();
    }
    let (s, p) = (s as f64, p as f64);
    s * (1.0 + p.ln() - s.ln()) + 2.0 * (s + 2.0).ln()
}

pub fn normalize_direct(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let t: f64 = e.iter().sum();
    e.into_iter().map(|v| v / t).collect()
}

/// Rows of split `split`, reproduced from the same ChaCha stream the library
/// keys by `(seed, split)`.
pub fn frozen_split(n: usize, seed: u64, split: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(split as u64);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let half = n.div_ceil(2);
    let (mut a, mut b) = (idx[..half].to_vec(), idx[half..].to_vec());
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

pub fn arm_direct(data: &Dataset, cands: &CandidateSet, seed: u64, splits: usize, psi: f64) -> Vec<f64> {
    let (n, p) = (data.n_rows(), data.n_cols());
    let mut avg = vec![0.0; cands.len()];
    for l in 0..splits {
        let (train, test) = frozen_split(n, seed, l);
        let scores: Vec<f64> = cands
            .iter()
            .map(|m| {
                let (beta, rss) = normal_equations_ols(data, m.support(), &train);
                let sigma = (rss / train.len() as f64).sqrt().max(1e-8);
                let sq: f64 = test
                    .iter()
                    .map(|&i| {
                        let fit = beta[0] + m.support().iter().zip(&beta[1..]).map(|(&j, b)| b * data.x()[(i, j)]).sum::<f64>();
                        (data.y()[i] - fit).powi(2)
                    })
                    .sum();
                -psi * complexity_direct(m.size(), p) - test.len() as f64 * sigma.ln() - sq / (2.0 * sigma * sigma)
            })
            .collect();
        for (a, w) in avg.iter_mut().zip(normalize_direct(&scores)) {
            *a += w / splits as f64;
        }
    }
    avg
}

pub fn bic_p_direct(data: &Dataset, cands: &CandidateSet, psi: f64) -> Vec<f64> {
    let (n, p) = (data.n_rows(), data.n_cols());
    let rows: Vec<usize> = (0..n).collect();
    let nf = n as f64;
    let scores: Vec<f64> = cands
        .iter()
        .map(|m| {
            let (_, rss) = normal_equations_ols(data, m.support(), &rows);
            let var = rss / nf;
            let ll = -nf / 2.0 * (2.0 * std::f64::consts::PI * var).ln() - nf / 2.0;
            let info = -2.0 * ll + m.size() as f64 * nf.ln();
            -info / 2.0 - psi * complexity_direct(m.size(), p)
        })
        .collect();
    normalize_direct(&scores)
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln Gamma(m / 2)` from factorials.
pub fn ln_gamma_half(m: u64) -> f64 {
    if m % 2 == 0 {
        ln_factorial(m / 2 - 1)
    } else {
        let k = (m - 1) / 2;
        ln_factorial(2 * k) + 0.5 * std::f64::consts::PI.ln() - k as f64 * 4f64.ln() - ln_factorial(k)
    }
}

pub fn ln_choose(p: u64, s: u64) -> f64 {
    ln_factorial(p) - ln_factorial(s) - ln_factorial(p - s)
}

pub fn fiducial_direct(data: &Dataset, cands: &CandidateSet, gamma: f64) -> Vec<f64> {
    let (n, p) = (data.n_rows(), data.n_cols());
    let rows: Vec<usize> = (0..n).collect();
    let scores: Vec<f64> = cands
        .iter()
        .map(|m| {
            let (_, rss) = normal_equations_ols(data, m.support(), &rows);
            let s = m.size();
            let nf = n as f64;
            ln_gamma_half((n - s) as u64)
                - (nf - s as f64 - 1.0) / 2.0 * (std::f64::consts::PI * rss).ln()
                - (s as f64 + 1.0) / 2.0 * nf.ln()
                - gamma * ln_choose(p as u64, s as u64)
        })
        .collect();
    normalize_direct(&scores)
}

/// `S_j` by summing the weight of every bitmask that has bit `j` set.
/// `weights[mask]` is the weight of the subset encoded by `mask`.
pub fn soil_brute_force(p: usize, weights: &[f64]) -> Vec<f64> {
    (0..p)
        .map(|j| {
            (0..weights.len())
                .filter(|mask| mask & (1 << j) != 0)
                .map(|mask| weights[mask])
                .sum()
        })
        .collect()
}

pub fn mask_of(support: &[usize]) -> usize {
    support.iter().map(|&j| 1usize << j).sum()
}

/// Centered columns with `z'z / n = I`, so standardization is the identity.
pub fn orthonormal_design(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    for mut col in a.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    // Gram-Schmidt, twice for stability.
    for _ in 0..2 {
        for j in 0..p {
            for k in 0..j {
                let proj = a.column(j).dot(&a.column(k));
                let ck = a.column(k).clone_owned();
                a.column_mut(j).axpy(-proj, &ck, 1.0);
            }
            let nrm = a.column(j).norm();
            a.column_mut(j).scale_mut(1.0 / nrm);
        }
    }
    a * (n as f64).sqrt()
}

pub fn soft(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

pub fn firm(z: f64, lambda: f64, gamma: f64) -> f64 {
    if z.abs() <= lambda {
        0.0
    } else if z.abs() <= gamma * lambda {
        z.signum() * (z.abs() - lambda) / (1.0 - 1.0 / gamma)
    } else {
        z
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
