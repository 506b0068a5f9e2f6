use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{default_names, Dataset, Task};
use crate::error::{Result, SoilError};
use crate::fit::sigmoid;
use crate::rng::stream_rng;

/// Rows i.i.d. `N_p(0, Sigma)` with `Sigma_ij = rho^|i-j|`, drawn through the
/// AR(1) recursion `x_1 = z_1`, `x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j`.
pub fn ar1_design<R: Rng + ?Sized>(n: usize, p: usize, rho: f64, rng: &mut R) -> Result<DMatrix<f64>> {
    if !(0.0..1.0).contains(&rho) {
        return Err(SoilError::BadRho(rho));
    }
    let innovation = (1.0 - rho * rho).sqrt();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let mut prev = 0.0;
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            let v = if j == 0 { z } else { rho * prev + innovation * z };
            x[(i, j)] = v;
            prev = v;
        }
    }
    Ok(x)
}

/// Derived columns appended after the base predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Addon {
    None,
    /// One column `0.5 X1 + 2 X4 + e`, `e ~ N(0, 0.01)`.
    Confuser,
    /// Squares of every base column.
    Quadratics,
    /// Pairwise products of the first four columns:
    /// X1X2, X1X3, X1X4, X2X3, X2X4, X3X4.
    Interactions,
}

impl Addon {
    pub fn extra_columns(self, p_base: usize) -> usize {
        match self {
            Addon::None => 0,
            Addon::Confuser => 1,
            Addon::Quadratics => p_base,
            Addon::Interactions => 6,
        }
    }
}

const INTERACTION_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
const CONFUSER_NOISE_SD: f64 = 0.1;

/// Generative description of one simulation setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub n: usize,
    pub p_base: usize,
    pub rho: f64,
    pub sigma2: f64,
    /// Coefficients over all columns, addon columns included.
    pub beta_star: Vec<f64>,
    pub task: Task,
    pub addon: Addon,
    pub replications: usize,
    pub seed: u64,
}

/// Names accepted by [`ScenarioConfig::example`].
pub const EXAMPLE_NAMES: [&str; 13] = ["1", "2", "3", "4", "5", "6", "s1", "s2", "s3", "s4", "s5", "ss1", "ss2"];

fn sparse_beta(p: usize) -> Vec<f64> {
    let mut b = vec![0.0; p];
    b[..5].copy_from_slice(&[4.0, 4.0, 4.0, -6.0 * 2f64.sqrt(), 0.75]);
    b
}

impl ScenarioConfig {
    fn base(name: &str, n: usize, p_base: usize, beta_star: Vec<f64>, task: Task) -> Self {
        Self {
            name: name.to_string(),
            n,
            p_base,
            rho: 0.0,
            sigma2: 0.01,
            beta_star,
            task,
            addon: Addon::None,
            replications: 100,
            seed: 0,
        }
    }

    /// Named settings. `1`-`6` and `s1`-`s5` are the Gaussian and binomial
    /// examples with default `rho = 0`, `sigma2 = 0.01`; `ss1` and `ss2` are the
    /// two 100 x 20 settings used against stability selection.
    pub fn example(name: &str) -> Result<Self> {
        use Task::{Classification, Regression};
        let key = name.trim().to_ascii_lowercase();
        let decreasing = vec![1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0, 1.0 / 5.0, 1.0 / 6.0, 0.0];
        let cfg = match key.as_str() {
            "1" => Self::base(&key, 100, 200, sparse_beta(200), Regression),
            "2" => {
                let mut beta = sparse_beta(14);
                beta.push(0.0);
                Self {
                    addon: Addon::Confuser,
                    ..Self::base(&key, 150, 14, beta, Regression)
                }
            }
            "3" => Self::base(&key, 150, 8, vec![0.0; 8], Regression),
            "4" => Self::base(&key, 150, 8, vec![1.0; 8], Regression),
            "5" => Self::base(&key, 80, 7, decreasing, Classification),
            "6" => Self::base(&key, 5000, 7, decreasing, Classification),
            "s1" => Self::base(&key, 150, 20, sparse_beta(20), Regression),
            "s2" => Self {
                addon: Addon::Quadratics,
                ..Self::base(
                    &key,
                    150,
                    6,
                    vec![4.0, 4.0, -6.0 * 2f64.sqrt(), 0.75, 0.0, 0.0, 4.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                    Regression,
                )
            },
            "s3" => Self {
                addon: Addon::Interactions,
                ..Self::base(
                    &key,
                    150,
                    6,
                    vec![4.0, 4.0, -6.0 * 2f64.sqrt(), 0.75, 0.0, 0.0, 4.0, 2.0, 2.0, 0.0, 0.0, 0.0],
                    Regression,
                )
            },
            "s4" => Self::base(&key, 150, 20, sparse_beta(20), Classification),
            "s5" => Self::base(&key, 100, 200, sparse_beta(200), Classification),
            "ss1" => Self::base(&key, 100, 20, sparse_beta(20), Regression),
            "ss2" => {
                let mut beta = sparse_beta(20);
                beta[1] = 0.0;
                Self {
                    rho: 0.7,
                    sigma2: 0.1,
                    ..Self::base(&key, 100, 20, beta, Regression)
                }
            }
            _ => {
                return Err(SoilError::ConfigInvalid(format!(
                    "unknown example '{name}' (expected one of {})",
                    EXAMPLE_NAMES.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    /// Total number of columns after addons.
    pub fn p(&self) -> usize {
        self.p_base + self.addon.extra_columns(self.p_base)
    }

    /// `supp(beta_star)`.
    pub fn true_support(&self) -> Vec<usize> {
        self.beta_star
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn names(&self) -> Vec<String> {
        let mut names = default_names(self.p_base);
        match self.addon {
            Addon::None => {}
            Addon::Confuser => names.push(format!("X{}", self.p_base + 1)),
            Addon::Quadratics => names.extend((1..=self.p_base).map(|j| format!("X{j}^2"))),
            Addon::Interactions => {
                names.extend(INTERACTION_PAIRS.iter().map(|(a, b)| format!("X{}X{}", a + 1, b + 1)))
            }
        }
        names
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SoilError::ConfigInvalid(m));
        if self.n < 2 {
            return bad(format!("n must be >= 2, got {}", self.n));
        }
        if self.p_base < 1 {
            return bad("p must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(SoilError::BadRho(self.rho));
        }
        if self.task == Task::Regression && !(self.sigma2 > 0.0) {
            return bad(format!("sigma2 must be > 0, got {}", self.sigma2));
        }
        if matches!(self.addon, Addon::Confuser | Addon::Interactions) && self.p_base < 4 {
            return bad("confuser and interaction addons need at least 4 base columns".into());
        }
        if self.beta_star.len() != self.p() {
            return bad(format!(
                "beta_star has {} entries for {} columns",
                self.beta_star.len(),
                self.p()
            ));
        }
        if self.beta_star.iter().any(|b| !b.is_finite()) {
            return bad("beta_star must be finite".into());
        }
        if self.replications < 1 {
            return bad("replications must be >= 1".into());
        }
        Ok(())
    }
}

/// One simulated dataset and the support that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub data: Dataset,
    pub true_support: Vec<usize>,
}

/// Draws replication `replication` of the scenario from stream
/// `(cfg.seed, replication)`.
pub fn generate_scenario(cfg: &ScenarioConfig, replication: usize) -> Result<SimulatedData> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, replication as u64);
    let n = cfg.n;
    let base = ar1_design(n, cfg.p_base, cfg.rho, &mut rng)?;
    let p = cfg.p();
    let mut x = DMatrix::zeros(n, p);
    x.columns_mut(0, cfg.p_base).copy_from(&base);
    match cfg.addon {
        Addon::None => {}
        Addon::Confuser => {
            for i in 0..n {
                let e: f64 = rng.sample::<f64, _>(StandardNormal) * CONFUSER_NOISE_SD;
                x[(i, cfg.p_base)] = 0.5 * base[(i, 0)] + 2.0 * base[(i, 3)] + e;
            }
        }
        Addon::Quadratics => {
            for j in 0..cfg.p_base {
                for i in 0..n {
                    x[(i, cfg.p_base + j)] = base[(i, j)].powi(2);
                }
            }
        }
        Addon::Interactions => {
            for (k, &(a, b)) in INTERACTION_PAIRS.iter().enumerate() {
                for i in 0..n {
                    x[(i, cfg.p_base + k)] = base[(i, a)] * base[(i, b)];
                }
            }
        }
    }
    let beta = DVector::from_column_slice(&cfg.beta_star);
    let eta = &x * &beta;
    let y = match cfg.task {
        Task::Regression => {
            let sd = cfg.sigma2.sqrt();
            DVector::from_iterator(n, eta.iter().map(|&m| m + sd * rng.sample::<f64, _>(StandardNormal)))
        }
        Task::Classification => DVector::from_iterator(
            n,
            eta.iter().map(|&m| if rng.random::<f64>() < sigmoid(m) { 1.0 } else { 0.0 }),
        ),
    };
    let data = Dataset::new(x, y, cfg.task, cfg.names())?;
    Ok(SimulatedData {
        data,
        true_support: cfg.true_support(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    fn col(x: &DMatrix<f64>, j: usize) -> Vec<f64> {
        x.column(j).iter().copied().collect()
    }

    #[test]
    fn independent_design_has_identity_covariance() {
        let x = ar1_design(10_000, 4, 0.0, &mut stream_rng(1, 0)).unwrap();
        for a in 0..4 {
            for b in (a + 1)..4 {
                assert!(corr(&col(&x, a), &col(&x, b)).abs() < 0.1);
            }
        }
    }

    #[test]
    fn ar1_lag_correlations() {
        let x = ar1_design(10_000, 3, 0.9, &mut stream_rng(2, 0)).unwrap();
        assert!((corr(&col(&x, 0), &col(&x, 1)) - 0.9).abs() < 0.03);
        let x = ar1_design(10_000, 3, 0.7, &mut stream_rng(3, 0)).unwrap();
        assert!((corr(&col(&x, 0), &col(&x, 2)) - 0.49).abs() < 0.03);
    }

    #[test]
    fn sample_covariance_converges() {
        let p = 6;
        for rho in [0.0f64, 0.7, 0.9] {
            let x = ar1_design(10_000, p, rho, &mut stream_rng(4, 0)).unwrap();
            let n = x.nrows() as f64;
            let mut frob = 0.0;
            for a in 0..p {
                for b in 0..p {
                    let s: f64 = x.column(a).iter().zip(x.column(b).iter()).map(|(u, v)| u * v).sum::<f64>() / n;
                    frob += (s - rho.powi((a as i32 - b as i32).abs())).powi(2);
                }
            }
            assert!(frob.sqrt() < 0.15 * p as f64, "rho={rho} frob={}", frob.sqrt());
        }
    }

    #[test]
    fn bad_rho_rejected() {
        assert_eq!(ar1_design(5, 2, 1.0, &mut stream_rng(0, 0)).unwrap_err(), SoilError::BadRho(1.0));
        assert!(ar1_design(5, 2, -0.1, &mut stream_rng(0, 0)).is_err());
    }

    #[test]
    fn example_one_coefficients() {
        let cfg = ScenarioConfig::example("1").unwrap();
        assert_eq!((cfg.n, cfg.p()), (100, 200));
        assert_eq!(&cfg.beta_star[..6], &[4.0, 4.0, 4.0, -6.0 * 2f64.sqrt(), 0.75, 0.0]);
        assert_eq!(cfg.true_support(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn every_named_example_is_valid() {
        for name in EXAMPLE_NAMES {
            let cfg = ScenarioConfig::example(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(cfg.names().len(), cfg.p());
        }
        assert!(ScenarioConfig::example("7").is_err());
    }

    #[test]
    fn null_model_response_is_noise() {
        let mut cfg = ScenarioConfig::example("3").unwrap();
        cfg.n = 5000;
        let sim = generate_scenario(&cfg, 0).unwrap();
        let y: Vec<f64> = sim.data.y().iter().copied().collect();
        for j in 0..8 {
            assert!(corr(&y, sim.data.column(j)).abs() < 0.05);
        }
        assert!(sim.true_support.is_empty());
    }

    #[test]
    fn confuser_tracks_its_combination() {
        let cfg = ScenarioConfig::example("2").unwrap();
        let sim = generate_scenario(&cfg, 0).unwrap();
        let d = &sim.data;
        let combo: Vec<f64> = (0..d.n_rows()).map(|i| 0.5 * d.x()[(i, 0)] + 2.0 * d.x()[(i, 3)]).collect();
        assert!(corr(d.column(14), &combo) > 0.99);
        assert_eq!(d.names()[14], "X15");
    }

    #[test]
    fn addon_columns_follow_base() {
        let sim = generate_scenario(&ScenarioConfig::example("s2").unwrap(), 1).unwrap();
        let x = sim.data.x();
        assert_eq!(x[(3, 8)], x[(3, 2)].powi(2));
        let sim = generate_scenario(&ScenarioConfig::example("s3").unwrap(), 1).unwrap();
        let x = sim.data.x();
        assert_eq!(x[(5, 9)], x[(5, 1)] * x[(5, 2)]);
        assert_eq!(sim.data.names()[9], "X2X3");
    }

    #[test]
    fn binomial_responses_are_binary() {
        let sim = generate_scenario(&ScenarioConfig::example("5").unwrap(), 0).unwrap();
        assert!(sim.data.y().iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(sim.data.task(), Task::Classification);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = ScenarioConfig::example("s1").unwrap();
        assert_eq!(generate_scenario(&cfg, 3).unwrap(), generate_scenario(&cfg, 3).unwrap());
        assert_ne!(generate_scenario(&cfg, 3).unwrap(), generate_scenario(&cfg, 4).unwrap());
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = ScenarioConfig::example("s1").unwrap();
        cfg.beta_star.pop();
        assert!(matches!(generate_scenario(&cfg, 0), Err(SoilError::ConfigInvalid(_))));
        let mut cfg = ScenarioConfig::example("s1").unwrap();
        cfg.sigma2 = 0.0;
        assert!(cfg.validate().is_err());
    }
}
