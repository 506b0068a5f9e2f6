//! End-to-end importance: candidate construction, weighting and scoring.

use serde::Serialize;

use crate::candidates::{all_subsets, default_max_support, extract_supports, merge_sets, CandidateSet};
use crate::data::Dataset;
use crate::error::{Result, SoilError};
use crate::importance::{soil, ImportanceVector};
use crate::path::{default_lambda_grid, penalized_path, PenaltySpec, DEFAULT_LAMBDA_COUNT};
use crate::penalty::PenaltyKind;
use crate::weighting::{
    arm_weights, bic_p_weights, fiducial_weights, ArmConfig, BicPConfig, WeightVector, WeightingMethod,
    DEFAULT_FIDUCIAL_GAMMA, DEFAULT_PSI, DEFAULT_SPLITS,
};

/// Largest p for which `Auto` enumerates all subsets instead of using paths.
pub const AUTO_ALL_SUBSETS_MAX_P: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateStrategy {
    /// All subsets when `p <= 10`, merged penalized paths otherwise.
    Auto,
    Paths,
    AllSubsets,
    /// A fixed list of supports.
    Fixed(Vec<Vec<usize>>),
}

impl std::str::FromStr for CandidateStrategy {
    type Err = SoilError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(CandidateStrategy::Auto),
            "paths" => Ok(CandidateStrategy::Paths),
            "all-subsets" | "all" => Ok(CandidateStrategy::AllSubsets),
            other => Err(SoilError::ConfigInvalid(format!("unknown candidate strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoilConfig {
    pub methods: Vec<WeightingMethod>,
    pub psi: f64,
    pub n_splits: usize,
    pub seed: u64,
    pub penalties: Vec<PenaltyKind>,
    pub lambda_count: usize,
    pub scad_gamma: f64,
    pub mcp_gamma: f64,
    pub fiducial_gamma: f64,
    pub candidates: CandidateStrategy,
    /// Defaults to `floor(n/2) - 2`.
    pub max_support_size: Option<usize>,
}

impl Default for SoilConfig {
    fn default() -> Self {
        Self {
            methods: vec![WeightingMethod::Arm, WeightingMethod::BicP],
            psi: DEFAULT_PSI,
            n_splits: DEFAULT_SPLITS,
            seed: 0,
            penalties: PenaltyKind::ALL.to_vec(),
            lambda_count: DEFAULT_LAMBDA_COUNT,
            scad_gamma: PenaltyKind::Scad.default_gamma(),
            mcp_gamma: PenaltyKind::Mcp.default_gamma(),
            fiducial_gamma: DEFAULT_FIDUCIAL_GAMMA,
            candidates: CandidateStrategy::Auto,
            max_support_size: None,
        }
    }
}

impl SoilConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(SoilError::ConfigInvalid("no weighting method requested".into()));
        }
        if !(self.psi >= 0.0) {
            return Err(SoilError::ConfigInvalid(format!("psi must be >= 0, got {}", self.psi)));
        }
        if self.n_splits < 1 {
            return Err(SoilError::ConfigInvalid("splits must be >= 1".into()));
        }
        if self.lambda_count < 2 {
            return Err(SoilError::ConfigInvalid("lambda count must be >= 2".into()));
        }
        if self.penalties.is_empty() && matches!(self.candidates, CandidateStrategy::Paths) {
            return Err(SoilError::ConfigInvalid("path candidates need at least one penalty".into()));
        }
        PenaltyKind::Scad.validate_gamma(self.scad_gamma)?;
        PenaltyKind::Mcp.validate_gamma(self.mcp_gamma)?;
        Ok(())
    }

    fn gamma_for(&self, kind: PenaltyKind) -> f64 {
        match kind {
            PenaltyKind::Lasso => f64::NAN,
            PenaltyKind::Scad => self.scad_gamma,
            PenaltyKind::Mcp => self.mcp_gamma,
        }
    }
}

/// Union of the supports along each configured penalty's path, capped in size.
pub fn path_candidates(data: &Dataset, cfg: &SoilConfig) -> Result<CandidateSet> {
    let (n, p) = (data.n_rows(), data.n_cols());
    let cap = cfg.max_support_size.unwrap_or_else(|| default_max_support(n));
    let grid = match default_lambda_grid(data, cfg.lambda_count) {
        Ok(g) => g,
        // No column moves the response: the only path model is the empty one.
        Err(SoilError::ConfigInvalid(_)) => return CandidateSet::from_supports(vec![vec![]], p),
        Err(e) => return Err(e),
    };
    let sets = cfg
        .penalties
        .iter()
        .map(|&kind| {
            let spec = PenaltySpec::new(kind, grid.clone())?
                .with_gamma(cfg.gamma_for(kind))?
                .with_max_active(n.min(p));
            let path = penalized_path(data, &spec)?;
            extract_supports(&path, p)
        })
        .collect::<Result<Vec<_>>>()?;
    merge_sets(&sets, cap)
}

pub fn build_candidates(data: &Dataset, cfg: &SoilConfig) -> Result<CandidateSet> {
    let p = data.n_cols();
    let set = match &cfg.candidates {
        CandidateStrategy::Auto if p <= AUTO_ALL_SUBSETS_MAX_P => all_subsets(p)?,
        CandidateStrategy::Auto | CandidateStrategy::Paths => return path_candidates(data, cfg),
        CandidateStrategy::AllSubsets => all_subsets(p)?,
        CandidateStrategy::Fixed(supports) => CandidateSet::from_supports(supports.iter().cloned(), p)?,
    };
    let cap = cfg.max_support_size.unwrap_or_else(|| default_max_support(data.n_rows()));
    Ok(set.capped(cap))
}

pub fn weigh(data: &Dataset, cands: &CandidateSet, method: WeightingMethod, cfg: &SoilConfig) -> Result<WeightVector> {
    match method {
        WeightingMethod::Arm => arm_weights(
            data,
            cands,
            &ArmConfig {
                psi: cfg.psi,
                n_splits: cfg.n_splits,
                seed: cfg.seed,
                ..ArmConfig::default()
            },
        ),
        WeightingMethod::BicP => bic_p_weights(data, cands, &BicPConfig::with_psi(cfg.psi)),
        WeightingMethod::Fiducial => fiducial_weights(data, cands, cfg.fiducial_gamma),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodImportance {
    pub method: WeightingMethod,
    pub weights: WeightVector,
    pub importance: ImportanceVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoilResult {
    pub candidates: CandidateSet,
    pub methods: Vec<MethodImportance>,
}

impl SoilResult {
    pub fn get(&self, method: WeightingMethod) -> Option<&MethodImportance> {
        self.methods.iter().find(|m| m.method == method)
    }
}

/// Builds candidates once and scores them with every requested method.
pub fn compute_importance(data: &Dataset, cfg: &SoilConfig) -> Result<SoilResult> {
    cfg.validate()?;
    let candidates = build_candidates(data, cfg)?;
    let methods = cfg
        .methods
        .iter()
        .map(|&method| {
            let weights = weigh(data, &candidates, method, cfg)?;
            let importance = soil(&weights, &candidates, data.names())?;
            Ok(MethodImportance {
                method,
                weights,
                importance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SoilResult { candidates, methods })
}
