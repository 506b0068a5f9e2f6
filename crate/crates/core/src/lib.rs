//! Sparsity oriented importance learning.
//!
//! Candidate models come from penalized regression paths (or all subsets for
//! small `p`). Each model gets a weight from cross-examined likelihood (ARM),
//! a penalized BIC or a fiducial score. The importance of variable `j` is the
//! total weight of the candidates that contain it.

pub mod candidates;
pub mod data;
pub mod error;
pub mod fit;
pub mod importance;
pub mod io;
pub mod path;
pub mod penalty;
pub mod pipeline;
pub mod rng;
pub mod simulation;
pub mod weighting;

pub use candidates::{all_subsets, complexity, merge_sets, CandidateModel, CandidateSet};
pub use data::{Dataset, Task};
pub use error::{Result, SoilError};
pub use importance::{rank_variables, soil, threshold_select, ImportanceVector, SelectionReport};
pub use path::{penalized_path, PenaltySpec, SolutionPath};
pub use penalty::PenaltyKind;
pub use pipeline::{compute_importance, CandidateStrategy, SoilConfig, SoilResult};
pub use simulation::{cross_examination, run_study, ScenarioConfig, StudyOptions, StudyResult};
pub use weighting::{WeightVector, WeightingMethod};
