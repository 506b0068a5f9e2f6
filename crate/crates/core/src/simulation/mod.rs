//! Synthetic scenarios, replicated studies and guided cross-examination.

mod scenario;
mod study;

pub use scenario::{ar1_design, generate_scenario, Addon, ScenarioConfig, SimulatedData, EXAMPLE_NAMES};
pub use study::{
    cross_examination, run_study, MethodRecord, MethodSummary, ReplicationRecord, SelectionSummary, StudyOptions,
    StudyResult,
};
