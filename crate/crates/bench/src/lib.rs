//! Fixtures shared by the criterion benches in `benches/`.

use soil_core::simulation::{generate_scenario, ScenarioConfig};
use soil_core::Dataset;

/// First replication of a built-in scenario, resized to `n` rows.
pub fn scenario_data(example: &str, n: usize) -> Dataset {
    let mut cfg = ScenarioConfig::example(example).expect("known example");
    cfg.n = n;
    cfg.seed = 11;
    generate_scenario(&cfg, 0).expect("valid scenario").data
}
