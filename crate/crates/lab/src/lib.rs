//! Scenario runner for the formsum laboratory: JSON scenario files, built-in
//! presets, deterministic CSV/JSON outputs and run manifests.

pub mod error;
pub mod output;
pub mod presets;
pub mod runner;
pub mod scenario;

pub use error::LabError;
pub use output::{execute, RunManifest};
pub use presets::{preset, PRESETS};
pub use runner::{run_scenario, Outcome};
pub use scenario::{Scenario, ScenarioKind};

/// Environment variable overriding the scenario seed.
pub const SEED_ENV: &str = "FORMSUM_LAB_SEED";

/// Applies `FORMSUM_LAB_SEED` when set.
pub fn apply_seed_override(scenario: &mut Scenario, value: Option<&str>) -> Result<(), LabError> {
    if let Some(v) = value {
        scenario.seed = v.trim().parse().map_err(|_| {
            LabError::Config(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))
        })?;
    }
    Ok(())
}
