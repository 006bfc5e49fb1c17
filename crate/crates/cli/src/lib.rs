//! Experiment runner for the lplab laboratory: config ingestion, random
//! instance generation, scenario orchestration and report emission.

pub mod config;
pub mod error;
pub mod instance;
pub mod output;
pub mod run;

pub use config::{load_config, parse_config, validate, ExperimentConfig, Overrides, Scenario};
pub use error::{CliError, Result};
pub use instance::{generate_random_instance, Instance, InstanceDoc, InstanceKind, InstanceSpec};
pub use run::{execute, run, CheckResult, RunReport};

/// Cap the global rayon pool at `LAB_THREADS` if set.
pub fn init_threads() {
    if let Some(n) = std::env::var("LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("LAB_THREADS ignored: {e}");
            }
        }
    }
}
