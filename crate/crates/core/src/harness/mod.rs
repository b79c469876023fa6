//! Scenario configuration, the perception–action loop, Monte Carlo driver,
//! metrics and result files.

pub mod config;
pub mod metrics;
pub mod montecarlo;
pub mod output;
pub mod pac;

pub use config::{Mode, ScenarioConfig};
pub use metrics::{summarize, MetricsSummary};
pub use montecarlo::run_monte_carlo;
pub use output::emit_results;
pub use pac::{run_pac_loop, RunResult, Scenario, StepRecord};
