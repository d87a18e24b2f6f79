//! Data-generating processes, population truths and Monte Carlo studies.

mod config;
mod dgp;
mod montecarlo;
mod oracle;

pub use config::{DgpKind, SimulationConfig};
pub use dgp::{discretize, gen_multi_period, gen_two_period, generate_panel, DgpParams};
pub use montecarlo::{
    run_monte_carlo, run_monte_carlo_with_truth, write_results_csv, MonteCarloReport,
    MonteCarloResult, OmSpec, PsSpec, ReplicationFailure, Scenario, ScenarioSpec, RESULT_COLUMNS,
};
pub use oracle::{true_estimands, PeriodTruth, TrueEstimands, TrueValue, DEFAULT_ORACLE_N};
