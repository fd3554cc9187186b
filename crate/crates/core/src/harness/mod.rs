//! Scenario configuration, Monte Carlo campaigns, statistics and artifacts.

pub mod campaign;
pub mod config;
pub mod output;
pub mod stats;
mod svg;

pub use campaign::{
    load_or_plan, plan_routes, read_trials_csv, run_campaign, run_scenario, run_single_trial, write_trials_csv,
    RoutePlan, TrialRecord,
};
pub use config::{CampaignConfig, ScenarioConfig, ScenarioId, ShapeConfig};
pub use output::emit_outputs;
pub use stats::{fit_logistic, summarize, LogisticFit, SummaryStats};
