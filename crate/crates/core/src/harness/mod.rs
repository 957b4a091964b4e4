//! Scripted, seeded experiments and the statistics that summarize them.

pub mod config;
pub mod experiments;
pub mod metrics;

pub use config::{ExperimentConfig, ExperimentKind, Overrides, Profile};
pub use experiments::{
    exp_contribution, exp_corruption, exp_parity, exp_remove_retrain, exp_scaling, experiment_dir,
    load_experiment_corpus, prepare_data, rcce_config, run_experiment, ContributionReport, ContributionRow,
    ContributionSeed, ExperimentOutcome, Method, ParitySeed, RetrainSeed, ScalingRow, RESOLVED_CONFIG_FILE,
};
pub use metrics::{average_ranks, mean, rank_auc, spearman};
