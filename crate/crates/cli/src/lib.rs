//! Experiment harness for the plate inference engine: configuration,
//! synthetic data generation, learning-case drivers, Monte Carlo studies and
//! deterministic exports.

pub mod config;
pub mod data_gen;
pub mod experiment;
pub mod export;

pub use config::{BcMode, ExperimentConfig, LearningCase, LoadKind};
pub use data_gen::{
    generate_training_data, initial_hyperparams, inject_boundary_conditions, training_grid,
};
pub use experiment::{
    build_truth, monte_carlo_study, predict_fields, prepare_dataset, run_experiment,
    run_learning_case, run_learning_case_with, LearnedOutcome, PredictionArtifacts, RunRecord,
};
