//! End-to-end experiment drivers: single learning runs, the Monte Carlo
//! replication study, and field prediction with export.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use kirchhoff_gp::{
    chain_diagnostics, log_marginal_likelihood_with_jitter, mc_predictive, mcmc_mean, mh_sample,
    mle_optimize, ChainDiagnostics, Dataset, ExtendedHyperparams, JitterPolicy, KernelParams,
    McmcConfig, McmcTrace, MleResult, MleSettings, Point, QuantityKind, Real, Target, TruthModel,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, LearningCase};
use crate::data_gen::{generate_training_data, initial_hyperparams, inject_boundary_conditions};
use crate::export::{
    self, write_dataset, write_diagnostics, write_field, write_key_values, write_study,
    write_trace, write_truth_field, StudyRow,
};

/// Everything learned from one dataset.
pub struct LearnedOutcome {
    pub mle: MleResult<Real>,
    pub trace: McmcTrace<Real>,
    /// Natural-scale posterior-mean parameter vector.
    pub theta_mean: Vec<Real>,
    pub diagnostics: ChainDiagnostics<Real>,
    /// Jitter accepted by the factorization at the posterior mean.
    pub final_jitter: Real,
}

impl LearnedOutcome {
    pub fn mcmc_rigidity(&self) -> Real {
        self.theta_mean[3]
    }

    /// Hyperparameters at the posterior mean.
    pub fn theta_mean_params(&self) -> Result<ExtendedHyperparams<Real>> {
        let m = &self.theta_mean;
        let noise: Vec<(QuantityKind, Real)> = self
            .trace
            .noise_kinds()
            .iter()
            .zip(&m[4..])
            .map(|(&k, &v)| (k, v))
            .collect();
        Ok(ExtendedHyperparams::new(
            KernelParams::new(m[0], m[1], m[2])?,
            m[3],
            &noise,
        )?)
    }
}

/// Reproducible summary of one learning run. The wall-clock time is kept for
/// reporting on standard output but never written to the deterministic
/// exports.
pub struct RunRecord {
    pub config_hash: u64,
    pub seed: u64,
    pub replication: u64,
    pub case: LearningCase,
    pub snr: Real,
    pub rigidity_true: Real,
    pub mle_rigidity: Real,
    pub mle_rel_error: Real,
    pub mle_log_marginal: Real,
    pub mle_iterations: usize,
    pub mle_converged: bool,
    pub mle_collapsed: bool,
    pub rigidity_identifiable: bool,
    pub mcmc_rigidity: Real,
    pub mcmc_rel_error: Real,
    pub acceptance_rate: Real,
    pub retained_samples: usize,
    pub final_jitter: Real,
    pub runtime_seconds: f64,
}

impl RunRecord {
    /// Fixed-order key-value view of the reproducible fields.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        vec![
            ("config_hash".into(), format!("{:016x}", self.config_hash)),
            ("seed".into(), self.seed.to_string()),
            ("replication".into(), self.replication.to_string()),
            ("case".into(), self.case.label().to_string()),
            ("snr".into(), export::fmt(self.snr)),
            ("rigidity_true".into(), export::fmt(self.rigidity_true)),
            ("mle_rigidity".into(), export::fmt(self.mle_rigidity)),
            ("mle_rel_error".into(), export::fmt(self.mle_rel_error)),
            (
                "mle_log_marginal".into(),
                export::fmt(self.mle_log_marginal),
            ),
            ("mle_iterations".into(), self.mle_iterations.to_string()),
            ("mle_converged".into(), self.mle_converged.to_string()),
            ("mle_collapsed".into(), self.mle_collapsed.to_string()),
            (
                "rigidity_identifiable".into(),
                self.rigidity_identifiable.to_string(),
            ),
            ("mcmc_rigidity".into(), export::fmt(self.mcmc_rigidity)),
            ("mcmc_rel_error".into(), export::fmt(self.mcmc_rel_error)),
            ("acceptance_rate".into(), export::fmt(self.acceptance_rate)),
            (
                "retained_samples".into(),
                self.retained_samples.to_string(),
            ),
            ("final_jitter".into(), export::fmt(self.final_jitter)),
        ]
    }

    /// Non-zero process exit category for flagged runs: the optimizer failed
    /// to converge or collapsed below the rigidity floor.
    pub fn flagged(&self) -> bool {
        !self.mle_converged || self.mle_collapsed
    }
}

/// Oracle for the configured geometry and load.
pub fn build_truth(cfg: &ExperimentConfig) -> Result<TruthModel<Real>> {
    Ok(TruthModel::new(
        &cfg.plate_geometry()?,
        cfg.load_spec(),
        cfg.load.ritz_modes,
    )?)
}

/// Training data for one replication, boundary conditions included.
pub fn prepare_dataset(
    cfg: &ExperimentConfig,
    truth: &TruthModel<Real>,
    replication: u64,
) -> Result<Dataset<Real>> {
    let (data, _) = generate_training_data(cfg, truth, replication)?;
    inject_boundary_conditions(
        &data,
        &cfg.plate_geometry()?,
        cfg.boundary_conditions.mode,
        truth.support(),
        cfg.boundary_conditions.points_per_edge,
    )
}

/// Hyperprior support per parameter: the configured global bounds for the
/// amplitude, rigidity and noise variances, and a span-scaled window for the
/// length scales.
fn param_bounds(cfg: &ExperimentConfig, initial: &ExtendedHyperparams<Real>) -> kirchhoff_gp::ParamBounds<Real> {
    let (lo, hi) = (cfg.mcmc.bounds[0], cfg.mcmc.bounds[1]);
    let [f_lo, f_hi] = cfg.mcmc.length_bounds_factor;
    let mut pairs = vec![
        (lo, hi),
        (f_lo * cfg.geometry.span_x, f_hi * cfg.geometry.span_x),
        (f_lo * cfg.geometry.span_y, f_hi * cfg.geometry.span_y),
        (lo, hi),
    ];
    pairs.extend(std::iter::repeat((lo, hi)).take(initial.noise_kinds().len()));
    kirchhoff_gp::ParamBounds::per_param(pairs)
}

fn mle_settings(
    cfg: &ExperimentConfig,
    initial: &ExtendedHyperparams<Real>,
    replication: u64,
) -> MleSettings<Real> {
    MleSettings {
        grad_tol: cfg.mle.grad_tol,
        max_iterations: cfg.mle.max_iterations,
        restarts: cfg.mle.restarts,
        restart_spread: cfg.mle.restart_spread,
        rigidity_floor: (cfg.mle.rigidity_floor_ratio > 0.0)
            .then(|| cfg.mle.rigidity_floor_ratio * cfg.geometry.rigidity),
        bounds: Some(param_bounds(cfg, initial)),
        seed: kirchhoff_gp::derived_seed(cfg.seed, 2 * replication),
        jitter: JitterPolicy::default(),
    }
}

fn mcmc_config(
    cfg: &ExperimentConfig,
    initial: ExtendedHyperparams<Real>,
    replication: u64,
) -> McmcConfig<Real> {
    let bounds = param_bounds(cfg, &initial);
    let mut mc = McmcConfig::new(
        initial,
        cfg.mcmc.samples,
        cfg.mcmc.burn_in,
        kirchhoff_gp::derived_seed(cfg.seed, 2 * replication + 1),
    );
    mc.proposal_sd = vec![cfg.mcmc.proposal_sd];
    mc.bounds = bounds;
    mc.adapt_iterations = cfg.mcmc.adapt_iterations;
    mc.stall_window = cfg.mcmc.stall_window;
    mc
}

/// Learns the configured case once with both estimators from identical
/// initial values and summarizes the outcome.
pub fn run_learning_case_with(
    cfg: &ExperimentConfig,
    truth: &TruthModel<Real>,
    replication: u64,
) -> Result<(Dataset<Real>, LearnedOutcome, RunRecord)> {
    let start = Instant::now();
    let data = prepare_dataset(cfg, truth, replication)?;
    let initial = initial_hyperparams(cfg, &data)?;
    let nu = cfg.geometry.poisson_ratio;

    let mle = mle_optimize(&data, &initial, nu, &mle_settings(cfg, &initial, replication))?;
    let trace = mh_sample(&data, &mcmc_config(cfg, initial, replication), nu)?;
    let theta_mean = mcmc_mean(&trace)?;
    let diagnostics = chain_diagnostics(&trace, 30)?;

    let outcome = LearnedOutcome {
        final_jitter: 0.0,
        mle,
        trace,
        theta_mean,
        diagnostics,
    };
    let mean_theta = outcome.theta_mean_params()?;
    let (_, jitter) =
        log_marginal_likelihood_with_jitter(&data, &mean_theta, nu, &JitterPolicy::default())?;
    let outcome = LearnedOutcome {
        final_jitter: jitter,
        ..outcome
    };

    let d_true = cfg.geometry.rigidity;
    let mle_rigidity = outcome.mle.theta.rigidity();
    let mcmc_rigidity = outcome.mcmc_rigidity();
    let record = RunRecord {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        replication,
        case: cfg.training.case,
        snr: cfg.training.snr,
        rigidity_true: d_true,
        mle_rigidity,
        mle_rel_error: (mle_rigidity - d_true).abs() / d_true,
        mle_log_marginal: outcome.mle.log_marginal,
        mle_iterations: outcome.mle.iterations,
        mle_converged: outcome.mle.converged,
        mle_collapsed: outcome.mle.rigidity_collapsed,
        rigidity_identifiable: outcome.mle.rigidity_identifiable,
        mcmc_rigidity,
        mcmc_rel_error: (mcmc_rigidity - d_true).abs() / d_true,
        acceptance_rate: outcome.trace.acceptance_rate(),
        retained_samples: outcome.trace.len(),
        final_jitter: outcome.final_jitter,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((data, outcome, record))
}

pub fn run_learning_case(
    cfg: &ExperimentConfig,
    replication: u64,
) -> Result<(Dataset<Real>, LearnedOutcome, RunRecord)> {
    let truth = build_truth(cfg)?;
    run_learning_case_with(cfg, &truth, replication)
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[Real], p: Real) -> Real {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as Real * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as Real;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn summarize(snr: Real, case: LearningCase, estimator: &str, values: &[Real], excluded: usize) -> StudyRow {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    StudyRow {
        snr,
        case: case.label().to_string(),
        estimator: estimator.to_string(),
        mean: sorted.iter().sum::<Real>() / sorted.len() as Real,
        q25: quantile(&sorted, 0.25),
        q75: quantile(&sorted, 0.75),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        used: sorted.len(),
        excluded,
    }
}

/// Noise re-sampling study over the configured SNR grid and learning cases.
/// Replications run in parallel on independent derived streams; MLE estimates
/// below the rigidity floor are excluded from the point statistics and
/// counted.
pub fn monte_carlo_study(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    let mut rows = Vec::new();
    for &case in &cfg.study.cases {
        for &snr in &cfg.study.snr_values {
            let mut cell = cfg.clone();
            cell.training.case = case;
            cell.training.snr = snr;
            let truth = build_truth(&cell)?;
            let outcomes: Vec<(Real, Real, bool)> = (0..cfg.study.replications)
                .into_par_iter()
                .map(|r| {
                    let (_, outcome, _) = run_learning_case_with(&cell, &truth, r as u64)
                        .unwrap_or_else(|e| panic!("replication {r} failed: {e}"));
                    (
                        outcome.mcmc_rigidity(),
                        outcome.mle.theta.rigidity(),
                        outcome.mle.rigidity_collapsed,
                    )
                })
                .collect();
            let mcmc_values: Vec<Real> = outcomes.iter().map(|&(m, _, _)| m).collect();
            let mle_values: Vec<Real> = outcomes
                .iter()
                .filter(|&&(_, _, collapsed)| !collapsed)
                .map(|&(_, v, _)| v)
                .collect();
            let excluded = outcomes.len() - mle_values.len();
            rows.push(summarize(snr, case, "mcmc_mean", &mcmc_values, 0));
            rows.push(summarize(snr, case, "mle", &mle_values, excluded));
        }
    }
    Ok(rows)
}

/// One predicted quantity over the prediction grid.
pub struct QuantityField {
    pub quantity: QuantityKind,
    pub targets: Vec<Target<Real>>,
    pub summaries: Vec<kirchhoff_gp::PredictiveSummary<Real>>,
    pub truth: Vec<Real>,
    pub truth_max_abs: Real,
}

pub struct PredictionArtifacts {
    pub fields: Vec<QuantityField>,
}

fn line_targets(
    xs: &[Real],
    y: Real,
    quantity: QuantityKind,
) -> Vec<Target<Real>> {
    xs.iter()
        .map(|&x| Target::new(Point::new(x, y), quantity))
        .collect()
}

/// Predicts the configured quantities on the prediction grid plus the
/// mid-span and edge lines, exporting predictions, normalized predictions and
/// ground truth in a shared schema.
pub fn predict_fields(
    cfg: &ExperimentConfig,
    data: &Dataset<Real>,
    trace: &McmcTrace<Real>,
    truth: &TruthModel<Real>,
    out_dir: &Path,
) -> Result<PredictionArtifacts> {
    let nu = cfg.geometry.poisson_ratio;
    let n = cfg.prediction.points_per_side;
    let xs: Vec<Real> = (0..n)
        .map(|i| cfg.geometry.span_x * i as Real / (n - 1) as Real)
        .collect();
    let ys: Vec<Real> = (0..n)
        .map(|i| cfg.geometry.span_y * i as Real / (n - 1) as Real)
        .collect();

    let mut artifacts = Vec::new();
    for quantity in cfg.prediction_quantities() {
        let mut targets = Vec::with_capacity(n * n);
        for &x in &xs {
            for &y in &ys {
                targets.push(Target::new(Point::new(x, y), quantity));
            }
        }
        let summaries = mc_predictive(data, trace, cfg.prediction.thinning, nu, &targets)?;
        let truth_values: Vec<Real> = targets
            .iter()
            .map(|t| truth.field(quantity, t.location))
            .collect();
        let truth_max_abs = truth_values
            .iter()
            .fold(0.0_f64, |m, &v| m.max(v.abs()))
            .max(Real::MIN_POSITIVE);
        let label = quantity.label();
        write_field(&out_dir.join(format!("field_{label}.csv")), &targets, &summaries)?;
        write_truth_field(
            &out_dir.join(format!("field_truth_{label}.csv")),
            &targets,
            &truth_values,
        )?;
        // normalized copy: values scaled by the peak oracle magnitude
        let normalized: Vec<kirchhoff_gp::PredictiveSummary<Real>> = summaries
            .iter()
            .map(|s| kirchhoff_gp::PredictiveSummary {
                mean: s.mean / truth_max_abs,
                variance: s.variance / (truth_max_abs * truth_max_abs),
                lower: s.lower / truth_max_abs,
                upper: s.upper / truth_max_abs,
            })
            .collect();
        write_field(
            &out_dir.join(format!("field_normalized_{label}.csv")),
            &targets,
            &normalized,
        )?;

        // centreline and supported-edge extracts
        let mid = line_targets(&xs, cfg.geometry.span_y / 2.0, quantity);
        let mid_summaries = mc_predictive(data, trace, cfg.prediction.thinning, nu, &mid)?;
        write_field(&out_dir.join(format!("line_mid_{label}.csv")), &mid, &mid_summaries)?;
        let mid_truth: Vec<Real> = mid.iter().map(|t| truth.field(quantity, t.location)).collect();
        write_truth_field(
            &out_dir.join(format!("line_mid_truth_{label}.csv")),
            &mid,
            &mid_truth,
        )?;
        let edge = line_targets(&xs, 0.0, quantity);
        let edge_summaries = mc_predictive(data, trace, cfg.prediction.thinning, nu, &edge)?;
        write_field(&out_dir.join(format!("line_edge_{label}.csv")), &edge, &edge_summaries)?;
        let edge_truth: Vec<Real> = edge.iter().map(|t| truth.field(quantity, t.location)).collect();
        write_truth_field(
            &out_dir.join(format!("line_edge_truth_{label}.csv")),
            &edge,
            &edge_truth,
        )?;

        artifacts.push(QuantityField {
            quantity,
            targets,
            summaries,
            truth: truth_values,
            truth_max_abs,
        });
    }
    Ok(PredictionArtifacts { fields: artifacts })
}

/// Full pipeline: data, learning, diagnostics, prediction, exports.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(RunRecord, PredictionArtifacts)> {
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let truth = build_truth(cfg)?;
    let (data, outcome, record) = run_learning_case_with(cfg, &truth, 0)?;
    write_dataset(&out.join("dataset.csv"), &data)?;
    write_trace(&out.join("trace.csv"), &outcome.trace)?;
    write_key_values(&out.join("run_summary.txt"), &record.to_key_values())?;
    write_diagnostics(
        &out.join("diagnostics.txt"),
        outcome.trace.names(),
        &outcome.diagnostics,
    )?;
    let artifacts = predict_fields(cfg, &data, &outcome.trace, &truth, &out)?;
    Ok((record, artifacts))
}

/// Learning-only pipeline used by the `learn` subcommand.
pub fn run_learn(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let truth = build_truth(cfg)?;
    let (data, outcome, record) = run_learning_case_with(cfg, &truth, 0)?;
    write_dataset(&out.join("dataset.csv"), &data)?;
    write_trace(&out.join("trace.csv"), &outcome.trace)?;
    write_key_values(&out.join("run_summary.txt"), &record.to_key_values())?;
    write_diagnostics(
        &out.join("diagnostics.txt"),
        outcome.trace.names(),
        &outcome.diagnostics,
    )?;
    Ok(record)
}

/// Data-generation pipeline used by the `generate` subcommand.
pub fn run_generate(cfg: &ExperimentConfig) -> Result<Dataset<Real>> {
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let truth = build_truth(cfg)?;
    let data = prepare_dataset(cfg, &truth, 0)?;
    write_dataset(&out.join("dataset.csv"), &data)?;
    Ok(data)
}

/// Prediction from a previously exported trace (the dataset is regenerated
/// deterministically from the config and seed).
pub fn run_predict(cfg: &ExperimentConfig, trace_path: &Path) -> Result<PredictionArtifacts> {
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let trace = export::read_trace(trace_path)?;
    let truth = build_truth(cfg)?;
    let data = prepare_dataset(cfg, &truth, 0)?;
    predict_fields(cfg, &data, &trace, &truth, &out)
}

/// Study pipeline used by the `mc-study` subcommand.
pub fn run_study(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>> {
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let rows = monte_carlo_study(cfg)?;
    write_study(&out.join("mc_study.csv"), &rows)?;
    Ok(rows)
}
