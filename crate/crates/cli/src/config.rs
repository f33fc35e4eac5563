//! Experiment configuration: a TOML file with strict key checking, plus
//! defaults matching the reference experiments.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kirchhoff_gp::{LoadSpec, PlateGeometry, QuantityKind, Real};
use serde::{Deserialize, Serialize};

/// Which quantity set feeds the learning stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
pub enum LearningCase {
    L1,
    L2,
    L3,
}

impl LearningCase {
    /// Observed quantities: L1 pairs load with deflection, L2 load with the
    /// three curvatures, L3 uses all five.
    pub fn quantities(self) -> &'static [QuantityKind] {
        match self {
            LearningCase::L1 => &[QuantityKind::Deflection, QuantityKind::Load],
            LearningCase::L2 => &[
                QuantityKind::CurvatureX,
                QuantityKind::CurvatureY,
                QuantityKind::CurvatureXY,
                QuantityKind::Load,
            ],
            LearningCase::L3 => &[
                QuantityKind::Deflection,
                QuantityKind::CurvatureX,
                QuantityKind::CurvatureY,
                QuantityKind::CurvatureXY,
                QuantityKind::Load,
            ],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LearningCase::L1 => "L1",
            LearningCase::L2 => "L2",
            LearningCase::L3 => "L3",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default = "one")]
    pub span_x: Real,
    #[serde(default = "one")]
    pub span_y: Real,
    #[serde(default = "one")]
    pub rigidity: Real,
    #[serde(default = "default_poisson")]
    pub poisson_ratio: Real,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            span_x: 1.0,
            span_y: 1.0,
            rigidity: 1.0,
            poisson_ratio: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadKind {
    /// Sinusoidal load over a simply supported plate.
    Sinusoidal,
    /// Uniform load over a fixed (clamped) plate.
    Uniform,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSection {
    pub kind: LoadKind,
    #[serde(default = "one")]
    pub amplitude: Real,
    /// Basis size per direction of the clamped-plate series solution.
    #[serde(default = "default_ritz_modes")]
    pub ritz_modes: usize,
}

impl Default for LoadSection {
    fn default() -> Self {
        Self {
            kind: LoadKind::Sinusoidal,
            amplitude: 1.0,
            ritz_modes: 200,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    #[serde(default = "default_train_points")]
    pub points_per_side: usize,
    /// Fraction of the span by which the outermost grid points move inward.
    #[serde(default = "default_inset")]
    pub boundary_inset: Real,
    /// Signal-to-noise ratio per quantity; `inf` disables noise.
    #[serde(default = "default_snr")]
    pub snr: Real,
    #[serde(default = "default_case")]
    pub case: LearningCase,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            points_per_side: 5,
            boundary_inset: 0.05,
            snr: 10.0,
            case: LearningCase::L3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMode {
    None,
    DisplacementRotation,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConditionSection {
    #[serde(default = "default_bc_mode")]
    pub mode: BcMode,
    #[serde(default = "default_bc_points")]
    pub points_per_edge: usize,
}

impl Default for BoundaryConditionSection {
    fn default() -> Self {
        Self {
            mode: BcMode::None,
            points_per_edge: 5,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionSection {
    #[serde(default = "default_pred_points")]
    pub points_per_side: usize,
    /// Quantity labels to export (`w`, `r_x`, `kappa_x`, `M_x`, ...).
    #[serde(default = "default_pred_quantities")]
    pub quantities: Vec<String>,
    /// Thinning stride over the retained trace for the predictive mixture.
    #[serde(default = "default_thinning")]
    pub thinning: usize,
}

impl Default for PredictionSection {
    fn default() -> Self {
        Self {
            points_per_side: 21,
            quantities: default_pred_quantities(),
            thinning: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_adapt")]
    pub adapt_iterations: usize,
    #[serde(default = "default_proposal_sd")]
    pub proposal_sd: Real,
    /// Natural-scale uniform hyperprior bounds for amplitude, rigidity and
    /// noise variances.
    #[serde(default = "default_bounds")]
    pub bounds: [Real; 2],
    /// Length-scale hyperprior support as fractions of the plate span;
    /// scales far below the observation spacing are unidentifiable and open
    /// a degenerate likelihood channel through the jitter floor.
    #[serde(default = "default_length_factors")]
    pub length_bounds_factor: [Real; 2],
    #[serde(default = "default_stall")]
    pub stall_window: usize,
}

impl Default for McmcSection {
    fn default() -> Self {
        Self {
            samples: 20_000,
            burn_in: 5_000,
            adapt_iterations: 1_000,
            proposal_sd: 0.1,
            bounds: default_bounds(),
            length_bounds_factor: default_length_factors(),
            stall_window: 2_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MleSection {
    #[serde(default = "default_max_iters")]
    pub max_iterations: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: Real,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_spread")]
    pub restart_spread: Real,
    /// Estimates below this fraction of the true rigidity count as collapsed
    /// in synthetic studies (0 disables the floor).
    #[serde(default = "default_floor_ratio")]
    pub rigidity_floor_ratio: Real,
}

impl Default for MleSection {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            grad_tol: 1e-4,
            restarts: 5,
            restart_spread: 0.5,
            rigidity_floor_ratio: 0.2,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_snr_values")]
    pub snr_values: Vec<Real>,
    #[serde(default = "default_cases")]
    pub cases: Vec<LearningCase>,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            replications: 100,
            snr_values: default_snr_values(),
            cases: default_cases(),
        }
    }
}

/// Optional explicit initial hyperparameters; data-driven defaults apply to
/// omitted entries.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub amplitude: Option<Real>,
    pub length_x: Option<Real>,
    pub length_y: Option<Real>,
    pub rigidity: Option<Real>,
}

/// Full experiment configuration.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub load: LoadSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub boundary_conditions: BoundaryConditionSection,
    #[serde(default)]
    pub prediction: PredictionSection,
    #[serde(default)]
    pub mcmc: McmcSection,
    #[serde(default)]
    pub mle: MleSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub initial: InitialSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            output_dir: default_out(),
            geometry: GeometrySection::default(),
            load: LoadSection::default(),
            training: TrainingSection::default(),
            boundary_conditions: BoundaryConditionSection::default(),
            prediction: PredictionSection::default(),
            mcmc: McmcSection::default(),
            mle: MleSection::default(),
            study: StudySection::default(),
            initial: InitialSection::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates a TOML config file; unknown keys are an error.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.training.snr > 0.0) {
            bail!("training.snr must be positive (inf allowed)");
        }
        if self.training.points_per_side < 2 {
            bail!("training.points_per_side must be at least 2");
        }
        if !(0.0..0.5).contains(&self.training.boundary_inset) {
            bail!("training.boundary_inset must lie in [0, 0.5)");
        }
        if self.prediction.points_per_side < 2 {
            bail!("prediction.points_per_side must be at least 2");
        }
        for label in &self.prediction.quantities {
            if QuantityKind::parse_label(label).is_none() {
                bail!("unknown prediction quantity `{label}`");
            }
        }
        if self.boundary_conditions.points_per_edge < 2 {
            bail!("boundary_conditions.points_per_edge must be at least 2");
        }
        if !(self.mcmc.bounds[0] > 0.0) || !(self.mcmc.bounds[1] > self.mcmc.bounds[0]) {
            bail!("mcmc.bounds must satisfy 0 < lo < hi");
        }
        if !(self.mcmc.length_bounds_factor[0] > 0.0)
            || !(self.mcmc.length_bounds_factor[1] > self.mcmc.length_bounds_factor[0])
        {
            bail!("mcmc.length_bounds_factor must satisfy 0 < lo < hi");
        }
        if self.study.replications < 2 {
            bail!("study.replications must be at least 2");
        }
        if self.load.ritz_modes == 0 {
            bail!("load.ritz_modes must be at least 1");
        }
        self.plate_geometry()?;
        Ok(())
    }

    pub fn plate_geometry(&self) -> Result<PlateGeometry<Real>> {
        Ok(PlateGeometry::new(
            self.geometry.span_x,
            self.geometry.span_y,
            self.geometry.rigidity,
            self.geometry.poisson_ratio,
        )?)
    }

    pub fn load_spec(&self) -> LoadSpec<Real> {
        match self.load.kind {
            LoadKind::Sinusoidal => LoadSpec::Sinusoidal {
                amplitude: self.load.amplitude,
            },
            LoadKind::Uniform => LoadSpec::Uniform {
                amplitude: self.load.amplitude,
            },
        }
    }

    /// Prediction quantities parsed into kinds.
    pub fn prediction_quantities(&self) -> Vec<QuantityKind> {
        self.prediction
            .quantities
            .iter()
            .map(|l| QuantityKind::parse_label(l).expect("validated"))
            .collect()
    }

    /// Canonical serialized form used for hashing run records.
    pub fn canonical_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// FNV-1a hash of the canonical config text; stable across runs. The
    /// output directory is excluded so the hash identifies the experiment,
    /// not where its files land.
    pub fn hash(&self) -> u64 {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in canonical.canonical_string().bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

fn one() -> Real {
    1.0
}
fn default_poisson() -> Real {
    0.3
}
fn default_ritz_modes() -> usize {
    200
}
fn default_train_points() -> usize {
    5
}
fn default_inset() -> Real {
    0.05
}
fn default_snr() -> Real {
    10.0
}
fn default_case() -> LearningCase {
    LearningCase::L3
}
fn default_bc_mode() -> BcMode {
    BcMode::None
}
fn default_bc_points() -> usize {
    5
}
fn default_pred_points() -> usize {
    21
}
fn default_pred_quantities() -> Vec<String> {
    vec!["w".into(), "kappa_x".into(), "M_x".into()]
}
fn default_thinning() -> usize {
    10
}
fn default_samples() -> usize {
    20_000
}
fn default_burn_in() -> usize {
    5_000
}
fn default_adapt() -> usize {
    1_000
}
fn default_proposal_sd() -> Real {
    0.1
}
fn default_bounds() -> [Real; 2] {
    // wide enough for quantities whose natural magnitude is far below one
    [1e-12, 1e8]
}
fn default_length_factors() -> [Real; 2] {
    [0.05, 3.0]
}
fn default_stall() -> usize {
    2_000
}
fn default_max_iters() -> usize {
    200
}
fn default_grad_tol() -> Real {
    1e-4
}
fn default_restarts() -> usize {
    5
}
fn default_spread() -> Real {
    0.5
}
fn default_floor_ratio() -> Real {
    0.2
}
fn default_replications() -> usize {
    100
}
fn default_snr_values() -> Vec<Real> {
    vec![5.0, 10.0, 20.0, 100.0]
}
fn default_cases() -> Vec<LearningCase> {
    vec![LearningCase::L1, LearningCase::L2, LearningCase::L3]
}
fn default_seed() -> u64 {
    42
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
