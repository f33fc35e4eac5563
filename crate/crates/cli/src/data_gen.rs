//! Synthetic training data: oracle values on an inset grid with SNR-scaled
//! Gaussian noise, plus artificial noiseless boundary observations.
//!
//! Seeding scheme: replication `r` of a run with master seed `s` draws its
//! measurement noise from stream `derived_seed(s, 2 r)` and its sampler from
//! stream `derived_seed(s, 2 r + 1)`; maximum-likelihood restarts perturb
//! from `derived_seed(s, 2 r)` as well (the optimizer owns a separate
//! generator). Noise is drawn as standard normals in a fixed order and scaled
//! afterwards, so replications share their underlying draws across SNR levels.

use anyhow::Result;
use kirchhoff_gp::{
    cross_covariance, derived_seed, Dataset, ExtendedHyperparams, KernelParams, Observation,
    PlateConstants, PlateGeometry, Point, QuantityKind, Real, SupportKind, TruthModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{BcMode, ExperimentConfig};

/// Grid coordinates along one axis: equidistant with the outermost points
/// moved inward by the inset fraction.
pub fn inset_axis(span: Real, points: usize, inset: Real) -> Vec<Real> {
    let n = points.max(2);
    let mut axis: Vec<Real> = (0..n)
        .map(|i| span * i as Real / (n - 1) as Real)
        .collect();
    axis[0] = span * inset;
    axis[n - 1] = span * (1.0 - inset);
    axis
}

/// Cartesian training grid in row-major (x outer, y inner) order.
pub fn training_grid(cfg: &ExperimentConfig) -> Vec<Point<Real>> {
    let xs = inset_axis(
        cfg.geometry.span_x,
        cfg.training.points_per_side,
        cfg.training.boundary_inset,
    );
    let ys = inset_axis(
        cfg.geometry.span_y,
        cfg.training.points_per_side,
        cfg.training.boundary_inset,
    );
    let mut grid = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            grid.push(Point::new(x, y));
        }
    }
    grid
}

fn population_std(values: &[Real]) -> Real {
    let n = values.len() as Real;
    let mean = values.iter().sum::<Real>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<Real>() / n;
    var.sqrt()
}

fn rms(values: &[Real]) -> Real {
    let n = values.len() as Real;
    (values.iter().map(|v| v * v).sum::<Real>() / n).sqrt()
}

/// Per-quantity noise standard deviations actually applied to a dataset.
#[derive(Debug, Clone)]
pub struct NoiseScales {
    pub entries: Vec<(QuantityKind, Real)>,
}

impl NoiseScales {
    pub fn get(&self, kind: QuantityKind) -> Option<Real> {
        self.entries
            .iter()
            .find(|&&(k, _)| k == kind)
            .map(|&(_, s)| s)
    }
}

/// Samples the learning-case quantities on the training grid and adds
/// independent Gaussian noise with `sigma = std(true values) / SNR` per
/// quantity (population standard deviation over the grid; an infinite SNR
/// leaves the data exactly equal to the oracle).
pub fn generate_training_data(
    cfg: &ExperimentConfig,
    truth: &TruthModel<Real>,
    replication: u64,
) -> Result<(Dataset<Real>, NoiseScales)> {
    let grid = training_grid(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(cfg.seed, 2 * replication));
    let snr = cfg.training.snr;

    let mut observations = Vec::new();
    let mut scales = Vec::new();
    for &kind in cfg.training.case.quantities() {
        let values: Vec<Real> = grid.iter().map(|&p| truth.field(kind, p)).collect();
        let sigma = if snr.is_finite() {
            population_std(&values) / snr
        } else {
            0.0
        };
        scales.push((kind, sigma));
        for (&p, &v) in grid.iter().zip(&values) {
            // draw unconditionally so the stream stays aligned across SNR levels
            let unit: Real = rng.sample(StandardNormal);
            observations.push(Observation::noisy(p, kind, v + sigma * unit));
        }
    }

    let data = Dataset::new(cfg.geometry.span_x, cfg.geometry.span_y, observations)?;
    Ok((data, NoiseScales { entries: scales }))
}

/// Appends zero-valued noiseless boundary observations: deflection on every
/// edge, plus the normal rotation on fixed edges. Duplicate (quantity,
/// location) pairs arising at shared corners are kept once.
pub fn inject_boundary_conditions(
    data: &Dataset<Real>,
    geom: &PlateGeometry<Real>,
    mode: BcMode,
    support: SupportKind,
    points_per_edge: usize,
) -> Result<Dataset<Real>> {
    if mode == BcMode::None {
        return Ok(data.clone());
    }
    let n = points_per_edge.max(2);
    let frac = |i: usize| i as Real / (n - 1) as Real;
    let mut extra: Vec<Observation<Real>> = Vec::new();
    let mut push_unique = |obs: Observation<Real>| {
        let dup = extra
            .iter()
            .any(|o| o.quantity == obs.quantity && o.location == obs.location);
        if !dup {
            extra.push(obs);
        }
    };

    for i in 0..n {
        let x = geom.span_x * frac(i);
        let y = geom.span_y * frac(i);
        // deflection vanishes on all four edges for both support types
        push_unique(Observation::noiseless_boundary(
            Point::new(x, 0.0),
            QuantityKind::Deflection,
            0.0,
        ));
        push_unique(Observation::noiseless_boundary(
            Point::new(x, geom.span_y),
            QuantityKind::Deflection,
            0.0,
        ));
        push_unique(Observation::noiseless_boundary(
            Point::new(0.0, y),
            QuantityKind::Deflection,
            0.0,
        ));
        push_unique(Observation::noiseless_boundary(
            Point::new(geom.span_x, y),
            QuantityKind::Deflection,
            0.0,
        ));
        if support == SupportKind::Fixed {
            // normal rotation vanishes on clamped edges
            push_unique(Observation::noiseless_boundary(
                Point::new(0.0, y),
                QuantityKind::RotationX,
                0.0,
            ));
            push_unique(Observation::noiseless_boundary(
                Point::new(geom.span_x, y),
                QuantityKind::RotationX,
                0.0,
            ));
            push_unique(Observation::noiseless_boundary(
                Point::new(x, 0.0),
                QuantityKind::RotationY,
                0.0,
            ));
            push_unique(Observation::noiseless_boundary(
                Point::new(x, geom.span_y),
                QuantityKind::RotationY,
                0.0,
            ));
        }
    }
    Ok(data.with_appended(extra)?)
}

fn noise_guess(values: &[Real]) -> Real {
    let spread = population_std(values).max(1e-3 * rms(values)).max(1e-12);
    (spread / 5.0) * (spread / 5.0)
}

/// Data-driven initial hyperparameters shared by the likelihood optimizer and
/// the sampler; explicit `[initial]` config entries override the heuristics.
///
/// Length scales start at 0.4 of the spans. The base amplitude is the larger
/// of the deflection spread and the curvature spread rescaled by the length
/// scales; the rigidity starts at the dimensional estimate `q L^4 / (400 A)`
/// (center deflections of simply supported and clamped plates bracket that
/// coefficient); the amplitude is then doubled and raised, if needed, to the
/// value matching the prior load variance to the observed load magnitude.
/// Starting with an amplitude far below the data scale risks equilibrating
/// the chain inside a degenerate all-noise explanation of the data.
pub fn initial_hyperparams(
    cfg: &ExperimentConfig,
    data: &Dataset<Real>,
) -> Result<ExtendedHyperparams<Real>> {
    let length_x = cfg.initial.length_x.unwrap_or(0.4 * cfg.geometry.span_x);
    let length_y = cfg.initial.length_y.unwrap_or(0.4 * cfg.geometry.span_y);

    let collect = |kind: QuantityKind| -> Vec<Real> {
        data.observations()
            .iter()
            .filter(|o| o.quantity == kind && o.noise_class == kirchhoff_gp::NoiseClass::Noisy)
            .map(|o| o.value)
            .collect()
    };

    let w_values = collect(QuantityKind::Deflection);
    let kx_values = collect(QuantityKind::CurvatureX);
    let q_values = collect(QuantityKind::Load);

    let mut rough_amplitude: Real = 0.0;
    if !w_values.is_empty() {
        rough_amplitude = rough_amplitude.max(population_std(&w_values));
    }
    if !kx_values.is_empty() {
        rough_amplitude = rough_amplitude.max(population_std(&kx_values) * length_x * length_y);
    }
    if rough_amplitude == 0.0 {
        rough_amplitude = 1.0;
    }

    let rigidity = cfg.initial.rigidity.unwrap_or_else(|| {
        if q_values.is_empty() {
            1.0
        } else {
            let span = cfg.geometry.span_x.min(cfg.geometry.span_y);
            (rms(&q_values).max(1e-10) * span.powi(4) / (400.0 * rough_amplitude)).max(1e-8)
        }
    });

    let amplitude = cfg.initial.amplitude.unwrap_or_else(|| {
        let mut anchor = rough_amplitude;
        if !q_values.is_empty() {
            // amplitude at which the prior load variance matches the data
            let unit = KernelParams::new(1.0, length_x, length_y).expect("positive scales");
            let constants = PlateConstants::new(rigidity, cfg.geometry.poisson_ratio)
                .expect("validated geometry");
            let origin = Point::new(0.0, 0.0);
            let load_var = cross_covariance(
                QuantityKind::Load,
                QuantityKind::Load,
                origin,
                origin,
                &unit,
                &constants,
            );
            if load_var > 0.0 {
                anchor = anchor.max(rms(&q_values) / load_var.sqrt());
            }
        }
        2.0 * anchor
    });

    let mut noise = Vec::new();
    for kind in data.noisy_quantities() {
        noise.push((kind, noise_guess(&collect(kind))));
    }

    Ok(ExtendedHyperparams::new(
        KernelParams::new(amplitude, length_x, length_y)?,
        rigidity,
        &noise,
    )?)
}
