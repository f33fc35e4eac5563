//! Predictive posteriors of plate quantities at unobserved locations, for
//! fixed hyperparameters or marginalized over a posterior trace.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::inference::McmcTrace;
use crate::linalg::Matrix;
use crate::model::{factor_system, ExtendedHyperparams, JitterPolicy};
use crate::operators::{operator_for, PairEvaluator, PlateConstants, QuantityKind, ResolvedOperator};
use crate::geometry::Point;
use crate::scalar::Scalar;

/// A prediction target: one quantity at one location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target<S> {
    pub location: Point<S>,
    pub quantity: QuantityKind,
}

impl<S: Scalar> Target<S> {
    pub fn new(location: Point<S>, quantity: QuantityKind) -> Self {
        Self { location, quantity }
    }
}

/// Per-target mixture summary: moments plus the central 99% band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveSummary<S> {
    pub mean: S,
    pub variance: S,
    /// 0.5% quantile of the predictive mixture.
    pub lower: S,
    /// 99.5% quantile of the predictive mixture.
    pub upper: S,
}

fn check_targets<S: Scalar>(data: &Dataset<S>, targets: &[Target<S>]) -> Result<()> {
    let (sx, sy) = data.span();
    for t in targets {
        if !data.contains(t.location) {
            return Err(Error::OutOfDomain {
                x: t.location.x.to_f64_lossy(),
                y: t.location.y.to_f64_lossy(),
                span_x: sx.to_f64_lossy(),
                span_y: sy.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// Gaussian predictive posterior conditioned on fixed hyperparameters:
/// mean `K*^T (K+E)^{-1} z` and per-target marginal variance
/// `K**_tt - k*_t^T (K+E)^{-1} k*_t`.
pub fn predictive_posterior<S: Scalar>(
    data: &Dataset<S>,
    theta: &ExtendedHyperparams<S>,
    poisson_ratio: S,
    targets: &[Target<S>],
) -> Result<(Vec<S>, Vec<S>)> {
    check_targets(data, targets)?;
    let constants = PlateConstants::new(theta.rigidity(), poisson_ratio)?;
    let params = theta.kernel_params();
    let sys = factor_system(data, theta, poisson_ratio, &JitterPolicy::default())?;
    let z = data.values();
    let alpha = sys.factor.solve(&z);
    let obs = data.observations();
    let n = obs.len();
    let m = targets.len();

    // Resolved operators for every quantity appearing on either side.
    let mut ops: Vec<Option<ResolvedOperator<S>>> = vec![None; QuantityKind::ALL.len()];
    for kind in data
        .quantities()
        .into_iter()
        .chain(targets.iter().map(|t| t.quantity))
    {
        let rank = kind.block_rank();
        if ops[rank].is_none() {
            ops[rank] = Some(operator_for::<S>(kind).resolve(poisson_ratio));
        }
    }

    // Cross covariance between observations (rows) and targets (columns).
    let mut cross = Matrix::zeros(n, m);
    for i in 0..n {
        let op_i = ops[obs[i].quantity.block_rank()].as_ref().unwrap();
        for (j, t) in targets.iter().enumerate() {
            let op_t = ops[t.quantity.block_rank()].as_ref().unwrap();
            let eval = PairEvaluator::new(obs[i].location, t.location, &params, constants.rigidity);
            cross.set(i, j, eval.value(op_i, op_t));
        }
    }

    let means: Vec<S> = (0..m)
        .map(|j| (0..n).map(|i| cross.get(i, j) * alpha[i]).sum())
        .collect();

    // Marginal variances via the half-solved cross block: L V = K*.
    let v = sys.factor.forward_solve_matrix(&cross);
    let variances: Vec<S> = targets
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let op_t = ops[t.quantity.block_rank()].as_ref().unwrap();
            let eval = PairEvaluator::new(t.location, t.location, &params, constants.rigidity);
            let prior = eval.value(op_t, op_t);
            let reduction: S = (0..n).map(|i| v.get(i, j) * v.get(i, j)).sum();
            (prior - reduction).max(S::zero())
        })
        .collect();

    Ok((means, variances))
}

/// Monte Carlo predictive mixture over a thinned posterior trace.
///
/// The mixture mean is the average of per-draw means; the mixture variance
/// adds the spread of per-draw means to the average per-draw variance (law of
/// total variance); the 99% band comes from the exact mixture CDF by
/// bisection.
pub fn mc_predictive<S: Scalar>(
    data: &Dataset<S>,
    trace: &McmcTrace<S>,
    stride: usize,
    poisson_ratio: S,
    targets: &[Target<S>],
) -> Result<Vec<PredictiveSummary<S>>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let stride = stride.max(1);
    let indices: Vec<usize> = (0..trace.len()).step_by(stride).collect();
    let n_draws = indices.len();
    let m = targets.len();

    let mut means = Matrix::zeros(n_draws, m);
    let mut variances = Matrix::zeros(n_draws, m);
    for (row, &idx) in indices.iter().enumerate() {
        let theta = trace.theta_at(idx)?;
        let (mu, var) = predictive_posterior(data, &theta, poisson_ratio, targets)?;
        for j in 0..m {
            means.set(row, j, mu[j]);
            variances.set(row, j, var[j]);
        }
    }

    let nf = S::count(n_draws);
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mean: S = (0..n_draws).map(|r| means.get(r, j)).sum::<S>() / nf;
        let avg_var: S = (0..n_draws).map(|r| variances.get(r, j)).sum::<S>() / nf;
        let mean_sq: S = (0..n_draws)
            .map(|r| means.get(r, j) * means.get(r, j))
            .sum::<S>()
            / nf;
        let var_of_means = (mean_sq - mean * mean).max(S::zero());
        let variance = avg_var + var_of_means;

        let component_means: Vec<S> = (0..n_draws).map(|r| means.get(r, j)).collect();
        let component_vars: Vec<S> = (0..n_draws).map(|r| variances.get(r, j)).collect();
        let lower = mixture_quantile(&component_means, &component_vars, S::real(0.005));
        let upper = mixture_quantile(&component_means, &component_vars, S::real(0.995));
        out.push(PredictiveSummary {
            mean,
            variance,
            lower,
            upper,
        });
    }
    Ok(out)
}

/// Standard normal CDF.
pub(crate) fn normal_cdf<S: Scalar>(x: S) -> S {
    let z = x.to_f64_lossy();
    S::real(0.5 * libm::erfc(-z / std::f64::consts::SQRT_2))
}

fn mixture_cdf<S: Scalar>(means: &[S], variances: &[S], t: S) -> S {
    let mut acc = S::zero();
    for (&m, &v) in means.iter().zip(variances) {
        if v > S::zero() {
            acc += normal_cdf((t - m) / v.sqrt());
        } else if t >= m {
            acc += S::one();
        }
    }
    acc / S::count(means.len())
}

/// Quantile of an equal-weight Gaussian mixture by bisection on its CDF, to
/// a probability tolerance of 1e-6.
pub(crate) fn mixture_quantile<S: Scalar>(means: &[S], variances: &[S], p: S) -> S {
    let mut lo = S::infinity();
    let mut hi = S::neg_infinity();
    let pad = S::real(10.0);
    for (&m, &v) in means.iter().zip(variances) {
        let sd = v.max(S::zero()).sqrt();
        lo = lo.min(m - pad * sd);
        hi = hi.max(m + pad * sd);
    }
    if !(hi > lo) {
        return lo; // all components degenerate at one point
    }
    let tol = S::real(1e-6);
    let mut mid = (lo + hi) / S::real(2.0);
    for _ in 0..200 {
        mid = (lo + hi) / S::real(2.0);
        let c = mixture_cdf(means, variances, mid);
        if (c - p).abs() <= tol {
            return mid;
        }
        if c < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Observation;
    use crate::kernel::KernelParams;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn theta(a: f64, l: f64, d: f64, noise: &[(QuantityKind, f64)]) -> ExtendedHyperparams<f64> {
        ExtendedHyperparams::new(KernelParams::new(a, l, l).unwrap(), d, noise).unwrap()
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0f64) - 0.5).abs() < 1e-12);
        assert!((normal_cdf(1.959963984540054f64) - 0.975).abs() < 1e-9);
        assert!((normal_cdf(-2.575829303548901f64) - 0.005).abs() < 1e-9);
    }

    #[test]
    fn mixture_quantile_single_gaussian() {
        let q = mixture_quantile(&[1.0f64], &[4.0], 0.975);
        assert!((q - (1.0 + 2.0 * 1.959963984540054)).abs() < 1e-4);
    }

    #[test]
    fn mixture_quantile_degenerate_components() {
        let q = mixture_quantile(&[2.0f64, 2.0], &[0.0, 0.0], 0.5);
        assert!((q - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_observations_give_zero_mean_and_prior_variance() {
        let mut rng = StdRng::seed_from_u64(4);
        let obs: Vec<_> = (0..6)
            .map(|_| {
                Observation::noisy(
                    Point::new(rng.gen::<f64>(), rng.gen::<f64>()),
                    QuantityKind::Deflection,
                    0.0,
                )
            })
            .collect();
        let data = Dataset::new(1.0, 1.0, obs).unwrap();
        let th = theta(1.2, 0.5, 1.0, &[(QuantityKind::Deflection, 0.01)]);
        let targets = [
            Target::new(Point::new(0.3, 0.3), QuantityKind::Deflection),
            Target::new(Point::new(0.8, 0.2), QuantityKind::MomentX),
        ];
        let (mean, var) = predictive_posterior(&data, &th, 0.3, &targets).unwrap();
        assert!(mean.iter().all(|&m| m == 0.0));
        // variance reduced below the prior but nonnegative
        for (j, t) in targets.iter().enumerate() {
            let c = PlateConstants::new(1.0, 0.3).unwrap();
            let prior = crate::operators::cross_covariance(
                t.quantity,
                t.quantity,
                t.location,
                t.location,
                &th.kernel_params(),
                &c,
            );
            assert!(var[j] >= 0.0 && var[j] <= prior + 1e-12);
        }
    }

    #[test]
    fn noiseless_observation_is_interpolated() {
        let p = Point::new(0.4, 0.6);
        let data = Dataset::new(
            1.0,
            1.0,
            vec![
                Observation::noiseless_boundary(p, QuantityKind::Deflection, 0.37),
                Observation::noiseless_boundary(Point::new(0.9, 0.1), QuantityKind::Deflection, -0.11),
            ],
        )
        .unwrap();
        let th = theta(1.0, 0.5, 1.0, &[]);
        let targets = [Target::new(p, QuantityKind::Deflection)];
        let (mean, var) = predictive_posterior(&data, &th, 0.3, &targets).unwrap();
        assert!((mean[0] - 0.37).abs() < 1e-3 * 0.37_f64.abs());
        assert!(var[0] >= 0.0 && var[0] < 1e-6);
    }

    #[test]
    fn out_of_domain_target_rejected() {
        let data = Dataset::new(
            1.0,
            1.0,
            vec![Observation::noisy(
                Point::new(0.5, 0.5),
                QuantityKind::Deflection,
                1.0,
            )],
        )
        .unwrap();
        let th = theta(1.0, 0.5, 1.0, &[(QuantityKind::Deflection, 0.01)]);
        let targets = [Target::new(Point::new(1.5, 0.5), QuantityKind::Deflection)];
        assert!(matches!(
            predictive_posterior(&data, &th, 0.3, &targets),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn adding_an_observation_never_increases_variance() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..5 {
            let base_obs: Vec<_> = (0..5)
                .map(|_| {
                    Observation::noisy(
                        Point::new(rng.gen::<f64>(), rng.gen::<f64>()),
                        QuantityKind::Deflection,
                        rng.gen::<f64>(),
                    )
                })
                .collect();
            let extra = Observation::noisy(
                Point::new(rng.gen::<f64>(), rng.gen::<f64>()),
                QuantityKind::Load,
                rng.gen::<f64>(),
            );
            let th = theta(
                1.0,
                0.6,
                1.5,
                &[(QuantityKind::Deflection, 0.02), (QuantityKind::Load, 0.05)],
            );
            let targets: Vec<_> = (0..6)
                .map(|_| {
                    Target::new(
                        Point::new(rng.gen::<f64>(), rng.gen::<f64>()),
                        QuantityKind::CurvatureX,
                    )
                })
                .collect();
            let small = Dataset::new(1.0, 1.0, base_obs.clone()).unwrap();
            let big = small.with_appended(vec![extra]).unwrap();
            let (_, var_small) = predictive_posterior(&small, &th, 0.3, &targets).unwrap();
            let (_, var_big) = predictive_posterior(&big, &th, 0.3, &targets).unwrap();
            for (vs, vb) in var_small.iter().zip(&var_big) {
                assert!(vb <= &(vs + 1e-10), "variance must not grow: {vb} vs {vs}");
            }
        }
    }

    #[test]
    fn moment_prediction_obeys_operator_relation_for_fixed_theta() {
        // Train on w and q only; the predicted moment field must equal
        // D (kappa_x + nu kappa_y) applied to the co-predicted curvature means
        // exactly, because the prediction is linear in the target operator.
        let mut rng = StdRng::seed_from_u64(33);
        let mut obs = Vec::new();
        for _ in 0..8 {
            let p = Point::new(rng.gen::<f64>(), rng.gen::<f64>());
            obs.push(Observation::noisy(p, QuantityKind::Deflection, rng.gen::<f64>() * 0.01));
            obs.push(Observation::noisy(p, QuantityKind::Load, rng.gen::<f64>()));
        }
        let data = Dataset::new(1.0, 1.0, obs).unwrap();
        let d = 1.7;
        let nu = 0.3;
        let th = theta(
            0.01,
            0.4,
            d,
            &[(QuantityKind::Deflection, 1e-6), (QuantityKind::Load, 1e-2)],
        );
        let pts: Vec<Point<f64>> = (0..10)
            .map(|_| Point::new(rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        let make = |q: QuantityKind| -> Vec<Target<f64>> {
            pts.iter().map(|&p| Target::new(p, q)).collect()
        };
        let (m_mx, _) = predictive_posterior(&data, &th, nu, &make(QuantityKind::MomentX)).unwrap();
        let (m_kx, _) = predictive_posterior(&data, &th, nu, &make(QuantityKind::CurvatureX)).unwrap();
        let (m_ky, _) = predictive_posterior(&data, &th, nu, &make(QuantityKind::CurvatureY)).unwrap();
        for i in 0..pts.len() {
            let combo = d * (m_kx[i] + nu * m_ky[i]);
            let scale = m_mx[i].abs().max(1e-9);
            assert!(
                (m_mx[i] - combo).abs() / scale < 1e-6,
                "operator relation violated: {} vs {}",
                m_mx[i],
                combo
            );
        }
    }

    #[test]
    fn single_draw_mixture_equals_fixed_theta_posterior() {
        let mut rng = StdRng::seed_from_u64(8);
        let obs: Vec<_> = (0..5)
            .map(|_| {
                Observation::noisy(
                    Point::new(rng.gen::<f64>(), rng.gen::<f64>()),
                    QuantityKind::Deflection,
                    rng.gen::<f64>() * 0.01,
                )
            })
            .collect();
        let data = Dataset::new(1.0, 1.0, obs).unwrap();
        let th = theta(0.02, 0.5, 1.0, &[(QuantityKind::Deflection, 1e-5)]);
        let trace = McmcTrace::from_parts(
            th.param_names(),
            th.noise_kinds(),
            vec![th.to_natural_vec()],
            vec![0.0],
            1,
            1,
            0,
        )
        .unwrap();
        let targets = [Target::new(Point::new(0.25, 0.75), QuantityKind::Deflection)];
        let summaries = mc_predictive(&data, &trace, 10, 0.3, &targets).unwrap();
        let (mean, var) = predictive_posterior(&data, &th, 0.3, &targets).unwrap();
        assert!((summaries[0].mean - mean[0]).abs() < 1e-12);
        assert!((summaries[0].variance - var[0]).abs() < 1e-12);
        assert!(summaries[0].lower <= summaries[0].mean && summaries[0].mean <= summaries[0].upper);
    }

    #[test]
    fn two_equal_draws_mixture_matches_single_draw_moments() {
        let mut rng = StdRng::seed_from_u64(12);
        let obs: Vec<_> = (0..4)
            .map(|_| {
                Observation::noisy(
                    Point::new(rng.gen::<f64>(), rng.gen::<f64>()),
                    QuantityKind::Deflection,
                    rng.gen::<f64>() * 0.01,
                )
            })
            .collect();
        let data = Dataset::new(1.0, 1.0, obs).unwrap();
        let th = theta(0.02, 0.5, 1.0, &[(QuantityKind::Deflection, 1e-5)]);
        let trace = McmcTrace::from_parts(
            th.param_names(),
            th.noise_kinds(),
            vec![th.to_natural_vec(), th.to_natural_vec()],
            vec![0.0, 0.0],
            1,
            2,
            0,
        )
        .unwrap();
        let targets = [Target::new(Point::new(0.3, 0.7), QuantityKind::CurvatureX)];
        let mix = mc_predictive(&data, &trace, 1, 0.3, &targets).unwrap();
        let (mean, var) = predictive_posterior(&data, &th, 0.3, &targets).unwrap();
        assert!((mix[0].mean - mean[0]).abs() < 1e-13);
        assert!((mix[0].variance - var[0]).abs() < 1e-13);
        // mixture variance never falls below the average per-draw variance
        assert!(mix[0].variance >= var[0] - 1e-15);
    }

    #[test]
    fn equal_component_mixture_collapses() {
        // two identical draws: mixture mean m, variance v
        let means = [3.0f64, 3.0];
        let vars = [0.25f64, 0.25];
        let q_lo = mixture_quantile(&means, &vars, 0.005);
        let q_hi = mixture_quantile(&means, &vars, 0.995);
        // matches single-Gaussian 99% band
        let z = 2.575829303548901;
        assert!((q_lo - (3.0 - 0.5 * z)).abs() < 1e-4);
        assert!((q_hi - (3.0 + 0.5 * z)).abs() < 1e-4);
    }
}
