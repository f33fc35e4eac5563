//! Block covariance assembly over heterogeneous observations, the Gaussian
//! noise model, and the log marginal likelihood with its hyperparameter
//! gradient.

use std::fmt;

use crate::data::{Dataset, NoiseClass};
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::linalg::{cholesky, CholeskyFactor, Matrix};
use crate::operators::{operator_for, PairEvaluator, PlateConstants, QuantityKind, ResolvedOperator};
use crate::scalar::Scalar;

/// Extended hyperparameters: kernel amplitude and length scales, flexural
/// rigidity, and one noise variance per observed noisy quantity. All entries
/// are stored in log space, which enforces positivity and makes optimization
/// and proposal moves unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedHyperparams<S> {
    log_amplitude: S,
    log_length_x: S,
    log_length_y: S,
    log_rigidity: S,
    log_noise: Vec<(QuantityKind, S)>,
}

impl<S: Scalar> ExtendedHyperparams<S> {
    /// Builds from natural-scale values.
    pub fn new(kernel: KernelParams<S>, rigidity: S, noise_variances: &[(QuantityKind, S)]) -> Result<Self> {
        if !(rigidity > S::zero()) || !rigidity.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rigidity",
                reason: format!("must be positive and finite, got {rigidity}"),
            });
        }
        let mut log_noise = Vec::with_capacity(noise_variances.len());
        for &(kind, v) in noise_variances {
            if !(v > S::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "noise_variance",
                    reason: format!("variance for {kind} must be positive and finite, got {v}"),
                });
            }
            if log_noise.iter().any(|&(k, _)| k == kind) {
                return Err(Error::InvalidParameter {
                    name: "noise_variance",
                    reason: format!("duplicate variance entry for {kind}"),
                });
            }
            log_noise.push((kind, v.ln()));
        }
        log_noise.sort_by_key(|&(k, _)| k.block_rank());
        Ok(Self {
            log_amplitude: kernel.amplitude.ln(),
            log_length_x: kernel.length_x.ln(),
            log_length_y: kernel.length_y.ln(),
            log_rigidity: rigidity.ln(),
            log_noise,
        })
    }

    pub fn kernel_params(&self) -> KernelParams<S> {
        KernelParams {
            amplitude: self.log_amplitude.exp(),
            length_x: self.log_length_x.exp(),
            length_y: self.log_length_y.exp(),
        }
    }

    pub fn rigidity(&self) -> S {
        self.log_rigidity.exp()
    }

    pub fn noise_variance(&self, kind: QuantityKind) -> Option<S> {
        self.log_noise
            .iter()
            .find(|&&(k, _)| k == kind)
            .map(|&(_, lv)| lv.exp())
    }

    /// Quantities with a noise-variance entry, in block order.
    pub fn noise_kinds(&self) -> Vec<QuantityKind> {
        self.log_noise.iter().map(|&(k, _)| k).collect()
    }

    /// Number of scalar parameters.
    pub fn dim(&self) -> usize {
        4 + self.log_noise.len()
    }

    /// Log-space parameter vector `(log A, log l_x, log l_y, log D, log sigma^2 ...)`.
    pub fn to_log_vec(&self) -> Vec<S> {
        let mut v = vec![
            self.log_amplitude,
            self.log_length_x,
            self.log_length_y,
            self.log_rigidity,
        ];
        v.extend(self.log_noise.iter().map(|&(_, lv)| lv));
        v
    }

    /// Rebuilds from a log-space vector with this value's noise layout.
    pub fn from_log_vec(&self, log: &[S]) -> Self {
        debug_assert_eq!(log.len(), self.dim());
        Self {
            log_amplitude: log[0],
            log_length_x: log[1],
            log_length_y: log[2],
            log_rigidity: log[3],
            log_noise: self
                .log_noise
                .iter()
                .zip(&log[4..])
                .map(|(&(k, _), &lv)| (k, lv))
                .collect(),
        }
    }

    /// Natural-scale parameter vector in the same layout as [`Self::to_log_vec`].
    pub fn to_natural_vec(&self) -> Vec<S> {
        self.to_log_vec().iter().map(|&v| v.exp()).collect()
    }

    /// Column names matching the parameter vector layout.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = vec![
            "A".to_string(),
            "l_x".to_string(),
            "l_y".to_string(),
            "D".to_string(),
        ];
        names.extend(
            self.log_noise
                .iter()
                .map(|&(k, _)| format!("sigma2_{}", k.label())),
        );
        names
    }
}

impl<S: Scalar> fmt::Display for ExtendedHyperparams<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kp = self.kernel_params();
        write!(
            f,
            "A={:.6e}, l_x={:.6e}, l_y={:.6e}, D={:.6e}",
            kp.amplitude.to_f64_lossy(),
            kp.length_x.to_f64_lossy(),
            kp.length_y.to_f64_lossy(),
            self.rigidity().to_f64_lossy()
        )?;
        for &(k, lv) in &self.log_noise {
            write!(f, ", sigma2_{}={:.6e}", k.label(), lv.exp().to_f64_lossy())?;
        }
        Ok(())
    }
}

/// Jitter escalation schedule for the covariance diagonal: start small,
/// multiply on factorization failure, stop at the cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterPolicy<S> {
    pub initial: S,
    pub growth: S,
    pub max: S,
}

impl<S: Scalar> Default for JitterPolicy<S> {
    fn default() -> Self {
        Self {
            initial: S::real(1e-12),
            growth: S::real(10.0),
            max: S::real(1e-5),
        }
    }
}

/// Assembled noise description: the diagonal of `E` plus the jitter actually
/// accepted by the factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<S> {
    pub diagonal: Vec<S>,
    pub jitter: S,
}

/// Resolved operators for the quantities present in a dataset, indexed by
/// block rank.
fn resolve_operators<S: Scalar>(data: &Dataset<S>, nu: S) -> Vec<Option<ResolvedOperator<S>>> {
    let mut ops: Vec<Option<ResolvedOperator<S>>> = vec![None; QuantityKind::ALL.len()];
    for kind in data.quantities() {
        ops[kind.block_rank()] = Some(operator_for::<S>(kind).resolve(nu));
    }
    ops
}

/// Assembles the joint covariance matrix `K` over all observations. The upper
/// triangle is computed and mirrored, so the result is exactly symmetric.
pub fn assemble_covariance<S: Scalar>(
    data: &Dataset<S>,
    theta: &ExtendedHyperparams<S>,
    poisson_ratio: S,
) -> Result<Matrix<S>> {
    let constants = PlateConstants::new(theta.rigidity(), poisson_ratio)?;
    let params = theta.kernel_params();
    let ops = resolve_operators(data, poisson_ratio);
    let obs = data.observations();
    let n = obs.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        let op_i = ops[obs[i].quantity.block_rank()].as_ref().unwrap();
        for j in i..n {
            let op_j = ops[obs[j].quantity.block_rank()].as_ref().unwrap();
            let eval = PairEvaluator::new(obs[i].location, obs[j].location, &params, constants.rigidity);
            let v = eval.value(op_i, op_j);
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    Ok(k)
}

/// As [`assemble_covariance`], also returning the entry-wise derivatives of
/// `K` with respect to the two length scales.
fn assemble_covariance_with_grads<S: Scalar>(
    data: &Dataset<S>,
    theta: &ExtendedHyperparams<S>,
    poisson_ratio: S,
) -> Result<(Matrix<S>, Matrix<S>, Matrix<S>)> {
    let constants = PlateConstants::new(theta.rigidity(), poisson_ratio)?;
    let params = theta.kernel_params();
    let ops = resolve_operators(data, poisson_ratio);
    let obs = data.observations();
    let n = obs.len();
    let mut k = Matrix::zeros(n, n);
    let mut dlx = Matrix::zeros(n, n);
    let mut dly = Matrix::zeros(n, n);
    for i in 0..n {
        let op_i = ops[obs[i].quantity.block_rank()].as_ref().unwrap();
        for j in i..n {
            let op_j = ops[obs[j].quantity.block_rank()].as_ref().unwrap();
            let eval = PairEvaluator::new(obs[i].location, obs[j].location, &params, constants.rigidity);
            let e = eval.value_with_grads(op_i, op_j);
            k.set(i, j, e.value);
            k.set(j, i, e.value);
            dlx.set(i, j, e.d_length_x);
            dlx.set(j, i, e.d_length_x);
            dly.set(i, j, e.d_length_y);
            dly.set(j, i, e.d_length_y);
        }
    }
    Ok((k, dlx, dly))
}

/// Assembles the diagonal of the measurement-noise matrix `E`: the quantity's
/// variance for noisy rows, exactly zero for noiseless boundary rows.
pub fn assemble_noise<S: Scalar>(
    data: &Dataset<S>,
    theta: &ExtendedHyperparams<S>,
) -> Result<Vec<S>> {
    data.observations()
        .iter()
        .map(|obs| match obs.noise_class {
            NoiseClass::NoiselessBoundary => Ok(S::zero()),
            NoiseClass::Noisy => theta.noise_variance(obs.quantity).ok_or(
                Error::MissingNoiseVariance {
                    quantity: obs.quantity.label(),
                },
            ),
        })
        .collect()
}

/// A factorized `K + E + eps I` system.
pub struct FactorizedSystem<S> {
    pub factor: CholeskyFactor<S>,
    pub covariance: Matrix<S>,
    pub noise: NoiseModel<S>,
}

/// Adds `E` and escalating jitter to `K` until the Cholesky factorization
/// succeeds; fails once the jitter cap is exceeded.
pub(crate) fn factor_with_jitter<S: Scalar>(
    k: &Matrix<S>,
    noise_diagonal: &[S],
    policy: &JitterPolicy<S>,
    theta_desc: impl Fn() -> String,
) -> Result<(CholeskyFactor<S>, S)> {
    let n = k.rows();
    let mut jitter = policy.initial;
    loop {
        let mut m = k.clone();
        for i in 0..n {
            let v = m.get(i, i) + noise_diagonal[i] + jitter;
            m.set(i, i, v);
        }
        if let Some(factor) = cholesky(&m) {
            return Ok((factor, jitter));
        }
        let next = jitter * policy.growth;
        if next > policy.max {
            return Err(Error::Factorization {
                jitter: jitter.to_f64_lossy(),
                theta: theta_desc(),
            });
        }
        jitter = next;
    }
}

/// Factorizes the full observation system for the given hyperparameters.
pub fn factor_system<S: Scalar>(
    data: &Dataset<S>,
    theta: &ExtendedHyperparams<S>,
    poisson_ratio: S,
    policy: &JitterPolicy<S>,
) -> Result<FactorizedSystem<S>> {
    let k = assemble_covariance(data, theta, poisson_ratio)?;
    let noise_diagonal = assemble_noise(data, theta)?;
    let (factor, jitter) = factor_with_jitter(&k, &noise_diagonal, policy, || theta.to_string())?;
    Ok(FactorizedSystem {
        factor,
        covariance: k,
        noise: NoiseModel {
            diagonal: noise_diagonal,
            jitter,
        },
    })
}

/// Log marginal likelihood
/// `-(1/2) z^T (K+E)^{-1} z - (1/2) log |K+E| - (N/2) log 2 pi`.
pub fn log_marginal_likelihood<S: Scalar>(
    data: &Dataset<S>,
    theta: &ExtendedHyperparams<S>,
    poisson_ratio: S,
) -> Result<S> {
    log_marginal_likelihood_with_jitter(data, theta, poisson_ratio, &JitterPolicy::default())
        .map(|(v, _)| v)
}

/// As [`log_marginal_likelihood`], also reporting the jitter used.
pub fn log_marginal_likelihood_with_jitter<S: Scalar>(
    data: &Dataset<S>,
    theta: &ExtendedHyperparams<S>,
    poisson_ratio: S,
    policy: &JitterPolicy<S>,
) -> Result<(S, S)> {
    let sys = factor_system(data, theta, poisson_ratio, policy)?;
    let z = data.values();
    let alpha = sys.factor.solve(&z);
    let quad: S = z.iter().zip(&alpha).map(|(&a, &b)| a * b).sum();
    let half = S::real(0.5);
    let n = S::count(data.len());
    let two_pi = S::real(2.0) * S::PI();
    let value = -half * quad - half * sys.factor.log_det() - half * n * two_pi.ln();
    Ok((value, sys.noise.jitter))
}

/// Gradient of the log marginal likelihood with respect to every log-space
/// component of the extended hyperparameters, in `to_log_vec` order.
///
/// Uses `1/2 tr((r r^T - (K+E)^{-1}) dK/dtheta)` with `r = (K+E)^{-1} z`; the
/// amplitude and rigidity derivatives reuse `K` itself (blocks scale as
/// monomials in `A^2` and `D`), the length-scale derivatives come from the
/// kernel algebra, and noise derivatives are indicator diagonals.
pub fn lml_gradient<S: Scalar>(
    data: &Dataset<S>,
    theta: &ExtendedHyperparams<S>,
    poisson_ratio: S,
) -> Result<Vec<S>> {
    lml_gradient_with_policy(data, theta, poisson_ratio, &JitterPolicy::default())
}

pub fn lml_gradient_with_policy<S: Scalar>(
    data: &Dataset<S>,
    theta: &ExtendedHyperparams<S>,
    poisson_ratio: S,
    policy: &JitterPolicy<S>,
) -> Result<Vec<S>> {
    let (k, dlx, dly) = assemble_covariance_with_grads(data, theta, poisson_ratio)?;
    let noise_diagonal = assemble_noise(data, theta)?;
    let (factor, _) = factor_with_jitter(&k, &noise_diagonal, policy, || theta.to_string())?;

    let z = data.values();
    let alpha = factor.solve(&z);
    let inv = factor.inverse();
    let n = data.len();
    // m = alpha alpha^T - (K+E)^{-1}
    let m = Matrix::from_fn(n, n, |i, j| alpha[i] * alpha[j] - inv.get(i, j));

    let half = S::real(0.5);
    let params = theta.kernel_params();
    let obs = data.observations();

    // d/d log A: d(K+E)/dlogA = 2K.
    let g_log_a = m.frobenius_dot(&k);
    // d/d log l: chain rule multiplies the natural gradient by l.
    let g_log_lx = half * params.length_x * m.frobenius_dot(&dlx);
    let g_log_ly = half * params.length_y * m.frobenius_dot(&dly);
    // d/d log D: entry (i, j) of dK/dlogD is (p_i + p_j) K_ij.
    let mut g_log_d = S::zero();
    for i in 0..n {
        let pi = obs[i].quantity.rigidity_power();
        for j in 0..n {
            let p = pi + obs[j].quantity.rigidity_power();
            if p > 0 {
                g_log_d += S::count(p) * m.get(i, j) * k.get(i, j);
            }
        }
    }
    g_log_d = half * g_log_d;

    let mut grad = vec![g_log_a, g_log_lx, g_log_ly, g_log_d];
    // d/d log sigma^2_q: indicator diagonal over the quantity's noisy rows.
    for kind in theta.noise_kinds() {
        let variance = theta.noise_variance(kind).unwrap();
        let mut acc = S::zero();
        for (i, o) in obs.iter().enumerate() {
            if o.quantity == kind && o.noise_class == NoiseClass::Noisy {
                acc += m.get(i, i);
            }
        }
        grad.push(half * variance * acc);
    }
    Ok(grad)
}
