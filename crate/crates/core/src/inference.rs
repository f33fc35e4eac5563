//! Hyperparameter learning: maximum-likelihood point estimates by nonlinear
//! conjugate gradients, and full posterior sampling by random-walk
//! Metropolis-Hastings in log-parameter space.

use rand::distributions::{Distribution, Standard};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{
    log_marginal_likelihood_with_jitter, lml_gradient_with_policy, ExtendedHyperparams,
    JitterPolicy,
};
use crate::operators::QuantityKind;
use crate::scalar::Scalar;

/// Deterministic stream derivation (SplitMix64). Replication `index` of a run
/// with master seed `master` uses `derived_seed(master, index)`; distinct
/// purposes within one replication use distinct fixed index offsets.
pub fn derived_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Maximum likelihood estimation
// ---------------------------------------------------------------------------

/// Natural-scale box constraints per parameter; a single entry broadcasts to
/// every component. The box doubles as the support of the uniform hyperprior,
/// which makes the constrained likelihood maximizer the MAP estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBounds<S> {
    pairs: Vec<(S, S)>,
}

impl<S: Scalar> ParamBounds<S> {
    pub fn uniform(lo: S, hi: S) -> Self {
        Self {
            pairs: vec![(lo, hi)],
        }
    }

    pub fn per_param(pairs: Vec<(S, S)>) -> Self {
        Self { pairs }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.pairs.len() != 1 && self.pairs.len() != dim {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: format!("expected 1 or {dim} bound pairs, got {}", self.pairs.len()),
            });
        }
        for &(lo, hi) in &self.pairs {
            if !(lo > S::zero()) || !(hi > lo) {
                return Err(Error::InvalidParameter {
                    name: "bounds",
                    reason: "bounds must satisfy 0 < lo < hi".into(),
                });
            }
        }
        Ok(())
    }

    /// Log-space bound vectors of length `dim`.
    fn log_bounds(&self, dim: usize) -> (Vec<S>, Vec<S>) {
        let expand = |f: fn(&(S, S)) -> S| -> Vec<S> {
            if self.pairs.len() == 1 {
                vec![f(&self.pairs[0]); dim]
            } else {
                self.pairs.iter().map(f).collect()
            }
        };
        let lo = expand(|p| p.0.ln());
        let hi = expand(|p| p.1.ln());
        (lo, hi)
    }
}

/// Settings for [`mle_optimize`].
#[derive(Debug, Clone)]
pub struct MleSettings<S> {
    /// Convergence threshold on the infinity norm of the log-space gradient,
    /// scaled by `max(1, |log marginal likelihood|)`.
    pub grad_tol: S,
    pub max_iterations: usize,
    /// Total optimization runs: the initial point plus perturbed restarts.
    pub restarts: usize,
    /// Log-space standard deviation of restart perturbations.
    pub restart_spread: S,
    /// Estimates with rigidity below this natural-scale floor are flagged as
    /// collapsed and out-ranked by clean runs.
    pub rigidity_floor: Option<S>,
    /// Hyperprior support; constraining the maximizer to it yields the MAP
    /// estimate under the flat prior. `None` leaves the search unconstrained.
    pub bounds: Option<ParamBounds<S>>,
    pub seed: u64,
    pub jitter: JitterPolicy<S>,
}

impl<S: Scalar> Default for MleSettings<S> {
    fn default() -> Self {
        Self {
            grad_tol: S::real(1e-4),
            max_iterations: 200,
            restarts: 5,
            restart_spread: S::real(0.5),
            rigidity_floor: None,
            bounds: None,
            seed: 0,
            jitter: JitterPolicy::default(),
        }
    }
}

/// Outcome of a maximum-likelihood run.
#[derive(Debug, Clone)]
pub struct MleResult<S> {
    pub theta: ExtendedHyperparams<S>,
    pub log_marginal: S,
    pub iterations: usize,
    /// Gradient norm fell below tolerance within the iteration budget.
    pub converged: bool,
    /// The dataset contains both rigidity-free and rigidity-carrying blocks;
    /// without both, the rigidity is not identifiable and its estimate is
    /// meaningless.
    pub rigidity_identifiable: bool,
    /// The selected run ended below the configured rigidity floor.
    pub rigidity_collapsed: bool,
}

struct SingleRun<S> {
    log_params: Vec<S>,
    value: S,
    iterations: usize,
    converged: bool,
}

/// Maximizes the log marginal likelihood over log-space hyperparameters with
/// a BFGS quasi-Newton ascent and a backtracking Armijo line search with
/// greedy step expansion.
pub fn mle_optimize<S>(
    data: &Dataset<S>,
    initial: &ExtendedHyperparams<S>,
    poisson_ratio: S,
    settings: &MleSettings<S>,
) -> Result<MleResult<S>>
where
    S: Scalar,
    StandardNormal: Distribution<S>,
{
    let dim = initial.dim();
    let log_box = match &settings.bounds {
        Some(bounds) => {
            bounds.validate(dim)?;
            Some(bounds.log_bounds(dim))
        }
        None => None,
    };
    let inside = |log: &[S]| -> bool {
        match &log_box {
            Some((lo, hi)) => log
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h))| v >= l && v <= h),
            None => true,
        }
    };
    let objective = |log: &[S]| -> Option<S> {
        if !inside(log) {
            return None;
        }
        let theta = initial.from_log_vec(log);
        match log_marginal_likelihood_with_jitter(data, &theta, poisson_ratio, &settings.jitter) {
            Ok((v, _)) if v.is_finite() => Some(v),
            _ => None,
        }
    };
    let gradient = |log: &[S]| -> Option<Vec<S>> {
        let theta = initial.from_log_vec(log);
        lml_gradient_with_policy(data, &theta, poisson_ratio, &settings.jitter)
            .ok()
            .filter(|g| g.iter().all(|v| v.is_finite()))
    };

    let mut start = initial.to_log_vec();
    if let Some((lo, hi)) = &log_box {
        for ((v, &l), &h) in start.iter_mut().zip(lo).zip(hi) {
            *v = (*v).max(l).min(h);
        }
    }
    // The initial point must evaluate cleanly; restarts may fail silently.
    let theta0 = initial.from_log_vec(&start);
    log_marginal_likelihood_with_jitter(data, &theta0, poisson_ratio, &settings.jitter)?;

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut runs: Vec<SingleRun<S>> = Vec::new();
    let total_runs = settings.restarts.max(1);
    for attempt in 0..total_runs {
        let mut point = start.clone();
        if attempt > 0 {
            for v in point.iter_mut() {
                let step: S = StandardNormal.sample(&mut rng);
                *v += settings.restart_spread * step;
            }
            if let Some((lo, hi)) = &log_box {
                for ((v, &l), &h) in point.iter_mut().zip(lo).zip(hi) {
                    *v = (*v).max(l).min(h);
                }
            }
        }
        if let Some(run) = bfgs_ascent(
            &point,
            &objective,
            &gradient,
            log_box.as_ref(),
            settings.grad_tol,
            settings.max_iterations,
        ) {
            runs.push(run);
        }
    }
    if runs.is_empty() {
        // The guaranteed-clean initial point makes this unreachable unless the
        // gradient itself fails there; surface that as a factorization issue.
        return Err(Error::NonFiniteStart);
    }

    let collapsed = |run: &SingleRun<S>| -> bool {
        settings
            .rigidity_floor
            .map(|floor| run.log_params[3].exp() < floor)
            .unwrap_or(false)
    };
    // Clean runs always beat collapsed ones, then higher likelihood wins;
    // among runs reaching the same basin (values within a narrow relative
    // band) a converged one is preferred.
    let best_value = runs
        .iter()
        .filter(|r| !collapsed(r))
        .map(|r| r.value)
        .fold(S::neg_infinity(), S::max);
    let band = S::real(1e-7) * best_value.abs().max(S::one());
    let best = runs
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            let near = |r: &SingleRun<S>| !collapsed(r) && r.value >= best_value - band;
            let key_a = (!collapsed(a), near(a) && a.converged, a.value);
            let key_b = (!collapsed(b), near(b) && b.converged, b.value);
            key_a.partial_cmp(&key_b).unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .unwrap();
    let chosen = &runs[best];

    Ok(MleResult {
        theta: initial.from_log_vec(&chosen.log_params),
        log_marginal: chosen.value,
        iterations: chosen.iterations,
        converged: chosen.converged,
        rigidity_identifiable: data.has_rigidity_information(),
        rigidity_collapsed: collapsed(chosen),
    })
}

fn inf_norm<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |m, &x| m.max(x.abs()))
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn bfgs_ascent<S: Scalar>(
    start: &[S],
    objective: &impl Fn(&[S]) -> Option<S>,
    gradient: &impl Fn(&[S]) -> Option<Vec<S>>,
    log_box: Option<&(Vec<S>, Vec<S>)>,
    grad_tol: S,
    max_iterations: usize,
) -> Option<SingleRun<S>> {
    let dim = start.len();
    let clamp = |point: &mut [S]| {
        if let Some((lo, hi)) = log_box {
            for ((v, &l), &h) in point.iter_mut().zip(lo).zip(hi) {
                *v = (*v).max(l).min(h);
            }
        }
    };
    // Gradient components pushing outward at an active bound cannot be
    // followed; the projected gradient drives both the direction fallback and
    // the convergence test.
    let project = |point: &[S], g: &[S]| -> Vec<S> {
        match log_box {
            Some((lo, hi)) => point
                .iter()
                .zip(lo.iter().zip(hi))
                .zip(g)
                .map(|((&v, (&l, &h)), &gi)| {
                    if (v <= l && gi < S::zero()) || (v >= h && gi > S::zero()) {
                        S::zero()
                    } else {
                        gi
                    }
                })
                .collect(),
            None => g.to_vec(),
        }
    };

    let mut x = start.to_vec();
    clamp(&mut x);
    let mut f = objective(&x)?;
    let mut g = gradient(&x)?;
    // Inverse-Hessian approximation of -f (row-major identity).
    let mut h: Vec<S> = (0..dim * dim)
        .map(|k| if k % (dim + 1) == 0 { S::one() } else { S::zero() })
        .collect();
    let c1 = S::real(1e-4);
    let mut step = S::one() / inf_norm(&g).max(S::one());
    let mut iterations = 0;
    let tol_at = |f: S| grad_tol * f.abs().max(S::one());
    let mut converged = inf_norm(&project(&x, &g)) < tol_at(f);

    while !converged && iterations < max_iterations {
        iterations += 1;
        let g_proj = project(&x, &g);
        // Ascent direction p = H g (H approximates the inverse curvature).
        let mut direction = vec![S::zero(); dim];
        for i in 0..dim {
            let row = &h[i * dim..(i + 1) * dim];
            direction[i] = row.iter().zip(&g_proj).map(|(&a, &b)| a * b).sum();
        }
        let mut slope = dot(&g_proj, &direction);
        if !(slope > S::zero()) {
            // curvature estimate lost ascent property: reset to steepest ascent
            for (k, v) in h.iter_mut().enumerate() {
                *v = if k % (dim + 1) == 0 { S::one() } else { S::zero() };
            }
            direction = g_proj.clone();
            slope = dot(&g_proj, &g_proj);
            if slope == S::zero() {
                converged = true;
                break;
            }
            step = S::one() / inf_norm(&g_proj).max(S::one());
        }
        // Armijo backtracking from twice the previous accepted step, then a
        // greedy doubling phase approximating a line minimum. Trial points
        // are clamped into the box, so motion continues along the free
        // coordinates when a bound is active.
        let trial_at = |t: S| -> Option<(Vec<S>, S)> {
            let mut point: Vec<S> =
                x.iter().zip(&direction).map(|(&xi, &d)| xi + t * d).collect();
            clamp(&mut point);
            objective(&point).map(|ft| (point, ft))
        };
        // Projected Armijo condition: the sufficient-increase threshold uses
        // the gradient against the actual (possibly clamped) displacement.
        let armijo = |point: &[S], ft: S| -> bool {
            let gain: S = point
                .iter()
                .zip(&x)
                .zip(&g_proj)
                .map(|((&p, &xi), &gi)| gi * (p - xi))
                .sum();
            ft >= f + c1 * gain && gain > S::zero()
        };
        let mut t = step * S::real(2.0);
        let mut accepted = None;
        for _ in 0..60 {
            if let Some((point, ft)) = trial_at(t) {
                if armijo(&point, ft) {
                    accepted = Some((point, ft, t));
                    break;
                }
            }
            t = t * S::real(0.5);
        }
        let Some((mut x_new, mut f_new, mut t_used)) = accepted else {
            break;
        };
        for _ in 0..12 {
            let t_next = t_used * S::real(2.0);
            match trial_at(t_next) {
                Some((point, ft)) if ft > f_new => {
                    x_new = point;
                    f_new = ft;
                    t_used = t_next;
                }
                _ => break,
            }
        }
        let g_new = match gradient(&x_new) {
            Some(g) => g,
            None => break,
        };
        // BFGS update of H in minimization convention: with phi = -f the
        // gradient change is y = -(g_new - g) and the step s = x_new - x.
        let s: Vec<S> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<S> = g.iter().zip(&g_new).map(|(&old, &new)| old - new).collect();
        let sy = dot(&s, &y);
        let s_norm = inf_norm(&s);
        let y_norm = inf_norm(&y);
        if sy > S::real(1e-12) * s_norm * y_norm && sy.is_finite() {
            let rho = S::one() / sy;
            // H' = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let mut hy = vec![S::zero(); dim];
            for i in 0..dim {
                hy[i] = h[i * dim..(i + 1) * dim]
                    .iter()
                    .zip(&y)
                    .map(|(&a, &b)| a * b)
                    .sum();
            }
            let yhy = dot(&y, &hy);
            let coeff = (S::one() + rho * yhy) * rho;
            for i in 0..dim {
                for j in 0..dim {
                    let v = h[i * dim + j] - rho * (hy[i] * s[j] + s[i] * hy[j])
                        + coeff * s[i] * s[j];
                    h[i * dim + j] = v;
                }
            }
        }
        x = x_new;
        f = f_new;
        g = g_new;
        step = t_used;
        converged = inf_norm(&project(&x, &g)) < tol_at(f);
    }

    Some(SingleRun {
        log_params: x,
        value: f,
        iterations,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Metropolis-Hastings sampling
// ---------------------------------------------------------------------------

/// Configuration of the Metropolis-Hastings sampler.
#[derive(Debug, Clone)]
pub struct McmcConfig<S> {
    /// Retained sample count.
    pub samples: usize,
    /// Discarded initial iterations.
    pub burn_in: usize,
    /// Diagonal log-space standard deviations of the Gaussian random walk,
    /// one per parameter (a single entry is broadcast).
    pub proposal_sd: Vec<S>,
    pub initial: ExtendedHyperparams<S>,
    pub seed: u64,
    /// Natural-scale uniform hyperprior support.
    pub bounds: ParamBounds<S>,
    /// Pre-run proposal-scale adaptation iterations (0 disables); adaptation
    /// draws are discarded and the scale is frozen afterwards so retained
    /// samples come from a fixed kernel.
    pub adapt_iterations: usize,
    /// Abort when no proposal is accepted within this many consecutive steps
    /// of the main phase (0 disables).
    pub stall_window: usize,
    pub jitter: JitterPolicy<S>,
}

impl<S: Scalar> McmcConfig<S> {
    pub fn new(initial: ExtendedHyperparams<S>, samples: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            samples,
            burn_in,
            proposal_sd: vec![S::real(0.15)],
            initial,
            seed,
            bounds: ParamBounds::uniform(S::real(1e-6), S::real(1e6)),
            adapt_iterations: 1000,
            stall_window: 2000,
            jitter: JitterPolicy::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "sample count must be at least 1".into(),
            });
        }
        if self.proposal_sd.is_empty()
            || self.proposal_sd.iter().any(|&s| !(s > S::zero()) || !s.is_finite())
        {
            return Err(Error::InvalidParameter {
                name: "proposal_sd",
                reason: "proposal standard deviations must be positive".into(),
            });
        }
        self.bounds.validate(self.initial.dim())?;
        Ok(())
    }

    fn expanded_sd(&self, dim: usize) -> Result<Vec<S>> {
        if self.proposal_sd.len() == 1 {
            Ok(vec![self.proposal_sd[0]; dim])
        } else if self.proposal_sd.len() == dim {
            Ok(self.proposal_sd.clone())
        } else {
            Err(Error::InvalidParameter {
                name: "proposal_sd",
                reason: format!(
                    "expected 1 or {dim} proposal standard deviations, got {}",
                    self.proposal_sd.len()
                ),
            })
        }
    }
}

/// Retained draws of the hyperparameter posterior.
#[derive(Debug, Clone)]
pub struct McmcTrace<S> {
    names: Vec<String>,
    noise_kinds: Vec<QuantityKind>,
    draws: Vec<Vec<S>>,
    log_posterior: Vec<S>,
    accepted: usize,
    steps: usize,
    burn_in: usize,
}

impl<S: Scalar> McmcTrace<S> {
    /// Assembles a trace from raw parts (draws on the natural scale); used by
    /// file round-trips and synthetic-trace diagnostics.
    pub fn from_parts(
        names: Vec<String>,
        noise_kinds: Vec<QuantityKind>,
        draws: Vec<Vec<S>>,
        log_posterior: Vec<S>,
        accepted: usize,
        steps: usize,
        burn_in: usize,
    ) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let dim = names.len();
        if draws.iter().any(|d| d.len() != dim) || log_posterior.len() != draws.len() {
            return Err(Error::InvalidParameter {
                name: "draws",
                reason: "draw/name/log-posterior lengths are inconsistent".into(),
            });
        }
        Ok(Self {
            names,
            noise_kinds,
            draws,
            log_posterior,
            accepted,
            steps,
            burn_in,
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn noise_kinds(&self) -> &[QuantityKind] {
        &self.noise_kinds
    }

    /// Natural-scale draw `i`.
    pub fn draw(&self, i: usize) -> &[S] {
        &self.draws[i]
    }

    pub fn log_posterior(&self) -> &[S] {
        &self.log_posterior
    }

    pub fn acceptance_rate(&self) -> S {
        if self.steps == 0 {
            S::zero()
        } else {
            S::count(self.accepted) / S::count(self.steps)
        }
    }

    pub fn accepted(&self) -> usize {
        self.accepted
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Chain iteration index of the first retained draw.
    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    /// Reconstructs hyperparameters from draw `i`; requires the trace to
    /// carry the standard parameter layout.
    pub fn theta_at(&self, i: usize) -> Result<ExtendedHyperparams<S>> {
        let d = &self.draws[i];
        if d.len() != 4 + self.noise_kinds.len() {
            return Err(Error::InvalidParameter {
                name: "trace",
                reason: "trace layout does not match hyperparameter structure".into(),
            });
        }
        let kernel = crate::kernel::KernelParams::new(d[0], d[1], d[2])?;
        let noise: Vec<(QuantityKind, S)> = self
            .noise_kinds
            .iter()
            .zip(&d[4..])
            .map(|(&k, &v)| (k, v))
            .collect();
        ExtendedHyperparams::new(kernel, d[3], &noise)
    }
}

/// Per-parameter posterior mean of the retained draws, on the natural scale.
pub fn mcmc_mean<S: Scalar>(trace: &McmcTrace<S>) -> Result<Vec<S>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let dim = trace.dim();
    let mut mean = vec![S::zero(); dim];
    for draw in &trace.draws {
        for (m, &v) in mean.iter_mut().zip(draw) {
            *m += v;
        }
    }
    let n = S::count(trace.len());
    for m in mean.iter_mut() {
        *m /= n;
    }
    Ok(mean)
}

/// One Metropolis-Hastings segment over a generic log-density. Gaussian
/// random-walk proposals are symmetric, so the acceptance ratio reduces to
/// the posterior ratio; it is evaluated in the log domain.
struct Segment<S> {
    states: Vec<Vec<S>>,
    log_values: Vec<S>,
    accepted: usize,
}

fn run_segment<S, F, R>(
    log_target: &F,
    state: &mut Vec<S>,
    state_value: &mut S,
    proposal_sd: &[S],
    steps: usize,
    rng: &mut R,
    stall_window: usize,
    record: bool,
) -> Result<Segment<S>>
where
    S: Scalar,
    F: Fn(&[S]) -> S,
    R: Rng,
    StandardNormal: Distribution<S>,
    Standard: Distribution<S>,
{
    let mut seg = Segment {
        states: Vec::with_capacity(if record { steps } else { 0 }),
        log_values: Vec::with_capacity(if record { steps } else { 0 }),
        accepted: 0,
    };
    let mut proposal = vec![S::zero(); state.len()];
    let mut since_accept = 0usize;
    for _ in 0..steps {
        for (p, (&s, &sd)) in proposal.iter_mut().zip(state.iter().zip(proposal_sd)) {
            let step: S = StandardNormal.sample(rng);
            *p = s + sd * step;
        }
        let value = log_target(&proposal);
        let uniform: S = rng.gen();
        let accept = value.is_finite() && uniform.ln() <= value - *state_value;
        if accept {
            state.copy_from_slice(&proposal);
            *state_value = value;
            seg.accepted += 1;
            since_accept = 0;
        } else {
            since_accept += 1;
            if stall_window > 0 && since_accept >= stall_window {
                return Err(Error::McmcStalled {
                    window: stall_window,
                });
            }
        }
        if record {
            seg.states.push(state.clone());
            seg.log_values.push(*state_value);
        }
    }
    Ok(seg)
}

/// Random-walk Metropolis-Hastings over an arbitrary log-density, retaining
/// `samples` draws after `burn_in` discarded iterations. The test harness for
/// sampler correctness runs on analytic targets through this entry point.
pub fn sample_log_target<S, F>(
    log_target: F,
    start: &[S],
    proposal_sd: &[S],
    samples: usize,
    burn_in: usize,
    seed: u64,
) -> Result<(Vec<Vec<S>>, Vec<S>, usize)>
where
    S: Scalar,
    F: Fn(&[S]) -> S,
    StandardNormal: Distribution<S>,
    Standard: Distribution<S>,
{
    let start_value = log_target(start);
    if !start_value.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = start.to_vec();
    let mut state_value = start_value;
    let seg = run_segment(
        &log_target,
        &mut state,
        &mut state_value,
        proposal_sd,
        burn_in + samples,
        &mut rng,
        0,
        true,
    )?;
    let states = seg.states[burn_in..].to_vec();
    let values = seg.log_values[burn_in..].to_vec();
    Ok((states, values, seg.accepted))
}

/// Samples the hyperparameter posterior of the plate model.
///
/// The chain moves in log-parameter space under a hyperprior that is uniform
/// on the natural scale inside `cfg.bounds`; the change of variables adds the
/// log-space Jacobian `sum_k log theta_k` to the log posterior.
pub fn mh_sample<S>(
    data: &Dataset<S>,
    cfg: &McmcConfig<S>,
    poisson_ratio: S,
) -> Result<McmcTrace<S>>
where
    S: Scalar,
    StandardNormal: Distribution<S>,
    Standard: Distribution<S>,
{
    cfg.validate()?;
    let dim = cfg.initial.dim();
    let sd = cfg.expanded_sd(dim)?;
    let (lo, hi) = cfg.bounds.log_bounds(dim);

    let log_posterior = |log: &[S]| -> S {
        if log
            .iter()
            .zip(lo.iter().zip(&hi))
            .any(|(&v, (&l, &h))| v < l || v > h)
        {
            return S::neg_infinity();
        }
        let theta = cfg.initial.from_log_vec(log);
        match log_marginal_likelihood_with_jitter(data, &theta, poisson_ratio, &cfg.jitter) {
            Ok((v, _)) if v.is_finite() => v + log.iter().copied().sum::<S>(),
            _ => S::neg_infinity(),
        }
    };

    let mut state = cfg.initial.to_log_vec();
    let mut state_value = log_posterior(&state);
    if !state_value.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Adaptation phase: scale the proposal globally toward a 20-40% acceptance
    // window, then freeze. All adaptation draws are discarded.
    let mut scale = S::one();
    if cfg.adapt_iterations > 0 {
        let window = 100usize;
        let mut remaining = cfg.adapt_iterations;
        while remaining > 0 {
            let steps = remaining.min(window);
            let scaled: Vec<S> = sd.iter().map(|&s| s * scale).collect();
            let seg = run_segment(
                &log_posterior,
                &mut state,
                &mut state_value,
                &scaled,
                steps,
                &mut rng,
                0,
                false,
            )?;
            let rate = S::count(seg.accepted) / S::count(steps);
            if rate < S::real(0.2) {
                scale = scale * S::real(0.8);
            } else if rate > S::real(0.4) {
                scale = scale * S::real(1.25);
            }
            remaining -= steps;
        }
    }

    let scaled: Vec<S> = sd.iter().map(|&s| s * scale).collect();
    let seg = run_segment(
        &log_posterior,
        &mut state,
        &mut state_value,
        &scaled,
        cfg.burn_in + cfg.samples,
        &mut rng,
        cfg.stall_window,
        true,
    )?;

    let draws: Vec<Vec<S>> = seg.states[cfg.burn_in..]
        .iter()
        .map(|log| log.iter().map(|&v| v.exp()).collect())
        .collect();
    let log_values = seg.log_values[cfg.burn_in..].to_vec();
    McmcTrace::from_parts(
        cfg.initial.param_names(),
        cfg.initial.noise_kinds(),
        draws,
        log_values,
        seg.accepted,
        cfg.burn_in + cfg.samples,
        cfg.burn_in,
    )
}

// ---------------------------------------------------------------------------
// Chain diagnostics
// ---------------------------------------------------------------------------

/// Fixed-width histogram of one parameter's retained draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<S> {
    pub lo: S,
    pub hi: S,
    pub counts: Vec<usize>,
}

/// Summary statistics of a trace.
#[derive(Debug, Clone)]
pub struct ChainDiagnostics<S> {
    pub acceptance_rate: S,
    pub histograms: Vec<Histogram<S>>,
    /// Pearson correlation coefficients between parameter pairs; entries
    /// involving a degenerate (constant) parameter are reported as zero.
    pub correlations: Vec<Vec<S>>,
    /// Per-parameter degeneracy flags (zero sample variance).
    pub degenerate: Vec<bool>,
}

/// Deterministic acceptance, histogram and correlation summary of a trace.
pub fn chain_diagnostics<S: Scalar>(trace: &McmcTrace<S>, bins: usize) -> Result<ChainDiagnostics<S>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let bins = bins.max(1);
    let dim = trace.dim();
    let n = trace.len();
    let nf = S::count(n);

    let mut means = vec![S::zero(); dim];
    for draw in &trace.draws {
        for (m, &v) in means.iter_mut().zip(draw) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= nf;
    }
    let mut variances = vec![S::zero(); dim];
    for draw in &trace.draws {
        for ((var, &m), &v) in variances.iter_mut().zip(&means).zip(draw) {
            let d = v - m;
            *var += d * d;
        }
    }
    for v in variances.iter_mut() {
        *v /= nf;
    }
    let degenerate: Vec<bool> = variances.iter().map(|&v| v == S::zero()).collect();

    let mut histograms = Vec::with_capacity(dim);
    for p in 0..dim {
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        for draw in &trace.draws {
            lo = lo.min(draw[p]);
            hi = hi.max(draw[p]);
        }
        let mut counts = vec![0usize; bins];
        let width = hi - lo;
        for draw in &trace.draws {
            let idx = if width > S::zero() {
                let frac = (draw[p] - lo) / width;
                (frac * S::count(bins))
                    .to_usize()
                    .unwrap_or(0)
                    .min(bins - 1)
            } else {
                0
            };
            counts[idx] += 1;
        }
        histograms.push(Histogram { lo, hi, counts });
    }

    let mut correlations = vec![vec![S::zero(); dim]; dim];
    for a in 0..dim {
        for b in a..dim {
            let value = if degenerate[a] || degenerate[b] {
                S::zero()
            } else {
                let mut cov = S::zero();
                for draw in &trace.draws {
                    cov += (draw[a] - means[a]) * (draw[b] - means[b]);
                }
                cov / nf / (variances[a] * variances[b]).sqrt()
            };
            correlations[a][b] = value;
            correlations[b][a] = value;
        }
    }

    Ok(ChainDiagnostics {
        acceptance_rate: trace.acceptance_rate(),
        histograms,
        correlations,
        degenerate,
    })
}
