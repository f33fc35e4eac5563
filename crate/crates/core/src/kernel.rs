//! Squared-exponential ARD base kernel and closed-form mixed partial
//! derivatives up to order eight per axis.
//!
//! The base kernel factorizes as `A^2 * g(tau_x; l_x) * g(tau_y; l_y)` with
//! `g(tau; l) = exp(-tau^2 / 2 l^2)`, so every mixed partial reduces to
//! products of 1-D Gaussian derivatives
//!
//! ```text
//! d^n/dtau^n g = (-1)^n l^-n He_n(tau / l) g,
//! ```
//!
//! with `He_n` the probabilists' Hermite polynomial obeying
//! `He_{n+1}(u) = u He_n(u) - n He_{n-1}(u)`. Derivatives with respect to the
//! second kernel argument pick up one minus sign per order.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Scalar;

/// Highest derivative order supported per axis. Products of two fourth-order
/// operators reach order eight; nothing in plate theory exceeds it.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

/// Hyperparameters of the squared-exponential ARD kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams<S> {
    pub amplitude: S,
    pub length_x: S,
    pub length_y: S,
}

impl<S: Scalar> KernelParams<S> {
    pub fn new(amplitude: S, length_x: S, length_y: S) -> Result<Self> {
        for (name, v) in [
            ("amplitude", amplitude),
            ("length_x", length_x),
            ("length_y", length_y),
        ] {
            if !(v > S::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        Ok(Self {
            amplitude,
            length_x,
            length_y,
        })
    }
}

/// Mixed partial derivative orders: `n_*` act on the first argument, `m_*`
/// on the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivativeOrder {
    pub n_x: usize,
    pub n_y: usize,
    pub m_x: usize,
    pub m_y: usize,
}

impl DerivativeOrder {
    pub fn new(n_x: usize, n_y: usize, m_x: usize, m_y: usize) -> Result<Self> {
        let order = Self { n_x, n_y, m_x, m_y };
        let (tx, ty) = (order.total_x(), order.total_y());
        if tx > MAX_DERIVATIVE_ORDER || ty > MAX_DERIVATIVE_ORDER {
            return Err(Error::DerivativeOrder {
                requested: tx.max(ty),
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        Ok(order)
    }

    /// Combined x-order along the stationary offset.
    pub fn total_x(&self) -> usize {
        self.n_x + self.m_x
    }

    /// Combined y-order along the stationary offset.
    pub fn total_y(&self) -> usize {
        self.n_y + self.m_y
    }

    /// Sign picked up by derivatives with respect to the second argument.
    fn primed_sign<S: Scalar>(&self) -> S {
        if (self.m_x + self.m_y) % 2 == 0 {
            S::one()
        } else {
            -S::one()
        }
    }
}

/// A function of the form `l^k p(u) exp(-u^2/2)` with `u = tau / l`.
///
/// The family is closed under differentiation with respect to both the
/// offset `tau` and the length scale `l`, which is what makes every plate
/// cross-covariance and its hyperparameter gradient expressible in closed
/// form.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGaussian<S> {
    /// Polynomial coefficients in `u`, ascending powers.
    coeffs: Vec<S>,
    /// Power of the length scale in the prefactor.
    length_power: i32,
    /// Length scale.
    length: S,
}

impl<S: Scalar> PolyGaussian<S> {
    /// The plain Gaussian `exp(-tau^2 / 2 l^2)`.
    pub fn gaussian(length: S) -> Result<Self> {
        if !(length > S::zero()) || !length.is_finite() {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: format!("must be positive and finite, got {length}"),
            });
        }
        Ok(Self {
            coeffs: vec![S::one()],
            length_power: 0,
            length,
        })
    }

    /// Derivative with respect to the offset `tau`:
    /// `p -> p' - u p`, length power drops by one.
    pub fn derivative_tau(&self) -> Self {
        let n = self.coeffs.len();
        // p'(u) - u p(u) has degree deg(p) + 1.
        let mut coeffs = vec![S::zero(); n + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i + 1 < n {
                coeffs[i] += S::count(i + 1) * self.coeffs[i + 1];
            }
            coeffs[i + 1] -= c;
        }
        Self {
            coeffs,
            length_power: self.length_power - 1,
            length: self.length,
        }
    }

    /// Derivative with respect to the length scale `l`:
    /// `p -> k p - u p' + u^2 p`, length power drops by one.
    pub fn derivative_length(&self) -> Self {
        let n = self.coeffs.len();
        let k = S::real(self.length_power as f64);
        let mut coeffs = vec![S::zero(); n + 2];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += k * c;
            if i >= 1 {
                coeffs[i] -= S::count(i) * c;
            }
            coeffs[i + 2] += c;
        }
        Self {
            coeffs,
            length_power: self.length_power - 1,
            length: self.length,
        }
    }

    /// Evaluate at offset `tau`.
    pub fn eval(&self, tau: S) -> S {
        let u = tau / self.length;
        let mut p = S::zero();
        for &c in self.coeffs.iter().rev() {
            p = p * u + c;
        }
        let prefactor = self.length.powi(self.length_power);
        prefactor * p * (-u * u / S::real(2.0)).exp()
    }

    /// Polynomial value at `u = 0`; the Gaussian factor is one there, so the
    /// function value at `tau = 0` is `l^k` times this.
    pub fn poly_at_zero(&self) -> S {
        self.coeffs[0]
    }

    pub fn length_power(&self) -> i32 {
        self.length_power
    }
}

/// All 1-D Gaussian derivatives `d^n/dtau^n exp(-tau^2/2l^2)` for
/// `n = 0 ..= 8` at one offset, by Hermite recursion.
#[derive(Debug, Clone)]
pub(crate) struct GaussDerivTable<S> {
    pub values: [S; MAX_DERIVATIVE_ORDER + 1],
}

/// As [`GaussDerivTable`], plus the length-scale derivative of each entry.
#[derive(Debug, Clone)]
pub(crate) struct GaussDerivGradTable<S> {
    pub values: [S; MAX_DERIVATIVE_ORDER + 1],
    pub length_grads: [S; MAX_DERIVATIVE_ORDER + 1],
}

fn hermite_row<S: Scalar>(u: S) -> [S; MAX_DERIVATIVE_ORDER + 1] {
    let mut he = [S::zero(); MAX_DERIVATIVE_ORDER + 1];
    he[0] = S::one();
    he[1] = u;
    for n in 1..MAX_DERIVATIVE_ORDER {
        he[n + 1] = u * he[n] - S::count(n) * he[n - 1];
    }
    he
}

impl<S: Scalar> GaussDerivTable<S> {
    pub fn new(tau: S, length: S) -> Self {
        let u = tau / length;
        let envelope = (-u * u / S::real(2.0)).exp();
        let he = hermite_row(u);
        let inv_l = length.recip();
        let mut values = [S::zero(); MAX_DERIVATIVE_ORDER + 1];
        let mut scale = envelope;
        for n in 0..=MAX_DERIVATIVE_ORDER {
            // scale = (-1)^n l^-n * envelope at this n
            values[n] = scale * he[n];
            scale = -scale * inv_l;
        }
        Self { values }
    }
}

impl<S: Scalar> GaussDerivGradTable<S> {
    pub fn new(tau: S, length: S) -> Self {
        let u = tau / length;
        let envelope = (-u * u / S::real(2.0)).exp();
        let he = hermite_row(u);
        let inv_l = length.recip();
        let u_sq = u * u;
        let mut values = [S::zero(); MAX_DERIVATIVE_ORDER + 1];
        let mut length_grads = [S::zero(); MAX_DERIVATIVE_ORDER + 1];
        let mut scale = envelope;
        for n in 0..=MAX_DERIVATIVE_ORDER {
            values[n] = scale * he[n];
            // d/dl [(-1)^n l^-n He_n(u) e] =
            //   (-1)^n l^-(n+1) e [(u^2 - n) He_n(u) - n u He_{n-1}(u)]
            let nf = S::count(n);
            let mut bracket = (u_sq - nf) * he[n];
            if n > 0 {
                bracket = bracket - nf * u * he[n - 1];
            }
            length_grads[n] = scale * inv_l * bracket;
            scale = -scale * inv_l;
        }
        Self {
            values,
            length_grads,
        }
    }
}

/// The squared-exponential ARD kernel of the deflection field.
pub fn base_kernel<S: Scalar>(x: Point<S>, x_prime: Point<S>, params: &KernelParams<S>) -> S {
    let ux = (x.x - x_prime.x) / params.length_x;
    let uy = (x.y - x_prime.y) / params.length_y;
    let half = S::real(0.5);
    params.amplitude * params.amplitude * (-half * ux * ux - half * uy * uy).exp()
}

/// `d^n/dtau^n exp(-tau^2 / 2 l^2)` in closed form.
pub fn gaussian_derivative_1d<S: Scalar>(order: usize, tau: S, length: S) -> Result<S> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::DerivativeOrder {
            requested: order,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    if !(length > S::zero()) || !length.is_finite() {
        return Err(Error::InvalidParameter {
            name: "length",
            reason: format!("must be positive and finite, got {length}"),
        });
    }
    Ok(GaussDerivTable::new(tau, length).values[order])
}

/// Mixed partial of the base kernel,
/// `d^(n_x+n_y)/dx dy d^(m_x+m_y)/dx' dy' k_ww(x, x')`.
///
/// By stationarity each derivative with respect to the second argument equals
/// minus a derivative in the offset, and by separability the result is
/// `A^2 (-1)^(m_x+m_y) G_(n_x+m_x)(tau_x; l_x) G_(n_y+m_y)(tau_y; l_y)`.
pub fn mixed_partial<S: Scalar>(
    order: DerivativeOrder,
    x: Point<S>,
    x_prime: Point<S>,
    params: &KernelParams<S>,
) -> S {
    let gx = GaussDerivTable::new(x.x - x_prime.x, params.length_x);
    let gy = GaussDerivTable::new(x.y - x_prime.y, params.length_y);
    let a2 = params.amplitude * params.amplitude;
    a2 * order.primed_sign::<S>() * gx.values[order.total_x()] * gy.values[order.total_y()]
}

/// Value and gradient of a mixed partial with respect to `(A, l_x, l_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamGradient<S> {
    pub value: S,
    pub d_amplitude: S,
    pub d_length_x: S,
    pub d_length_y: S,
}

/// Analytic hyperparameter gradient of [`mixed_partial`].
pub fn mixed_partial_param_gradient<S: Scalar>(
    order: DerivativeOrder,
    x: Point<S>,
    x_prime: Point<S>,
    params: &KernelParams<S>,
) -> ParamGradient<S> {
    let gx = GaussDerivGradTable::new(x.x - x_prime.x, params.length_x);
    let gy = GaussDerivGradTable::new(x.y - x_prime.y, params.length_y);
    let a2 = params.amplitude * params.amplitude;
    let sign = order.primed_sign::<S>();
    let (tx, ty) = (order.total_x(), order.total_y());
    let value = a2 * sign * gx.values[tx] * gy.values[ty];
    ParamGradient {
        value,
        d_amplitude: S::real(2.0) * value / params.amplitude,
        d_length_x: a2 * sign * gx.length_grads[tx] * gy.values[ty],
        d_length_y: a2 * sign * gx.values[tx] * gy.length_grads[ty],
    }
}
