//! Analytic ground-truth generators: the single-mode sine solution for the
//! simply supported plate under sinusoidal load, and the double-cosine Ritz
//! solution for the clamped plate under uniform load.

use crate::error::{Error, Result};
use crate::geometry::{PlateGeometry, Point};
use crate::linalg::{cholesky, Matrix};
use crate::operators::{operator_for, QuantityKind};
use crate::scalar::Scalar;

/// Applied load description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadSpec<S> {
    /// `q0 sin(pi x / a) sin(pi y / b)` over a simply supported plate.
    Sinusoidal { amplitude: S },
    /// Constant `q0` over a clamped plate.
    Uniform { amplitude: S },
}

impl<S: Scalar> LoadSpec<S> {
    pub fn amplitude(&self) -> S {
        match *self {
            LoadSpec::Sinusoidal { amplitude } | LoadSpec::Uniform { amplitude } => amplitude,
        }
    }
}

/// Edge support type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportKind {
    SimplySupported,
    Fixed,
}

/// `d^k/dt^k sin(t)` evaluated without accumulating phase offsets, so exact
/// zeros of the trigonometric factors stay exact.
fn sin_derivative<S: Scalar>(t: S, k: usize) -> S {
    match k % 4 {
        0 => t.sin(),
        1 => t.cos(),
        2 => -t.sin(),
        _ => -t.cos(),
    }
}

/// `d^k/dt^k cos(t)`.
fn cos_derivative<S: Scalar>(t: S, k: usize) -> S {
    match k % 4 {
        0 => t.cos(),
        1 => -t.sin(),
        2 => -t.cos(),
        _ => t.sin(),
    }
}

/// Any of the twelve plate quantities for the simply supported plate under
/// the sinusoidal load `q0 sin(pi x/a) sin(pi y/b)`.
///
/// The deflection is the single-mode field
/// `w = q0 / (pi^4 D (1/a^2 + 1/b^2)^2) sin(pi x/a) sin(pi y/b)`; the squared
/// sum in the denominator is forced by substituting `w` into the plate
/// equation `D grad^4 w = q`, which the test suite checks as an identity.
/// Every other quantity applies the corresponding plate operator to `w`
/// analytically.
pub fn navier_field<S: Scalar>(
    geom: &PlateGeometry<S>,
    amplitude: S,
    kind: QuantityKind,
    point: Point<S>,
) -> S {
    let alpha = S::PI() / geom.span_x;
    let beta = S::PI() / geom.span_y;
    let pi4 = S::PI().powi(4);
    let inv_sq = geom.span_x.powi(-2) + geom.span_y.powi(-2);
    let w_amp = amplitude / (pi4 * geom.rigidity * inv_sq * inv_sq);

    let op = operator_for::<S>(kind).resolve(geom.poisson_ratio);
    let mut value = S::zero();
    for term in &op.terms {
        let d_scale = geom.rigidity.powi(term.rigidity_power as i32);
        let fx = alpha.powi(term.order_x as i32) * sin_derivative(alpha * point.x, term.order_x);
        let fy = beta.powi(term.order_y as i32) * sin_derivative(beta * point.y, term.order_y);
        value += term.coeff * d_scale * fx * fy;
    }
    w_amp * value
}

/// Double-cosine Ritz solution for the clamped plate under uniform load:
/// `w = sum_mn (1 - cos(2 m pi x / a)) (1 - cos(2 n pi y / b)) w_mn`.
#[derive(Debug, Clone)]
pub struct RitzSolution<S> {
    geometry: PlateGeometry<S>,
    amplitude: S,
    modes_x: usize,
    modes_y: usize,
    /// Row-major coefficients `w_mn`, m = 1..=modes_x outer, n = 1..=modes_y inner.
    coeffs: Vec<S>,
}

/// Minimizes the clamped-plate bending energy `D/2 (grad^2 w)^2 - q w` over
/// the double-cosine basis.
///
/// Cosine orthogonality couples coefficients only within shared row or
/// column indices, so the stiffness matrix splits into a positive diagonal
/// plus one rank-one block per row index and per column index; the linear
/// system is solved exactly through the Woodbury identity with a dense
/// factorization of the small capacity matrix.
pub fn ritz_solve<S: Scalar>(
    geom: &PlateGeometry<S>,
    amplitude: S,
    modes_x: usize,
    modes_y: usize,
) -> Result<RitzSolution<S>> {
    if modes_x == 0 || modes_y == 0 {
        return Err(Error::InvalidParameter {
            name: "modes",
            reason: "mode counts must be at least 1".into(),
        });
    }
    let (a, b, d) = (geom.span_x, geom.span_y, geom.rigidity);
    let two_pi = S::real(2.0) * S::PI();
    let half = S::real(0.5);
    let quarter = S::real(0.25);
    let ab = a * b;

    // lambda_m = (2 m pi / a)^2, mu_n = (2 n pi / b)^2
    let lambda: Vec<S> = (1..=modes_x)
        .map(|m| {
            let t = two_pi * S::count(m) / a;
            t * t
        })
        .collect();
    let mu: Vec<S> = (1..=modes_y)
        .map(|n| {
            let t = two_pi * S::count(n) / b;
            t * t
        })
        .collect();

    // Stiffness: K[(m,n),(p,q)] / (D a b) =
    //   1/2 lambda_m^2 [m=p] + 1/2 mu_n^2 [n=q] + 1/4 (lambda_m + mu_n)^2 [m=p][n=q].
    let diag = |m: usize, n: usize| -> S {
        let s = lambda[m] + mu[n];
        d * ab * quarter * s * s
    };
    // Uniform load vector: F_mn = q0 a b for every mode.
    let f = amplitude * ab;

    // Woodbury: K = Delta + sum_m c_m u_m u_m^T + sum_n c_n v_n v_n^T with
    // u_m spanning row m and v_n column n; capacity S = C^{-1} + U^T Delta^{-1} U.
    let mut inv_diag = Matrix::zeros(modes_x, modes_y);
    for m in 0..modes_x {
        for n in 0..modes_y {
            inv_diag.set(m, n, diag(m, n).recip());
        }
    }
    let row_sums: Vec<S> = (0..modes_x)
        .map(|m| (0..modes_y).map(|n| inv_diag.get(m, n)).sum())
        .collect();
    let col_sums: Vec<S> = (0..modes_y)
        .map(|n| (0..modes_x).map(|m| inv_diag.get(m, n)).sum())
        .collect();

    let dim = modes_x + modes_y;
    let capacity = Matrix::symmetric_from_upper(dim, |i, j| {
        if i == j {
            if i < modes_x {
                let c = d * ab * half * lambda[i] * lambda[i];
                c.recip() + row_sums[i]
            } else {
                let n = i - modes_x;
                let c = d * ab * half * mu[n] * mu[n];
                c.recip() + col_sums[n]
            }
        } else if i < modes_x && j >= modes_x {
            inv_diag.get(i, j - modes_x)
        } else {
            S::zero()
        }
    });
    let factor = cholesky(&capacity).ok_or(Error::SingularSystem {
        context: "clamped-plate capacity matrix",
    })?;

    // rhs = U^T Delta^{-1} F
    let mut rhs = vec![S::zero(); dim];
    for m in 0..modes_x {
        rhs[m] = f * row_sums[m];
    }
    for n in 0..modes_y {
        rhs[modes_x + n] = f * col_sums[n];
    }
    let y = factor.solve(&rhs);

    // w = Delta^{-1} (F - U y)
    let mut coeffs = vec![S::zero(); modes_x * modes_y];
    for m in 0..modes_x {
        for n in 0..modes_y {
            coeffs[m * modes_y + n] = inv_diag.get(m, n) * (f - y[m] - y[modes_x + n]);
        }
    }

    Ok(RitzSolution {
        geometry: *geom,
        amplitude,
        modes_x,
        modes_y,
        coeffs,
    })
}

impl<S: Scalar> RitzSolution<S> {
    pub fn geometry(&self) -> &PlateGeometry<S> {
        &self.geometry
    }

    pub fn amplitude(&self) -> S {
        self.amplitude
    }

    pub fn modes(&self) -> (usize, usize) {
        (self.modes_x, self.modes_y)
    }

    pub fn coeff(&self, m: usize, n: usize) -> S {
        self.coeffs[m * self.modes_y + n]
    }

    /// Deflection at the plate center.
    pub fn center_deflection(&self) -> S {
        let center = Point::new(
            self.geometry.span_x / S::real(2.0),
            self.geometry.span_y / S::real(2.0),
        );
        ritz_field(self, QuantityKind::Deflection, center)
    }

    /// Total potential energy at the Ritz minimizer, `-(1/2) F^T w`; it
    /// decreases monotonically as the basis grows.
    pub fn total_energy(&self) -> S {
        let f = self.amplitude * self.geometry.span_x * self.geometry.span_y;
        let sum: S = self.coeffs.iter().copied().sum();
        -S::real(0.5) * f * sum
    }
}

/// Any plate quantity of the Ritz solution, by term-wise analytic
/// differentiation of the cosine basis.
///
/// Derivatives above second order converge slowly (and the reconstructed
/// load not at all pointwise); data generation uses the exact applied load
/// instead of the series for the `q` field.
pub fn ritz_field<S: Scalar>(sol: &RitzSolution<S>, kind: QuantityKind, point: Point<S>) -> S {
    let geom = &sol.geometry;
    let two_pi = S::real(2.0) * S::PI();
    let op = operator_for::<S>(kind).resolve(geom.poisson_ratio);
    let mut value = S::zero();
    let mut fx = vec![S::zero(); sol.modes_x];
    let mut fy = vec![S::zero(); sol.modes_y];
    for term in &op.terms {
        let d_scale = geom.rigidity.powi(term.rigidity_power as i32);
        for (m, slot) in fx.iter_mut().enumerate() {
            let theta = two_pi * S::count(m + 1) / geom.span_x;
            *slot = if term.order_x == 0 {
                S::one() - (theta * point.x).cos()
            } else {
                -theta.powi(term.order_x as i32) * cos_derivative(theta * point.x, term.order_x)
            };
        }
        for (n, slot) in fy.iter_mut().enumerate() {
            let theta = two_pi * S::count(n + 1) / geom.span_y;
            *slot = if term.order_y == 0 {
                S::one() - (theta * point.y).cos()
            } else {
                -theta.powi(term.order_y as i32) * cos_derivative(theta * point.y, term.order_y)
            };
        }
        let mut acc = S::zero();
        for m in 0..sol.modes_x {
            let mut row = S::zero();
            for n in 0..sol.modes_y {
                row += sol.coeffs[m * sol.modes_y + n] * fy[n];
            }
            acc += fx[m] * row;
        }
        value += term.coeff * d_scale * acc;
    }
    value
}

/// Ground-truth generator covering both experimental setups.
#[derive(Debug, Clone)]
pub enum TruthModel<S> {
    SimplySupportedSinusoidal {
        geometry: PlateGeometry<S>,
        amplitude: S,
    },
    ClampedUniform {
        solution: RitzSolution<S>,
    },
}

impl<S: Scalar> TruthModel<S> {
    /// Builds the oracle matching the load: sinusoidal loads pair with the
    /// simply supported plate, uniform loads with the clamped plate solved at
    /// `modes x modes` basis functions.
    pub fn new(geom: &PlateGeometry<S>, load: LoadSpec<S>, modes: usize) -> Result<Self> {
        match load {
            LoadSpec::Sinusoidal { amplitude } => Ok(TruthModel::SimplySupportedSinusoidal {
                geometry: *geom,
                amplitude,
            }),
            LoadSpec::Uniform { amplitude } => Ok(TruthModel::ClampedUniform {
                solution: ritz_solve(geom, amplitude, modes, modes)?,
            }),
        }
    }

    pub fn geometry(&self) -> &PlateGeometry<S> {
        match self {
            TruthModel::SimplySupportedSinusoidal { geometry, .. } => geometry,
            TruthModel::ClampedUniform { solution } => solution.geometry(),
        }
    }

    pub fn support(&self) -> SupportKind {
        match self {
            TruthModel::SimplySupportedSinusoidal { .. } => SupportKind::SimplySupported,
            TruthModel::ClampedUniform { .. } => SupportKind::Fixed,
        }
    }

    /// True field value; for the clamped case the load is the exact applied
    /// constant rather than the (non-convergent) fourth-derivative series.
    pub fn field(&self, kind: QuantityKind, point: Point<S>) -> S {
        match self {
            TruthModel::SimplySupportedSinusoidal {
                geometry,
                amplitude,
            } => navier_field(geometry, *amplitude, kind, point),
            TruthModel::ClampedUniform { solution } => {
                if kind == QuantityKind::Load {
                    solution.amplitude()
                } else {
                    ritz_field(solution, kind, point)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn unit_geom() -> PlateGeometry<f64> {
        PlateGeometry::new(1.0, 1.0, 1.0, 0.3).unwrap()
    }

    fn rect_geom() -> PlateGeometry<f64> {
        PlateGeometry::new(1.4, 0.9, 2.3, 0.25).unwrap()
    }

    #[test]
    fn navier_deflection_vanishes_on_boundary() {
        // Zero is exact on the x = 0 / y = 0 edges; on the far edges the sine
        // argument only approximates pi, leaving a round-off residual.
        let g = rect_geom();
        for t in [0.0, 0.3, 0.77, 1.0] {
            for p in [
                Point::new(0.0, t * g.span_y),
                Point::new(g.span_x, t * g.span_y),
                Point::new(t * g.span_x, 0.0),
                Point::new(t * g.span_x, g.span_y),
            ] {
                let w = navier_field(&g, 1.0, QuantityKind::Deflection, p);
                assert!(w.abs() < 1e-15, "w = {w} at {p:?}");
            }
        }
    }

    #[test]
    fn navier_load_identity() {
        // Applying the plate operator to the deflection returns the load
        // exactly; this pins the squared denominator factor.
        let g = rect_geom();
        let q0 = 2.7;
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..200 {
            let p = Point::new(rng.gen::<f64>() * g.span_x, rng.gen::<f64>() * g.span_y);
            let expected =
                q0 * (std::f64::consts::PI * p.x / g.span_x).sin()
                    * (std::f64::consts::PI * p.y / g.span_y).sin();
            let got = navier_field(&g, q0, QuantityKind::Load, p);
            assert!(
                (got - expected).abs() <= 1e-12 * expected.abs().max(q0),
                "L_q[w] != q at {p:?}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn navier_center_deflection_square_plate() {
        let g = unit_geom();
        let q0 = 1.0;
        let center = Point::new(0.5, 0.5);
        let expected = q0 / (4.0 * std::f64::consts::PI.powi(4));
        let got = navier_field(&g, q0, QuantityKind::Deflection, center);
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn navier_symmetries() {
        let g = rect_geom();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let p = Point::new(rng.gen::<f64>() * g.span_x, rng.gen::<f64>() * g.span_y);
            let mx = Point::new(g.span_x - p.x, p.y);
            let my = Point::new(p.x, g.span_y - p.y);
            for kind in [QuantityKind::Deflection, QuantityKind::Load] {
                let v = navier_field(&g, 1.0, kind, p);
                assert!((navier_field(&g, 1.0, kind, mx) - v).abs() < 1e-12 * v.abs().max(1e-12));
                assert!((navier_field(&g, 1.0, kind, my) - v).abs() < 1e-12 * v.abs().max(1e-12));
            }
            // antisymmetric quantities flip sign across their axis
            let rx = navier_field(&g, 1.0, QuantityKind::RotationX, p);
            assert!(
                (navier_field(&g, 1.0, QuantityKind::RotationX, mx) + rx).abs()
                    < 1e-12 * rx.abs().max(1e-12)
            );
            let qx = navier_field(&g, 1.0, QuantityKind::ShearX, p);
            assert!(
                (navier_field(&g, 1.0, QuantityKind::ShearX, mx) + qx).abs()
                    < 1e-12 * qx.abs().max(1e-12)
            );
        }
    }

    /// High-order central finite difference of a bivariate field.
    fn fd_mixed(
        f: &dyn Fn(Point<f64>) -> f64,
        p: Point<f64>,
        ox: usize,
        oy: usize,
        h: f64,
    ) -> f64 {
        let stencil_1d = |n: usize| -> Vec<(f64, f64)> {
            // (offset, weight) pairs of the binomial central stencil
            let mut out = Vec::with_capacity(n + 1);
            let mut binom = 1.0f64;
            for k in 0..=n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                out.push((n as f64 / 2.0 - k as f64, sign * binom));
                binom = binom * (n - k) as f64 / (k + 1) as f64;
            }
            out
        };
        let sx = stencil_1d(ox);
        let sy = stencil_1d(oy);
        let mut acc = 0.0;
        for &(dx, wx) in &sx {
            for &(dy, wy) in &sy {
                acc += wx * wy * f(Point::new(p.x + dx * h, p.y + dy * h));
            }
        }
        acc / h.powi((ox + oy) as i32)
    }

    #[test]
    fn navier_quantities_match_operator_finite_differences() {
        let g = rect_geom();
        let w = |p: Point<f64>| navier_field(&g, 1.0, QuantityKind::Deflection, p);
        let p = Point::new(0.53 * g.span_x, 0.37 * g.span_y);
        let h = 1e-3;
        let checks: Vec<(QuantityKind, f64)> = vec![
            (QuantityKind::RotationX, fd_mixed(&w, p, 1, 0, h)),
            (QuantityKind::CurvatureY, -fd_mixed(&w, p, 0, 2, h)),
            (QuantityKind::CurvatureXY, -2.0 * fd_mixed(&w, p, 1, 1, h)),
            (
                QuantityKind::MomentX,
                -g.rigidity * (fd_mixed(&w, p, 2, 0, h) + g.poisson_ratio * fd_mixed(&w, p, 0, 2, h)),
            ),
            (
                QuantityKind::ShearY,
                -g.rigidity * (fd_mixed(&w, p, 2, 1, h) + fd_mixed(&w, p, 0, 3, h)),
            ),
        ];
        for (kind, fd) in checks {
            let exact = navier_field(&g, 1.0, kind, p);
            assert!(
                (exact - fd).abs() < 1e-5 * exact.abs().max(1e-6),
                "{kind}: exact {exact} vs fd {fd}"
            );
        }
    }

    #[test]
    fn ritz_zero_load_and_linearity() {
        let g = unit_geom();
        let zero = ritz_solve(&g, 0.0, 6, 6).unwrap();
        assert!(zero.coeffs.iter().all(|&c| c == 0.0));
        let one = ritz_solve(&g, 1.0, 6, 6).unwrap();
        let two = ritz_solve(&g, 2.0, 6, 6).unwrap();
        for (c1, c2) in one.coeffs.iter().zip(&two.coeffs) {
            assert!((2.0 * c1 - c2).abs() < 1e-15 * c2.abs().max(1e-300));
        }
    }

    #[test]
    fn ritz_clamped_boundary_conditions_exact() {
        let g = rect_geom();
        let sol = ritz_solve(&g, 1.0, 12, 12).unwrap();
        for t in [0.0, 0.21, 0.68, 1.0] {
            let edge_points = [
                Point::new(0.0, t * g.span_y),
                Point::new(g.span_x, t * g.span_y),
                Point::new(t * g.span_x, 0.0),
                Point::new(t * g.span_x, g.span_y),
            ];
            for p in edge_points {
                let w = ritz_field(&sol, QuantityKind::Deflection, p);
                assert!(w.abs() < 1e-12, "w on edge: {w}");
            }
            // normal rotation vanishes on the respective clamped edges
            let rx0 = ritz_field(&sol, QuantityKind::RotationX, Point::new(0.0, t * g.span_y));
            let rxa = ritz_field(&sol, QuantityKind::RotationX, Point::new(g.span_x, t * g.span_y));
            assert!(rx0.abs() < 1e-12 && rxa.abs() < 1e-12);
            let ry0 = ritz_field(&sol, QuantityKind::RotationY, Point::new(t * g.span_x, 0.0));
            let ryb = ritz_field(&sol, QuantityKind::RotationY, Point::new(t * g.span_x, g.span_y));
            assert!(ry0.abs() < 1e-12 && ryb.abs() < 1e-12);
        }
    }

    #[test]
    fn ritz_energy_decreases_with_basis_growth() {
        let g = unit_geom();
        let mut previous = f64::INFINITY;
        for n in [4, 8, 16, 32] {
            let sol = ritz_solve(&g, 1.0, n, n).unwrap();
            let energy = sol.total_energy();
            assert!(
                energy < previous + 1e-15,
                "energy must not increase: {energy} after {previous}"
            );
            previous = energy;
        }
    }

    #[test]
    fn ritz_stiffness_solution_satisfies_dense_system() {
        // Verify the Woodbury solve against a directly assembled dense
        // stiffness matrix on a small basis.
        let g = rect_geom();
        let (mx, my) = (5usize, 4usize);
        let sol = ritz_solve(&g, 1.3, mx, my).unwrap();
        let (a, b, d) = (g.span_x, g.span_y, g.rigidity);
        let lambda = |m: usize| (2.0 * std::f64::consts::PI * (m + 1) as f64 / a).powi(2);
        let mu = |n: usize| (2.0 * std::f64::consts::PI * (n + 1) as f64 / b).powi(2);
        let dim = mx * my;
        let mut k = vec![vec![0.0f64; dim]; dim];
        for m in 0..mx {
            for n in 0..my {
                for p in 0..mx {
                    for q in 0..my {
                        let mut v = 0.0;
                        if m == p {
                            v += 0.5 * lambda(m) * lambda(p);
                        }
                        if n == q {
                            v += 0.5 * mu(n) * mu(q);
                        }
                        if m == p && n == q {
                            v += 0.25 * (lambda(m) + mu(n)).powi(2);
                        }
                        k[m * my + n][p * my + q] = d * a * b * v;
                    }
                }
            }
        }
        let f = 1.3 * a * b;
        for row in 0..dim {
            let mut acc = 0.0;
            for col in 0..dim {
                acc += k[row][col] * sol.coeffs[col];
            }
            assert!(
                (acc - f).abs() < 1e-9 * f.abs(),
                "row {row}: K w = {acc}, expected {f}"
            );
        }
    }

    #[test]
    fn ritz_curvature_matches_finite_difference_of_deflection() {
        let g = unit_geom();
        let sol = ritz_solve(&g, 1.0, 24, 24).unwrap();
        let w = |p: Point<f64>| ritz_field(&sol, QuantityKind::Deflection, p);
        let center = Point::new(0.5, 0.5);
        let h = 1e-3;
        let kx = ritz_field(&sol, QuantityKind::CurvatureX, center);
        let fd_at = |h: f64| -fd_mixed(&w, center, 2, 0, h);
        let fd = (4.0 * fd_at(h / 2.0) - fd_at(h)) / 3.0;
        assert!(
            (kx - fd).abs() < 1e-6 * kx.abs(),
            "kappa_x {kx} vs fd {fd}"
        );
    }

    #[test]
    fn ritz_symmetry_of_deflection() {
        let g = rect_geom();
        let sol = ritz_solve(&g, 1.0, 16, 16).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let p = Point::new(rng.gen::<f64>() * g.span_x, rng.gen::<f64>() * g.span_y);
            let v = ritz_field(&sol, QuantityKind::Deflection, p);
            let mx = ritz_field(
                &sol,
                QuantityKind::Deflection,
                Point::new(g.span_x - p.x, p.y),
            );
            assert!((v - mx).abs() < 1e-10 * v.abs().max(1e-12));
        }
    }

    #[test]
    fn truth_model_dispatch() {
        let g = unit_geom();
        let ss = TruthModel::new(&g, LoadSpec::Sinusoidal { amplitude: 1.0 }, 8).unwrap();
        assert_eq!(ss.support(), SupportKind::SimplySupported);
        let interior = Point::new(0.3, 0.4);
        assert!(ss.field(QuantityKind::Load, interior) > 0.0);

        let clamped = TruthModel::new(&g, LoadSpec::Uniform { amplitude: 2.0 }, 8).unwrap();
        assert_eq!(clamped.support(), SupportKind::Fixed);
        assert_eq!(clamped.field(QuantityKind::Load, interior), 2.0);
        assert!(clamped.field(QuantityKind::Deflection, Point::new(0.5, 0.5)) > 0.0);
    }
}
