//! Thin-plate linear differential operators and the physics-informed
//! cross-covariances they induce.
//!
//! Each physical quantity is a linear operator applied to the deflection
//! field; applying the operators of a quantity pair to the two arguments of
//! the base kernel produces the full covariance block catalogue generically,
//! instead of transcribing dozens of closed-form entries.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernel::{GaussDerivGradTable, GaussDerivTable, KernelParams};
use crate::scalar::Scalar;

/// The twelve physical plate quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuantityKind {
    Deflection,
    RotationX,
    RotationY,
    CurvatureX,
    CurvatureY,
    CurvatureXY,
    Load,
    ShearX,
    ShearY,
    MomentX,
    MomentY,
    MomentXY,
}

impl QuantityKind {
    /// All quantities in the canonical block order of the joint covariance.
    pub const ALL: [QuantityKind; 12] = [
        QuantityKind::Deflection,
        QuantityKind::RotationX,
        QuantityKind::RotationY,
        QuantityKind::CurvatureX,
        QuantityKind::CurvatureY,
        QuantityKind::CurvatureXY,
        QuantityKind::Load,
        QuantityKind::ShearX,
        QuantityKind::ShearY,
        QuantityKind::MomentX,
        QuantityKind::MomentY,
        QuantityKind::MomentXY,
    ];

    /// Position in the canonical block order.
    pub fn block_rank(self) -> usize {
        Self::ALL.iter().position(|&k| k == self).unwrap()
    }

    /// Short label used in file headers and column names.
    pub fn label(self) -> &'static str {
        match self {
            QuantityKind::Deflection => "w",
            QuantityKind::RotationX => "r_x",
            QuantityKind::RotationY => "r_y",
            QuantityKind::CurvatureX => "kappa_x",
            QuantityKind::CurvatureY => "kappa_y",
            QuantityKind::CurvatureXY => "kappa_xy",
            QuantityKind::Load => "q",
            QuantityKind::ShearX => "Q_x",
            QuantityKind::ShearY => "Q_y",
            QuantityKind::MomentX => "M_x",
            QuantityKind::MomentY => "M_y",
            QuantityKind::MomentXY => "M_xy",
        }
    }

    pub fn parse_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.label() == label)
    }

    /// Whether the quantity's operator carries one power of the rigidity.
    pub fn carries_rigidity(self) -> bool {
        matches!(
            self,
            QuantityKind::Load
                | QuantityKind::ShearX
                | QuantityKind::ShearY
                | QuantityKind::MomentX
                | QuantityKind::MomentY
                | QuantityKind::MomentXY
        )
    }

    /// Power of the rigidity in the quantity's operator (0 or 1).
    pub fn rigidity_power(self) -> usize {
        usize::from(self.carries_rigidity())
    }

    /// Quantities admissible as noiseless boundary observations
    /// (deflection and rotations).
    pub fn admits_boundary_condition(self) -> bool {
        matches!(
            self,
            QuantityKind::Deflection | QuantityKind::RotationX | QuantityKind::RotationY
        )
    }
}

impl std::fmt::Display for QuantityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Degree-one polynomial in the Poisson ratio, `constant + nu_coeff * nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuPoly<S> {
    pub constant: S,
    pub nu_coeff: S,
}

impl<S: Scalar> NuPoly<S> {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: S::real(c),
            nu_coeff: S::zero(),
        }
    }

    pub fn new(constant: f64, nu_coeff: f64) -> Self {
        Self {
            constant: S::real(constant),
            nu_coeff: S::real(nu_coeff),
        }
    }

    pub fn eval(&self, nu: S) -> S {
        self.constant + self.nu_coeff * nu
    }
}

/// One term of a plate operator: `coeff(nu) * D^rigidity_power * d^order_x/dx d^order_y/dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorTerm<S> {
    pub coeff: NuPoly<S>,
    pub rigidity_power: usize,
    pub order_x: usize,
    pub order_y: usize,
}

/// A plate quantity's linear differential operator as a sum of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOperator<S> {
    terms: Vec<OperatorTerm<S>>,
}

impl<S: Scalar> DiffOperator<S> {
    pub fn terms(&self) -> &[OperatorTerm<S>] {
        &self.terms
    }

    /// Terms with the Poisson-ratio polynomial evaluated; zero-coefficient
    /// terms are dropped.
    pub fn resolve(&self, nu: S) -> ResolvedOperator<S> {
        let terms = self
            .terms
            .iter()
            .filter_map(|t| {
                let c = t.coeff.eval(nu);
                (c != S::zero()).then_some(ResolvedTerm {
                    coeff: c,
                    rigidity_power: t.rigidity_power,
                    order_x: t.order_x,
                    order_y: t.order_y,
                })
            })
            .collect();
        ResolvedOperator { terms }
    }
}

/// Operator terms with numeric coefficients at a fixed Poisson ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedOperator<S> {
    pub terms: Vec<ResolvedTerm<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTerm<S> {
    pub coeff: S,
    pub rigidity_power: usize,
    pub order_x: usize,
    pub order_y: usize,
}

/// Known physical constants of the plate model: rigidity and Poisson ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateConstants<S> {
    pub rigidity: S,
    pub poisson_ratio: S,
}

impl<S: Scalar> PlateConstants<S> {
    pub fn new(rigidity: S, poisson_ratio: S) -> Result<Self> {
        if !(rigidity > S::zero()) || !rigidity.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rigidity",
                reason: format!("must be positive and finite, got {rigidity}"),
            });
        }
        if !(poisson_ratio >= S::zero()) || !(poisson_ratio < S::real(0.5)) {
            return Err(Error::InvalidParameter {
                name: "poisson_ratio",
                reason: format!("must lie in [0, 0.5), got {poisson_ratio}"),
            });
        }
        Ok(Self {
            rigidity,
            poisson_ratio,
        })
    }
}

/// The linear operator mapping the deflection field to the given quantity.
pub fn operator_for<S: Scalar>(kind: QuantityKind) -> DiffOperator<S> {
    let term = |coeff: NuPoly<S>, d: usize, ox: usize, oy: usize| OperatorTerm {
        coeff,
        rigidity_power: d,
        order_x: ox,
        order_y: oy,
    };
    let terms = match kind {
        QuantityKind::Deflection => vec![term(NuPoly::constant(1.0), 0, 0, 0)],
        QuantityKind::RotationX => vec![term(NuPoly::constant(1.0), 0, 1, 0)],
        QuantityKind::RotationY => vec![term(NuPoly::constant(1.0), 0, 0, 1)],
        QuantityKind::CurvatureX => vec![term(NuPoly::constant(-1.0), 0, 2, 0)],
        QuantityKind::CurvatureY => vec![term(NuPoly::constant(-1.0), 0, 0, 2)],
        QuantityKind::CurvatureXY => vec![term(NuPoly::constant(-2.0), 0, 1, 1)],
        QuantityKind::Load => vec![
            term(NuPoly::constant(1.0), 1, 4, 0),
            term(NuPoly::constant(2.0), 1, 2, 2),
            term(NuPoly::constant(1.0), 1, 0, 4),
        ],
        QuantityKind::ShearX => vec![
            term(NuPoly::constant(-1.0), 1, 3, 0),
            term(NuPoly::constant(-1.0), 1, 1, 2),
        ],
        QuantityKind::ShearY => vec![
            term(NuPoly::constant(-1.0), 1, 2, 1),
            term(NuPoly::constant(-1.0), 1, 0, 3),
        ],
        QuantityKind::MomentX => vec![
            term(NuPoly::constant(-1.0), 1, 2, 0),
            term(NuPoly::new(0.0, -1.0), 1, 0, 2),
        ],
        QuantityKind::MomentY => vec![
            term(NuPoly::new(0.0, -1.0), 1, 2, 0),
            term(NuPoly::constant(-1.0), 1, 0, 2),
        ],
        QuantityKind::MomentXY => vec![term(NuPoly::new(1.0, -1.0), 1, 1, 1)],
    };
    DiffOperator { terms }
}

/// Powers of the rigidity `[1, D, D^2]` for block scaling.
pub(crate) fn rigidity_powers<S: Scalar>(rigidity: S) -> [S; 3] {
    [S::one(), rigidity, rigidity * rigidity]
}

/// Covariance between quantity `a` at `x` and quantity `b` at `x_prime`,
/// obtained by applying the two operators to the base kernel.
pub fn cross_covariance<S: Scalar>(
    a: QuantityKind,
    b: QuantityKind,
    x: Point<S>,
    x_prime: Point<S>,
    params: &KernelParams<S>,
    constants: &PlateConstants<S>,
) -> S {
    let gx = GaussDerivTable::new(x.x - x_prime.x, params.length_x);
    let gy = GaussDerivTable::new(x.y - x_prime.y, params.length_y);
    let op_a = operator_for::<S>(a).resolve(constants.poisson_ratio);
    let op_b = operator_for::<S>(b).resolve(constants.poisson_ratio);
    let d_pow = rigidity_powers(constants.rigidity);
    let a2 = params.amplitude * params.amplitude;
    a2 * pair_sum(&op_a, &op_b, &gx.values, &gy.values, &d_pow)
}

/// Shared double sum over operator term products. `gx`/`gy` hold the 1-D
/// Gaussian derivatives by order; the second argument's derivative sign is
/// applied per `b`-term.
pub(crate) fn pair_sum<S: Scalar>(
    op_a: &ResolvedOperator<S>,
    op_b: &ResolvedOperator<S>,
    gx: &[S],
    gy: &[S],
    d_pow: &[S; 3],
) -> S {
    let mut acc = S::zero();
    for ta in &op_a.terms {
        for tb in &op_b.terms {
            let mut v = ta.coeff
                * tb.coeff
                * d_pow[ta.rigidity_power + tb.rigidity_power]
                * gx[ta.order_x + tb.order_x]
                * gy[ta.order_y + tb.order_y];
            if (tb.order_x + tb.order_y) % 2 == 1 {
                v = -v;
            }
            acc += v;
        }
    }
    acc
}

/// Derivative of [`cross_covariance`] with respect to the rigidity. Each
/// block scales as a monomial `D^(p_a + p_b)`, so the derivative is exact.
pub fn cross_covariance_d_gradient<S: Scalar>(
    a: QuantityKind,
    b: QuantityKind,
    x: Point<S>,
    x_prime: Point<S>,
    params: &KernelParams<S>,
    constants: &PlateConstants<S>,
) -> S {
    let power = a.rigidity_power() + b.rigidity_power();
    if power == 0 {
        return S::zero();
    }
    let value = cross_covariance(a, b, x, x_prime, params, constants);
    S::count(power) * value / constants.rigidity
}

/// Value plus kernel-hyperparameter gradients of one covariance entry,
/// used by batched matrix assembly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EntryWithGrads<S> {
    pub value: S,
    pub d_length_x: S,
    pub d_length_y: S,
}

/// Evaluates covariance entries (optionally with length-scale gradients) for
/// a fixed point pair across many quantity pairs, sharing the per-pair
/// Gaussian derivative tables.
pub(crate) struct PairEvaluator<S> {
    gx: GaussDerivGradTable<S>,
    gy: GaussDerivGradTable<S>,
    amplitude_sq: S,
    d_pow: [S; 3],
}

impl<S: Scalar> PairEvaluator<S> {
    pub fn new(
        x: Point<S>,
        x_prime: Point<S>,
        params: &KernelParams<S>,
        rigidity: S,
    ) -> Self {
        Self {
            gx: GaussDerivGradTable::new(x.x - x_prime.x, params.length_x),
            gy: GaussDerivGradTable::new(x.y - x_prime.y, params.length_y),
            amplitude_sq: params.amplitude * params.amplitude,
            d_pow: rigidity_powers(rigidity),
        }
    }

    pub fn value(&self, op_a: &ResolvedOperator<S>, op_b: &ResolvedOperator<S>) -> S {
        self.amplitude_sq * pair_sum(op_a, op_b, &self.gx.values, &self.gy.values, &self.d_pow)
    }

    pub fn value_with_grads(
        &self,
        op_a: &ResolvedOperator<S>,
        op_b: &ResolvedOperator<S>,
    ) -> EntryWithGrads<S> {
        EntryWithGrads {
            value: self.amplitude_sq
                * pair_sum(op_a, op_b, &self.gx.values, &self.gy.values, &self.d_pow),
            d_length_x: self.amplitude_sq
                * pair_sum(op_a, op_b, &self.gx.length_grads, &self.gy.values, &self.d_pow),
            d_length_y: self.amplitude_sq
                * pair_sum(op_a, op_b, &self.gx.values, &self.gy.length_grads, &self.d_pow),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::base_kernel;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn unit_setup() -> (KernelParams<f64>, PlateConstants<f64>) {
        (
            KernelParams::new(1.0, 1.0, 1.0).unwrap(),
            PlateConstants::new(1.0, 0.3).unwrap(),
        )
    }

    #[test]
    fn operator_table_reference_entries() {
        let w = operator_for::<f64>(QuantityKind::Deflection);
        assert_eq!(w.terms().len(), 1);
        assert_eq!(w.terms()[0].rigidity_power, 0);
        assert_eq!((w.terms()[0].order_x, w.terms()[0].order_y), (0, 0));
        assert_eq!(w.terms()[0].coeff.eval(0.3), 1.0);

        let q = operator_for::<f64>(QuantityKind::Load);
        let spec: Vec<_> = q
            .terms()
            .iter()
            .map(|t| (t.coeff.eval(0.0), t.rigidity_power, t.order_x, t.order_y))
            .collect();
        assert_eq!(
            spec,
            vec![(1.0, 1, 4, 0), (2.0, 1, 2, 2), (1.0, 1, 0, 4)]
        );

        let mxy = operator_for::<f64>(QuantityKind::MomentXY);
        assert_eq!(mxy.terms().len(), 1);
        let t = mxy.terms()[0];
        assert_eq!(t.coeff.eval(0.3), 1.0 - 0.3);
        assert_eq!((t.rigidity_power, t.order_x, t.order_y), (1, 1, 1));
    }

    #[test]
    fn rigidity_partition_matches_operator_table() {
        for kind in QuantityKind::ALL {
            let op = operator_for::<f64>(kind);
            for t in op.terms() {
                assert_eq!(t.rigidity_power, kind.rigidity_power(), "{kind}");
                assert!(t.order_x + t.order_y <= 4, "{kind}");
            }
        }
    }

    #[test]
    fn moment_x_at_zero_poisson_matches_scaled_curvature_operator() {
        // With nu = 0, the x-moment operator is D times the x-curvature operator.
        let mx = operator_for::<f64>(QuantityKind::MomentX).resolve(0.0);
        let kx = operator_for::<f64>(QuantityKind::CurvatureX).resolve(0.0);
        assert_eq!(mx.terms.len(), kx.terms.len());
        for (a, b) in mx.terms.iter().zip(&kx.terms) {
            assert_eq!(a.coeff, b.coeff);
            assert_eq!((a.order_x, a.order_y), (b.order_x, b.order_y));
            assert_eq!(a.rigidity_power, 1);
            assert_eq!(b.rigidity_power, 0);
        }
        let my = operator_for::<f64>(QuantityKind::MomentY).resolve(0.0);
        let ky = operator_for::<f64>(QuantityKind::CurvatureY).resolve(0.0);
        assert_eq!(my.terms.len(), ky.terms.len());
    }

    #[test]
    fn deflection_pair_is_base_kernel() {
        let (theta, c) = unit_setup();
        let p = Point::new(0.3, 0.8);
        let q = Point::new(0.6, 0.2);
        let kw = cross_covariance(
            QuantityKind::Deflection,
            QuantityKind::Deflection,
            p,
            q,
            &theta,
            &c,
        );
        assert_eq!(kw, base_kernel(p, q, &theta));
    }

    #[test]
    fn deflection_load_value_at_zero_offset() {
        // k_wq(0) = D A^2 [He_4(0) + 2 He_2(0)^2 + He_4(0)] = 8 at unit scales.
        let (theta, c) = unit_setup();
        let p = Point::new(0.5, 0.5);
        let v = cross_covariance(QuantityKind::Deflection, QuantityKind::Load, p, p, &theta, &c);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn load_load_value_at_zero_offset() {
        // The biharmonic pair at zero offset expands binomially:
        // sum_k C(4,k) He_{2k}(0) He_{8-2k}(0) = 105 + 4*15 + 6*9 + 4*15 + 105 = 384.
        let (theta, c) = unit_setup();
        let p = Point::new(0.1, 0.9);
        let v = cross_covariance(QuantityKind::Load, QuantityKind::Load, p, p, &theta, &c);
        assert!((v - 384.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn block_transpose_symmetry_full_grid() {
        let theta = KernelParams::new(1.3, 0.7, 1.2).unwrap();
        let c = PlateConstants::new(2.0, 0.25).unwrap();
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..20 {
            let p = Point::new(rng.gen::<f64>(), rng.gen::<f64>());
            let q = Point::new(rng.gen::<f64>(), rng.gen::<f64>());
            for a in QuantityKind::ALL {
                for b in QuantityKind::ALL {
                    let fwd = cross_covariance(a, b, p, q, &theta, &c);
                    let rev = cross_covariance(b, a, q, p, &theta, &c);
                    assert!(
                        (fwd - rev).abs() <= 1e-12 * fwd.abs().max(1.0),
                        "{a}/{b}: {fwd} vs {rev}"
                    );
                }
            }
        }
    }

    #[test]
    fn rigidity_gradient_matches_finite_differences() {
        let theta = KernelParams::new(1.1, 0.8, 0.9).unwrap();
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..40 {
            let d = 0.5 + 2.0 * rng.gen::<f64>();
            let c = PlateConstants::new(d, 0.3).unwrap();
            let p = Point::new(rng.gen::<f64>(), rng.gen::<f64>());
            let q = Point::new(rng.gen::<f64>(), rng.gen::<f64>());
            let pairs = [
                (QuantityKind::Deflection, QuantityKind::Deflection, 0),
                (QuantityKind::Deflection, QuantityKind::Load, 1),
                (QuantityKind::Load, QuantityKind::Load, 2),
                (QuantityKind::CurvatureX, QuantityKind::MomentY, 1),
            ];
            for (a, b, power) in pairs {
                let grad = cross_covariance_d_gradient(a, b, p, q, &theta, &c);
                let h = 1e-6 * d;
                let up = cross_covariance(
                    a,
                    b,
                    p,
                    q,
                    &theta,
                    &PlateConstants::new(d + h, 0.3).unwrap(),
                );
                let dn = cross_covariance(
                    a,
                    b,
                    p,
                    q,
                    &theta,
                    &PlateConstants::new(d - h, 0.3).unwrap(),
                );
                let fd = (up - dn) / (2.0 * h);
                assert!(
                    (grad - fd).abs() <= 1e-6 * grad.abs().max(1.0),
                    "{a}/{b} power {power}: {grad} vs {fd}"
                );
                if power == 0 {
                    assert_eq!(grad, 0.0);
                }
            }
        }
    }

    #[test]
    fn pair_evaluator_agrees_with_cross_covariance() {
        let theta = KernelParams::new(0.9, 0.6, 1.4).unwrap();
        let c = PlateConstants::new(1.7, 0.2).unwrap();
        let p = Point::new(0.2, 0.7);
        let q = Point::new(0.9, 0.3);
        let eval = PairEvaluator::new(p, q, &theta, c.rigidity);
        for a in QuantityKind::ALL {
            for b in QuantityKind::ALL {
                let op_a = operator_for::<f64>(a).resolve(c.poisson_ratio);
                let op_b = operator_for::<f64>(b).resolve(c.poisson_ratio);
                let fast = eval.value(&op_a, &op_b);
                let slow = cross_covariance(a, b, p, q, &theta, &c);
                assert!((fast - slow).abs() <= 1e-14 * slow.abs().max(1.0));
            }
        }
    }

    #[test]
    fn labels_roundtrip() {
        for kind in QuantityKind::ALL {
            assert_eq!(QuantityKind::parse_label(kind.label()), Some(kind));
        }
        assert_eq!(QuantityKind::parse_label("nope"), None);
    }
}
