//! Heterogeneous observation sets.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::operators::QuantityKind;
use crate::scalar::Scalar;

/// Measurement noise class of an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseClass {
    /// Ordinary measurement with quantity-level noise variance.
    Noisy,
    /// Artificial boundary-condition observation with exactly zero noise.
    NoiselessBoundary,
}

/// A single tagged observation of one plate quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<S> {
    pub location: Point<S>,
    pub quantity: QuantityKind,
    pub value: S,
    pub noise_class: NoiseClass,
}

impl<S: Scalar> Observation<S> {
    pub fn noisy(location: Point<S>, quantity: QuantityKind, value: S) -> Self {
        Self {
            location,
            quantity,
            value,
            noise_class: NoiseClass::Noisy,
        }
    }

    pub fn noiseless_boundary(location: Point<S>, quantity: QuantityKind, value: S) -> Self {
        Self {
            location,
            quantity,
            value,
            noise_class: NoiseClass::NoiselessBoundary,
        }
    }
}

/// Observations over a rectangular plate domain, held in the canonical block
/// order (quantities ordered by block rank, insertion order within a block).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<S> {
    span_x: S,
    span_y: S,
    observations: Vec<Observation<S>>,
}

impl<S: Scalar> Dataset<S> {
    pub fn new(span_x: S, span_y: S, observations: Vec<Observation<S>>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for obs in &observations {
            if !(obs.location.x >= S::zero())
                || !(obs.location.x <= span_x)
                || !(obs.location.y >= S::zero())
                || !(obs.location.y <= span_y)
            {
                return Err(Error::OutOfDomain {
                    x: obs.location.x.to_f64_lossy(),
                    y: obs.location.y.to_f64_lossy(),
                    span_x: span_x.to_f64_lossy(),
                    span_y: span_y.to_f64_lossy(),
                });
            }
            if obs.noise_class == NoiseClass::NoiselessBoundary
                && !obs.quantity.admits_boundary_condition()
            {
                return Err(Error::InvalidBoundaryQuantity {
                    quantity: obs.quantity.label(),
                });
            }
        }
        let mut observations = observations;
        observations.sort_by_key(|o| o.quantity.block_rank());
        Ok(Self {
            span_x,
            span_y,
            observations,
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn span(&self) -> (S, S) {
        (self.span_x, self.span_y)
    }

    pub fn observations(&self) -> &[Observation<S>] {
        &self.observations
    }

    /// Observation values as a vector in block order.
    pub fn values(&self) -> Vec<S> {
        self.observations.iter().map(|o| o.value).collect()
    }

    /// Distinct quantities present, in block order.
    pub fn quantities(&self) -> Vec<QuantityKind> {
        let mut kinds = Vec::new();
        for obs in &self.observations {
            if kinds.last() != Some(&obs.quantity) {
                kinds.push(obs.quantity);
            }
        }
        kinds
    }

    /// Distinct quantities with at least one noisy observation, in block order.
    pub fn noisy_quantities(&self) -> Vec<QuantityKind> {
        let mut kinds: Vec<QuantityKind> = Vec::new();
        for obs in &self.observations {
            if obs.noise_class == NoiseClass::Noisy && !kinds.contains(&obs.quantity) {
                kinds.push(obs.quantity);
            }
        }
        kinds
    }

    /// Whether the rigidity is identifiable from this dataset: it takes at
    /// least one rigidity-free and one rigidity-carrying quantity block.
    pub fn has_rigidity_information(&self) -> bool {
        let kinds = self.quantities();
        kinds.iter().any(|k| k.carries_rigidity()) && kinds.iter().any(|k| !k.carries_rigidity())
    }

    /// A new dataset with extra observations appended (re-sorted into block order).
    pub fn with_appended(&self, extra: Vec<Observation<S>>) -> Result<Self> {
        let mut all = self.observations.clone();
        all.extend(extra);
        Self::new(self.span_x, self.span_y, all)
    }

    /// Whether a point lies inside the dataset's plate domain.
    pub fn contains(&self, point: Point<S>) -> bool {
        point.x >= S::zero() && point.x <= self.span_x && point.y >= S::zero() && point.y <= self.span_y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(x: f64, y: f64, q: QuantityKind) -> Observation<f64> {
        Observation::noisy(Point::new(x, y), q, 1.0)
    }

    #[test]
    fn sorts_into_block_order() {
        let data = Dataset::new(
            1.0,
            1.0,
            vec![
                obs(0.1, 0.1, QuantityKind::Load),
                obs(0.2, 0.2, QuantityKind::Deflection),
                obs(0.3, 0.3, QuantityKind::Load),
                obs(0.4, 0.4, QuantityKind::CurvatureX),
            ],
        )
        .unwrap();
        let kinds: Vec<_> = data.observations().iter().map(|o| o.quantity).collect();
        assert_eq!(
            kinds,
            vec![
                QuantityKind::Deflection,
                QuantityKind::CurvatureX,
                QuantityKind::Load,
                QuantityKind::Load
            ]
        );
        // stable within a block: (0.1, ...) before (0.3, ...)
        assert_eq!(data.observations()[2].location.x, 0.1);
        assert_eq!(
            data.quantities(),
            vec![
                QuantityKind::Deflection,
                QuantityKind::CurvatureX,
                QuantityKind::Load
            ]
        );
    }

    #[test]
    fn rejects_out_of_domain() {
        let err = Dataset::new(1.0, 1.0, vec![obs(1.5, 0.5, QuantityKind::Deflection)]);
        assert!(matches!(err, Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn rejects_noiseless_non_boundary_quantity() {
        let bad = Observation::noiseless_boundary(Point::new(0.0, 0.0), QuantityKind::Load, 0.0);
        let err = Dataset::new(1.0, 1.0, vec![bad]);
        assert!(matches!(err, Err(Error::InvalidBoundaryQuantity { .. })));
        for ok_kind in [
            QuantityKind::Deflection,
            QuantityKind::RotationX,
            QuantityKind::RotationY,
        ] {
            let good = Observation::noiseless_boundary(Point::new(0.0, 0.0), ok_kind, 0.0);
            assert!(Dataset::new(1.0, 1.0, vec![good]).is_ok());
        }
    }

    #[test]
    fn rigidity_information_requires_both_block_types() {
        let w_only = Dataset::new(1.0, 1.0, vec![obs(0.1, 0.1, QuantityKind::Deflection)]).unwrap();
        assert!(!w_only.has_rigidity_information());
        let q_only = Dataset::new(1.0, 1.0, vec![obs(0.1, 0.1, QuantityKind::Load)]).unwrap();
        assert!(!q_only.has_rigidity_information());
        let both = w_only
            .with_appended(vec![obs(0.2, 0.2, QuantityKind::Load)])
            .unwrap();
        assert!(both.has_rigidity_information());
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(matches!(
            Dataset::<f64>::new(1.0, 1.0, vec![]),
            Err(Error::EmptyDataset)
        ));
    }
}
