//! Planar points and plate geometry.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A location in plate coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }
}

/// Rectangular plate spanning `[0, span_x] x [0, span_y]` with known rigidity
/// and Poisson ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateGeometry<S> {
    pub span_x: S,
    pub span_y: S,
    pub rigidity: S,
    pub poisson_ratio: S,
}

impl<S: Scalar> PlateGeometry<S> {
    pub fn new(span_x: S, span_y: S, rigidity: S, poisson_ratio: S) -> Result<Self> {
        if !(span_x > S::zero()) || !(span_y > S::zero()) {
            return Err(Error::InvalidParameter {
                name: "span",
                reason: "plate spans must be positive".into(),
            });
        }
        if !(rigidity > S::zero()) {
            return Err(Error::InvalidParameter {
                name: "rigidity",
                reason: "flexural rigidity must be positive".into(),
            });
        }
        if !(poisson_ratio >= S::zero()) || !(poisson_ratio < S::real(0.5)) {
            return Err(Error::InvalidParameter {
                name: "poisson_ratio",
                reason: "Poisson ratio must lie in [0, 0.5)".into(),
            });
        }
        Ok(Self {
            span_x,
            span_y,
            rigidity,
            poisson_ratio,
        })
    }

    /// Whether a point lies inside the plate domain (boundary included).
    pub fn contains(&self, point: Point<S>) -> bool {
        point.x >= S::zero() && point.x <= self.span_x && point.y >= S::zero() && point.y <= self.span_y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_geometry() {
        assert!(PlateGeometry::<f64>::new(1.0, 1.0, 0.0, 0.3).is_err());
        assert!(PlateGeometry::<f64>::new(-1.0, 1.0, 1.0, 0.3).is_err());
        assert!(PlateGeometry::<f64>::new(1.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn containment_includes_edges() {
        let g = PlateGeometry::new(2.0, 1.0, 1.0, 0.3).unwrap();
        assert!(g.contains(Point::new(0.0, 0.0)));
        assert!(g.contains(Point::new(2.0, 1.0)));
        assert!(!g.contains(Point::new(2.0 + 1e-12, 0.5)));
    }
}
