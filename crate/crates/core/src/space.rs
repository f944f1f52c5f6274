//! Chromosome representation and box bounds.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Fixed-dimension vector of real genes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(genes: Vec<f64>) -> Self {
        Self(genes)
    }

    pub fn filled(value: f64, dim: usize) -> Self {
        Self(vec![value; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::filled(0.0, dim)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|g| g.is_finite())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn check_same_dim(&self, other: &RealVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for RealVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for RealVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl FromIterator<f64> for RealVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Per-gene box constraints, `lower[k] < upper[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidBounds {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same `[lower, upper]` interval on every gene.
    pub fn uniform(lower: f64, upper: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(g, (lo, hi))| *g >= *lo && *g <= *hi)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Projects `x` onto the box in place.
    pub fn clamp_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check_dim(x)?;
        for ((g, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *g = g.max(*lo).min(*hi);
        }
        Ok(())
    }
}

/// Gene-wise projection onto the box: `min(upper, max(lower, g))`.
pub fn clamp_to_bounds(x: &RealVector, bounds: &Bounds) -> Result<RealVector> {
    let mut out = x.clone();
    bounds.clamp_in_place(&mut out)?;
    Ok(out)
}

/// Each gene independently uniform on `[lower, upper)`.
pub fn uniform_vector(bounds: &Bounds, rng: &mut RngStream) -> RealVector {
    bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(&lo, &hi)| rng.uniform_in(lo, hi))
        .collect()
}

/// A chromosome with its (minimised) objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub position: RealVector,
    /// Meaningful only when `evaluated` is set.
    pub fitness: f64,
    pub evaluated: bool,
}

impl Individual {
    pub fn unevaluated(position: RealVector) -> Self {
        Self {
            position,
            fitness: f64::INFINITY,
            evaluated: false,
        }
    }

    pub fn evaluated(position: RealVector, fitness: f64) -> Self {
        Self {
            position,
            fitness,
            evaluated: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b30(dim: usize) -> Bounds {
        Bounds::uniform(-30.0, 30.0, dim).unwrap()
    }

    #[test]
    fn clamp_examples() {
        let b = b30(2);
        let x = RealVector::new(vec![35.0, 0.0]);
        assert_eq!(clamp_to_bounds(&x, &b).unwrap().to_vec(), vec![30.0, 0.0]);
        let x = RealVector::new(vec![0.0, 0.0]);
        assert_eq!(clamp_to_bounds(&x, &b).unwrap().to_vec(), vec![0.0, 0.0]);
        let x = RealVector::new(vec![-31.0, 31.0]);
        assert_eq!(clamp_to_bounds(&x, &b).unwrap().to_vec(), vec![-30.0, 30.0]);
    }

    #[test]
    fn clamp_dimension_mismatch() {
        let b = b30(3);
        let x = RealVector::new(vec![1.0, 2.0]);
        assert_eq!(
            clamp_to_bounds(&x, &b),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(Bounds::uniform(1.0, 1.0, 2).is_err());
        assert!(Bounds::uniform(2.0, 1.0, 2).is_err());
        assert!(Bounds::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn uniform_vector_unit_box() {
        let b = Bounds::uniform(0.0, 1.0, 50).unwrap();
        let mut rng = RngStream::from_seed(3);
        let v = uniform_vector(&b, &mut rng);
        assert!(v.iter().all(|g| (0.0..1.0).contains(g)));
    }

    #[test]
    fn uniform_vector_same_seed_identical() {
        let b = Bounds::uniform(-5.12, 5.12, 30).unwrap();
        let a = uniform_vector(&b, &mut RngStream::from_seed(99));
        let c = uniform_vector(&b, &mut RngStream::from_seed(99));
        assert_eq!(a, c);
    }

    #[test]
    fn uniform_vector_mean_matches_centre() {
        // Analytic mean of U(-5.12, 5.12) is 0; std of the sample mean at 1e5
        // draws is 5.12/sqrt(3)/sqrt(1e5) ~ 0.0093, so 0.05 is > 5 sigma.
        let b = Bounds::uniform(-5.12, 5.12, 3).unwrap();
        let mut rng = RngStream::from_seed(11);
        let n = 100_000;
        let mut sums = [0.0; 3];
        for _ in 0..n {
            let v = uniform_vector(&b, &mut rng);
            for k in 0..3 {
                sums[k] += v[k];
            }
        }
        for s in sums {
            assert!((s / n as f64).abs() < 0.05);
        }
    }

    proptest! {
        #[test]
        fn clamp_is_idempotent_and_contained(genes in prop::collection::vec(-100.0f64..100.0, 1..20)) {
            let b = b30(genes.len());
            let x = RealVector::new(genes);
            let once = clamp_to_bounds(&x, &b).unwrap();
            let twice = clamp_to_bounds(&once, &b).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!(b.contains(&once));
            for (g, c) in x.iter().zip(once.iter()) {
                if (-30.0..=30.0).contains(g) {
                    prop_assert_eq!(g, c);
                }
            }
        }

        #[test]
        fn uniform_vector_always_contained(seed in any::<u64>(), lo in -50.0f64..0.0, width in 0.001f64..100.0) {
            let b = Bounds::uniform(lo, lo + width, 8).unwrap();
            let v = uniform_vector(&b, &mut RngStream::from_seed(seed));
            prop_assert!(b.contains(&v));
        }
    }
}
