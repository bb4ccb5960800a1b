//! Seeded random probe vectors for validating certificates and bounds.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Default seed of every probe set.
pub const PROBE_SEED: u64 = 0x5EED;

/// Default probe count.
pub const PROBE_COUNT: usize = 100;

/// Unit-norm complex Gaussian vectors.
#[derive(Debug, Clone)]
pub struct ProbeSet {
    vectors: Vec<DVector<Complex64>>,
}

impl ProbeSet {
    pub fn gaussian(dim: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors = (0..count)
            .map(|_| {
                let v = DVector::from_fn(dim, |_, _| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                });
                let norm = v.norm();
                v / Complex64::from(norm)
            })
            .collect();
        Self { vectors }
    }

    pub fn standard(dim: usize) -> Self {
        Self::gaussian(dim, PROBE_COUNT, PROBE_SEED)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DVector<Complex64>> {
        self.vectors.iter()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn into_vectors(self) -> Vec<DVector<Complex64>> {
        self.vectors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_normalized() {
        let a = ProbeSet::gaussian(7, 3, 42);
        let b = ProbeSet::gaussian(7, 3, 42);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x, y);
            assert!((x.norm() - 1.0).abs() < 1e-14);
        }
        assert_ne!(
            ProbeSet::gaussian(7, 1, 43).into_vectors()[0],
            a.into_vectors()[0]
        );
        assert_eq!(ProbeSet::standard(4).len(), PROBE_COUNT);
    }
}
