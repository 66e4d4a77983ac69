use super::laplacian::{coupling_from_weights, Role, SparseLaplacian};
use crate::error::{Error, Result};
use crate::occlusion::CloudMask;

/// Average of the switching coupling Laplacian over a set of cloud samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedLaplacian {
    pub l2: SparseLaplacian,
    /// Probability that each cell is occluded.
    pub occlusion_probability: Vec<f64>,
    pub samples: usize,
}

impl ExpectedLaplacian {
    /// Mean drive-response coupling weight per response row.
    pub fn coupling_weights(&self) -> Vec<f64> {
        self.occlusion_probability.iter().map(|p| 1.0 - p).collect()
    }

    pub fn mean_coupling_weight(&self) -> f64 {
        let w = self.coupling_weights();
        w.iter().sum::<f64>() / w.len() as f64
    }
}

/// Entrywise mean of the coupling Laplacian over `masks`.
pub fn expected_laplacian(masks: &[CloudMask]) -> Result<ExpectedLaplacian> {
    let first = masks.first().ok_or(Error::EmptySamples)?;
    let n = first.grid().len();
    let mut hidden = vec![0u64; n];
    for m in masks {
        if m.cells().len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: m.cells().len(),
            });
        }
        for (h, &b) in hidden.iter_mut().zip(m.cells()) {
            *h += u64::from(b);
        }
    }
    let total = masks.len() as f64;
    let occlusion_probability: Vec<f64> = hidden.iter().map(|&h| h as f64 / total).collect();
    let weights: Vec<f64> = occlusion_probability.iter().map(|p| 1.0 - p).collect();
    Ok(ExpectedLaplacian {
        l2: coupling_from_weights(Role::Expected, &weights),
        occlusion_probability,
        samples: masks.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use crate::netanalysis::laplacian::build_l2;

    #[test]
    fn identical_samples() {
        let g = GridSpec::with_default_steps(4, 3).unwrap();
        let m = CloudMask::from_fn(g, |i, j| i == j);
        let e = expected_laplacian(&[m.clone(), m.clone(), m.clone()]).unwrap();
        assert_eq!(e.l2.to_dense(), build_l2(&m).to_dense());
    }

    #[test]
    fn complement_halves() {
        let g = GridSpec::with_default_steps(4, 3).unwrap();
        let a = CloudMask::from_fn(g, |i, _| i < 2);
        let b = CloudMask::from_fn(g, |i, _| i >= 2);
        let e = expected_laplacian(&[a, b]).unwrap();
        let n = g.len();
        for q in 0..n {
            assert_eq!(e.l2.get(n + q, q), 0.5);
            assert_eq!(e.l2.get(n + q, n + q), -0.5);
        }
        assert!(e.l2.row_sums().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(expected_laplacian(&[]), Err(Error::EmptySamples)));
    }
}
