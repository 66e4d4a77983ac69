//! Error functionals between true and estimated fields.

use crate::error::{Error, Result};
use crate::field::Field;

/// How a field-wide relative error is formed.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum ErrorFormula {
    /// `Σ|truth − estimate| / Σ|truth|`.
    #[default]
    L1Relative,
    /// Mean of `|truth − estimate| / (|truth| + eps)`.
    PerCell { eps: f64 },
}

/// `Σ|truth − estimate| / Σ|truth|`.
pub fn global_relative_error(truth: &Field, estimate: &Field) -> Result<f64> {
    relative_error(truth, estimate, ErrorFormula::L1Relative)
}

pub fn relative_error(truth: &Field, estimate: &Field, formula: ErrorFormula) -> Result<f64> {
    truth.check_shape(estimate)?;
    let pairs = truth.values().iter().zip(estimate.values());
    match formula {
        ErrorFormula::L1Relative => {
            let scale: f64 = truth.values().iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                return Err(Error::InvalidArgument(
                    "relative error against an all-zero truth".into(),
                ));
            }
            Ok(pairs.map(|(a, b)| (a - b).abs()).sum::<f64>() / scale)
        }
        ErrorFormula::PerCell { eps } => {
            let n = truth.values().len() as f64;
            Ok(pairs.map(|(a, b)| (a - b).abs() / (a.abs() + eps)).sum::<f64>() / n)
        }
    }
}

/// Relative errors recorded over a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub p: Vec<f64>,
    pub z: Vec<f64>,
    /// Against the parameter fields the drive actually uses.
    pub k: Vec<f64>,
    pub m: Vec<f64>,
    /// Against the parameter fields before noise was added.
    pub k_clean: Vec<f64>,
    pub m_clean: Vec<f64>,
}

/// One row of an [`ErrorSeries`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSample {
    pub t: f64,
    pub p: f64,
    pub z: f64,
    pub k: f64,
    pub m: f64,
    pub k_clean: f64,
    pub m_clean: f64,
}

impl ErrorSample {
    /// Largest of the four estimate errors.
    pub fn worst(&self) -> f64 {
        self.p.max(self.z).max(self.k).max(self.m)
    }
}

impl ErrorSeries {
    pub const COLUMNS: [&'static str; 7] = ["t", "err_p", "err_z", "err_k", "err_m", "err_k_clean", "err_m_clean"];

    pub fn push(&mut self, s: ErrorSample) {
        self.times.push(s.t);
        self.p.push(s.p);
        self.z.push(s.z);
        self.k.push(s.k);
        self.m.push(s.m);
        self.k_clean.push(s.k_clean);
        self.m_clean.push(s.m_clean);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<ErrorSample> {
        (i < self.len()).then(|| ErrorSample {
            t: self.times[i],
            p: self.p[i],
            z: self.z[i],
            k: self.k[i],
            m: self.m[i],
            k_clean: self.k_clean[i],
            m_clean: self.m_clean[i],
        })
    }

    pub fn last(&self) -> Option<ErrorSample> {
        self.len().checked_sub(1).and_then(|i| self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = ErrorSample> + '_ {
        (0..self.len()).filter_map(|i| self.get(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    fn g() -> GridSpec {
        GridSpec::with_default_steps(4, 3).unwrap()
    }

    #[test]
    fn examples() {
        let t = Field::from_fn(g(), |i, j| 0.1 + (i + j) as f64);
        assert_eq!(global_relative_error(&t, &t).unwrap(), 0.0);
        assert_eq!(global_relative_error(&t, &Field::zeros(g())).unwrap(), 1.0);
        let two = Field::constant(g(), 2.0);
        let one = Field::constant(g(), 1.0);
        assert_eq!(global_relative_error(&two, &one).unwrap(), 0.5);
    }

    #[test]
    fn zero_truth_rejected() {
        let z = Field::zeros(g());
        assert!(global_relative_error(&z, &z).is_err());
        assert_eq!(
            relative_error(&z, &z, ErrorFormula::PerCell { eps: 1e-12 }).unwrap(),
            0.0
        );
    }

    #[test]
    fn per_cell_formula() {
        let two = Field::constant(g(), 2.0);
        let one = Field::constant(g(), 1.0);
        let e = relative_error(&two, &one, ErrorFormula::PerCell { eps: 0.0 }).unwrap();
        assert_eq!(e, 0.5);
    }

    #[test]
    fn series_rows() {
        let mut s = ErrorSeries::default();
        assert!(s.last().is_none());
        let row = ErrorSample {
            t: 1.0,
            p: 0.1,
            z: 0.2,
            k: 0.3,
            m: 0.05,
            k_clean: 0.3,
            m_clean: 0.05,
        };
        s.push(row);
        assert_eq!(s.last(), Some(row));
        assert_eq!(row.worst(), 0.3);
    }
}
