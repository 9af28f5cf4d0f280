//! Truncated-power spline design matrices.
//!
//! Each raw predictor x contributes k+1 columns: x itself plus the hinges
//! (x - w_1)_+, …, (x - w_k)_+ for a shared ascending knot vector w. The full
//! design is laid out block-by-basis (all linear columns, then all columns
//! for w_1, and so on); per-predictor column groups are gathered on demand.
//! Predictors are assumed centered by the caller, so there is no intercept
//! column. With k = 0 the design degenerates to plain linear regression.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sampler::InclusionVector;

/// Shared knot vector and predictor count for a truncated-power basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasis {
    knots: Vec<f64>,
    predictor_count: usize,
}

impl SplineBasis {
    pub fn new(predictor_count: usize, knots: Vec<f64>) -> Result<Self> {
        for w in knots.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::invalid_argument(
                    "knots must be strictly increasing",
                ));
            }
        }
        if knots.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid_argument("knots must be finite"));
        }
        Ok(SplineBasis {
            knots,
            predictor_count,
        })
    }

    /// `k` interior knots dividing `(lo, hi)` evenly into k+1 intervals.
    pub fn with_even_knots(predictor_count: usize, k: usize, lo: f64, hi: f64) -> Result<Self> {
        if lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid_argument(format!(
                "knot range ({lo}, {hi}) is not a finite interval"
            )));
        }
        let knots = (1..=k)
            .map(|i| lo + (hi - lo) * i as f64 / (k as f64 + 1.0))
            .collect();
        Self::new(predictor_count, knots)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot_count(&self) -> usize {
        self.knots.len()
    }

    pub fn predictor_count(&self) -> usize {
        self.predictor_count
    }

    /// Columns contributed per predictor, k + 1.
    pub fn group_size(&self) -> usize {
        self.knots.len() + 1
    }

    /// Basis functions evaluated at a single point: [x, (x-w_1)_+, …].
    pub fn evaluate(&self, x: f64) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.group_size());
        row.push(x);
        row.extend(self.knots.iter().map(|&w| (x - w).max(0.0)));
        row
    }
}

/// The n x p(k+1) spline design matrix U.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    basis: SplineBasis,
}

impl DesignMatrix {
    /// Builds U from raw predictors, one row per sample. Centering is the
    /// caller's contract; entries must be finite.
    pub fn build(x: &DMatrix<f64>, basis: SplineBasis) -> Result<Self> {
        if x.ncols() != basis.predictor_count() {
            return Err(Error::invalid_argument(format!(
                "predictor matrix has {} columns, basis expects {}",
                x.ncols(),
                basis.predictor_count()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_argument(
                "predictor matrix contains non-finite entries",
            ));
        }
        let n = x.nrows();
        let p = basis.predictor_count();
        let k = basis.knot_count();
        let mut values = DMatrix::zeros(n, p * (k + 1));
        for r in 0..n {
            for i in 0..p {
                let xi = x[(r, i)];
                values[(r, i)] = xi;
                for (s, &w) in basis.knots().iter().enumerate() {
                    values[(r, (s + 1) * p + i)] = (xi - w).max(0.0);
                }
            }
        }
        Ok(DesignMatrix { values, basis })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn basis(&self) -> &SplineBasis {
        &self.basis
    }

    pub fn sample_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn predictor_count(&self) -> usize {
        self.basis.predictor_count()
    }

    /// Column indices of predictor `i`, in basis order s = 0..k.
    pub fn column_group(&self, predictor: usize) -> Vec<usize> {
        let p = self.basis.predictor_count();
        (0..self.basis.group_size())
            .map(|s| s * p + predictor)
            .collect()
    }

    /// Column indices selected by γ: groups of included predictors
    /// concatenated in ascending predictor order, basis order within each.
    pub fn gamma_columns(&self, gamma: &InclusionVector) -> Vec<usize> {
        let mut cols = Vec::with_capacity(gamma.count() * self.basis.group_size());
        for i in gamma.included() {
            cols.extend(self.column_group(i));
        }
        cols
    }

    /// U_γ, the n x p_γ(k+1) submatrix for the included predictors. Empty
    /// selections yield an n x 0 matrix.
    pub fn select_columns(&self, gamma: &InclusionVector) -> DMatrix<f64> {
        let cols = self.gamma_columns(gamma);
        let n = self.values.nrows();
        let mut out = DMatrix::zeros(n, cols.len());
        for (dst, &src) in cols.iter().enumerate() {
            out.set_column(dst, &self.values.column(src));
        }
        out
    }
}
