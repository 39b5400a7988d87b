//! Positive-definite kernels on feature rows.
//!
//! The RBF kernel is `exp(-‖x − y‖² / γ)` with `γ` in the denominator as is,
//! **not** the `2σ²` convention used by many other libraries. The chi-square
//! kernel is `exp(-χ²/σ)` with `χ² = ½ Σ (xₗ − yₗ)² / (xₗ + yₗ)`; bins that are
//! empty in both histograms contribute zero.

use faer::Mat;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{KscError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Rbf,
    ChiSquare,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Rbf => "rbf",
            KernelKind::ChiSquare => "chi2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rbf" => Some(KernelKind::Rbf),
            "chi2" | "chi-square" | "chisquare" => Some(KernelKind::ChiSquare),
            _ => None,
        }
    }
}

/// A kernel together with its bandwidth parameter (`γ` for RBF, `σ_χ²` for
/// chi-square).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    param: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, param: f64) -> Result<Self> {
        if !(param > 0.0 && param.is_finite()) {
            return Err(KscError::InvalidParameter(format!(
                "kernel parameter must be positive and finite, got {param}"
            )));
        }
        Ok(KernelSpec { kind, param })
    }

    pub fn rbf(gamma: f64) -> Result<Self> {
        Self::new(KernelKind::Rbf, gamma)
    }

    pub fn chi_square(sigma: f64) -> Result<Self> {
        Self::new(KernelKind::ChiSquare, sigma)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    /// Checked evaluation of a single pair.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(KscError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if self.kind == KernelKind::ChiSquare {
            check_nonnegative(x)?;
            check_nonnegative(y)?;
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Evaluation without dimension or sign checks; callers validate inputs
    /// once up front (see [`KernelSpec::validate`]).
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match self.kind {
            KernelKind::Rbf => {
                let mut d2 = 0.0;
                for (a, b) in x.iter().zip(y) {
                    let t = a - b;
                    d2 += t * t;
                }
                (-d2 / self.param).exp()
            }
            KernelKind::ChiSquare => {
                let mut chi = 0.0;
                for (a, b) in x.iter().zip(y) {
                    let s = a + b;
                    if s > 0.0 {
                        let t = a - b;
                        chi += t * t / s;
                    }
                }
                (-0.5 * chi / self.param).exp()
            }
        }
    }

    /// Rejects data the kernel is not defined on.
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.kind == KernelKind::ChiSquare {
            check_nonnegative(data.values())?;
        }
        Ok(())
    }

    /// `K(xᵢ, x_j)` for every row `i`.
    pub fn column(&self, data: &Dataset, j: usize) -> Result<Vec<f64>> {
        if j >= data.len() {
            return Err(KscError::IndexOutOfRange {
                index: j,
                len: data.len(),
            });
        }
        self.validate(data)?;
        let mut out = vec![0.0; data.len()];
        self.column_into(data, data.row(j), &mut out);
        Ok(out)
    }

    /// Kernel values of every row of `data` against `pivot`, written into
    /// `out`. Rows are processed in fixed-size blocks so the output does not
    /// depend on the thread count.
    pub(crate) fn column_into(&self, data: &Dataset, pivot: &[f64], out: &mut [f64]) {
        const BLOCK: usize = 4096;
        out.par_chunks_mut(BLOCK)
            .enumerate()
            .for_each(|(b, chunk)| {
                let start = b * BLOCK;
                for (i, o) in chunk.iter_mut().enumerate() {
                    *o = self.eval_unchecked(data.row(start + i), pivot);
                }
            });
    }

    /// The `|A| × |B|` kernel matrix between two datasets.
    pub fn cross(&self, a: &Dataset, b: &Dataset) -> Result<Mat<f64>> {
        if a.dim() != b.dim() {
            return Err(KscError::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        self.validate(a)?;
        self.validate(b)?;
        let mut m = Mat::<f64>::zeros(a.len(), b.len());
        for j in 0..b.len() {
            let col = m.col_as_slice_mut(j);
            self.column_into(a, b.row(j), col);
        }
        Ok(m)
    }

    /// Diagonal `K(xᵢ, xᵢ)`; identically one for both supported kernels but
    /// evaluated so the low-rank code does not rely on it.
    pub fn diagonal(&self, data: &Dataset) -> Vec<f64> {
        data.rows().map(|r| self.eval_unchecked(r, r)).collect()
    }
}

fn check_nonnegative(v: &[f64]) -> Result<()> {
    match v.iter().position(|&x| x < 0.0) {
        Some(position) => Err(KscError::NegativeHistogram {
            position,
            value: v[position],
        }),
        None => Ok(()),
    }
}
