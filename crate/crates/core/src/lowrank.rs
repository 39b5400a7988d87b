//! Incomplete Cholesky decomposition of a kernel matrix with greedy symmetric
//! pivoting.
//!
//! The kernel matrix is never formed: each step evaluates one kernel column
//! against the chosen pivot and orthogonalises it against the columns already
//! in `G`. The pivots double as the reduced set of the sparse model.

use faer::prelude::{IntoConst, ReborrowMut};
use faer::{Mat, MatRef};
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{KscError, Result};
use crate::kernels::KernelSpec;

/// Residual diagonals at or below this value end the decomposition.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Largest instance the dense oracle accepts.
pub const DENSE_ORACLE_LIMIT: usize = 2000;

const ROW_BLOCK: usize = 4096;

#[derive(Debug, Clone)]
pub struct IcdResult {
    /// `N × R` factor with `GGᵀ ≈ Ω`.
    pub g: Mat<f64>,
    /// Selected rows, in selection order.
    pub pivots: Vec<usize>,
    /// Trace of the residual before each step and at termination (`R + 1`
    /// entries).
    pub residual_trace: Vec<f64>,
    /// Relative residual trace at termination.
    pub eps_final: f64,
}

impl IcdResult {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Keeps only the first `r` steps. Because pivoting is greedy, this is
    /// exactly what a run with `r_max = r` would have produced.
    pub fn truncated(&self, r: usize) -> IcdResult {
        let r = r.min(self.rank());
        let residual_trace = self.residual_trace[..=r].to_vec();
        IcdResult {
            g: self.g.subcols(0, r).to_owned(),
            pivots: self.pivots[..r].to_vec(),
            eps_final: residual_trace[r] / self.residual_trace[0],
            residual_trace,
        }
    }
}

fn argmax_lowest(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Pivoted incomplete Cholesky factorisation of the kernel matrix of `data`.
///
/// Stops when the relative residual trace `Tr(Ω − GGᵀ)/Tr(Ω)` is at most
/// `eps_tol`, when `r_max` columns exist, or when the largest residual
/// diagonal drops to [`PIVOT_FLOOR`] (numerically low rank). Ties between
/// equal residual diagonals go to the lowest row index. `eps_tol = 0` runs to
/// full numerical rank.
pub fn icd(spec: &KernelSpec, data: &Dataset, eps_tol: f64, r_max: usize) -> Result<IcdResult> {
    let n = data.len();
    if n == 0 {
        return Err(KscError::InvalidParameter(
            "cannot factor an empty dataset".into(),
        ));
    }
    if !(0.0..1.0).contains(&eps_tol) {
        return Err(KscError::InvalidParameter(format!(
            "eps_tol must lie in [0, 1), got {eps_tol}"
        )));
    }
    if r_max == 0 || r_max > n {
        return Err(KscError::InvalidParameter(format!(
            "r_max must lie in [1, {n}], got {r_max}"
        )));
    }
    spec.validate(data)?;

    let mut diag = spec.diagonal(data);
    if diag.iter().any(|v| !v.is_finite()) {
        return Err(KscError::NonFinite("kernel diagonal".into()));
    }
    let trace0: f64 = diag.iter().sum();
    let mut trace = trace0;
    let mut residual_trace = vec![trace0];
    let mut pivots = Vec::new();
    let mut g = Mat::<f64>::zeros(n, 0);
    let mut capacity = 0usize;

    while pivots.len() < r_max && trace / trace0 > eps_tol {
        let (p, dp) = argmax_lowest(&diag);
        if dp <= PIVOT_FLOOR {
            break;
        }
        let r = pivots.len();
        if r == capacity {
            capacity = (2 * capacity).max(16).min(r_max);
            g.reserve(n, capacity);
        }
        g.resize_with(n, r + 1, |_, _| 0.0);

        let (done, mut fresh) = g.as_mut().split_at_col_mut(r);
        let done = done.into_const();
        let col = fresh
            .rb_mut()
            .col_mut(0)
            .try_as_col_major_mut()
            .expect("column storage is contiguous")
            .as_slice_mut();
        spec.column_into(data, data.row(p), col);
        if col.iter().any(|v| !v.is_finite()) {
            return Err(KscError::NonFinite(format!("kernel column of pivot {p}")));
        }
        if r > 0 {
            let coeffs: Vec<f64> = done.row(p).iter().copied().collect();
            subtract_projection(col, done, &coeffs);
        }

        let scale = dp.sqrt();
        for v in col.iter_mut() {
            *v /= scale;
        }
        col[p] = scale;
        for &q in &pivots {
            col[q] = 0.0;
        }
        for (d, &v) in diag.iter_mut().zip(col.iter()) {
            *d = (*d - v * v).max(0.0);
        }
        diag[p] = 0.0;

        pivots.push(p);
        trace = diag.iter().sum();
        residual_trace.push(trace);
    }

    Ok(IcdResult {
        g,
        pivots,
        eps_final: trace / trace0,
        residual_trace,
    })
}

/// `col -= done · coeffs`, one column at a time in ascending order, so every
/// entry is reduced in the same order as the right-looking dense update and
/// the result does not depend on the number of threads.
fn subtract_projection(col: &mut [f64], done: MatRef<'_, f64>, coeffs: &[f64]) {
    col.par_chunks_mut(ROW_BLOCK)
        .enumerate()
        .for_each(|(b, chunk)| {
            let start = b * ROW_BLOCK;
            for (k, &c) in coeffs.iter().enumerate() {
                let src = &done
                    .col(k)
                    .try_as_col_major()
                    .expect("column storage is contiguous")
                    .as_slice()[start..start + chunk.len()];
                for (d, &g) in chunk.iter_mut().zip(src) {
                    *d -= g * c;
                }
            }
        });
}

/// Dense reference: materialises `Ω` and runs right-looking pivoted Cholesky
/// with the same greedy rule, floor and tie-breaking, to full numerical rank.
pub fn dense_pivoted_cholesky_oracle(spec: &KernelSpec, data: &Dataset) -> Result<IcdResult> {
    let n = data.len();
    if n > DENSE_ORACLE_LIMIT {
        return Err(KscError::GuardExceeded {
            size: n,
            limit: DENSE_ORACLE_LIMIT,
        });
    }
    if n == 0 {
        return Err(KscError::InvalidParameter(
            "cannot factor an empty dataset".into(),
        ));
    }
    let mut a = spec.cross(data, data)?;
    let trace0: f64 = (0..n).map(|i| a[(i, i)]).sum();
    let mut residual_trace = vec![trace0];
    let mut pivots: Vec<usize> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    loop {
        if pivots.len() == n {
            break;
        }
        let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        let (p, dp) = argmax_lowest(&diag);
        if dp <= PIVOT_FLOOR {
            break;
        }
        let s = dp.sqrt();
        let mut c: Vec<f64> = (0..n).map(|i| a[(i, p)] / s).collect();
        c[p] = s;
        for &q in &pivots {
            c[q] = 0.0;
        }
        for j in 0..n {
            for i in 0..n {
                a[(i, j)] -= c[i] * c[j];
            }
        }
        for i in 0..n {
            if a[(i, i)] < 0.0 {
                a[(i, i)] = 0.0;
            }
        }
        a[(p, p)] = 0.0;
        pivots.push(p);
        cols.push(c);
        residual_trace.push((0..n).map(|i| a[(i, i)]).sum());
    }
    let r = pivots.len();
    let g = Mat::from_fn(n, r, |i, j| cols[j][i]);
    Ok(IcdResult {
        g,
        pivots,
        eps_final: residual_trace[r] / trace0,
        residual_trace,
    })
}
