//! Leading eigenpairs of the weighted-centred low-rank problem
//! `D̃⁻¹ M_D̃ G Gᵀ β = λ β`, where `diag(D̃) = G Gᵀ 1` and
//! `M_D̃ = I − 1 1ᵀ D̃⁻¹ / (1ᵀ D̃⁻¹ 1)`.
//!
//! The production path symmetrises the problem: with
//! `X = D̃^{-1/2} M_D̃ G = Q R`, the eigenvectors of `X Xᵀ` are `Q U` for the
//! SVD `R = U Σ Vᵀ` of the small triangular factor, eigenvalues `Σ²`, and
//! `β = D̃^{-1/2} Q U`. Only the thin factor is ever touched; `Q` is never
//! formed explicitly.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::householder::{
    apply_block_householder_sequence_on_the_left_in_place_scratch,
    apply_block_householder_sequence_on_the_left_in_place_with_conj,
};
use faer::linalg::qr::no_pivoting::factor::{
    qr_in_place, qr_in_place_scratch, recommended_block_size,
};
use faer::prelude::{Reborrow, ReborrowMut};
use faer::{Conj, Mat, MatRef};

use crate::error::{KscError, Result};

/// Degrees at or below this value make `D̃^{-1/2}` undefined.
pub const DEGREE_FLOOR: f64 = 1e-12;

/// Largest training set the reference path accepts.
pub const ORIGINAL_PATH_LIMIT: usize = 5000;

/// Leading approximated eigenpairs and the degrees they were computed with.
#[derive(Debug, Clone)]
pub struct EigenBundle {
    /// `N × k` matrix, one eigenvector per column.
    pub betas: Mat<f64>,
    /// Eigenvalues, non-increasing.
    pub lambdas: Vec<f64>,
    /// Approximated degrees `diag(D̃)`.
    pub degrees: Vec<f64>,
    pub k_requested: usize,
}

/// `diag(D̃) = G (Gᵀ 1)` in `O(N R)`.
pub fn approx_degrees(g: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if g.nrows() == 0 || g.ncols() == 0 {
        return Err(KscError::InvalidParameter("empty low-rank factor".into()));
    }
    let col_sums: Vec<f64> = (0..g.ncols()).map(|c| g.col(c).iter().sum()).collect();
    let mut degrees = vec![0.0; g.nrows()];
    for (c, &s) in col_sums.iter().enumerate() {
        for (d, &v) in degrees.iter_mut().zip(g.col(c).iter()) {
            *d += v * s;
        }
    }
    if let Some((index, &value)) = degrees
        .iter()
        .enumerate()
        .find(|(_, &d)| d.is_nan() || d <= DEGREE_FLOOR)
    {
        return Err(KscError::ZeroDegree { index, value });
    }
    Ok(degrees)
}

fn check_degrees(degrees: &[f64], n: usize) -> Result<()> {
    if degrees.len() != n {
        return Err(KscError::DimensionMismatch {
            expected: n,
            found: degrees.len(),
        });
    }
    if let Some((index, &value)) = degrees
        .iter()
        .enumerate()
        .find(|(_, &d)| d.is_nan() || d <= 0.0)
    {
        return Err(KscError::ZeroDegree { index, value });
    }
    Ok(())
}

/// Overwrites `G` with `X = D̃^{-1/2} M_D̃ G`: each column loses its
/// `1/d̃ᵢ`-weighted mean and row `i` is scaled by `d̃ᵢ^{-1/2}`.
pub fn center_scale_in_place(mut g: faer::MatMut<'_, f64>, degrees: &[f64]) -> Result<()> {
    check_degrees(degrees, g.nrows())?;
    let inv: Vec<f64> = degrees.iter().map(|d| 1.0 / d).collect();
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let inv_total: f64 = inv.iter().sum();
    for c in 0..g.ncols() {
        let col = g.rb_mut().col_mut(c);
        let mean = col.rb().iter().zip(&inv).map(|(v, w)| v * w).sum::<f64>() / inv_total;
        for (v, s) in col.iter_mut().zip(&inv_sqrt) {
            *v = (*v - mean) * s;
        }
    }
    Ok(())
}

/// Copying variant of [`center_scale_in_place`].
pub fn center_scale(g: MatRef<'_, f64>, degrees: &[f64]) -> Result<Mat<f64>> {
    let mut x = g.to_owned();
    center_scale_in_place(x.as_mut(), degrees)?;
    Ok(x)
}

/// Flips each column so its largest-magnitude entry (lowest index on ties) is
/// positive.
pub(crate) fn apply_sign_convention(mut m: faer::MatMut<'_, f64>) {
    for c in 0..m.ncols() {
        let mut best = (0usize, -1.0f64);
        for (i, v) in m.rb().col(c).iter().enumerate() {
            if v.abs() > best.1 {
                best = (i, v.abs());
            }
        }
        if m[(best.0, c)] < 0.0 {
            for v in m.rb_mut().col_mut(c).iter_mut() {
                *v = -*v;
            }
        }
    }
}

fn check_k(k: usize, r: usize) -> Result<()> {
    if k == 0 || k > r {
        return Err(KscError::InvalidParameter(format!(
            "requested {k} eigenpairs from a rank-{r} factor"
        )));
    }
    Ok(())
}

/// Leading `k` eigenpairs from `X = D̃^{-1/2} M_D̃ G`, consuming `X` as QR
/// workspace: thin Householder QR in place, SVD of the `R × R` triangular
/// factor, then the Householder sequence is applied to the leading left
/// singular vectors to produce `α = Q U`.
pub fn leading_eigenpairs_proposed_in_place(
    mut x: Mat<f64>,
    degrees: &[f64],
    k: usize,
) -> Result<EigenBundle> {
    let (n, r) = x.shape();
    check_k(k, r)?;
    check_degrees(degrees, n)?;
    if n < r {
        return Err(KscError::InvalidParameter(format!(
            "factor has more columns ({r}) than rows ({n})"
        )));
    }
    let par = faer::get_global_parallelism();

    let block = recommended_block_size::<f64>(n, r);
    let mut coeff = Mat::<f64>::zeros(block, r);
    qr_in_place(
        x.as_mut(),
        coeff.as_mut(),
        par,
        MemStack::new(&mut MemBuffer::new(qr_in_place_scratch::<f64>(
            n,
            r,
            block,
            par,
            Default::default(),
        ))),
        Default::default(),
    );

    let rx = Mat::from_fn(r, r, |i, j| if i <= j { x[(i, j)] } else { 0.0 });
    for j in 0..r {
        x[(j, j)] = 1.0;
        for i in 0..j {
            x[(i, j)] = 0.0;
        }
    }

    let svd = rx.svd().map_err(|e| KscError::Linalg {
        stage: "svd of the triangular factor",
        detail: format!("{e:?}"),
    })?;
    let u = svd.U();
    let sigma = svd.S().column_vector();

    let mut alpha = Mat::<f64>::zeros(n, k);
    alpha
        .as_mut()
        .submatrix_mut(0, 0, r, k)
        .copy_from(u.subcols(0, k));
    apply_block_householder_sequence_on_the_left_in_place_with_conj(
        x.as_ref(),
        coeff.as_ref(),
        Conj::No,
        alpha.as_mut(),
        par,
        MemStack::new(&mut MemBuffer::new(
            apply_block_householder_sequence_on_the_left_in_place_scratch::<f64>(n, block, k),
        )),
    );
    drop(x);

    for (i, d) in degrees.iter().enumerate() {
        let s = 1.0 / d.sqrt();
        for c in 0..k {
            alpha[(i, c)] *= s;
        }
    }
    apply_sign_convention(alpha.as_mut());

    Ok(EigenBundle {
        betas: alpha,
        lambdas: (0..k).map(|j| sigma[j] * sigma[j]).collect(),
        degrees: degrees.to_vec(),
        k_requested: k,
    })
}

/// Copying variant of [`leading_eigenpairs_proposed_in_place`].
pub fn leading_eigenpairs_proposed(
    x: MatRef<'_, f64>,
    degrees: &[f64],
    k: usize,
) -> Result<EigenBundle> {
    leading_eigenpairs_proposed_in_place(x.to_owned(), degrees, k)
}

/// Reference path through the SVD of the full factor `G = U Λ Vᵀ` and the
/// non-symmetric `R × R` problem `Uᵀ D̃⁻¹ M_D̃ U Λ² γ = λ γ`.
///
/// That reduced problem has exactly the nonzero eigenvalues of the full one
/// (`γ = Uᵀβ`), but `Uγ` is only the projection of `β` onto `range(G)`. The
/// eigenvectors are therefore lifted with the eigenrelation itself,
/// `β = D̃⁻¹ M_D̃ U Λ² γ / λ`, and fall back to `Uγ` for vanishing `λ`.
/// Output normalisation and signs follow the production path.
pub fn leading_eigenpairs_original(
    g: MatRef<'_, f64>,
    degrees: &[f64],
    k: usize,
) -> Result<EigenBundle> {
    let (n, r) = g.shape();
    check_k(k, r)?;
    check_degrees(degrees, n)?;
    if n > ORIGINAL_PATH_LIMIT {
        return Err(KscError::GuardExceeded {
            size: n,
            limit: ORIGINAL_PATH_LIMIT,
        });
    }
    let svd = g.thin_svd().map_err(|e| KscError::Linalg {
        stage: "svd of the low-rank factor",
        detail: format!("{e:?}"),
    })?;
    let u = svd.U();
    let lam: Vec<f64> = svd.S().column_vector().iter().copied().collect();

    let inv: Vec<f64> = degrees.iter().map(|d| 1.0 / d).collect();
    let inv_total: f64 = inv.iter().sum();
    // w = Uᵀ D̃⁻¹ 1, B = Uᵀ D̃⁻¹ U − w wᵀ / (1ᵀ D̃⁻¹ 1)
    let w: Vec<f64> = (0..r)
        .map(|a| u.col(a).iter().zip(&inv).map(|(x, y)| x * y).sum())
        .collect();
    let a = Mat::from_fn(r, r, |i, j| {
        let mut s = 0.0;
        for t in 0..n {
            s += u[(t, i)] * inv[t] * u[(t, j)];
        }
        (s - w[i] * w[j] / inv_total) * lam[j] * lam[j]
    });

    let evd = a.eigen().map_err(|e| KscError::Linalg {
        stage: "eigendecomposition of the reduced problem",
        detail: format!("{e:?}"),
    })?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let scale = values.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
    let mut order: Vec<usize> = (0..r).collect();
    for &i in &order {
        if values[i].im.abs() > 1e-10 * scale {
            return Err(KscError::Linalg {
                stage: "eigendecomposition of the reduced problem",
                detail: format!("complex eigenvalue {} + {}i", values[i].re, values[i].im),
            });
        }
    }
    order.sort_by(|&i, &j| values[j].re.total_cmp(&values[i].re).then(i.cmp(&j)));

    let mut betas = Mat::<f64>::zeros(n, k);
    let mut lambdas = Vec::with_capacity(k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let lambda = values[idx].re;
        // undo the arbitrary complex phase of the eigenvector
        let col = vectors.col(idx);
        let pivot = (0..r)
            .max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm()))
            .unwrap_or(0);
        let phase = col[pivot] / col[pivot].norm();
        let gamma: Vec<f64> = (0..r).map(|i| (col[i] / phase).re).collect();

        let ug: Vec<f64> = (0..n)
            .map(|t| (0..r).map(|i| u[(t, i)] * gamma[i]).sum())
            .collect();
        let beta: Vec<f64> = if lambda.abs() > 1e-12 * scale {
            let y: Vec<f64> = (0..n)
                .map(|t| (0..r).map(|i| u[(t, i)] * lam[i] * lam[i] * gamma[i]).sum())
                .collect();
            let mean = y.iter().zip(&inv).map(|(a, b)| a * b).sum::<f64>() / inv_total;
            y.iter()
                .zip(&inv)
                .map(|(v, di)| (v - mean) * di / lambda)
                .collect()
        } else {
            ug
        };
        let norm = beta
            .iter()
            .zip(degrees)
            .map(|(b, d)| b * b * d)
            .sum::<f64>()
            .sqrt();
        let norm = if norm > 0.0 { norm } else { 1.0 };
        for (t, b) in beta.iter().enumerate() {
            betas[(t, c)] = b / norm;
        }
        lambdas.push(lambda.max(0.0));
    }
    apply_sign_convention(betas.as_mut());
    Ok(EigenBundle {
        betas,
        lambdas,
        degrees: degrees.to_vec(),
        k_requested: k,
    })
}
