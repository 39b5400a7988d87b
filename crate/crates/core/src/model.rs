//! Sparse KSC model: reduced-set coefficients, bias terms, cluster prototypes
//! and out-of-sample assignment.

use std::collections::HashMap;
use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::eigen::{self, EigenBundle};
use crate::error::{KscError, Result, StageExt};
use crate::kernels::KernelSpec;
use crate::lowrank::{self, IcdResult};

const ROW_BLOCK: usize = 1024;
const REFINE_ITERATIONS: usize = 100;

/// How cluster membership is encoded in score space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// The `K` most frequent sign patterns; Hamming decoding.
    SignCodebook,
    /// `K` unit prototype directions; cosine decoding.
    Direction,
}

impl Encoding {
    pub fn name(self) -> &'static str {
        match self {
            Encoding::SignCodebook => "sign",
            Encoding::Direction => "direction",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sign" => Some(Encoding::SignCodebook),
            "direction" => Some(Encoding::Direction),
            _ => None,
        }
    }
}

/// Which approximation of the bias terms the model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiasVariant {
    /// `(λ̃ − 1) · 1ᵀ D̃ β̃ / N_tr`, from the low-rank factor of the whole
    /// training kernel matrix.
    #[default]
    Proposed,
    /// Weighted centring estimated on the reduced-set kernel matrix only.
    Original,
}

impl BiasVariant {
    pub fn name(self) -> &'static str {
        match self {
            BiasVariant::Proposed => "proposed",
            BiasVariant::Original => "original",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "proposed" => Some(BiasVariant::Proposed),
            "original" => Some(BiasVariant::Original),
            _ => None,
        }
    }
}

/// Score-space coordinates, one row per point and `K − 1` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub values: Mat<f64>,
}

impl ScoreMatrix {
    pub fn new(values: Mat<f64>) -> Self {
        ScoreMatrix { values }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != d) {
            return Err(KscError::DimensionMismatch {
                expected: d,
                found: bad.as_ref().len(),
            });
        }
        Ok(ScoreMatrix {
            values: Mat::from_fn(rows.len(), d, |i, j| rows[i].as_ref()[j]),
        })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.dim()).map(|j| self.values[(i, j)]).collect()
    }
}

/// `sign(0)` is `+`.
pub fn sign_pattern(row: &[f64]) -> Vec<i8> {
    row.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect()
}

fn hamming(a: &[i8], b: &[i8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
}

/// Cluster prototypes in score space.
#[derive(Debug, Clone, PartialEq)]
pub enum Prototypes {
    /// Distinct `±1` patterns of length `K − 1`.
    Codebook(Vec<Vec<i8>>),
    /// Unit-norm directions of length `K − 1`.
    Directions(Vec<Vec<f64>>),
}

impl Prototypes {
    pub fn encoding(&self) -> Encoding {
        match self {
            Prototypes::Codebook(_) => Encoding::SignCodebook,
            Prototypes::Directions(_) => Encoding::Direction,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Prototypes::Codebook(c) => c.len(),
            Prototypes::Directions(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nearest prototype of one score row; ties go to the lowest index.
    pub fn assign_row(&self, row: &[f64]) -> usize {
        match self {
            Prototypes::Codebook(codes) => {
                let s = sign_pattern(row);
                let mut best = (0, usize::MAX);
                for (k, c) in codes.iter().enumerate() {
                    let d = hamming(&s, c);
                    if d < best.1 {
                        best = (k, d);
                    }
                }
                best.0
            }
            Prototypes::Directions(dirs) => {
                let mut best = (0, f64::NEG_INFINITY);
                for (k, p) in dirs.iter().enumerate() {
                    let c = cosine(row, p);
                    if c > best.1 {
                        best = (k, c);
                    }
                }
                best.0
            }
        }
    }

    pub fn assign(&self, scores: &ScoreMatrix) -> Vec<usize> {
        (0..scores.len())
            .into_par_iter()
            .map(|i| self.assign_row(&scores.row(i)))
            .collect()
    }
}

/// The `K` most frequent sign patterns, most frequent first. Equal counts are
/// ordered by the first training row showing the pattern, which unlike the
/// pattern itself does not change when a score column is negated.
fn sign_codebook(scores: &ScoreMatrix, k_clusters: usize) -> Result<Vec<Vec<i8>>> {
    // pattern -> (count, first row)
    let mut counts: HashMap<Vec<i8>, (usize, usize)> = HashMap::new();
    for i in 0..scores.len() {
        counts
            .entry(sign_pattern(&scores.row(i)))
            .or_insert((0, i))
            .0 += 1;
    }
    if counts.len() < k_clusters {
        return Err(KscError::TooFewPatterns {
            found: counts.len(),
            requested: k_clusters,
        });
    }
    let mut ranked: Vec<(Vec<i8>, (usize, usize))> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));
    Ok(ranked
        .into_iter()
        .take(k_clusters)
        .map(|(p, _)| p)
        .collect())
}

fn normalized_mean(rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let d = rows.first()?.len();
    let mut m = vec![0.0; d];
    for r in rows {
        for (a, b) in m.iter_mut().zip(r) {
            *a += b;
        }
    }
    let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    (norm > 0.0).then(|| m.iter().map(|v| v / norm).collect())
}

/// Fits cluster prototypes to training scores.
///
/// Sign codebook: the `K` most frequent sign patterns. Direction: rows are
/// grouped by their nearest codebook pattern, each prototype is the
/// normalised group mean, and the grouping is then refined by cosine
/// reassignment until it no longer changes, so decoding the training scores
/// reproduces the grouping the prototypes were fitted on.
pub fn fit_prototypes(
    train_scores: &ScoreMatrix,
    encoding: Encoding,
    k_clusters: usize,
) -> Result<Prototypes> {
    if k_clusters < 2 {
        return Err(KscError::InvalidParameter(format!(
            "need at least 2 clusters, got {k_clusters}"
        )));
    }
    if train_scores.dim() != k_clusters - 1 {
        return Err(KscError::DimensionMismatch {
            expected: k_clusters - 1,
            found: train_scores.dim(),
        });
    }
    let codebook = sign_codebook(train_scores, k_clusters)?;
    if encoding == Encoding::SignCodebook {
        return Ok(Prototypes::Codebook(codebook));
    }

    let rows: Vec<Vec<f64>> = (0..train_scores.len())
        .map(|i| train_scores.row(i))
        .collect();
    let seeds = Prototypes::Codebook(codebook.clone());
    let mut labels: Vec<usize> = rows.iter().map(|r| seeds.assign_row(r)).collect();
    let mut dirs: Vec<Vec<f64>> = codebook
        .iter()
        .map(|c| {
            let n = (c.len() as f64).sqrt();
            c.iter().map(|&s| s as f64 / n).collect()
        })
        .collect();
    for _ in 0..REFINE_ITERATIONS {
        for (k, dir) in dirs.iter_mut().enumerate() {
            let members: Vec<Vec<f64>> = rows
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == k)
                .map(|(r, _)| r.clone())
                .collect();
            if let Some(m) = normalized_mean(&members) {
                *dir = m;
            }
        }
        let protos = Prototypes::Directions(dirs.clone());
        let next: Vec<usize> = rows.iter().map(|r| protos.assign_row(r)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    Ok(Prototypes::Directions(dirs))
}

/// Solves `K_RR ξ = rhs` by Cholesky, retrying once with a ridge of
/// `1e-10 · Tr(K_RR) / R` when the factorisation fails.
pub fn solve_reduced_system(k_rr: MatRef<'_, f64>, rhs: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let r = k_rr.nrows();
    if k_rr.ncols() != r {
        return Err(KscError::DimensionMismatch {
            expected: r,
            found: k_rr.ncols(),
        });
    }
    if rhs.nrows() != r {
        return Err(KscError::DimensionMismatch {
            expected: r,
            found: rhs.nrows(),
        });
    }
    if let Ok(llt) = k_rr.llt(Side::Lower) {
        return Ok(llt.solve(rhs));
    }
    let ridge = 1e-10 * (0..r).map(|i| k_rr[(i, i)]).sum::<f64>() / r as f64;
    let mut shifted = k_rr.to_owned();
    for i in 0..r {
        shifted[(i, i)] += ridge;
    }
    shifted
        .llt(Side::Lower)
        .map(|llt| llt.solve(rhs))
        .map_err(|e| KscError::Linalg {
            stage: "reduced-set system",
            detail: format!("cholesky failed even with ridge {ridge:e}: {e:?}"),
        })
}

/// Reduced-set coefficients `ξ` solving `K_RR ξ = K_RT β̃`.
pub fn solve_reduced_coefficients(
    k_rr: MatRef<'_, f64>,
    k_rt: MatRef<'_, f64>,
    betas: MatRef<'_, f64>,
) -> Result<Mat<f64>> {
    if k_rt.ncols() != betas.nrows() {
        return Err(KscError::DimensionMismatch {
            expected: k_rt.ncols(),
            found: betas.nrows(),
        });
    }
    let rhs = k_rt * betas;
    solve_reduced_system(k_rr, rhs.as_ref())
}

/// `K_RT β̃` without storing `K_RT`: each training point contributes its
/// kernel row against the reduced set. Blocks are summed in a fixed order.
fn reduced_rhs(
    kernel: &KernelSpec,
    reduced: &Dataset,
    train: &Dataset,
    betas: MatRef<'_, f64>,
) -> Mat<f64> {
    let r = reduced.len();
    let k = betas.ncols();
    let blocks: Vec<Mat<f64>> = (0..train.len().div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = Mat::<f64>::zeros(r, k);
            let mut krow = vec![0.0; r];
            for t in b * ROW_BLOCK..((b + 1) * ROW_BLOCK).min(train.len()) {
                let x = train.row(t);
                for (q, v) in krow.iter_mut().enumerate() {
                    *v = kernel.eval_unchecked(reduced.row(q), x);
                }
                for c in 0..k {
                    let bt = betas[(t, c)];
                    if bt != 0.0 {
                        for (q, v) in krow.iter().enumerate() {
                            acc[(q, c)] += v * bt;
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = Mat::<f64>::zeros(r, k);
    for b in &blocks {
        total += b;
    }
    total
}

/// `b̃⁽ᵏ⁾ = (λ̃⁽ᵏ⁾ − 1) · Σᵢ d̃ᵢ β̃ᵢ⁽ᵏ⁾ / N_tr`.
pub fn bias_terms_proposed(
    lambdas: &[f64],
    betas: MatRef<'_, f64>,
    degrees: &[f64],
    n_tr: usize,
) -> Result<Vec<f64>> {
    if betas.ncols() != lambdas.len() {
        return Err(KscError::DimensionMismatch {
            expected: lambdas.len(),
            found: betas.ncols(),
        });
    }
    if betas.nrows() != degrees.len() {
        return Err(KscError::DimensionMismatch {
            expected: degrees.len(),
            found: betas.nrows(),
        });
    }
    if n_tr == 0 {
        return Err(KscError::InvalidParameter("n_tr must be positive".into()));
    }
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(c, &lambda)| {
            let weighted: f64 = betas.col(c).iter().zip(degrees).map(|(b, d)| b * d).sum();
            (lambda - 1.0) * weighted / n_tr as f64
        })
        .collect())
}

/// `b̃⁽ᵏ⁾ = −1ᵀ D_R⁻¹ K_RR ξ⁽ᵏ⁾ / (1ᵀ D_R⁻¹ 1)` with `diag(D_R) = K_RR 1`: the
/// KKT bias evaluated on the reduced set only.
pub fn bias_terms_original(xi: MatRef<'_, f64>, k_rr: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let r = k_rr.nrows();
    if xi.nrows() != r || k_rr.ncols() != r {
        return Err(KscError::DimensionMismatch {
            expected: r,
            found: xi.nrows(),
        });
    }
    let degrees: Vec<f64> = (0..r).map(|i| k_rr.row(i).iter().sum()).collect();
    if let Some((index, &value)) = degrees
        .iter()
        .enumerate()
        .find(|(_, &d)| d.is_nan() || d <= 0.0)
    {
        return Err(KscError::ZeroDegree { index, value });
    }
    let inv: Vec<f64> = degrees.iter().map(|d| 1.0 / d).collect();
    let inv_total: f64 = inv.iter().sum();
    let kxi = k_rr * xi;
    Ok((0..xi.ncols())
        .map(|c| -kxi.col(c).iter().zip(&inv).map(|(a, w)| a * w).sum::<f64>() / inv_total)
        .collect())
}

/// Everything needed to cluster new points.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseKscModel {
    pub kernel: KernelSpec,
    pub k_clusters: usize,
    /// `R × d` reduced-set points.
    pub reduced_points: Dataset,
    /// `R × (K − 1)` reduced-set coefficients.
    pub xi: Mat<f64>,
    /// `K − 1` bias terms.
    pub bias: Vec<f64>,
    pub prototypes: Prototypes,
    pub bias_variant: BiasVariant,
    pub n_tr: usize,
    pub seed: u64,
}

impl SparseKscModel {
    pub fn rank(&self) -> usize {
        self.reduced_points.len()
    }

    pub fn encoding(&self) -> Encoding {
        self.prototypes.encoding()
    }

    pub fn dim(&self) -> usize {
        self.reduced_points.dim()
    }

    /// Approximated score variables `z̃(x) = Σ_r K(x, x̃_r) ξ_r + b̃`; cost
    /// `O(R (K − 1))` per point plus kernel evaluations.
    pub fn scores(&self, points: &Dataset) -> Result<ScoreMatrix> {
        if points.is_empty() {
            return Ok(ScoreMatrix::new(Mat::zeros(0, self.k_clusters - 1)));
        }
        points.check_dim(self.dim())?;
        self.kernel.validate(points)?;
        let k = self.k_clusters - 1;
        let r = self.rank();
        let rows: Vec<Vec<f64>> = (0..points.len().div_ceil(ROW_BLOCK))
            .into_par_iter()
            .map(|b| {
                let lo = b * ROW_BLOCK;
                let hi = ((b + 1) * ROW_BLOCK).min(points.len());
                let mut out = vec![0.0; (hi - lo) * k];
                for i in lo..hi {
                    let x = points.row(i);
                    let z = &mut out[(i - lo) * k..(i - lo + 1) * k];
                    z.copy_from_slice(&self.bias);
                    for q in 0..r {
                        let kv = self.kernel.eval_unchecked(x, self.reduced_points.row(q));
                        for (c, zc) in z.iter_mut().enumerate() {
                            *zc += kv * self.xi[(q, c)];
                        }
                    }
                }
                out
            })
            .collect();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Ok(ScoreMatrix::new(Mat::from_fn(points.len(), k, |i, c| {
            flat[i * k + c]
        })))
    }

    pub fn assign(&self, scores: &ScoreMatrix) -> Vec<usize> {
        self.prototypes.assign(scores)
    }

    /// Scores and decodes every row of `points`.
    pub fn predict(&self, points: &Dataset) -> Result<Vec<usize>> {
        Ok(self.assign(&self.scores(points)?))
    }
}

/// Training hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub k_clusters: usize,
    pub kernel: KernelSpec,
    pub eps_tol: f64,
    pub r_max: usize,
    /// Training subset size; rows are drawn uniformly without replacement.
    pub n_tr: usize,
    pub seed: u64,
    pub encoding: Encoding,
    pub bias_variant: BiasVariant,
}

impl TrainConfig {
    pub fn new(k_clusters: usize, kernel: KernelSpec, n_tr: usize) -> Self {
        TrainConfig {
            k_clusters,
            kernel,
            eps_tol: 1e-3,
            r_max: 500,
            n_tr,
            seed: 0,
            encoding: Encoding::SignCodebook,
            bias_variant: BiasVariant::Proposed,
        }
    }
}

/// Diagnostics collected while training.
#[derive(Debug, Clone)]
pub struct TrainDetails {
    /// Rows of the input used for training, ascending.
    pub train_indices: Vec<usize>,
    pub icd_rank: usize,
    pub eps_final: f64,
    pub lambdas: Vec<f64>,
    /// Labels of the training rows under the fitted prototypes.
    pub train_labels: Vec<usize>,
    pub icd_seconds: f64,
    pub seconds: f64,
}

/// Uniform sample of `n_tr` of `n` row indices (ascending). Uses every row,
/// without touching the generator, when `n_tr == n`.
pub fn sample_training_indices(n: usize, n_tr: usize, seed: u64) -> Result<Vec<usize>> {
    if n_tr == 0 || n_tr > n {
        return Err(KscError::InvalidParameter(format!(
            "training size {n_tr} must lie in [1, {n}]"
        )));
    }
    if n_tr == n {
        return Ok((0..n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, n_tr).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Leading `k` eigenpairs of the weighted-centred problem for a factor,
/// through the QR/small-SVD path.
pub fn eigenpairs_from_factor(g: MatRef<'_, f64>, k: usize) -> Result<EigenBundle> {
    let degrees = eigen::approx_degrees(g).stage("degrees")?;
    let mut x = g.to_owned();
    eigen::center_scale_in_place(x.as_mut(), &degrees).stage("center-scale")?;
    eigen::leading_eigenpairs_proposed_in_place(x, &degrees, k).stage("eigensolve")
}

/// Second half of training: from eigenpairs on `train` and the reduced set
/// (`pivots` into `train`) to a fitted model. Also returns the training
/// labels.
pub fn build_model(
    train: &Dataset,
    pivots: &[usize],
    bundle: &EigenBundle,
    cfg: &TrainConfig,
) -> Result<(SparseKscModel, Vec<usize>)> {
    let k = cfg.k_clusters - 1;
    if bundle.betas.ncols() != k || bundle.betas.nrows() != train.len() {
        return Err(KscError::DimensionMismatch {
            expected: k,
            found: bundle.betas.ncols(),
        });
    }
    let reduced = train.select(pivots)?;
    let k_rr = cfg
        .kernel
        .cross(&reduced, &reduced)
        .stage("reduced kernel")?;
    let rhs = reduced_rhs(&cfg.kernel, &reduced, train, bundle.betas.as_ref());
    let xi = solve_reduced_system(k_rr.as_ref(), rhs.as_ref()).stage("reduced coefficients")?;
    let bias = match cfg.bias_variant {
        BiasVariant::Proposed => bias_terms_proposed(
            &bundle.lambdas,
            bundle.betas.as_ref(),
            &bundle.degrees,
            train.len(),
        ),
        BiasVariant::Original => bias_terms_original(xi.as_ref(), k_rr.as_ref()),
    }
    .stage("bias")?;

    let mut model = SparseKscModel {
        kernel: cfg.kernel,
        k_clusters: cfg.k_clusters,
        reduced_points: reduced,
        xi,
        bias,
        prototypes: Prototypes::Codebook(Vec::new()),
        bias_variant: cfg.bias_variant,
        n_tr: train.len(),
        seed: cfg.seed,
    };
    let train_scores = model.scores(train).stage("training scores")?;
    model.prototypes =
        fit_prototypes(&train_scores, cfg.encoding, cfg.k_clusters).stage("prototypes")?;
    let labels = model.assign(&train_scores);
    Ok((model, labels))
}

fn check_config(n: usize, cfg: &TrainConfig) -> Result<()> {
    if cfg.k_clusters < 2 {
        return Err(KscError::InvalidParameter(format!(
            "need at least 2 clusters, got {}",
            cfg.k_clusters
        )));
    }
    if cfg.n_tr > n {
        return Err(KscError::InvalidParameter(format!(
            "training size {} exceeds the {} available rows",
            cfg.n_tr, n
        )));
    }
    if cfg.r_max == 0 {
        return Err(KscError::InvalidParameter("r_max must be positive".into()));
    }
    Ok(())
}

/// Trains on an already drawn training set.
pub fn train_on(train: &Dataset, cfg: &TrainConfig) -> Result<(SparseKscModel, TrainDetails)> {
    check_config(train.len(), cfg)?;
    let start = Instant::now();
    cfg.kernel.validate(train).stage("icd")?;
    let r_max = cfg.r_max.min(train.len());
    let icd = lowrank::icd(&cfg.kernel, train, cfg.eps_tol, r_max).stage("icd")?;
    let icd_seconds = start.elapsed().as_secs_f64();
    let (model, details) = train_from_icd(train, &icd, cfg)?;
    Ok((
        model,
        TrainDetails {
            icd_seconds,
            seconds: start.elapsed().as_secs_f64(),
            ..details
        },
    ))
}

/// Trains from a precomputed factorisation of `train`'s kernel matrix.
pub fn train_from_icd(
    train: &Dataset,
    icd: &IcdResult,
    cfg: &TrainConfig,
) -> Result<(SparseKscModel, TrainDetails)> {
    let start = Instant::now();
    let k = cfg.k_clusters - 1;
    if icd.rank() < k {
        return Err(KscError::InvalidParameter(format!(
            "low-rank factor has rank {} but {} eigenvectors are needed",
            icd.rank(),
            k
        ))
        .in_stage("eigensolve"));
    }
    let bundle = eigenpairs_from_factor(icd.g.as_ref(), k)?;
    let (model, train_labels) = build_model(train, &icd.pivots, &bundle, cfg)?;
    Ok((
        model,
        TrainDetails {
            train_indices: (0..train.len()).collect(),
            icd_rank: icd.rank(),
            eps_final: icd.eps_final,
            lambdas: bundle.lambdas,
            train_labels,
            icd_seconds: 0.0,
            seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Full training: subsample, factorise, eigensolve, build the sparse model.
pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<(SparseKscModel, TrainDetails)> {
    check_config(data.len(), cfg)?;
    let indices = sample_training_indices(data.len(), cfg.n_tr, cfg.seed)?;
    let subset = data.select(&indices)?;
    let (model, details) = train_on(&subset, cfg)?;
    Ok((
        model,
        TrainDetails {
            train_indices: indices,
            ..details
        },
    ))
}
