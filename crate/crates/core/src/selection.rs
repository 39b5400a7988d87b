//! Model selection: balanced line fit (BLF) and balanced angular similarity
//! (BAS) criteria on validation scores, and grid search over `(K, param)`.
//!
//! Both combine a fit term with `balance = min_p n_p / max_p n_p` as
//! `η·fit + (1 − η)·balance`. The fit terms are this crate's own choice of
//! formula; treat values as rankings within one grid, not as comparable
//! with other implementations.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use faer::{Mat, Side};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{KscError, Result, StageExt};
use crate::kernels::{KernelKind, KernelSpec};
use crate::lowrank;
use crate::model::{self, Encoding, Prototypes, ScoreMatrix, TrainConfig};

pub const DEFAULT_ETA: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Blf,
    Bas,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Blf => "blf",
            Criterion::Bas => "bas",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "blf" => Some(Criterion::Blf),
            "bas" => Some(Criterion::Bas),
            _ => None,
        }
    }

    /// Encoding whose decoding the criterion is evaluated on.
    pub fn encoding(self) -> Encoding {
        match self {
            Criterion::Blf => Encoding::SignCodebook,
            Criterion::Bas => Encoding::Direction,
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(KscError::InvalidParameter(format!(
            "eta must lie in [0, 1], got {eta}"
        )))
    }
}

fn cluster_sizes(labels: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut sizes = vec![0usize; k];
    for &l in labels {
        if l >= k {
            return Err(KscError::IndexOutOfRange { index: l, len: k });
        }
        sizes[l] += 1;
    }
    Ok(sizes)
}

fn balance(sizes: &[usize]) -> f64 {
    let max = *sizes.iter().max().unwrap_or(&0);
    if max == 0 {
        return 0.0;
    }
    *sizes.iter().min().unwrap() as f64 / max as f64
}

fn check_scores(scores: &ScoreMatrix, labels: &[usize], k: usize) -> Result<()> {
    if labels.len() != scores.len() {
        return Err(KscError::DimensionMismatch {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    if scores.dim() != k - 1 {
        return Err(KscError::DimensionMismatch {
            expected: k - 1,
            found: scores.dim(),
        });
    }
    Ok(())
}

/// Line-fit of one cluster's score rows.
fn cluster_linefit(rows: &[Vec<f64>], k: usize) -> Result<f64> {
    let n = rows.len() as f64;
    let dim = k - 1;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    if k == 2 {
        let mu = mean[0].abs();
        let sigma = (rows.iter().map(|r| (r[0] - mean[0]).powi(2)).sum::<f64>() / n).sqrt();
        return Ok(if mu + sigma == 0.0 {
            1.0
        } else {
            mu / (mu + sigma)
        });
    }
    let cov = Mat::from_fn(dim, dim, |a, b| {
        rows.iter()
            .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
            .sum::<f64>()
            / n
    });
    let zeta = cov
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| KscError::Linalg {
            stage: "blf",
            detail: format!("{e:?}"),
        })?;
    let total: f64 = zeta.iter().map(|z| z.max(0.0)).sum();
    if total <= 0.0 {
        return Ok(1.0);
    }
    let top = zeta
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let inv = 1.0 / (k - 1) as f64;
    Ok(((top / total - inv) * (k - 1) as f64 / (k - 2) as f64).clamp(0.0, 1.0))
}

/// Balanced line fit. For `K > 2` each cluster scores
/// `(ζ₁/Σζ − 1/(K−1)) · (K−1)/(K−2)` from the eigenvalues `ζ` of its score
/// covariance; for `K = 2` it scores `|μ|/(|μ| + σ)`. Cluster fits are
/// weighted by size. Any empty cluster gives 0; clusters without spread fit
/// perfectly.
pub fn blf_criterion(
    scores: &ScoreMatrix,
    labels: &[usize],
    k_clusters: usize,
    eta: f64,
) -> Result<f64> {
    if k_clusters < 2 {
        return Err(KscError::InvalidParameter(format!(
            "BLF needs at least 2 clusters, got {k_clusters}"
        )));
    }
    check_eta(eta)?;
    check_scores(scores, labels, k_clusters)?;
    let sizes = cluster_sizes(labels, k_clusters)?;
    if sizes.contains(&0) {
        return Ok(0.0);
    }
    let total = labels.len() as f64;
    let mut groups: Vec<Vec<Vec<f64>>> = vec![Vec::new(); k_clusters];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(scores.row(i));
    }
    let mut linefit = 0.0;
    for (g, &n) in groups.iter().zip(&sizes) {
        linefit += n as f64 / total * cluster_linefit(g, k_clusters)?;
    }
    Ok(eta * linefit + (1.0 - eta) * balance(&sizes))
}

/// Balanced angular similarity: the mean cosine between each score row and
/// its cluster's prototype (negative cosines count as 0), balanced by
/// cluster sizes. Only defined for `K > 2`.
pub fn bas_criterion(
    scores: &ScoreMatrix,
    labels: &[usize],
    prototypes: &[Vec<f64>],
    eta: f64,
) -> Result<f64> {
    let k = prototypes.len();
    if k < 3 {
        return Err(KscError::InvalidParameter(format!(
            "BAS requires K > 2 (got K = {k}); use BLF for two clusters"
        )));
    }
    check_eta(eta)?;
    check_scores(scores, labels, k)?;
    if let Some(p) = prototypes.iter().find(|p| p.len() != k - 1) {
        return Err(KscError::DimensionMismatch {
            expected: k - 1,
            found: p.len(),
        });
    }
    let sizes = cluster_sizes(labels, k)?;
    if labels.is_empty() {
        return Ok(0.0);
    }
    let mut angular = 0.0;
    for (i, &l) in labels.iter().enumerate() {
        let z = scores.row(i);
        let p = &prototypes[l];
        let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let np = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nz > 0.0 && np > 0.0 {
            let c = z.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / (nz * np);
            angular += c.clamp(0.0, 1.0);
        }
    }
    angular /= labels.len() as f64;
    Ok(eta * angular + (1.0 - eta) * balance(&sizes))
}

/// Evenly spaced grid `lo:hi:steps:lin|log`, or a single number.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| KscError::InvalidParameter(format!("grid '{spec}': {why}"));
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| bad(&format!("'{s}' is not a number")))
    };
    if parts.len() == 1 {
        let v = num(parts[0])?;
        if !v.is_finite() {
            return Err(bad("value must be finite"));
        }
        return Ok(vec![v]);
    }
    if parts.len() != 4 {
        return Err(bad("expected lo:hi:steps:log|lin"));
    }
    let lo = num(parts[0])?;
    let hi = num(parts[1])?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| bad("steps must be a positive integer"))?;
    if steps == 0 {
        return Err(bad("empty grid"));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(bad("need finite lo <= hi"));
    }
    let t = |i: usize| {
        if steps == 1 {
            0.0
        } else {
            i as f64 / (steps - 1) as f64
        }
    };
    match parts[3] {
        "lin" => Ok((0..steps).map(|i| lo + (hi - lo) * t(i)).collect()),
        "log" => {
            if lo <= 0.0 {
                return Err(bad("log spacing needs lo > 0"));
            }
            let (a, b) = (lo.ln(), hi.ln());
            Ok((0..steps)
                .map(|i| match i {
                    0 => lo,
                    _ if i == steps - 1 => hi,
                    _ => (a + (b - a) * t(i)).exp(),
                })
                .collect())
        }
        other => Err(bad(&format!("unknown spacing '{other}'"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneConfig {
    pub kernel: KernelKind,
    pub n_tr: usize,
    pub n_val: usize,
    pub eps_tol: f64,
    pub r_max: usize,
    pub seed: u64,
    pub criterion: Criterion,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub k_clusters: usize,
    pub param: f64,
    /// `-inf` when training failed.
    pub value: f64,
    pub rank: usize,
    pub seed: u64,
    pub seconds: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneReport {
    pub criterion: Criterion,
    pub eta: f64,
    pub grid: Vec<GridPoint>,
    /// Best `(K, param)`; `None` when every grid point failed.
    pub best: Option<(usize, f64)>,
    /// BLF at `K = 2` and `K = 3` for the best parameter, evaluated when a
    /// BAS search selects `K = 3`.
    pub blf_check: Option<[f64; 2]>,
}

impl TuneReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("K,param,criterion,R,seconds\n");
        for g in &self.grid {
            let _ = writeln!(
                s,
                "{},{:?},{:?},{},{:.6}",
                g.k_clusters, g.param, g.value, g.rank, g.seconds
            );
        }
        for g in self.grid.iter().filter(|g| g.failure.is_some()) {
            let _ = writeln!(
                s,
                "# failed K={} param={:?}: {}",
                g.k_clusters,
                g.param,
                g.failure.as_deref().unwrap_or_default()
            );
        }
        if let Some([two, three]) = self.blf_check {
            let _ = writeln!(s, "# blf-check K=2 {two:?} K=3 {three:?}");
        }
        match self.best {
            Some((k, p)) => {
                let _ = writeln!(
                    s,
                    "# best K={k} param={p:?} criterion={} eta={}",
                    self.criterion.name(),
                    self.eta
                );
            }
            None => s.push_str("# best none\n"),
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| KscError::io(path, e))
    }
}

/// Disjoint training and validation index sets drawn from one shuffle.
pub fn split_indices(
    n: usize,
    n_tr: usize,
    n_val: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_tr == 0 || n_val == 0 || n_tr + n_val > n {
        return Err(KscError::InvalidParameter(format!(
            "training ({n_tr}) and validation ({n_val}) sizes must be positive and fit in {n} rows"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut tr = perm[..n_tr].to_vec();
    let mut val = perm[n_tr..n_tr + n_val].to_vec();
    tr.sort_unstable();
    val.sort_unstable();
    Ok((tr, val))
}

fn evaluate(
    train: &Dataset,
    val: &Dataset,
    icd: &lowrank::IcdResult,
    cfg: &TrainConfig,
    criterion: Criterion,
    eta: f64,
) -> Result<f64> {
    let (m, _) = model::train_from_icd(train, icd, cfg)?;
    let scores = m.scores(val).stage("validation scores")?;
    let labels = m.assign(&scores);
    match (criterion, &m.prototypes) {
        (Criterion::Blf, _) => blf_criterion(&scores, &labels, cfg.k_clusters, eta),
        (Criterion::Bas, Prototypes::Directions(d)) => bas_criterion(&scores, &labels, d, eta),
        (Criterion::Bas, Prototypes::Codebook(_)) => unreachable!("BAS trains direction models"),
    }
}

/// Grid search over `K ∈ k_range` and kernel parameters. The training and
/// validation subsets are fixed for the whole grid; the factorisation is
/// shared by all `K` at one parameter value.
pub fn tune(
    data: &Dataset,
    k_range: std::ops::RangeInclusive<usize>,
    params: &[f64],
    cfg: &TuneConfig,
) -> Result<TuneReport> {
    check_eta(cfg.eta)?;
    if params.is_empty() || k_range.is_empty() {
        return Err(KscError::InvalidParameter("empty grid".into()));
    }
    if *k_range.start() < 2 {
        return Err(KscError::InvalidParameter("K must be at least 2".into()));
    }
    if cfg.criterion == Criterion::Bas && *k_range.start() < 3 {
        return Err(KscError::InvalidParameter(
            "BAS requires K > 2; use --criterion blf for K = 2".into(),
        ));
    }
    if cfg.r_max == 0 {
        return Err(KscError::InvalidParameter("r_max must be positive".into()));
    }
    let kernels: Vec<KernelSpec> = params
        .iter()
        .map(|&p| KernelSpec::new(cfg.kernel, p))
        .collect::<Result<_>>()?;
    let (tr_idx, val_idx) = split_indices(data.len(), cfg.n_tr, cfg.n_val, cfg.seed)?;
    let train = data.select(&tr_idx)?;
    let val = data.select(&val_idx)?;
    kernels[0].validate(data)?;

    let train_cfg = |kernel: KernelSpec, k: usize, encoding: Encoding| TrainConfig {
        k_clusters: k,
        kernel,
        eps_tol: cfg.eps_tol,
        r_max: cfg.r_max.min(train.len()),
        n_tr: train.len(),
        seed: cfg.seed,
        encoding,
        bias_variant: model::BiasVariant::Proposed,
    };
    let ks: Vec<usize> = k_range.collect();

    let grid: Vec<GridPoint> = kernels
        .par_iter()
        .map(|&kernel| {
            let start = Instant::now();
            let icd = lowrank::icd(&kernel, &train, cfg.eps_tol, cfg.r_max.min(train.len()));
            let icd_seconds = start.elapsed().as_secs_f64();
            ks.iter()
                .map(|&k| {
                    let point = |value, rank, seconds, failure| GridPoint {
                        k_clusters: k,
                        param: kernel.param(),
                        value,
                        rank,
                        seed: cfg.seed,
                        seconds,
                        failure,
                    };
                    let icd = match &icd {
                        Ok(icd) => icd,
                        Err(e) => {
                            return point(
                                f64::NEG_INFINITY,
                                0,
                                icd_seconds,
                                Some(format!("icd: {e}")),
                            )
                        }
                    };
                    let t = Instant::now();
                    let c = train_cfg(kernel, k, cfg.criterion.encoding());
                    let out = evaluate(&train, &val, icd, &c, cfg.criterion, cfg.eta);
                    let seconds = icd_seconds + t.elapsed().as_secs_f64();
                    match out {
                        Ok(v) => point(v, icd.rank(), seconds, None),
                        Err(e) => {
                            point(f64::NEG_INFINITY, icd.rank(), seconds, Some(e.to_string()))
                        }
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let mut best: Option<&GridPoint> = None;
    for g in grid.iter().filter(|g| g.value > f64::NEG_INFINITY) {
        let better = match best {
            None => true,
            Some(b) => {
                g.value > b.value
                    || (g.value == b.value
                        && (g.k_clusters, g.param).partial_cmp(&(b.k_clusters, b.param))
                            == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some(g);
        }
    }
    let mut best = best.map(|g| (g.k_clusters, g.param));

    let mut blf_check = None;
    if let (Criterion::Bas, Some((3, p))) = (cfg.criterion, best) {
        let kernel = KernelSpec::new(cfg.kernel, p)?;
        let check =
            lowrank::icd(&kernel, &train, cfg.eps_tol, cfg.r_max.min(train.len())).map(|icd| {
                let two = evaluate(
                    &train,
                    &val,
                    &icd,
                    &train_cfg(kernel, 2, Encoding::SignCodebook),
                    Criterion::Blf,
                    cfg.eta,
                );
                let three = evaluate(
                    &train,
                    &val,
                    &icd,
                    &train_cfg(kernel, 3, Encoding::SignCodebook),
                    Criterion::Blf,
                    cfg.eta,
                );
                [
                    two.unwrap_or(f64::NEG_INFINITY),
                    three.unwrap_or(f64::NEG_INFINITY),
                ]
            });
        if let Ok(values) = check {
            if values[0] > values[1] {
                best = Some((2, p));
            }
            blf_check = Some(values);
        }
    }

    Ok(TuneReport {
        criterion: cfg.criterion,
        eta: cfg.eta,
        grid,
        best,
        blf_check,
    })
}
