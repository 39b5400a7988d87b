//! Repeated train/predict timing and accuracy runs.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::data::Dataset;
use crate::error::{KscError, Result};
use crate::kernels::KernelSpec;
use crate::metrics::adjusted_rand_index;
use crate::model::{self, BiasVariant, Encoding, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub kernel: KernelSpec,
    pub k_clusters: usize,
    pub eps_tol: f64,
    pub repeats: usize,
    pub seed: u64,
    pub encoding: Encoding,
    pub bias_variant: BiasVariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n_tr: usize,
    pub r: usize,
    pub train_seconds: f64,
    pub test_seconds: f64,
    pub ari_mean: f64,
    pub ari_std: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n_tr,R,train_seconds,test_seconds,ari_mean,ari_std,repeats\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6},{:.6},{}",
                r.n_tr, r.r, r.train_seconds, r.test_seconds, r.ari_mean, r.ari_std, r.repeats
            );
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| KscError::io(path, e))
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One row per `(n_tr, R)` pair: the averages over `repeats` runs, run `i`
/// subsampling with seed `seed + i`, training with `R` pinned as the rank
/// cap and labelling every row of `data`. ARI is against the data's labels.
pub fn run(
    data: &Dataset,
    n_tr_list: &[usize],
    r_list: &[usize],
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    if n_tr_list.len() != r_list.len() {
        return Err(KscError::InvalidParameter(format!(
            "{} training sizes but {} ranks",
            n_tr_list.len(),
            r_list.len()
        )));
    }
    if cfg.repeats == 0 {
        return Err(KscError::InvalidParameter(
            "repeats must be positive".into(),
        ));
    }
    let truth = data
        .labels()
        .ok_or_else(|| KscError::InvalidParameter("bench needs labelled data".into()))?;
    let mut report = BenchReport::default();
    for (&n_tr, &r) in n_tr_list.iter().zip(r_list) {
        let mut train_s = Vec::new();
        let mut test_s = Vec::new();
        let mut aris = Vec::new();
        for i in 0..cfg.repeats {
            let tc = TrainConfig {
                k_clusters: cfg.k_clusters,
                kernel: cfg.kernel,
                eps_tol: cfg.eps_tol,
                r_max: r,
                n_tr,
                seed: cfg.seed.wrapping_add(i as u64),
                encoding: cfg.encoding,
                bias_variant: cfg.bias_variant,
            };
            let t = Instant::now();
            let (m, _) = model::train(data, &tc)?;
            train_s.push(t.elapsed().as_secs_f64());
            let t = Instant::now();
            let labels = m.predict(data)?;
            test_s.push(t.elapsed().as_secs_f64());
            aris.push(adjusted_rand_index(truth, &labels)?);
        }
        let (ari_mean, ari_std) = mean_std(&aris);
        report.rows.push(BenchRow {
            n_tr,
            r,
            train_seconds: mean_std(&train_s).0,
            test_seconds: mean_std(&test_s).0,
            ari_mean,
            ari_std,
            repeats: cfg.repeats,
        });
    }
    Ok(report)
}
