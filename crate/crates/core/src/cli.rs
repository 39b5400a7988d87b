//! The `ksc` command-line tool.

use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchConfig};
use crate::data::{self, GrayImage, SpiralParams};
use crate::error::{KscError, Result};
use crate::kernels::{KernelKind, KernelSpec};
use crate::metrics::{adjusted_rand_index, pairwise_f_measure};
use crate::model::{self, BiasVariant, Encoding, TrainConfig};
use crate::modelfile;
use crate::selection::{self, Criterion, TuneConfig, DEFAULT_ETA};

#[derive(Debug, Parser)]
#[command(name = "ksc", version, about = "Sparse kernel spectral clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a labelled two-spiral data set as CSV.
    GenSpiral(GenSpiralArgs),
    /// Train a sparse model and save it.
    Train(TrainArgs),
    /// Label every row of a data set with a saved model.
    Predict(PredictArgs),
    /// Grid search over the number of clusters and the kernel parameter.
    Tune(TuneArgs),
    /// Repeated train/predict runs reporting time and ARI.
    Bench(BenchArgs),
    /// Segment a PPM image via local colour histograms.
    Segment(SegmentArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Rbf,
    Chi2,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Rbf => KernelKind::Rbf,
            KernelArg::Chi2 => KernelKind::ChiSquare,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EncodingArg {
    Sign,
    Direction,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Sign => Encoding::SignCodebook,
            EncodingArg::Direction => Encoding::Direction,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BiasArg {
    Proposed,
    Original,
}

impl From<BiasArg> for BiasVariant {
    fn from(b: BiasArg) -> Self {
        match b {
            BiasArg::Proposed => BiasVariant::Proposed,
            BiasArg::Original => BiasVariant::Original,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CriterionArg {
    Blf,
    Bas,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Blf => Criterion::Blf,
            CriterionArg::Bas => Criterion::Bas,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenSpiralArgs {
    #[arg(long)]
    pub n: usize,
    /// Standard deviation of the Gaussian noise added to each coordinate.
    #[arg(long, default_value_t = data::DEFAULT_SPIRAL_NOISE)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overall size of the spirals (coordinates are multiplied by it).
    #[arg(long, default_value_t = SpiralParams::default().scale)]
    pub scale: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// The last CSV column holds integer labels (ignored for training).
    #[arg(long)]
    pub labeled: bool,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "rbf")]
    pub kernel: KernelArg,
    #[arg(long)]
    pub param: f64,
    /// Training subset size; defaults to every row.
    #[arg(long)]
    pub ntr: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub rmax: usize,
    #[arg(long, value_enum, default_value = "sign")]
    pub encoding: EncodingArg,
    #[arg(long, value_enum, default_value = "proposed")]
    pub bias: BiasArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// The last CSV column holds integer labels; ARI against them is printed.
    #[arg(long)]
    pub labeled: bool,
    /// Label file, one label per line; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub labeled: bool,
    #[arg(long, value_enum, default_value = "rbf")]
    pub kernel: KernelArg,
    #[arg(long)]
    pub kmin: usize,
    #[arg(long)]
    pub kmax: usize,
    /// `lo:hi:steps:log|lin`, or a single value.
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum, default_value = "blf")]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    #[arg(long)]
    pub ntr: usize,
    #[arg(long)]
    pub nval: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub rmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Labelled CSV (last column is the reference label).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ntr_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub r_list: Vec<usize>,
    #[arg(long, value_enum, default_value = "rbf")]
    pub kernel: KernelArg,
    #[arg(long)]
    pub param: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0.0)]
    pub eps_tol: f64,
    #[arg(long, value_enum, default_value = "sign")]
    pub encoding: EncodingArg,
    #[arg(long, value_enum, default_value = "proposed")]
    pub bias: BiasArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    /// Chi-square kernel parameter.
    #[arg(long)]
    pub param: Option<f64>,
    /// Pick `k` and `param` by grid search instead.
    #[arg(long)]
    pub auto_tune: bool,
    #[arg(long, default_value_t = 3)]
    pub kmin: usize,
    #[arg(long, default_value_t = 10)]
    pub kmax: usize,
    #[arg(long, default_value = "0.001:1:10:log")]
    pub grid: String,
    #[arg(long, value_enum, default_value = "bas")]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    #[arg(long, default_value_t = 8)]
    pub levels: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 3000)]
    pub ntr: usize,
    #[arg(long, default_value_t = 2000)]
    pub nval: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub rmax: usize,
    #[arg(long, value_enum, default_value = "direction")]
    pub encoding: EncodingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth label map; the pairwise F-measure against it is printed.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

fn gen_spiral(a: &GenSpiralArgs) -> Result<()> {
    let params = SpiralParams {
        scale: a.scale,
        ..SpiralParams::default()
    };
    let ds = data::generate_two_spirals(a.n, a.noise, a.seed, &params)?;
    data::save_csv(&a.out, &ds)?;
    println!("wrote {} rows to {}", ds.len(), a.out.display());
    Ok(())
}

fn train(a: &TrainArgs) -> Result<()> {
    let ds = data::load_csv(&a.data, a.labeled)?;
    let cfg = TrainConfig {
        k_clusters: a.k,
        kernel: KernelSpec::new(a.kernel.into(), a.param)?,
        eps_tol: a.eps_tol,
        r_max: a.rmax,
        n_tr: a.ntr.unwrap_or(ds.len()),
        seed: a.seed,
        encoding: a.encoding.into(),
        bias_variant: a.bias.into(),
    };
    let (m, details) = model::train(&ds, &cfg)?;
    modelfile::save(&a.model, &m)?;
    println!("R {}", m.rank());
    println!("train_seconds {:.6}", details.seconds);
    for (i, l) in details.lambdas.iter().enumerate() {
        println!("lambda_{} {l:.12e}", i + 1);
    }
    Ok(())
}

fn predict(a: &PredictArgs) -> Result<()> {
    let m = modelfile::load(&a.model)?;
    let ds = data::load_csv(&a.data, a.labeled)?;
    let t = Instant::now();
    let labels = m.predict(&ds)?;
    let seconds = t.elapsed().as_secs_f64();
    match &a.out {
        Some(path) => {
            data::save_labels(path, &labels)?;
            println!("test_seconds {seconds:.6}");
        }
        None => {
            let mut out = std::io::stdout().lock();
            for l in &labels {
                let _ = writeln!(out, "{l}");
            }
            eprintln!("test_seconds {seconds:.6}");
        }
    }
    if let (Some(truth), false) = (ds.labels(), labels.is_empty()) {
        let ari = adjusted_rand_index(truth, &labels)?;
        eprintln!("ari {ari:.6}");
    }
    Ok(())
}

fn best_of(report: &selection::TuneReport) -> Result<(usize, f64)> {
    report.best.ok_or_else(|| {
        let why = report
            .grid
            .iter()
            .find_map(|g| g.failure.clone())
            .unwrap_or_default();
        KscError::InvalidParameter(format!("every grid point failed (first failure: {why})"))
    })
}

fn tune(a: &TuneArgs) -> Result<()> {
    let ds = data::load_csv(&a.data, a.labeled)?;
    let params = selection::parse_grid(&a.grid)?;
    let cfg = TuneConfig {
        kernel: a.kernel.into(),
        n_tr: a.ntr,
        n_val: a.nval,
        eps_tol: a.eps_tol,
        r_max: a.rmax,
        seed: a.seed,
        criterion: a.criterion.into(),
        eta: a.eta,
    };
    let report = selection::tune(&ds, a.kmin..=a.kmax, &params, &cfg)?;
    match &a.out {
        Some(path) => report.save(path)?,
        None => print!("{}", report.to_csv()),
    }
    let (k, p) = best_of(&report)?;
    println!("best K={k} param={p:?}");
    Ok(())
}

fn run_bench(a: &BenchArgs) -> Result<()> {
    let ds = data::load_csv(&a.data, true)?;
    let cfg = BenchConfig {
        kernel: KernelSpec::new(a.kernel.into(), a.param)?,
        k_clusters: a.k,
        eps_tol: a.eps_tol,
        repeats: a.repeats,
        seed: a.seed,
        encoding: a.encoding.into(),
        bias_variant: a.bias.into(),
    };
    let report = bench::run(&ds, &a.ntr_list, &a.r_list, &cfg)?;
    match &a.out {
        Some(path) => report.save(path)?,
        None => print!("{}", report.to_csv()),
    }
    Ok(())
}

fn segment(a: &SegmentArgs) -> Result<()> {
    let image = data::read_ppm(&a.image)?;
    let truth = a.truth.as_deref().map(data::read_pgm).transpose()?;
    if let Some(t) = &truth {
        if (t.width, t.height) != (image.width, image.height) {
            return Err(KscError::Image(format!(
                "truth is {}x{} but the image is {}x{}",
                t.width, t.height, image.width, image.height
            )));
        }
    }
    let (ds, _) = data::image_to_histogram_dataset(&image, a.window, a.levels)?;
    let n_tr = a.ntr.min(ds.len());

    let (k, param) = if a.auto_tune {
        let params = selection::parse_grid(&a.grid)?;
        let n_tr = a.ntr.min(ds.len().saturating_sub(1)).max(1);
        let n_val = a.nval.min(ds.len() - n_tr);
        let cfg = TuneConfig {
            kernel: KernelKind::ChiSquare,
            n_tr,
            n_val,
            eps_tol: a.eps_tol,
            r_max: a.rmax,
            seed: a.seed,
            criterion: a.criterion.into(),
            eta: a.eta,
        };
        let report = selection::tune(&ds, a.kmin..=a.kmax, &params, &cfg)?;
        let best = best_of(&report)?;
        println!("tuned K={} param={:?}", best.0, best.1);
        best
    } else {
        match (a.k, a.param) {
            (Some(k), Some(p)) => (k, p),
            _ => {
                return Err(KscError::InvalidParameter(
                    "segment needs --k and --param, or --auto-tune".into(),
                ))
            }
        }
    };
    let cfg = TrainConfig {
        k_clusters: k,
        kernel: KernelSpec::chi_square(param)?,
        eps_tol: a.eps_tol,
        r_max: a.rmax,
        n_tr,
        seed: a.seed,
        encoding: a.encoding.into(),
        bias_variant: BiasVariant::Proposed,
    };
    let (m, details) = model::train(&ds, &cfg)?;
    let t = Instant::now();
    let labels = m.predict(&ds)?;
    let test_seconds = t.elapsed().as_secs_f64();
    let seg = GrayImage {
        width: image.width,
        height: image.height,
        pixels: labels.iter().map(|&l| l as u8).collect(),
    };
    data::write_pgm(&a.out, &seg)?;
    println!("N {}", ds.len());
    println!("R {}", m.rank());
    println!("train_seconds {:.6}", details.seconds);
    println!("test_seconds {test_seconds:.6}");
    if let Some(t) = truth {
        println!("f_measure {:.6}", pairwise_f_measure(&t.pixels, &labels)?);
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenSpiral(a) => gen_spiral(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Tune(a) => tune(a),
        Command::Bench(a) => run_bench(a),
        Command::Segment(a) => segment(a),
    }
}

/// Applies `KSC_THREADS` to the rayon pool and the dense linear algebra.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("KSC_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        KscError::InvalidParameter(format!("KSC_THREADS must be a positive integer, got '{v}'"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| KscError::InvalidParameter(format!("thread pool: {e}")))?;
    faer::set_global_parallelism(if n == 1 {
        faer::Par::Seq
    } else {
        faer::Par::rayon(n)
    });
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return 2;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return 2;
        }
    };
    match configure_threads().and_then(|_| run(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.class(), e.to_string().replace('\n', " "));
            1
        }
    }
}
