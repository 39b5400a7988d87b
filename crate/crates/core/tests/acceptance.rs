//! Acceptance suite with its own harness: criteria run one after another so
//! timings do not overlap, each prints one `criterion N (...): PASS|FAIL`
//! line, and the process fails if any criterion does. Arguments that do not
//! start with `-` select criteria whose function name contains them.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use ksc::data::{
    self, generate_two_spirals, Dataset, LabeledImage, SpiralParams, DEFAULT_SPIRAL_NOISE,
};
use ksc::eigen::{self, EigenBundle};
use ksc::lowrank::{self, IcdResult};
use ksc::metrics::adjusted_rand_index;
use ksc::model::{self, fit_prototypes, BiasVariant, Encoding, ScoreMatrix, TrainConfig};
use ksc::selection::{bas_criterion, blf_criterion};
use ksc::{modelfile, KernelSpec};

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n} ({name}): {} [{detail}]",
        if pass { "PASS" } else { "FAIL" }
    );
}

const GAMMA: f64 = 0.006;

fn spiral(n: usize) -> Dataset {
    generate_two_spirals(n, DEFAULT_SPIRAL_NOISE, 42, &SpiralParams::default()).unwrap()
}

/// Gaussian blobs around `centers` with std `spread`, cycling through them.
fn blobs(n: usize, centers: &[[f64; 2]], spread: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).unwrap();
    let rows: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let c = centers[i % centers.len()];
            [c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]
        })
        .collect();
    let labels = (0..n).map(|i| (i % centers.len()) as i64).collect();
    Dataset::from_rows(&rows)
        .unwrap()
        .with_labels(labels)
        .unwrap()
}

fn random_instance(seed: u64, max_n: usize) -> (Dataset, KernelSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(100..=max_n);
    let k = rng.random_range(2..=4);
    let centers: Vec<[f64; 2]> = (0..k)
        .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
        .collect();
    let spread = rng.random_range(0.1..0.5);
    let gamma = rng.random_range(0.1..1.0);
    (
        blobs(n, &centers, spread, seed + 1000),
        KernelSpec::rbf(gamma).unwrap(),
    )
}

fn factor(data: &Dataset, kernel: &KernelSpec, r: usize) -> IcdResult {
    lowrank::icd(kernel, data, 0.0, r.min(data.len())).unwrap()
}

fn proposed(g: &Mat<f64>, k: usize) -> EigenBundle {
    model::eigenpairs_from_factor(g.as_ref(), k).unwrap()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn col(m: &Mat<f64>, c: usize) -> Vec<f64> {
    m.col(c).iter().copied().collect()
}

/// Dense `D⁻¹ M_D Ω` for a symmetric `Ω`, with `D = Ω 1`.
fn dense_operator(omega: &Mat<f64>) -> Mat<f64> {
    let n = omega.nrows();
    let d: Vec<f64> = (0..n).map(|i| omega.row(i).iter().sum()).collect();
    let s: f64 = d.iter().map(|x| 1.0 / x).sum();
    // (D⁻¹ M_D)_ij = δ_ij / d_i − 1 / (d_i d_j s)
    let c = Mat::from_fn(n, n, |i, j| {
        (if i == j { 1.0 / d[i] } else { 0.0 }) - 1.0 / (d[i] * d[j] * s)
    });
    &c * omega
}

// ---------------------------------------------------------------------------

fn criterion_01_spiral_correctness() -> bool {
    let configs = [(3000usize, 195usize), (5000, 210), (10_000, 223)];
    let mut lines = Vec::new();
    let mut pass = true;
    let mut slowest = 0.0f64;
    for n in [100_000usize, 10_000] {
        let ds = spiral(n);
        let truth = ds.labels().unwrap().to_vec();
        for (n_tr, r) in configs {
            let mut ones = 0;
            for seed in 0..10 {
                let mut cfg = TrainConfig::new(2, KernelSpec::rbf(GAMMA).unwrap(), n_tr);
                cfg.r_max = r;
                cfg.eps_tol = 0.0;
                cfg.seed = seed;
                let t = Instant::now();
                let ari = match model::train(&ds, &cfg) {
                    Ok((m, _)) => adjusted_rand_index(&truth, &m.predict(&ds).unwrap()).unwrap(),
                    Err(_) => f64::NAN,
                };
                slowest = slowest.max(t.elapsed().as_secs_f64());
                if ari == 1.0 {
                    ones += 1;
                }
            }
            pass &= ones >= 9;
            lines.push(format!("N={n} n_tr={n_tr} R={r}: {ones}/10"));
        }
    }
    pass &= slowest < 5.0;
    report(
        1,
        "spiral ARI = 1",
        pass,
        &format!("{}; slowest run {slowest:.2}s", lines.join(", ")),
    );
    pass
}

fn criterion_02_training_time_scaling() -> bool {
    let ds = spiral(100_000);
    let time = |n_tr: usize| {
        let mut best = f64::INFINITY;
        for seed in 0..2 {
            let mut cfg = TrainConfig::new(2, KernelSpec::rbf(GAMMA).unwrap(), n_tr);
            cfg.r_max = 223;
            cfg.eps_tol = 0.0;
            cfg.seed = seed;
            let t = Instant::now();
            model::train(&ds, &cfg).unwrap();
            best = best.min(t.elapsed().as_secs_f64());
        }
        best
    };
    let small = time(10_000);
    let large = time(100_000);
    let slope = (large / small).log10();
    let pass = slope <= 1.3 && large < 60.0;
    report(
        2,
        "training time scaling",
        pass,
        &format!(
            "R=223: n_tr=1e4 {small:.2}s, n_tr=1e5 {large:.2}s, log-log slope {slope:.2}; {} rayon thread(s)",
            rayon::current_num_threads()
        ),
    );
    pass
}

fn criterion_03_path_equivalence() -> bool {
    let mut worst_value = 0.0f64;
    let mut worst_cos = 1.0f64;
    let mut compared = 0;
    for seed in 0..20 {
        let (data, kernel) = random_instance(seed, 500);
        let r = 10 + (seed as usize * 7) % 41;
        let icd = factor(&data, &kernel, r);
        let k = (icd.rank() - 1).min(6);
        let fast = proposed(&icd.g, k);
        let reference =
            eigen::leading_eigenpairs_original(icd.g.as_ref(), &fast.degrees, k).unwrap();
        let top = reference.lambdas[0];
        for j in 0..k {
            let (a, b) = (fast.lambdas[j], reference.lambdas[j]);
            worst_value = worst_value.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
            let prev = if j == 0 {
                f64::INFINITY
            } else {
                reference.lambdas[j - 1] - b
            };
            let next = if j + 1 < k {
                b - reference.lambdas[j + 1]
            } else {
                // the next eigenvalue is outside the requested block
                let extra =
                    eigen::leading_eigenpairs_original(icd.g.as_ref(), &fast.degrees, k + 1)
                        .unwrap();
                b - extra.lambdas[k]
            };
            if prev.min(next) > 1e-6 * top {
                worst_cos =
                    worst_cos.min(cosine(&col(&fast.betas, j), &col(&reference.betas, j)).abs());
                compared += 1;
            }
        }
    }
    let pass = worst_value <= 1e-8 && worst_cos >= 1.0 - 1e-8 && compared > 0;
    report(
        3,
        "proposed vs reference eigenpairs",
        pass,
        &format!("20 instances; max relative eigenvalue gap {worst_value:.2e}; min |cos| {worst_cos:.12} over {compared} non-degenerate vectors"),
    );
    pass
}

fn criterion_04_eigen_residual_and_zero_sum() -> bool {
    let mut worst_res = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut checked = 0;
    for seed in 0..10 {
        let (data, kernel) = random_instance(100 + seed, 300);
        let icd = factor(&data, &kernel, 40);
        let k = (icd.rank() - 1).min(8);
        let b = proposed(&icd.g, k);
        let omega = &icd.g * icd.g.transpose();
        let op = dense_operator(&omega);
        for j in 0..k {
            let lambda = b.lambdas[j];
            if lambda <= 1e-8 {
                continue;
            }
            let beta = b.betas.col(j).to_owned();
            let lhs = &op * &beta;
            let resid = (&lhs - &beta * faer::Scale(lambda)).norm_l2() / (lambda * beta.norm_l2());
            worst_res = worst_res.max(resid);
            let l1: f64 = beta.iter().map(|v| v.abs()).sum();
            worst_sum = worst_sum.max(beta.iter().sum::<f64>().abs() / l1);
            checked += 1;
        }
    }
    let pass = worst_res <= 1e-8 && worst_sum <= 1e-8 && checked > 0;
    report(
        4,
        "eigen residual and zero-sum",
        pass,
        &format!("{checked} eigenpairs; max relative residual {worst_res:.2e}; max |1ᵀβ|/‖β‖₁ {worst_sum:.2e}"),
    );
    pass
}

fn criterion_05_icd_correctness() -> bool {
    let mut worst_factor = 0.0f64;
    let mut pivots_match = true;
    let mut monotone = true;
    for seed in 0..8 {
        let (data, kernel) = random_instance(200 + seed, 300);
        let oracle = lowrank::dense_pivoted_cholesky_oracle(&kernel, &data).unwrap();
        let icd = lowrank::icd(&kernel, &data, 0.0, data.len()).unwrap();
        pivots_match &= icd.pivots == oracle.pivots;
        if icd.rank() == oracle.rank() {
            for j in 0..icd.rank() {
                for i in 0..data.len() {
                    worst_factor = worst_factor.max((icd.g[(i, j)] - oracle.g[(i, j)]).abs());
                }
            }
        } else {
            worst_factor = f64::INFINITY;
        }
        monotone &= icd.residual_trace.windows(2).all(|w| w[1] <= w[0]);
    }

    // rank-deficient: 6 distinct points, each repeated 25 times
    let mut worst_recovery = 0.0f64;
    let mut ranks = Vec::new();
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<[f64; 3]> = (0..6)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect();
        let rows: Vec<[f64; 3]> = (0..150).map(|i| base[i % 6]).collect();
        let data = Dataset::from_rows(&rows).unwrap();
        for kernel in [
            KernelSpec::rbf(0.5).unwrap(),
            KernelSpec::chi_square(0.3).unwrap(),
        ] {
            let icd = lowrank::icd(&kernel, &data, 0.0, data.len()).unwrap();
            ranks.push(icd.rank());
            let omega = kernel.cross(&data, &data).unwrap();
            let diff = &omega - &icd.g * icd.g.transpose();
            let l1: f64 = diff
                .col_iter()
                .flat_map(|c| c.iter().map(|v| v.abs()).collect::<Vec<_>>())
                .sum();
            worst_recovery = worst_recovery.max(l1);
        }
    }
    let pass = pivots_match
        && worst_factor <= 1e-10
        && monotone
        && worst_recovery <= 1e-8
        && ranks.iter().all(|&r| r == 6);
    report(
        5,
        "ICD vs dense pivoted Cholesky",
        pass,
        &format!(
            "pivots equal: {pivots_match}; max factor diff {worst_factor:.2e}; residual trace monotone: {monotone}; duplicated sets rank {ranks:?}, max entrywise ‖Ω−GGᵀ‖₁ {worst_recovery:.2e}"
        ),
    );
    pass
}

fn criterion_06_bias_identity() -> bool {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let (data, kernel) = random_instance(300 + seed, 300);
        let icd = factor(&data, &kernel, 30);
        let k = (icd.rank() - 1).min(5);
        let b = proposed(&icd.g, k);
        let n = data.len();
        let fast = model::bias_terms_proposed(&b.lambdas, b.betas.as_ref(), &b.degrees, n).unwrap();
        let omega = &icd.g * icd.g.transpose();
        let inv: Vec<f64> = b.degrees.iter().map(|d| 1.0 / d).collect();
        let s: f64 = inv.iter().sum();
        for (j, &f) in fast.iter().enumerate() {
            let ob = &omega * b.betas.col(j);
            let dense = -ob.iter().zip(&inv).map(|(v, w)| v * w).sum::<f64>() / s;
            // scale of the summands, so that a bias that cancels to ~0 is
            // still judged relative to the quantities it is built from
            let magnitude = ob.iter().zip(&inv).map(|(v, w)| (v * w).abs()).sum::<f64>() / s;
            worst = worst.max((f - dense).abs() / dense.abs().max(magnitude));
        }
    }
    let pass = worst <= 1e-10;
    report(
        6,
        "proposed bias equals dense KKT bias",
        pass,
        &format!("10 instances; max relative difference {worst:.2e}"),
    );
    pass
}

/// Smallest R whose model labels every row of `full` correctly, scanning
/// upwards. The training labels are checked first: a model that mislabels a
/// training row cannot be perfect on a superset of it.
fn minimal_rank(
    full: &Dataset,
    train: &Dataset,
    train_truth: &[i64],
    icd: &IcdResult,
    cfg: &TrainConfig,
) -> Option<usize> {
    let truth = full.labels().unwrap();
    for r in 1..=icd.rank() {
        let Ok((m, d)) = model::train_from_icd(train, &icd.truncated(r), cfg) else {
            continue;
        };
        if adjusted_rand_index(train_truth, &d.train_labels).unwrap() < 1.0 {
            continue;
        }
        if adjusted_rand_index(truth, &m.predict(full).unwrap()).unwrap() == 1.0 {
            return Some(r);
        }
    }
    None
}

fn criterion_07_sparsity_improvement() -> bool {
    let ds = spiral(100_000);
    let truth = ds.labels().unwrap().to_vec();
    let kernel = KernelSpec::rbf(GAMMA).unwrap();
    let n_tr = 10_000;
    let mut wins = 0;
    let mut rows = Vec::new();
    for seed in 0..10 {
        let idx = model::sample_training_indices(ds.len(), n_tr, seed).unwrap();
        let train = ds.select(&idx).unwrap();
        let train_truth: Vec<i64> = idx.iter().map(|&i| truth[i]).collect();
        let icd = lowrank::icd(&kernel, &train, 0.0, 400).unwrap();
        let mut found = Vec::new();
        for bias in [BiasVariant::Proposed, BiasVariant::Original] {
            let mut cfg = TrainConfig::new(2, kernel, n_tr);
            cfg.bias_variant = bias;
            cfg.eps_tol = 0.0;
            cfg.seed = seed;
            found.push(minimal_rank(&ds, &train, &train_truth, &icd, &cfg));
        }
        let (p, o) = (found[0], found[1]);
        let better = match (p, o) {
            (Some(p), Some(o)) => p < o,
            (Some(_), None) => true,
            _ => false,
        };
        if better {
            wins += 1;
        }
        let show = |v: Option<usize>| v.map_or(">400".to_string(), |r| r.to_string());
        rows.push(format!("{}/{}", show(p), show(o)));
    }
    let pass = wins >= 8;
    report(
        7,
        "proposed bias needs fewer reduced points",
        pass,
        &format!(
            "minimal R proposed/original per seed: {}; proposed strictly smaller on {wins}/10",
            rows.join(" ")
        ),
    );
    pass
}

/// Non-sparse KSC on the exact kernel matrix: eigenvectors of
/// `D⁻¹ M_D Ω` via the symmetric form `P S P` with `S = D^{-1/2} Ω D^{-1/2}`
/// and `P` the projector orthogonal to `D^{-1/2} 1`, then scores
/// `Ω β + b` with the KKT bias.
fn dense_ksc_scores(omega: &Mat<f64>, k: usize) -> Mat<f64> {
    let n = omega.nrows();
    let d: Vec<f64> = (0..n).map(|i| omega.row(i).iter().sum()).collect();
    let s: f64 = d.iter().map(|x| 1.0 / x).sum();
    let v: Vec<f64> = d.iter().map(|x| 1.0 / (x.sqrt() * s.sqrt())).collect();
    let p = Mat::from_fn(n, n, |i, j| (if i == j { 1.0 } else { 0.0 }) - v[i] * v[j]);
    let sm = Mat::from_fn(n, n, |i, j| omega[(i, j)] / (d[i] * d[j]).sqrt());
    let psp = &p * &sm * &p;
    let evd = psp.self_adjoint_eigen(Side::Lower).unwrap();
    let mut scores = Mat::<f64>::zeros(n, k);
    for c in 0..k {
        let idx = n - 1 - c;
        let beta: Vec<f64> = (0..n).map(|i| evd.U()[(i, idx)] / d[i].sqrt()).collect();
        let beta = Mat::from_fn(n, 1, |i, _| beta[i]);
        let ob = omega * &beta;
        let b = -(0..n).map(|i| ob[(i, 0)] / d[i]).sum::<f64>() / s;
        for i in 0..n {
            scores[(i, c)] = ob[(i, 0)] + b;
        }
    }
    scores
}

fn criterion_08_dense_oracle_equivalence() -> bool {
    let mut worst = 0.0f64;
    let mut labels_equal = true;
    let cases: [(&[[f64; 2]], f64); 4] = [
        (&[[0.0, 0.0], [3.0, 0.0]], 0.8),
        (&[[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]], 0.8),
        (&[[0.0, 0.0], [2.5, 0.5], [0.5, 2.5]], 0.5),
        (&[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [4.0, 4.0]], 1.5),
    ];
    for (i, (centers, gamma)) in cases.iter().enumerate() {
        let data = blobs(240, centers, 0.3, 400 + i as u64);
        let k_clusters = centers.len();
        let kernel = KernelSpec::rbf(*gamma).unwrap();
        let mut cfg = TrainConfig::new(k_clusters, kernel, data.len());
        cfg.eps_tol = 0.0;
        cfg.r_max = data.len();
        let (m, details) = model::train_on(&data, &cfg).unwrap();
        let sparse = m.scores(&data).unwrap();
        let dense = dense_ksc_scores(&kernel.cross(&data, &data).unwrap(), k_clusters - 1);
        let mut aligned = dense.clone();
        for c in 0..k_clusters - 1 {
            // eigenvector signs are arbitrary; align before comparing
            let dot: f64 = (0..data.len())
                .map(|r| sparse.values[(r, c)] * dense[(r, c)])
                .sum();
            if dot < 0.0 {
                for r in 0..data.len() {
                    aligned[(r, c)] = -dense[(r, c)];
                }
            }
            for r in 0..data.len() {
                worst = worst.max((sparse.values[(r, c)] - aligned[(r, c)]).abs());
            }
        }
        let dense_scores = ScoreMatrix::new(aligned);
        let protos = fit_prototypes(&dense_scores, Encoding::SignCodebook, k_clusters).unwrap();
        let dense_labels = protos.assign(&dense_scores);
        labels_equal &= dense_labels == details.train_labels;
    }
    let pass = worst <= 1e-6 && labels_equal;
    report(
        8,
        "sparse model at full rank equals dense KSC",
        pass,
        &format!("4 instances of 240 points; max score difference {worst:.2e}; labels identical: {labels_equal}"),
    );
    pass
}

fn write_image(path: &Path, width: usize, height: usize, color: impl Fn(usize, usize) -> [u8; 3]) {
    let pixels = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| color(x, y))
        .collect();
    data::write_ppm(path, &LabeledImage::new(width, height, pixels).unwrap()).unwrap();
}

fn write_truth(path: &Path, width: usize, height: usize, region: impl Fn(usize, usize) -> u8) {
    let pixels = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| region(x, y))
        .collect();
    data::write_pgm(
        path,
        &data::GrayImage {
            width,
            height,
            pixels,
        },
    )
    .unwrap();
}

fn run_segment(args: &[&str]) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ksc"))
        .arg("segment")
        .args(args)
        .env("KSC_THREADS", "1")
        .output()
        .unwrap();
    let text =
        String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    (out.status.success(), text)
}

fn value(text: &str, key: &str) -> Option<f64> {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.trim().parse().ok())
}

fn criterion_09_image_pipeline() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().to_string();
    let mut f_measures = Vec::new();

    // two tones split by a diagonal edge
    let two = |x: usize, y: usize| u8::from(2 * x + y > 90);
    write_image(Path::new(&p("two.ppm")), 64, 48, |x, y| {
        if two(x, y) == 1 {
            [200, 40, 40]
        } else {
            [30, 90, 210]
        }
    });
    write_truth(Path::new(&p("two.pgm")), 64, 48, two);
    let (ok, out) = run_segment(&[
        "--image",
        &p("two.ppm"),
        "--k",
        "2",
        "--param",
        "0.1",
        "--out",
        &p("seg2.pgm"),
        "--truth",
        &p("two.pgm"),
    ]);
    f_measures.push(if ok {
        value(&out, "f_measure").unwrap_or(0.0)
    } else {
        0.0
    });

    // three horizontal bands. A T-junction would leave pixels whose 5x5
    // window is dominated by a neighbouring region, which no histogram
    // feature can label by its centre.
    let three = |_x: usize, y: usize| {
        if y < 18 {
            0
        } else if y < 37 {
            1
        } else {
            2
        }
    };
    let colors = [[240, 220, 40], [20, 160, 60], [90, 20, 140]];
    write_image(Path::new(&p("three.ppm")), 70, 56, |x, y| {
        colors[three(x, y) as usize]
    });
    write_truth(Path::new(&p("three.pgm")), 70, 56, three);
    let (ok, out) = run_segment(&[
        "--image",
        &p("three.ppm"),
        "--k",
        "3",
        "--param",
        "0.1",
        "--out",
        &p("seg3.pgm"),
        "--truth",
        &p("three.pgm"),
    ]);
    f_measures.push(if ok {
        value(&out, "f_measure").unwrap_or(0.0)
    } else {
        0.0
    });

    // full-size 321 x 481 input with textured regions
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise: Vec<i32> = (0..321 * 481 * 3)
        .map(|_| rng.random_range(-25..=25))
        .collect();
    write_image(Path::new(&p("big.ppm")), 481, 321, |x, y| {
        let base = if (x as f64 - 240.0).hypot(y as f64 - 160.0) < 90.0 {
            [210, 180, 60]
        } else if y < 140 {
            [60, 120, 220]
        } else {
            [70, 150, 60]
        };
        let i = (y * 481 + x) * 3;
        [0, 1, 2].map(|c| (base[c] + noise[i + c]).clamp(0, 255) as u8)
    });
    let image = data::read_ppm(Path::new(&p("big.ppm"))).unwrap();
    let (hist, _) = data::image_to_histogram_dataset(&image, 5, 8).unwrap();
    let rows_ok = hist.len() == 154_401
        && hist.dim() == 8
        && hist
            .rows()
            .all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= 1e-12 && r.iter().all(|&v| v >= 0.0));
    let (ok, out) = run_segment(&[
        "--image",
        &p("big.ppm"),
        "--k",
        "3",
        "--param",
        "0.1",
        "--out",
        &p("big.pgm"),
    ]);
    let n_out = value(&out, "N ").unwrap_or(0.0) as usize;
    let seconds = value(&out, "train_seconds").unwrap_or(f64::INFINITY)
        + value(&out, "test_seconds").unwrap_or(f64::INFINITY);
    let seg = data::read_pgm(Path::new(&p("big.pgm")));
    let seg_ok = seg.map(|s| s.pixels.len() == 154_401).unwrap_or(false);

    let pass = f_measures.iter().all(|&f| f == 1.0)
        && rows_ok
        && ok
        && n_out == 154_401
        && seg_ok
        && seconds < 30.0;
    report(
        9,
        "image segmentation pipeline",
        pass,
        &format!(
            "F-measure two-region {:.4}, three-region {:.4}; 321x481: {} rows valid {rows_ok}, label map written {seg_ok}, train+predict {seconds:.2}s single-thread",
            f_measures[0], f_measures[1], n_out
        ),
    );
    if !pass {
        eprintln!("{out}");
    }
    pass
}

fn criterion_10_invariance_suite() -> bool {
    let mut notes = Vec::new();

    // sign flips of the eigenvectors before model construction
    let data = blobs(
        300,
        &[[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [3.0, 3.0]],
        0.35,
        77,
    );
    let kernel = KernelSpec::rbf(0.8).unwrap();
    let mut flip_ok = true;
    for encoding in [Encoding::SignCodebook, Encoding::Direction] {
        let mut cfg = TrainConfig::new(4, kernel, data.len());
        cfg.encoding = encoding;
        cfg.r_max = 60;
        let icd = lowrank::icd(&kernel, &data, 1e-6, 60).unwrap();
        let bundle = proposed(&icd.g, 3);
        let (base, base_labels) = model::build_model(&data, &icd.pivots, &bundle, &cfg).unwrap();
        for mask in 1..8u32 {
            let mut flipped = bundle.clone();
            for c in 0..3 {
                if mask & (1 << c) != 0 {
                    for v in flipped.betas.col_mut(c).iter_mut() {
                        *v = -*v;
                    }
                }
            }
            let (m, labels) = model::build_model(&data, &icd.pivots, &flipped, &cfg).unwrap();
            flip_ok &= adjusted_rand_index(&base_labels, &labels).unwrap() == 1.0;
            let probe = blobs(200, &[[1.5, 1.5], [0.0, 3.0]], 1.0, 78);
            flip_ok &=
                adjusted_rand_index(&base.predict(&probe).unwrap(), &m.predict(&probe).unwrap())
                    .unwrap()
                    == 1.0;
        }
    }
    notes.push(format!("sign-flip invariance {flip_ok}"));

    // model file round trip
    let mut worst_rt = 0.0f64;
    let dir = tempfile::tempdir().unwrap();
    for (i, encoding) in [Encoding::SignCodebook, Encoding::Direction]
        .into_iter()
        .enumerate()
    {
        let mut cfg = TrainConfig::new(4, kernel, data.len());
        cfg.encoding = encoding;
        cfg.bias_variant = if i == 0 {
            BiasVariant::Proposed
        } else {
            BiasVariant::Original
        };
        let (m, _) = model::train(&data, &cfg).unwrap();
        let path = dir.path().join(format!("m{i}.ksc"));
        modelfile::save(&path, &m).unwrap();
        let back = modelfile::load(&path).unwrap();
        let probe = blobs(500, &[[1.0, 2.0]], 2.0, 79);
        let (a, b) = (m.scores(&probe).unwrap(), back.scores(&probe).unwrap());
        for r in 0..probe.len() {
            for c in 0..3 {
                worst_rt = worst_rt.max((a.values[(r, c)] - b.values[(r, c)]).abs());
            }
        }
    }
    notes.push(format!("round-trip max score diff {worst_rt:.1e}"));

    // ARI under relabelling
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let mut ari_ok = true;
    for _ in 0..50 {
        let a: Vec<usize> = (0..100).map(|_| rng.random_range(0..4)).collect();
        let b: Vec<usize> = (0..100).map(|_| rng.random_range(0..5)).collect();
        let renamed: Vec<usize> = b.iter().map(|&x| [7, 3, 11, 0, 5][x]).collect();
        ari_ok &= (adjusted_rand_index(&a, &b).unwrap()
            - adjusted_rand_index(&a, &renamed).unwrap())
        .abs()
            < 1e-12;
        ari_ok &= adjusted_rand_index(&b, &renamed).unwrap() == 1.0;
    }
    notes.push(format!("ARI relabel invariance {ari_ok}"));

    // criterion values
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let val = blobs(
        400,
        &[[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [3.0, 3.0]],
        0.5,
        81,
    );
    for k in 3..=5 {
        for (gamma, encoding) in [
            (0.2, Encoding::Direction),
            (0.8, Encoding::Direction),
            (3.0, Encoding::SignCodebook),
        ] {
            let mut cfg = TrainConfig::new(k, KernelSpec::rbf(gamma).unwrap(), data.len());
            cfg.encoding = encoding;
            let Ok((m, _)) = model::train(&data, &cfg) else {
                continue;
            };
            let s = m.scores(&val).unwrap();
            let labels = m.assign(&s);
            for eta in [0.0, 0.5, 0.75, 1.0] {
                let mut vals = vec![blf_criterion(&s, &labels, k, eta).unwrap()];
                if let ksc::model::Prototypes::Directions(d) = &m.prototypes {
                    vals.push(bas_criterion(&s, &labels, d, eta).unwrap());
                }
                for v in vals {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
    }
    let range_ok = lo >= -1e-9 && hi <= 1.0 + 1e-9 && lo <= hi;
    notes.push(format!("criterion values in [{lo:.4}, {hi:.4}]"));

    let pass = flip_ok && worst_rt <= 1e-12 && ari_ok && range_ok;
    report(10, "end-to-end invariances", pass, &notes.join("; "));
    pass
}

type Criterion = (&'static str, fn() -> bool);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "criterion_01_spiral_correctness",
            criterion_01_spiral_correctness,
        ),
        (
            "criterion_02_training_time_scaling",
            criterion_02_training_time_scaling,
        ),
        (
            "criterion_03_path_equivalence",
            criterion_03_path_equivalence,
        ),
        (
            "criterion_04_eigen_residual_and_zero_sum",
            criterion_04_eigen_residual_and_zero_sum,
        ),
        ("criterion_05_icd_correctness", criterion_05_icd_correctness),
        ("criterion_06_bias_identity", criterion_06_bias_identity),
        (
            "criterion_07_sparsity_improvement",
            criterion_07_sparsity_improvement,
        ),
        (
            "criterion_08_dense_oracle_equivalence",
            criterion_08_dense_oracle_equivalence,
        ),
        ("criterion_09_image_pipeline", criterion_09_image_pipeline),
        (
            "criterion_10_invariance_suite",
            criterion_10_invariance_suite,
        ),
    ];
    // cargo forwards harness flags such as --nocapture; only filters matter
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let (mut run, mut passed) = (0, 0);
    for (name, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        run += 1;
        // a panic counts as a failure but does not stop the other criteria
        let ok = std::panic::catch_unwind(f).unwrap_or_else(|_| {
            println!("{name}: FAIL [panicked]");
            false
        });
        passed += usize::from(ok);
    }
    println!("acceptance: {passed}/{run} criteria passed");
    if passed < run {
        std::process::exit(1);
    }
}
