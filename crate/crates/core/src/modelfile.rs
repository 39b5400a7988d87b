//! Text model format, version 1.
//!
//! ```text
//! KSC-MODEL 1
//! kernel rbf
//! param 6.0000000000000001e-3
//! k 2
//! encoding sign
//! bias_variant proposed
//! r 195
//! d 2
//! n_tr 3000
//! seed 0
//! REDUCED
//! <r rows of d numbers>
//! XI
//! <r rows of k-1 numbers>
//! BIAS
//! <k-1 numbers>
//! CODEBOOK | PROTOTYPES
//! <k rows of k-1 entries>
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips doubles
//! exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use faer::Mat;

use crate::data::Dataset;
use crate::error::{KscError, Result};
use crate::kernels::{KernelKind, KernelSpec};
use crate::model::{BiasVariant, Encoding, Prototypes, SparseKscModel};

pub const HEADER: &str = "KSC-MODEL";
pub const VERSION: u32 = 1;

const KEYS: [&str; 9] = [
    "kernel",
    "param",
    "k",
    "encoding",
    "bias_variant",
    "r",
    "d",
    "n_tr",
    "seed",
];

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn join_reals(it: impl Iterator<Item = f64>) -> String {
    it.map(real).collect::<Vec<_>>().join(" ")
}

pub fn to_string(m: &SparseKscModel) -> String {
    let k = m.k_clusters - 1;
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER} {VERSION}");
    let _ = writeln!(s, "kernel {}", m.kernel.kind().name());
    let _ = writeln!(s, "param {}", real(m.kernel.param()));
    let _ = writeln!(s, "k {}", m.k_clusters);
    let _ = writeln!(s, "encoding {}", m.encoding().name());
    let _ = writeln!(s, "bias_variant {}", m.bias_variant.name());
    let _ = writeln!(s, "r {}", m.rank());
    let _ = writeln!(s, "d {}", m.dim());
    let _ = writeln!(s, "n_tr {}", m.n_tr);
    let _ = writeln!(s, "seed {}", m.seed);
    s.push_str("REDUCED\n");
    for row in m.reduced_points.rows() {
        let _ = writeln!(s, "{}", join_reals(row.iter().copied()));
    }
    s.push_str("XI\n");
    for i in 0..m.rank() {
        let _ = writeln!(s, "{}", join_reals((0..k).map(|c| m.xi[(i, c)])));
    }
    s.push_str("BIAS\n");
    let _ = writeln!(s, "{}", join_reals(m.bias.iter().copied()));
    match &m.prototypes {
        Prototypes::Codebook(codes) => {
            s.push_str("CODEBOOK\n");
            for c in codes {
                let row: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        Prototypes::Directions(dirs) => {
            s.push_str("PROTOTYPES\n");
            for d in dirs {
                let _ = writeln!(s, "{}", join_reals(d.iter().copied()));
            }
        }
    }
    s
}

pub fn save(path: &Path, m: &SparseKscModel) -> Result<()> {
    std::fs::write(path, to_string(m)).map_err(|e| KscError::io(path, e))
}

pub fn load(path: &Path) -> Result<SparseKscModel> {
    let text = std::fs::read_to_string(path).map_err(|e| KscError::io(path, e))?;
    from_str(&text)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, section: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| format_err(section, "truncated: unexpected end of file"))
    }
}

fn format_err(section: &str, message: impl Into<String>) -> KscError {
    KscError::ModelFormat {
        section: section.to_string(),
        message: message.into(),
    }
}

fn parse_reals(section: &str, line_no: usize, line: &str, want: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| {
            let v: f64 = t.parse().map_err(|_| {
                format_err(section, format!("line {line_no}: '{t}' is not a number"))
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format_err(
                    section,
                    format!("line {line_no}: non-finite value '{t}'"),
                ))
            }
        })
        .collect::<Result<_>>()?;
    if vals.len() != want {
        return Err(format_err(
            section,
            format!(
                "line {line_no}: expected {want} values, found {}",
                vals.len()
            ),
        ));
    }
    Ok(vals)
}

fn expect_section(lines: &mut Lines<'_>, name: &str) -> Result<()> {
    let (no, l) = lines.next(name)?;
    if l != name {
        return Err(format_err(
            name,
            format!("line {no}: expected section {name}, found '{l}'"),
        ));
    }
    Ok(())
}

fn read_rows(
    lines: &mut Lines<'_>,
    section: &str,
    rows: usize,
    cols: usize,
) -> Result<Vec<Vec<f64>>> {
    (0..rows)
        .map(|_| {
            let (no, l) = lines.next(section)?;
            parse_reals(section, no, l, cols)
        })
        .collect()
}

pub fn from_str(text: &str) -> Result<SparseKscModel> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
    };
    let (_, head) = lines.next("header")?;
    let mut parts = head.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(HEADER), Some(v), None) if v == VERSION.to_string() => {}
        (Some(HEADER), Some(v), None) => {
            return Err(KscError::ModelVersion(format!(
                "unsupported model version '{v}', expected {VERSION}"
            )))
        }
        _ => {
            return Err(KscError::ModelVersion(format!(
                "missing '{HEADER} {VERSION}' header, found '{head}'"
            )))
        }
    }

    let mut kv: HashMap<&str, &str> = HashMap::new();
    for _ in 0..KEYS.len() {
        let (no, l) = lines.next("header")?;
        let (key, value) = l
            .split_once(' ')
            .ok_or_else(|| format_err("header", format!("line {no}: expected 'key value'")))?;
        if !KEYS.contains(&key) {
            return Err(format_err(
                "header",
                format!("line {no}: unknown key '{key}'"),
            ));
        }
        if kv.insert(key, value.trim()).is_some() {
            return Err(format_err(
                "header",
                format!("line {no}: duplicate key '{key}'"),
            ));
        }
    }
    let get = |key: &str| kv[key];
    let int = |key: &str| -> Result<usize> {
        get(key)
            .parse()
            .map_err(|_| format_err("header", format!("{key}: '{}' is not a count", get(key))))
    };
    let kind = KernelKind::parse(get("kernel"))
        .ok_or_else(|| format_err("header", format!("unknown kernel '{}'", get("kernel"))))?;
    let param = parse_reals("header", 0, get("param"), 1)?[0];
    let kernel = KernelSpec::new(kind, param).map_err(|e| format_err("header", e.to_string()))?;
    let k_clusters = int("k")?;
    if k_clusters < 2 {
        return Err(format_err("header", "k must be at least 2"));
    }
    let encoding = Encoding::parse(get("encoding"))
        .ok_or_else(|| format_err("header", format!("unknown encoding '{}'", get("encoding"))))?;
    let bias_variant = BiasVariant::parse(get("bias_variant")).ok_or_else(|| {
        format_err(
            "header",
            format!("unknown bias variant '{}'", get("bias_variant")),
        )
    })?;
    let r = int("r")?;
    let d = int("d")?;
    let n_tr = int("n_tr")?;
    let seed: u64 = get("seed").parse().map_err(|_| {
        format_err(
            "header",
            format!("seed: '{}' is not an integer", get("seed")),
        )
    })?;
    if r == 0 || d == 0 {
        return Err(format_err("header", "r and d must be positive"));
    }
    let k = k_clusters - 1;

    expect_section(&mut lines, "REDUCED")?;
    let reduced = read_rows(&mut lines, "REDUCED", r, d)?;
    expect_section(&mut lines, "XI")?;
    let xi = read_rows(&mut lines, "XI", r, k)?;
    expect_section(&mut lines, "BIAS")?;
    let (no, l) = lines.next("BIAS")?;
    let bias = parse_reals("BIAS", no, l, k)?;
    let prototypes = match encoding {
        Encoding::SignCodebook => {
            expect_section(&mut lines, "CODEBOOK")?;
            let codes = (0..k_clusters)
                .map(|_| {
                    let (no, l) = lines.next("CODEBOOK")?;
                    let row: Vec<i8> = l
                        .split_whitespace()
                        .map(|t| match t {
                            "1" => Ok(1),
                            "-1" => Ok(-1),
                            _ => Err(format_err(
                                "CODEBOOK",
                                format!("line {no}: '{t}' is not a sign"),
                            )),
                        })
                        .collect::<Result<_>>()?;
                    if row.len() != k {
                        return Err(format_err(
                            "CODEBOOK",
                            format!("line {no}: expected {k} signs"),
                        ));
                    }
                    Ok(row)
                })
                .collect::<Result<_>>()?;
            Prototypes::Codebook(codes)
        }
        Encoding::Direction => {
            expect_section(&mut lines, "PROTOTYPES")?;
            Prototypes::Directions(read_rows(&mut lines, "PROTOTYPES", k_clusters, k)?)
        }
    };
    if let Some((no, l)) = lines.inner.find(|(_, l)| !l.trim().is_empty()) {
        return Err(format_err(
            "trailer",
            format!("line {}: unexpected content '{}'", no + 1, l.trim()),
        ));
    }

    Ok(SparseKscModel {
        kernel,
        k_clusters,
        reduced_points: Dataset::from_rows(&reduced)?,
        xi: Mat::from_fn(r, k, |i, c| xi[i][c]),
        bias,
        prototypes,
        bias_variant,
        n_tr,
        seed,
    })
}
