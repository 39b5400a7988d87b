//! Datasets, synthetic generators, image featurisation and file formats.

mod csv;
mod image;
mod spiral;

pub use self::csv::{load_csv, load_labels, save_csv, save_labels};
pub use self::image::{
    image_to_histogram_dataset, minimum_variance_quantize, read_pgm, read_ppm, write_pgm,
    write_ppm, GrayImage, LabeledImage, Quantized,
};
pub use self::spiral::{generate_two_spirals, SpiralParams, DEFAULT_SPIRAL_NOISE};

use crate::error::{KscError, Result};

/// An `n × d` matrix of feature rows stored row-major, with optional integer
/// labels (ground truth, when known).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    d: usize,
    labels: Option<Vec<i64>>,
}

impl Dataset {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * d {
            return Err(KscError::DimensionMismatch {
                expected: n * d,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(KscError::NonFinite(format!(
                "dataset row {} column {}",
                pos / d.max(1),
                pos % d.max(1)
            )));
        }
        Ok(Dataset {
            values,
            n,
            d,
            labels: None,
        })
    }

    /// Builds a dataset from a list of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(KscError::DimensionMismatch {
                    expected: d,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Dataset::new(rows.len(), d, values)
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(KscError::DimensionMismatch {
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// An empty dataset with `d` columns.
    pub fn empty(d: usize) -> Self {
        Dataset {
            values: Vec::new(),
            n: 0,
            d,
            labels: None,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Copies the given rows (and their labels) into a new dataset.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(KscError::IndexOutOfRange {
                    index: i,
                    len: self.n,
                });
            }
            values.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Ok(Dataset {
            values,
            n: indices.len(),
            d: self.d,
            labels,
        })
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.d != d {
            return Err(KscError::DimensionMismatch {
                expected: d,
                found: self.d,
            });
        }
        Ok(())
    }
}
