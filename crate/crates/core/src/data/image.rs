//! Binary PPM/PGM I/O, minimum-variance colour quantisation and local colour
//! histograms.

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{KscError, Result};

/// An 8-bit RGB image, pixels in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

/// An 8-bit single-channel image; used for label maps where the gray level is
/// the region id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl LabeledImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(KscError::Image(format!(
                "{}x{} image needs {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            )));
        }
        Ok(LabeledImage {
            width,
            height,
            pixels,
        })
    }
}

struct Header {
    width: usize,
    height: usize,
    payload: usize,
}

/// Parses a netpbm header (`magic width height maxval` separated by
/// whitespace, `#` comments allowed) and returns the offset of the payload.
fn parse_header(bytes: &[u8], magic: &[u8; 2]) -> Result<Header> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(KscError::Image(format!(
            "expected magic {}",
            String::from_utf8_lossy(magic)
        )));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(KscError::Image("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|c| c.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(KscError::Image("non-numeric header field".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| KscError::Image("header field out of range".into()))?;
    }
    if !bytes.get(pos).is_some_and(|c| c.is_ascii_whitespace()) {
        return Err(KscError::Image("missing whitespace after maxval".into()));
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(KscError::Image(format!(
            "unsupported maxval {maxval} (need 255)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(KscError::Image("empty image".into()));
    }
    Ok(Header {
        width,
        height,
        payload: pos + 1,
    })
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<LabeledImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| KscError::io(path, e))?;
    let h = parse_header(&bytes, b"P6")?;
    let need = h.width * h.height * 3;
    let data = &bytes[h.payload..];
    if data.len() < need {
        return Err(KscError::Image(format!(
            "truncated payload: {} of {need} bytes",
            data.len()
        )));
    }
    let pixels = data[..need]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    LabeledImage::new(h.width, h.height, pixels)
}

pub fn write_ppm(path: impl AsRef<Path>, image: &LabeledImage) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P6\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(image.pixels.iter().flatten());
    fs::write(path, out).map_err(|e| KscError::io(path, e))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| KscError::io(path, e))?;
    let h = parse_header(&bytes, b"P5")?;
    let need = h.width * h.height;
    let data = &bytes[h.payload..];
    if data.len() < need {
        return Err(KscError::Image(format!(
            "truncated payload: {} of {need} bytes",
            data.len()
        )));
    }
    Ok(GrayImage {
        width: h.width,
        height: h.height,
        pixels: data[..need].to_vec(),
    })
}

pub fn write_pgm(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    fs::write(path, out).map_err(|e| KscError::io(path, e))
}

/// Result of colour quantisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    /// Box centroids (mean colour); at most `levels` entries.
    pub palette: Vec<[f64; 3]>,
    /// Palette index of every pixel.
    pub indices: Vec<usize>,
}

impl Quantized {
    /// Total squared error of the pixels against their palette entry.
    pub fn squared_error(&self, image: &LabeledImage) -> f64 {
        image
            .pixels
            .iter()
            .zip(&self.indices)
            .map(|(p, &k)| {
                (0..3)
                    .map(|c| (p[c] as f64 - self.palette[k][c]).powi(2))
                    .sum::<f64>()
            })
            .sum()
    }
}

#[derive(Clone, Copy)]
struct ColorCount {
    rgb: [u8; 3],
    count: f64,
}

struct ColorBox {
    colors: Vec<ColorCount>,
    sse: f64,
}

impl ColorBox {
    fn new(colors: Vec<ColorCount>) -> Self {
        let sse = box_sse(&colors);
        ColorBox { colors, sse }
    }

    fn mean(&self) -> [f64; 3] {
        let w: f64 = self.colors.iter().map(|c| c.count).sum();
        let mut m = [0.0; 3];
        for c in &self.colors {
            for (k, mk) in m.iter_mut().enumerate() {
                *mk += c.count * c.rgb[k] as f64;
            }
        }
        m.map(|v| v / w)
    }
}

fn box_sse(colors: &[ColorCount]) -> f64 {
    let mut w = 0.0;
    let mut s = [0.0; 3];
    let mut q = 0.0;
    for c in colors {
        w += c.count;
        for (acc, &channel) in s.iter_mut().zip(&c.rgb) {
            let v = channel as f64;
            *acc += c.count * v;
            q += c.count * v * v;
        }
    }
    if w == 0.0 {
        return 0.0;
    }
    (q - s.iter().map(|v| v * v).sum::<f64>() / w).max(0.0)
}

/// Splits a box along its highest-variance channel at the threshold that
/// minimises the summed squared error of the two halves.
fn split(mut b: ColorBox) -> (ColorBox, ColorBox) {
    let w: f64 = b.colors.iter().map(|c| c.count).sum();
    let axis = (0..3)
        .map(|k| {
            let mean = b
                .colors
                .iter()
                .map(|c| c.count * c.rgb[k] as f64)
                .sum::<f64>()
                / w;
            let var = b
                .colors
                .iter()
                .map(|c| c.count * (c.rgb[k] as f64 - mean).powi(2))
                .sum::<f64>();
            (k, var)
        })
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        })
        .0;
    b.colors.sort_by_key(|c| (c.rgb[axis], c.rgb));

    // Prefix sums of weight, per-channel weighted sums and weighted squares.
    let n = b.colors.len();
    let mut pw = vec![0.0; n + 1];
    let mut ps = vec![[0.0; 3]; n + 1];
    let mut pq = vec![0.0; n + 1];
    for (i, c) in b.colors.iter().enumerate() {
        pw[i + 1] = pw[i] + c.count;
        pq[i + 1] = pq[i];
        for (k, &channel) in c.rgb.iter().enumerate() {
            let v = channel as f64;
            ps[i + 1][k] = ps[i][k] + c.count * v;
            pq[i + 1] += c.count * v * v;
        }
    }
    let sse_of = |wt: f64, s: [f64; 3], q: f64| {
        if wt == 0.0 {
            0.0
        } else {
            (q - s.iter().map(|v| v * v).sum::<f64>() / wt).max(0.0)
        }
    };
    let mut best = (f64::INFINITY, 1);
    for cut in 1..n {
        if b.colors[cut].rgb[axis] == b.colors[cut - 1].rgb[axis] {
            continue;
        }
        let left = sse_of(pw[cut], ps[cut], pq[cut]);
        let rs = [0, 1, 2].map(|k| ps[n][k] - ps[cut][k]);
        let right = sse_of(pw[n] - pw[cut], rs, pq[n] - pq[cut]);
        if left + right < best.0 {
            best = (left + right, cut);
        }
    }
    let high = b.colors.split_off(best.1);
    (ColorBox::new(b.colors), ColorBox::new(high))
}

/// Greedy minimum-variance quantisation: the box with the largest squared
/// error is split repeatedly until `levels` boxes exist or every box holds a
/// single colour. Pixels map to the box that contains their colour.
pub fn minimum_variance_quantize(image: &LabeledImage, levels: usize) -> Result<Quantized> {
    if levels == 0 {
        return Err(KscError::InvalidParameter("levels must be >= 1".into()));
    }
    if image.pixels.is_empty() {
        return Err(KscError::Image("empty image".into()));
    }
    let mut counts = std::collections::BTreeMap::<[u8; 3], f64>::new();
    for p in &image.pixels {
        *counts.entry(*p).or_default() += 1.0;
    }
    let colors: Vec<ColorCount> = counts
        .into_iter()
        .map(|(rgb, count)| ColorCount { rgb, count })
        .collect();
    let mut boxes = vec![ColorBox::new(colors)];
    while boxes.len() < levels {
        let (idx, sse) =
            boxes
                .iter()
                .enumerate()
                .map(|(i, b)| (i, b.sse))
                .fold(
                    (0, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if sse <= 0.0 || boxes[idx].colors.len() < 2 {
            break;
        }
        let b = boxes.swap_remove(idx);
        let (lo, hi) = split(b);
        // keep creation order stable: low half takes the old slot
        boxes.push(lo);
        let last = boxes.len() - 1;
        boxes.swap(idx, last);
        boxes.push(hi);
    }

    let mut lookup = std::collections::HashMap::<[u8; 3], usize>::new();
    for (k, b) in boxes.iter().enumerate() {
        for c in &b.colors {
            lookup.insert(c.rgb, k);
        }
    }
    let palette = boxes.iter().map(ColorBox::mean).collect();
    let indices = image.pixels.iter().map(|p| lookup[p]).collect();
    Ok(Quantized { palette, indices })
}

/// Normalised histogram of palette indices in a `window × window`
/// neighbourhood of every pixel (clamp-to-edge at the border). Rows follow
/// row-major pixel order and have `levels` columns.
pub fn image_to_histogram_dataset(
    image: &LabeledImage,
    window: usize,
    levels: usize,
) -> Result<(Dataset, Quantized)> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(KscError::InvalidParameter(format!(
            "window must be odd and >= 1, got {window}"
        )));
    }
    let q = minimum_variance_quantize(image, levels)?;
    let (w, h) = (image.width, image.height);
    let half = (window / 2) as isize;
    let norm = 1.0 / (window * window) as f64;
    let mut values = vec![0.0; w * h * levels];
    for y in 0..h {
        for x in 0..w {
            let row = &mut values[(y * w + x) * levels..(y * w + x + 1) * levels];
            for dy in -half..=half {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                for dx in -half..=half {
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    row[q.indices[yy * w + xx]] += norm;
                }
            }
        }
    }
    Ok((Dataset::new(w * h, levels, values)?, q))
}
