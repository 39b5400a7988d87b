use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Dataset;
use crate::error::{KscError, Result};

/// Shape of the two intertwined Archimedean spirals `r(θ) = a + bθ`.
///
/// The second arm is the first rotated by π. All coordinates are multiplied
/// by `scale` before noise is added, so `noise` is in output units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralParams {
    pub a: f64,
    pub b: f64,
    pub theta0: f64,
    pub turns: f64,
    pub scale: f64,
}

impl Default for SpiralParams {
    fn default() -> Self {
        SpiralParams {
            a: 1.0,
            b: 0.5,
            theta0: PI / 2.0,
            turns: 2.5,
            scale: 0.25,
        }
    }
}

/// Default noise standard deviation, in output units.
pub const DEFAULT_SPIRAL_NOISE: f64 = 0.02;

const TABLE_STEPS: usize = 8192;

struct ArcTable {
    theta: Vec<f64>,
    arc: Vec<f64>,
}

impl ArcTable {
    fn new(p: &SpiralParams) -> Self {
        let span = p.turns * 2.0 * PI;
        let speed = |t: f64| ((p.a + p.b * t).powi(2) + p.b * p.b).sqrt();
        let mut theta = Vec::with_capacity(TABLE_STEPS + 1);
        let mut arc = Vec::with_capacity(TABLE_STEPS + 1);
        let h = span / TABLE_STEPS as f64;
        let mut s = 0.0;
        for i in 0..=TABLE_STEPS {
            let t = p.theta0 + h * i as f64;
            if i > 0 {
                s += 0.5 * h * (speed(t - h) + speed(t));
            }
            theta.push(t);
            arc.push(s);
        }
        ArcTable { theta, arc }
    }

    fn total(&self) -> f64 {
        self.arc[TABLE_STEPS]
    }

    /// Angle at arc length `s` by linear interpolation of the table.
    fn theta_at(&self, s: f64) -> f64 {
        let k = self.arc.partition_point(|&v| v < s).clamp(1, TABLE_STEPS);
        let (s0, s1) = (self.arc[k - 1], self.arc[k]);
        let w = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
        self.theta[k - 1] + w * (self.theta[k] - self.theta[k - 1])
    }
}

/// Samples `n` labelled points from two intertwined spirals, uniformly in arc
/// length along each arm, with isotropic Gaussian noise of std `noise`.
/// The first `⌈n/2⌉` rows belong to arm 0, the rest to arm 1.
pub fn generate_two_spirals(
    n: usize,
    noise: f64,
    seed: u64,
    params: &SpiralParams,
) -> Result<Dataset> {
    if n < 2 {
        return Err(KscError::InvalidParameter(format!(
            "spiral needs at least 2 points, got {n}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(KscError::InvalidParameter(format!(
            "noise must be >= 0, got {noise}"
        )));
    }
    let table = ArcTable::new(params);
    let total = table.total();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid std");
    let per_arm = [n.div_ceil(2), n / 2];
    let mut values = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (arm, &count) in per_arm.iter().enumerate() {
        let offset = PI * arm as f64;
        for _ in 0..count {
            let t = table.theta_at(rng.random::<f64>() * total);
            let r = params.a + params.b * t;
            let mut x = params.scale * r * (t + offset).cos();
            let mut y = params.scale * r * (t + offset).sin();
            if noise > 0.0 {
                x += gauss.sample(&mut rng);
                y += gauss.sample(&mut rng);
            }
            values.push(x);
            values.push(y);
            labels.push(arm as i64);
        }
    }
    Dataset::new(n, 2, values)?.with_labels(labels)
}
