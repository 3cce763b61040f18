use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Noise applied to a dataset so far. Held-out folds must stay at zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub label_rate: f64,
    pub attribute_rate: f64,
    /// Indices whose labels were flipped.
    pub flipped: Vec<usize>,
}

impl NoiseRecord {
    pub fn is_clean(&self) -> bool {
        self.label_rate == 0.0 && self.attribute_rate == 0.0
    }
}

/// Number of labels flipped for `rate` over `n` samples, `floor(rate * n)`.
/// The small slack keeps e.g. `0.29 * 100` from landing on 28.
pub fn flip_count(rate: f64, n: usize) -> usize {
    ((rate * n as f64) + 1e-9).floor() as usize
}

/// Flips `floor(rate * n)` distinct labels, each to a uniformly chosen
/// different class.
pub fn inject_label_noise(ds: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidNoiseRate(rate));
    }
    let count = flip_count(rate, ds.n()).min(ds.n());
    if count == 0 {
        return Ok(ds.clone());
    }
    let l = ds.class_count();
    if l < 2 {
        return Err(Error::SingleClassNoise);
    }
    let mut rng = rng::seeded(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, ds.n(), count).into_vec();
    chosen.sort_unstable();

    let mut out = ds.clone();
    for &i in &chosen {
        let old = out.labels()[i];
        let r = rng.random_range(0..l - 1);
        out.labels_mut()[i] = if r >= old { r + 1 } else { r };
    }
    let noise = out.noise_mut();
    noise.label_rate = rate;
    noise.flipped = chosen;
    Ok(out)
}

/// Adds independent uniform `[-rate, rate]` perturbations to every cell and
/// clips back into `[0, 1]`.
pub fn inject_attribute_noise(ds: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidNoiseRate(rate));
    }
    if rate == 0.0 {
        return Ok(ds.clone());
    }
    let mut rng = rng::seeded(seed);
    let mut out = ds.clone();
    for x in out.features_mut() {
        let u: f64 = rng.random_range(-rate..=rate);
        *x = perturb(*x, u);
    }
    out.noise_mut().attribute_rate = rate;
    Ok(out)
}

fn perturb(x: f64, u: f64) -> f64 {
    (x + u).clamp(0.0, 1.0)
}
