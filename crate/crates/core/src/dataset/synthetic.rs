//! Seeded synthetic datasets for tests, benchmarks and the `check` command.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::Dataset;
use crate::rng;

fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("a{j}")).collect()
}

/// Two Gaussian classes whose means differ by `separation` standard
/// deviations on each of the first `informative` attributes. The remaining
/// `irrelevant` attributes are uniform noise. Classes alternate by row.
pub fn two_clusters(
    n: usize,
    informative: usize,
    irrelevant: usize,
    separation: f64,
    seed: u64,
) -> Dataset {
    let d = informative + irrelevant;
    let mut rng = rng::seeded(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % 2;
        let shift = if y == 0 { 0.0 } else { separation };
        let mut row = Vec::with_capacity(d);
        for _ in 0..informative {
            row.push(shift + unit.sample(&mut rng));
        }
        for _ in 0..irrelevant {
            row.push(rng.random_range(0.0..4.0));
        }
        rows.push(row);
        labels.push(y);
    }
    Dataset::new(rows, labels, names(d), vec!["c0".into(), "c1".into()])
        .expect("generator produces a valid dataset")
}

/// `classes` isotropic Gaussian blobs with centers drawn uniformly from the
/// unit cube and standard deviation `spread`.
pub fn gaussian_blobs(n: usize, d: usize, classes: usize, spread: f64, seed: u64) -> Dataset {
    let mut rng = rng::seeded(seed);
    let noise = Normal::new(0.0, spread).expect("valid spread");
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % classes;
        rows.push(
            centers[y]
                .iter()
                .map(|&c| c + noise.sample(&mut rng))
                .collect(),
        );
        labels.push(y);
    }
    Dataset::new(
        rows,
        labels,
        names(d),
        (0..classes).map(|c| format!("c{c}")).collect(),
    )
    .expect("generator produces a valid dataset")
}

/// Uniform features with uniformly random labels.
pub fn uniform_random(n: usize, d: usize, classes: usize, seed: u64) -> Dataset {
    let mut rng = rng::seeded(seed);
    let rows = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
    Dataset::new(
        rows,
        labels,
        names(d),
        (0..classes).map(|c| format!("c{c}")).collect(),
    )
    .expect("generator produces a valid dataset")
}
