//! Shared fixtures and naive reference implementations for integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use gbfrs::dataset::{load_csv, normalize_min_max, synthetic, CsvOptions, Dataset};
use gbfrs::granular_ball::GranularBallSet;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn load_raw(name: &str) -> Dataset {
    load_csv(data_path(name), &CsvOptions::default())
        .expect("bundled dataset loads")
        .dataset
}

pub fn load_normalized(name: &str) -> Dataset {
    normalize_min_max(&load_raw(name))
}

pub fn wine() -> Dataset {
    load_normalized("wine.csv")
}

pub fn iris() -> Dataset {
    load_normalized("iris.csv")
}

pub fn wdbc() -> Dataset {
    load_normalized("wdbc.csv")
}

pub fn two_clusters() -> Dataset {
    normalize_min_max(&synthetic::two_clusters(200, 4, 4, 2.0, 11))
}

pub fn blobs() -> Dataset {
    normalize_min_max(&synthetic::gaussian_blobs(180, 6, 3, 0.15, 5))
}

/// Squared distances summed over `attrs`, then one square root.
pub fn naive_distance(x: &[f64], y: &[f64], attrs: &[usize]) -> f64 {
    let mut s = 0.0;
    for &a in attrs {
        s += (x[a] - y[a]) * (x[a] - y[a]);
    }
    s.sqrt()
}

/// Weighted dependency by the definition: for every unit, the distance to
/// the nearest unit of another label over `sqrt(c)`, weighted by unit size
/// and divided by the sample count.
pub fn naive_dependency(
    centers: &[Vec<f64>],
    labels: &[usize],
    weights: &[f64],
    n: usize,
    attrs: &[usize],
    c: f64,
) -> f64 {
    let mut total = 0.0;
    for j in 0..centers.len() {
        let mut nearest = f64::INFINITY;
        for k in 0..centers.len() {
            if labels[k] != labels[j] {
                let dist = naive_distance(&centers[j], &centers[k], attrs);
                if dist < nearest {
                    nearest = dist;
                }
            }
        }
        let membership = if nearest.is_infinite() {
            1.0
        } else {
            nearest / c.sqrt()
        };
        total += weights[j] * membership;
    }
    total / n as f64
}

pub fn naive_ball_dependency(gbs: &GranularBallSet, attrs: &[usize], c: f64) -> f64 {
    let centers: Vec<Vec<f64>> = gbs.balls.iter().map(|b| b.center.clone()).collect();
    let labels: Vec<usize> = gbs.balls.iter().map(|b| b.majority_label).collect();
    let weights: Vec<f64> = gbs.balls.iter().map(|b| b.members.len() as f64).collect();
    naive_dependency(&centers, &labels, &weights, gbs.source_n, attrs, c)
}

pub fn naive_point_dependency(ds: &Dataset, attrs: &[usize], c: f64) -> f64 {
    let centers: Vec<Vec<f64>> = ds.rows().map(|r| r.to_vec()).collect();
    naive_dependency(&centers, ds.labels(), &vec![1.0; ds.n()], ds.n(), attrs, c)
}

/// Significance as `W(B + a) - sqrt(i / (i + 1)) W(B)` with `C = |B|` for
/// each subset, `i = |B|`. With a single class every membership is 1 and the
/// carried term is `W(B)` unscaled.
pub fn naive_significance(gbs: &GranularBallSet, a: usize, attrs: &[usize]) -> f64 {
    let i = attrs.len();
    let mut grown = attrs.to_vec();
    grown.push(a);
    let w_grown = naive_ball_dependency(gbs, &grown, (i + 1) as f64);
    if i == 0 {
        return w_grown;
    }
    let w = naive_ball_dependency(gbs, attrs, i as f64);
    let first = gbs.balls[0].majority_label;
    if gbs.balls.iter().all(|b| b.majority_label == first) {
        return w_grown - w;
    }
    w_grown - (i as f64 / (i + 1) as f64).sqrt() * w
}
