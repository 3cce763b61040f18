//! Invariant suite run by the `check` subcommand against one dataset.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::feature_selection::{
    forward_select, significance, significance_direct, CMode, SelectionMode,
};
use crate::fuzzy_rough::{
    ball_similarity, classic_dependency, lower_approximation, positive_region, rescale_dependency,
    weighted_dependency, AttributeSubset,
};
use crate::granular_ball::{
    compute_center_radius, generate, BallConfig, GranularBallSet, InitialCount,
};
use crate::rng;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CheckSettings {
    pub purities: Vec<f64>,
    pub seed: u64,
    pub subsets: usize,
    pub initial: InitialCount,
}

fn outcome(name: &str, failures: Vec<String>, checked: usize) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checked} cases")
        } else {
            format!(
                "{} of {checked} failed; first: {}",
                failures.len(),
                failures[0]
            )
        },
    }
}

fn random_subset(rng: &mut ChaCha8Rng, d: usize) -> AttributeSubset {
    let size = rng.random_range(1..=d);
    let mut all: Vec<usize> = (0..d).collect();
    all.shuffle(rng);
    all.truncate(size);
    AttributeSubset::new(all, d).expect("distinct in-range indices")
}

/// `(smaller, larger)` with `smaller ⊆ larger`, both nonempty.
fn random_nested(rng: &mut ChaCha8Rng, d: usize) -> (AttributeSubset, AttributeSubset) {
    let larger = random_subset(rng, d);
    let keep = rng.random_range(1..=larger.len());
    let mut idx = larger.indices().to_vec();
    idx.shuffle(rng);
    idx.truncate(keep);
    (
        AttributeSubset::new(idx, d).expect("subset of valid subset"),
        larger,
    )
}

fn ball_sets(ds: &Dataset, s: &CheckSettings) -> Result<Vec<(f64, GranularBallSet)>> {
    s.purities
        .iter()
        .map(|&t| {
            let cfg = BallConfig {
                initial: s.initial,
                ..BallConfig::new(t, s.seed)
            };
            Ok((t, generate(ds, &cfg)?))
        })
        .collect()
}

pub fn run_checks(ds: &Dataset, s: &CheckSettings) -> Result<Vec<CheckOutcome>> {
    let mut rng = rng::stream(s.seed, &[0xc4ec]);
    let d = ds.d();
    let sets = ball_sets(ds, s)?;
    let mut out = Vec::new();

    let mut fails = Vec::new();
    for (t, gbs) in &sets {
        if let Err(e) = gbs.validate_against(ds) {
            fails.push(format!("T={t}: {e}"));
        }
    }
    out.push(outcome("partition", fails, sets.len()));

    let mut fails = Vec::new();
    let mut count = 0;
    for (t, gbs) in &sets {
        for (j, b) in gbs.balls.iter().enumerate() {
            count += 1;
            if !b.meets(*t) && b.is_splittable(ds) {
                fails.push(format!("T={t} ball {j} purity {}", b.purity));
            }
        }
    }
    out.push(outcome("purity-or-non-splittable", fails, count));

    let mut fails = Vec::new();
    let mut count = 0;
    for (t, gbs) in &sets {
        let b = random_subset(&mut rng, d);
        let projected = ds.project(b.indices())?;
        for (j, ball) in gbs.balls.iter().enumerate() {
            count += 1;
            let pts: Vec<&[f64]> = ball.members.iter().map(|&i| projected.row(i)).collect();
            let (center, _) = compute_center_radius(&pts)?;
            let worst = b
                .indices()
                .iter()
                .zip(&center)
                .map(|(&a, c)| (ball.center[a] - c).abs())
                .fold(0.0, f64::max);
            if worst > 1e-12 {
                fails.push(format!("T={t} ball {j}: {worst:e}"));
            }
        }
    }
    out.push(outcome("center-projection", fails, count));

    let mut fails = Vec::new();
    for (t, gbs) in &sets {
        let again = generate(
            ds,
            &BallConfig {
                initial: s.initial,
                ..BallConfig::new(*t, s.seed)
            },
        )?;
        if serde_json::to_string(gbs)? != serde_json::to_string(&again)? {
            fails.push(format!("T={t}"));
        }
    }
    out.push(outcome("determinism", fails, sets.len()));

    let singletons = GranularBallSet::singletons(ds);
    let mut fails = Vec::new();
    for _ in 0..s.subsets {
        let b = random_subset(&mut rng, d);
        let c = b.len() as f64;
        let ball = weighted_dependency(&singletons, &b, c)?.value;
        let point = classic_dependency(ds, &b, c)?.value;
        if (ball - point).abs() > 1e-10 {
            fails.push(format!("{:?}: {ball} vs {point}", b.indices()));
        }
    }
    out.push(outcome("singleton-equivalence", fails, s.subsets));

    let mut fails = Vec::new();
    for i in 0..s.subsets {
        let (_, gbs) = &sets[i % sets.len()];
        let b = random_subset(&mut rng, d);
        let c1 = rng.random_range(0.5..(2 * d) as f64);
        let c2 = rng.random_range(0.5..(2 * d) as f64);
        let scaled = rescale_dependency(&weighted_dependency(gbs, &b, c1)?, c2)?.value;
        let direct = weighted_dependency(gbs, &b, c2)?.value;
        if (scaled - direct).abs() > 1e-12 {
            fails.push(format!("C {c1}->{c2}: {scaled} vs {direct}"));
        }
    }
    out.push(outcome("scaling", fails, s.subsets));

    let mut fails = Vec::new();
    let c = d as f64;
    for i in 0..s.subsets {
        let (_, gbs) = &sets[i % sets.len()];
        let (small, large) = random_nested(&mut rng, d);
        let ws = weighted_dependency(gbs, &small, c)?;
        let wl = weighted_dependency(gbs, &large, c)?;
        if ws.value > wl.value + 1e-12 {
            fails.push(format!("dependency {} > {}", ws.value, wl.value));
        }
        if let Some(j) = (0..gbs.len()).find(|&j| ws.per_ball[j] > wl.per_ball[j] + 1e-12) {
            fails.push(format!("ball {j} positive region shrank"));
        }
        let m = gbs.len();
        if m > 1 {
            let (p, q) = (rng.random_range(0..m), rng.random_range(0..m));
            let rs = ball_similarity(&gbs.balls[p], &gbs.balls[q], &small, c);
            let rl = ball_similarity(&gbs.balls[p], &gbs.balls[q], &large, c);
            if rl > rs + 1e-12 {
                fails.push(format!("similarity {rl} > {rs}"));
            }
        }
    }
    out.push(outcome("monotonicity-fixed-c", fails, s.subsets));

    let mut fails = Vec::new();
    let mut count = 0;
    let classes = ds.class_count();
    for (t, gbs) in &sets {
        let b = random_subset(&mut rng, d);
        for (j, ball) in gbs.balls.iter().enumerate() {
            for class in (0..classes).filter(|&k| k != ball.majority_label) {
                count += 1;
                let low = lower_approximation(gbs, j, class, &b, b.len() as f64);
                if low != 0.0 {
                    fails.push(format!("T={t} ball {j} class {class}: {low}"));
                }
            }
        }
    }
    out.push(outcome("self-inclusion-zero", fails, count));

    let mut fails = Vec::new();
    for i in 0..s.subsets {
        let (_, gbs) = &sets[i % sets.len()];
        let b = random_subset(&mut rng, d);
        let Some(a) = (0..d).find(|a| !b.contains(*a)) else {
            continue;
        };
        let iterative = significance(a, &b, gbs)?;
        let direct = significance_direct(a, &b, gbs)?;
        if (iterative - direct).abs() > 1e-12 {
            fails.push(format!("a={a}: {iterative} vs {direct}"));
        }
    }
    out.push(outcome("significance-routes", fails, s.subsets));

    let mut fails = Vec::new();
    for (t, gbs) in &sets {
        let trace = forward_select(gbs, SelectionMode::GranularBall, CMode::Schedule);
        if trace.chosen.is_empty() && d > 0 {
            fails.push(format!("T={t}: empty selection"));
        }
        if let Some(sig) = trace.significance_path.iter().find(|&&s| s <= 0.0) {
            fails.push(format!("T={t}: accepted significance {sig}"));
        }
        if trace.dependency_path.windows(2).any(|w| w[1] <= w[0]) {
            fails.push(format!("T={t}: dependency path not increasing"));
        }
        let pos = positive_region(gbs, &trace.subset(d), trace.chosen.len().max(1) as f64);
        if pos.iter().any(|p| !(0.0..=1.0 + 1e-12).contains(p)) {
            fails.push(format!("T={t}: positive region outside [0,1]"));
        }
    }
    out.push(outcome("selection-trace", fails, sets.len()));

    Ok(out)
}
