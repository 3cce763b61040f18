//! Attribute significance and forward greedy reduction.
//!
//! Under the default schedule the distance parameter tracks the subset
//! size, `C = |B|`. A dependency computed at `C = i` converts to
//! `C = i + 1` by the factor `sqrt(i / (i + 1))`, so the significance of a
//! candidate `a` is `W(B + a, C = i + 1) - sqrt(i / (i + 1)) * W(B, C = i)`
//! and reuses the dependency already known for `B`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy_rough::{dependency, AttributeSubset, IncrementalDependency, Universe};

/// Minimum dependency gain for a candidate to be accepted.
pub const GAIN_EPSILON: f64 = 1e-9;

/// How the distance parameter `C` is chosen for a subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CMode {
    /// `C = |B|`.
    Schedule,
    Fixed(f64),
}

impl CMode {
    pub fn for_size(self, size: usize) -> f64 {
        match self {
            CMode::Schedule => size.max(1) as f64,
            CMode::Fixed(c) => c,
        }
    }
}

impl std::str::FromStr for CMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "schedule" {
            return Ok(CMode::Schedule);
        }
        match s.strip_prefix("fixed:").map(str::parse::<f64>) {
            Some(Ok(c)) if c.is_finite() && c > 0.0 => Ok(CMode::Fixed(c)),
            _ => Err(format!(
                "expected `schedule` or `fixed:<positive value>`, got {s:?}"
            )),
        }
    }
}

impl std::fmt::Display for CMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CMode::Schedule => f.write_str("schedule"),
            CMode::Fixed(c) => write!(f, "fixed:{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    GranularBall,
    ClassicPoint,
}

impl std::fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionMode::GranularBall => "granular-ball",
            SelectionMode::ClassicPoint => "classic-point",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    NoGain,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub mode: SelectionMode,
    pub c_mode: CMode,
    /// Attribute indices in the order they were accepted.
    pub chosen: Vec<usize>,
    pub dependency_path: Vec<f64>,
    pub significance_path: Vec<f64>,
    /// Significance of the best candidate of every round, including the
    /// final rejected one.
    pub round_best_significance: Vec<f64>,
    pub stopped_reason: StopReason,
}

impl SelectionTrace {
    pub fn subset(&self, d: usize) -> AttributeSubset {
        AttributeSubset::new(self.chosen.iter().copied(), d)
            .expect("trace holds distinct attributes")
    }

    /// Whether the best-candidate significance ended no higher than it
    /// started.
    pub fn significance_settled(&self) -> bool {
        match (
            self.round_best_significance.first(),
            self.round_best_significance.last(),
        ) {
            (Some(first), Some(last)) => last <= first,
            _ => true,
        }
    }
}

fn dependency_value<U: Universe + ?Sized>(u: &U, subset: &AttributeSubset, c: f64) -> Result<f64> {
    if subset.is_empty() {
        return Ok(0.0);
    }
    Ok(dependency(u, subset, c)?.value)
}

fn check_candidate<U: Universe + ?Sized>(a: usize, subset: &AttributeSubset, u: &U) -> Result<()> {
    if subset.contains(a) {
        return Err(Error::AttributeInSubset(a));
    }
    if a >= u.dim() {
        return Err(Error::AttributeOutOfRange {
            index: a,
            d: u.dim(),
        });
    }
    Ok(())
}

/// Factor that carries a dependency from `C = i` to `C = i + 1`. A
/// single-class universe has constant memberships, so nothing rescales.
fn carry_factor<U: Universe + ?Sized>(u: &U, i: usize) -> f64 {
    if u.single_class() {
        1.0
    } else {
        (i as f64 / (i + 1) as f64).sqrt()
    }
}

/// Significance of `a` relative to `subset` under the `C = |B|` schedule,
/// via the iterative form. The empty subset has dependency 0.
pub fn significance<U: Universe + ?Sized>(
    a: usize,
    subset: &AttributeSubset,
    u: &U,
) -> Result<f64> {
    check_candidate(a, subset, u)?;
    let i = subset.len();
    let grown = dependency_value(u, &subset.with(a), (i + 1) as f64)?;
    if i == 0 {
        return Ok(grown);
    }
    let base = dependency_value(u, subset, i as f64)?;
    Ok(grown - carry_factor(u, i) * base)
}

/// Significance as the plain difference of dependencies, both at
/// `C = |B| + 1`.
pub fn significance_direct<U: Universe + ?Sized>(
    a: usize,
    subset: &AttributeSubset,
    u: &U,
) -> Result<f64> {
    check_candidate(a, subset, u)?;
    let c = (subset.len() + 1) as f64;
    Ok(dependency_value(u, &subset.with(a), c)? - dependency_value(u, subset, c)?)
}

/// Greedy forward selection. Each round scores every remaining attribute
/// added to the current subset, keeps the best (lowest index on ties) and
/// accepts it only if it beats the running dependency by more than
/// [`GAIN_EPSILON`]. The trace is never empty when `u.dim() >= 1`.
pub fn forward_select<U: Universe + ?Sized>(
    u: &U,
    mode: SelectionMode,
    c_mode: CMode,
) -> SelectionTrace {
    let d = u.dim();
    let mut engine = IncrementalDependency::new(u);
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut best = 0.0;
    let mut trace = SelectionTrace {
        mode,
        c_mode,
        chosen: Vec::new(),
        dependency_path: Vec::new(),
        significance_path: Vec::new(),
        round_best_significance: Vec::new(),
        stopped_reason: StopReason::Exhausted,
    };

    while !remaining.is_empty() {
        let i = trace.chosen.len();
        let c = c_mode.for_size(i + 1);
        let scores: Vec<f64> = remaining
            .par_iter()
            .map(|&a| engine.with_candidate(a, c))
            .collect();
        let (pos, score) =
            scores
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (p, &s)| if s > acc.1 { (p, s) } else { acc },
                );
        let carried = match c_mode {
            CMode::Schedule if i > 0 => carry_factor(u, i) * best,
            _ => best,
        };
        let sig = score - carried;
        trace.round_best_significance.push(sig);
        // The first round always takes its best attribute.
        if i > 0 && score <= best + GAIN_EPSILON {
            trace.stopped_reason = StopReason::NoGain;
            break;
        }
        let a = remaining.remove(pos);
        engine.push(a);
        best = score;
        trace.chosen.push(a);
        trace.dependency_path.push(score);
        trace.significance_path.push(sig);
    }
    trace
}

/// Whether `subset` is a reduct: every member is indispensable (removing
/// it lowers the dependency, each side at its own `C`) and its dependency
/// matches the full attribute set once both are brought to a common `C`.
pub fn check_reduction<U: Universe + ?Sized>(
    subset: &AttributeSubset,
    u: &U,
    c_mode: CMode,
) -> Result<bool> {
    if subset.is_empty() {
        return Ok(false);
    }
    let k = subset.len();
    let own = dependency_value(u, subset, c_mode.for_size(k))?;
    for &a in subset.indices() {
        let reduced = subset.without(a);
        let without = dependency_value(u, &reduced, c_mode.for_size(k - 1))?;
        if own - without <= GAIN_EPSILON {
            return Ok(false);
        }
    }
    let full = AttributeSubset::full(u.dim());
    let c_full = c_mode.for_size(full.len());
    let full_value = dependency_value(u, &full, c_full)?;
    let own_at_full = if u.single_class() {
        own
    } else {
        own * (c_mode.for_size(k) / c_full).sqrt()
    };
    Ok((own_at_full - full_value).abs() <= GAIN_EPSILON)
}
