//! Fuzzy similarity, lower/upper approximations and dependency over
//! granular-balls, plus the point-based counterpart.
//!
//! Similarity between two balls is `1 - dist_B(c_i, c_j) / sqrt(C)` where
//! `dist_B` is the Euclidean distance between centers restricted to the
//! attribute subset `B`. A ball's positive-region membership is its scaled
//! distance to the nearest ball with a different majority label, and the
//! dependency is the size-weighted mean of those memberships over the
//! original sample count.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::granular_ball::{GranularBall, GranularBallSet};

/// Sorted, duplicate-free attribute indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeSubset(Vec<usize>);

impl AttributeSubset {
    pub fn new(indices: impl IntoIterator<Item = usize>, d: usize) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateAttribute(w[0]));
            }
        }
        if let Some(&index) = v.last().filter(|&&i| i >= d) {
            return Err(Error::AttributeOutOfRange { index, d });
        }
        Ok(Self(v))
    }

    pub fn full(d: usize) -> Self {
        Self((0..d).collect())
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: usize) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn with(&self, a: usize) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&a) {
            v.insert(pos, a);
        }
        Self(v)
    }

    pub fn without(&self, a: usize) -> Self {
        Self(self.0.iter().copied().filter(|&x| x != a).collect())
    }

    pub fn is_subset_of(&self, other: &AttributeSubset) -> bool {
        self.0.iter().all(|&a| other.contains(a))
    }
}

/// Euclidean distance over the coordinates in `subset`.
pub fn subset_distance(x: &[f64], y: &[f64], subset: &AttributeSubset) -> f64 {
    subset
        .indices()
        .iter()
        .map(|&k| (x[k] - y[k]) * (x[k] - y[k]))
        .sum::<f64>()
        .sqrt()
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDistanceParameter(c))
    }
}

/// Weighted dependency with its per-unit positive-region memberships.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyResult {
    pub value: f64,
    /// Plain mean of `per_ball`, ignoring ball sizes.
    pub value_unweighted: f64,
    pub per_ball: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    pub subset: AttributeSubset,
    /// All units share one label, so memberships are 1 regardless of `C`.
    #[serde(default)]
    pub single_class: bool,
}

/// Anything that can stand in for the universe: units with coordinates, a
/// decision label and a weight, over a fixed total sample count.
pub trait Universe: Sync {
    fn units(&self) -> usize;
    fn coords(&self, j: usize) -> &[f64];
    fn class_of(&self, j: usize) -> usize;
    fn weight(&self, j: usize) -> f64;
    /// Denominator of the dependency, the original sample count.
    fn source_n(&self) -> usize;
    fn dim(&self) -> usize;

    fn single_class(&self) -> bool {
        (1..self.units()).all(|j| self.class_of(j) == self.class_of(0))
    }
}

impl Universe for GranularBallSet {
    fn units(&self) -> usize {
        self.balls.len()
    }
    fn coords(&self, j: usize) -> &[f64] {
        &self.balls[j].center
    }
    fn class_of(&self, j: usize) -> usize {
        self.balls[j].majority_label
    }
    fn weight(&self, j: usize) -> f64 {
        self.balls[j].size() as f64
    }
    fn source_n(&self) -> usize {
        self.source_n
    }
    fn dim(&self) -> usize {
        GranularBallSet::dim(self)
    }
}

impl Universe for Dataset {
    fn units(&self) -> usize {
        self.n()
    }
    fn coords(&self, j: usize) -> &[f64] {
        self.row(j)
    }
    fn class_of(&self, j: usize) -> usize {
        self.label(j)
    }
    fn weight(&self, _: usize) -> f64 {
        1.0
    }
    fn source_n(&self) -> usize {
        self.n()
    }
    fn dim(&self) -> usize {
        self.d()
    }
}

pub fn ball_similarity(
    gb_i: &GranularBall,
    gb_j: &GranularBall,
    subset: &AttributeSubset,
    c: f64,
) -> f64 {
    1.0 - subset_distance(&gb_i.center, &gb_j.center, subset) / c.sqrt()
}

/// Certain membership of ball `j` in `target_class`: scaled distance to the
/// nearest ball labeled otherwise, or 1 when every ball has the target label.
pub fn lower_approximation(
    gbs: &GranularBallSet,
    j: usize,
    target_class: usize,
    subset: &AttributeSubset,
    c: f64,
) -> f64 {
    let cj = &gbs.balls[j].center;
    let nearest = gbs
        .balls
        .iter()
        .filter(|b| b.majority_label != target_class)
        .map(|b| subset_distance(&b.center, cj, subset))
        .fold(f64::INFINITY, f64::min);
    if nearest.is_infinite() {
        1.0
    } else {
        nearest / c.sqrt()
    }
}

/// Possible membership of ball `j` in `target_class`: highest similarity to
/// a ball of that class, or 0 when the class has no balls.
pub fn upper_approximation(
    gbs: &GranularBallSet,
    j: usize,
    target_class: usize,
    subset: &AttributeSubset,
    c: f64,
) -> f64 {
    let gj = &gbs.balls[j];
    gbs.balls
        .iter()
        .filter(|b| b.majority_label == target_class)
        .map(|b| ball_similarity(b, gj, subset, c))
        .fold(None, |acc: Option<f64>, s| {
            Some(acc.map_or(s, |m| m.max(s)))
        })
        .unwrap_or(0.0)
}

/// Each ball's lower approximation of its own majority class.
pub fn positive_region(gbs: &GranularBallSet, subset: &AttributeSubset, c: f64) -> Vec<f64> {
    (0..gbs.len())
        .map(|j| lower_approximation(gbs, j, gbs.balls[j].majority_label, subset, c))
        .collect()
}

fn assemble(
    per_unit: Vec<f64>,
    weights: impl Iterator<Item = f64>,
    source_n: usize,
    subset: &AttributeSubset,
    c: f64,
    single_class: bool,
) -> DependencyResult {
    let weighted: f64 = per_unit.iter().zip(weights).map(|(p, w)| w * p).sum();
    let unweighted = if per_unit.is_empty() {
        0.0
    } else {
        per_unit.iter().sum::<f64>() / per_unit.len() as f64
    };
    DependencyResult {
        value: weighted / source_n as f64,
        value_unweighted: unweighted,
        per_ball: per_unit,
        c,
        subset: subset.clone(),
        single_class,
    }
}

/// Size-weighted granular-ball dependency of the decision on `subset`.
pub fn weighted_dependency(
    gbs: &GranularBallSet,
    subset: &AttributeSubset,
    c: f64,
) -> Result<DependencyResult> {
    check_c(c)?;
    if gbs.source_n == 0 {
        return Err(Error::EmptyDataset);
    }
    let per_ball = positive_region(gbs, subset, c);
    Ok(assemble(
        per_ball,
        gbs.balls.iter().map(|b| b.size() as f64),
        gbs.source_n,
        subset,
        c,
        Universe::single_class(gbs),
    ))
}

/// Point-based fuzzy rough dependency: every sample is its own unit.
pub fn classic_dependency(
    ds: &Dataset,
    subset: &AttributeSubset,
    c: f64,
) -> Result<DependencyResult> {
    check_c(c)?;
    let scale = c.sqrt();
    let per_point: Vec<f64> = (0..ds.n())
        .map(|j| {
            let xj = ds.row(j);
            let yj = ds.label(j);
            let nearest = (0..ds.n())
                .filter(|&i| ds.label(i) != yj)
                .map(|i| subset_distance(ds.row(i), xj, subset))
                .fold(f64::INFINITY, f64::min);
            if nearest.is_infinite() {
                1.0
            } else {
                nearest / scale
            }
        })
        .collect();
    Ok(assemble(
        per_point,
        std::iter::repeat(1.0),
        ds.n(),
        subset,
        c,
        ds.present_classes() <= 1,
    ))
}

/// Dependency over any [`Universe`], computed directly.
pub fn dependency<U: Universe + ?Sized>(
    u: &U,
    subset: &AttributeSubset,
    c: f64,
) -> Result<DependencyResult> {
    check_c(c)?;
    let scale = c.sqrt();
    let per_unit: Vec<f64> = (0..u.units())
        .map(|j| {
            let xj = u.coords(j);
            let yj = u.class_of(j);
            let nearest = (0..u.units())
                .filter(|&i| u.class_of(i) != yj)
                .map(|i| subset_distance(u.coords(i), xj, subset))
                .fold(f64::INFINITY, f64::min);
            if nearest.is_infinite() {
                1.0
            } else {
                nearest / scale
            }
        })
        .collect();
    Ok(assemble(
        per_unit,
        (0..u.units()).map(|j| u.weight(j)),
        u.source_n(),
        subset,
        c,
        u.single_class(),
    ))
}

/// Re-expresses a dependency at another distance parameter by scaling with
/// `sqrt(C_old / C_new)`.
pub fn rescale_dependency(result: &DependencyResult, c_new: f64) -> Result<DependencyResult> {
    check_c(c_new)?;
    if result.single_class || c_new == result.c {
        return Ok(DependencyResult {
            c: c_new,
            ..result.clone()
        });
    }
    let factor = (result.c / c_new).sqrt();
    Ok(DependencyResult {
        value: result.value * factor,
        value_unweighted: result.value_unweighted * factor,
        per_ball: result.per_ball.iter().map(|p| p * factor).collect(),
        c: c_new,
        subset: result.subset.clone(),
        single_class: false,
    })
}

/// Dependency evaluation that grows a subset one attribute at a time.
///
/// For every unit it keeps the squared distances to all differently
/// labeled units accumulated over the attributes added so far, so scoring
/// a candidate attribute costs one pass over those pairs.
pub struct IncrementalDependency<'a, U: Universe + ?Sized> {
    universe: &'a U,
    partners: Vec<Vec<u32>>,
    accumulated: Vec<Vec<f64>>,
    chosen: Vec<usize>,
}

impl<'a, U: Universe + ?Sized> IncrementalDependency<'a, U> {
    pub fn new(universe: &'a U) -> Self {
        let m = universe.units();
        let partners: Vec<Vec<u32>> = (0..m)
            .map(|j| {
                (0..m)
                    .filter(|&i| universe.class_of(i) != universe.class_of(j))
                    .map(|i| i as u32)
                    .collect()
            })
            .collect();
        let accumulated = partners.iter().map(|p| vec![0.0; p.len()]).collect();
        Self {
            universe,
            partners,
            accumulated,
            chosen: Vec::new(),
        }
    }

    /// Attributes added so far, in insertion order.
    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    fn per_unit(&self, extra: Option<usize>, c: f64) -> Vec<f64> {
        let scale = c.sqrt();
        let u = self.universe;
        (0..u.units())
            .map(|j| {
                let partners = &self.partners[j];
                if partners.is_empty() {
                    return 1.0;
                }
                let acc = &self.accumulated[j];
                let nearest_sq = match extra {
                    None => acc.iter().copied().fold(f64::INFINITY, f64::min),
                    Some(a) => {
                        let xa = u.coords(j)[a];
                        partners
                            .iter()
                            .zip(acc)
                            .map(|(&i, &s)| {
                                let diff = u.coords(i as usize)[a] - xa;
                                s + diff * diff
                            })
                            .fold(f64::INFINITY, f64::min)
                    }
                };
                nearest_sq.sqrt() / scale
            })
            .collect()
    }

    fn weighted(&self, per_unit: &[f64]) -> f64 {
        let u = self.universe;
        per_unit
            .iter()
            .enumerate()
            .map(|(j, p)| u.weight(j) * p)
            .sum::<f64>()
            / u.source_n() as f64
    }

    /// Dependency of the current subset.
    pub fn current(&self, c: f64) -> f64 {
        self.weighted(&self.per_unit(None, c))
    }

    /// Dependency of the current subset plus `a`, without committing it.
    pub fn with_candidate(&self, a: usize, c: f64) -> f64 {
        self.weighted(&self.per_unit(Some(a), c))
    }

    pub fn current_result(&self, c: f64) -> DependencyResult {
        let per_unit = self.per_unit(None, c);
        let subset = AttributeSubset(sorted(&self.chosen));
        let u = self.universe;
        assemble(
            per_unit,
            (0..u.units()).map(|j| u.weight(j)),
            u.source_n(),
            &subset,
            c,
            u.single_class(),
        )
    }

    pub fn push(&mut self, a: usize) {
        let u = self.universe;
        for (j, (partners, acc)) in self.partners.iter().zip(&mut self.accumulated).enumerate() {
            let xa = u.coords(j)[a];
            for (&i, s) in partners.iter().zip(acc.iter_mut()) {
                let diff = u.coords(i as usize)[a] - xa;
                *s += diff * diff;
            }
        }
        self.chosen.push(a);
    }
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}
