//! Granular-ball partitioning of a training set.
//!
//! The universe is first cut into about `sqrt(n)` clusters by k-means. Any
//! ball whose purity falls below the threshold is split in two by 2-means
//! until every ball is pure enough or cannot be split further. Finally,
//! overlapping balls with different majority labels are split apart.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

const PURITY_SLACK: f64 = 1e-12;
const KMEANS_MAX_ITERS: usize = 100;
const KMEANS_TOL: f64 = 1e-6;
const LLOYD_MAX_ITERS: usize = 100;

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularBall {
    /// Row indices into the dataset the ball was built from, ascending.
    pub members: Vec<usize>,
    pub center: Vec<f64>,
    /// Mean member distance to the center.
    pub radius: f64,
    pub purity: f64,
    pub majority_label: usize,
    /// Display radius after overlap truncation. Membership is unaffected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated_radius: Option<f64>,
}

impl GranularBall {
    pub fn from_members(mut members: Vec<usize>, ds: &Dataset) -> Result<Self> {
        members.sort_unstable();
        let points: Vec<&[f64]> = members.iter().map(|&i| ds.row(i)).collect();
        let (center, radius) = compute_center_radius(&points)?;
        let labels: Vec<usize> = members.iter().map(|&i| ds.label(i)).collect();
        let (purity, majority_label) = purity_and_label(&labels)?;
        Ok(Self {
            members,
            center,
            radius,
            purity,
            majority_label,
            truncated_radius: None,
        })
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// A ball can be split when it has two members with different features.
    pub fn is_splittable(&self, ds: &Dataset) -> bool {
        match self.members.split_first() {
            Some((&first, rest)) if !rest.is_empty() => {
                let head = ds.row(first);
                rest.iter().any(|&i| ds.row(i) != head)
            }
            _ => false,
        }
    }

    pub fn meets(&self, threshold: f64) -> bool {
        self.purity + PURITY_SLACK >= threshold
    }
}

/// Mean of the points and mean Euclidean distance to that mean.
pub fn compute_center_radius(points: &[&[f64]]) -> Result<(Vec<f64>, f64)> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let d = first.len();
    let n = points.len() as f64;
    let mut center = vec![0.0; d];
    for p in points {
        for (c, x) in center.iter_mut().zip(p.iter()) {
            *c += x;
        }
    }
    for c in &mut center {
        *c /= n;
    }
    let radius = points.iter().map(|p| euclidean(p, &center)).sum::<f64>() / n;
    Ok((center, radius))
}

/// Majority-class share and the majority class. Ties go to the smaller id.
pub fn purity_and_label(labels: &[usize]) -> Result<(f64, usize)> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &y in labels {
        *counts.entry(y).or_default() += 1;
    }
    let (label, count) =
        counts.into_iter().fold(
            (usize::MAX, 0),
            |best, (y, c)| if c > best.1 { (y, c) } else { best },
        );
    Ok((count as f64 / labels.len() as f64, label))
}

/// Splits a ball in two with Lloyd's 2-means, seeded by the farthest pair
/// of members (first such pair in member order).
pub fn two_means_split(ball: &GranularBall, ds: &Dataset) -> Result<(GranularBall, GranularBall)> {
    if !ball.is_splittable(ds) {
        return Err(Error::NonSplittable);
    }
    let members = &ball.members;
    let mut seeds = (0, 0);
    let mut widest = -1.0;
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            let dist = squared_distance(ds.row(members[a]), ds.row(members[b]));
            if dist > widest {
                widest = dist;
                seeds = (a, b);
            }
        }
    }
    let mut centroids = [
        ds.row(members[seeds.0]).to_vec(),
        ds.row(members[seeds.1]).to_vec(),
    ];
    let mut assignment = vec![0u8; members.len()];
    assignment[seeds.1] = 1;

    for _ in 0..LLOYD_MAX_ITERS {
        let next: Vec<u8> = members
            .iter()
            .map(|&i| {
                let p = ds.row(i);
                u8::from(squared_distance(p, &centroids[1]) < squared_distance(p, &centroids[0]))
            })
            .collect();
        // Keep the last assignment with two nonempty sides.
        if next.iter().all(|&s| s == 0) || next.iter().all(|&s| s == 1) {
            break;
        }
        let changed = next != assignment;
        assignment = next;
        centroids = [0u8, 1].map(|side| {
            let pts: Vec<&[f64]> = members
                .iter()
                .zip(&assignment)
                .filter(|&(_, &s)| s == side)
                .map(|(&i, _)| ds.row(i))
                .collect();
            compute_center_radius(&pts).expect("nonempty side").0
        });
        if !changed {
            break;
        }
    }

    let (left, right): (Vec<_>, Vec<_>) =
        members.iter().zip(&assignment).partition(|&(_, &s)| s == 0);
    let left = left.into_iter().map(|(&i, _)| i).collect();
    let right = right.into_iter().map(|(&i, _)| i).collect();
    Ok((
        GranularBall::from_members(left, ds)?,
        GranularBall::from_members(right, ds)?,
    ))
}

/// How many clusters the initial k-means pass produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialCount {
    SqrtCeil,
    SqrtFloor,
    Fixed(usize),
}

impl InitialCount {
    pub fn resolve(self, n: usize) -> usize {
        let k = match self {
            InitialCount::SqrtCeil => (n as f64).sqrt().ceil() as usize,
            InitialCount::SqrtFloor => (n as f64).sqrt().floor() as usize,
            InitialCount::Fixed(k) => k,
        };
        k.clamp(1, n.max(1))
    }
}

impl std::str::FromStr for InitialCount {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ceil" => Ok(InitialCount::SqrtCeil),
            "floor" => Ok(InitialCount::SqrtFloor),
            other => other
                .parse()
                .map(InitialCount::Fixed)
                .map_err(|_| format!("expected ceil, floor or a count, got {other:?}")),
        }
    }
}

impl std::fmt::Display for InitialCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialCount::SqrtCeil => f.write_str("ceil"),
            InitialCount::SqrtFloor => f.write_str("floor"),
            InitialCount::Fixed(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallConfig {
    pub purity: f64,
    pub seed: u64,
    pub initial: InitialCount,
    pub remove_overlap: bool,
}

impl BallConfig {
    pub fn new(purity: f64, seed: u64) -> Self {
        Self {
            purity,
            seed,
            initial: InitialCount::SqrtCeil,
            remove_overlap: true,
        }
    }
}

/// A partition of the training universe into granular-balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularBallSet {
    pub purity_threshold: f64,
    /// Size of the original universe.
    pub source_n: usize,
    pub balls: Vec<GranularBall>,
}

impl GranularBallSet {
    /// One ball per sample.
    pub fn singletons(ds: &Dataset) -> Self {
        let balls = (0..ds.n())
            .map(|i| GranularBall::from_members(vec![i], ds).expect("singleton is nonempty"))
            .collect();
        Self {
            purity_threshold: 1.0,
            source_n: ds.n(),
            balls,
        }
    }

    /// Builds balls from explicit member groups, which must partition the
    /// dataset.
    pub fn from_groups(
        ds: &Dataset,
        groups: Vec<Vec<usize>>,
        purity_threshold: f64,
    ) -> Result<Self> {
        let balls = groups
            .into_iter()
            .map(|g| GranularBall::from_members(g, ds))
            .collect::<Result<Vec<_>>>()?;
        let set = Self {
            purity_threshold,
            source_n: ds.n(),
            balls,
        };
        set.validate_against(ds)?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.balls.first().map_or(0, |b| b.center.len())
    }

    /// Checks that the balls partition `[0, ds.n())` and agree with the
    /// dataset's width.
    pub fn validate_against(&self, ds: &Dataset) -> Result<()> {
        if self.source_n != ds.n() {
            return Err(Error::BallSetMismatch(format!(
                "ball set covers {} samples, dataset has {}",
                self.source_n,
                ds.n()
            )));
        }
        let mut seen = vec![false; ds.n()];
        for (b, ball) in self.balls.iter().enumerate() {
            if ball.members.is_empty() {
                return Err(Error::BallSetMismatch(format!("ball {b} is empty")));
            }
            if ball.center.len() != ds.d() {
                return Err(Error::BallSetMismatch(format!(
                    "ball {b} center has {} coordinates, dataset has {}",
                    ball.center.len(),
                    ds.d()
                )));
            }
            for &i in &ball.members {
                if i >= ds.n() || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::BallSetMismatch(format!(
                        "sample {i} is out of range or in two balls"
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(Error::BallSetMismatch(format!("sample {i} is in no ball")));
        }
        Ok(())
    }

    fn sort_canonical(&mut self) {
        self.balls.sort_by_key(|b| b.members[0]);
    }
}

fn kmeans_pp_seeds(ds: &Dataset, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = ds.n();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(ds.row(rng.random_range(0..n)).to_vec());
    let mut nearest: Vec<f64> = ds
        .rows()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = ds.row(pick).to_vec();
        for (i, p) in ds.rows().enumerate() {
            nearest[i] = nearest[i].min(squared_distance(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn nearest_centroid(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let dist = squared_distance(p, centroid);
        if dist < best_d {
            best_d = dist;
            best = c;
        }
    }
    best
}

/// Moves the farthest member of the largest cluster into each empty one.
fn repair_empty(ds: &Dataset, assignment: &mut [usize], centroids: &[Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &c in assignment.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let largest = (0..k).fold(0, |best, c| if counts[c] > counts[best] { c } else { best });
        if counts[largest] < 2 {
            return;
        }
        let mut far = usize::MAX;
        let mut far_d = -1.0;
        for (i, &c) in assignment.iter().enumerate() {
            if c == largest {
                let dist = squared_distance(ds.row(i), &centroids[largest]);
                if dist > far_d {
                    far_d = dist;
                    far = i;
                }
            }
        }
        assignment[far] = empty;
    }
}

/// Lloyd's k-means with k-means++ seeding. Returns the member lists of the
/// nonempty clusters.
pub fn kmeans(ds: &Dataset, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let n = ds.n();
    let k = k.clamp(1, n);
    let mut rng = rng::seeded(seed);
    let mut centroids = kmeans_pp_seeds(ds, k, &mut rng);
    let mut assignment = vec![0usize; n];
    for _ in 0..KMEANS_MAX_ITERS {
        for (i, p) in ds.rows().enumerate() {
            assignment[i] = nearest_centroid(p, &centroids);
        }
        repair_empty(ds, &mut assignment, &centroids);
        let mut sums = vec![vec![0.0; ds.d()]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in ds.rows().enumerate() {
            let c = assignment[i];
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut movement: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            for s in &mut sums[c] {
                *s /= counts[c] as f64;
            }
            movement = movement.max(euclidean(&sums[c], &centroids[c]));
            centroids[c] = std::mem::take(&mut sums[c]);
        }
        if movement < KMEANS_TOL {
            break;
        }
    }
    let mut clusters = vec![Vec::new(); k];
    for (i, &c) in assignment.iter().enumerate() {
        clusters[c].push(i);
    }
    clusters.retain(|c| !c.is_empty());
    clusters
}

/// Splits `ball` until every piece meets `threshold` or cannot be split.
fn purify(ball: GranularBall, ds: &Dataset, threshold: f64) -> Vec<GranularBall> {
    let mut queue = VecDeque::from([ball]);
    let mut done = Vec::new();
    while let Some(ball) = queue.pop_front() {
        if !ball.meets(threshold) && ball.is_splittable(ds) {
            let (a, b) = two_means_split(&ball, ds).expect("splittable ball");
            queue.push_back(a);
            queue.push_back(b);
        } else {
            done.push(ball);
        }
    }
    done
}

/// Builds the granular-ball partition of a normalized dataset.
pub fn generate(ds: &Dataset, cfg: &BallConfig) -> Result<GranularBallSet> {
    if !(cfg.purity > 0.0 && cfg.purity <= 1.0) {
        return Err(Error::InvalidPurity(cfg.purity));
    }
    let k = cfg.initial.resolve(ds.n());
    let initial = kmeans(ds, k, cfg.seed);
    let mut balls = Vec::new();
    for members in initial {
        let ball = GranularBall::from_members(members, ds)?;
        balls.extend(purify(ball, ds, cfg.purity));
    }
    let mut set = GranularBallSet {
        purity_threshold: cfg.purity,
        source_n: ds.n(),
        balls,
    };
    set.sort_canonical();
    if cfg.remove_overlap {
        set = remove_heterogeneous_overlap(set, ds);
    }
    Ok(set)
}

fn overlaps(a: &GranularBall, b: &GranularBall) -> bool {
    a.majority_label != b.majority_label && euclidean(&a.center, &b.center) < a.radius + b.radius
}

/// Preferred ball to split within an overlapping pair: lower purity, then
/// larger radius, then lower index.
fn split_order(balls: &[GranularBall], i: usize, j: usize) -> [usize; 2] {
    let (a, b) = (&balls[i], &balls[j]);
    let i_first = if a.purity != b.purity {
        a.purity < b.purity
    } else if a.radius != b.radius {
        a.radius > b.radius
    } else {
        true
    };
    if i_first {
        [i, j]
    } else {
        [j, i]
    }
}

/// Splits overlapping heterogeneous balls apart. Each round splits one ball
/// of the first offending pair; after `10 * m` rounds, or when an offending
/// pair has no splittable member, the remaining overlaps get truncated
/// display radii instead.
pub fn remove_heterogeneous_overlap(mut set: GranularBallSet, ds: &Dataset) -> GranularBallSet {
    let threshold = set.purity_threshold;
    let cap = 10 * set.balls.len().max(1);
    let mut splittable: Vec<bool> = set.balls.iter().map(|b| b.is_splittable(ds)).collect();

    for _ in 0..cap {
        let mut target = None;
        'scan: for i in 0..set.balls.len() {
            for j in i + 1..set.balls.len() {
                if !overlaps(&set.balls[i], &set.balls[j]) {
                    continue;
                }
                if let Some(&t) = split_order(&set.balls, i, j)
                    .iter()
                    .find(|&&t| splittable[t])
                {
                    target = Some(t);
                    break 'scan;
                }
            }
        }
        let Some(t) = target else { break };
        let ball = set.balls.remove(t);
        splittable.remove(t);
        let (a, b) = two_means_split(&ball, ds).expect("target is splittable");
        let mut pieces = purify(a, ds, threshold);
        pieces.extend(purify(b, ds, threshold));
        for (offset, piece) in pieces.into_iter().enumerate() {
            splittable.insert(t + offset, piece.is_splittable(ds));
            set.balls.insert(t + offset, piece);
        }
    }

    for i in 0..set.balls.len() {
        for j in i + 1..set.balls.len() {
            if overlaps(&set.balls[i], &set.balls[j]) {
                let half = 0.5 * euclidean(&set.balls[i].center, &set.balls[j].center);
                for t in [i, j] {
                    let ball = &mut set.balls[t];
                    let current = ball.truncated_radius.unwrap_or(ball.radius);
                    ball.truncated_radius = Some(current.min(half));
                }
            }
        }
    }
    set.sort_canonical();
    set
}
