//! Cross-validated kNN evaluation of selected subsets under label or
//! attribute noise.
//!
//! Every run normalizes with training-fold statistics, injects noise into
//! the training fold only, selects attributes on the (noisy) training fold
//! and scores a kNN classifier on the clean test fold.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    inject_attribute_noise, inject_label_noise, kfold_split, Dataset, MinMaxScaler,
};
use crate::error::{Error, Result};
use crate::feature_selection::{forward_select, CMode, SelectionMode, SelectionTrace};
use crate::fuzzy_rough::{subset_distance, AttributeSubset};
use crate::granular_ball::{generate, BallConfig, InitialCount};
use crate::rng::derive_seed;

const FOLD_TAG: u64 = 0xf01d;
const NOISE_TAG: u64 = 0x0153;
const INNER_TAG: u64 = 0x1a2e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Gbfrs,
    ClassicFrs,
    AllFeatures,
}

impl Method {
    pub fn id(self) -> u64 {
        match self {
            Method::Gbfrs => 1,
            Method::ClassicFrs => 2,
            Method::AllFeatures => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Gbfrs => "gbfrs",
            Method::ClassicFrs => "classic-frs",
            Method::AllFeatures => "all-features",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gbfrs" => Ok(Method::Gbfrs),
            "classic-frs" | "classic" => Ok(Method::ClassicFrs),
            "all-features" | "all" => Ok(Method::AllFeatures),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Label,
    Attribute,
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseKind::Label => "label",
            NoiseKind::Attribute => "attribute",
        })
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "label" => Ok(NoiseKind::Label),
            "attribute" => Ok(NoiseKind::Attribute),
            other => Err(format!("unknown noise kind {other:?}")),
        }
    }
}

/// 0.60, 0.65, ..., 1.00
pub fn default_purity_grid() -> Vec<f64> {
    (0..=8).map(|i| f64::from(60 + 5 * i) / 100.0).collect()
}

/// 0.00, 0.05, ..., 0.30
pub fn default_noise_levels() -> Vec<f64> {
    (0..=6).map(|i| f64::from(5 * i) / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub purity_grid: Vec<f64>,
    pub noise_levels: Vec<f64>,
    pub noise_kind: NoiseKind,
    pub folds: usize,
    pub inner_folds: usize,
    pub knn_k: usize,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub c_mode: CMode,
    pub stratified: bool,
    pub initial_balls: InitialCount,
    /// Wall-clock timing makes reports differ run to run.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            purity_grid: default_purity_grid(),
            noise_levels: default_noise_levels(),
            noise_kind: NoiseKind::Label,
            folds: 5,
            inner_folds: 3,
            knn_k: 3,
            seeds: vec![1],
            methods: vec![Method::Gbfrs, Method::ClassicFrs, Method::AllFeatures],
            c_mode: CMode::Schedule,
            stratified: true,
            initial_balls: InitialCount::SqrtCeil,
            record_timing: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.inner_folds < 2 {
            return bad(format!(
                "inner folds must be at least 2, got {}",
                self.inner_folds
            ));
        }
        if self.knn_k == 0 {
            return bad("knn k must be positive".into());
        }
        if self.purity_grid.is_empty() {
            return bad("purity grid is empty".into());
        }
        if let Some(&t) = self.purity_grid.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::InvalidPurity(t));
        }
        if let Some(&r) = self
            .noise_levels
            .iter()
            .find(|&&r| !(0.0..1.0).contains(&r))
        {
            return Err(Error::InvalidNoiseRate(r));
        }
        if self.noise_levels.is_empty() || self.seeds.is_empty() || self.methods.is_empty() {
            return bad("noise levels, seeds and methods must be nonempty".into());
        }
        Ok(())
    }
}

/// Majority vote among the `k` nearest training rows over `subset`.
/// Distance ties go to the lower training index, vote ties to the lower
/// class id.
pub fn knn_predict(
    train: &Dataset,
    test: &Dataset,
    subset: &AttributeSubset,
    k: usize,
) -> Result<Vec<usize>> {
    if k == 0 || k > train.n() {
        return Err(Error::KnnTooLarge { k, n: train.n() });
    }
    let classes = train.class_count().max(test.class_count());
    let predictions = test
        .rows()
        .map(|query| {
            let mut dists: Vec<(f64, usize)> = train
                .rows()
                .enumerate()
                .map(|(i, x)| (subset_distance(x, query, subset), i))
                .collect();
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes = vec![0usize; classes];
            for &(_, i) in &dists[..k] {
                votes[train.label(i)] += 1;
            }
            votes
                .iter()
                .enumerate()
                .fold(
                    (0, 0),
                    |best, (c, &v)| if v > best.1 { (c, v) } else { best },
                )
                .0
        })
        .collect();
    Ok(predictions)
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Accuracy of each purity threshold under inner cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub best: f64,
    pub accuracy_by_purity: Vec<(f64, f64)>,
}

/// Picks the purity threshold whose ball-selected subset gives the best
/// inner-CV kNN accuracy on `train`. Ties go to the larger threshold.
pub fn purity_grid_search(
    train: &Dataset,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<GridSearch> {
    let mut grid = cfg.purity_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let largest = *grid
        .last()
        .ok_or_else(|| Error::Config("purity grid is empty".into()))?;
    if grid.len() == 1 || train.n() < 2 {
        return Ok(GridSearch {
            best: largest,
            accuracy_by_purity: Vec::new(),
        });
    }
    let inner = cfg.inner_folds.min(train.n());
    let split = kfold_split(
        train,
        inner,
        derive_seed(seed, &[INNER_TAG]),
        cfg.stratified,
    )?;
    let folds: Vec<(Dataset, Dataset)> = (0..split.k())
        .map(|f| (train.subset(&split.train(f)), train.subset(split.test(f))))
        .collect();

    let mut accuracy_by_purity = Vec::with_capacity(grid.len());
    for (g, &t) in grid.iter().enumerate() {
        let mut accs = Vec::with_capacity(folds.len());
        for (f, (fit, val)) in folds.iter().enumerate() {
            let ball_cfg = BallConfig {
                purity: t,
                seed: derive_seed(seed, &[INNER_TAG, g as u64, f as u64]),
                initial: cfg.initial_balls,
                remove_overlap: true,
            };
            let gbs = generate(fit, &ball_cfg)?;
            let trace = forward_select(&gbs, SelectionMode::GranularBall, cfg.c_mode);
            let subset = trace.subset(fit.d());
            let k = cfg.knn_k.min(fit.n());
            let pred = knn_predict(fit, val, &subset, k)?;
            accs.push(accuracy(&pred, val.labels()));
        }
        accuracy_by_purity.push((t, mean_std(&accs).0));
    }
    let best = accuracy_by_purity
        .iter()
        .fold((largest, f64::NEG_INFINITY), |acc, &(t, a)| {
            if a >= acc.1 {
                (t, a)
            } else {
                acc
            }
        })
        .0;
    Ok(GridSearch {
        best,
        accuracy_by_purity,
    })
}

/// Attributes chosen by a method on a normalized training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub subset: AttributeSubset,
    pub purity: Option<f64>,
    pub trace: Option<SelectionTrace>,
}

pub fn select_subset(
    train: &Dataset,
    cfg: &ExperimentConfig,
    method: Method,
    seed: u64,
) -> Result<Selection> {
    match method {
        Method::AllFeatures => Ok(Selection {
            subset: AttributeSubset::full(train.d()),
            purity: None,
            trace: None,
        }),
        Method::ClassicFrs => {
            let trace = forward_select(train, SelectionMode::ClassicPoint, cfg.c_mode);
            Ok(Selection {
                subset: trace.subset(train.d()),
                purity: None,
                trace: Some(trace),
            })
        }
        Method::Gbfrs => {
            let purity = purity_grid_search(train, cfg, seed)?.best;
            let ball_cfg = BallConfig {
                purity,
                seed,
                initial: cfg.initial_balls,
                remove_overlap: true,
            };
            let gbs = generate(train, &ball_cfg)?;
            let trace = forward_select(&gbs, SelectionMode::GranularBall, cfg.c_mode);
            Ok(Selection {
                subset: trace.subset(train.d()),
                purity: Some(purity),
                trace: Some(trace),
            })
        }
    }
}

/// One outer fold of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub seed: u64,
    pub fold: usize,
    pub accuracy: f64,
    pub subset: Vec<usize>,
    pub purity: Option<f64>,
    /// The test fold had no noise applied.
    pub test_clean: bool,
    #[serde(skip)]
    pub seconds: f64,
}

fn dataset_tag(ds: &Dataset) -> u64 {
    // FNV-1a over features and labels
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(ds.n() as u64);
    eat(ds.d() as u64);
    for &x in ds.features() {
        eat(x.to_bits());
    }
    for &y in ds.labels() {
        eat(y as u64);
    }
    h
}

fn run_fold(
    ds: &Dataset,
    cfg: &ExperimentConfig,
    method: Method,
    noise: f64,
    seed: u64,
    fold: usize,
    split: &crate::dataset::FoldSplit,
) -> Result<FoldOutcome> {
    let started = Instant::now();
    let tag = dataset_tag(ds);
    let raw_train = ds.subset(&split.train(fold));
    let raw_test = ds.subset(split.test(fold));
    let scaler = MinMaxScaler::fit(&raw_train);
    let clean_train = scaler.transform(&raw_train);
    let test = scaler.transform(&raw_test);

    let noise_seed = derive_seed(seed, &[tag, NOISE_TAG, noise.to_bits(), fold as u64]);
    let train = match cfg.noise_kind {
        NoiseKind::Label => inject_label_noise(&clean_train, noise, noise_seed)?,
        NoiseKind::Attribute => inject_attribute_noise(&clean_train, noise, noise_seed)?,
    };
    let method_seed = derive_seed(seed, &[tag, method.id(), noise.to_bits(), fold as u64]);
    let selection = select_subset(&train, cfg, method, method_seed)?;
    let k = cfg.knn_k.min(train.n());
    let pred = knn_predict(&train, &test, &selection.subset, k)?;
    Ok(FoldOutcome {
        seed,
        fold,
        accuracy: accuracy(&pred, test.labels()),
        subset: selection.subset.indices().to_vec(),
        purity: selection.purity,
        test_clean: test.noise().is_clean(),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Aggregated runs of one (method, noise level) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub method: Method,
    pub noise_level: f64,
    pub runs: Vec<FoldOutcome>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_subset_size: f64,
}

impl CellStats {
    fn from_runs(method: Method, noise_level: f64, runs: Vec<FoldOutcome>) -> Self {
        let accs: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
        let (mean_accuracy, std_accuracy) = mean_std(&accs);
        let sizes: Vec<f64> = runs.iter().map(|r| r.subset.len() as f64).collect();
        Self {
            method,
            noise_level,
            mean_accuracy,
            std_accuracy,
            mean_subset_size: mean_std(&sizes).0,
            runs,
        }
    }
}

/// k-fold cross-validation of one method at one noise level for one seed.
pub fn cross_validate(
    ds: &Dataset,
    cfg: &ExperimentConfig,
    method: Method,
    noise: f64,
    seed: u64,
) -> Result<CellStats> {
    cfg.validate()?;
    let split = kfold_split(
        ds,
        cfg.folds,
        derive_seed(seed, &[dataset_tag(ds), FOLD_TAG]),
        cfg.stratified,
    )?;
    let runs = (0..cfg.folds)
        .into_par_iter()
        .map(|f| run_fold(ds, cfg, method, noise, seed, f, &split))
        .collect::<Result<Vec<_>>>()?;
    Ok(CellStats::from_runs(method, noise, runs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub dataset: String,
    pub method: Method,
    pub noise_kind: NoiseKind,
    pub noise_level: f64,
    pub knn_k: usize,
    pub runs: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_subset_size: f64,
    /// Purity threshold chosen per run (ball method only).
    pub chosen_purity: Vec<f64>,
    pub accuracies: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub config: ExperimentConfig,
    pub cells: Vec<CellReport>,
}

impl EvaluationReport {
    pub fn cell(&self, method: Method, noise_level: f64) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.noise_level == noise_level)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "dataset",
            "method",
            "noise_kind",
            "noise_level",
            "knn_k",
            "runs",
            "mean_accuracy",
            "std_accuracy",
            "mean_subset_size",
            "mean_chosen_purity",
            "seconds",
        ])?;
        for c in &self.cells {
            let purity = if c.chosen_purity.is_empty() {
                String::new()
            } else {
                format!("{:.4}", mean_std(&c.chosen_purity).0)
            };
            w.write_record([
                c.dataset.clone(),
                c.method.to_string(),
                c.noise_kind.to_string(),
                format!("{}", c.noise_level),
                c.knn_k.to_string(),
                c.runs.to_string(),
                format!("{:.6}", c.mean_accuracy),
                format!("{:.6}", c.std_accuracy),
                format!("{:.4}", c.mean_subset_size),
                purity,
                c.seconds.map(|s| format!("{s:.3}")).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv output>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Every configured method at every noise level, pooled over seeds and
/// folds. Cells are ordered by method, then noise level.
pub fn noise_sweep(
    ds: &Dataset,
    cfg: &ExperimentConfig,
    dataset_name: &str,
) -> Result<EvaluationReport> {
    cfg.validate()?;
    let tag = dataset_tag(ds);
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let mut levels = cfg.noise_levels.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let splits = cfg
        .seeds
        .iter()
        .map(|&s| {
            kfold_split(
                ds,
                cfg.folds,
                derive_seed(s, &[tag, FOLD_TAG]),
                cfg.stratified,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for &m in &methods {
        for &noise in &levels {
            for (s, &seed) in cfg.seeds.iter().enumerate() {
                for fold in 0..cfg.folds {
                    jobs.push((m, noise, s, seed, fold));
                }
            }
        }
    }
    let outcomes = jobs
        .par_iter()
        .map(|&(m, noise, s, seed, fold)| run_fold(ds, cfg, m, noise, seed, fold, &splits[s]))
        .collect::<Result<Vec<_>>>()?;

    let per_cell = cfg.seeds.len() * cfg.folds;
    let cells = outcomes
        .chunks(per_cell)
        .zip(
            methods
                .iter()
                .flat_map(|&m| levels.iter().map(move |&l| (m, l))),
        )
        .map(|(runs, (method, noise_level))| {
            let stats = CellStats::from_runs(method, noise_level, runs.to_vec());
            CellReport {
                dataset: dataset_name.to_string(),
                method,
                noise_kind: cfg.noise_kind,
                noise_level,
                knn_k: cfg.knn_k,
                runs: runs.len(),
                mean_accuracy: stats.mean_accuracy,
                std_accuracy: stats.std_accuracy,
                mean_subset_size: stats.mean_subset_size,
                chosen_purity: runs.iter().filter_map(|r| r.purity).collect(),
                accuracies: runs.iter().map(|r| r.accuracy).collect(),
                seconds: cfg
                    .record_timing
                    .then(|| runs.iter().map(|r| r.seconds).sum()),
            }
        })
        .collect();
    Ok(EvaluationReport {
        dataset: dataset_name.to_string(),
        config: cfg.clone(),
        cells,
    })
}
