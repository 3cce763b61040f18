//! Labeled tabular data: CSV loading, min-max scaling, noise injection and
//! fold splitting.
//!
//! A [`Dataset`] stores features row-major as `f64` with one class id per
//! row. Class ids are contiguous in `[0, class_count)` and map back to the
//! original label strings through [`Dataset::class_names`].

mod folds;
mod noise;
pub mod synthetic;

use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use folds::{kfold_split, FoldSplit};
pub use noise::{inject_attribute_noise, inject_label_noise, NoiseRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n: usize,
    d: usize,
    labels: Vec<usize>,
    attribute_names: Vec<String>,
    class_names: Vec<String>,
    scaling: Option<MinMaxScaler>,
    noise: NoiseRecord,
}

impl Dataset {
    /// Builds a dataset from row vectors. Labels must be class ids below
    /// `class_names.len()`.
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        attribute_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let d = attribute_names.len();
        let mut features = Vec::with_capacity(n * d);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedRow {
                    row: i,
                    found: row.len(),
                    expected: d,
                });
            }
            features.extend(row);
        }
        Self::from_flat(features, d, labels, attribute_names, class_names)
    }

    pub fn from_flat(
        features: Vec<f64>,
        d: usize,
        labels: Vec<usize>,
        attribute_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("dataset needs at least one attribute".into()));
        }
        if attribute_names.len() != d {
            return Err(Error::Config(format!(
                "{} attribute names for {d} columns",
                attribute_names.len()
            )));
        }
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.len() != n * d {
            return Err(Error::Config(format!(
                "feature buffer holds {} values, expected {}",
                features.len(),
                n * d
            )));
        }
        if let Some(pos) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::MissingValue {
                row: pos / d,
                column: pos % d,
            });
        }
        if class_names.is_empty() {
            return Err(Error::Config("no classes".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_names.len()) {
            return Err(Error::Config(format!(
                "label {bad} outside [0, {})",
                class_names.len()
            )));
        }
        Ok(Self {
            features,
            n,
            d,
            labels,
            attribute_names,
            class_names,
            scaling: None,
            noise: NoiseRecord::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.d)
    }

    pub fn value(&self, i: usize, attribute: usize) -> f64 {
        self.features[i * self.d + attribute]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Min-max statistics this dataset was scaled with, if any.
    pub fn scaling(&self) -> Option<&MinMaxScaler> {
        self.scaling.as_ref()
    }

    pub fn noise(&self) -> &NoiseRecord {
        &self.noise
    }

    /// Number of distinct labels actually present.
    pub fn present_classes(&self) -> usize {
        let mut seen = vec![false; self.class_count()];
        for &y in &self.labels {
            seen[y] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// Rows selected by `indices`, in that order. Class mapping, scaling and
    /// noise provenance carry over.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            n: indices.len(),
            d: self.d,
            labels,
            attribute_names: self.attribute_names.clone(),
            class_names: self.class_names.clone(),
            scaling: self.scaling.clone(),
            noise: self.noise.clone(),
        }
    }

    /// Only the listed attribute columns, in that order. Scaling is dropped.
    pub fn project(&self, attributes: &[usize]) -> Result<Dataset> {
        if let Some(&a) = attributes.iter().find(|&&a| a >= self.d) {
            return Err(Error::AttributeOutOfRange {
                index: a,
                d: self.d,
            });
        }
        let mut features = Vec::with_capacity(self.n * attributes.len());
        for row in self.rows() {
            features.extend(attributes.iter().map(|&a| row[a]));
        }
        let mut out = Dataset::from_flat(
            features,
            attributes.len(),
            self.labels.clone(),
            attributes
                .iter()
                .map(|&a| self.attribute_names[a].clone())
                .collect(),
            self.class_names.clone(),
        )?;
        out.noise = self.noise.clone();
        Ok(out)
    }

    pub(crate) fn features_mut(&mut self) -> &mut [f64] {
        &mut self.features
    }

    pub(crate) fn labels_mut(&mut self) -> &mut [usize] {
        &mut self.labels
    }

    pub(crate) fn noise_mut(&mut self) -> &mut NoiseRecord {
        &mut self.noise
    }
}

/// Which CSV column holds the decision label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    /// The rightmost column.
    Last,
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "last" {
            return Ok(LabelColumn::Last);
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(s) => f.write_str(s),
            LabelColumn::Last => f.write_str("last"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Last,
            has_header: true,
        }
    }
}

/// A loaded dataset plus any non-fatal findings.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Loaded> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, opts)
}

fn is_missing(cell: &str) -> bool {
    matches!(
        cell,
        "" | "?" | "NA" | "N/A" | "na" | "NaN" | "nan" | "null"
    )
}

/// Parses CSV from any reader. Labels are mapped to class ids in order of
/// first appearance.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Loaded> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Option<Vec<String>> = if opts.has_header {
        Some(rdr.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let records: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    let records: Vec<_> = records
        .into_iter()
        .filter(|r| !(r.len() == 1 && r[0].is_empty()))
        .collect();
    let width = match (&header, records.first()) {
        (Some(h), _) => h.len(),
        (None, Some(r)) => r.len(),
        (None, None) => return Err(Error::EmptyDataset),
    };
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if width < 2 {
        return Err(Error::Config(
            "need at least one feature column and one label column".into(),
        ));
    }

    let label_idx = match &opts.label_column {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) => {
            // A header cell that literally matches wins over the index reading.
            match header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == &i.to_string()))
            {
                Some(p) => p,
                None if *i < width => *i,
                None => return Err(Error::LabelColumnNotFound(i.to_string())),
            }
        }
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::LabelColumnNotFound(name.clone()))?,
    };

    let attribute_names: Vec<String> = match &header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, c)| c.clone())
            .collect(),
        None => (0..width)
            .filter(|&j| j != label_idx)
            .map(|j| format!("a{j}"))
            .collect(),
    };

    let mut features = Vec::with_capacity(records.len() * (width - 1));
    let mut labels = Vec::with_capacity(records.len());
    let mut class_names: Vec<String> = Vec::new();
    for (row, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::RaggedRow {
                row,
                found: rec.len(),
                expected: width,
            });
        }
        for (column, cell) in rec.iter().enumerate() {
            if is_missing(cell) {
                return Err(Error::MissingValue { row, column });
            }
            if column == label_idx {
                let id = match class_names.iter().position(|c| c == cell) {
                    Some(id) => id,
                    None => {
                        class_names.push(cell.to_string());
                        class_names.len() - 1
                    }
                };
                labels.push(id);
            } else {
                let x: f64 = cell.parse().map_err(|_| Error::NonNumericFeature {
                    row,
                    column,
                    value: cell.to_string(),
                })?;
                if !x.is_finite() {
                    return Err(Error::NonNumericFeature {
                        row,
                        column,
                        value: cell.to_string(),
                    });
                }
                features.push(x);
            }
        }
    }

    let mut warnings = Vec::new();
    if labels.len() == 1 {
        let msg = "dataset has a single row".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let dataset = Dataset::from_flat(features, width - 1, labels, attribute_names, class_names)?;
    Ok(Loaded { dataset, warnings })
}

/// Per-column min-max statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(ds: &Dataset) -> Self {
        let mut min = vec![f64::INFINITY; ds.d()];
        let mut max = vec![f64::NEG_INFINITY; ds.d()];
        for row in ds.rows() {
            for (a, &x) in row.iter().enumerate() {
                min[a] = min[a].min(x);
                max[a] = max[a].max(x);
            }
        }
        Self { min, max }
    }

    /// Maps every value to `(x - min) / (max - min)` clipped to `[0, 1]`.
    /// Columns with zero range map to 0.
    pub fn transform(&self, ds: &Dataset) -> Dataset {
        assert_eq!(self.min.len(), ds.d(), "scaler fitted on a different width");
        let mut out = ds.clone();
        let d = ds.d();
        for (k, x) in out.features_mut().iter_mut().enumerate() {
            *x = self.scale(k % d, *x);
        }
        out.scaling = Some(self.clone());
        out
    }

    pub fn scale(&self, attribute: usize, x: f64) -> f64 {
        let (lo, hi) = (self.min[attribute], self.max[attribute]);
        let range = hi - lo;
        if range <= 0.0 {
            return 0.0;
        }
        ((x - lo) / range).clamp(0.0, 1.0)
    }
}

/// Min-max normalizes `ds` with its own statistics, which are recorded on
/// the result for reuse on held-out data.
pub fn normalize_min_max(ds: &Dataset) -> Dataset {
    MinMaxScaler::fit(ds).transform(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(rows: Vec<Vec<f64>>) -> Dataset {
        let d = rows[0].len();
        let n = rows.len();
        Dataset::new(
            rows,
            vec![0; n],
            (0..d).map(|j| format!("a{j}")).collect(),
            vec!["x".into()],
        )
        .unwrap()
    }

    #[test]
    fn reads_csv_with_header_and_named_label() {
        let text = "f1,class,f2\n1.0,A,2\n3,B,4\n5,A,6\n";
        let opts = CsvOptions {
            label_column: LabelColumn::Name("class".into()),
            has_header: true,
        };
        let loaded = read_csv(text.as_bytes(), &opts).unwrap();
        let ds = loaded.dataset;
        assert_eq!((ds.n(), ds.d(), ds.class_count()), (3, 2, 2));
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.class_names(), &["A".to_string(), "B".to_string()]);
        assert_eq!(ds.attribute_names(), &["f1".to_string(), "f2".to_string()]);
        assert_eq!(ds.row(1), &[3.0, 4.0]);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn reads_headerless_csv_by_index() {
        let opts = CsvOptions {
            label_column: LabelColumn::Index(0),
            has_header: false,
        };
        let ds = read_csv("b,1,2\na,3,4\n".as_bytes(), &opts)
            .unwrap()
            .dataset;
        assert_eq!(ds.labels(), &[0, 1]);
        assert_eq!(ds.class_names()[0], "b");
        assert_eq!(ds.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn single_row_is_accepted_with_warning() {
        let loaded = read_csv("x,y,c\n0.5,0.25,A\n".as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!(loaded.dataset.n(), 1);
        assert_eq!(loaded.dataset.d(), 2);
        assert_eq!(loaded.dataset.class_count(), 1);
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn rejects_non_numeric_feature() {
        let err = read_csv("x,c\n1,A\nabc,B\n".as_bytes(), &CsvOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::NonNumericFeature {
                row: 1,
                column: 0,
                ..
            }
        ));
        assert!(err.to_string().contains("non-numeric feature"));
    }

    #[test]
    fn rejects_missing_cells_and_ragged_rows() {
        let err = read_csv("x,y,c\n1,,A\n".as_bytes(), &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MissingValue { row: 0, column: 1 }));
        let err = read_csv("x,y,c\n1,?,A\n".as_bytes(), &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MissingValue { .. }));
        let err = read_csv("x,y,c\n1,2,A\n1,B\n".as_bytes(), &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::RaggedRow { row: 1, .. }));
    }

    #[test]
    fn rejects_empty_and_unknown_label_column() {
        assert!(matches!(
            read_csv("x,c\n".as_bytes(), &CsvOptions::default()),
            Err(Error::EmptyDataset)
        ));
        let opts = CsvOptions {
            label_column: LabelColumn::Name("nope".into()),
            has_header: true,
        };
        assert!(matches!(
            read_csv("x,c\n1,A\n".as_bytes(), &opts),
            Err(Error::LabelColumnNotFound(_))
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_csv("/definitely/not/here.csv", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn min_max_maps_affinely() {
        let ds = toy(vec![vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]]);
        let norm = normalize_min_max(&ds);
        let col0: Vec<f64> = (0..3).map(|i| norm.value(i, 0)).collect();
        let col1: Vec<f64> = (0..3).map(|i| norm.value(i, 1)).collect();
        assert_eq!(col0, vec![0.0, 0.5, 1.0]);
        assert_eq!(col1, vec![0.0, 0.0, 0.0]);
        let scaler = norm.scaling().unwrap();
        assert_eq!(scaler.min, vec![2.0, 5.0]);
        assert_eq!(scaler.max, vec![6.0, 5.0]);
    }

    #[test]
    fn held_out_values_are_clipped_with_train_statistics() {
        let train = toy(vec![vec![2.0], vec![6.0]]);
        let scaler = MinMaxScaler::fit(&train);
        let test = toy(vec![vec![7.0], vec![1.0], vec![3.0]]);
        let scaled = scaler.transform(&test);
        assert_eq!(scaled.features(), &[1.0, 0.0, 0.25]);
    }

    #[test]
    fn label_column_parsing() {
        assert_eq!("3".parse::<LabelColumn>().unwrap(), LabelColumn::Index(3));
        assert_eq!(
            "class".parse::<LabelColumn>().unwrap(),
            LabelColumn::Name("class".into())
        );
        assert_eq!("last".parse::<LabelColumn>().unwrap(), LabelColumn::Last);
    }
}
