//! Datasets: LIBSVM and CSV readers, standardization, seeded splits and the
//! two synthetic tasks (noiseless sine regression and the anchor
//! classification task).

use std::fmt::Write as _;
use std::io::{BufRead, Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// `n × m` real targets
    Real(Vec<Vec<f64>>),
    /// 1-based classes; `label_values[c - 1]` is the raw label of class `c`
    Classes {
        labels: Vec<usize>,
        n_classes: usize,
        label_values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetMeta {
    pub source: String,
    pub feature_names: Option<Vec<String>>,
    /// rows skipped while reading (CSV only)
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    targets: Targets,
    pub meta: DatasetMeta,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, targets: Targets, source: impl Into<String>) -> Result<Self> {
        let n = features.len();
        if n == 0 {
            return Err(Error::Data("dataset has no rows".into()));
        }
        let d = features[0].len();
        if let Some(bad) = features.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        match &targets {
            Targets::Real(t) => {
                if t.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: t.len() });
                }
                let m = t[0].len();
                if m == 0 || t.iter().any(|r| r.len() != m) {
                    return Err(Error::Data("targets must share a positive dimension".into()));
                }
            }
            Targets::Classes {
                labels,
                n_classes,
                label_values,
            } => {
                if labels.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: labels.len(),
                    });
                }
                if label_values.len() != *n_classes {
                    return Err(Error::Data("one raw label value per class required".into()));
                }
                if let Some(&c) = labels.iter().find(|&&c| c == 0 || c > *n_classes) {
                    return Err(Error::Data(format!("class {c} outside 1..={n_classes}")));
                }
            }
        }
        Ok(LabeledDataset {
            features,
            targets,
            meta: DatasetMeta {
                source: source.into(),
                ..DatasetMeta::default()
            },
        })
    }

    /// Classification dataset whose raw labels are the class numbers.
    pub fn with_classes(features: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize, source: &str) -> Result<Self> {
        let label_values = (1..=n_classes).map(|c| c as f64).collect();
        Self::new(
            features,
            Targets::Classes {
                labels,
                n_classes,
                label_values,
            },
            source,
        )
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    /// Target dimension: `m` for real targets, the number of classes otherwise.
    pub fn output_dim(&self) -> usize {
        match &self.targets {
            Targets::Real(t) => t[0].len(),
            Targets::Classes { n_classes, .. } => *n_classes,
        }
    }

    pub fn classes(&self) -> Option<(&[usize], usize)> {
        match &self.targets {
            Targets::Classes { labels, n_classes, .. } => Some((labels, *n_classes)),
            Targets::Real(_) => None,
        }
    }

    pub fn real_targets(&self) -> Option<&[Vec<f64>]> {
        match &self.targets {
            Targets::Real(t) => Some(t),
            Targets::Classes { .. } => None,
        }
    }

    /// Targets as vectors, classes embedded as basis vectors.
    pub fn embedded_targets(&self) -> Vec<Vec<f64>> {
        match &self.targets {
            Targets::Real(t) => t.clone(),
            Targets::Classes { labels, n_classes, .. } => labels
                .iter()
                .map(|&c| {
                    let mut e = vec![0.0; *n_classes];
                    e[c - 1] = 1.0;
                    e
                })
                .collect(),
        }
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let features = indices.iter().map(|&i| self.features[i].clone()).collect();
        let targets = match &self.targets {
            Targets::Real(t) => Targets::Real(indices.iter().map(|&i| t[i].clone()).collect()),
            Targets::Classes {
                labels,
                n_classes,
                label_values,
            } => Targets::Classes {
                labels: indices.iter().map(|&i| labels[i]).collect(),
                n_classes: *n_classes,
                label_values: label_values.clone(),
            },
        };
        LabeledDataset {
            features,
            targets,
            meta: self.meta.clone(),
        }
    }

    fn with_features(&self, features: Vec<Vec<f64>>) -> LabeledDataset {
        LabeledDataset {
            features,
            targets: self.targets.clone(),
            meta: self.meta.clone(),
        }
    }
}

/// Reads LIBSVM sparse text: one `<label> <index>:<value> ...` row per
/// nonempty line, indices positive and strictly increasing. The feature
/// dimension is the largest index in the file; raw labels become classes
/// `1..=m` in increasing numeric order.
pub fn parse_libsvm<R: BufRead>(input: R) -> Result<LabeledDataset> {
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut dim = 0usize;
    for (k, line) in input.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid label `{label_tok}`")))?;
        if !label.is_finite() {
            return Err(Error::parse(line_no, format!("invalid label `{label_tok}`")));
        }
        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, format!("expected `index:value`, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid feature index `{idx}`")))?;
            if idx == 0 {
                return Err(Error::parse(line_no, "feature indices start at 1"));
            }
            if idx <= last {
                return Err(Error::parse(
                    line_no,
                    format!("feature index {idx} does not increase (previous {last})"),
                ));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid feature value `{val}`")))?;
            last = idx;
            entries.push((idx, val));
        }
        dim = dim.max(last);
        rows.push((label, entries));
    }
    if rows.is_empty() {
        return Err(Error::parse(0, "no data rows"));
    }
    if dim == 0 {
        return Err(Error::parse(0, "no feature indices in file"));
    }

    let mut values: Vec<f64> = rows.iter().map(|(l, _)| *l).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let class_of = |l: f64| values.binary_search_by(|v| v.total_cmp(&l)).map(|p| p + 1);

    let mut features = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (label, entries) in rows {
        let mut row = vec![0.0; dim];
        for (idx, val) in entries {
            row[idx - 1] = val;
        }
        features.push(row);
        labels.push(class_of(label).expect("label was collected"));
    }
    let n_classes = values.len();
    LabeledDataset::new(
        features,
        Targets::Classes {
            labels,
            n_classes,
            label_values: values,
        },
        "libsvm",
    )
}

/// Writes a classification dataset in LIBSVM format, skipping zero entries.
/// Values carry 17 significant digits.
pub fn write_libsvm<W: Write>(dataset: &LabeledDataset, mut out: W) -> Result<()> {
    let Targets::Classes {
        labels, label_values, ..
    } = dataset.targets()
    else {
        return Err(Error::Unsupported("LIBSVM export needs class targets".into()));
    };
    let mut s = String::new();
    for (row, &c) in dataset.features().iter().zip(labels) {
        let _ = write!(s, "{}", label_values[c - 1]);
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                let _ = write!(s, " {}:{v:.16e}", j + 1);
            }
        }
        s.push('\n');
    }
    out.write_all(s.as_bytes())
        .map_err(|e| Error::Data(format!("writing LIBSVM data: {e}")))
}

/// Per-feature affine map fitted by [`standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// columns with zero variance, left untouched
    pub constant: Vec<bool>,
}

impl Standardization {
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.constant[j] {
                    v
                } else {
                    (v - self.mean[j]) / self.std[j]
                }
            })
            .collect()
    }

    pub fn apply_dataset(&self, dataset: &LabeledDataset) -> LabeledDataset {
        dataset.with_features(dataset.features().iter().map(|r| self.apply(r)).collect())
    }

    pub fn has_constant_columns(&self) -> bool {
        self.constant.iter().any(|&c| c)
    }
}

/// Centers each feature and scales it to unit (population) variance.
/// Constant columns pass through unchanged and are flagged.
pub fn standardize(dataset: &LabeledDataset) -> Result<(LabeledDataset, Standardization)> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Data(format!("standardization needs at least 2 rows, got {n}")));
    }
    let d = dataset.n_features();
    let mut mean = vec![0.0; d];
    for row in dataset.features() {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for row in dataset.features() {
        for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std: Vec<f64> = var.iter().map(|s| (s / n as f64).sqrt()).collect();
    let constant = std
        .iter()
        .zip(&mean)
        .map(|(&s, &m)| !(s > 1e-12 * m.abs().max(1.0)))
        .collect();
    let fit = Standardization { mean, std, constant };
    Ok((fit.apply_dataset(dataset), fit))
}

/// `f*(x)_j = sin(2π(x + j/m))`, `j = 0..m`; for `m = 1` this is `sin(2πx)`.
pub fn sin_target(x: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| (2.0 * std::f64::consts::PI * (x + j as f64 / m as f64)).sin())
        .collect()
}

/// Noiseless `Y = sin(2πX)`, `X ~ Unif[0, 1]`.
pub fn gen_sin_regression<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LabeledDataset> {
    gen_phase_sin_regression(n, 1, rng)
}

/// Noiseless vector-valued variant: `m` phase-shifted sines (see [`sin_target`]).
pub fn gen_phase_sin_regression<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<LabeledDataset> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and m >= 1".into()));
    }
    let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let targets = xs.iter().map(|&x| sin_target(x, m)).collect();
    let features = xs.into_iter().map(|x| vec![x]).collect();
    LabeledDataset::new(features, Targets::Real(targets), "synthetic:sin")
}

/// Classification task on `[0, 1]` whose conditional law interpolates
/// linearly between a Dirac on `anchors[0]` at `x = 0`, uniform at `x = 1/4`,
/// a Dirac on `anchors[1]` at `x = 1/2`, uniform at `x = 3/4` and a Dirac on
/// `anchors[2]` at `x = 1`. Inputs avoid the bands `|x - 1/4| <= ε` and
/// `|x - 3/4| <= ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorTask {
    pub n_classes: usize,
    pub epsilon: f64,
    /// 1-based
    pub anchors: [usize; 3],
}

impl AnchorTask {
    pub fn new(n_classes: usize, epsilon: f64) -> Result<Self> {
        Self::with_anchors(n_classes, epsilon, [1, 2, 3])
    }

    pub fn with_anchors(n_classes: usize, epsilon: f64, anchors: [usize; 3]) -> Result<Self> {
        if n_classes < 3 {
            return Err(Error::InvalidParameter(format!("anchor task needs m >= 3, got {n_classes}")));
        }
        if !(0.0..0.25).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "band half-width must lie in [0, 1/4), got {epsilon}"
            )));
        }
        if anchors.iter().any(|&a| a == 0 || a > n_classes) {
            return Err(Error::InvalidParameter("anchor classes must lie in 1..=m".into()));
        }
        Ok(AnchorTask {
            n_classes,
            epsilon,
            anchors,
        })
    }

    pub fn in_support(&self, x: f64) -> bool {
        (0.0..=1.0).contains(&x) && (x - 0.25).abs() > self.epsilon && (x - 0.75).abs() > self.epsilon
    }

    /// Dirac weight and its anchor class at `x`.
    fn dirac(&self, x: f64) -> (f64, usize) {
        let [a1, a2, a3] = self.anchors;
        if x <= 0.25 {
            (1.0 - 4.0 * x, a1)
        } else if x <= 0.5 {
            (4.0 * x - 1.0, a2)
        } else if x <= 0.75 {
            (3.0 - 4.0 * x, a2)
        } else {
            (4.0 * x - 3.0, a3)
        }
    }

    /// `P(Y = c | X = x)` for `c = 1..=m`.
    pub fn conditional(&self, x: f64) -> Vec<f64> {
        let (w, anchor) = self.dirac(x);
        let mut p = vec![(1.0 - w) / self.n_classes as f64; self.n_classes];
        p[anchor - 1] += w;
        p
    }

    /// Bayes-optimal class at `x` (lowest index on ties).
    pub fn bayes_class(&self, x: f64) -> usize {
        self.dirac(x).1
    }

    pub fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x: f64 = rng.random();
            if self.in_support(x) {
                return x;
            }
        }
    }

    pub fn sample_y<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> usize {
        let (w, anchor) = self.dirac(x);
        if rng.random::<f64>() < w {
            anchor
        } else {
            rng.random_range(1..=self.n_classes)
        }
    }
}

pub fn gen_anchor_classification<R: Rng + ?Sized>(
    n: usize,
    n_classes: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    gen_anchor_task(&AnchorTask::new(n_classes, epsilon)?, n, rng)
}

pub fn gen_anchor_task<R: Rng + ?Sized>(task: &AnchorTask, n: usize, rng: &mut R) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = task.sample_x(rng);
        labels.push(task.sample_y(x, rng));
        features.push(vec![x]);
    }
    let mut ds = LabeledDataset::with_classes(features, labels, task.n_classes, "synthetic:anchor")?;
    ds.meta.feature_names = Some(vec!["x".into()]);
    Ok(ds)
}

/// Reads a comma-separated file with a header row. Columns named in
/// `target_columns` become targets (in that order); all other columns are
/// features. Rows with an empty or non-numeric cell are dropped and counted
/// in `meta.dropped_rows`.
pub fn parse_csv_regression<R: Read>(input: R, target_columns: &[&str]) -> Result<LabeledDataset> {
    if target_columns.is_empty() {
        return Err(Error::InvalidParameter("at least one target column is required".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut target_idx = Vec::with_capacity(target_columns.len());
    for name in target_columns {
        let pos = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("target column `{name}` not found in header")))?;
        target_idx.push(pos);
    }
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|i| !target_idx.contains(i)).collect();
    if feature_idx.is_empty() {
        return Err(Error::Data("no feature columns remain after removing targets".into()));
    }

    let mut features = Vec::new();
    let mut targets = Vec::new();
    let mut dropped = 0usize;
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(k + 2, e.to_string()))?;
        let cell = |i: usize| record.get(i).and_then(|c| c.parse::<f64>().ok()).filter(|v| v.is_finite());
        let row: Option<Vec<f64>> = feature_idx.iter().map(|&i| cell(i)).collect();
        let target: Option<Vec<f64>> = target_idx.iter().map(|&i| cell(i)).collect();
        match (row, target) {
            (Some(r), Some(t)) => {
                features.push(r);
                targets.push(t);
            }
            _ => dropped += 1,
        }
    }
    if features.is_empty() {
        return Err(Error::Data(format!("no usable rows ({dropped} dropped)")));
    }
    let mut ds = LabeledDataset::new(features, Targets::Real(targets), "csv")?;
    ds.meta.feature_names = Some(feature_idx.iter().map(|&i| headers[i].clone()).collect());
    ds.meta.dropped_rows = dropped;
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 2.0 / 3.0,
            seed: 0,
        }
    }
}

/// Seeded permutation of `0..n` cut into a train prefix and a test suffix.
pub fn split_indices(n: usize, spec: SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    if n < 2 {
        return Err(Error::Data("splitting needs at least 2 rows".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let n_train = ((spec.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let test = perm.split_off(n_train);
    Ok((perm, test))
}

pub fn split(dataset: &LabeledDataset, spec: SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(dataset.len(), spec)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn libsvm_single_row() {
        let ds = parse_libsvm("3 1:0.5 4:-1.2\n".as_bytes()).unwrap();
        assert_eq!(ds.features(), &[vec![0.5, 0.0, 0.0, -1.2]]);
        assert_eq!(ds.classes().unwrap(), (&[1usize][..], 1));
    }

    #[test]
    fn libsvm_two_rows() {
        let ds = parse_libsvm("1 2:1\n2 1:1\n".as_bytes()).unwrap();
        assert_eq!(ds.features(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(ds.classes().unwrap().0, &[1, 2]);
    }

    #[test]
    fn libsvm_labels_keep_numeric_order() {
        let ds = parse_libsvm("+1 1:1\n-1 1:2\n10 1:3\n2 1:4\n".as_bytes()).unwrap();
        assert_eq!(ds.classes().unwrap(), (&[2usize, 1, 4, 3][..], 4));
    }

    #[test]
    fn libsvm_errors_carry_line_numbers() {
        let cases = [
            ("1 3:1 2:1\n", 1),
            ("1 1:1\n\n2 1:x\n", 3),
            ("1 1:1\n1 0:2\n", 2),
            ("1 1-2\n", 1),
            ("abc 1:1\n", 1),
            ("1 1:1 1:2\n", 1),
        ];
        for (text, line) in cases {
            match parse_libsvm(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        assert!(matches!(parse_libsvm("".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(parse_libsvm("\n  \n".as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn standardize_cases() {
        let ds = LabeledDataset::with_classes(vec![vec![0.0, 5.0], vec![2.0, 5.0]], vec![1, 1], 1, "t").unwrap();
        let (out, fit) = standardize(&ds).unwrap();
        assert_eq!(out.features(), &[vec![-1.0, 5.0], vec![1.0, 5.0]]);
        assert_eq!(fit.constant, vec![false, true]);
        assert!(fit.has_constant_columns());

        let one = LabeledDataset::with_classes(vec![vec![1.0]], vec![1], 1, "t").unwrap();
        assert!(standardize(&one).is_err());
    }

    #[test]
    fn standardize_moments_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let features: Vec<Vec<f64>> = (0..300)
            .map(|_| vec![rng.random::<f64>() * 40.0 - 3.0, rng.random::<f64>().powi(3) * 1e4, 7.0])
            .collect();
        let ds = LabeledDataset::with_classes(features, vec![1; 300], 1, "t").unwrap();
        let (once, _) = standardize(&ds).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = once.features().iter().map(|r| r[j]).collect();
            let mean = col.iter().sum::<f64>() / 300.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 300.0;
            assert!(mean.abs() < 1e-10 && (var - 1.0).abs() < 1e-8);
        }
        let (twice, _) = standardize(&once).unwrap();
        for (a, b) in once.features().iter().flatten().zip(twice.features().iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sin_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = gen_sin_regression(500, &mut rng).unwrap();
        for (x, y) in ds.features().iter().zip(ds.real_targets().unwrap()) {
            assert!((0.0..=1.0).contains(&x[0]));
            assert_eq!(y[0], (2.0 * std::f64::consts::PI * x[0]).sin());
        }
        assert_eq!(sin_target(0.25, 1), vec![1.0]);
        let again = gen_sin_regression(500, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn anchor_conditionals() {
        let task = AnchorTask::new(5, 0.05).unwrap();
        assert_eq!(task.conditional(0.0), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(task.conditional(0.5), vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(task.conditional(1.0), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let p = task.conditional(0.125);
        assert!((p[0] - (0.5 + 0.1)).abs() < 1e-15);
        for &q in &p[1..] {
            assert!((q - 0.1).abs() < 1e-15);
        }
        let u = task.conditional(0.25);
        assert!(u.iter().all(|&q| (q - 0.2).abs() < 1e-15));
        assert!(AnchorTask::new(5, 0.25).is_err());
        assert!(AnchorTask::new(2, 0.0).is_err());
        assert_eq!(task.bayes_class(0.2), 1);
        assert_eq!(task.bayes_class(0.6), 2);
        assert_eq!(task.bayes_class(0.8), 3);
    }

    #[test]
    fn anchor_samples_respect_bands_and_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ds = gen_anchor_classification(100_000, 10, 0.05, &mut rng).unwrap();
        let task = AnchorTask::new(10, 0.05).unwrap();
        let (labels, _) = ds.classes().unwrap();
        let mut hits = 0.0;
        let mut expected = 0.0;
        for (x, &y) in ds.features().iter().zip(labels) {
            assert!(task.in_support(x[0]));
            if (0.45..=0.55).contains(&x[0]) {
                expected += task.conditional(x[0])[1];
                if y == 2 {
                    hits += 1.0;
                }
            }
        }
        assert!(hits >= 0.9 * expected, "{hits} vs {expected}");
    }

    #[test]
    fn csv_ingest() {
        let text = "a,y\n1,2\n3,\n5,6\n";
        let ds = parse_csv_regression(text.as_bytes(), &["y"]).unwrap();
        assert_eq!(ds.features(), &[vec![1.0], vec![5.0]]);
        assert_eq!(ds.real_targets().unwrap(), &[vec![2.0], vec![6.0]]);
        assert_eq!(ds.meta.dropped_rows, 1);
        assert_eq!(ds.output_dim(), 1);
        assert_eq!(ds.n_features(), 1);

        let err = parse_csv_regression(text.as_bytes(), &["z"]).unwrap_err();
        assert!(err.to_string().contains("`z`"));
        assert!(parse_csv_regression("a,y\n,1\nq,2\n".as_bytes(), &["y"]).is_err());
    }

    #[test]
    fn csv_multiple_targets_keep_order() {
        let text = "t2,f1,t1,f2\n1,2,3,4\nna,1,1,1\n";
        let ds = parse_csv_regression(text.as_bytes(), &["t1", "t2"]).unwrap();
        assert_eq!(ds.features(), &[vec![2.0, 4.0]]);
        assert_eq!(ds.real_targets().unwrap(), &[vec![3.0, 1.0]]);
        assert_eq!(ds.meta.feature_names.as_deref().unwrap(), &["f1", "f2"]);
    }

    #[test]
    fn split_cases() {
        let ds = LabeledDataset::with_classes((0..3).map(|i| vec![i as f64]).collect(), vec![1; 3], 1, "t").unwrap();
        let (train, test) = split(&ds, SplitSpec { train_fraction: 2.0 / 3.0, seed: 0 }).unwrap();
        assert_eq!((train.len(), test.len()), (2, 1));
        assert!(split(&ds, SplitSpec { train_fraction: 1.0, seed: 0 }).is_err());
        let a = split_indices(100, SplitSpec { train_fraction: 0.5, seed: 1 }).unwrap();
        let b = split_indices(100, SplitSpec { train_fraction: 0.5, seed: 2 }).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, split_indices(100, SplitSpec { train_fraction: 0.5, seed: 1 }).unwrap());
    }

    proptest! {
        #[test]
        fn split_partitions(n in 2usize..200, frac in 0.01f64..0.99, seed in any::<u64>()) {
            let (train, test) = split_indices(n, SplitSpec { train_fraction: frac, seed }).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert!(!train.is_empty() && !test.is_empty());
        }

        #[test]
        fn libsvm_round_trip(
            rows in proptest::collection::vec(
                (0usize..4, proptest::collection::vec(prop_oneof![Just(0.0), -1e6f64..1e6], 5)),
                1..30,
            )
        ) {
            let (labels, features): (Vec<usize>, Vec<Vec<f64>>) = rows.into_iter().unzip();
            // the parsed dimension is the last nonzero column; pin it with a sentinel
            let features: Vec<Vec<f64>> = features.into_iter().map(|mut r| { r.push(1.0); r }).collect();
            let mut raw: Vec<usize> = labels.clone();
            raw.sort_unstable();
            raw.dedup();
            let classes: Vec<usize> = labels.iter().map(|l| raw.binary_search(l).unwrap() + 1).collect();
            let values: Vec<f64> = raw.iter().map(|&l| l as f64 * 2.5 - 1.0).collect();
            let ds = LabeledDataset::new(
                features,
                Targets::Classes { labels: classes, n_classes: raw.len(), label_values: values },
                "libsvm",
            ).unwrap();
            let mut buf = Vec::new();
            write_libsvm(&ds, &mut buf).unwrap();
            let back = parse_libsvm(buf.as_slice()).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
