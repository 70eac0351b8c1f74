//! Datasets and the transformations that turn a labelled corpus into an
//! imbalanced binary training problem.

mod csv;
mod idx;
mod normalize;
mod synth;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use self::csv::{load_csv, parse_csv, write_csv, write_csv_to, CsvOptions, LabelColumn};
pub use idx::{
    load_idx, parse_idx_images, parse_idx_labels, write_idx_images, write_idx_labels, IdxImages,
    IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};
pub use normalize::{NormalizeMode, Normalizer};
pub use synth::{gen_blobs, BlobSpec};

use crate::nn::Matrix;
use crate::{Error, Label, Result};

/// What the raw feature values represent; byte pixels scale by 1/255.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Real,
    BytePixels,
}

/// Feature matrix with one label per row.
///
/// Labels are arbitrary bytes until [`binarize`] maps them onto `{0, 1}`.
/// For binary data the minority label is inferred from class counts (ties go
/// to label 1) unless overridden.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<Label>,
    minority_label: Label,
    kind: FeatureKind,
    note: String,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<Label>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if !features.is_finite() {
            return Err(Error::invalid("features contain non-finite values"));
        }
        let mut ds = Dataset {
            features,
            labels,
            minority_label: 1,
            kind: FeatureKind::Real,
            note: String::new(),
        };
        ds.minority_label = ds.inferred_minority();
        Ok(ds)
    }

    fn inferred_minority(&self) -> Label {
        let [n0, n1] = self.class_counts();
        if self.is_binary() && n0 < n1 {
            0
        } else {
            1
        }
    }

    pub fn with_kind(mut self, kind: FeatureKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn with_minority_label(mut self, label: Label) -> Result<Self> {
        if label > 1 {
            return Err(Error::invalid(format!(
                "minority label {label} is not binary"
            )));
        }
        self.minority_label = label;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    pub fn minority_label(&self) -> Label {
        self.minority_label
    }

    pub fn majority_label(&self) -> Label {
        1 - self.minority_label
    }

    pub fn is_minority(&self, i: usize) -> bool {
        self.labels[i] == self.minority_label
    }

    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&l| l <= 1)
    }

    /// Number of samples labelled 0 and 1.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut c = [0usize; 2];
        for &l in &self.labels {
            if l <= 1 {
                c[l as usize] += 1;
            }
        }
        c
    }

    pub fn minority_count(&self) -> usize {
        self.class_counts()[self.minority_label as usize]
    }

    pub fn majority_count(&self) -> usize {
        self.class_counts()[self.majority_label() as usize]
    }

    /// Realized imbalance ratio `|minority| / |majority|`.
    pub fn imbalance_ratio(&self) -> Result<f64> {
        self.require_both_classes()?;
        Ok(self.minority_count() as f64 / self.majority_count() as f64)
    }

    pub fn require_binary(&self) -> Result<()> {
        match self.labels.iter().find(|&&l| l > 1) {
            Some(l) => Err(Error::invalid(format!("label {l} is not binary"))),
            None => Ok(()),
        }
    }

    pub fn require_both_classes(&self) -> Result<()> {
        self.require_binary()?;
        let [n0, n1] = self.class_counts();
        if n0 == 0 || n1 == 0 {
            return Err(Error::invalid(format!(
                "both classes are required (counts: 0 -> {n0}, 1 -> {n1})"
            )));
        }
        Ok(())
    }

    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    /// Rows in the given order. Minority designation and metadata carry over.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            minority_label: self.minority_label,
            kind: self.kind,
            note: self.note.clone(),
        }
    }

    fn reinfer_minority(mut self) -> Self {
        self.minority_label = self.inferred_minority();
        self
    }

    pub(crate) fn map_features(&self, f: impl Fn(usize, f64) -> f64) -> Dataset {
        let cols = self.dim();
        let mut features = self.features.clone();
        for (k, v) in features.as_mut_slice().iter_mut().enumerate() {
            *v = f(k % cols.max(1), *v);
        }
        Dataset {
            features,
            ..self.clone()
        }
    }
}

/// Maps labels in `positive` to 1 and the rest to 0.
///
/// With `negative` given, only labels in that set become 0 and samples in
/// neither set are dropped.
pub fn binarize(ds: &Dataset, positive: &[Label], negative: Option<&[Label]>) -> Result<Dataset> {
    if let Some(neg) = negative {
        if let Some(l) = neg.iter().find(|l| positive.contains(l)) {
            return Err(Error::invalid(format!(
                "label {l} is both positive and negative"
            )));
        }
    }
    let mut keep = Vec::with_capacity(ds.len());
    let mut labels = Vec::with_capacity(ds.len());
    for (i, l) in ds.labels().iter().enumerate() {
        if positive.contains(l) {
            keep.push(i);
            labels.push(1);
        } else if negative.is_none_or(|neg| neg.contains(l)) {
            keep.push(i);
            labels.push(0);
        }
    }
    let out = Dataset {
        features: ds.features.select_rows(&keep),
        labels,
        minority_label: 1,
        kind: ds.kind,
        note: ds.note.clone(),
    }
    .reinfer_minority();
    let [n0, n1] = out.class_counts();
    if n0 == 0 || n1 == 0 {
        return Err(Error::invalid(format!(
            "binarization leaves an empty class (negatives {n0}, positives {n1})"
        )));
    }
    Ok(out)
}

/// Keeps every negative (label 0) and subsamples positives (label 1) without
/// replacement down to `min(P, floor(rho * N))`. Sample order is preserved.
pub fn make_imbalanced<R: Rng + ?Sized>(ds: &Dataset, rho: f64, rng: &mut R) -> Result<Dataset> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    ds.require_both_classes()?;
    let positives = ds.indices_of(1);
    let negatives = ds.count_label(0);
    let target = (rho * negatives as f64).floor() as usize;
    if target == 0 {
        return Err(Error::invalid(format!(
            "rho = {rho} with {negatives} negatives leaves no positive sample"
        )));
    }
    let keep_pos = target.min(positives.len());
    let mut chosen: Vec<usize> = index::sample(rng, positives.len(), keep_pos)
        .into_iter()
        .map(|k| positives[k])
        .collect();
    chosen.sort_unstable();
    let mut keep: Vec<usize> = ds.indices_of(0);
    keep.extend(chosen);
    keep.sort_unstable();
    Ok(ds.subset(&keep).reinfer_minority())
}

impl Dataset {
    fn count_label(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Stratified split into `(train, validation)`.
///
/// Each class contributes `round(n_c * val_fraction)` samples to validation,
/// clamped so that both sides keep at least one sample of every class.
pub fn split<R: Rng + ?Sized>(
    ds: &Dataset,
    val_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "validation fraction must lie in (0, 1), got {val_fraction}"
        )));
    }
    ds.require_both_classes()?;
    if ds.minority_count() < 2 {
        return Err(Error::invalid(
            "a stratified validation split needs at least 2 minority samples; \
             add data or disable early stopping",
        ));
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for label in [0, 1] {
        let mut idx = ds.indices_of(label);
        idx.shuffle(rng);
        let n = idx.len();
        let n_val = ((n as f64 * val_fraction).round() as usize).clamp(1, n - 1);
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((ds.subset(&train), ds.subset(&val)))
}
