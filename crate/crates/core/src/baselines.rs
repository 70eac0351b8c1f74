//! Supervised comparison methods sharing one training loop: a dense
//! classifier trained with (weighted) cross-entropy and Adam, with early
//! stopping on a stratified validation split that is never resampled.
//!
//! - DNN: plain training.
//! - ROS: minority replicated at random until the classes are even.
//! - RUS: majority subsampled without replacement down to the minority count.
//! - CSM: minority errors weighted by `|majority| / |minority|`.
//! - DTA: trained like DNN; at prediction the posterior is divided by the
//!   training class prior.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{split, Dataset};
use crate::nn::{argmax, softmax, AdamHyper, AdamState, DenseNet, Matrix, NetworkRecord};
use crate::seed::derive_rng;
use crate::{Error, Label, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SupervisedMethod {
    #[serde(rename = "DNN")]
    Dnn,
    #[serde(rename = "ROS")]
    Ros,
    #[serde(rename = "RUS")]
    Rus,
    #[serde(rename = "CSM")]
    Csm,
    #[serde(rename = "DTA")]
    Dta,
}

impl SupervisedMethod {
    pub const ALL: [SupervisedMethod; 5] = [
        SupervisedMethod::Dnn,
        SupervisedMethod::Ros,
        SupervisedMethod::Rus,
        SupervisedMethod::Csm,
        SupervisedMethod::Dta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SupervisedMethod::Dnn => "DNN",
            SupervisedMethod::Ros => "ROS",
            SupervisedMethod::Rus => "RUS",
            SupervisedMethod::Csm => "CSM",
            SupervisedMethod::Dta => "DTA",
        }
    }
}

impl fmt::Display for SupervisedMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SupervisedMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown supervised method {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupervisedConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub val_fraction: f64,
    pub hidden: Vec<usize>,
    pub seed: u64,
    pub method: SupervisedMethod,
}

impl Default for SupervisedConfig {
    fn default() -> Self {
        SupervisedConfig {
            lr: 0.0005,
            batch_size: 64,
            max_epochs: 100,
            early_stop_patience: 5,
            val_fraction: 0.10,
            hidden: vec![256],
            seed: 0,
            method: SupervisedMethod::Dnn,
        }
    }
}

impl SupervisedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::invalid("val_fraction must lie in (0, 1)"));
        }
        if self.early_stop_patience == 0 || self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::invalid(
                "early_stop_patience, batch_size and max_epochs must be positive",
            ));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::invalid("hidden layer widths must be positive"));
        }
        Ok(())
    }
}

/// Replicates random minority samples (with replacement) until both classes
/// are equally large. Copies are appended after the original rows.
pub fn resample_ros<R: Rng + ?Sized>(ds: &Dataset, rng: &mut R) -> Result<Dataset> {
    ds.require_both_classes()?;
    let minority = ds.indices_of(ds.minority_label());
    let deficit = ds.majority_count() - minority.len();
    let mut keep: Vec<usize> = (0..ds.len()).collect();
    keep.extend((0..deficit).map(|_| minority[rng.random_range(0..minority.len())]));
    Ok(ds.subset(&keep))
}

/// Keeps a random majority subset (without replacement) the size of the
/// minority class. Original order is preserved.
pub fn resample_rus<R: Rng + ?Sized>(ds: &Dataset, rng: &mut R) -> Result<Dataset> {
    ds.require_both_classes()?;
    let majority = ds.indices_of(ds.majority_label());
    let target = ds.minority_count();
    let mut keep: Vec<usize> = index::sample(rng, majority.len(), target)
        .into_iter()
        .map(|k| majority[k])
        .chain(ds.indices_of(ds.minority_label()))
        .collect();
    keep.sort_unstable();
    Ok(ds.subset(&keep))
}

/// Per-label weights: `|majority| / |minority|` for the minority label, 1 for
/// the majority label.
pub fn csm_class_weights(ds: &Dataset) -> Result<[f64; 2]> {
    ds.require_both_classes()?;
    let mut w = [1.0; 2];
    w[ds.minority_label() as usize] = ds.majority_count() as f64 / ds.minority_count() as f64;
    Ok(w)
}

/// Prior-corrected decision: `argmax_c posteriors[c] / train_priors[c]`,
/// ties to label 0.
pub fn dta_predict(posteriors: [f64; 2], train_priors: [f64; 2]) -> Result<Label> {
    if train_priors.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::invalid(format!(
            "class priors must be positive, got {train_priors:?}"
        )));
    }
    if posteriors.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::invalid(format!("invalid posteriors {posteriors:?}")));
    }
    let scores = [
        posteriors[0] / train_priors[0],
        posteriors[1] / train_priors[1],
    ];
    Ok(argmax(&scores) as Label)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupervisedClassifier {
    pub net: DenseNet,
    pub method: SupervisedMethod,
    /// Class frequencies of the (non-resampled) training part, indexed by label.
    pub train_priors: [f64; 2],
    pub class_weights: [f64; 2],
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub config: SupervisedConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetadata {
    pub method: String,
    pub seed: u64,
    pub train_priors: [f64; 2],
    pub config: SupervisedConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierCheckpoint {
    pub network: NetworkRecord,
    pub metadata: ClassifierMetadata,
}

impl SupervisedClassifier {
    pub fn posteriors(&self, batch: &Matrix) -> Result<Vec<[f64; 2]>> {
        let logits = self.net.forward(batch)?;
        Ok(logits
            .iter_rows()
            .map(|z| {
                let p = softmax(z);
                [p[0], p[1]]
            })
            .collect())
    }

    pub fn predict_batch(&self, batch: &Matrix) -> Result<Vec<Label>> {
        self.posteriors(batch)?
            .into_iter()
            .map(|p| match self.method {
                SupervisedMethod::Dta => dta_predict(p, self.train_priors),
                _ => Ok(argmax(&p) as Label),
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let batch = Matrix::from_vec(1, x.len(), x.to_vec())?;
        Ok(self.predict_batch(&batch)?[0])
    }

    pub fn checkpoint(&self, metrics: Option<serde_json::Value>) -> ClassifierCheckpoint {
        ClassifierCheckpoint {
            network: NetworkRecord::from(&self.net),
            metadata: ClassifierMetadata {
                method: self.method.name().into(),
                seed: self.config.seed,
                train_priors: self.train_priors,
                config: self.config.clone(),
                metrics,
            },
        }
    }
}

/// Mean weighted cross-entropy over a dataset.
pub fn weighted_ce_loss(net: &DenseNet, ds: &Dataset, class_weights: [f64; 2]) -> Result<f64> {
    let logits = net.forward(ds.features())?;
    let mut total = 0.0;
    for (z, &l) in logits.iter_rows().zip(ds.labels()) {
        let max = z[0].max(z[1]);
        let lse = max + ((z[0] - max).exp() + (z[1] - max).exp()).ln();
        total += class_weights[l as usize] * (lse - z[l as usize]);
    }
    Ok(total / ds.len().max(1) as f64)
}

/// Trains one baseline and returns the snapshot with the lowest validation loss.
pub fn train_supervised(ds: &Dataset, cfg: &SupervisedConfig) -> Result<SupervisedClassifier> {
    cfg.validate()?;
    ds.require_both_classes()?;
    let (train, val) = split(ds, cfg.val_fraction, &mut derive_rng(cfg.seed, "sup/split"))?;
    let [n0, n1] = train.class_counts();
    let total = (n0 + n1) as f64;
    let train_priors = [n0 as f64 / total, n1 as f64 / total];
    let class_weights = match cfg.method {
        SupervisedMethod::Csm => csm_class_weights(&train)?,
        _ => [1.0, 1.0],
    };
    let mut resample_rng = derive_rng(cfg.seed, "sup/resample");
    let fit_set = match cfg.method {
        SupervisedMethod::Ros => resample_ros(&train, &mut resample_rng)?,
        SupervisedMethod::Rus => resample_rus(&train, &mut resample_rng)?,
        _ => train,
    };

    let mut net = DenseNet::glorot(
        ds.dim(),
        &cfg.hidden,
        2,
        &mut derive_rng(cfg.seed, "sup/init"),
    )?;
    let mut adam = AdamState::new(&net, AdamHyper::with_lr(cfg.lr));
    let mut shuffle_rng = derive_rng(cfg.seed, "sup/shuffle");
    let mut order: Vec<usize> = (0..fit_set.len()).collect();

    let mut best = (
        net.clone(),
        0usize,
        weighted_ce_loss(&net, &val, class_weights)?,
    );
    let mut history = Vec::new();
    let mut stale = 0;
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch = fit_set.features().select_rows(chunk);
            let labels: Vec<Label> = chunk.iter().map(|&i| fit_set.label(i)).collect();
            let (loss, mut grads) = net.backward_weighted_ce(&batch, &labels, class_weights)?;
            grads.scale(1.0 / chunk.len() as f64);
            adam.step(&mut net, &grads)?;
            loss_sum += loss;
        }
        let val_loss = weighted_ce_loss(&net, &val, class_weights)?;
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / fit_set.len() as f64,
            val_loss,
        });
        if val_loss < best.2 {
            best = (net.clone(), epoch, val_loss);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.early_stop_patience {
                break;
            }
        }
    }
    let (net, best_epoch, best_val_loss) = best;
    Ok(SupervisedClassifier {
        net,
        method: cfg.method,
        train_priors,
        class_weights,
        history,
        best_epoch,
        best_val_loss,
        config: cfg.clone(),
    })
}
