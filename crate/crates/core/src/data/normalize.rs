use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    None,
    /// Byte pixels divide by 255; other data maps per-feature min/max to [0, 1].
    #[default]
    UnitRange,
    ZScore,
}

/// Affine per-feature transform `x' = (x - offset) * scale`, fitted on
/// training data and reused unchanged for every other split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mode: NormalizeMode,
    offset: Vec<f64>,
    scale: Vec<f64>,
    /// Features that were constant on the fitting set and now map to 0.
    pub warnings: Vec<String>,
}

impl Normalizer {
    pub fn fit(ds: &Dataset, mode: NormalizeMode) -> Result<Self> {
        let d = ds.dim();
        let n = ds.len();
        let mut offset = vec![0.0; d];
        let mut scale = vec![1.0; d];
        let mut warnings = Vec::new();
        if n == 0 && mode != NormalizeMode::None {
            return Err(Error::invalid(
                "cannot fit normalization on an empty dataset",
            ));
        }
        match mode {
            NormalizeMode::None => {}
            NormalizeMode::UnitRange if ds.kind() == FeatureKind::BytePixels => {
                scale.iter_mut().for_each(|s| *s = 1.0 / 255.0);
            }
            NormalizeMode::UnitRange => {
                for j in 0..d {
                    let (lo, hi) = (0..n)
                        .map(|i| ds.row(i)[j])
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                            (lo.min(v), hi.max(v))
                        });
                    offset[j] = lo;
                    if hi > lo {
                        scale[j] = 1.0 / (hi - lo);
                    } else {
                        scale[j] = 0.0;
                        warnings.push(format!("feature {j} is constant; mapped to 0"));
                    }
                }
            }
            NormalizeMode::ZScore => {
                for j in 0..d {
                    let mean = (0..n).map(|i| ds.row(i)[j]).sum::<f64>() / n as f64;
                    let var = (0..n).map(|i| (ds.row(i)[j] - mean).powi(2)).sum::<f64>() / n as f64;
                    offset[j] = mean;
                    if var > 0.0 {
                        scale[j] = 1.0 / var.sqrt();
                    } else {
                        scale[j] = 0.0;
                        warnings.push(format!("feature {j} is constant; mapped to 0"));
                    }
                }
            }
        }
        Ok(Normalizer {
            mode,
            offset,
            scale,
            warnings,
        })
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.dim() != self.offset.len() {
            return Err(Error::invalid(format!(
                "normalizer fitted on {} features, dataset has {}",
                self.offset.len(),
                ds.dim()
            )));
        }
        if self.mode == NormalizeMode::None {
            return Ok(ds.clone());
        }
        Ok(ds
            .map_features(|j, v| (v - self.offset[j]) * self.scale[j])
            .with_kind(FeatureKind::Real))
    }
}
