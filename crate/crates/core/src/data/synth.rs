use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::nn::Matrix;
use crate::seed::rng_from;
use crate::{Error, Result};

/// Two isotropic Gaussian classes. Index 0 describes label 0, index 1 label 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    pub means: [Vec<f64>; 2],
    pub stds: [f64; 2],
    pub counts: [usize; 2],
    pub seed: u64,
}

impl BlobSpec {
    pub fn validate(&self) -> Result<()> {
        let dim = self.means[0].len();
        if dim == 0 || self.means[1].len() != dim {
            return Err(Error::invalid(
                "class means must be non-empty and equally long",
            ));
        }
        if self.means.iter().flatten().any(|m| !m.is_finite()) {
            return Err(Error::invalid("class means must be finite"));
        }
        if self.stds.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("standard deviations must be positive"));
        }
        if self.counts.contains(&0) {
            return Err(Error::invalid("each class needs at least one sample"));
        }
        Ok(())
    }
}

/// Draws label-0 samples first, then label-1 samples.
pub fn gen_blobs(spec: &BlobSpec) -> Result<Dataset> {
    spec.validate()?;
    let dim = spec.means[0].len();
    let mut rng = rng_from(spec.seed);
    let n = spec.counts[0] + spec.counts[1];
    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for class in 0..2 {
        for _ in 0..spec.counts[class] {
            for &mu in &spec.means[class] {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(mu + spec.stds[class] * z);
            }
            labels.push(class as u8);
        }
    }
    Ok(Dataset::new(Matrix::from_vec(n, dim, data)?, labels)?.with_note("blobs"))
}
