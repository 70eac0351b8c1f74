//! JSON checkpoint format.
//!
//! ```json
//! {"input_dim": 2,
//!  "layers": [{"in_dim": 2, "out_dim": 2, "weights": [1.0, 0.0, 0.0, 1.0],
//!              "bias": [0.0, 0.0], "activation": "identity"}]}
//! ```
//!
//! Weights are row-major `out_dim × in_dim`. Doubles are written in shortest
//! round-trip decimal form, so load(save(net)) is bit-exact.

use serde::{Deserialize, Serialize};

use super::{Activation, DenseNet, Layer, Matrix};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerRecord {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkRecord {
    pub input_dim: usize,
    pub layers: Vec<LayerRecord>,
}

impl From<&DenseNet> for NetworkRecord {
    fn from(net: &DenseNet) -> Self {
        NetworkRecord {
            input_dim: net.input_dim(),
            layers: net
                .layers()
                .iter()
                .map(|l| LayerRecord {
                    in_dim: l.in_dim(),
                    out_dim: l.out_dim(),
                    weights: l.weights.as_slice().to_vec(),
                    bias: l.bias.clone(),
                    activation: l.activation,
                })
                .collect(),
        }
    }
}

impl TryFrom<NetworkRecord> for DenseNet {
    type Error = Error;

    fn try_from(rec: NetworkRecord) -> Result<Self> {
        if rec.layers.first().map(|l| l.in_dim) != Some(rec.input_dim) {
            return Err(Error::format("input_dim does not match the first layer"));
        }
        let mut layers = Vec::with_capacity(rec.layers.len());
        for (k, l) in rec.layers.into_iter().enumerate() {
            let weights = Matrix::from_vec(l.out_dim, l.in_dim, l.weights)
                .map_err(|e| Error::format(format!("layer {k}: {e}")))?;
            layers.push(Layer {
                weights,
                bias: l.bias,
                activation: l.activation,
            });
        }
        DenseNet::new(layers).map_err(|e| Error::format(e.to_string()))
    }
}

impl DenseNet {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&NetworkRecord::from(self)).expect("finite network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: NetworkRecord =
            serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))?;
        DenseNet::try_from(rec)
    }
}
