//! Minimal dense neural network in double precision.
//!
//! Only what deep Q-learning and the supervised baselines need: fully
//! connected layers with ReLU or identity activations, a forward pass, two
//! fixed loss heads with hand-written backpropagation, and Adam.

mod adam;
mod checkpoint;
mod matrix;
mod net;

pub use adam::{AdamHyper, AdamState};
pub use checkpoint::{LayerRecord, NetworkRecord};
pub use matrix::Matrix;
pub use net::{argmax, softmax, Activation, DenseNet, Gradients, Layer, LayerGrad};
