//! Imbalanced binary classification framed as a sequential decision process.
//!
//! A classifier agent walks through a shuffled training set, guessing one label
//! per step. The environment pays `±1` for minority-class samples and `±λ` for
//! majority-class samples and ends the episode as soon as a minority sample is
//! misclassified. A deep Q-network trained on this process yields a classifier
//! whose decision rule is balanced between the classes when `λ` equals the
//! imbalance ratio `|minority| / |majority|`.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: dense networks, two loss heads, Adam.
//! - [`env`]: the classification environment and its reward.
//! - [`replay`]: fixed-capacity experience replay.
//! - [`agent`]: deep Q-learning over the environment.
//! - [`baselines`]: supervised comparison methods (DNN, ROS, RUS, CSM, DTA).
//! - [`metrics`]: confusion matrix, G-mean, F-measure.
//! - [`data`]: loaders (CSV, IDX), binarization, imbalance subsampling, blobs.
//! - [`experiment`]: config-driven run/sweep/compare harness and reports.

pub mod agent;
pub mod baselines;
pub mod data;
pub mod env;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod nn;
pub mod replay;
pub mod seed;

pub use error::{Error, Result};

/// Class label. After binarization every label is `0` or `1`.
pub type Label = u8;
