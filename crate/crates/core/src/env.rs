//! The classification environment.
//!
//! States are training samples visited in a freshly shuffled order each
//! episode, actions are label guesses, and rewards follow
//!
//! | sample   | correct | wrong |
//! |----------|---------|-------|
//! | minority | +1      | −1    |
//! | majority | +λ      | −λ    |
//!
//! An episode ends after the last sample of the shuffled order or on the
//! first misclassified minority sample, whichever comes first.

use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::data::Dataset;
use crate::seed::{rng_from, Rng};
use crate::{Error, Label, Result};

pub fn reward(action: Label, true_label: Label, is_minority: bool, lambda: f64) -> f64 {
    let magnitude = if is_minority { 1.0 } else { lambda };
    if action == true_label {
        magnitude
    } else {
        -magnitude
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvConfig {
    /// Reward magnitude for majority-class samples, in (0, 1].
    pub lambda: f64,
    pub shuffle_seed: u64,
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::invalid(format!(
                "lambda must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Position of the agent inside the current epoch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvCursor {
    pub epoch_order: Vec<usize>,
    pub position: usize,
    pub episode_count: u64,
}

/// Result of one [`ClassificationEnv::step`]. `next_state` is the all-zero
/// end marker when `terminal` is set.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub reward: f64,
    pub terminal: bool,
    pub next_state: Arc<[f64]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    NeedsReset,
    Running,
}

pub struct ClassificationEnv {
    rows: Vec<Arc<[f64]>>,
    labels: Vec<Label>,
    minority_label: Label,
    end_marker: Arc<[f64]>,
    lambda: f64,
    rng: Rng,
    cursor: EnvCursor,
    phase: Phase,
}

impl ClassificationEnv {
    pub fn new(ds: &Dataset, cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        if ds.is_empty() {
            return Err(Error::invalid("environment needs a non-empty dataset"));
        }
        ds.require_binary()?;
        Ok(ClassificationEnv {
            rows: (0..ds.len()).map(|i| Arc::from(ds.row(i))).collect(),
            labels: ds.labels().to_vec(),
            minority_label: ds.minority_label(),
            end_marker: vec![0.0; ds.dim()].into(),
            lambda: cfg.lambda,
            rng: rng_from(cfg.shuffle_seed),
            cursor: EnvCursor {
                epoch_order: Vec::new(),
                position: 0,
                episode_count: 0,
            },
            phase: Phase::NeedsReset,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cursor(&self) -> &EnvCursor {
        &self.cursor
    }

    /// Dataset index of the sample currently shown to the agent.
    pub fn current_index(&self) -> Option<usize> {
        (self.phase == Phase::Running).then(|| self.cursor.epoch_order[self.cursor.position])
    }

    pub fn current_label(&self) -> Option<Label> {
        self.current_index().map(|i| self.labels[i])
    }

    /// Starts a new episode over a fresh permutation and returns its first state.
    pub fn reset(&mut self) -> Arc<[f64]> {
        let order = &mut self.cursor.epoch_order;
        order.clear();
        order.extend(0..self.rows.len());
        order.shuffle(&mut self.rng);
        self.cursor.position = 0;
        self.cursor.episode_count += 1;
        self.phase = Phase::Running;
        Arc::clone(&self.rows[order[0]])
    }

    pub fn step(&mut self, action: Label) -> Result<StepOutcome> {
        if self.phase != Phase::Running {
            return Err(Error::Protocol(
                "step called before reset or after a terminal step".into(),
            ));
        }
        if action > 1 {
            return Err(Error::invalid(format!(
                "action {action} is not a binary label"
            )));
        }
        let idx = self.cursor.epoch_order[self.cursor.position];
        let label = self.labels[idx];
        let is_minority = label == self.minority_label;
        let r = reward(action, label, is_minority, self.lambda);
        self.cursor.position += 1;
        let last = self.cursor.position == self.rows.len();
        let terminal = last || (is_minority && action != label);
        let next_state = if terminal {
            self.phase = Phase::NeedsReset;
            Arc::clone(&self.end_marker)
        } else {
            Arc::clone(&self.rows[self.cursor.epoch_order[self.cursor.position]])
        };
        Ok(StepOutcome {
            reward: r,
            terminal,
            next_state,
        })
    }
}
