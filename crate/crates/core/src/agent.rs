//! Deep Q-learning over [`ClassificationEnv`].
//!
//! Each interaction picks an ε-greedy action, stores the transition, then
//! (after a warm-up) draws a uniform mini-batch from replay memory and takes
//! one Adam step on the squared TD error. TD targets bootstrap from the online
//! network itself. Training stops on a global step budget; ε decays linearly
//! in that same step counter.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::env::{ClassificationEnv, EnvConfig};
use crate::nn::{argmax, AdamHyper, AdamState, DenseNet, Matrix, NetworkRecord};
use crate::replay::{ReplayMemory, Transition};
use crate::seed::derive_rng;
use crate::{Error, Label, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub gamma: f64,
    pub total_steps: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Defaults to 20% of `total_steps`.
    pub epsilon_decay_steps: Option<usize>,
    /// Transitions stored before the first gradient step.
    pub warmup_steps: usize,
    /// Hidden layer widths of the Q-network.
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            gamma: 0.1,
            total_steps: 120_000,
            replay_capacity: 50_000,
            batch_size: 64,
            lr: 0.00025,
            epsilon_start: 1.0,
            epsilon_end: 0.01,
            epsilon_decay_steps: None,
            warmup_steps: 1_000,
            hidden: vec![256],
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn decay_steps(&self) -> usize {
        self.epsilon_decay_steps.unwrap_or(self.total_steps / 5)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::invalid(msg.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.epsilon_start <= 1.0
            && self.epsilon_start >= self.epsilon_end
            && self.epsilon_end >= 0.0)
        {
            return bad("need 1 >= epsilon_start >= epsilon_end >= 0");
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return bad("batch_size and replay_capacity must be positive");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.hidden.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        Ok(())
    }
}

/// Linear decay from `epsilon_start` at step 0 to `epsilon_end` at the decay
/// horizon, flat afterwards.
pub fn epsilon_at(step: usize, cfg: &AgentConfig) -> f64 {
    let horizon = cfg.decay_steps();
    if step >= horizon {
        return cfg.epsilon_end;
    }
    let frac = step as f64 / horizon as f64;
    cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac
}

/// ε-greedy choice over two Q-values; ties go to label 0.
pub fn select_action<R: Rng + ?Sized>(q_row: &[f64], epsilon: f64, rng: &mut R) -> Label {
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..2u8)
    } else {
        argmax(q_row) as Label
    }
}

pub fn td_target(reward: f64, terminal: bool, next_q: &[f64], gamma: f64) -> f64 {
    if terminal {
        reward
    } else {
        reward + gamma * next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `|D_P| / (λ · |D_N|)`: minority over majority mass of immediate-reward
/// coefficients in the summed Q-network gradient. Exactly 1 when λ equals the
/// imbalance ratio.
pub fn reward_mass_ratio(ds: &Dataset, lambda: f64) -> Result<f64> {
    ds.require_both_classes()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(ds.minority_count() as f64 / (lambda * ds.majority_count() as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    /// Global step count when the episode ended.
    pub step: usize,
    pub length: usize,
    pub epsilon: f64,
    /// Mean TD loss over the episode's gradient steps, if any were taken.
    pub loss: Option<f64>,
    pub episode_return: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub episodes: Vec<EpisodeRecord>,
}

impl TrainingHistory {
    /// Columns: `step,episode,epsilon,loss,episode_return`; empty loss when no
    /// update ran during the episode.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "step,episode,epsilon,loss,episode_return")?;
        for e in &self.episodes {
            let loss = e.loss.map(|l| l.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                e.step, e.episode, e.epsilon, loss, e.episode_return
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedPolicy {
    pub q_network: DenseNet,
    pub history: TrainingHistory,
    pub config: AgentConfig,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyMetadata {
    pub method: String,
    pub lambda: f64,
    pub seed: u64,
    pub config: AgentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<serde_json::Value>,
}

/// Network checkpoint plus a metadata block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyCheckpoint {
    pub network: NetworkRecord,
    pub metadata: PolicyMetadata,
}

impl PolicyCheckpoint {
    pub fn from_json(text: &str) -> Result<(DenseNet, PolicyMetadata)> {
        let ck: PolicyCheckpoint =
            serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))?;
        let net = DenseNet::try_from(ck.network)?;
        if net.output_dim() != 2 {
            return Err(Error::format("policy network must have exactly 2 outputs"));
        }
        Ok((net, ck.metadata))
    }
}

impl TrainedPolicy {
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(argmax(&self.q_network.forward_row(x)?) as Label)
    }

    pub fn predict_batch(&self, batch: &Matrix) -> Result<Vec<Label>> {
        let q = self.q_network.forward(batch)?;
        Ok(q.iter_rows().map(|row| argmax(row) as Label).collect())
    }

    pub fn checkpoint(&self, metrics: Option<serde_json::Value>) -> PolicyCheckpoint {
        PolicyCheckpoint {
            network: NetworkRecord::from(&self.q_network),
            metadata: PolicyMetadata {
                method: "DQNimb".into(),
                lambda: self.lambda,
                seed: self.config.seed,
                config: self.config.clone(),
                metrics,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.checkpoint(None)).expect("checkpoint serializes")
    }
}

/// Greedy prediction (argmax over the two Q-values, ties to label 0).
pub fn predict(policy: &TrainedPolicy, x: &[f64]) -> Result<Label> {
    policy.predict(x)
}

/// One mini-batch TD update; returns the mean squared TD error.
fn learn_step<R: Rng + ?Sized>(
    net: &mut DenseNet,
    adam: &mut AdamState,
    memory: &ReplayMemory,
    cfg: &AgentConfig,
    rng: &mut R,
) -> Result<f64> {
    let batch = memory.sample(cfg.batch_size, rng)?;
    let dim = net.input_dim();
    let n = batch.len();
    let mut states = Vec::with_capacity(n * dim);
    let mut next_states = Vec::with_capacity(n * dim);
    for t in &batch {
        states.extend_from_slice(&t.state);
        next_states.extend_from_slice(&t.next_state);
    }
    let next_q = net.forward(&Matrix::from_vec(n, dim, next_states)?)?;
    let targets: Vec<f64> = batch
        .iter()
        .enumerate()
        .map(|(i, t)| td_target(t.reward, t.terminal, next_q.row(i), cfg.gamma))
        .collect();
    let actions: Vec<usize> = batch.iter().map(|t| t.action as usize).collect();
    let states = Matrix::from_vec(n, dim, states)?;
    let (loss, mut grads) = net.backward_q_mse(&states, &actions, &targets)?;
    grads.scale(1.0 / n as f64);
    adam.step(net, &grads)?;
    Ok(loss / n as f64)
}

/// Runs deep Q-learning until `cfg.total_steps` interactions have happened.
///
/// Randomness comes from `cfg.seed` (weight init, exploration, replay
/// sampling) and `env_cfg.shuffle_seed` (episode orders).
pub fn train(ds: &Dataset, cfg: &AgentConfig, env_cfg: EnvConfig) -> Result<TrainedPolicy> {
    cfg.validate()?;
    ds.require_both_classes()?;
    let mut env = ClassificationEnv::new(ds, env_cfg)?;
    let mut init_rng = derive_rng(cfg.seed, "dqn/init");
    let mut explore_rng = derive_rng(cfg.seed, "dqn/explore");
    let mut replay_rng = derive_rng(cfg.seed, "dqn/replay");

    let mut net = DenseNet::glorot(ds.dim(), &cfg.hidden, 2, &mut init_rng)?;
    let mut adam = AdamState::new(&net, AdamHyper::with_lr(cfg.lr));
    let mut memory = ReplayMemory::new(cfg.replay_capacity)?;
    let mut history = TrainingHistory::default();
    let learn_after = cfg.warmup_steps.max(1);

    let mut step = 0usize;
    while step < cfg.total_steps {
        let mut state = env.reset();
        let mut ep_return = 0.0;
        let mut length = 0usize;
        let (mut loss_sum, mut updates) = (0.0, 0usize);
        loop {
            let eps = epsilon_at(step, cfg);
            let q = net.forward_row(&state)?;
            let action = select_action(&q, eps, &mut explore_rng);
            let out = env.step(action)?;
            ep_return += out.reward;
            length += 1;
            step += 1;
            memory.push(Transition {
                state,
                action,
                reward: out.reward,
                next_state: out.next_state.clone(),
                terminal: out.terminal,
            });
            if memory.len() >= learn_after {
                loss_sum += learn_step(&mut net, &mut adam, &memory, cfg, &mut replay_rng)?;
                updates += 1;
            }
            if out.terminal || step >= cfg.total_steps {
                break;
            }
            state = out.next_state;
        }
        history.episodes.push(EpisodeRecord {
            episode: env.cursor().episode_count,
            step,
            length,
            epsilon: epsilon_at(step, cfg),
            loss: (updates > 0).then(|| loss_sum / updates as f64),
            episode_return: ep_return,
        });
    }
    Ok(TrainedPolicy {
        q_network: net,
        history,
        config: cfg.clone(),
        lambda: env_cfg.lambda,
    })
}
