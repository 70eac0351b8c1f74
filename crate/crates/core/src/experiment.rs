//! Config-driven experiment harness.
//!
//! A run is the cross product `rho × seed × method` (DQNimb cells further
//! expand over the resolved λ values). Every cell rebuilds its own imbalanced
//! training set from the run seed, so cells are independent and can execute
//! on a thread pool; records are merged in cell order, which keeps report
//! files byte-identical for identical configs regardless of scheduling.
//!
//! Seed fan-out per cell (see [`crate::seed`]): `subsample/rho=<rho>` picks
//! the retained positives, `agent` and `env` drive DQNimb, `supervised`
//! drives the baselines.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{self, AgentConfig};
use crate::baselines::{self, SupervisedConfig, SupervisedMethod};
use crate::data::{
    self, gen_blobs, load_csv, load_idx, BlobSpec, CsvOptions, Dataset, NormalizeMode, Normalizer,
};
use crate::env::EnvConfig;
use crate::metrics::{confusion, ConfusionMatrix};
use crate::seed::{derive_rng, derive_seed};
use crate::{Error, Label, Result};

/// Multipliers of ρ tried by the λ sweep.
pub const DEFAULT_LAMBDA_GRID: [f64; 7] = [0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 20.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    DqnImb,
    Supervised(SupervisedMethod),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::DqnImb => "DQNimb",
            Method::Supervised(m) => m.name(),
        }
    }

    fn valid_names() -> String {
        std::iter::once("DQNimb")
            .chain(SupervisedMethod::ALL.iter().map(|m| m.name()))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "DQNimb" {
            return Ok(Method::DqnImb);
        }
        s.parse::<SupervisedMethod>()
            .map(Method::Supervised)
            .map_err(|_| {
                Error::config(format!(
                    "unknown method {s:?}; valid methods: {}",
                    Method::valid_names()
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Blobs {
        train: BlobSpec,
        test: BlobSpec,
    },
    Csv {
        train: PathBuf,
        test: PathBuf,
        #[serde(default)]
        options: CsvOptions,
    },
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinarizeSpec {
    pub positive: Vec<Label>,
    #[serde(default)]
    pub negative: Option<Vec<Label>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaPolicy {
    /// λ = realized ρ of the training set actually used.
    #[default]
    AutoRho,
    Explicit {
        value: f64,
    },
    /// λ = multiplier × realized ρ, values above 1 clamped to 1.
    Sweep {
        #[serde(default = "default_grid")]
        multipliers: Vec<f64>,
    },
}

fn default_grid() -> Vec<f64> {
    DEFAULT_LAMBDA_GRID.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    #[serde(default)]
    pub binarize: Option<BinarizeSpec>,
    #[serde(default)]
    pub normalize: NormalizeMode,
    pub rhos: Vec<f64>,
    pub methods: Vec<String>,
    #[serde(default)]
    pub lambda: LambdaPolicy,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub supervised: SupervisedConfig,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub save_checkpoints: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        self.methods.iter().map(|m| m.parse()).collect()
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON of the config,
    /// with the output directory left out.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }

    /// Static checks that need no data.
    pub fn validate(&self) -> Result<()> {
        let methods = self.parsed_methods()?;
        if methods.is_empty() {
            return Err(Error::config("at least one method is required"));
        }
        if self.rhos.is_empty() {
            return Err(Error::config("at least one rho is required"));
        }
        if let Some(r) = self.rhos.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(Error::config(format!("rho {r} is outside (0, 1]")));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        match &self.lambda {
            LambdaPolicy::AutoRho => {}
            LambdaPolicy::Explicit { value } => {
                if !(*value > 0.0 && *value <= 1.0) {
                    return Err(Error::config(format!("lambda {value} is outside (0, 1]")));
                }
            }
            LambdaPolicy::Sweep { multipliers } => {
                if multipliers.is_empty() {
                    return Err(Error::config("lambda sweep grid is empty"));
                }
                if let Some(m) = multipliers.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
                    return Err(Error::config(format!(
                        "lambda multiplier {m} must be positive"
                    )));
                }
            }
        }
        if methods.contains(&Method::DqnImb) {
            self.agent
                .validate()
                .map_err(|e| Error::config(format!("agent: {e}")))?;
        }
        if methods.iter().any(|m| matches!(m, Method::Supervised(_))) {
            self.supervised
                .validate()
                .map_err(|e| Error::config(format!("supervised: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `out_dir` from the config. Nothing is written when neither is set.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 0 means one per core.
    pub threads: usize,
}

/// One evaluated `(method, rho, seed[, λ])` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub rho: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_multiplier: Option<f64>,
    pub train_positives: usize,
    pub train_negatives: usize,
    pub realized_rho: f64,
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
    pub g_mean: f64,
    pub f_measure: f64,
    pub normalization: NormalizeMode,
    pub config_hash: String,
}

impl RunRecord {
    pub fn confusion(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp,
            fn_: self.fn_,
            tn: self.tn,
            fp: self.fp,
        }
    }
}

/// Median over seeds for one `(method, rho[, λ multiplier])` group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_multiplier: Option<f64>,
    pub n_seeds: usize,
    pub median_g_mean: f64,
    pub median_f_measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub command: String,
    pub config_hash: String,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
struct CellTiming {
    method: String,
    rho: f64,
    seed: u64,
    lambda: Option<f64>,
    wall_time_ms: u128,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Groups records by `(method, rho, multiplier)` in first-appearance order.
pub fn aggregate(records: &[RunRecord]) -> Vec<Aggregate> {
    let mut groups: Vec<(Aggregate, Vec<f64>, Vec<f64>)> = Vec::new();
    for r in records {
        let key_matches = |a: &Aggregate| {
            a.method == r.method && a.rho == r.rho && a.lambda_multiplier == r.lambda_multiplier
        };
        let pos = match groups.iter().position(|(a, _, _)| key_matches(a)) {
            Some(p) => p,
            None => {
                groups.push((
                    Aggregate {
                        method: r.method.clone(),
                        rho: r.rho,
                        lambda: r.lambda,
                        lambda_multiplier: r.lambda_multiplier,
                        n_seeds: 0,
                        median_g_mean: 0.0,
                        median_f_measure: 0.0,
                    },
                    Vec::new(),
                    Vec::new(),
                ));
                groups.len() - 1
            }
        };
        let (agg, g, f) = &mut groups[pos];
        agg.n_seeds += 1;
        g.push(r.g_mean);
        f.push(r.f_measure);
    }
    groups
        .into_iter()
        .map(|(mut a, g, f)| {
            a.median_g_mean = median(&g);
            a.median_f_measure = median(&f);
            a
        })
        .collect()
}

struct Prepared {
    train: Dataset,
    test: Dataset,
}

fn load_source(source: &DatasetSource) -> Result<(Dataset, Dataset)> {
    let unresolvable = |e: Error| Error::config(format!("dataset cannot be loaded: {e}"));
    match source {
        DatasetSource::Blobs { train, test } => Ok((
            gen_blobs(train).map_err(unresolvable)?,
            gen_blobs(test).map_err(unresolvable)?,
        )),
        DatasetSource::Csv {
            train,
            test,
            options,
        } => Ok((
            load_csv(train, options).map_err(unresolvable)?,
            load_csv(test, options).map_err(unresolvable)?,
        )),
        DatasetSource::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
        } => Ok((
            load_idx(train_images, train_labels).map_err(unresolvable)?,
            load_idx(test_images, test_labels).map_err(unresolvable)?,
        )),
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let (mut train, mut test) = load_source(&cfg.dataset)?;
    if let Some(spec) = &cfg.binarize {
        let neg = spec.negative.as_deref();
        train = data::binarize(&train, &spec.positive, neg)
            .map_err(|e| Error::config(format!("binarizing training data: {e}")))?;
        test = data::binarize(&test, &spec.positive, neg)
            .map_err(|e| Error::config(format!("binarizing test data: {e}")))?;
    }
    train
        .require_both_classes()
        .map_err(|e| Error::config(format!("training data: {e}")))?;
    test.require_binary()
        .map_err(|e| Error::config(format!("test data: {e}")))?;
    if train.dim() != test.dim() {
        return Err(Error::config(format!(
            "train has {} features, test has {}",
            train.dim(),
            test.dim()
        )));
    }
    let negatives = train.class_counts()[0];
    for &rho in &cfg.rhos {
        if (rho * negatives as f64).floor() < 1.0 {
            return Err(Error::config(format!(
                "rho {rho} with {negatives} negatives leaves no positive sample"
            )));
        }
    }
    Ok(Prepared { train, test })
}

#[derive(Clone, Debug)]
struct Cell {
    rho: f64,
    seed: u64,
    method: Method,
    lambda: Option<LambdaChoice>,
}

#[derive(Clone, Copy, Debug)]
enum LambdaChoice {
    Auto,
    Fixed(f64),
    Multiplier(f64),
}

/// Training split for one `(rho, seed)`: subsampled, then normalized with
/// statistics from that split only.
fn cell_data(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    rho: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let mut rng = derive_rng(seed, &format!("subsample/rho={rho}"));
    let sub = data::make_imbalanced(&prep.train, rho, &mut rng)?;
    let norm = Normalizer::fit(&sub, cfg.normalize)?;
    Ok((norm.transform(&sub)?, norm.transform(&prep.test)?))
}

struct CellOutcome {
    record: RunRecord,
    warnings: Vec<String>,
    checkpoint: Option<(String, String)>,
    wall_time_ms: u128,
}

fn run_cell(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    cell: &Cell,
    hash: &str,
) -> Result<CellOutcome> {
    let started = Instant::now();
    let (train, test) = cell_data(cfg, prep, cell.rho, cell.seed)?;
    let realized_rho = train.imbalance_ratio()?;
    let positive = train.minority_label();
    let mut warnings = Vec::new();
    let mut lambda = None;
    let mut multiplier = None;
    let (preds, checkpoint_json) = match cell.method {
        Method::DqnImb => {
            let value = match cell.lambda.unwrap_or(LambdaChoice::Auto) {
                LambdaChoice::Auto => realized_rho,
                LambdaChoice::Fixed(v) => v,
                LambdaChoice::Multiplier(m) => {
                    multiplier = Some(m);
                    let raw = m * realized_rho;
                    if raw > 1.0 {
                        warnings.push(format!(
                            "rho {}: lambda {m} x {realized_rho} = {raw} clamped to 1",
                            cell.rho
                        ));
                        1.0
                    } else {
                        raw
                    }
                }
            };
            lambda = Some(value);
            let agent_cfg = AgentConfig {
                seed: derive_seed(cell.seed, "agent"),
                ..cfg.agent.clone()
            };
            let env_cfg = EnvConfig {
                lambda: value,
                shuffle_seed: derive_seed(cell.seed, "env"),
            };
            let policy = agent::train(&train, &agent_cfg, env_cfg)?;
            let preds = policy.predict_batch(test.features())?;
            let ck = cfg.save_checkpoints.then(|| policy.to_json());
            (preds, ck)
        }
        Method::Supervised(m) => {
            let sup_cfg = SupervisedConfig {
                seed: derive_seed(cell.seed, "supervised"),
                method: m,
                ..cfg.supervised.clone()
            };
            let clf = baselines::train_supervised(&train, &sup_cfg)?;
            let preds = clf.predict_batch(test.features())?;
            let ck = cfg
                .save_checkpoints
                .then(|| serde_json::to_string(&clf.checkpoint(None)).expect("serializes"));
            (preds, ck)
        }
    };
    let cm = confusion(&preds, test.labels(), positive)?;
    let [n0, n1] = train.class_counts();
    let (train_positives, train_negatives) = if positive == 1 { (n1, n0) } else { (n0, n1) };
    let record = RunRecord {
        method: cell.method.name().into(),
        rho: cell.rho,
        seed: cell.seed,
        lambda,
        lambda_multiplier: multiplier,
        train_positives,
        train_negatives,
        realized_rho,
        tp: cm.tp,
        fn_: cm.fn_,
        tn: cm.tn,
        fp: cm.fp,
        g_mean: cm.g_mean(),
        f_measure: cm.f_measure(),
        normalization: cfg.normalize,
        config_hash: hash.into(),
    };
    let checkpoint = checkpoint_json.map(|json| {
        let mut name = format!("{}_rho{}_seed{}", record.method, record.rho, record.seed);
        if let Some(l) = lambda.filter(|_| multiplier.is_some()) {
            name.push_str(&format!("_lambda{l}"));
        }
        (name, json)
    });
    Ok(CellOutcome {
        record,
        warnings,
        checkpoint,
        wall_time_ms: started.elapsed().as_millis(),
    })
}

fn build_cells(cfg: &ExperimentConfig, methods: &[Method]) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &rho in &cfg.rhos {
        for &method in methods {
            let lambdas: Vec<Option<LambdaChoice>> = match (method, &cfg.lambda) {
                (Method::Supervised(_), _) => vec![None],
                (Method::DqnImb, LambdaPolicy::AutoRho) => vec![Some(LambdaChoice::Auto)],
                (Method::DqnImb, LambdaPolicy::Explicit { value }) => {
                    vec![Some(LambdaChoice::Fixed(*value))]
                }
                (Method::DqnImb, LambdaPolicy::Sweep { multipliers }) => multipliers
                    .iter()
                    .map(|&m| Some(LambdaChoice::Multiplier(m)))
                    .collect(),
            };
            for lambda in lambdas {
                for &seed in &cfg.seeds {
                    cells.push(Cell {
                        rho,
                        seed,
                        method,
                        lambda,
                    });
                }
            }
        }
    }
    cells
}

/// Report, per-cell timings, and `(file stem, checkpoint JSON)` pairs.
type Execution = (EvalReport, Vec<CellTiming>, Vec<(String, String)>);

fn execute(
    cfg: &ExperimentConfig,
    methods: &[Method],
    command: &str,
    opts: &RunOptions,
) -> Result<Execution> {
    cfg.validate()?;
    let hash = cfg.hash();
    let prep = prepare(cfg)?;
    let cells = build_cells(cfg, methods);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<CellOutcome>> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_cell(cfg, &prep, c, &hash))
            .collect()
    });

    let mut records = Vec::with_capacity(outcomes.len());
    let mut warnings = Vec::new();
    let mut timings = Vec::new();
    let mut checkpoints = Vec::new();
    for outcome in outcomes {
        let o = outcome?;
        for w in o.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        timings.push(CellTiming {
            method: o.record.method.clone(),
            rho: o.record.rho,
            seed: o.record.seed,
            lambda: o.record.lambda,
            wall_time_ms: o.wall_time_ms,
        });
        checkpoints.extend(o.checkpoint);
        records.push(o.record);
    }
    let aggregates = aggregate(&records);
    let report = EvalReport {
        command: command.into(),
        config_hash: hash,
        records,
        aggregates,
        warnings,
    };
    Ok((report, timings, checkpoints))
}

fn resolve_out_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> Option<PathBuf> {
    opts.out_dir.clone().or_else(|| cfg.out_dir.clone())
}

fn write_common(
    dir: &Path,
    report: &EvalReport,
    timings: &[CellTiming],
    checkpoints: &[(String, String)],
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let hash = &report.config_hash;
    std::fs::write(
        dir.join(format!("report_{hash}.json")),
        serde_json::to_string_pretty(report)? + "\n",
    )?;
    std::fs::write(
        dir.join(format!("timings_{hash}.json")),
        serde_json::to_string_pretty(timings)? + "\n",
    )?;
    let mut out = std::fs::File::create(dir.join(format!("records_{hash}.csv")))?;
    write_records_csv(&report.records, &mut out)?;
    if !checkpoints.is_empty() {
        let ck_dir = dir.join(hash).join("checkpoints");
        std::fs::create_dir_all(&ck_dir)?;
        for (name, json) in checkpoints {
            std::fs::write(ck_dir.join(format!("{name}.json")), json)?;
        }
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_records_csv<W: Write>(records: &[RunRecord], out: &mut W) -> Result<()> {
    writeln!(
        out,
        "method,rho,seed,lambda,lambda_multiplier,train_positives,train_negatives,realized_rho,tp,fn,tn,fp,g_mean,f_measure,config_hash"
    )?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.rho,
            r.seed,
            opt(r.lambda),
            opt(r.lambda_multiplier),
            r.train_positives,
            r.train_negatives,
            r.realized_rho,
            r.tp,
            r.fn_,
            r.tn,
            r.fp,
            r.g_mean,
            r.f_measure,
            r.config_hash
        )?;
    }
    Ok(())
}

/// One row per `(method, rho)`, in the order given by the config.
pub fn write_compare_csv<W: Write>(aggregates: &[Aggregate], out: &mut W) -> Result<()> {
    writeln!(out, "method,rho,n_seeds,median_g_mean,median_f_measure")?;
    for a in aggregates {
        writeln!(
            out,
            "{},{},{},{},{}",
            a.method, a.rho, a.n_seeds, a.median_g_mean, a.median_f_measure
        )?;
    }
    Ok(())
}

/// λ-vs-score table, rows ordered by rho (config order) then λ ascending.
pub fn write_sweep_csv<W: Write>(aggregates: &[Aggregate], out: &mut W) -> Result<()> {
    writeln!(
        out,
        "rho,lambda_multiplier,lambda,n_seeds,median_g_mean,median_f_measure"
    )?;
    for a in aggregates {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            a.rho,
            opt(a.lambda_multiplier),
            opt(a.lambda),
            a.n_seeds,
            a.median_g_mean,
            a.median_f_measure
        )?;
    }
    Ok(())
}

/// Trains and evaluates every configured cell; writes `report_<hash>.json`,
/// `records_<hash>.csv` and `timings_<hash>.json` when an output directory is set.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<EvalReport> {
    let methods = cfg.parsed_methods()?;
    let (report, timings, checkpoints) = execute(cfg, &methods, "run", opts)?;
    if let Some(dir) = resolve_out_dir(cfg, opts) {
        write_common(&dir, &report, &timings, &checkpoints)?;
    }
    Ok(report)
}

/// Runs DQNimb over `multiplier × ρ` for each multiplier (the default grid
/// when `None`). Duplicate λ values after clamping are dropped.
pub fn sweep_lambda(
    cfg: &ExperimentConfig,
    multipliers: Option<&[f64]>,
    opts: &RunOptions,
) -> Result<EvalReport> {
    let methods = cfg.parsed_methods()?;
    if !methods.contains(&Method::DqnImb) {
        return Err(Error::config(
            "the lambda sweep needs DQNimb among the methods",
        ));
    }
    let grid: Vec<f64> = match (multipliers, &cfg.lambda) {
        (Some(m), _) => m.to_vec(),
        (None, LambdaPolicy::Sweep { multipliers }) => multipliers.clone(),
        (None, _) => DEFAULT_LAMBDA_GRID.to_vec(),
    };
    let mut grid: Vec<f64> = grid
        .into_iter()
        .filter(|m| m.is_finite() && *m > 0.0)
        .collect();
    if grid.is_empty() {
        return Err(Error::config("effective lambda grid is empty"));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let sweep_cfg = ExperimentConfig {
        lambda: LambdaPolicy::Sweep { multipliers: grid },
        ..cfg.clone()
    };
    let (mut report, timings, checkpoints) =
        execute(&sweep_cfg, &[Method::DqnImb], "sweep-lambda", opts)?;

    // Drop cells whose clamped λ repeats an earlier multiplier's λ.
    let mut seen: Vec<(u64, u64, u64)> = Vec::new();
    report.records.retain(|r| {
        let key = (
            r.rho.to_bits(),
            r.seed,
            r.lambda.unwrap_or(f64::NAN).to_bits(),
        );
        if seen.contains(&key) {
            false
        } else {
            seen.push(key);
            true
        }
    });
    let rho_pos = |rho: f64| {
        cfg.rhos
            .iter()
            .position(|&r| r == rho)
            .unwrap_or(usize::MAX)
    };
    report.records.sort_by(|a, b| {
        rho_pos(a.rho)
            .cmp(&rho_pos(b.rho))
            .then(a.lambda.unwrap_or(0.0).total_cmp(&b.lambda.unwrap_or(0.0)))
            .then(a.seed.cmp(&b.seed))
    });
    report.aggregates = aggregate(&report.records);

    if let Some(dir) = resolve_out_dir(cfg, opts) {
        write_common(&dir, &report, &timings, &checkpoints)?;
        let mut out = std::fs::File::create(dir.join(format!("sweep_{}.csv", report.config_hash)))?;
        write_sweep_csv(&report.aggregates, &mut out)?;
    }
    Ok(report)
}

/// Like [`run`] but demands at least two methods and also writes
/// `compare_<hash>.csv` with per-`(method, rho)` medians.
pub fn compare(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<EvalReport> {
    let methods = cfg.parsed_methods()?;
    if methods.len() < 2 {
        return Err(Error::config("compare needs at least two methods"));
    }
    let (mut report, timings, checkpoints) = execute(cfg, &methods, "compare", opts)?;
    // (method, rho) rows follow the requested rho order, methods within each rho.
    let rho_pos = |rho: f64| {
        cfg.rhos
            .iter()
            .position(|&r| r == rho)
            .unwrap_or(usize::MAX)
    };
    let method_pos = |m: &str| {
        cfg.methods
            .iter()
            .position(|x| x == m)
            .unwrap_or(usize::MAX)
    };
    report
        .aggregates
        .sort_by_key(|a| (rho_pos(a.rho), method_pos(&a.method)));
    if let Some(dir) = resolve_out_dir(cfg, opts) {
        write_common(&dir, &report, &timings, &checkpoints)?;
        let mut out =
            std::fs::File::create(dir.join(format!("compare_{}.csv", report.config_hash)))?;
        write_compare_csv(&report.aggregates, &mut out)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob_config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{
                "dataset": {"kind": "blobs",
                    "train": {"means": [[0,0],[3,0]], "stds": [1,1], "counts": [300, 300], "seed": 1},
                    "test":  {"means": [[0,0],[3,0]], "stds": [1,1], "counts": [100, 100], "seed": 2}},
                "rhos": [0.1],
                "methods": ["DNN", "DQNimb"],
                "agent": {"total_steps": 1500, "warmup_steps": 100, "hidden": [8]},
                "supervised": {"hidden": [8], "max_epochs": 5},
                "seeds": [1]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn unknown_method_names_valid_set() {
        let mut cfg = blob_config();
        cfg.methods = vec!["SMOTE".into()];
        let err = cfg.validate().unwrap_err();
        assert!(err.is_config());
        let msg = err.to_string();
        for name in ["DQNimb", "DNN", "ROS", "RUS", "CSM", "DTA"] {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn static_validation() {
        let mut cfg = blob_config();
        cfg.lambda = LambdaPolicy::Explicit { value: 1.5 };
        assert!(cfg.validate().unwrap_err().is_config());
        let mut cfg = blob_config();
        cfg.seeds.clear();
        assert!(cfg.validate().unwrap_err().is_config());
        let mut cfg = blob_config();
        cfg.rhos = vec![0.0];
        assert!(cfg.validate().unwrap_err().is_config());
        let mut cfg = blob_config();
        cfg.lambda = LambdaPolicy::Sweep {
            multipliers: vec![],
        };
        assert!(cfg.validate().unwrap_err().is_config());
        assert!(ExperimentConfig::from_json("{}").unwrap_err().is_config());
    }

    #[test]
    fn minimal_run_yields_one_record_per_method() {
        let report = run(
            &blob_config(),
            &RunOptions {
                threads: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.records.len(), 2);
        let dqn = report
            .records
            .iter()
            .find(|r| r.method == "DQNimb")
            .unwrap();
        assert_eq!((dqn.train_positives, dqn.train_negatives), (30, 300));
        assert_eq!(dqn.lambda, Some(0.1));
        let dnn = report.records.iter().find(|r| r.method == "DNN").unwrap();
        assert_eq!(dnn.lambda, None);
        assert_eq!(dnn.confusion().total(), 200);
    }

    #[test]
    fn median_definition() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = blob_config();
        let mut b = a.clone();
        b.out_dir = Some("/tmp/elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seeds.push(2);
        assert_ne!(a.hash(), c.hash());
    }
}
