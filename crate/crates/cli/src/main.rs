use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dqnimb::data::{self, BlobSpec, CsvOptions, LabelColumn};
use dqnimb::experiment::{self, EvalReport, ExperimentConfig, RunOptions};
use dqnimb::seed::derive_rng;
use dqnimb::Error;

#[derive(Parser)]
#[command(
    name = "dqnimb",
    version,
    about = "Imbalanced classification with deep Q-learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate every (method, rho, seed) cell.
    Run(Common),
    /// Sweep the majority reward λ over multiples of ρ.
    SweepLambda {
        #[command(flatten)]
        common: Common,
        /// Comma-separated multipliers of ρ.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Median G-mean / F-measure per (method, rho).
    Compare(Common),
    /// Subsample positives of a CSV dataset down to ratio rho.
    MakeImbalanced {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Label column name (or index with --label-index).
        #[arg(long, default_value = "label")]
        label_column: String,
        #[arg(long)]
        label_index: Option<usize>,
        #[arg(long)]
        no_header: bool,
    },
    /// Generate a Gaussian blob dataset from a JSON spec and write it as CSV.
    GenBlobs {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(common: &Common) -> dqnimb::Result<(ExperimentConfig, RunOptions)> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    let opts = RunOptions {
        out_dir: common.out_dir.clone(),
        threads: common.threads,
    };
    Ok((cfg, opts))
}

fn print_report(report: &EvalReport) {
    for w in &report.warnings {
        log::warn!("{w}");
    }
    println!("config {}", report.config_hash);
    println!(
        "{:<8} {:>8} {:>10} {:>6} {:>10} {:>10}",
        "method", "rho", "lambda", "seeds", "g_mean", "f_measure"
    );
    for a in &report.aggregates {
        let lambda = a
            .lambda
            .map(|l| format!("{l:.6}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<8} {:>8} {:>10} {:>6} {:>10.6} {:>10.6}",
            a.method, a.rho, lambda, a.n_seeds, a.median_g_mean, a.median_f_measure
        );
    }
}

fn dispatch(cli: Cli) -> dqnimb::Result<()> {
    match cli.command {
        Command::Run(common) => {
            let (cfg, opts) = load_config(&common)?;
            print_report(&experiment::run(&cfg, &opts)?);
        }
        Command::SweepLambda { common, grid } => {
            let (cfg, opts) = load_config(&common)?;
            print_report(&experiment::sweep_lambda(&cfg, grid.as_deref(), &opts)?);
        }
        Command::Compare(common) => {
            let (cfg, opts) = load_config(&common)?;
            print_report(&experiment::compare(&cfg, &opts)?);
        }
        Command::MakeImbalanced {
            input,
            output,
            rho,
            seed,
            label_column,
            label_index,
            no_header,
        } => {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(Error::Config(format!("rho {rho} is outside (0, 1]")));
            }
            let opts = CsvOptions {
                label_column: match label_index {
                    Some(i) => LabelColumn::Index(i),
                    None => LabelColumn::Name(label_column),
                },
                has_header: !no_header,
            };
            let ds = data::load_csv(&input, &opts)?;
            let mut rng = derive_rng(seed, &format!("subsample/rho={rho}"));
            let sub = data::make_imbalanced(&ds, rho, &mut rng)?;
            data::write_csv(&sub, &output)?;
            let [n0, n1] = sub.class_counts();
            println!(
                "wrote {} ({n1} positives, {n0} negatives)",
                output.display()
            );
        }
        Command::GenBlobs {
            config,
            output,
            seed,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
            let mut spec: BlobSpec = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("invalid blob spec: {e}")))?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
            let ds = data::gen_blobs(&spec)?;
            data::write_csv(&ds, &output)?;
            println!("wrote {} ({} samples)", output.display(), ds.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
