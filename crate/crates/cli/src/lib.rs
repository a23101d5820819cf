//! Harness for social network twin experiments: preprocessing, realism
//! evaluation, scorer training, mechanics fitting and simulation.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{LoadedConfig, ProviderKind};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "twon", version, about = "Evaluate, fit and simulate social network twins")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter, select active users and split a raw corpus.
    Ingest {
        #[command(flatten)]
        common: Common,
    },
    /// Score generated texts against the test split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        provider: Option<ProviderArg>,
        #[arg(long)]
        condition: Option<String>,
    },
    /// Train the reply-likelihood scorer.
    TrainScorer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Run a simulation and write the result bundle.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ticks: Option<u64>,
    },
    /// Select the mechanics that best explain observed feeds.
    FitMechanics {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ProviderArg {
    Stub,
    Markov,
    Remote,
}

/// Loads the config and applies flag overrides, recording each one.
fn load(common: &Common, overrides: &mut BTreeMap<String, String>) -> Result<LoadedConfig, CliError> {
    let mut cfg = LoadedConfig::from_file(&common.config)?;
    if let Some(dir) = &common.output_dir {
        overrides.insert("output_dir".into(), dir.display().to_string());
        // Flag paths are relative to the working directory, not the config.
        cfg.config.output_dir = std::env::current_dir()
            .map(|cwd| cwd.join(dir))
            .unwrap_or_else(|_| dir.clone());
    }
    if let Some(seed) = common.seed {
        overrides.insert("seed".into(), seed.to_string());
        cfg.config.seed = seed;
    }
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = BTreeMap::new();
    match cli.command {
        Command::Ingest { common } => {
            let cfg = load(&common, &mut overrides)?;
            let dir = commands::cmd_ingest(&cfg, &overrides)?;
            println!("{}", dir.display());
        }
        Command::Evaluate {
            common,
            n,
            k,
            provider,
            condition,
        } => {
            let mut cfg = load(&common, &mut overrides)?;
            if let Some(n) = n {
                overrides.insert("metrics.n".into(), n.to_string());
                cfg.config.metrics.n = n;
            }
            if let Some(k) = k {
                overrides.insert("metrics.k".into(), k.to_string());
                cfg.config.metrics.k = k;
            }
            if let Some(p) = provider {
                overrides.insert("provider.kind".into(), format!("{p:?}").to_lowercase());
                cfg.config.provider.kind = match p {
                    ProviderArg::Stub => ProviderKind::Stub,
                    ProviderArg::Markov => ProviderKind::Markov,
                    ProviderArg::Remote => ProviderKind::Remote,
                };
            }
            if let Some(c) = condition {
                overrides.insert("metrics.condition".into(), c.clone());
                cfg.config.metrics.condition = c;
            }
            let out = commands::cmd_evaluate(&cfg, &overrides)?;
            print!("{}", out.report.to_table());
        }
        Command::TrainScorer { common, epochs, lr } => {
            let mut cfg = load(&common, &mut overrides)?;
            if let Some(e) = epochs {
                overrides.insert("scorer.epochs".into(), e.to_string());
                cfg.config.scorer.epochs = e;
            }
            if let Some(lr) = lr {
                overrides.insert("scorer.lr".into(), lr.to_string());
                cfg.config.scorer.lr = lr;
            }
            let summary = commands::cmd_train_scorer(&cfg, &overrides)?;
            println!("train F1 {:.4}  test F1 {:.4}", summary.train.f1, summary.test.f1);
        }
        Command::Simulate { common, ticks } => {
            let mut cfg = load(&common, &mut overrides)?;
            if let Some(t) = ticks {
                overrides.insert("simulate.ticks".into(), t.to_string());
                cfg.config.simulate.ticks = t;
            }
            let bundle = commands::cmd_simulate(&cfg, &overrides)?;
            println!(
                "q = {:.4}  L_r = {:.4}  messages = {}",
                bundle.q.value, bundle.mechanics_loss.value, bundle.transcript.messages
            );
        }
        Command::FitMechanics { common } => {
            let cfg = load(&common, &mut overrides)?;
            let fit = commands::cmd_fit_mechanics(&cfg, &overrides)?;
            println!(
                "{}  loss {:.6}",
                serde_json::to_string(&fit.config).unwrap_or_default(),
                fit.loss
            );
        }
    }
    Ok(())
}
