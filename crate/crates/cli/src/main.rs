use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use log::info;
use musae_core::eval::{evaluate, write_report, EvalOptions};
use musae_core::pipeline::{build_dataset, Dataset, PreprocessConfig, Split};
use musae_core::train::RunConfig;
use musae_core::{Checkpoint, Model32, Prior, Trainer32};
use musae_service::Session;

#[derive(Parser)]
#[command(name = "musae", version, about = "Adversarial autoencoder for multitrack symbolic music")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a MIDI corpus and genre metadata into a segment dataset.
    Preprocess {
        #[arg(long)]
        corpus: PathBuf,
        /// JSON object mapping song id (file stem) to a list of genre tags.
        #[arg(long)]
        metadata: PathBuf,
        #[arg(long, value_parser = ["2", "16"])]
        bars: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.2)]
        validation_fraction: f64,
        /// JSON list of the 32 selected tags in circle order.
        #[arg(long)]
        circle_order: Option<PathBuf>,
        /// Skip the build-time random transposition.
        #[arg(long)]
        no_augment: bool,
    },
    /// Train a model; metrics go to OUT/metrics.jsonl.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// TOML run configuration (`[model]`, `[prior]`, `[train]` tables).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Continue from a checkpoint written by an earlier run. Its
        /// model and prior are kept; `[train]` from the config applies.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Accuracy, interpolation, genre profile and PCA report for a checkpoint.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 256)]
        interp_pairs: usize,
        /// Two genre tags to project with PCA.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        genres: Option<Vec<String>>,
        #[arg(long, default_value = "validation", value_parser = ["train", "validation"])]
        split: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the HTTP API over a checkpoint.
    Serve {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, env = "MUSAE_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "MUSAE_HOST", default_value = "127.0.0.1")]
        host: IpAddr,
        /// Allowed CORS origin; any origin when unset.
        #[arg(long, env = "MUSAE_CORS_ORIGIN")]
        cors_origin: Option<String>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Preprocess { corpus, metadata, bars, out, seed, validation_fraction, circle_order, no_augment } => {
            let circle_order = circle_order.map(|p| read_json::<Vec<String>>(&p)).transpose()?;
            let config = PreprocessConfig {
                window_bars: bars.parse()?,
                seed,
                validation_fraction,
                augment: !no_augment,
                circle_order,
                ..Default::default()
            };
            let (dataset, report) = build_dataset(&corpus, &metadata, &config)?;
            dataset.write(&out, Some(&report))?;
            info!(
                "{} of {} files accepted; {} train and {} validation segments written to {}",
                report.songs_accepted,
                report.files_found,
                report.train_segments,
                report.validation_segments,
                out.display()
            );
        }
        Command::Train { data, config, out, resume } => {
            let run = RunConfig::load(&config)?;
            let dataset = Dataset::load(&data)?;
            let mut trainer = match resume {
                Some(path) => Trainer32::resume(&Checkpoint::read(&path)?, Some(run.train.clone()))?,
                None => Trainer32::from_run_config(&run, dataset.vocabulary())?,
            };
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            std::fs::copy(&config, out.join("config.toml")).context("copying run config")?;
            let last = trainer.train(&dataset, &out)?;
            info!("finished at step {}; checkpoint {}", trainer.step(), last.display());
        }
        Command::Evaluate { checkpoint, data, report, interp_pairs, genres, split, seed } => {
            let ck = Checkpoint::read(&checkpoint)?;
            let model: Model32 = ck.load_model()?;
            let prior = checkpoint_prior(&ck, &model)?;
            let dataset = Dataset::load(&data)?;
            let options = EvalOptions {
                split: if split == "train" { Split::Train } else { Split::Validation },
                interp_pairs,
                genres: genres.map(|g| (g[0].clone(), g[1].clone())),
                seed,
                ..Default::default()
            };
            let result = evaluate(&model, &prior, &dataset, &options)?;
            for s in &result.skipped {
                log::warn!("skipped: {s}");
            }
            let files = write_report(&result, &report)?;
            info!("DBGS accuracy {:.4}; wrote {} files to {}", result.accuracy.dbgs, files.len(), report.display());
        }
        Command::Serve { checkpoint, data, port, host, cors_origin } => {
            let session = Session::load(&checkpoint, &data)?;
            let cors = musae_service::cors(cors_origin.as_deref()).map_err(anyhow::Error::msg)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(musae_service::serve(Arc::new(session), SocketAddr::new(host, port), cors))?;
        }
    }
    Ok(())
}

fn checkpoint_prior(ck: &Checkpoint, model: &Model32) -> Result<Prior> {
    match ck.meta.get("prior") {
        Some(v) => Ok(serde_json::from_value(v.clone()).context("checkpoint prior")?),
        None => Ok(Prior::Isotropic { latent_dim: model.latent_dim() }),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
