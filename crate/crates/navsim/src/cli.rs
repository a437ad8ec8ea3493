//! Command-line entry points.

use std::fs::{self, File};
use std::io::BufWriter;
use std::net::TcpListener;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use navsim_core::nn::{gradcheck, ModelParams, TrainConfig};
use navsim_core::trainer::Session;
use navsim_core::world::generate_map;
use navsim_core::SimConfig;

use crate::config::FileConfig;
use crate::error::Result;
use crate::formats::{dataset, image, map, model};
use crate::pipeline::{self, TrainOptions};
use crate::protocol::Handler;
use crate::report;
use crate::server::Server;
use crate::session::LogWriter;

#[derive(Debug, Parser)]
#[command(name = "navsim", version, about = "Imitation-learning navigation workbench")]
pub struct Cli {
    /// JSON config file; flags on the command line take precedence.
    #[arg(long, global = true, env = "NAVSIM_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the interactive session server.
    Serve(ServeArgs),
    /// Generate a map and write it as PGM or JSON.
    GenMap(GenMapArgs),
    /// Record scripted-expert demonstrations to an ILD1 dataset.
    RecordExpert(RecordArgs),
    /// Train a model on an ILD1 dataset.
    Train(TrainArgs),
    /// Evaluate a model on freshly generated maps.
    Eval(EvalArgs),
    /// Check analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub port: Option<u16>,
    /// Interface to bind (default 127.0.0.1).
    #[arg(long)]
    pub bind: Option<String>,
    #[arg(long)]
    pub map_seed: Option<u64>,
    /// Autonomous-mode tick rate (default 20).
    #[arg(long)]
    pub tick_hz: Option<f64>,
    /// Seed for initial weights and per-epoch shuffles.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Start from these weights instead of fresh ones.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Append the control log (NDJSON) to this file.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapFormat {
    Pgm,
    Json,
}

#[derive(Debug, Args)]
pub struct GenMapArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long, value_enum, default_value = "pgm")]
    pub format: MapFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecordArgs {
    /// Number of maps, one expert episode each (default 20).
    #[arg(long)]
    pub maps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of ticks on which a random action is executed in place of
    /// the expert's (default 0).
    #[arg(long)]
    pub perturb: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Continue from these weights; fresh ones are initialised otherwise.
    #[arg(long)]
    pub model_in: Option<PathBuf>,
    #[arg(long)]
    pub model_out: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_steps: Option<u32>,
    /// Write report.json here; the summary table always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub frames: usize,
    /// Coordinates sampled per parameter group and frame.
    #[arg(long, default_value_t = 8)]
    pub per_group: usize,
}

/// Outcome of a successful command invocation: `Ok(false)` means the
/// command ran but its check failed.
pub fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Serve(a) => serve(a, file),
        Command::GenMap(a) => gen_map(a, file),
        Command::RecordExpert(a) => record_expert(a, file),
        Command::Train(a) => train(a, file),
        Command::Eval(a) => eval(a, file),
        Command::Gradcheck(a) => Ok(gradcheck_cmd(a)),
    }
}

fn serve(a: ServeArgs, file: FileConfig) -> Result<bool> {
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let params = match &a.model {
        Some(path) => model::load(path)?,
        None => pipeline::initial_params(seed),
    };
    let defaults = TrainConfig::default();
    let train = TrainConfig {
        learning_rate: a.lr.or(file.lr).unwrap_or(defaults.learning_rate),
        batch_size: a.batch.or(file.batch).unwrap_or(defaults.batch_size),
        shuffle_seed: 0,
    };
    train.validate()?;
    let map_seed = a.map_seed.or(file.map_seed).unwrap_or(0);
    let session = Session::new(file.sim, train, params, map_seed, seed)?;
    let log = match a.log.or(file.log.map(PathBuf::from)) {
        Some(path) => Some(LogWriter::new(BufWriter::new(File::options().create(true).append(true).open(path)?))),
        None => None,
    };
    let bind = a.bind.or(file.bind).unwrap_or_else(|| "127.0.0.1".into());
    let port = a.port.or(file.port).unwrap_or(8765);
    let listener = TcpListener::bind((bind.as_str(), port))?;
    let server = Server::new(listener, Handler::new(session, log), a.tick_hz.or(file.tick_hz).unwrap_or(20.0));
    println!("listening on ws://{}", server.local_addr()?);
    server.run()?;
    Ok(true)
}

fn gen_map(a: GenMapArgs, file: FileConfig) -> Result<bool> {
    let mut world = file.sim.world;
    world.width = a.width.or(file.width).unwrap_or(world.width);
    world.height = a.height.or(file.height).unwrap_or(world.height);
    let m = generate_map(a.seed.or(file.seed).unwrap_or(0), &world)?;
    match a.format {
        MapFormat::Pgm => fs::write(&a.out, image::map_pgm(&m))?,
        MapFormat::Json => fs::write(&a.out, map::to_json(&m))?,
    }
    Ok(true)
}

fn record_expert(a: RecordArgs, file: FileConfig) -> Result<bool> {
    let maps = a.maps.or(file.maps).unwrap_or(20);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let perturb = a.perturb.or(file.perturb).unwrap_or(0.0);
    let rec = pipeline::record_expert(&file.sim, maps, seed, perturb)?;
    dataset::save(&rec.dataset, &a.out)?;
    let successes = rec.outcomes.iter().filter(|s| **s == navsim_core::world::Status::Success).count();
    let [f, l, r] = rec.dataset.action_counts();
    println!("{} samples from {maps} maps (expert reached the goal on {successes}); forward {f}, left {l}, right {r}", rec.dataset.len());
    Ok(true)
}

fn train(a: TrainArgs, file: FileConfig) -> Result<bool> {
    let defaults = TrainOptions::default();
    let opts = TrainOptions {
        epochs: a.epochs.or(file.epochs).unwrap_or(defaults.epochs),
        learning_rate: a.lr.or(file.lr).unwrap_or(defaults.learning_rate),
        batch_size: a.batch.or(file.batch).unwrap_or(defaults.batch_size),
        seed: a.seed.or(file.seed).unwrap_or(defaults.seed),
    };
    let data = dataset::load(&a.dataset)?;
    let mut params = match &a.model_in {
        Some(path) => model::load(path)?,
        None => pipeline::initial_params(opts.seed),
    };
    pipeline::train(&mut params, &data, &opts, |e, s| {
        println!("epoch {:>3}  loss {:.4}  accuracy {:.4}", e + 1, s.mean_loss, s.accuracy);
    })?;
    model::save(&params, &a.model_out)?;
    Ok(true)
}

fn eval(a: EvalArgs, file: FileConfig) -> Result<bool> {
    let mut sim: SimConfig = file.sim;
    if let Some(m) = a.max_steps.or(file.max_steps) {
        sim.world.max_steps = m;
    }
    let params: ModelParams = model::load(&a.model)?;
    let episodes = a.episodes.or(file.episodes).unwrap_or(20);
    let r = pipeline::evaluate(&params, episodes, a.seed.or(file.seed).unwrap_or(0), &sim)?;
    if let Some(out) = &a.out {
        report::write_json(&r, out)?;
    }
    let label = a.model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    print!("{}", report::text_table(&[(&label, &r)]));
    Ok(true)
}

fn gradcheck_cmd(a: GradcheckArgs) -> bool {
    let r = gradcheck::run(a.seed, a.frames, a.per_group);
    for g in &r.groups {
        println!("{:<18} {:>4} checked  {:>3} frozen  max rel err {:.3e}", g.group, g.checked, g.frozen_kinks, g.max_rel_error);
    }
    let ok = r.passed();
    println!("max relative error {:.3e} (tolerance {:.0e}): {}", r.max_rel_error(), gradcheck::TOLERANCE, if ok { "pass" } else { "FAIL" });
    ok
}
