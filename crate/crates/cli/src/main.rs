//! `fedval`: run the federated valuation experiments and their unit
//! pipelines from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use fedval_core::dataset::write_shards;
use fedval_core::federation::GlobalModel;
use fedval_core::harness::{
    load_experiment_corpus, prepare_data, rcce_config, run_experiment, ContributionReport, ExperimentConfig,
    ExperimentKind, Method, Overrides, Profile,
};
use fedval_core::models::Checkpoint;
use fedval_core::rcce::{score_contributions, write_round_log, RcceTrainer, RewardMode};
use fedval_core::Error;

const DATA_ENV: &str = "FEDVAL_DATA";

#[derive(Parser, Debug)]
#[command(name = "fedval", version, about = "Federated client valuation: evaluator-based selection vs leave-one-out")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// FedAvg and evaluator-selected training curves side by side
    Parity(RunArgs),
    /// Remove the highest/lowest valued clients and retrain
    RemoveRetrain(RunArgs),
    /// Remove-and-retrain on a corrupted corpus, plus discrimination scores
    Corruption(RunArgs),
    /// Wall-clock of evaluator training and leave-one-out against client count
    Scaling(RunArgs),
    /// Score every client with a trained, frozen evaluator
    Contribution(RunArgs),
    /// Split and partition the corpus and write one CSV per client
    Partition(RunArgs),
    /// Co-train task model and evaluator, write a checkpoint and round log
    Train(RunArgs),
    /// Score clients with the evaluator stored in a checkpoint
    Score(ScoreArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Config file (`key = value` lines under [experiment], [data],
    /// [federation], [corruption], [rcce], [valuation], [scaling])
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Default set: paper (full-length runs) or desk (minutes-scale)
    #[arg(long, value_parser = parse_profile)]
    profile: Option<Profile>,
    /// Run a single seed [paper profile: seeds 1..5]
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Comma-separated seeds
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output root; results go to <out>/<experiment>/<seed>/ [default: results]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Tab-separated label/text corpus; falls back to $FEDVAL_DATA, then to
    /// the built-in synthetic corpus
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    /// Seed of the built-in synthetic corpus [default: 0]
    #[arg(long)]
    synthetic_seed: Option<u64>,
    /// Number of clients [paper profile: 50]
    #[arg(long)]
    clients: Option<usize>,
    /// Dirichlet concentration of shard sizes [paper profile: 0.5]
    #[arg(long)]
    alpha: Option<f64>,
    /// Communication rounds [paper profile: 1000]
    #[arg(long)]
    rounds: Option<usize>,
    /// Task model learning rate [paper profile: 0.1]
    #[arg(long)]
    task_lr: Option<f64>,
    /// Evaluator Adam learning rate [paper profile: 1e-5]
    #[arg(long)]
    evaluator_lr: Option<f64>,
    /// Moving-average window of the reward baseline [default: 20]
    #[arg(long)]
    window: Option<u32>,
    /// flipped (reward = baseline - loss) or literal (loss - baseline) [default: flipped]
    #[arg(long, value_parser = parse_reward_mode)]
    reward_mode: Option<RewardMode>,
    /// Worker threads for client updates; timing runs always use 1 [default: 1]
    #[arg(long)]
    threads: Option<usize>,
    /// Share of training samples that lose words [paper profile: 0.2 for corruption, else 0]
    #[arg(long)]
    corrupt_samples: Option<f64>,
    /// Share of words dropped per corrupted sample [paper profile: 0.2 for corruption, else 0]
    #[arg(long)]
    corrupt_words: Option<f64>,
    /// Share of clients removed in remove-and-retrain [paper profile: 0.3]
    #[arg(long)]
    removal_rate: Option<f64>,
    /// Rounds a frozen evaluator scores clients for [paper profile: 50]
    #[arg(long)]
    score_rounds: Option<usize>,
    /// Rounds per leave-one-out training run [paper profile: 50]
    #[arg(long)]
    loo_rounds: Option<usize>,
    /// Rounds of each remove-and-retrain curve [default: same as --rounds]
    #[arg(long)]
    retrain_rounds: Option<usize>,
    /// Comma-separated client counts for scaling [paper profile: 100,200,300,400,500]
    #[arg(long, value_delimiter = ',')]
    client_counts: Option<Vec<usize>>,
    /// Evaluator rounds per scaling point [paper profile: 1000]
    #[arg(long)]
    scaling_rcce_rounds: Option<usize>,
    /// Leave-one-out rounds per run at each scaling point [paper profile: 50]
    #[arg(long)]
    scaling_loo_rounds: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ScoreArgs {
    /// Checkpoint written by `fedval train`
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_reward_mode(s: &str) -> Result<RewardMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            profile: self.profile,
            seeds: self.seed.map(|s| vec![s]).or_else(|| self.seeds.clone()),
            output_dir: self.out.clone(),
            data_path: self.data.clone(),
            synthetic_seed: self.synthetic_seed,
            n_clients: self.clients,
            alpha: self.alpha,
            task_lr: self.task_lr,
            rounds: self.rounds,
            threads: self.threads,
            corrupt_samples: self.corrupt_samples,
            corrupt_words: self.corrupt_words,
            evaluator_lr: self.evaluator_lr,
            window: self.window,
            reward_mode: self.reward_mode,
            removal_rate: self.removal_rate,
            score_rounds: self.score_rounds,
            loo_rounds: self.loo_rounds,
            retrain_rounds: self.retrain_rounds,
            client_counts: self.client_counts.clone(),
            scaling_rcce_rounds: self.scaling_rcce_rounds,
            scaling_loo_rounds: self.scaling_loo_rounds,
        }
    }

    /// Defaults < config file < flags; `$FEDVAL_DATA` fills the dataset
    /// path only if neither the file nor a flag set one.
    fn resolve(&self, kind: Option<ExperimentKind>) -> fedval_core::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::resolve(kind, self.config.as_deref(), &self.overrides())?;
        if cfg.data.path.is_none() {
            if let Some(path) = std::env::var_os(DATA_ENV).filter(|p| !p.is_empty()) {
                cfg.data.path = Some(PathBuf::from(path));
            }
        }
        println!("# resolved configuration\n{}", cfg.to_toml());
        Ok(cfg)
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 3,
        Error::DatasetMissing(_) => 4,
        Error::Parse { .. } => 5,
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => 6,
        Error::Checkpoint(_) => 7,
        Error::Io(_) | Error::Csv(_) => 8,
    }
}

fn first_seed(cfg: &ExperimentConfig) -> u64 {
    cfg.experiment.seeds[0]
}

fn partition(cfg: &ExperimentConfig) -> fedval_core::Result<()> {
    let corpus = load_experiment_corpus(cfg)?;
    for &seed in &cfg.experiment.seeds {
        let data = prepare_data(cfg, &corpus, seed, cfg.federation.n_clients)?;
        let dir = cfg.experiment.output_dir.join("partition").join(seed.to_string());
        write_shards(&dir.join("clients"), &data.shards)?;
        let mut summary = String::from("client_id,shard_size,corrupted_fraction\n");
        for s in &data.shards {
            summary.push_str(&format!("{},{},{}\n", s.client_id, s.len(), s.corrupted_fraction()));
        }
        fs::write(dir.join("shards.csv"), summary)?;
        info!("seed {seed}: {} clients, {} training samples", data.shards.len(), data.train_size());
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn train(cfg: &ExperimentConfig) -> fedval_core::Result<()> {
    let corpus = load_experiment_corpus(cfg)?;
    let seed = first_seed(cfg);
    let data = prepare_data(cfg, &corpus, seed, cfg.federation.n_clients)?;
    let mut trainer = RcceTrainer::new(data.n_features(), seed, rcce_config(cfg))?;
    let mut log = Vec::with_capacity(cfg.federation.rounds);
    for _ in 0..cfg.federation.rounds {
        let r = trainer.run_round(&data.shards, &data.validation)?;
        info!(
            "round {}: loss {:.5} acc {:.4} reward {:.3e} selected {}",
            r.round,
            r.val_loss,
            r.val_acc,
            r.reward,
            r.n_selected()
        );
        log.push(r);
    }
    let dir = cfg.experiment.output_dir.join("train").join(seed.to_string());
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.resolved"), cfg.to_toml())?;
    let mut f = fs::File::create(dir.join("rcce_rounds.csv"))?;
    write_round_log(&mut f, &log)?;
    trainer.checkpoint().save(&dir.join("checkpoint.json"))?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn score(cfg: &ExperimentConfig, checkpoint: &Path) -> fedval_core::Result<()> {
    if !checkpoint.is_file() {
        return Err(Error::Checkpoint(format!("no checkpoint at {}", checkpoint.display())));
    }
    let ck = Checkpoint::load(checkpoint)?;
    let corpus = load_experiment_corpus(cfg)?;
    let seed = first_seed(cfg);
    let data = prepare_data(cfg, &corpus, seed, cfg.federation.n_clients)?;
    if ck.policy.input_dim() != data.n_features() + 1 {
        return Err(Error::Checkpoint(format!(
            "evaluator expects {} inputs but the data has {} parameters",
            ck.policy.input_dim(),
            data.n_features() + 1
        )));
    }
    let theta0 = GlobalModel::zeros(data.n_features()).theta;
    let scores = score_contributions(
        &ck.policy,
        &theta0,
        &data.shards,
        cfg.valuation.score_rounds,
        cfg.federation.task_lr,
    )?;
    let report = ContributionReport::new(Method::Rcce, &data, &scores, cfg.corruption.sample_fraction)?;
    let dir = cfg.experiment.output_dir.join("score").join(seed.to_string());
    fs::create_dir_all(&dir)?;
    report.write_csv(&dir.join("contribution.csv"))?;
    println!("wrote {}", dir.join("contribution.csv").display());
    Ok(())
}

fn dispatch(cli: Cli) -> fedval_core::Result<()> {
    let experiment = |args: &RunArgs, kind| -> fedval_core::Result<()> {
        let cfg = args.resolve(Some(kind))?;
        run_experiment(&cfg)?;
        println!("wrote {}", cfg.experiment.output_dir.join(kind.as_str()).display());
        Ok(())
    };
    match &cli.command {
        Command::Parity(a) => experiment(a, ExperimentKind::Parity),
        Command::RemoveRetrain(a) => experiment(a, ExperimentKind::RemoveRetrain),
        Command::Corruption(a) => experiment(a, ExperimentKind::Corruption),
        Command::Scaling(a) => experiment(a, ExperimentKind::Scaling),
        Command::Contribution(a) => experiment(a, ExperimentKind::Contribution),
        Command::Partition(a) => partition(&a.resolve(None)?),
        Command::Train(a) => train(&a.resolve(None)?),
        Command::Score(a) => score(&a.run.resolve(None)?, &a.checkpoint),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let category = err.category();
            let message = err.to_string().replace('\n', " ");
            let message = message.strip_prefix(&format!("{category}: ")).unwrap_or(&message);
            eprintln!("error: {category}: {message}");
            ExitCode::from(exit_code(&err))
        }
    }
}
