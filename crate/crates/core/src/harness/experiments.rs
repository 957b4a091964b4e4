//! Seeded experiment pipelines writing CSV under
//! `<output_dir>/<experiment>/<seed>/`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{debug, info};

use crate::baselines::{loo_contributions, loo_remove_and_retrain, LooReport};
use crate::dataset::{load_corpus, split_and_partition, synthetic_sms_corpus, FederatedData, PartitionConfig, RawCorpus};
use crate::error::{Error, Result};
use crate::federation::{removal_count, FedAvgRunner, GlobalModel, Removal};
use crate::harness::config::{ExperimentConfig, ExperimentKind};
use crate::harness::metrics::{mean, rank_auc, spearman};
use crate::models::MlpPolicy;
use crate::numkit::RngStream;
use crate::rcce::{
    retrain_with_removal, score_contributions, write_round_log, RcceConfig, RcceTrainer, SelectionRound,
};

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved";

/// Corpus named by the config, or the synthetic stand-in when no path is
/// given.
pub fn load_experiment_corpus(cfg: &ExperimentConfig) -> Result<RawCorpus> {
    match &cfg.data.path {
        Some(path) => load_corpus(path),
        None => Ok(synthetic_sms_corpus(cfg.data.synthetic_seed)),
    }
}

/// Split, featurize and partition for one seed.
pub fn prepare_data(cfg: &ExperimentConfig, corpus: &RawCorpus, seed: u64, n_clients: usize) -> Result<FederatedData> {
    let pcfg = PartitionConfig {
        n_clients,
        alpha: cfg.federation.alpha,
        validation_size: cfg.data.validation_size,
        vocab_capacity: cfg.data.vocab_size,
        max_len: cfg.data.max_len,
        corruption: cfg.corruption_spec(),
    };
    split_and_partition(corpus, &RngStream::new(seed, 0), &pcfg)
}

pub fn rcce_config(cfg: &ExperimentConfig) -> RcceConfig {
    RcceConfig {
        task_lr: cfg.federation.task_lr,
        evaluator_lr: cfg.rcce.evaluator_lr,
        window: cfg.rcce.window,
        reward_mode: cfg.rcce.reward_mode,
        hidden: cfg.rcce.hidden.clone(),
        force_omega: None,
        threads: cfg.federation.threads,
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_curves(path: &Path, names: &[&str], curves: &[&[f64]]) -> Result<()> {
    let mut header = vec!["round"];
    header.extend_from_slice(names);
    let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
    write_table(
        path,
        &header,
        (0..len).map(|t| {
            let mut row = vec![t.to_string()];
            row.extend(curves.iter().map(|c| c.get(t).map_or(String::new(), |&v| fmt(v))));
            row
        }),
    )
}

fn mean_curve(curves: &[&[f64]]) -> Vec<f64> {
    let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
    (0..len)
        .map(|t| curves.iter().map(|c| c[t]).sum::<f64>() / curves.len() as f64)
        .collect()
}

fn seed_dir(cfg: &ExperimentConfig, seed: u64) -> Result<PathBuf> {
    let dir = experiment_dir(cfg).join(seed.to_string());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn experiment_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.experiment.output_dir.join(cfg.experiment.name.as_str())
}

/// Co-train the task model and evaluator for `rounds`, logging each round.
fn train_rcce(cfg: &ExperimentConfig, data: &FederatedData, seed: u64, rounds: usize) -> Result<(RcceTrainer, Vec<SelectionRound>)> {
    let mut trainer = RcceTrainer::new(data.n_features(), seed, rcce_config(cfg))?;
    let mut log = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let r = trainer.run_round(&data.shards, &data.validation)?;
        debug!(
            "seed {seed} round {}: loss {:.5} acc {:.4} reward {:.3e} selected {}",
            r.round,
            r.val_loss,
            r.val_acc,
            r.reward,
            r.n_selected()
        );
        log.push(r);
    }
    Ok((trainer, log))
}

fn fedavg_curve(cfg: &ExperimentConfig, data: &FederatedData, rounds: usize) -> Result<Vec<f64>> {
    let mut runner = FedAvgRunner::new(GlobalModel::zeros(data.n_features()), cfg.federation.task_lr);
    runner.threads = cfg.federation.threads;
    runner.train_curve(&data.shards, &data.validation, rounds)
}

/// Which valuation produced a contribution report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rcce,
    Loo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rcce => "rcce",
            Method::Loo => "loo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContributionRow {
    pub client_id: usize,
    pub shard_size: usize,
    pub contribution: f64,
    pub corrupted_fraction: f64,
    pub corrupted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContributionReport {
    pub method: Method,
    pub rows: Vec<ContributionRow>,
}

impl ContributionReport {
    /// A client counts as corrupted when its share of corrupted samples
    /// exceeds the global corruption rate.
    pub fn new(method: Method, data: &FederatedData, values: &[f64], corruption_rate: f64) -> Result<Self> {
        if values.len() != data.shards.len() {
            return Err(Error::shape("contribution values", data.shards.len(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite contribution"));
        }
        let rows = data
            .shards
            .iter()
            .zip(values)
            .map(|(s, &v)| ContributionRow {
                client_id: s.client_id,
                shard_size: s.len(),
                contribution: v,
                corrupted_fraction: s.corrupted_fraction(),
                corrupted: corruption_rate > 0.0 && s.corrupted_fraction() > corruption_rate,
            })
            .collect();
        Ok(ContributionReport { method, rows })
    }

    pub fn contributions(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.contribution).collect()
    }

    pub fn size_correlation(&self) -> Option<f64> {
        let sizes: Vec<f64> = self.rows.iter().map(|r| r.shard_size as f64).collect();
        spearman(&sizes, &self.contributions())
    }

    /// AUC of contribution separating clean (positive) from corrupted clients.
    pub fn clean_auc(&self) -> Option<f64> {
        let clean: Vec<bool> = self.rows.iter().map(|r| !r.corrupted).collect();
        rank_auc(&self.contributions(), &clean)
    }

    /// Mean contribution over (corrupted, clean) clients.
    pub fn group_means(&self) -> (Option<f64>, Option<f64>) {
        let pick = |flag: bool| {
            let v: Vec<f64> = self.rows.iter().filter(|r| r.corrupted == flag).map(|r| r.contribution).collect();
            (!v.is_empty()).then(|| mean(&v))
        };
        (pick(true), pick(false))
    }

    /// Rows ordered by shard size, ties by client id.
    pub fn sorted_by_size(&self) -> Vec<&ContributionRow> {
        let mut rows: Vec<&ContributionRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| (r.shard_size, r.client_id));
        rows
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_table(
            path,
            &["client_id", "shard_size", "contribution", "corrupted_fraction", "corrupted", "method"],
            self.sorted_by_size().into_iter().map(|r| {
                vec![
                    r.client_id.to_string(),
                    r.shard_size.to_string(),
                    fmt(r.contribution),
                    fmt(r.corrupted_fraction),
                    (r.corrupted as u8).to_string(),
                    self.method.as_str().to_string(),
                ]
            }),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParitySeed {
    pub seed: u64,
    pub fedavg: Vec<f64>,
    pub rcce: Vec<f64>,
    /// Mean absolute accuracy difference over every recorded point.
    pub mean_abs_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrainSeed {
    pub seed: u64,
    pub baseline: Vec<f64>,
    pub rcce_highest: Vec<f64>,
    pub rcce_lowest: Vec<f64>,
    pub loo_highest: Vec<f64>,
    pub loo_lowest: Vec<f64>,
    pub removed: usize,
    pub rcce: ContributionReport,
    pub loo: LooReport,
}

impl RetrainSeed {
    pub fn final_gap(&self) -> f64 {
        self.rcce_lowest.last().unwrap() - self.rcce_highest.last().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContributionSeed {
    pub seed: u64,
    pub report: ContributionReport,
    pub spearman_size: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub seed: u64,
    pub n_clients: usize,
    pub rcce_rounds: usize,
    pub rcce_seconds: f64,
    pub rcce_final_acc: f64,
    pub loo_rounds: usize,
    pub loo_runs: usize,
    pub loo_seconds: f64,
    pub loo_full_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutcome {
    Parity(Vec<ParitySeed>),
    RemoveRetrain(Vec<RetrainSeed>),
    Corruption(Vec<RetrainSeed>),
    Scaling(Vec<ScalingRow>),
    Contribution(Vec<ContributionSeed>),
}

/// Write `config.resolved`, then run the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let dir = experiment_dir(cfg);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(RESOLVED_CONFIG_FILE), cfg.to_toml())?;
    let corpus = load_experiment_corpus(cfg)?;
    info!("{}: {} records, seeds {:?}", cfg.experiment.name, corpus.len(), cfg.experiment.seeds);
    match cfg.experiment.name {
        ExperimentKind::Scaling => exp_scaling(cfg, &corpus).map(ExperimentOutcome::Scaling),
        _ => with_threads(cfg.federation.threads, || match cfg.experiment.name {
            ExperimentKind::Parity => exp_parity(cfg, &corpus).map(ExperimentOutcome::Parity),
            ExperimentKind::RemoveRetrain => exp_remove_retrain(cfg, &corpus).map(ExperimentOutcome::RemoveRetrain),
            ExperimentKind::Corruption => exp_corruption(cfg, &corpus).map(ExperimentOutcome::Corruption),
            ExperimentKind::Contribution => exp_contribution(cfg, &corpus).map(ExperimentOutcome::Contribution),
            ExperimentKind::Scaling => unreachable!(),
        }),
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if threads <= 1 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?
        .install(f)
}

/// FedAvg and co-trained evaluator-selected training side by side.
pub fn exp_parity(cfg: &ExperimentConfig, corpus: &RawCorpus) -> Result<Vec<ParitySeed>> {
    let rounds = cfg.federation.rounds;
    let mut out = Vec::new();
    for &seed in &cfg.experiment.seeds {
        let data = prepare_data(cfg, corpus, seed, cfg.federation.n_clients)?;
        let fedavg = fedavg_curve(cfg, &data, rounds)?;
        let initial = fedavg[0];
        let (_, log) = train_rcce(cfg, &data, seed, rounds)?;
        let mut rcce = vec![initial];
        rcce.extend(log.iter().map(|r| r.val_acc));
        let mean_abs_gap = mean(&fedavg.iter().zip(&rcce).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>());
        info!("parity seed {seed}: mean |gap| {mean_abs_gap:.5}");

        let dir = seed_dir(cfg, seed)?;
        write_curves(&dir.join("parity.csv"), &["fedavg_acc", "rcce_acc"], &[&fedavg, &rcce])?;
        let mut f = fs::File::create(dir.join("rcce_rounds.csv"))?;
        write_round_log(&mut f, &log)?;
        out.push(ParitySeed {
            seed,
            fedavg,
            rcce,
            mean_abs_gap,
        });
    }
    let dir = experiment_dir(cfg);
    write_table(
        &dir.join("summary.csv"),
        &["seed", "mean_abs_gap", "fedavg_final_acc", "rcce_final_acc"],
        out.iter().map(|s| {
            vec![
                s.seed.to_string(),
                fmt(s.mean_abs_gap),
                fmt(*s.fedavg.last().unwrap()),
                fmt(*s.rcce.last().unwrap()),
            ]
        }),
    )?;
    let fed: Vec<&[f64]> = out.iter().map(|s| s.fedavg.as_slice()).collect();
    let rc: Vec<&[f64]> = out.iter().map(|s| s.rcce.as_slice()).collect();
    write_curves(&dir.join("mean_curves.csv"), &["fedavg_acc", "rcce_acc"], &[&mean_curve(&fed), &mean_curve(&rc)])?;
    Ok(out)
}

fn remove_retrain_seed(cfg: &ExperimentConfig, corpus: &RawCorpus, seed: u64) -> Result<(RetrainSeed, FederatedData)> {
    let data = prepare_data(cfg, corpus, seed, cfg.federation.n_clients)?;
    let dir = seed_dir(cfg, seed)?;
    let lr = cfg.federation.task_lr;
    let retrain = cfg.valuation.retrain_rounds;

    let (trainer, log) = train_rcce(cfg, &data, seed, cfg.federation.rounds)?;
    let mut f = fs::File::create(dir.join("rcce_rounds.csv"))?;
    write_round_log(&mut f, &log)?;
    trainer.checkpoint().save(&dir.join("evaluator.json"))?;
    let policy: &MlpPolicy = &trainer.policy;

    let theta0 = GlobalModel::zeros(data.n_features()).theta;
    let scores = score_contributions(policy, &theta0, &data.shards, cfg.valuation.score_rounds, lr)?;
    let rcce = ContributionReport::new(Method::Rcce, &data, &scores, cfg.corruption.sample_fraction)?;
    rcce.write_csv(&dir.join("contribution.csv"))?;

    let removed = removal_count(data.shards.len(), cfg.valuation.removal_rate);
    let baseline = fedavg_curve(cfg, &data, retrain)?;
    let rcce_highest =
        retrain_with_removal(policy, &theta0, &data.shards, &data.validation, retrain, removed, Removal::Highest, lr)?;
    let rcce_lowest =
        retrain_with_removal(policy, &theta0, &data.shards, &data.validation, retrain, removed, Removal::Lowest, lr)?;

    let loo = loo_contributions(&data.shards, &data.validation, cfg.valuation.loo_rounds, lr)?;
    let mut f = fs::File::create(dir.join("loo.csv"))?;
    loo.write_csv(&mut f)?;
    let rate = cfg.valuation.removal_rate;
    let loo_highest = loo_remove_and_retrain(&loo, &data.shards, &data.validation, rate, Removal::Highest, retrain, lr)?;
    let loo_lowest = loo_remove_and_retrain(&loo, &data.shards, &data.validation, rate, Removal::Lowest, retrain, lr)?;

    write_curves(
        &dir.join("retrain.csv"),
        &[
            "baseline",
            "rcce_remove_highest",
            "rcce_remove_lowest",
            "loo_remove_highest",
            "loo_remove_lowest",
        ],
        &[&baseline, &rcce_highest, &rcce_lowest, &loo_highest, &loo_lowest],
    )?;
    let seed_result = RetrainSeed {
        seed,
        baseline,
        rcce_highest,
        rcce_lowest,
        loo_highest,
        loo_lowest,
        removed,
        rcce,
        loo,
    };
    info!(
        "{} seed {seed}: remove-lowest minus remove-highest final accuracy {:.4}",
        cfg.experiment.name,
        seed_result.final_gap()
    );
    Ok((seed_result, data))
}

fn write_retrain_summary(cfg: &ExperimentConfig, seeds: &[RetrainSeed]) -> Result<()> {
    let dir = experiment_dir(cfg);
    let last = |c: &[f64]| fmt(*c.last().unwrap());
    write_table(
        &dir.join("summary.csv"),
        &[
            "seed",
            "removed",
            "baseline_final",
            "rcce_remove_highest_final",
            "rcce_remove_lowest_final",
            "loo_remove_highest_final",
            "loo_remove_lowest_final",
        ],
        seeds.iter().map(|s| {
            vec![
                s.seed.to_string(),
                s.removed.to_string(),
                last(&s.baseline),
                last(&s.rcce_highest),
                last(&s.rcce_lowest),
                last(&s.loo_highest),
                last(&s.loo_lowest),
            ]
        }),
    )?;
    let col = |f: fn(&RetrainSeed) -> &Vec<f64>| mean_curve(&seeds.iter().map(|s| f(s).as_slice()).collect::<Vec<_>>());
    write_curves(
        &dir.join("mean_curves.csv"),
        &[
            "baseline",
            "rcce_remove_highest",
            "rcce_remove_lowest",
            "loo_remove_highest",
            "loo_remove_lowest",
        ],
        &[
            &col(|s| &s.baseline),
            &col(|s| &s.rcce_highest),
            &col(|s| &s.rcce_lowest),
            &col(|s| &s.loo_highest),
            &col(|s| &s.loo_lowest),
        ],
    )
}

/// Train and freeze the evaluator, then retrain with the highest- or
/// lowest-valued clients removed, for both the evaluator and leave-one-out.
pub fn exp_remove_retrain(cfg: &ExperimentConfig, corpus: &RawCorpus) -> Result<Vec<RetrainSeed>> {
    let mut out = Vec::new();
    for &seed in &cfg.experiment.seeds {
        out.push(remove_retrain_seed(cfg, corpus, seed)?.0);
    }
    write_retrain_summary(cfg, &out)?;
    Ok(out)
}

/// The remove-and-retrain pipeline on a corrupted training side, plus how
/// well each valuation separates corrupted from clean clients.
pub fn exp_corruption(cfg: &ExperimentConfig, corpus: &RawCorpus) -> Result<Vec<RetrainSeed>> {
    let mut out = Vec::new();
    let mut disc = Vec::new();
    for &seed in &cfg.experiment.seeds {
        let (s, data) = remove_retrain_seed(cfg, corpus, seed)?;
        let loo_report = ContributionReport::new(Method::Loo, &data, &s.loo.values, cfg.corruption.sample_fraction)?;
        let dir = seed_dir(cfg, seed)?;
        write_table(
            &dir.join("discrimination.csv"),
            &["client_id", "shard_size", "corrupted_fraction", "corrupted", "rcce_contribution", "loo_value"],
            s.rcce.rows.iter().zip(&loo_report.rows).map(|(r, l)| {
                vec![
                    r.client_id.to_string(),
                    r.shard_size.to_string(),
                    fmt(r.corrupted_fraction),
                    (r.corrupted as u8).to_string(),
                    fmt(r.contribution),
                    fmt(l.contribution),
                ]
            }),
        )?;
        let (corrupt_mean, clean_mean) = s.rcce.group_means();
        disc.push(vec![
            seed.to_string(),
            s.rcce.rows.iter().filter(|r| r.corrupted).count().to_string(),
            corrupt_mean.map_or(String::new(), fmt),
            clean_mean.map_or(String::new(), fmt),
            s.rcce.clean_auc().map_or(String::new(), fmt),
            loo_report.clean_auc().map_or(String::new(), fmt),
        ]);
        out.push(s);
    }
    write_retrain_summary(cfg, &out)?;
    write_table(
        &experiment_dir(cfg).join("discrimination_summary.csv"),
        &[
            "seed",
            "corrupted_clients",
            "rcce_mean_corrupted",
            "rcce_mean_clean",
            "rcce_clean_auc",
            "loo_clean_auc",
        ],
        disc,
    )?;
    Ok(out)
}

/// Wall-clock of evaluator co-training and of leave-one-out as the number
/// of clients grows. Always serial.
pub fn exp_scaling(cfg: &ExperimentConfig, corpus: &RawCorpus) -> Result<Vec<ScalingRow>> {
    let mut serial = cfg.clone();
    serial.federation.threads = 1;
    let lr = cfg.federation.task_lr;
    let mut out = Vec::new();
    for &seed in &cfg.experiment.seeds {
        let mut rows = Vec::new();
        for &n in &cfg.scaling.client_counts {
            let data = prepare_data(&serial, corpus, seed, n)?;

            let start = Instant::now();
            let (trainer, _) = train_rcce(&serial, &data, seed, cfg.scaling.rcce_rounds)?;
            let rcce_seconds = start.elapsed().as_secs_f64();
            let rcce_final_acc = crate::federation::evaluate(&trainer.model.theta, &data.validation)?.1;

            let loo = loo_contributions(&data.shards, &data.validation, cfg.scaling.loo_rounds, lr)?;
            info!(
                "scaling seed {seed} N={n}: evaluator {rcce_seconds:.2}s for {} rounds, leave-one-out {:.2}s for {} runs",
                cfg.scaling.rcce_rounds, loo.seconds, loo.runs
            );
            rows.push(ScalingRow {
                seed,
                n_clients: n,
                rcce_rounds: cfg.scaling.rcce_rounds,
                rcce_seconds,
                rcce_final_acc,
                loo_rounds: cfg.scaling.loo_rounds,
                loo_runs: loo.runs,
                loo_seconds: loo.seconds,
                loo_full_acc: loo.full_accuracy,
            });
        }
        let dir = seed_dir(cfg, seed)?;
        // Accuracies and run counts are reproducible; seconds are not, so
        // they live in their own file.
        write_table(
            &dir.join("scaling.csv"),
            &["n_clients", "rcce_rounds", "rcce_final_acc", "loo_rounds", "loo_runs", "loo_full_acc"],
            rows.iter().map(|r| {
                vec![
                    r.n_clients.to_string(),
                    r.rcce_rounds.to_string(),
                    fmt(r.rcce_final_acc),
                    r.loo_rounds.to_string(),
                    r.loo_runs.to_string(),
                    fmt(r.loo_full_acc),
                ]
            }),
        )?;
        write_table(
            &dir.join("timing.csv"),
            &["n_clients", "rcce_seconds", "loo_seconds"],
            rows.iter()
                .map(|r| vec![r.n_clients.to_string(), fmt(r.rcce_seconds), fmt(r.loo_seconds)]),
        )?;
        out.extend(rows);
    }
    Ok(out)
}

/// Score every client with a trained, frozen evaluator.
pub fn exp_contribution(cfg: &ExperimentConfig, corpus: &RawCorpus) -> Result<Vec<ContributionSeed>> {
    let mut out = Vec::new();
    for &seed in &cfg.experiment.seeds {
        let data = prepare_data(cfg, corpus, seed, cfg.federation.n_clients)?;
        let (trainer, log) = train_rcce(cfg, &data, seed, cfg.federation.rounds)?;
        let dir = seed_dir(cfg, seed)?;
        let mut f = fs::File::create(dir.join("rcce_rounds.csv"))?;
        write_round_log(&mut f, &log)?;
        let theta0 = GlobalModel::zeros(data.n_features()).theta;
        let scores = score_contributions(
            &trainer.policy,
            &theta0,
            &data.shards,
            cfg.valuation.score_rounds,
            cfg.federation.task_lr,
        )?;
        let report = ContributionReport::new(Method::Rcce, &data, &scores, cfg.corruption.sample_fraction)?;
        report.write_csv(&dir.join("contribution.csv"))?;
        let spearman_size = report.size_correlation();
        info!("contribution seed {seed}: Spearman(size, contribution) {spearman_size:?}");
        out.push(ContributionSeed {
            seed,
            report,
            spearman_size,
        });
    }
    write_table(
        &experiment_dir(cfg).join("summary.csv"),
        &["seed", "spearman_size_contribution"],
        out.iter()
            .map(|s| vec![s.seed.to_string(), s.spearman_size.map_or(String::new(), fmt)]),
    )?;
    Ok(out)
}
