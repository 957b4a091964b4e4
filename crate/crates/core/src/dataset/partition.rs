use std::fs;
use std::path::Path;

use crate::dataset::corpus::RawCorpus;
use crate::dataset::text::{corrupt, vectorize, Vocabulary, DEFAULT_MAX_LEN, DEFAULT_VOCAB_CAPACITY};
use crate::error::{Error, Result};
use crate::numkit::{dirichlet_sample, standardize_fit, streams, DenseMatrix, RngStream, Standardizer};

/// One client's private data.
#[derive(Debug, Clone, PartialEq)]
pub struct Shard {
    pub client_id: usize,
    /// Standardized features, `m_i × d`.
    pub x: DenseMatrix,
    /// Targets in {0, 1}.
    pub y: Vec<f64>,
    /// Row positions in the source corpus.
    pub source_rows: Vec<usize>,
    /// Which rows carry word-deletion noise.
    pub corrupted: Vec<bool>,
}

impl Shard {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn corrupted_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.corrupted.iter().filter(|&&c| c).count() as f64 / self.len() as f64
    }
}

/// The server's held-out data.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSet {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub source_rows: Vec<usize>,
}

impl ValidationSet {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub sample_fraction: f64,
    pub word_drop_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionConfig {
    pub n_clients: usize,
    pub alpha: f64,
    pub validation_size: usize,
    pub vocab_capacity: usize,
    pub max_len: usize,
    /// Applied to the training side only; the server's data stays clean.
    pub corruption: Option<CorruptionSpec>,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            n_clients: 50,
            alpha: 0.5,
            validation_size: 572,
            vocab_capacity: DEFAULT_VOCAB_CAPACITY,
            max_len: DEFAULT_MAX_LEN,
            corruption: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FederatedData {
    pub shards: Vec<Shard>,
    pub validation: ValidationSet,
    pub vocabulary: Vocabulary,
    pub standardizer: Standardizer,
    /// The Dirichlet proportions the shard sizes were drawn from.
    pub proportions: Vec<f64>,
}

impl FederatedData {
    pub fn n_features(&self) -> usize {
        self.validation.x.cols()
    }

    pub fn shard_sizes(&self) -> Vec<usize> {
        self.shards.iter().map(Shard::len).collect()
    }

    pub fn train_size(&self) -> usize {
        self.shards.iter().map(Shard::len).sum()
    }
}

/// Hold out a uniformly random validation set, optionally corrupt the
/// training side, featurize, standardize with training statistics, and
/// assign each training sample to a client by a categorical draw from a
/// Dirichlet(alpha) proportion vector.
///
/// Each phase draws from its own sub-stream of `rng`'s seed, so turning
/// corruption on or off leaves the split and the assignment unchanged.
pub fn split_and_partition(
    corpus: &RawCorpus,
    rng: &RngStream,
    cfg: &PartitionConfig,
) -> Result<FederatedData> {
    let m = corpus.len();
    if cfg.validation_size >= m {
        return Err(Error::invalid(format!(
            "validation size {} must be smaller than the corpus ({m})",
            cfg.validation_size
        )));
    }
    if cfg.n_clients == 0 {
        return Err(Error::invalid("need at least one client"));
    }
    if m - cfg.validation_size < 2 {
        return Err(Error::invalid("need at least two training samples"));
    }

    let mut split_rng = rng.substream(streams::VALIDATION_SPLIT);
    let mut val_rows = split_rng.sample_indices(m, cfg.validation_size)?;
    val_rows.sort_unstable();
    let mut is_val = vec![false; m];
    for &i in &val_rows {
        is_val[i] = true;
    }
    let train_rows: Vec<usize> = (0..m).filter(|&i| !is_val[i]).collect();

    let train_corpus = RawCorpus::new(train_rows.iter().map(|&i| corpus.records[i].clone()).collect());
    let (train_corpus, train_corrupted) = match cfg.corruption {
        Some(spec) => {
            let mut c_rng = rng.substream(streams::CORRUPTION);
            corrupt(&train_corpus, &mut c_rng, spec.sample_fraction, spec.word_drop_fraction)?
        }
        None => {
            let n = train_corpus.len();
            (train_corpus, vec![false; n])
        }
    };

    let vocabulary = Vocabulary::from_corpus(&train_corpus, cfg.vocab_capacity)?;
    let train_counts = vectorize(train_corpus.texts(), &vocabulary, cfg.max_len);
    let val_counts = vectorize(val_rows.iter().map(|&i| corpus.records[i].text.as_str()), &vocabulary, cfg.max_len);
    let standardizer = standardize_fit(&train_counts)?;
    let train_x = standardizer.transform(&train_counts)?;
    let val_x = standardizer.transform(&val_counts)?;

    let mut p_rng = rng.substream(streams::PARTITION);
    let proportions = dirichlet_sample(&mut p_rng, cfg.alpha, cfg.n_clients)?;
    let mut cumulative = Vec::with_capacity(proportions.len());
    let mut acc = 0.0;
    for &p in &proportions {
        acc += p;
        cumulative.push(acc);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); cfg.n_clients];
    for local in 0..train_rows.len() {
        let u = p_rng.next_f64() * acc;
        let client = cumulative
            .partition_point(|&c| c <= u)
            .min(cfg.n_clients - 1);
        members[client].push(local);
    }

    let shards = members
        .into_iter()
        .enumerate()
        .map(|(client_id, locals)| Shard {
            client_id,
            x: train_x.select_rows(&locals),
            y: locals.iter().map(|&l| corpus.records[train_rows[l]].label.target()).collect(),
            source_rows: locals.iter().map(|&l| train_rows[l]).collect(),
            corrupted: locals.iter().map(|&l| train_corrupted[l]).collect(),
        })
        .collect();

    Ok(FederatedData {
        shards,
        validation: ValidationSet {
            x: val_x,
            y: val_rows.iter().map(|&i| corpus.records[i].label.target()).collect(),
            source_rows: val_rows,
        },
        vocabulary,
        standardizer,
        proportions,
    })
}

/// One CSV per client: `client_<id>.csv`, header `label,f0,...,f<d-1>`.
pub fn write_shards(dir: &Path, shards: &[Shard]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for shard in shards {
        let path = dir.join(format!("client_{:04}.csv", shard.client_id));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)?;
        let mut header = vec!["label".to_string()];
        header.extend((0..shard.x.cols()).map(|j| format!("f{j}")));
        w.write_record(&header)?;
        for (row, &y) in shard.x.iter_rows().zip(&shard.y) {
            let mut rec = Vec::with_capacity(row.len() + 1);
            rec.push(format!("{}", y as u8));
            rec.extend(row.iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(())
}
