//! Corpus ingestion, bag-of-words featurization, word-deletion noise and
//! the non-IID client partition.

pub mod corpus;
pub mod partition;
pub mod synthetic;
pub mod text;

pub use corpus::{load_corpus, Label, RawCorpus, Record};
pub use partition::{
    split_and_partition, write_shards, CorruptionSpec, FederatedData, PartitionConfig, Shard,
    ValidationSet,
};
pub use synthetic::{synthetic_corpus, synthetic_sms_corpus};
pub use text::{corrupt, tokenize, vectorize, Vocabulary, DEFAULT_MAX_LEN, DEFAULT_VOCAB_CAPACITY};
