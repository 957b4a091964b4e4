use std::collections::HashMap;

use crate::dataset::corpus::{RawCorpus, Record};
use crate::error::{Error, Result};
use crate::numkit::{DenseMatrix, RngStream};

pub const DEFAULT_VOCAB_CAPACITY: usize = 1000;
pub const DEFAULT_MAX_LEN: usize = 150;

/// Lowercase, split on every run of non-alphanumeric characters.
/// Underscore counts as a separator.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Token → column map, ranked by corpus frequency with lexicographic
/// tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    capacity: usize,
}

impl Vocabulary {
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a str>, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("vocabulary capacity must be >= 1"));
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut n_docs = 0usize;
        for doc in docs {
            n_docs += 1;
            for tok in tokenize(doc) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        if n_docs == 0 {
            return Err(Error::invalid("cannot build a vocabulary from an empty corpus"));
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(capacity);
        let tokens: Vec<String> = ranked.into_iter().map(|(t, _)| t).collect();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            tokens,
            index,
            capacity,
        })
    }

    pub fn from_corpus(corpus: &RawCorpus, capacity: usize) -> Result<Self> {
        Self::build(corpus.texts(), capacity)
    }

    /// Number of columns a vectorized document has (at most `capacity`).
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Bag-of-words counts over `vocab`, using only the first `max_len` tokens
/// of each document. Out-of-vocabulary tokens are ignored.
pub fn vectorize<'a>(
    docs: impl IntoIterator<Item = &'a str>,
    vocab: &Vocabulary,
    max_len: usize,
) -> DenseMatrix {
    let cols = vocab.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for doc in docs {
        let start = data.len();
        data.resize(start + cols, 0.0);
        for tok in tokenize(doc).iter().take(max_len) {
            if let Some(j) = vocab.index_of(tok) {
                data[start + j] += 1.0;
            }
        }
        rows += 1;
    }
    DenseMatrix::from_vec(rows, cols, data).expect("counts are finite and shaped")
}

/// Word-deletion noise: a uniformly chosen `round(sample_fraction * m)`
/// documents each lose `floor(word_drop_fraction * len)` uniformly chosen
/// tokens; survivors are re-joined with single spaces. Returns the noisy
/// corpus and a per-document corrupted flag.
pub fn corrupt(
    corpus: &RawCorpus,
    rng: &mut RngStream,
    sample_fraction: f64,
    word_drop_fraction: f64,
) -> Result<(RawCorpus, Vec<bool>)> {
    for (name, f) in [("sample_fraction", sample_fraction), ("word_drop_fraction", word_drop_fraction)] {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::invalid(format!("{name} {f} outside [0, 1]")));
        }
    }
    let m = corpus.len();
    let n_corrupt = (sample_fraction * m as f64).round() as usize;
    let mut chosen = rng.sample_indices(m, n_corrupt.min(m))?;
    chosen.sort_unstable();

    let mut flags = vec![false; m];
    let mut records = corpus.records.clone();
    for i in chosen {
        flags[i] = true;
        let tokens = tokenize(&records[i].text);
        // Small slack so that e.g. 0.2 * 10 cannot floor to 1.
        let n_drop = (word_drop_fraction * tokens.len() as f64 + 1e-9).floor() as usize;
        if n_drop == 0 {
            continue;
        }
        let drop = rng.sample_indices(tokens.len(), n_drop)?;
        let mut keep = vec![true; tokens.len()];
        for d in drop {
            keep[d] = false;
        }
        let text = tokens
            .into_iter()
            .zip(keep)
            .filter_map(|(t, k)| k.then_some(t))
            .collect::<Vec<_>>()
            .join(" ");
        records[i] = Record {
            label: records[i].label,
            text,
        };
    }
    Ok((RawCorpus::new(records), flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::corpus::Label;

    fn corpus(docs: &[&str]) -> RawCorpus {
        RawCorpus::new(
            docs.iter()
                .map(|t| Record {
                    label: Label::Ham,
                    text: t.to_string(),
                })
                .collect(),
        )
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Free entry!! Win WIN"), ["free", "entry", "win", "win"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a-b_c"), ["a", "b", "c"]);
        assert_eq!(tokenize("  £1000 cash..."), ["1000", "cash"]);
    }

    #[test]
    fn vocabulary_ranks_by_frequency() {
        let v = Vocabulary::build(["a a b", "b c", "a"], 2).unwrap();
        assert_eq!(v.tokens(), ["a", "b"]);
        assert_eq!(v.index_of("a"), Some(0));
        assert_eq!(v.index_of("c"), None);
    }

    #[test]
    fn vocabulary_ties_are_lexicographic() {
        let v = Vocabulary::build(["y x"], 1).unwrap();
        assert_eq!(v.tokens(), ["x"]);
    }

    #[test]
    fn vocabulary_takes_everything_when_large() {
        let v = Vocabulary::build(["a b c", "d"], 1000).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v.capacity(), 1000);
    }

    #[test]
    fn vocabulary_errors() {
        assert!(Vocabulary::build(Vec::<&str>::new(), 10).is_err());
        assert!(Vocabulary::build(["a"], 0).is_err());
    }

    #[test]
    fn vectorize_counts() {
        let v = Vocabulary::build(["a a b"], 10).unwrap();
        let x = vectorize(["a a b", "zzz qqq", ""], &v, DEFAULT_MAX_LEN);
        assert_eq!(x.row(0), [2.0, 1.0]);
        assert_eq!(x.row(1), [0.0, 0.0]);
        assert_eq!(x.row(2), [0.0, 0.0]);
    }

    #[test]
    fn vectorize_truncates() {
        let v = Vocabulary::build(["a b"], 10).unwrap();
        let x = vectorize(["a a a b b"], &v, 3);
        assert_eq!(x.row(0), [3.0, 0.0]);
    }

    #[test]
    fn corrupt_drops_twenty_percent() {
        let c = corpus(&["one two three four five six seven eight nine ten"]);
        let mut rng = RngStream::new(1, 0);
        let (noisy, flags) = corrupt(&c, &mut rng, 1.0, 0.2).unwrap();
        assert_eq!(flags, [true]);
        assert_eq!(tokenize(&noisy.records[0].text).len(), 8);
    }

    #[test]
    fn corrupt_zero_fraction_is_identity() {
        let c = corpus(&["a b c", "d e"]);
        let mut rng = RngStream::new(1, 0);
        let (noisy, flags) = corrupt(&c, &mut rng, 0.0, 0.2).unwrap();
        assert_eq!(noisy, c);
        assert_eq!(flags, [false, false]);
    }

    #[test]
    fn corrupt_single_token_is_untouched() {
        let c = corpus(&["Hello!"]);
        let mut rng = RngStream::new(1, 0);
        let (noisy, flags) = corrupt(&c, &mut rng, 1.0, 0.2).unwrap();
        assert_eq!(flags, [true]);
        assert_eq!(noisy.records[0].text, "Hello!");
    }

    #[test]
    fn corrupt_rejects_bad_fractions() {
        let c = corpus(&["a"]);
        let mut rng = RngStream::new(1, 0);
        assert!(corrupt(&c, &mut rng, 1.5, 0.2).is_err());
        assert!(corrupt(&c, &mut rng, 0.5, -0.2).is_err());
    }
}
