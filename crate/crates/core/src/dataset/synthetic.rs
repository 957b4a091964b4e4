//! Seeded stand-in for the SMS Spam collection.
//!
//! Produces the same record count and class balance as the UCI file
//! (5572 messages, 747 spam) with SMS-like length distributions, a shared
//! function-word layer, class-specific Zipfian word pools and a long tail of
//! rare tokens, so the vocabulary cut at 1000 words is meaningful. A share of
//! messages borrow words from the other class, which keeps a linear model
//! short of perfect accuracy.

use crate::dataset::corpus::{Label, RawCorpus, Record};
use crate::numkit::{streams, RngStream};

pub const SMS_SPAM_RECORDS: usize = 5572;
pub const SMS_SPAM_SPAM_COUNT: usize = 747;

const SHARED: &[&str] = &[
    "the", "to", "you", "a", "i", "and", "is", "in", "it", "of", "for", "me", "my", "your", "on",
    "have", "that", "are", "be", "now", "can", "at", "so", "will", "not", "with", "but", "or",
    "get", "just", "we", "this", "if", "all", "no", "what", "up", "out", "do", "how", "from",
    "when", "an", "only", "by", "our", "new", "one", "day", "time", "back", "today", "u", "ur",
    "there", "was", "then", "need", "here", "any", "more", "go", "know", "see", "see", "am",
];

const HAM: &[&str] = &[
    "ok", "lor", "da", "later", "going", "come", "home", "sorry", "love", "good", "got", "like",
    "think", "dont", "im", "still", "tell", "want", "oh", "tomorrow", "night", "feel", "hi",
    "hope", "yeah", "ya", "sure", "work", "wait", "thing", "much", "lol", "miss", "meet", "late",
    "leave", "happy", "morning", "hey", "said", "sleep", "thk", "pick", "anything", "babe",
    "already", "buy", "cos", "told", "something", "nice", "coming", "nothing", "finish", "class",
    "people", "life", "care", "way", "yes", "let", "reach", "lunch", "dinner", "ask", "mum",
    "dad", "friends", "room", "house", "car", "bus", "watching", "film", "movie", "eat", "food",
    "bed", "tonight", "soon", "gonna", "wan", "haha", "hmm", "k", "alright", "okay", "thanks",
    "thank", "dear", "sweet", "heart", "smile", "friend", "guess", "never", "always", "sure",
    "though", "really", "well", "also", "did", "doing", "done", "went", "say", "oso", "nah",
    "lar", "wat", "abt", "pls", "plz", "gud", "nite", "tmr", "juz", "dun", "wif", "wen", "hav",
    "lazy", "tired", "shower", "sleeping", "office", "school", "exam", "study", "lecture",
    "walk", "drive", "shop", "shopping", "birthday", "party", "cake", "coffee", "tea", "pub",
    "beer", "game", "play", "busy", "free", "message", "phone", "call", "text", "sms", "pain",
    "sick", "doctor", "better", "hungry", "plan", "weekend", "sat", "sun", "mon", "fri", "ll",
    "ve", "re", "d", "m", "s", "t", "uncle", "aunty", "bro", "sis", "hubby", "wife", "kiss",
    "hug", "dream", "sad", "angry", "bored", "enjoy", "fine", "great", "oops", "forgot",
    "remember", "money", "pay", "bank", "rent", "card", "train", "station", "airport", "flight",
];

const SPAM: &[&str] = &[
    "free", "call", "txt", "claim", "prize", "won", "win", "cash", "mobile", "stop", "reply",
    "urgent", "service", "awarded", "guaranteed", "customer", "nokia", "tone", "ringtone",
    "offer", "weekly", "collect", "draw", "entry", "valid", "code", "landline", "box", "po",
    "apply", "video", "camera", "chat", "msg", "rate", "min", "per", "week", "account",
    "contact", "selected", "holiday", "tickets", "chance", "award", "bonus", "unsubscribe",
    "optout", "live", "dating", "luxury", "voucher", "network", "latest", "uk", "150p", "1000",
    "2000", "500", "100", "250", "expires", "identifier", "statement", "points", "unredeemed",
    "winner", "congratulations", "orange", "vodafone", "credit", "line", "texts", "send", "sms",
    "cost", "std", "rates", "t", "c", "cs", "apply", "18", "16", "gbp", "club", "mins", "phones",
    "camcorder", "upgrade", "delivery", "order", "sexy", "singles", "xxx", "pic", "polyphonic",
    "music", "download", "subscription", "subscriber", "auction", "shopping", "lottery",
    "national", "sae", "operator", "help", "info", "www", "com", "co", "net", "dial", "quiz",
    "answer", "question", "final", "attempt", "todays", "reveal", "secret", "admirer", "hot",
    "games", "logo", "pics", "plus", "ltd", "mob", "ntt", "bt", "ppm", "freemsg", "txts",
];

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ra", "tu", "ne", "zo", "pi", "sha", "ven", "dor", "lin", "mar", "tek",
    "bu", "fi", "gra", "jo", "que", "ri", "sol", "ta", "vi", "wex", "yo", "zan", "el", "an",
];

/// Sampler over a word pool with Zipf-like rank weights `1 / (rank + 1)^s`.
struct Zipf<'a> {
    words: Vec<&'a str>,
    cumulative: Vec<f64>,
}

impl<'a> Zipf<'a> {
    fn new(words: Vec<&'a str>, exponent: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = (0..words.len())
            .map(|r| {
                acc += 1.0 / ((r + 1) as f64).powf(exponent);
                acc
            })
            .collect();
        Zipf { words, cumulative }
    }

    fn draw(&self, rng: &mut RngStream) -> &'a str {
        let total = *self.cumulative.last().expect("non-empty pool");
        let u = rng.next_f64() * total;
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.words.len() - 1);
        self.words[k]
    }
}

fn gamma_length(rng: &mut RngStream, shape: f64, scale: f64, lo: usize, hi: usize) -> usize {
    let g = rng.gamma(shape).expect("positive shape") * scale;
    (g.round() as usize).clamp(lo, hi)
}

/// Generate the stand-in corpus. The same seed always yields the same text.
pub fn synthetic_sms_corpus(seed: u64) -> RawCorpus {
    synthetic_corpus(seed, SMS_SPAM_RECORDS, SMS_SPAM_SPAM_COUNT)
}

pub fn synthetic_corpus(seed: u64, n_records: usize, n_spam: usize) -> RawCorpus {
    let mut rng = RngStream::new(seed, streams::SYNTHETIC_CORPUS);

    let mut tail_storage: Vec<String> = Vec::with_capacity(4000);
    while tail_storage.len() < 4000 {
        let parts = 2 + rng.below(2) as usize;
        let w: String = (0..parts)
            .map(|_| SYLLABLES[rng.below(SYLLABLES.len() as u64) as usize])
            .collect();
        tail_storage.push(w);
    }
    let shared = Zipf::new(SHARED.to_vec(), 0.8);
    let ham = Zipf::new(HAM.to_vec(), 0.9);
    let spam = Zipf::new(SPAM.to_vec(), 0.8);
    let tail = Zipf::new(tail_storage.iter().map(String::as_str).collect(), 1.05);

    let n_spam = n_spam.min(n_records);
    let mut is_spam = vec![false; n_records];
    for i in rng.sample_indices(n_records, n_spam).expect("n_spam <= n_records") {
        is_spam[i] = true;
    }

    let records = is_spam
        .into_iter()
        .map(|spam_msg| {
            let (label, words) = if spam_msg {
                let len = gamma_length(&mut rng, 6.0, 4.0, 4, 60);
                // A fifth of spam is low-signal: mostly ordinary words.
                let spam_share = if rng.next_f64() < 0.2 { 0.12 } else { 0.45 };
                let words: Vec<String> = (0..len)
                    .map(|_| {
                        let u = rng.next_f64();
                        if u < spam_share {
                            spam.draw(&mut rng).to_string()
                        } else if u < spam_share + 0.30 {
                            shared.draw(&mut rng).to_string()
                        } else if u < 0.85 {
                            if rng.next_f64() < 0.5 {
                                format!("0{}", 8_000_000_000u64 + rng.below(999_999_999))
                            } else {
                                tail.draw(&mut rng).to_string()
                            }
                        } else {
                            ham.draw(&mut rng).to_string()
                        }
                    })
                    .collect();
                (Label::Spam, words)
            } else {
                let len = if rng.next_f64() < 0.02 {
                    60 + rng.below(140) as usize
                } else {
                    gamma_length(&mut rng, 1.6, 8.0, 1, 80)
                };
                // A few ham messages read like promotions.
                let spam_share = if rng.next_f64() < 0.04 { 0.25 } else { 0.01 };
                let words: Vec<String> = (0..len)
                    .map(|_| {
                        let u = rng.next_f64();
                        if u < spam_share {
                            spam.draw(&mut rng).to_string()
                        } else if u < spam_share + 0.40 {
                            shared.draw(&mut rng).to_string()
                        } else if u < 0.92 {
                            ham.draw(&mut rng).to_string()
                        } else {
                            tail.draw(&mut rng).to_string()
                        }
                    })
                    .collect();
                (Label::Ham, words)
            };
            Record {
                label,
                text: render(&mut rng, &words, label),
            }
        })
        .collect();
    RawCorpus::new(records)
}

/// Surface noise that the tokenizer strips: casing and punctuation.
fn render(rng: &mut RngStream, words: &[String], label: Label) -> String {
    let mut out = String::new();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let u = rng.next_f64();
        if label == Label::Spam && u < 0.25 {
            out.push_str(&w.to_uppercase());
        } else if i == 0 || u < 0.05 {
            let mut cs = w.chars();
            if let Some(first) = cs.next() {
                out.extend(first.to_uppercase());
                out.push_str(cs.as_str());
            }
        } else {
            out.push_str(w);
        }
        let p = rng.next_f64();
        if p < 0.06 {
            out.push(',');
        } else if p < 0.10 {
            out.push_str(if label == Label::Spam { "!" } else { "..." });
        }
    }
    if rng.next_f64() < 0.5 {
        out.push(if label == Label::Spam { '!' } else { '.' });
    }
    out
}
