//! Experiment configuration: profile defaults, then a `key = value` file
//! with one section per subsystem, then explicit overrides.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::federation::removal_count;
use crate::rcce::RewardMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Parity,
    RemoveRetrain,
    Corruption,
    Scaling,
    Contribution,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Parity,
        ExperimentKind::RemoveRetrain,
        ExperimentKind::Corruption,
        ExperimentKind::Scaling,
        ExperimentKind::Contribution,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Parity => "parity",
            ExperimentKind::RemoveRetrain => "remove_retrain",
            ExperimentKind::Corruption => "corruption",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Contribution => "contribution",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.replace('-', "_");
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == normalized)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Named sets of defaults. `paper` runs the full-length protocol;
/// `desk` shrinks rounds, seeds and client counts so a full pass finishes
/// in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Paper,
    Desk,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            other => Err(Error::Config(format!("unknown profile {other:?} (expected paper or desk)"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Paper => "paper",
            Profile::Desk => "desk",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: ExperimentKind,
    pub profile: Profile,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Tab-separated `label<TAB>text` corpus. Absent means the built-in
    /// synthetic corpus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub synthetic_seed: u64,
    pub validation_size: usize,
    pub vocab_size: usize,
    pub max_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationSection {
    pub n_clients: usize,
    pub alpha: f64,
    pub task_lr: f64,
    pub rounds: usize,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptionSection {
    /// Share of training samples that lose words.
    pub sample_fraction: f64,
    /// Share of words dropped from each corrupted sample.
    pub word_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcceSection {
    pub evaluator_lr: f64,
    pub window: u32,
    pub reward_mode: RewardMode,
    pub hidden: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationSection {
    pub removal_rate: f64,
    pub score_rounds: usize,
    pub loo_rounds: usize,
    pub retrain_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub client_counts: Vec<usize>,
    pub rcce_rounds: usize,
    pub loo_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub data: DataSection,
    pub federation: FederationSection,
    pub corruption: CorruptionSection,
    pub rcce: RcceSection,
    pub valuation: ValuationSection,
    pub scaling: ScalingSection,
}

/// Values given explicitly on the command line; they win over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub profile: Option<Profile>,
    pub seeds: Option<Vec<u64>>,
    pub output_dir: Option<PathBuf>,
    pub data_path: Option<PathBuf>,
    pub synthetic_seed: Option<u64>,
    pub n_clients: Option<usize>,
    pub alpha: Option<f64>,
    pub task_lr: Option<f64>,
    pub rounds: Option<usize>,
    pub threads: Option<usize>,
    pub corrupt_samples: Option<f64>,
    pub corrupt_words: Option<f64>,
    pub evaluator_lr: Option<f64>,
    pub window: Option<u32>,
    pub reward_mode: Option<RewardMode>,
    pub removal_rate: Option<f64>,
    pub score_rounds: Option<usize>,
    pub loo_rounds: Option<usize>,
    pub retrain_rounds: Option<usize>,
    pub client_counts: Option<Vec<usize>>,
    pub scaling_rcce_rounds: Option<usize>,
    pub scaling_loo_rounds: Option<usize>,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind, profile: Profile) -> Self {
        let corrupt = if kind == ExperimentKind::Corruption { 0.2 } else { 0.0 };
        let (seeds, rounds, counts, scaling_rcce, scaling_loo) = match profile {
            Profile::Paper => (vec![1, 2, 3, 4, 5], 1000, vec![100, 200, 300, 400, 500], 1000, 50),
            Profile::Desk => (vec![1, 2, 3], 300, vec![100, 500], 200, 10),
        };
        ExperimentConfig {
            experiment: ExperimentSection {
                name: kind,
                profile,
                seeds,
                output_dir: PathBuf::from("results"),
            },
            data: DataSection {
                path: None,
                synthetic_seed: 0,
                validation_size: 572,
                vocab_size: 1000,
                max_len: 150,
            },
            federation: FederationSection {
                n_clients: 50,
                alpha: 0.5,
                task_lr: 0.1,
                rounds,
                threads: 1,
            },
            corruption: CorruptionSection {
                sample_fraction: corrupt,
                word_fraction: corrupt,
            },
            rcce: RcceSection {
                evaluator_lr: 1e-5,
                window: 20,
                reward_mode: RewardMode::Flipped,
                hidden: vec![64, 64, 32],
            },
            valuation: ValuationSection {
                removal_rate: 0.3,
                score_rounds: 50,
                loo_rounds: 50,
                retrain_rounds: rounds,
            },
            scaling: ScalingSection {
                client_counts: counts,
                rcce_rounds: scaling_rcce,
                loo_rounds: scaling_loo,
            },
        }
    }

    /// Defaults for the profile, overlaid by `file` (if any), overlaid by
    /// `overrides`, then validated. The profile itself is taken from the
    /// overrides, else the file, else `paper`. Without an explicit `kind`
    /// the file's experiment name is used, else `parity`.
    pub fn resolve(kind: Option<ExperimentKind>, file: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let file_table = match file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
                Some(
                    text.parse::<toml::Table>()
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
                )
            }
            None => None,
        };
        let file_profile = file_table
            .as_ref()
            .and_then(|t| t.get("experiment"))
            .and_then(|e| e.get("profile"))
            .and_then(|p| p.as_str())
            .map(str::parse::<Profile>)
            .transpose()?;
        let profile = overrides.profile.or(file_profile).unwrap_or(Profile::Paper);
        let file_kind = file_table
            .as_ref()
            .and_then(|t| t.get("experiment"))
            .and_then(|e| e.get("name"))
            .and_then(|p| p.as_str())
            .map(str::parse::<ExperimentKind>)
            .transpose()?;
        if let (Some(k), Some(f)) = (kind, file_kind) {
            if k != f {
                return Err(Error::Config(format!("config file is for experiment {f} but {k} was requested")));
            }
        }
        let kind = kind.or(file_kind).unwrap_or(ExperimentKind::Parity);

        let mut merged = toml::Table::try_from(ExperimentConfig::defaults(kind, profile))
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(table) = file_table {
            merge_tables(&mut merged, table)?;
        }
        let mut cfg: ExperimentConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.experiment.profile = profile;
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(o.seeds => self.experiment.seeds);
        set!(o.output_dir => self.experiment.output_dir);
        if let Some(p) = &o.data_path {
            self.data.path = Some(p.clone());
        }
        set!(o.synthetic_seed => self.data.synthetic_seed);
        set!(o.n_clients => self.federation.n_clients);
        set!(o.alpha => self.federation.alpha);
        set!(o.task_lr => self.federation.task_lr);
        set!(o.rounds => self.federation.rounds);
        set!(o.threads => self.federation.threads);
        set!(o.corrupt_samples => self.corruption.sample_fraction);
        set!(o.corrupt_words => self.corruption.word_fraction);
        set!(o.evaluator_lr => self.rcce.evaluator_lr);
        set!(o.window => self.rcce.window);
        set!(o.reward_mode => self.rcce.reward_mode);
        set!(o.removal_rate => self.valuation.removal_rate);
        set!(o.score_rounds => self.valuation.score_rounds);
        set!(o.loo_rounds => self.valuation.loo_rounds);
        set!(o.retrain_rounds => self.valuation.retrain_rounds);
        set!(o.client_counts => self.scaling.client_counts);
        set!(o.scaling_rcce_rounds => self.scaling.rcce_rounds);
        set!(o.scaling_loo_rounds => self.scaling.loo_rounds);
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let e = &self.experiment;
        if e.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        let mut sorted = e.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != e.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        let d = &self.data;
        if d.validation_size == 0 || d.vocab_size == 0 || d.max_len == 0 {
            return bad("validation_size, vocab_size and max_len must be positive".into());
        }
        let f = &self.federation;
        if f.n_clients == 0 {
            return bad("n_clients must be positive".into());
        }
        if !(f.alpha.is_finite() && f.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", f.alpha));
        }
        if !(f.task_lr.is_finite() && f.task_lr > 0.0) {
            return bad(format!("task_lr must be positive, got {}", f.task_lr));
        }
        if f.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        let c = &self.corruption;
        for (name, v) in [("sample_fraction", c.sample_fraction), ("word_fraction", c.word_fraction)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("corruption {name} must lie in [0, 1], got {v}"));
            }
        }
        let r = &self.rcce;
        if !(r.evaluator_lr.is_finite() && r.evaluator_lr > 0.0) {
            return bad(format!("evaluator_lr must be positive, got {}", r.evaluator_lr));
        }
        if r.window == 0 {
            return bad("window must be positive".into());
        }
        if r.hidden.is_empty() || r.hidden.contains(&0) {
            return bad("hidden layer widths must be positive".into());
        }
        let v = &self.valuation;
        if !(0.0..=1.0).contains(&v.removal_rate) {
            return bad(format!("removal_rate must lie in [0, 1], got {}", v.removal_rate));
        }
        if v.score_rounds == 0 {
            return bad("score_rounds must be positive".into());
        }
        let s = &self.scaling;
        if s.client_counts.is_empty() || s.client_counts.iter().any(|&n| n < 2) {
            return bad("client_counts must be non-empty with every count at least 2".into());
        }
        match e.name {
            ExperimentKind::RemoveRetrain | ExperimentKind::Corruption => {
                if f.n_clients < 2 {
                    return bad("leave-one-out needs at least 2 clients".into());
                }
                if removal_count(f.n_clients, v.removal_rate) >= f.n_clients {
                    return bad(format!(
                        "removal_rate {} removes all {} clients",
                        v.removal_rate, f.n_clients
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn corruption_spec(&self) -> Option<crate::dataset::CorruptionSpec> {
        let c = &self.corruption;
        (c.sample_fraction > 0.0 && c.word_fraction > 0.0).then_some(crate::dataset::CorruptionSpec {
            sample_fraction: c.sample_fraction,
            word_drop_fraction: c.word_fraction,
        })
    }
}

fn merge_tables(base: &mut toml::Table, overlay: toml::Table) -> Result<()> {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o)?,
            (Some(_), toml::Value::Table(_)) => {
                return Err(Error::Config(format!("{key:?} is a key, not a section")));
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_every_experiment() {
        for kind in ExperimentKind::ALL {
            for profile in [Profile::Paper, Profile::Desk] {
                ExperimentConfig::defaults(kind, profile).validate().unwrap();
            }
        }
    }

    #[test]
    fn paper_defaults() {
        let c = ExperimentConfig::defaults(ExperimentKind::Parity, Profile::Paper);
        assert_eq!(c.federation.n_clients, 50);
        assert_eq!(c.federation.alpha, 0.5);
        assert_eq!(c.federation.rounds, 1000);
        assert_eq!(c.federation.task_lr, 0.1);
        assert_eq!(c.rcce.evaluator_lr, 1e-5);
        assert_eq!(c.experiment.seeds.len(), 5);
        assert!(c.corruption_spec().is_none());
        let k = ExperimentConfig::defaults(ExperimentKind::Corruption, Profile::Paper);
        assert_eq!(k.corruption.sample_fraction, 0.2);
        assert!(k.corruption_spec().is_some());
    }

    #[test]
    fn precedence_defaults_file_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.cfg");
        fs::write(&path, "[federation]\nrounds = 40\nalpha = 1.0\n\n[rcce]\nreward_mode = \"literal\"\n").unwrap();
        let overrides = Overrides {
            rounds: Some(7),
            ..Overrides::default()
        };
        let c = ExperimentConfig::resolve(Some(ExperimentKind::Parity), Some(&path), &overrides).unwrap();
        assert_eq!(c.federation.rounds, 7);
        assert_eq!(c.federation.alpha, 1.0);
        assert_eq!(c.rcce.reward_mode, RewardMode::Literal);
        assert_eq!(c.federation.n_clients, 50);
    }

    #[test]
    fn profile_from_file_or_flag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.cfg");
        fs::write(&path, "[experiment]\nprofile = \"desk\"\n").unwrap();
        let c = ExperimentConfig::resolve(Some(ExperimentKind::Parity), Some(&path), &Overrides::default()).unwrap();
        assert_eq!(c.federation.rounds, 300);
        let o = Overrides {
            profile: Some(Profile::Paper),
            ..Overrides::default()
        };
        let c = ExperimentConfig::resolve(Some(ExperimentKind::Parity), Some(&path), &o).unwrap();
        assert_eq!(c.federation.rounds, 1000);
    }

    #[test]
    fn resolved_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.resolved");
        let mut c = ExperimentConfig::defaults(ExperimentKind::Corruption, Profile::Desk);
        c.data.path = Some(PathBuf::from("/data/sms.tsv"));
        c.rcce.evaluator_lr = 3.3e-6;
        fs::write(&path, c.to_toml()).unwrap();
        let back = ExperimentConfig::resolve(Some(ExperimentKind::Corruption), Some(&path), &Overrides::default()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.cfg");
        fs::write(&path, "[federation]\nrouns = 40\n").unwrap();
        assert!(matches!(
            ExperimentConfig::resolve(Some(ExperimentKind::Parity), Some(&path), &Overrides::default()),
            Err(Error::Config(_))
        ));
        fs::write(&path, "[federation]\nalpha = -1.0\n").unwrap();
        assert!(ExperimentConfig::resolve(Some(ExperimentKind::Parity), Some(&path), &Overrides::default()).is_err());
        fs::write(&path, "[experiment]\nname = \"scaling\"\n").unwrap();
        assert!(ExperimentConfig::resolve(Some(ExperimentKind::Parity), Some(&path), &Overrides::default()).is_err());
        let all_removed = Overrides {
            removal_rate: Some(1.0),
            ..Overrides::default()
        };
        assert!(ExperimentConfig::resolve(Some(ExperimentKind::RemoveRetrain), None, &all_removed).is_err());
    }

    #[test]
    fn experiment_names_parse() {
        assert_eq!("remove-retrain".parse::<ExperimentKind>().unwrap(), ExperimentKind::RemoveRetrain);
        assert_eq!("scaling".parse::<ExperimentKind>().unwrap(), ExperimentKind::Scaling);
        assert!("nope".parse::<ExperimentKind>().is_err());
    }
}
