//! Versioned JSON checkpoint of the evaluator, its optimizer, the task model
//! and the reward baseline.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::logreg::ParamVector;
use crate::models::optim::AdamState;
use crate::models::policy::MlpPolicy;

pub const CHECKPOINT_FORMAT: &str = "fedval-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSnapshot {
    pub delta: f64,
    pub window: u32,
    pub initialized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub round: u64,
    pub policy: MlpPolicy,
    pub adam: AdamState,
    pub theta: ParamVector,
    pub baseline: BaselineSnapshot,
}

impl Checkpoint {
    pub fn new(
        round: u64,
        policy: MlpPolicy,
        adam: AdamState,
        theta: ParamVector,
        baseline: BaselineSnapshot,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            round,
            policy,
            adam,
            theta,
            baseline,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let ck: Checkpoint =
            serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unexpected format tag {:?}", ck.format)));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        // Re-validate the policy shapes against its parameter count.
        MlpPolicy::from_parts(ck.policy.shapes().to_vec(), ck.policy.params().to_vec())?;
        if ck.adam.m.len() != ck.policy.n_params() || ck.adam.v.len() != ck.policy.n_params() {
            return Err(Error::Checkpoint("optimizer state does not match policy".into()));
        }
        Ok(ck)
    }
}
