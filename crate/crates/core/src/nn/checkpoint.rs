use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::qnet::QNetwork;
use crate::nn::reward_net::RewardNet;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "snake_case")]
pub enum NetworkParams {
    D3qnDueling(QNetwork),
    ReesReward(RewardNet),
}

impl NetworkParams {
    pub fn architecture(&self) -> &'static str {
        match self {
            NetworkParams::D3qnDueling(_) => "d3qn_dueling",
            NetworkParams::ReesReward(_) => "rees_reward",
        }
    }

    /// `(n, m)` the network was built for.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            NetworkParams::D3qnDueling(q) => (q.config.n, q.config.m),
            NetworkParams::ReesReward(r) => (r.config.n, r.config.m),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            NetworkParams::D3qnDueling(q) => q.validate(),
            NetworkParams::ReesReward(r) => r.validate(),
        }
    }
}

/// Versioned JSON dump of a network and its architecture config. Floats are written in shortest
/// round-trip form and parsed exactly, so save/load is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub network: NetworkParams,
}

impl Checkpoint {
    pub fn new(network: NetworkParams) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            network,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)
            .map_err(|e| Error::Config(format!("checkpoint serialisation failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Validation {
                field: "version".into(),
                message: format!(
                    "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                    ckpt.version
                ),
            });
        }
        ckpt.network.validate().map_err(|e| Error::Validation {
            field: "network".into(),
            message: e.to_string(),
        })?;
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
