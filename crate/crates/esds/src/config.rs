//! Run configuration files.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::component::Params;
use crate::error::EsdsError;
use crate::ops::{Catalog, Operation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub steps: usize,
    pub age_max: usize,
    pub gossip_epoch: usize,
    /// Full state snapshots in the log every this many events.
    pub snapshot_every: usize,
    /// Client whose front end drops requests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lossy: Option<usize>,
    #[serde(default = "default_cap")]
    pub valset_cap: usize,
}

fn default_cap() -> usize {
    1 << 14
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 0, steps: 20_000, age_max: 8, gossip_epoch: 16, snapshot_every: 100, lossy: None, valset_cap: default_cap() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub clients: usize,
    pub replicas: usize,
    pub ops: Vec<Operation>,
    #[serde(default)]
    pub run: RunConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, EsdsError> {
        Ok(liveref_core::format::read_json(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, EsdsError> {
        Ok(liveref_core::format::parse_json(text)?)
    }

    pub fn params(&self) -> Result<Arc<Params>, EsdsError> {
        if self.clients == 0 || self.replicas == 0 {
            return Err(EsdsError::Config("need at least one client and one replica".into()));
        }
        if let Some(op) = self.ops.iter().find(|o| o.client >= self.clients) {
            return Err(EsdsError::Config(format!("operation {} names client {} of {}", op.id, op.client, self.clients)));
        }
        if self.run.lossy.is_some_and(|c| c >= self.clients) {
            return Err(EsdsError::Config("lossy front end names an unknown client".into()));
        }
        if self.run.age_max == 0 || self.run.gossip_epoch == 0 || self.run.snapshot_every == 0 {
            return Err(EsdsError::Config("age_max, gossip_epoch and snapshot_every must be positive".into()));
        }
        let catalog = Catalog::new(self.ops.iter().cloned())?;
        Ok(Arc::new(Params { catalog: Arc::new(catalog), clients: self.clients, replicas: self.replicas, valset_cap: self.run.valset_cap }))
    }
}
