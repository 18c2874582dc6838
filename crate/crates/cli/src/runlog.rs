//! Per-run JSON log.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct ItemLog {
    pub id: String,
    pub seconds: f64,
    /// Lattice runs performed for this item.
    pub simulations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunLog {
    pub command: String,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub workers: usize,
    pub started_unix: u64,
    pub seconds: f64,
    pub items: Vec<ItemLog>,
    pub config: RunConfig,
    #[serde(skip)]
    clock: Option<Instant>,
}

impl RunLog {
    pub fn start(command: &str, cfg: &RunConfig) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            config_hash: cfg.hash(),
            seed: cfg.pipeline.lattice.seed,
            workers: cfg.run.workers,
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            seconds: 0.0,
            items: Vec::new(),
            config: cfg.clone(),
            clock: Some(Instant::now()),
        }
    }

    pub fn failures(&self) -> usize {
        self.items.iter().filter(|i| i.error.is_some()).count()
    }

    pub fn finish(&mut self, path: &Path) -> Result<()> {
        if let Some(c) = self.clock {
            self.seconds = c.elapsed().as_secs_f64();
        }
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))
    }
}
