//! Run configuration: a TOML file with one table per stage, overridden by
//! command-line flags.
//!
//! ```toml
//! [pipeline]
//! max_side = 128
//! fusion = "inverse"
//! ppd = 32.0
//!
//! [pipeline.lattice]
//! seed = 7
//! input_gain = 4.0
//!
//! [run]
//! workers = 4
//! ```

use std::path::Path;

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use v1sal_core::integrate::Fusion;
use v1sal_core::metrics::DEFAULT_SAUC_TRIALS;
use v1sal_core::pipeline::PipelineConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub workers: usize,
    /// sAUC trials per image.
    pub sauc_trials: usize,
    /// Width of the fixation density maps, in degrees.
    pub density_sigma_deg: f64,
    /// Also write the per-channel maps `z(Ŝ_L)`, `z(Ŝ_rg)`, `z(Ŝ_by)`.
    pub channel_maps: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            workers: 1,
            sauc_trials: DEFAULT_SAUC_TRIALS,
            density_sigma_deg: 1.0,
            channel_maps: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub run: RunSection,
}

/// Values given on the command line; `None` keeps the file's value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub fusion: Option<Fusion>,
    pub seed: Option<u64>,
    pub ppd: Option<f64>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// File (if any) plus overrides, validated.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(f) = o.fusion {
            self.pipeline.fusion = f;
        }
        if let Some(s) = o.seed {
            self.pipeline.lattice.seed = s;
        }
        if let Some(p) = o.ppd {
            self.pipeline.ppd = p;
        }
        if let Some(w) = o.workers {
            self.run.workers = w;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        ensure!(self.run.workers >= 1, "workers must be at least 1");
        ensure!(self.run.sauc_trials >= 1, "sauc_trials must be at least 1");
        ensure!(
            self.run.density_sigma_deg > 0.0 && self.run.density_sigma_deg.is_finite(),
            "density_sigma_deg must be positive"
        );
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical JSON form, excluding the worker count
    /// (which never changes results).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.run.workers = 1;
        let json = serde_json::to_string(&canonical).expect("configuration serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_files_fill_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
            [pipeline]
            fusion = "max"
            ppd = 24.0
            [pipeline.lattice]
            seed = 9
            "#,
        )
        .unwrap();
        assert_eq!(cfg.pipeline.fusion, Fusion::Max);
        assert_eq!(cfg.pipeline.ppd, 24.0);
        assert_eq!(cfg.pipeline.lattice.seed, 9);
        assert_eq!(cfg.pipeline.max_side, 128);
        assert_eq!(cfg.run, RunSection::default());
    }

    #[test]
    fn flags_override_the_file() {
        let mut cfg = RunConfig::from_toml("[run]\nworkers = 3\n").unwrap();
        cfg.apply(&Overrides {
            fusion: Some(Fusion::Argmax),
            seed: Some(4),
            ppd: None,
            workers: Some(8),
        });
        assert_eq!(cfg.run.workers, 8);
        assert_eq!(cfg.pipeline.fusion, Fusion::Argmax);
        assert_eq!(cfg.pipeline.lattice.seed, 4);
        assert_eq!(cfg.pipeline.ppd, 32.0);
    }

    #[test]
    fn round_trip_and_hash() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());

        let mut more = cfg.clone();
        more.run.workers = 8;
        assert_eq!(more.hash(), cfg.hash());
        more.pipeline.lattice.seed = 1;
        assert_ne!(more.hash(), cfg.hash());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml("[pipeline]\nbogus = 1\n").is_err());
        let mut cfg = RunConfig::default();
        cfg.pipeline.ppd = 0.0;
        assert!(cfg.validate().is_err());
        cfg.pipeline.ppd = 32.0;
        cfg.run.workers = 0;
        assert!(cfg.validate().is_err());
    }
}
