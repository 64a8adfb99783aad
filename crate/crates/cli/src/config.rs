use std::path::Path;

use serde::{Deserialize, Serialize};

use tamelab_core::checks::DEFAULT_MIN_GAP;
use tamelab_core::error::{Error, Result};

/// Settings shared by every subcommand. Values come from the TOML config file, then flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub det_tol: f64,
    pub min_gap: f64,
    pub distinct_tol: f64,
    pub samples: usize,
    pub probes: usize,
    pub max_fiber: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            det_tol: 1e-9,
            min_gap: DEFAULT_MIN_GAP,
            distinct_tol: 1e-6,
            samples: 10_000,
            probes: 4,
            max_fiber: 1,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("det_tol", self.det_tol), ("min_gap", self.min_gap), ("distinct_tol", self.distinct_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::BadParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.samples == 0 || self.probes == 0 || self.max_fiber == 0 {
            return Err(Error::BadParams("samples, probes and max_fiber must be positive".into()));
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::BadParams("this command is stochastic and needs --seed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_toml() {
        let cfg: RunConfig = toml::from_str("seed = 7\nmin_gap = 0.5\n").unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.min_gap, 0.5);
        assert_eq!(cfg.samples, 10_000);
        assert!(toml::from_str::<RunConfig>("sede = 1").is_err());
        let bad = RunConfig { min_gap: 0.0, ..RunConfig::default() };
        assert!(bad.validate().is_err());
    }
}
