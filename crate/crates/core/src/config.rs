//! Run configuration, read from TOML and overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::criteria::Tolerances;
use crate::error::{AlvError, Result};
use crate::grid::DerivativeScheme;
use crate::liouville4d::HomotopyOptions;
use crate::registry::{ModelSpec, PairBase, PairSpec};

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "ALV_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsOptions {
    pub horizon: f64,
    pub dt: f64,
    pub orbits: usize,
    /// Constant factor `c` for the reparametrized flow `cX`.
    pub reparametrization: f64,
    pub x0: Option<Vec<f64>>,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self {
            horizon: 50.0,
            dt: 1e-3,
            orbits: 4,
            reparametrization: 2.0,
            x0: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: String,
    pub pair: String,
    /// Samples per grid axis.
    pub grid: usize,
    pub scheme: DerivativeScheme,
    pub tolerances: Tolerances,
    pub homotopy: HomotopyOptions,
    pub retraction_samples: usize,
    pub dynamics: DynamicsOptions,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Omit wall-clock timings so that reports are byte-identical across runs.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: "sol:catmap".into(),
            pair: "standard".into(),
            grid: 256,
            scheme: DerivativeScheme::Spectral,
            tolerances: Tolerances::default(),
            homotopy: HomotopyOptions::default(),
            retraction_samples: 33,
            dynamics: DynamicsOptions::default(),
            out: None,
            csv: None,
            deterministic: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| AlvError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AlvError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        self.model.parse()
    }

    pub fn pair_spec(&self) -> Result<PairSpec> {
        self.pair.parse()
    }

    /// Checks ranges and referenced files.
    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        if !(t.tau_pos > 0.0 && t.tau_eq > 0.0) {
            return Err(AlvError::Config("tolerances must be positive".into()));
        }
        let h = &self.homotopy;
        if !(h.epsilon > 0.0 && h.epsilon <= h.epsilon_bound) {
            return Err(AlvError::EpsilonTooLarge {
                epsilon: h.epsilon,
                bound: h.epsilon_bound,
            });
        }
        if h.tau_steps == 0 || h.s_samples < 2 || !(h.s_min >= 0.0 && h.s_max > h.s_min) {
            return Err(AlvError::Config(
                "homotopy needs tau_steps >= 1, s_samples >= 2 and 0 <= s_min < s_max".into(),
            ));
        }
        if self.retraction_samples < 2 {
            return Err(AlvError::Config("retraction_samples must be at least 2".into()));
        }
        let d = &self.dynamics;
        if !(d.horizon > 0.0 && d.dt > 0.0 && d.reparametrization > 0.0) || d.orbits == 0 {
            return Err(AlvError::Config(
                "dynamics needs positive horizon, dt, reparametrization and orbits".into(),
            ));
        }
        self.model_spec()?;
        if let PairBase::File(path) = &self.pair_spec()?.base {
            if !path.exists() {
                return Err(AlvError::Config(format!(
                    "pair file {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    /// Applies an `a:b:n` sweep range.
    pub fn set_s_range(&mut self, range: &str) -> Result<()> {
        let parts: Vec<&str> = range.split(':').collect();
        let bad = || AlvError::Config(format!("bad s-range '{range}', expected a:b:n"));
        if parts.len() != 3 {
            return Err(bad());
        }
        self.homotopy.s_min = parts[0].parse().map_err(|_| bad())?;
        self.homotopy.s_max = parts[1].parse().map_err(|_| bad())?;
        self.homotopy.s_samples = parts[2].parse().map_err(|_| bad())?;
        Ok(())
    }
}
