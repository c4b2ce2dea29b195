use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::norm::NormSpec;

pub const DEMO_NAMES: [&str; 11] =
    ["dist", "limits", "epi-dist", "epi-bounds", "penalty", "cubic", "soften", "kw-density", "cp", "homotopy", "cones"];

/// Overrides for one demo run. Every field except `demo` is optional; unset
/// fields fall back to the command-line flags and then to the demo defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoConfig {
    pub demo: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec>,
    /// One `lo:hi:steps` entry per dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<String>>,
    /// The parameter schedule of the demo: `theta`, `nu`, `lambda` or center counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
}

impl DemoConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: DemoConfig = serde_json::from_str(text).map_err(|e| Error::parse("demo config", e))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !DEMO_NAMES.contains(&self.demo.as_str()) {
            return Err(Error::invalid(format!(
                "unknown demo {:?}; expected one of {}",
                self.demo,
                DEMO_NAMES.join(", ")
            )));
        }
        if let Some(rho) = self.rho {
            if !(rho >= 0.0) || rho.is_nan() {
                return Err(Error::invalid("rho must be >= 0"));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("tolerance must be positive and finite"));
            }
        }
        if let Some(s) = &self.schedule {
            if s.is_empty() || s.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("schedule must be a nonempty list of finite numbers"));
            }
        }
        self.grid_spec().map(|_| ())
    }

    pub fn grid_spec(&self) -> Result<Option<GridSpec>> {
        self.grid.as_deref().map(GridSpec::from_args).transpose()
    }
}
