//! Setup files: TOML with a `.cfg` extension.
//!
//! ```toml
//! multiplicities = [0.5, 1.0]   # one k_j per coordinate; N is the length
//! dimension = 2                 # optional cross-check
//!
//! [grid]                        # optional; unset keys keep the defaults
//! radius = 12.0
//! panel_points = 14
//!
//! [kernel]
//! mu_nodes = 24
//!
//! [polar]                       # frequency-side polar rule
//! angular_nodes = 48
//!
//! [hormander]
//! radius_factor = 256.0
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::grid::{CentralRule, Grid, QuadratureScheme};
use crate::polar::PolarOptions;
use crate::riesz::HormanderOptions;
use crate::rootsys::ReflectionSetup;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub radius: Option<f64>,
    pub central_half_width: Option<f64>,
    pub central_points: Option<usize>,
    pub panel_width: Option<f64>,
    pub panel_points: Option<usize>,
    pub central_rule: Option<CentralRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    /// Nodes per coordinate for mu_x in kernel-route evaluations.
    pub mu_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupConfig {
    pub multiplicities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSection>,
    #[serde(default)]
    pub polar: PolarOptions,
    #[serde(default)]
    pub hormander: HormanderOptions,
}

impl SetupConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| DunklError::Config(e.to_string()))?;
        cfg.setup()?;
        cfg.scheme().validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DunklError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn from_setup(setup: &ReflectionSetup) -> Self {
        Self {
            multiplicities: setup.multiplicities().to_vec(),
            dimension: None,
            grid: GridSection::default(),
            kernel: None,
            polar: PolarOptions::default(),
            hormander: HormanderOptions::default(),
        }
    }

    pub fn setup(&self) -> Result<ReflectionSetup> {
        if let Some(n) = self.dimension {
            if n != self.multiplicities.len() {
                return Err(DunklError::DimensionMismatch {
                    expected: n,
                    got: self.multiplicities.len(),
                });
            }
        }
        ReflectionSetup::new(self.multiplicities.clone())
    }

    pub fn scheme(&self) -> QuadratureScheme {
        let mut s = QuadratureScheme::default_for(self.multiplicities.len().max(1));
        let g = &self.grid;
        if let Some(v) = g.radius {
            s.radius = v;
        }
        if let Some(v) = g.central_half_width {
            s.central_half_width = v;
        }
        if let Some(v) = g.central_points {
            s.central_points = v;
        }
        if let Some(v) = g.panel_width {
            s.panel_width = v;
        }
        if let Some(v) = g.panel_points {
            s.panel_points = v;
        }
        if let Some(v) = g.central_rule {
            s.central_rule = v;
        }
        s
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Grid::new(&self.setup()?, self.scheme())
    }

    /// mu_x nodes for kernel evaluations: 64 in one dimension, 24 otherwise.
    pub fn mu_nodes(&self) -> usize {
        match &self.kernel {
            Some(k) => k.mu_nodes,
            None if self.multiplicities.len() == 1 => 64,
            None => 24,
        }
    }
}
