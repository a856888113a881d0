//! Run configuration: a flat JSON file naming the holonomy, the
//! deformation, the sweep seed, and optional tolerance overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use margulis_core::affine::DeformationParams;
use margulis_core::fuchsian::HolonomySpec;

use crate::Failure;

/// Flat on-disk schema.  Lengths and twists describe the holonomy of the
/// `b + 1`-holed sphere; `alpha`, `beta`, `t` are the deformation
/// parameters; `seed` fixes every randomized sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub b: usize,
    pub boundary_lengths: Vec<f64>,
    pub dividing_lengths: Vec<f64>,
    pub hyperbolic_twists: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub t: Vec<f64>,
    pub seed: u64,
    /// Overrides for the named report tolerances; anything not listed
    /// keeps its default.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

/// A parsed config together with the hash of the exact file bytes, which
/// every report embeds.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let sha256 = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();
    let config: RunConfig = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::Usage(format!("cannot parse config {}: {e}", path.display())))?;
    config.validate()?;
    Ok(LoadedConfig { config, sha256 })
}

impl RunConfig {
    pub fn holonomy_spec(&self) -> HolonomySpec {
        HolonomySpec {
            b: self.b,
            boundary_lengths: self.boundary_lengths.clone(),
            dividing_lengths: self.dividing_lengths.clone(),
            hyperbolic_twists: self.hyperbolic_twists.clone(),
        }
    }

    pub fn deformation(&self) -> DeformationParams {
        DeformationParams {
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            t: self.t.clone(),
        }
    }

    fn validate(&self) -> Result<(), Failure> {
        self.holonomy_spec()
            .validate()
            .and_then(|_| self.deformation().validate(self.b))
            .map_err(|e| Failure::Usage(format!("invalid config: {e}")))
    }

    /// Named tolerance with a built-in default.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}
