//! JSON interchange format for designs given by orbit weights.

use std::fs;
use std::path::Path;

use orbit_design::{OrbitDesign, Region};
use serde::{Deserialize, Serialize};

use crate::InputError;

/// Allowed deviation of the weight sum from 1 before renormalizing.
pub const FILE_WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub k: usize,
    pub lower: usize,
    pub upper: usize,
    pub orbits: Vec<OrbitEntry>,
}

/// Orbit weight, not point weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitEntry {
    pub k: usize,
    pub weight: f64,
}

impl DesignFile {
    pub fn from_design(design: &OrbitDesign, lower: usize, upper: usize) -> Self {
        Self {
            k: design.k_factors(),
            lower,
            upper,
            orbits: design
                .orbit_weights()
                .into_iter()
                .map(|(k, weight)| OrbitEntry { k, weight })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = fs::read_to_string(path)
            .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| InputError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, InputError> {
        serde_json::from_str(text).map_err(|e| InputError(format!("malformed design file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Validates the weights against `region` and builds the design,
    /// renormalizing a sum within [`FILE_WEIGHT_SUM_TOL`] of 1. Exactly
    /// mirrored weights give a symmetric design.
    pub fn to_design(&self, region: &Region) -> Result<OrbitDesign, InputError> {
        if region.k_factors() != self.k {
            return Err(InputError(format!(
                "design has K = {}, region has K = {}",
                self.k,
                region.k_factors()
            )));
        }
        let mut sum = 0.0;
        for o in &self.orbits {
            if !o.weight.is_finite() || o.weight < 0.0 {
                return Err(InputError(format!("orbit {} has weight {}", o.k, o.weight)));
            }
            if o.k > self.k {
                return Err(InputError(format!("orbit {} exceeds K = {}", o.k, self.k)));
            }
            if o.weight > 0.0 && !region.contains_orbit(o.k) {
                return Err(InputError(format!(
                    "orbit {} carries weight but lies outside [{}, {}]",
                    o.k,
                    region.lower(),
                    region.upper()
                )));
            }
            sum += o.weight;
        }
        if (sum - 1.0).abs() > FILE_WEIGHT_SUM_TOL {
            return Err(InputError(format!(
                "orbit weights sum to {sum}, not 1 (tolerance {FILE_WEIGHT_SUM_TOL:e})"
            )));
        }
        let design =
            OrbitDesign::general(self.k, self.orbits.iter().map(|o| (o.k, o.weight / sum)))
                .map_err(|e| InputError(e.to_string()))?;
        Ok(design.clone().into_symmetric().unwrap_or(design))
    }
}
