use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use trochoid_core::design::{AgentTrochoid, DesignSpec, Eigenstructure, InitialPlacement};
use trochoid_core::injection::InjectionPlan;
use trochoid_core::region::{ConstraintTag, FeasibleRegion};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub input_sha256: String,
    /// Seconds since the epoch, taken from `SOURCE_DATE_EPOCH` when set so
    /// that repeated runs produce identical files.
    pub timestamp: Option<u64>,
}

impl Provenance {
    pub fn for_input(input: &[u8]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_sha256: hex::encode(Sha256::digest(input)),
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub r_c: f64,
    pub d_c: f64,
    /// Chosen automatically as the deepest point of the largest polygon.
    pub auto: bool,
    pub feasible: bool,
    pub violated: Vec<ConstraintTag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionOptions {
    pub delta: f64,
    pub subtract_cusp_bands: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDocument {
    pub schema_version: u32,
    pub spec: DesignSpec,
    pub eigenstructure: Eigenstructure,
    pub region_options: RegionOptions,
    pub region: FeasibleRegion,
    pub cusp_slopes: [Option<f64>; 3],
    pub point: DesignPoint,
    pub placement: InitialPlacement,
    pub trochoids: [AgentTrochoid; 3],
    #[serde(default)]
    pub injection: Option<InjectionPlan>,
    pub provenance: Provenance,
}

impl DesignDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document is serialisable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let doc: DesignDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            anyhow::bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", doc.schema_version);
        }
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
