//! JSON input files.

use serde::{Deserialize, Serialize};
use trochoid_core::design::{DesignSpec, PythagoreanTriple, TrochoidType};
use trochoid_core::sim::{Controller, Integrator, SimConfig};

use crate::document::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

/// Either an explicit `(R_c, d_c)` or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointChoice {
    Auto(Auto),
    Explicit { r_c: f64, d_c: f64 },
}

impl Default for PointChoice {
    fn default() -> Self {
        PointChoice::Auto(Auto::Auto)
    }
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// Input of the `design` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub k: u32,
    pub triple: PythagoreanTriple,
    pub trochoid_type: TrochoidType,
    pub d0_min: f64,
    /// Defaults to half the communication range.
    #[serde(default)]
    pub d0_max: Option<f64>,
    pub d_ct: f64,
    pub d_cr: f64,
    #[serde(default)]
    pub r_rob: Option<f64>,
    #[serde(default)]
    pub r_sense: Option<f64>,
    #[serde(default)]
    pub epsilon_cusp: f64,
    #[serde(default)]
    pub point: PointChoice,
    /// Perturbation margin added to every origin-min bound.
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub subtract_cusp_bands: bool,
}

impl DesignConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: DesignConfig = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            anyhow::bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version);
        }
        Ok(cfg)
    }

    pub fn spec(&self) -> DesignSpec {
        DesignSpec {
            k: self.k,
            triple: self.triple,
            trochoid_type: self.trochoid_type,
            d0_min: self.d0_min,
            d0_max: self.d0_max.unwrap_or(0.5 * self.d_cr),
            d_ct: self.d_ct,
            d_cr: self.d_cr,
            r_rob: self.r_rob,
            r_sense: self.r_sense,
            epsilon_cusp: self.epsilon_cusp,
        }
    }
}

/// Input of the `simulate` command. Unset times follow the design's period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub k_p: f64,
    pub k_i: f64,
    pub v_max: Option<f64>,
    pub omega_max: Option<f64>,
    pub integrator: Integrator,
    pub scale: f64,
    pub controller: Controller,
    /// Number of trajectory rows written, at most.
    pub rows: usize,
    /// Also run the unicycle swarm.
    pub track: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let d = SimConfig::default();
        Self {
            dt: None,
            duration: None,
            k_p: d.k_p,
            k_i: d.k_i,
            v_max: None,
            omega_max: None,
            integrator: d.integrator,
            scale: d.scale,
            controller: d.controller,
            rows: 1001,
            track: true,
        }
    }
}

impl SimulationConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Concrete settings for a design whose unscaled period is `period`.
    pub fn resolve(&self, period: f64) -> SimConfig {
        let duration = self.duration.unwrap_or(period / self.scale);
        let dt = self.dt.unwrap_or(period / self.scale / 20_000.0);
        let steps = (duration / dt).ceil().max(1.0) as usize;
        SimConfig {
            dt,
            duration,
            k_p: self.k_p,
            k_i: self.k_i,
            v_max: self.v_max,
            omega_max: self.omega_max,
            integrator: self.integrator,
            scale: self.scale,
            controller: self.controller,
            record_every: (steps / self.rows.saturating_sub(1).max(1)).max(1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = r#"{
        "k": 2, "triple": [5, 12, 13], "trochoid_type": "epitrochoid",
        "d0_min": 1.5, "d_ct": 0.5, "d_cr": 15,
        "point": {"r_c": 2000, "d_c": 1200}
    }"#;

    #[test]
    fn parses_and_defaults() {
        let c = DesignConfig::parse(FIG2).unwrap();
        assert_eq!(c.point, PointChoice::Explicit { r_c: 2000.0, d_c: 1200.0 });
        assert_eq!(c.spec().d0_max, 7.5);
        let auto = FIG2.replace(r#"{"r_c": 2000, "d_c": 1200}"#, r#""auto""#);
        assert_eq!(DesignConfig::parse(&auto).unwrap().point, PointChoice::default());
    }

    #[test]
    fn errors_name_the_problem() {
        let e = DesignConfig::parse(&FIG2.replace("\"k\"", "\"kk\"")).unwrap_err().to_string();
        assert!(e.contains("kk") && e.contains("line"), "{e}");
        let e = DesignConfig::parse(&FIG2.replace("13]", "14]")).unwrap_err().to_string();
        assert!(e.contains("Pythagorean"), "{e}");
    }

    #[test]
    fn simulation_defaults_follow_period() {
        let s = SimulationConfig { scale: 0.5, ..Default::default() }.resolve(2.0);
        assert_eq!(s.duration, 4.0);
        assert!((s.dt - 2e-4).abs() < 1e-15);
        assert_eq!(s.record_every, 20);
    }
}
