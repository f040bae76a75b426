//! Scenario files: which lattices, grids and suites a run uses.

use proca_lab_core::mesh::{MeshSpec, MetricJson, SpatialMesh};
use proca_lab_core::rng::LabRng;
use proca_lab_core::spacetime::GridSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Names accepted in the `suites` list.
pub const SUITES: [&str; 6] = ["complex", "spectral", "cauchy", "green", "moller", "states"];

/// A spatial lattice entry; `random_metric = [lo, hi]` replaces the metric
/// by per-edge values drawn uniformly from the scenario seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshEntry {
    #[serde(flatten)]
    pub spec: MeshSpec,
    #[serde(default)]
    pub random_metric: Option<[f64; 2]>,
}

/// Raw Cauchy data supplied by the scenario, checked as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumJson {
    pub a0: Vec<f64>,
    pub pi0: Vec<f64>,
    pub a1: Vec<f64>,
    pub pi1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchySettings {
    /// Evolution times at which the symplectic form is compared with t = 0.
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    /// Energy conservation is sampled on `[0, horizon]` in steps of 0.5.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Extra datum on the first mesh; its energy forms must agree.
    #[serde(default)]
    pub datum: Option<DatumJson>,
}

impl Default for CauchySettings {
    fn default() -> Self {
        Self { times: default_times(), horizon: default_horizon(), datum: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxySettings {
    /// Number of slices of the long grid used for time shifts.
    #[serde(default = "default_proxy_nt")]
    pub nt: usize,
    #[serde(default = "default_n_tau")]
    pub n_tau: usize,
}

impl Default for ProxySettings {
    fn default() -> Self {
        Self { nt: default_proxy_nt(), n_tau: default_n_tau() }
    }
}

/// Sizes of the random batteries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batteries {
    #[serde(default = "five")]
    pub pairs: usize,
    #[serde(default = "hundred")]
    pub cauchy_schwarz: usize,
    #[serde(default = "ten")]
    pub gram: usize,
    #[serde(default = "fifty")]
    pub fp_pairs: usize,
}

impl Default for Batteries {
    fn default() -> Self {
        Self { pairs: 5, cauchy_schwarz: 100, gram: 10, fp_pairs: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
    #[serde(default)]
    pub tolerance_scale: Option<f64>,
    /// Per-check threshold overrides keyed by check id.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub mass_sq: f64,
    /// Lattices for the complex, spectral and Cauchy suites.
    #[serde(default)]
    pub meshes: Vec<MeshEntry>,
    #[serde(default = "default_masses")]
    pub spectral_masses: Vec<f64>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub cauchy: CauchySettings,
    /// Grid for the Green suite.
    #[serde(default)]
    pub green: Option<GridSpec>,
    /// Interpolating grid for the Møller suite; its end metrics define the static grids.
    #[serde(default)]
    pub moller: Option<GridSpec>,
    /// Ultrastatic grid for the state suite.
    #[serde(default)]
    pub state: Option<GridSpec>,
    #[serde(default)]
    pub proxy: ProxySettings,
    #[serde(default)]
    pub batteries: Batteries,
}

fn default_times() -> Vec<f64> {
    vec![0.3, 1.7]
}
fn default_horizon() -> f64 {
    5.0
}
fn default_proxy_nt() -> usize {
    128
}
fn default_n_tau() -> usize {
    64
}
fn five() -> usize {
    5
}
fn ten() -> usize {
    10
}
fn fifty() -> usize {
    50
}
fn hundred() -> usize {
    100
}
fn default_suites() -> Vec<String> {
    vec!["full".into()]
}
fn default_masses() -> Vec<f64> {
    vec![0.25, 1.0, 25.0]
}
fn default_alphas() -> Vec<f64> {
    vec![-1.0, -0.5, 0.5, 1.0]
}

/// Problems with a scenario file; these map to exit code 2.
#[derive(Debug)]
pub struct ScenarioError(pub String);

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ScenarioError {}

impl From<proca_lab_core::LabError> for ScenarioError {
    fn from(e: proca_lab_core::LabError) -> Self {
        ScenarioError(e.to_string())
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError(format!("malformed scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    /// Expand `full` and check that every selected suite has its inputs.
    pub fn selected_suites(&self) -> Result<Vec<&'static str>, ScenarioError> {
        let mut out = Vec::new();
        for name in &self.suites {
            if name == "full" {
                out.extend(SUITES);
                continue;
            }
            let known = SUITES
                .iter()
                .find(|s| **s == name.as_str())
                .ok_or_else(|| ScenarioError(format!("unknown suite {name:?}")))?;
            out.push(*known);
        }
        out.sort_by_key(|s| SUITES.iter().position(|x| x == s));
        out.dedup();
        for s in &out {
            let missing = match *s {
                "complex" | "spectral" | "cauchy" => self.meshes.is_empty(),
                "green" => self.green.is_none(),
                "moller" => self.moller.is_none(),
                "states" => self.state.is_none(),
                _ => false,
            };
            if missing {
                return Err(ScenarioError(format!("suite {s:?} needs inputs the scenario does not provide")));
            }
        }
        Ok(out)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.mass_sq > 0.0 && self.mass_sq.is_finite()) {
            return Err(ScenarioError(format!("mass_sq must be positive, got {}", self.mass_sq)));
        }
        if let Some(s) = self.tolerance_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(ScenarioError(format!("tolerance_scale must be positive, got {s}")));
            }
        }
        self.selected_suites()?;
        Ok(())
    }

    /// Build every lattice, drawing random metrics from the scenario seed.
    pub fn build_meshes(&self) -> Result<Vec<SpatialMesh>, ScenarioError> {
        let mut rng = LabRng::new(self.seed ^ 0x6d65_7368);
        self.meshes
            .iter()
            .map(|entry| {
                let mut spec = entry.spec.clone();
                if let Some([lo, hi]) = entry.random_metric {
                    let edges = spec.build()?.n_edges();
                    spec.metric = MetricJson::Table((0..edges).map(|_| rng.uniform(lo, hi)).collect());
                }
                Ok(spec.build()?)
            })
            .collect()
    }
}
