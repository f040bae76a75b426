//! Verification suites. Each suite is deterministic given the scenario seed.

pub(crate) mod cauchy;
pub(crate) mod complex;
pub(crate) mod green;
pub(crate) mod moller;
pub(crate) mod spectral;
pub(crate) mod states;

use crate::report::{Check, Tolerances};
use crate::scenario::{Scenario, ScenarioError};
use proca_lab_core::mesh::SpatialMesh;
use proca_lab_core::rng::LabRng;

/// Everything a suite needs besides the scenario itself.
pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub meshes: Vec<SpatialMesh>,
    pub tolerances: Tolerances,
}

impl Context<'_> {
    /// Generator for one suite; salting keeps suites independent of run order.
    pub fn rng(&self, salt: u64) -> LabRng {
        LabRng::new(self.scenario.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
    }
}

pub fn run_suite(name: &str, ctx: &Context) -> Result<Vec<Check>, ScenarioError> {
    let out = match name {
        "complex" => complex::run(ctx),
        "spectral" => spectral::run(ctx),
        "cauchy" => cauchy::run(ctx),
        "green" => green::run(ctx),
        "moller" => moller::run(ctx),
        "states" => states::run(ctx),
        other => return Err(ScenarioError(format!("unknown suite {other:?}"))),
    };
    out.map_err(|e| ScenarioError(format!("suite {name}: {e}")))
}

/// Relative difference `|a − b| / max(|a|, |b|, floor)`.
pub(crate) fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// A metric that is the same constant on every edge with equal spacings.
pub(crate) fn is_uniform(mesh: &SpatialMesh) -> bool {
    let h = mesh.edge_metric();
    let s = mesh.spacing();
    h.iter().all(|&v| v == h[0]) && s.iter().all(|&v| v == s[0])
}
