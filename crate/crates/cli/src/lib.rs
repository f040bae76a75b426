//! Scenario runner for the Proca laboratory: suites, reports and CSV dumps.

pub mod dump;
pub mod report;
pub mod scenario;
pub mod suites;

use rayon::prelude::*;
use report::{Report, Tolerances, SCHEMA_VERSION, SIGN_AUDIT};
use scenario::{Scenario, ScenarioError};

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub suites: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut sc: Scenario) -> Result<Scenario, ScenarioError> {
        if let Some(s) = &self.suites {
            sc.suites = s.clone();
        }
        if let Some(seed) = self.seed {
            sc.seed = seed;
        }
        if let Some(t) = self.tolerance_scale {
            sc.tolerance_scale = Some(t);
        }
        // Re-validate with the overrides in place.
        Scenario::parse(&serde_json::to_string(&sc).expect("scenario serializes"))
    }
}

/// Worker count from `PROCA_LAB_THREADS`, or rayon's default when unset.
pub fn thread_count() -> Result<Option<usize>, ScenarioError> {
    match std::env::var("PROCA_LAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| ScenarioError(format!("PROCA_LAB_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Run every selected suite; suites execute in parallel, checks keep suite order.
pub fn run_scenario(sc: &Scenario) -> Result<Report, ScenarioError> {
    let suites = sc.selected_suites()?;
    let ctx = suites::Context {
        scenario: sc,
        meshes: sc.build_meshes()?,
        tolerances: Tolerances { scale: sc.tolerance_scale.unwrap_or(1.0), overrides: sc.tolerances.clone() },
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| ScenarioError(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| suites.par_iter().map(|s| suites::run_suite(s, &ctx)).collect());
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        scenario: sc.name.clone(),
        seed: sc.seed,
        tolerance_scale: ctx.tolerances.scale,
        suites,
        sign_audit: SIGN_AUDIT,
        checks,
        all_pass,
    })
}
