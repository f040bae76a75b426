//! Check records and the JSON report.

use serde::Serialize;
use std::collections::BTreeMap;

/// Version of the report layout; bump on any field change.
pub const SCHEMA_VERSION: u32 = 1;

/// How a residual is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check_id: String,
    pub suite: &'static str,
    /// Name of the identity the check measures.
    pub paper_anchor: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

/// Thresholds after scenario overrides and scaling.
///
/// Only strict upper bounds (`<`) are scaled; exact (`<=`) and lower-bound
/// (`>`) checks keep their value.
#[derive(Debug, Clone)]
pub struct Tolerances {
    pub scale: f64,
    pub overrides: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn check(&self, suite: &'static str, id: &str, anchor: &'static str, residual: f64, default: f64, cmp: Comparison) -> Check {
        let check_id = format!("{suite}.{id}");
        let base = self.overrides.get(&check_id).copied().unwrap_or(default);
        let threshold = if cmp == Comparison::Below { base * self.scale } else { base };
        let pass = match cmp {
            Comparison::Below => residual < threshold,
            Comparison::AtMost => residual <= threshold,
            Comparison::Above => residual > threshold,
        };
        Check { check_id, suite, paper_anchor: anchor, residual, threshold, comparison: cmp, pass }
    }
}

/// Convention record written into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignAudit {
    pub symplectic_bridge: &'static str,
    pub commutator: &'static str,
    pub frequency: &'static str,
    /// Check that fails if the opposite bridge sign is used.
    pub negative_check: &'static str,
}

pub const SIGN_AUDIT: SignAudit = SignAudit {
    symplectic_bridge: "sigma(D G f, D G h) = (G f | h) = -(f | G h)",
    commutator: "omega2(f,h) - omega2(h,f) = i (G_P f | h)",
    frequency: "omega2(f shifted by +tau, h) ~ exp(-i w tau)",
    negative_check: "green.sigma-bridge-opposite",
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub suites: Vec<&'static str>,
    pub sign_audit: SignAudit,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}
