//! Report types and the verdict rule.

use std::collections::BTreeMap;

use serde::Serialize;

use super::config::ScenarioConfig;
use crate::cone::{ConeCertificate, GardingReport};
use crate::geometry::Ball;
use crate::sequences::{ConvergenceTable, PrecompactReport, WeakConvergenceReport};

pub const SCHEMA_VERSION: &str = "1.0";

/// What a scenario is meant to demonstrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// All hypotheses hold and the conclusion follows.
    Theorem,
    /// A hypothesis fails and so does the conclusion.
    Counterexample,
    /// An exact identity or estimate, no limit involved.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One named comparison of a measured value against a threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            threshold,
            passed: value >= threshold,
        }
    }

    /// A yes/no condition, recorded as `value = 1.0` for true.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Hypotheses {
    pub weak_convergence: Option<WeakConvergenceReport>,
    pub precompactness: Option<PrecompactReport>,
    pub cone: Option<ConeCertificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FreezeRow {
    pub k: i64,
    /// `|Σ_ν⟨Q(u_k)φ_ν⟩ − Σ_ν⟨Q_{x_ν}(√φ_ν u_k)⟩|`.
    pub measured: f64,
    /// `γ · L²`.
    pub total_freeze_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FreezingDiagnostics {
    pub gamma: f64,
    pub balls: Vec<Ball>,
    /// Largest Frobenius oscillation of the coefficients over grid nodes of each ball.
    pub grid_oscillation: Vec<f64>,
    /// `sup_k ‖√φ_ν u_k‖_{L²}` per ball.
    pub l_nu: Vec<f64>,
    pub rows: Vec<FreezeRow>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    /// `sup_k ‖u_k‖_{L²}`.
    pub l_sup: Option<f64>,
    pub n_cut: Vec<f64>,
    pub freezing: Option<FreezingDiagnostics>,
    pub extras: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub expectation: Expectation,
    pub weak_convergence: Option<bool>,
    pub precompactness: Option<bool>,
    pub cone_vanishing: Option<bool>,
    pub conclusion: Option<bool>,
    pub theorem_reproduced: bool,
    pub passed: bool,
    pub summary: String,
}

impl Verdict {
    /// The verdict depends only on the hypothesis outcomes, the conclusion
    /// outcome and the checks.
    pub fn decide(
        expectation: Expectation,
        hyps: [Option<bool>; 3],
        conclusion: Option<bool>,
        checks: &[Check],
    ) -> Self {
        let [weak, pre, cone] = hyps;
        let all_hyps = hyps.iter().all(|h| *h == Some(true));
        let theorem_reproduced = expectation == Expectation::Theorem && all_hyps && conclusion == Some(true);
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let summary = match (expectation, passed) {
            (Expectation::Theorem, true) if theorem_reproduced => "hypotheses hold, conclusion holds".to_string(),
            (Expectation::Counterexample, true) => {
                let broken: Vec<&str> = [("weak convergence", weak), ("precompactness", pre), ("cone vanishing", cone)]
                    .iter()
                    .filter(|(_, h)| *h == Some(false))
                    .map(|(n, _)| *n)
                    .collect();
                format!("hypothesis fails ({}), conclusion fails", broken.join(", "))
            }
            (Expectation::Identity, true) => "all identities hold within tolerance".to_string(),
            (_, true) => "checks pass".to_string(),
            (_, false) => format!("failed checks: {}", failed.join(", ")),
        };
        Self {
            expectation,
            weak_convergence: weak,
            precompactness: pre,
            cone_vanishing: cone,
            conclusion,
            theorem_reproduced,
            passed,
            summary,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub scenario: String,
    pub timestamp_unix: u64,
    pub config: ScenarioConfig,
    pub hypotheses: Hypotheses,
    pub garding: Vec<GardingReport>,
    pub table: Option<ConvergenceTable>,
    pub diagnostics: Diagnostics,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
}

impl ExperimentReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_needs_all_hypotheses() {
        let checks = vec![Check::at_most("gap", 0.0, 1.0)];
        let v = Verdict::decide(Expectation::Theorem, [Some(true), Some(true), Some(false)], Some(true), &checks);
        assert!(!v.theorem_reproduced);
        let v = Verdict::decide(Expectation::Theorem, [Some(true), Some(true), Some(true)], Some(true), &checks);
        assert!(v.theorem_reproduced && v.passed);
    }

    #[test]
    fn failed_checks_fail_the_verdict() {
        let checks = vec![Check::at_most("a", 2.0, 1.0), Check::at_least("b", 2.0, 1.0)];
        let v = Verdict::decide(Expectation::Identity, [None; 3], None, &checks);
        assert!(!v.passed);
        assert_eq!(v.summary, "failed checks: a");
        assert!(!Verdict::decide(Expectation::Identity, [None; 3], None, &[]).passed);
    }

    #[test]
    fn counterexample_summary_names_the_broken_hypothesis() {
        let checks = vec![Check::holds("x", true)];
        let v = Verdict::decide(Expectation::Counterexample, [Some(true), Some(true), Some(false)], Some(false), &checks);
        assert_eq!(v.summary, "hypothesis fails (cone vanishing), conclusion fails");
    }
}
