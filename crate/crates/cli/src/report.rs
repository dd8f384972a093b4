use std::collections::BTreeMap;

use phi_inclusion::HypothesisReport;
use serde::Serialize;

use crate::commands::{AnalysisReport, ConvergenceReport, SolveSection};
use crate::config::ProblemConfig;

/// Top-level JSON report; absent sections are omitted.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config_echo: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<HypothesisReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceReport>,
}

impl Report {
    pub fn new(cfg: &ProblemConfig) -> Self {
        Self { config_echo: cfg.echo(), analysis: None, hypotheses: None, solve: None, convergence: None }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
