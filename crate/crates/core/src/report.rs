//! Serializable report documents with stable field names and deterministic
//! ordering, so identical inputs produce byte-identical output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::filtering_verify::{HorizonReport, SequenceStatus};
use crate::interpretation::{ConsistencyReport, Verdict};
use crate::rational::format_rat;

/// Version string stamped into every report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationDoc {
    pub y: String,
    pub s: String,
    pub y_next: String,
    pub h: String,
    pub lhs: String,
    pub rhs: String,
}

/// The serialized form of a consistency check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub checker: String,
    pub verdict: String,
    pub constraint_count: u64,
    pub violations: Vec<ViolationDoc>,
    pub impossible_inputs: BTreeMap<String, Vec<String>>,
    pub unconstrained_states: Vec<String>,
}

fn verdict_str(verdict: Verdict) -> String {
    match verdict {
        Verdict::Consistent => "consistent".to_string(),
        Verdict::Inconsistent => "inconsistent".to_string(),
    }
}

impl ReportDocument {
    pub fn from_consistency(checker: &str, report: &ConsistencyReport) -> Self {
        ReportDocument {
            tool_version: TOOL_VERSION.to_string(),
            checker: checker.to_string(),
            verdict: verdict_str(report.verdict),
            constraint_count: report.checked_constraints,
            violations: report
                .violations
                .iter()
                .map(|v| ViolationDoc {
                    y: v.y.clone(),
                    s: v.s.clone(),
                    y_next: v.y_next.clone(),
                    h: v.h.clone(),
                    lhs: format_rat(&v.lhs),
                    rhs: format_rat(&v.rhs),
                })
                .collect(),
            impossible_inputs: report
                .impossible_inputs
                .iter()
                .map(|(y, inputs)| (y.clone(), inputs.iter().cloned().collect()))
                .collect(),
            unconstrained_states: Vec::new(),
        }
    }

    pub fn with_unconstrained(mut self, states: impl IntoIterator<Item = String>) -> Self {
        self.unconstrained_states = states.into_iter().collect();
        self.unconstrained_states.sort();
        self
    }

    pub fn is_consistent(&self) -> bool {
        self.verdict == "consistent"
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes infallibly");
        text.push('\n');
        text
    }

    /// Aligned human-readable rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("checker:     {}\n", self.checker));
        out.push_str(&format!("verdict:     {}\n", self.verdict));
        out.push_str(&format!("constraints: {}\n", self.constraint_count));
        if !self.impossible_inputs.is_empty() {
            out.push_str("subjectively impossible inputs:\n");
            for (y, inputs) in &self.impossible_inputs {
                out.push_str(&format!("  {y}: {{{}}}\n", inputs.join(", ")));
            }
        }
        if !self.unconstrained_states.is_empty() {
            out.push_str(&format!(
                "unconstrained states: {}\n",
                self.unconstrained_states.join(", ")
            ));
        }
        if !self.violations.is_empty() {
            out.push_str(&format!("violations ({}):\n", self.violations.len()));
            for v in &self.violations {
                out.push_str(&format!(
                    "  (y={}, s={}, y'={}, h={})  lhs={}  rhs={}\n",
                    v.y, v.s, v.y_next, v.h, v.lhs, v.rhs
                ));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceDoc {
    pub state: String,
    pub sequence: Vec<String>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceViolationDoc {
    pub state: String,
    pub sequence: Vec<String>,
    pub h: String,
    pub lhs: String,
    pub rhs: String,
}

/// The serialized form of an n-step conditional check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonDocument {
    pub tool_version: String,
    pub checker: String,
    pub horizon: usize,
    pub verdict: String,
    pub asserted: bool,
    pub constraint_count: u64,
    pub violations: Vec<SequenceViolationDoc>,
    pub sequences: Vec<SequenceDoc>,
}

impl HorizonDocument {
    pub fn from_horizon(report: &HorizonReport) -> Self {
        HorizonDocument {
            tool_version: TOOL_VERSION.to_string(),
            checker: "filtering-conditional".to_string(),
            horizon: report.horizon,
            verdict: verdict_str(report.verdict),
            asserted: report.asserted,
            constraint_count: report.checked_constraints,
            violations: report
                .violations
                .iter()
                .map(|v| SequenceViolationDoc {
                    state: v.state.clone(),
                    sequence: v.sequence.clone(),
                    h: v.h.clone(),
                    lhs: format_rat(&v.lhs),
                    rhs: format_rat(&v.rhs),
                })
                .collect(),
            sequences: report
                .sequences
                .iter()
                .map(|r| SequenceDoc {
                    state: r.state.clone(),
                    sequence: r.sequence.clone(),
                    status: match r.status {
                        SequenceStatus::Checked => "checked".to_string(),
                        SequenceStatus::Unconstrained => "unconstrained".to_string(),
                    },
                })
                .collect(),
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.verdict == "consistent"
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes infallibly");
        text.push('\n');
        text
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("checker:     {}\n", self.checker));
        out.push_str(&format!("horizon:     {}\n", self.horizon));
        out.push_str(&format!("verdict:     {}\n", self.verdict));
        if !self.asserted {
            out.push_str("note:        informational only (stochastic machine)\n");
        }
        out.push_str(&format!("constraints: {}\n", self.constraint_count));
        let unconstrained = self
            .sequences
            .iter()
            .filter(|s| s.status == "unconstrained")
            .count();
        out.push_str(&format!(
            "sequences:   {} total, {} checked, {} unconstrained\n",
            self.sequences.len(),
            self.sequences.len() - unconstrained,
            unconstrained
        ));
        for v in &self.violations {
            out.push_str(&format!(
                "  violation at (y={}, seq=[{}], h={})  lhs={}  rhs={}\n",
                v.state,
                v.sequence.join(","),
                v.h,
                v.lhs,
                v.rhs
            ));
        }
        out
    }
}
