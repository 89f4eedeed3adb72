//! Machine-readable run manifests and verification reports.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Provenance of a run: command, flags, seed, input digest, version, time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: BTreeMap<String, String>,
    pub seed: u64,
    pub graph_digest: String,
    pub tool_version: String,
    pub wall_time_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, graph_digest: &str) -> Self {
        Self {
            command: command.to_string(),
            flags: BTreeMap::new(),
            seed,
            graph_digest: graph_digest.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: 0.0,
        }
    }

    pub fn flag(mut self, key: &str, value: impl ToString) -> Self {
        self.flags.insert(key.to_string(), value.to_string());
        self
    }
}

/// One verified statement: a bound, a lemma identity, or a reported trend.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// "bound", "lemma", "partition", or "trend".
    pub kind: String,
    pub inputs: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    /// None for trend records, which are reported, not gated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holds: Option<bool>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
}

/// A full verification document: manifest plus per-check records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub manifest: RunManifest,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(manifest: RunManifest) -> Self {
        Self {
            manifest,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
    }

    /// True when every gated check holds.
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds.unwrap_or(true))
    }

    pub fn to_json(&self) -> crate::error::Result<Vec<u8>> {
        Ok(serde_json::to_vec_pretty(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> crate::error::Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }

    /// Plain-table rendering, one line per check.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.holds {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "INFO",
            };
            let bound = c.bound.map_or("-".to_string(), |b| format!("{b:.6e}"));
            let measured = c.measured.map_or("-".to_string(), |m| format!("{m:.6e}"));
            out.push_str(&format!(
                "{status:4}  {name:38} measured={measured:13} bound={bound:13}\n",
                name = c.name
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        let mut report = VerificationReport::new(RunManifest::new("verify", 7, "abc123"));
        let mut inputs = BTreeMap::new();
        inputs.insert("lambda_k_plus_1".into(), 0.5);
        report.push(CheckRecord {
            name: "error-bound".into(),
            kind: "bound".into(),
            inputs,
            bound: Some(0.2),
            measured: Some(0.1),
            holds: Some(true),
            tolerance: 1e-9,
            notes: String::new(),
        });
        let bytes = report.to_json().unwrap();
        let back = VerificationReport::from_json(&bytes).unwrap();
        assert_eq!(back.checks.len(), 1);
        assert!(back.all_hold());
        assert!(back.render_table().contains("PASS"));
    }
}
