//! Machine-readable envelope for estimator and classifier runs.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Schema version written into every report.
pub const REPORT_SCHEMA: u32 = 1;

/// A self-describing result of one operation run: inputs digest, quantitative
/// outputs, the tolerances that were in force, and the pass/fail verdict.
/// Serialization uses sorted keys throughout, so identical runs produce
/// byte-identical documents; the wall-clock runtime is kept out of the
/// serialized form unless explicitly requested, for the same reason.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub operation: String,
    pub inputs_digest: String,
    pub inputs: BTreeMap<String, Value>,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: BTreeMap<String, Value>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
}

impl AnalysisReport {
    pub fn new(operation: impl Into<String>) -> Self {
        AnalysisReport {
            schema: REPORT_SCHEMA,
            operation: operation.into(),
            inputs_digest: String::new(),
            inputs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            outputs: BTreeMap::new(),
            passed: false,
            seed: None,
            runtime_secs: None,
        }
    }

    pub fn input(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.inputs.insert(key.into(), value.into());
        self
    }

    pub fn tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.into(), value);
        self
    }

    pub fn output(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.outputs.insert(key.into(), value.into());
        self
    }

    pub fn output_json(mut self, key: &str, value: &impl Serialize) -> Self {
        self.outputs.insert(
            key.into(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn passed(mut self, ok: bool) -> Self {
        self.passed = ok;
        self
    }

    /// Fills `inputs_digest` from the canonical JSON of the inputs map.
    pub fn finalize(mut self) -> Self {
        let canon = serde_json::to_string(&self.inputs).unwrap_or_default();
        let mut hasher = Sha256::new();
        hasher.update(self.operation.as_bytes());
        hasher.update(b"\0");
        hasher.update(canon.as_bytes());
        let digest = hasher.finalize();
        self.inputs_digest = format!("{digest:x}");
        self
    }

    pub fn with_runtime(mut self, started: Instant) -> Self {
        self.runtime_secs = Some(started.elapsed().as_secs_f64());
        self
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_else(|_| "{}".into());
        s.push('\n');
        s
    }
}
