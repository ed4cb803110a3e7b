//! JSON reports emitted by the verification checks.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of one quantitative check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Value,
    pub observed: Value,
    pub bound_or_expected: Value,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports are always serializable")
    }
}
