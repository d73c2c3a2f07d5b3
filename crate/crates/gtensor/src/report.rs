//! Structured run reports: every command emits one, either as text or JSON.
//! Re-running a command with identical inputs reproduces the numeric payload
//! bit for bit; only the timing field varies.

use serde::Serialize;

use crate::exponents::OmegaTable;

pub const REPORT_SCHEMA: &str = "gtensor-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct DerivationReport {
    pub schema: &'static str,
    pub command: String,
    pub inputs: serde_json::Value,
    /// The exponent table in effect, embedded so bounds are self-describing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_table: Option<String>,
    pub result: serde_json::Value,
    pub elapsed_ms: u128,
}

impl DerivationReport {
    pub fn new(
        command: &str,
        inputs: serde_json::Value,
        table: Option<&OmegaTable>,
        result: serde_json::Value,
        elapsed: std::time::Duration,
    ) -> DerivationReport {
        DerivationReport {
            schema: REPORT_SCHEMA,
            command: command.to_string(),
            inputs,
            omega_table: table.map(crate::exponents::write_omega_table),
            result,
            elapsed_ms: elapsed.as_millis(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_serialize_and_round_trip() {
        let r = DerivationReport::new(
            "bound",
            serde_json::json!({"d": 4}),
            Some(&OmegaTable::shipped_default()),
            serde_json::json!({"value": "2.32"}),
            std::time::Duration::from_millis(5),
        );
        let text = r.to_json();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["schema"], REPORT_SCHEMA);
        assert_eq!(value["inputs"]["d"], 4);
        assert!(value["omega_table"].as_str().unwrap().contains("tau 4"));
    }
}
