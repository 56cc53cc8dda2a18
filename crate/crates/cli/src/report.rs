//! The JSON envelope every command prints.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use wml_core::ModelManifold;

/// Version of `docs/report.schema.json`.
pub const SCHEMA_VERSION: &str = "1.0.0";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldEcho {
    /// `preset:<name>` or the path the document was read from.
    pub source: String,
    pub label: String,
    pub dimension: usize,
    pub g: String,
    pub f: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison_exponent: Option<f64>,
}

impl ManifoldEcho {
    pub fn new(source: impl Into<String>, m: &ModelManifold) -> Self {
        Self {
            source: source.into(),
            label: m.label().to_string(),
            dimension: m.dimension(),
            g: m.g().to_string(),
            f: m.f().to_string(),
            comparison_exponent: m.comparison_exponent(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: String,
    pub tool_version: String,
    pub command: String,
    pub manifold: Option<ManifoldEcho>,
    /// RFC 3339, taken from `SOURCE_DATE_EPOCH` when that is set.
    pub timestamp: String,
    pub seed: Option<u64>,
    /// Command-specific payload; a pure function of the inputs and the seed.
    pub results: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str, manifold: Option<ManifoldEcho>, results: Value) -> Result<Self, String> {
        Ok(Self {
            schema_version: SCHEMA_VERSION.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            manifold,
            timestamp: timestamp()?,
            seed: None,
            results,
            warnings: Vec::new(),
        })
    }
}

pub fn timestamp() -> Result<String, String> {
    let when = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => {
            let secs: i64 = s
                .trim()
                .parse()
                .map_err(|_| format!("SOURCE_DATE_EPOCH must be an integer, got `{s}`"))?;
            DateTime::<Utc>::from_timestamp(secs, 0).ok_or_else(|| format!("SOURCE_DATE_EPOCH out of range: {secs}"))?
        }
        Err(_) => Utc::now(),
    };
    Ok(when.to_rfc3339_opts(SecondsFormat::Secs, true))
}
