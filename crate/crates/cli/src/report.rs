//! Versioned JSON report envelope.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Value,
    pub master_seed: Option<u64>,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub manifest: RunManifest,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec<f64>>>,
}

/// What a subcommand hands back before the envelope is built.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub master_seed: Option<u64>,
    pub columns: Vec<String>,
    pub samples: Option<Vec<Vec<f64>>>,
}
