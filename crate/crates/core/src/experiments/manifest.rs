//! Run manifests: everything needed to reproduce an experiment's
//! outputs bit for bit, plus bookkeeping for humans.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;

/// Fixed convention notes stamped into every manifest.
pub const CONVENTIONS: &[&str] = &[
    "one time step = one even-aligned layer followed by one odd-aligned layer of the brickwork",
    "open boundary conditions; mode pairs (1,2),(3,4),... on even layers, (2,3),(4,5),... on odd layers (1-based)",
    "entropies and all logarithms in natural-log units",
    "randomness: ChaCha12 keyed by splitmix64 expansion of the master seed; stream id = purpose<<48 | instance<<24 | shot",
    "stream purposes: 1 circuit, 2 sampling, 3 reference ensemble, 4 baseline",
];

/// Written next to every data.csv. Re-running an experiment from the
/// manifest's config echo reproduces the CSV byte-identically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    /// Resolved configuration (defaults applied, flags merged).
    pub config: ExperimentConfig,
    /// Library version that produced the run.
    pub version: String,
    /// Circuit-purpose stream ids, one per instance.
    pub instance_streams: Vec<u64>,
    /// Headline numbers (fit slopes, aggregate means).
    pub summary: BTreeMap<String, f64>,
    pub wall_clock_seconds: f64,
    pub started_utc: String,
    pub conventions: Vec<String>,
}

impl RunManifest {
    pub fn new(
        config: ExperimentConfig,
        data: &super::RunData,
        wall_clock_seconds: f64,
        started: chrono::DateTime<chrono::Utc>,
    ) -> Self {
        Self {
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            instance_streams: data.instance_streams.clone(),
            summary: data.summary.clone(),
            wall_clock_seconds,
            started_utc: started.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            conventions: CONVENTIONS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let mut summary = BTreeMap::new();
        summary.insert("slope".to_string(), -0.5);
        let m = RunManifest {
            config: ExperimentConfig::new("w1-global"),
            version: "0.1.0".into(),
            instance_streams: vec![1, 2, 3],
            summary,
            wall_clock_seconds: 1.25,
            started_utc: "2026-01-01T00:00:00Z".into(),
            conventions: CONVENTIONS.iter().map(|s| s.to_string()).collect(),
        };
        let back = RunManifest::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back.config, m.config);
        assert_eq!(back.instance_streams, m.instance_streams);
        assert_eq!(back.summary.get("slope"), Some(&-0.5));
        assert_eq!(back.conventions.len(), CONVENTIONS.len());
    }
}
