use std::time::{SystemTime, UNIX_EPOCH};

use logshrink::simulation::RNG_ALGORITHM;
use serde::Serialize;

/// Provenance written alongside every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub grid: Option<Vec<f64>>,
    pub rng: &'static str,
    pub threads: usize,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunMetadata {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>, grid: Option<Vec<f64>>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config,
            seed,
            grid,
            rng: RNG_ALGORITHM,
            threads: rayon::current_num_threads(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }
}
