//! Scenario-driven simulation: config schema, the deterministic run
//! loop, and the metrics/trace output contract.

pub mod engine;
pub mod metrics;
pub mod scenario;
pub mod trace;

pub use engine::{run_scenario, substream, RunOutput, StepRecord};
pub use metrics::{Metrics, CSV_HEADER};
pub use scenario::{RunMode, ScenarioConfig};
pub use trace::Trace;

use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// Write a finished run to `<out_root>/<name>-seed<seed>-<mode>/`:
/// `metrics.csv`, `trace.log`, and for KNOWLEDGE runs `map.db` with the
/// fingerprint cells the run accumulated. Returns the directory path.
pub fn write_run_dir(out_root: &Path, cfg: &ScenarioConfig, out: &RunOutput) -> Result<PathBuf> {
    let dir = out_root.join(format!(
        "{}-seed{}-{}",
        cfg.name,
        cfg.seed,
        cfg.mode.as_str().to_lowercase()
    ));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::invalid(format!("cannot create {}: {e}", dir.display())))?;
    let put = |name: &str, body: &str| -> Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, body)
            .map_err(|e| Error::invalid(format!("cannot write {}: {e}", p.display())))
    };
    put("metrics.csv", &out.metrics.to_csv())?;
    put("trace.log", &out.trace.render())?;
    if let Some(map) = &out.map_text {
        put("map.db", map)?;
    }
    Ok(dir)
}
