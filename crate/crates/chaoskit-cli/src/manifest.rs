//! Run manifests: every artifact file gets a side-by-side
//! `<name>.manifest.json` recording the exact command line, the resolved
//! configuration, seeds, library version, and wall clock, which is
//! enough to reproduce the artifact bit-for-bit.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    /// Exact argv of the invocation.
    pub command: Vec<String>,
    /// Resolved configuration after defaulting.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub generator: &'static str,
    pub library: LibraryInfo,
    /// Unix epoch seconds at completion (informational; not part of the
    /// reproducibility contract).
    pub wall_clock_unix: u64,
    pub duration_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct LibraryInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl RunManifest {
    pub fn capture(config: serde_json::Value, seed: Option<u64>, started: std::time::Instant) -> Self {
        RunManifest {
            command: std::env::args().collect(),
            config,
            seed,
            generator: chaoskit::hermite::GENERATOR_ID,
            library: LibraryInfo {
                name: "chaoskit",
                version: env!("CARGO_PKG_VERSION"),
            },
            wall_clock_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            duration_ms: started.elapsed().as_millis(),
        }
    }
}

/// `result.json -> result.manifest.json`; non-`.json` names get the
/// suffix appended.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    match artifact.extension().and_then(|e| e.to_str()) {
        Some("json") => artifact.with_extension("manifest.json"),
        _ => {
            let mut name = artifact.as_os_str().to_owned();
            name.push(".manifest.json");
            PathBuf::from(name)
        }
    }
}

pub fn write_artifact(
    path: &Path,
    body: &str,
    manifest: &RunManifest,
) -> std::io::Result<()> {
    let mut text = body.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    std::fs::write(path, text)?;
    let manifest_text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(manifest_path(path), manifest_text + "\n")?;
    Ok(())
}
