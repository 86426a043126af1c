//! Run manifests: enough provenance to replay any data-producing command
//! and verify its outputs byte for byte.

use ellwalk::WalkSpec;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<WalkSpec>,
    pub seed: u64,
    pub command: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputDigest>,
}

/// Collects timing while a command runs, then digests its outputs.
pub struct ManifestBuilder {
    spec: Option<WalkSpec>,
    seed: u64,
    started: SystemTime,
}

impl ManifestBuilder {
    pub fn new(spec: Option<WalkSpec>, seed: u64) -> Self {
        ManifestBuilder { spec, seed, started: SystemTime::now() }
    }

    /// Digests `outputs` (by reading the files back) and writes the manifest
    /// next to the first output as `<path>.manifest.json`.
    pub fn write(self, outputs: &[PathBuf]) -> std::io::Result<PathBuf> {
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            spec: self.spec,
            seed: self.seed,
            command: command_line(),
            started: humantime::format_rfc3339_seconds(self.started).to_string(),
            finished: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
            outputs: outputs
                .iter()
                .map(|p| {
                    Ok(OutputDigest {
                        path: p.display().to_string(),
                        sha256: sha256_file(p)?,
                    })
                })
                .collect::<std::io::Result<Vec<_>>>()?,
        };
        let path = manifest_path(&outputs[0]);
        let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        serde_json::to_writer_pretty(&mut file, &manifest)?;
        writeln!(file)?;
        Ok(path)
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
