use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Serialize)]
struct OutputEntry {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: Option<u64>,
    parameters: &'a Value,
    outputs: &'a [OutputEntry],
}

/// Output directory that records every file it writes in `manifest.json`.
pub struct OutDir {
    root: PathBuf,
    outputs: Vec<OutputEntry>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(root)
            .map_err(|e| Failure::internal(format!("creating {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.root.join(name);
        fs::write(&path, bytes)
            .map_err(|e| Failure::internal(format!("writing {}: {e}", path.display())))?;
        self.outputs.push(OutputEntry {
            file: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|e| Failure::internal(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes the manifest; it holds nothing that varies between identical runs.
    pub fn finish(
        self,
        command: &str,
        seed: Option<u64>,
        parameters: Value,
    ) -> Result<(), Failure> {
        let manifest = Manifest {
            tool: "dgcl",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            parameters: &parameters,
            outputs: &self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Failure::internal(e.to_string()))?;
        text.push('\n');
        let path = self.root.join("manifest.json");
        fs::write(&path, text)
            .map_err(|e| Failure::internal(format!("writing {}: {e}", path.display())))
    }
}
