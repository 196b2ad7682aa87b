//! Run manifests: the parameters, seed and outputs of one invocation, enough
//! to replay it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use pslab::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// The subcommand's flags after defaults were applied.
    pub parameters: BTreeMap<String, Value>,
    /// Arguments that reproduce the run, seed included.
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// The only field that differs between a run and its replay.
    pub wall_time_ms: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    /// Default location next to a data file: `<out>.manifest.json`.
    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::Resource(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Resource(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Argument(format!("{}: not a run manifest: {e}", path.display())))
    }
}
