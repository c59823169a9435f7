//! Report files: a timestamp header, the resolved config, then the body.
//! Everything after the first line is a pure function of the config.

use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use tempfile::NamedTempFile;

use crate::config::ExperimentConfig;

pub const TIMESTAMP_PREFIX: &str = "# generated_at_unix=";
pub const CONFIG_PREFIX: &str = "# config=";

pub fn render(config: &ExperimentConfig, body: &[String]) -> String {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut out = format!("{TIMESTAMP_PREFIX}{now}\n");
    out.push_str(CONFIG_PREFIX);
    out.push_str(&serde_json::to_string(config).expect("config serializes"));
    out.push('\n');
    for line in body {
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial report.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
