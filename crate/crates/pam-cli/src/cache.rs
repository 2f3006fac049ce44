//! Result cache keyed by command and config hash.
//!
//! Each entry is a directory holding the artifacts of one run. Writes go
//! to a temporary sibling directory first and are published with a single
//! rename, so concurrent runs never observe a half-written entry.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{CliError, Result};

/// Cache root: `PAM_LAB_CACHE`, else `~/.cache/pam-lab`, else a
/// system-temp fallback.
pub fn cache_root() -> PathBuf {
    if let Some(dir) = std::env::var_os("PAM_LAB_CACHE") {
        return PathBuf::from(dir);
    }
    if let Some(home) = std::env::var_os("HOME") {
        return Path::new(&home).join(".cache").join("pam-lab");
    }
    std::env::temp_dir().join("pam-lab-cache")
}

pub fn entry_dir(root: &Path, command_slug: &str, config_hash: &str) -> PathBuf {
    root.join(format!("{command_slug}-{config_hash}"))
}

/// The artifact set of one run, by file name.
pub type Artifacts = Vec<(String, String)>;

pub fn lookup(entry: &Path) -> Option<Artifacts> {
    let names = ["result.jsonl", "table.csv", "plot.gp"];
    if !entry.join("result.jsonl").is_file() {
        return None;
    }
    let mut artifacts = Vec::new();
    for name in names {
        let path = entry.join(name);
        if path.is_file() {
            let text = std::fs::read_to_string(&path).ok()?;
            artifacts.push((name.to_string(), text));
        }
    }
    Some(artifacts)
}

pub fn store(entry: &Path, artifacts: &Artifacts) -> Result<()> {
    let parent = entry
        .parent()
        .ok_or_else(|| CliError::Io("cache entry has no parent directory".into()))?;
    std::fs::create_dir_all(parent).map_err(|e| CliError::Io(e.to_string()))?;
    let nonce = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    let staging = parent.join(format!(
        ".tmp-{}-{nonce}",
        entry.file_name().and_then(|n| n.to_str()).unwrap_or("entry")
    ));
    std::fs::create_dir_all(&staging).map_err(|e| CliError::Io(e.to_string()))?;
    for (name, text) in artifacts {
        std::fs::write(staging.join(name), text).map_err(|e| CliError::Io(e.to_string()))?;
    }
    match std::fs::rename(&staging, entry) {
        Ok(()) => Ok(()),
        Err(_) if entry.is_dir() => {
            // Another run published the same entry first; keep theirs.
            let _ = std::fs::remove_dir_all(&staging);
            Ok(())
        }
        Err(e) => {
            let _ = std::fs::remove_dir_all(&staging);
            Err(CliError::Io(e.to_string()))
        }
    }
}
