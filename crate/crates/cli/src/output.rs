//! Run directory: hash-stamped CSV files plus `metadata.json`.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

pub struct RunDir {
    path: PathBuf,
    hash: String,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(path: &Path, hash: &str) -> Result<Self, String> {
        std::fs::create_dir_all(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
        Ok(Self {
            path: path.to_path_buf(),
            hash: hash.to_string(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes a CSV whose first line is `# config_sha256: <hash>`.
    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), String>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path.join(name);
        let err = |e: &dyn std::fmt::Display| format!("cannot write {}: {e}", path.display());
        let mut file = File::create(&path).map_err(|e| err(&e))?;
        writeln!(file, "# config_sha256: {}", self.hash).map_err(|e| err(&e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header).map_err(|e| err(&e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| err(&e))?;
        }
        w.flush().map_err(|e| err(&e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes `metadata.json`; the timestamp is the only nondeterministic field.
    pub fn finish(self, command: &str, seed: u64, status: &str, results: Value) -> Result<(), String> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_sha256": self.hash,
            "seed": seed,
            "created_unix": created,
            "status": status,
            "files": self.files,
            "results": results,
        });
        let path = self.path.join("metadata.json");
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        std::fs::write(&path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// JSON has no infinities or NaN; those become `null`.
pub fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
