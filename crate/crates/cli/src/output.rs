//! Files written by a run: data CSVs with `.meta` sidecars, `metadata.txt`
//! and a flat `summary.txt`.
//!
//! Nothing written here depends on wall-clock time, thread count or the
//! output path, so identical configurations give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest decimal text that reads back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn config_hash(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

pub struct Artifacts {
    dir: PathBuf,
    command: String,
    seed: u64,
    config_hash: String,
    files: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(dir: &Path, command: &str, seed: u64, source: &str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            seed,
            config_hash: config_hash(source),
            files: Vec::new(),
        })
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    pub fn into_files(self) -> Vec<PathBuf> {
        self.files
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        let mut file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        file.write_all(bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    fn key_values(pairs: &[(String, String)]) -> String {
        pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Writes `name` from a header and rows, plus `name.meta` carrying the
    /// seed, config hash and `extra`.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>], extra: &[(String, String)]) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(row)?;
        }
        let bytes = writer.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.write(name, &bytes)?;
        let mut meta = vec![
            ("file".to_string(), name.to_string()),
            ("command".to_string(), self.command.clone()),
            ("seed".to_string(), self.seed.to_string()),
            ("config_sha256".to_string(), self.config_hash.clone()),
            ("version".to_string(), VERSION.to_string()),
        ];
        meta.extend_from_slice(extra);
        self.write(&format!("{name}.meta"), Self::key_values(&meta).as_bytes())
    }

    pub fn metadata(&mut self, settings: &[(String, String)], source: &str) -> Result<()> {
        let mut pairs = vec![
            ("tool".to_string(), "spectral-fields".to_string()),
            ("version".to_string(), VERSION.to_string()),
            ("command".to_string(), self.command.clone()),
            ("seed".to_string(), self.seed.to_string()),
            ("config_sha256".to_string(), self.config_hash.clone()),
        ];
        pairs.extend_from_slice(settings);
        let mut text = Self::key_values(&pairs);
        text.push_str("\n# configuration as given\n");
        text.push_str(source);
        if !source.ends_with('\n') {
            text.push('\n');
        }
        self.write("metadata.txt", text.as_bytes())
    }

    pub fn summary(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut all = vec![
            ("command".to_string(), self.command.clone()),
            ("seed".to_string(), self.seed.to_string()),
            ("config_sha256".to_string(), self.config_hash.clone()),
        ];
        all.extend_from_slice(pairs);
        self.write("summary.txt", Self::key_values(&all).as_bytes())
    }
}

/// `(key, value)` pair with a displayable value.
pub fn kv(key: impl Into<String>, value: impl ToString) -> (String, String) {
    (key.into(), value.to_string())
}
