use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub started: String,
    pub finished: String,
    pub config: &'a serde_json::Value,
    pub outcome: &'a serde_json::Value,
    pub files: &'a [FileEntry],
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// The only writer into one run directory; every file it writes is
/// recorded for the manifest.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::resource(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::resource(format!("cannot write {}: {e}", path.display())))?;
        let digest = Sha256::digest(bytes);
        let entry = FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        };
        // rewriting a file replaces its entry
        self.files.retain(|f| f.path != name);
        self.files.push(entry);
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_vec_pretty(value)
            .map_err(|e| CliError::resource(format!("cannot serialize {name}: {e}")))?;
        text.push(b'\n');
        self.write_bytes(name, &text)
    }

    /// Writes a CSV with the given header; rows are already formatted cells.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_err = |e: csv::Error| CliError::resource(format!("cannot format {name}: {e}"));
        w.write_record(header).map_err(to_err)?;
        for r in rows {
            w.write_record(r).map_err(to_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::resource(format!("cannot format {name}: {e}")))?;
        self.write_bytes(name, &bytes)
    }

    /// Two-column `(t, value)` trace.
    pub fn write_trace(&mut self, name: &str, times: &[f64], values: &[f64]) -> Result<PathBuf, CliError> {
        let rows: Vec<Vec<String>> = times
            .iter()
            .zip(values)
            .map(|(t, v)| vec![fmt_real(*t), fmt_real(*v)])
            .collect();
        self.write_csv(name, &["t", "value"], &rows)
    }

    /// Writes the manifest last; it is not listed in itself.
    pub fn finish(&self, manifest: &RunManifest) -> Result<PathBuf, CliError> {
        let path = self.root.join(MANIFEST_NAME);
        let mut text = serde_json::to_vec_pretty(manifest)
            .map_err(|e| CliError::resource(format!("cannot serialize manifest: {e}")))?;
        text.push(b'\n');
        fs::write(&path, text).map_err(|e| CliError::resource(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_seventeen_digits() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_real(-2.0), "-2.0000000000000000e0");
        let x = 1.0 / 3.0;
        assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        assert_eq!(fmt_real(f64::INFINITY), "inf");
    }

    #[test]
    fn files_are_digested() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = RunDir::create(dir.path()).unwrap();
        run.write_bytes("a.txt", b"abc").unwrap();
        assert_eq!(
            run.files()[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        run.write_bytes("a.txt", b"abcd").unwrap();
        assert_eq!(run.files().len(), 1);
        assert_eq!(run.files()[0].bytes, 4);
    }
}
