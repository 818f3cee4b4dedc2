//! File emission with digests, fixed float formatting and rollback.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// One emitted file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Writes files under a root directory and remembers what it created so a
/// failed run can be undone.
#[derive(Debug)]
pub struct OutputSet {
    root: PathBuf,
    files: Vec<FileRecord>,
    created_dirs: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            files: Vec::new(),
            created_dirs: Vec::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    fn ensure_dir(&mut self, dir: &Path) -> Result<()> {
        let mut missing = Vec::new();
        let mut d = Some(dir);
        while let Some(p) = d {
            if p.as_os_str().is_empty() || p.exists() {
                break;
            }
            missing.push(p.to_path_buf());
            d = p.parent();
        }
        for p in missing.into_iter().rev() {
            fs::create_dir(&p)?;
            self.created_dirs.push(p);
        }
        Ok(())
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            self.ensure_dir(parent)?;
        }
        // record before writing so a half-written file is still cleaned up
        self.files.push(FileRecord {
            path: rel.to_owned(),
            sha256: sha256_hex(bytes),
        });
        fs::write(&path, bytes)?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| crate::Error::Io(format!("serializing {rel}: {e}")))?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// `t,value` rows.
    pub fn write_series(&mut self, rel: &str, times: &[f64], values: &[f64]) -> Result<()> {
        let mut s = String::from("t,value\n");
        for (t, v) in times.iter().zip(values) {
            let _ = writeln!(s, "{},{}", format_float(*t), format_float(*v));
        }
        self.write(rel, s.as_bytes())
    }

    /// Removes every file and directory this set created, newest first.
    pub fn rollback(self) {
        for f in self.files.iter().rev() {
            let _ = fs::remove_file(self.root.join(&f.path));
        }
        for d in self.created_dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.0,
            -1.5,
            1.0 / 3.0,
            1e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            0.1 + 0.2,
        ] {
            assert_eq!(
                format_float(x).parse::<f64>().unwrap().to_bits(),
                x.to_bits()
            );
        }
    }

    #[test]
    fn digest_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn rollback_removes_created_tree() {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().join("out");
        let mut set = OutputSet::new(&root);
        set.write("a/b.csv", b"x").unwrap();
        set.write("c.json", b"{}").unwrap();
        assert!(root.join("a/b.csv").exists());
        set.rollback();
        assert!(!root.exists());
    }
}
