//! Output files: a `#` metadata header line followed by CSV or JSON, written
//! all-or-nothing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance recorded on the first line of every output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub seed: u64,
    pub config_hash: String,
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(seed: u64, config_hash: impl Into<String>) -> Self {
        Self { seed, config_hash: config_hash.into(), extra: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.extra.push((key.into(), value.into()));
        self
    }

    pub fn header(&self) -> String {
        let mut h = format!("# didkit {VERSION} seed={} config=sha256:{}", self.seed, self.config_hash);
        for (k, v) in &self.extra {
            h.push_str(&format!(" {k}={v}"));
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub body: Vec<u8>,
    /// Key-value pairs appended to this file's header.
    pub extra: Vec<(String, String)>,
}

impl OutputFile {
    pub fn new(name: impl Into<String>, body: Vec<u8>) -> Self {
        Self { name: name.into(), body, extra: Vec::new() }
    }

    pub fn csv<T: Serialize>(name: impl Into<String>, rows: &[T]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let body = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(Self::new(name, body))
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self> {
        let mut body = serde_json::to_vec_pretty(value)?;
        body.push(b'\n');
        Ok(Self::new(name, body))
    }
}

/// Writes every file under `dir` via temporary names, renaming only once all
/// of them are on disk.
pub fn write_outputs(dir: &Path, meta: &Metadata, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut staged = Vec::new();
    let result = (|| {
        for f in files {
            let tmp = dir.join(format!(".{}.tmp", f.name));
            let mut m = meta.clone();
            m.extra.extend(f.extra.iter().cloned());
            let mut bytes = m.header().into_bytes();
            bytes.push(b'\n');
            bytes.extend_from_slice(&f.body);
            fs::write(&tmp, bytes)?;
            staged.push((tmp, dir.join(&f.name)));
        }
        Ok(())
    })();
    if let Err(e) = result {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e);
    }
    let mut out = Vec::new();
    for (tmp, dst) in staged {
        fs::rename(&tmp, &dst)?;
        out.push(dst);
    }
    Ok(out)
}

/// Drops a leading `#` header line, if any.
pub fn strip_header(text: &str) -> &str {
    match text.strip_prefix('#') {
        Some(rest) => rest.split_once('\n').map_or("", |(_, body)| body),
        None => text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let meta = Metadata::new(7, "abc").with("rng", "ChaCha20");
        let files = vec![OutputFile::csv("a.csv", &[(1, 2.5)]).unwrap(), OutputFile::new("b.txt", b"x\n".to_vec())];
        let paths = write_outputs(dir.path(), &meta, &files).unwrap();
        assert_eq!(paths.len(), 2);
        let a = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(a, format!("# didkit {VERSION} seed=7 config=sha256:abc rng=ChaCha20\n1,2.5\n"));
        assert_eq!(strip_header(&a), "1,2.5\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
    }
}
