//! Output-directory plumbing: CSV writers and the reproducibility manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub type IoResult<T> = std::io::Result<T>;

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> IoResult<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn writer(&mut self, name: &str) -> IoResult<BufWriter<File>> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.written.push(name.to_string());
        Ok(BufWriter::new(File::create(path)?))
    }

    pub fn write_string(&mut self, name: &str, contents: &str) -> IoResult<()> {
        let mut w = self.writer(name)?;
        w.write_all(contents.as_bytes())
    }

    /// Record everything needed to reproduce this run byte for byte.
    pub fn write_manifest(&mut self, config_text: &str, master_seed: u64) -> IoResult<()> {
        let hash = hex_digest(config_text);
        let args: Vec<String> = std::env::args().collect();
        let mut text = String::new();
        text.push_str(&format!("tool = kkqkd {}\n", env!("CARGO_PKG_VERSION")));
        text.push_str(&format!("command = {}\n", args.join(" ")));
        text.push_str(&format!("config_sha256 = {hash}\n"));
        text.push_str(&format!("master_seed = {master_seed}\n"));
        for f in &self.written {
            text.push_str(&format!("output = {f}\n"));
        }
        let mut w = self.writer("manifest.txt")?;
        w.write_all(text.as_bytes())
    }
}

pub fn hex_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Format an optional value, leaving the CSV cell empty when absent.
pub fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}
