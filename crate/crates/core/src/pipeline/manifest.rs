use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::rng::fnv1a64;
use crate::textio::fmt_f64;

/// Run manifest: configuration identity, seeds, every output file with its
/// content checksum, and the headline metrics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    /// Relative path -> content checksum (hex FNV-1a).
    pub files: BTreeMap<String, String>,
    /// Metric name -> value.
    pub metrics: BTreeMap<String, f64>,
}

impl Manifest {
    pub fn new(config_text: &str, seed: u64) -> Self {
        Self {
            config_hash: format!("{:016x}", fnv1a64(config_text.as_bytes())),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            files: BTreeMap::new(),
            metrics: BTreeMap::new(),
        }
    }

    /// Records a file below `root` under its relative path.
    pub fn add_file(&mut self, root: &Path, path: &Path) -> crate::Result<()> {
        let bytes = std::fs::read(path)?;
        let rel = path
            .strip_prefix(root)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        self.files.insert(rel, format!("{:016x}", fnv1a64(&bytes)));
        Ok(())
    }

    /// Records every regular file under `root` except the manifest itself.
    pub fn add_tree(&mut self, root: &Path) -> crate::Result<()> {
        let mut stack = vec![root.to_path_buf()];
        let mut files: Vec<PathBuf> = Vec::new();
        while let Some(dir) = stack.pop() {
            for entry in std::fs::read_dir(&dir)? {
                let entry = entry?;
                let path = entry.path();
                if path.is_dir() {
                    stack.push(path);
                } else if path.file_name().is_some_and(|n| n != "manifest.txt") {
                    files.push(path);
                }
            }
        }
        files.sort();
        for f in files {
            self.add_file(root, &f)?;
        }
        Ok(())
    }

    pub fn set_metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("hyperfit-manifest-v1\n");
        writeln!(s, "config_hash {}", self.config_hash).unwrap();
        writeln!(s, "version {}", self.version).unwrap();
        writeln!(s, "seed {}", self.seed).unwrap();
        for (path, hash) in &self.files {
            writeln!(s, "file {path} {hash}").unwrap();
        }
        for (name, value) in &self.metrics {
            writeln!(s, "metric {name} {}", fmt_f64(*value)).unwrap();
        }
        s
    }

    pub fn write(&self, root: &Path) -> crate::Result<()> {
        std::fs::write(root.join("manifest.txt"), self.to_text())?;
        Ok(())
    }

    pub fn read(root: &Path) -> crate::Result<Self> {
        let path = root.join("manifest.txt");
        let text = std::fs::read_to_string(&path)?;
        let mut out = Manifest::default();
        for (lno, line) in text.lines().enumerate() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["hyperfit-manifest-v1"] | [] => {}
                ["config_hash", h] => out.config_hash = h.to_string(),
                ["version", v] => out.version = v.to_string(),
                ["seed", v] => {
                    out.seed = v
                        .parse()
                        .map_err(|_| crate::Error::parse(&path, lno + 1, "bad seed"))?
                }
                ["file", p, h] => {
                    out.files.insert(p.to_string(), h.to_string());
                }
                ["metric", name, v] => {
                    let value = crate::textio::parse_f64(v)
                        .ok_or_else(|| crate::Error::parse(&path, lno + 1, "bad metric"))?;
                    out.metrics.insert(name.to_string(), value);
                }
                _ => {
                    return Err(crate::Error::parse(
                        &path,
                        lno + 1,
                        format!("unknown manifest line '{line}'"),
                    ))
                }
            }
        }
        Ok(out)
    }
}
