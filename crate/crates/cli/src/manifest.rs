use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.txt";

/// Record of one invocation: what ran, when, how it ended, and a checksum
/// for every file it wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_echo: String,
    pub version: String,
    pub start_unix: f64,
    pub end_unix: f64,
    pub halt: String,
    /// File names relative to the run directory with their SHA-256 digests.
    pub files: Vec<(String, String)>,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

impl RunManifest {
    pub fn new(command: &str, config_echo: String) -> Self {
        Self {
            command: command.to_string(),
            config_echo,
            version: env!("CARGO_PKG_VERSION").to_string(),
            start_unix: unix_now(),
            end_unix: f64::NAN,
            halt: String::new(),
            files: Vec::new(),
        }
    }

    /// Checksums `names` inside `dir`, stamps the end time and writes the
    /// manifest next to them.
    pub fn finish(mut self, dir: &Path, names: &[String], halt: &str) -> std::io::Result<PathBuf> {
        self.halt = halt.to_string();
        self.files = names.iter().map(|n| Ok((n.clone(), sha256_file(&dir.join(n))?))).collect::<std::io::Result<_>>()?;
        self.end_unix = unix_now();
        let path = dir.join(MANIFEST_NAME);
        std::fs::write(&path, self.to_text())?;
        Ok(path)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "start_unix = {:.3}", self.start_unix);
        let _ = writeln!(s, "end_unix = {:.3}", self.end_unix);
        let _ = writeln!(s, "halt = {}", self.halt);
        for (name, digest) in &self.files {
            let _ = writeln!(s, "file = {digest}  {name}");
        }
        s.push_str("[config]\n");
        s.push_str(&self.config_echo);
        s
    }

    pub fn parse(text: &str) -> Option<Self> {
        let (head, config) = text.split_once("[config]\n")?;
        let mut m = RunManifest::new("", config.to_string());
        for line in head.lines() {
            let (k, v) = line.split_once(" = ")?;
            match k {
                "command" => m.command = v.to_string(),
                "version" => m.version = v.to_string(),
                "start_unix" => m.start_unix = v.parse().ok()?,
                "end_unix" => m.end_unix = v.parse().ok()?,
                "halt" => m.halt = v.to_string(),
                "file" => {
                    let (digest, name) = v.split_once("  ")?;
                    m.files.push((name.to_string(), digest.to_string()));
                }
                _ => return None,
            }
        }
        Some(m)
    }
}

/// True when the manifest in `dir` lists only existing files whose
/// checksums match.
pub fn verify_manifest(dir: &Path) -> std::io::Result<bool> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let Some(m) = RunManifest::parse(&text) else {
        return Ok(false);
    };
    for (name, digest) in &m.files {
        match sha256_file(&dir.join(name)) {
            Ok(d) if &d == digest => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}
