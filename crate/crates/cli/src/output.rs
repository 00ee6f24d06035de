//! Output files stamped with the config hash, and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use bbspectra::grid::GridDomain;
use bbspectra::io::{pgm_bytes_with_comment, to_json, write_atomic, CsvTable, RunLengthMask};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_hash: &'a str,
    config: &'a RunConfig,
    started_unix: f64,
    wall_clock_seconds: f64,
    threads: usize,
    outputs: &'a [OutputFile],
    summary: &'a Value,
}

/// Collects the files of one run. Every file is written atomically.
pub struct Output {
    dir: PathBuf,
    hash: String,
    files: Vec<OutputFile>,
    started: Instant,
    started_unix: f64,
}

pub type IoResult<T> = std::result::Result<T, String>;

impl Output {
    pub fn new(dir: &Path, hash: String) -> IoResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
            files: Vec::new(),
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> IoResult<()> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.files.push(OutputFile {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// JSON object with a leading `config_hash` field.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> IoResult<()> {
        let v = serde_json::to_value(value).map_err(|e| e.to_string())?;
        let mut obj = serde_json::Map::new();
        obj.insert("config_hash".into(), Value::String(self.hash.clone()));
        match v {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let text = to_json(&Value::Object(obj)).map_err(|e| e.to_string())?;
        self.write(name, text.as_bytes())
    }

    /// CSV with a `# config_hash=` comment line above the header.
    pub fn csv(&mut self, name: &str, table: &CsvTable) -> IoResult<()> {
        self.csv_text(name, &table.render())
    }

    pub fn csv_text(&mut self, name: &str, body: &str) -> IoResult<()> {
        let text = format!("# config_hash={}\n{body}", self.hash);
        self.write(name, text.as_bytes())
    }

    /// Favorable-set image: 255 favorable, 128 hostile, 0 outside the domain.
    /// Top row is the largest `y`.
    pub fn mask_pgm(&mut self, name: &str, domain: &GridDomain, favorable: &[bool]) -> IoResult<()> {
        let (w, h, px) = mask_pixels(domain, favorable);
        let bytes = pgm_bytes_with_comment(w, h, Some(&format!("config_hash {}", self.hash)), &px);
        self.write(name, &bytes)
    }

    /// Run-length favorable mask over the full cell box, rows as in the PGM.
    pub fn mask_rle(&mut self, name: &str, domain: &GridDomain, favorable: &[bool]) -> IoResult<()> {
        let (w, h, px) = mask_pixels(domain, favorable);
        let bits: Vec<bool> = px.iter().map(|&p| p == 255).collect();
        #[derive(Serialize)]
        struct Rle {
            spacing: f64,
            lower: [f64; 2],
            top_row_first: bool,
            mask: RunLengthMask,
        }
        let lower = domain.lower();
        let rle = Rle {
            spacing: domain.spacing(),
            lower: [lower[0], lower[1]],
            top_row_first: true,
            mask: RunLengthMask::encode(w, h, &bits),
        };
        self.json(name, &rle)
    }

    /// Writes `manifest.json` last.
    pub fn finish(self, config: &RunConfig, summary: &Value) -> IoResult<PathBuf> {
        let manifest = Manifest {
            tool: "bbspectra",
            version: env!("CARGO_PKG_VERSION"),
            command: config.command.name(),
            config_hash: &self.hash,
            config,
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
            outputs: &self.files,
            summary,
        };
        let text = to_json(&manifest).map_err(|e| e.to_string())?;
        let path = self.dir.join("manifest.json");
        write_atomic(&path, text.as_bytes()).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    }
}

fn mask_pixels(domain: &GridDomain, favorable: &[bool]) -> (usize, usize, Vec<u8>) {
    let [nx, ny, _] = domain.shape();
    let mut px = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let j = ny - 1 - row;
        for i in 0..nx {
            let cell = domain.cell_index([i, j, 0]);
            px.push(match domain.dof_of_cell(cell) {
                Some(d) if favorable[d] => 255,
                Some(_) => 128,
                None => 0,
            });
        }
    }
    (nx, ny, px)
}
