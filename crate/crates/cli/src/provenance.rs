use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct InputDigest {
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
struct RunRecord<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a C,
    workers: usize,
    inputs: Vec<InputDigest>,
    finished_unix_s: u64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut h = Sha256::new();
    io::copy(&mut f, &mut h).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(h.finalize()))
}

/// Writes `run.json` under `out`.
pub fn write_run_json<C: Serialize>(out: &Path, config: &C, inputs: &[&Path]) -> Result<()> {
    let inputs = inputs
        .iter()
        .map(|p| {
            Ok(InputDigest {
                path: p.to_path_buf(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let record = RunRecord {
        tool: "qbe",
        version: env!("CARGO_PKG_VERSION"),
        config,
        workers: rayon::current_num_threads(),
        inputs,
        finished_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let path = out.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&record)?).with_context(|| format!("writing {}", path.display()))
}
