//! Files written by a run: NDJSON diagnostics, the JSON report and binary
//! field snapshots. Every file goes through a temp file in the target
//! directory and is renamed into place, so readers never see a partial
//! file.

use std::io::Write;
use std::path::{Path, PathBuf};

use moyal_core::Distribution;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::EngineKind;
use crate::error::{LabError, LabResult};

/// One NDJSON line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record<'a> {
    pub t: f64,
    pub engine: &'a str,
    pub diagnostic: &'a str,
    pub value: f64,
}

pub fn create_dir(dir: &Path) -> LabResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

/// Writes `bytes` to `path` via a sibling temp file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> LabResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    create_dir(dir)?;
    let mut tmp = tempfile::Builder::new()
        .prefix(".moyal-")
        .tempfile_in(dir)
        .map_err(|e| LabError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| LabError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| LabError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| LabError::io(path, e.error))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Sidecar of a snapshot: everything needed to read the raw file back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub format: String,
    pub engine: EngineKind,
    pub step: u64,
    pub time: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
    /// Element `(i, j)` sits at offset `8·(i·n_p + j)`.
    pub layout: String,
    pub sha256: String,
}

pub const SNAPSHOT_FORMAT: &str = "f64-le";
pub const SNAPSHOT_LAYOUT: &str = "x-major";

pub fn snapshot_bytes(dist: &Distribution) -> Vec<u8> {
    dist.values().iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Writes `<engine>-<step>.bin` and its `.json` sidecar under `dir`;
/// returns the binary path.
pub fn write_snapshot(dir: &Path, engine: EngineKind, step: u64, time: f64, dist: &Distribution) -> LabResult<PathBuf> {
    let bytes = snapshot_bytes(dist);
    let g = dist.grid();
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT.into(),
        engine,
        step,
        time,
        x_min: g.x_min(),
        x_max: g.x_max(),
        n_x: g.n_x(),
        p_min: g.p_min(),
        p_max: g.p_max(),
        n_p: g.n_p(),
        layout: SNAPSHOT_LAYOUT.into(),
        sha256: sha256_hex(&bytes),
    };
    let stem = format!("{engine}-{step:08}");
    let bin = dir.join(format!("{stem}.bin"));
    write_atomic(&bin, &bytes)?;
    let json = serde_json::to_vec_pretty(&header).expect("header serialises");
    write_atomic(&dir.join(format!("{stem}.json")), &json)?;
    Ok(bin)
}

/// Reads a snapshot back and checks it against its sidecar.
pub fn read_snapshot(bin: &Path) -> LabResult<(SnapshotHeader, Vec<f64>)> {
    let side = bin.with_extension("json");
    let text = std::fs::read_to_string(&side).map_err(|e| LabError::io(&side, e))?;
    let header: SnapshotHeader =
        serde_json::from_str(&text).map_err(|e| LabError::validation("snapshot header", e.to_string()))?;
    let bytes = std::fs::read(bin).map_err(|e| LabError::io(bin, e))?;
    if sha256_hex(&bytes) != header.sha256 {
        return Err(LabError::validation("snapshot", "checksum mismatch"));
    }
    if bytes.len() != 8 * header.n_x * header.n_p {
        return Err(LabError::validation("snapshot", "size does not match the header grid"));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, values))
}
