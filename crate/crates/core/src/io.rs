//! CSV helpers for samples and traces, and run manifests.
//!
//! Floating-point columns use `{:.16e}`, 17 significant digits, which reads
//! back to the identical `f64`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::IncrementSample;
use crate::gibbs::ChainOutput;
use crate::sde::TrajectorySample;
use crate::{Error, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// `lag, dx, dy, dz`, one row per increment.
pub fn write_increments(path: &Path, samples: &[IncrementSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["lag", "dx", "dy", "dz"]).map_err(csv_err)?;
    for s in samples {
        for v in &s.vectors {
            w.write_record([fmt_f64(s.lag), fmt_f64(v[0]), fmt_f64(v[1]), fmt_f64(v[2])]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads an increments file back, grouped by lag in order of appearance.
pub fn read_increments(path: &Path, source: &str) -> Result<Vec<IncrementSample>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = rd.headers().map_err(csv_err)?.clone();
    let expected = ["lag", "dx", "dy", "dz"];
    if headers.len() < 4 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(Error::Parse(format!("{}: expected columns lag,dx,dy,dz", path.display())));
    }
    let mut out: Vec<IncrementSample> = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let mut v = [0.0; 4];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec
                .get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("{}: bad value in row {}", path.display(), row + 2)))?;
        }
        match out.iter_mut().find(|s| s.lag == v[0]) {
            Some(s) => s.vectors.push([v[1], v[2], v[3]]),
            None => out.push(IncrementSample::new(v[0], vec![[v[1], v[2], v[3]]], source)),
        }
    }
    Ok(out)
}

/// `sweep, H, acceptance, chain` for every sweep of every chain.
pub fn write_energies(path: &Path, chains: &[ChainOutput]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["sweep", "H", "acceptance", "chain"]).map_err(csv_err)?;
    for c in chains {
        for (s, (h, a)) in c.energy.iter().zip(&c.acceptance_trace).enumerate() {
            w.write_record([s.to_string(), fmt_f64(*h), fmt_f64(*a), c.chain_id.to_string()]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `path_id, k, t, x, y, z` at every recorded point.
pub fn write_trajectories(path: &Path, traj: &TrajectorySample) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["path_id", "k", "t", "x", "y", "z"]).map_err(csv_err)?;
    for p in 0..traj.n_paths() {
        for k in 0..traj.n_points() {
            let x = traj.point(p, k);
            w.write_record([
                p.to_string(),
                k.to_string(),
                fmt_f64(k as f64 * traj.dt),
                fmt_f64(x[0]),
                fmt_f64(x[1]),
                fmt_f64(x[2]),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Generic numeric table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.iter().map(|x| fmt_f64(*x))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(Self { path: path.to_path_buf(), sha256: sha256_file(path)? })
    }
}

/// Provenance record written next to every set of outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub created_unix: u64,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    #[serde(default)]
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        let created_unix =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
