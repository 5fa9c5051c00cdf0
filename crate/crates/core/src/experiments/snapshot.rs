//! `FKS1` snapshot files: magic, little-endian `u32` header length, JSON
//! header, then `n` little-endian `f64` nodal values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, Variant};
use crate::error::{FksError, Result};
use crate::record::{RunRecord, SnapshotRef};
use crate::spectral::{to_physical, SpectralField};
use crate::stepper::{IntegrationState, Observer};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"FKS1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub t: f64,
    pub eps: f64,
    pub gamma: f64,
    pub delta: f64,
    pub variant: Variant,
    /// Step size in use when the snapshot was taken.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            variant: self.header.variant,
            eps: self.header.eps,
            gamma: self.header.gamma,
            delta: self.header.delta,
        }
    }
}

pub fn write_snapshot(path: &Path, field: &SpectralField, t: f64, p: &ModelParams, dt: Option<f64>) -> Result<()> {
    let u = to_physical(field)?;
    let header = SnapshotHeader {
        n: u.grid().n(),
        t,
        eps: p.eps,
        gamma: p.gamma,
        delta: p.delta,
        variant: p.variant,
        dt,
    };
    let json = serde_json::to_vec(&header)?;
    let mut bytes = Vec::with_capacity(8 + json.len() + 8 * header.n);
    bytes.extend_from_slice(SNAPSHOT_MAGIC);
    bytes.extend_from_slice(&(json.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&json);
    for v in u.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bad = |reason: String| FksError::Snapshot {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = fs::read(path).map_err(|e| bad(e.to_string()))?;
    if bytes.len() < 8 || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(bad("missing FKS1 magic".into()));
    }
    let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = bytes
        .get(8..8 + h)
        .ok_or_else(|| bad(format!("header length {h} exceeds file size")))?;
    let header: SnapshotHeader = serde_json::from_slice(body).map_err(|e| bad(format!("bad header: {e}")))?;
    let data = &bytes[8 + h..];
    if data.len() != 8 * header.n {
        return Err(bad(format!("expected {} values, found {} bytes", header.n, data.len())));
    }
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Snapshot { header, values })
}

/// Observer writing snapshots at fixed times into `dir`, plus one of the last
/// good state if the run aborts.
pub struct Snapshotter {
    dir: PathBuf,
    params: ModelParams,
    times: Vec<f64>,
    next: usize,
}

impl Snapshotter {
    /// `times` before `t0` are dropped.
    pub fn new(dir: impl Into<PathBuf>, params: ModelParams, times: &[f64], t0: f64) -> Result<Self> {
        let mut times: Vec<f64> = times.iter().copied().filter(|&t| t >= t0).collect();
        if times.iter().any(|t| !t.is_finite()) {
            return Err(FksError::param("snapshot times must be finite"));
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            params,
            times,
            next: 0,
        })
    }

    fn save(&self, name: String, state: &IntegrationState, record: &mut RunRecord) -> Result<()> {
        let path = self.dir.join(name);
        write_snapshot(&path, &state.field, state.t, &self.params, Some(state.dt))?;
        record.snapshots.push(SnapshotRef { t: state.t, path });
        Ok(())
    }
}

impl Observer for Snapshotter {
    fn next_event(&self) -> Option<f64> {
        self.times.get(self.next).copied()
    }

    fn observe(&mut self, state: &IntegrationState, record: &mut RunRecord) -> Result<()> {
        let name = format!("snap_{:04}.fks1", self.next);
        self.next += 1;
        self.save(name, state, record)
    }

    fn on_abort(&mut self, state: &IntegrationState, record: &mut RunRecord) -> Result<()> {
        self.save("abort.fks1".into(), state, record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{to_spectral, Grid, PhysicalField};

    #[test]
    fn roundtrip_is_bitwise_on_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.fks1");
        let g = Grid::new(64).unwrap();
        let u = PhysicalField::from_fn(&g, |x| x.sin() + 0.1 * (3.0 * x).cos()).unwrap();
        let f = to_spectral(&u).unwrap();
        let p = ModelParams::fractional(0.01, 1.0, 1.0).unwrap();
        write_snapshot(&path, &f, 1.25, &p, Some(1e-3)).unwrap();
        let s = read_snapshot(&path).unwrap();
        assert_eq!(s.header.n, 64);
        assert_eq!(s.header.t, 1.25);
        assert_eq!(s.header.dt, Some(1e-3));
        assert_eq!(s.params(), p);
        let expected = to_physical(&f).unwrap();
        assert_eq!(s.values, expected.values());

        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"FKS1");
        let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        assert_eq!(bytes.len(), 8 + h + 64 * 8);
    }

    #[test]
    fn header_without_dt_is_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.fks1");
        let json = br#"{"n":2,"t":0.5,"eps":0.1,"gamma":1.0,"delta":1.0,"variant":"fractional"}"#;
        let mut bytes = b"FKS1".to_vec();
        bytes.extend_from_slice(&(json.len() as u32).to_le_bytes());
        bytes.extend_from_slice(json);
        bytes.extend_from_slice(&1.5f64.to_le_bytes());
        bytes.extend_from_slice(&(-2.0f64).to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        let s = read_snapshot(&path).unwrap();
        assert_eq!(s.header.dt, None);
        assert_eq!(s.values, vec![1.5, -2.0]);

        bytes.pop();
        fs::write(&path, &bytes).unwrap();
        assert!(read_snapshot(&path).is_err());
        fs::write(&path, b"FKS2\0\0\0\0").unwrap();
        assert!(read_snapshot(&path).is_err());
    }
}
