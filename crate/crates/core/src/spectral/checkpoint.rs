//! Trajectory persistence. The blob is little-endian: n as u32, count as
//! u32, times as f64[count], then coefficients as f64 pairs (re, im),
//! count x n x n values row-major in [ky][kx]. A JSON sidecar at
//! `<path>.json` repeats the metadata for tooling that will not parse the
//! blob; the blob is the authority on load.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Trajectory, C64};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Sidecar {
    n: u32,
    count: u32,
    times: Vec<f64>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

pub fn save(path: &Path, traj: &Trajectory) -> Result<()> {
    traj.validate()?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(traj.n as u32).to_le_bytes())?;
    w.write_all(&(traj.times.len() as u32).to_le_bytes())?;
    for t in &traj.times {
        w.write_all(&t.to_le_bytes())?;
    }
    for snap in &traj.snaps {
        for c in snap {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    w.flush()?;

    let sidecar = Sidecar {
        n: traj.n as u32,
        count: traj.times.len() as u32,
        times: traj.times.clone(),
    };
    let text = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    std::fs::write(sidecar_path(path), text)?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn load(path: &Path) -> Result<Trajectory> {
    let mut r = BufReader::new(File::open(path)?);
    let n = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    let mut times = Vec::with_capacity(count);
    for _ in 0..count {
        times.push(read_f64(&mut r)?);
    }
    let mut snaps = Vec::with_capacity(count);
    for _ in 0..count {
        let mut snap = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            snap.push(C64::new(re, im));
        }
        snaps.push(snap);
    }
    let traj = Trajectory { n, times, snaps };
    traj.validate()
        .map_err(|e| Error::Invalid(format!("checkpoint {}: {e}", path.display())))?;
    Ok(traj)
}
