//! Binary model checkpoints.
//!
//! Layout: `SEHSCVAE` magic, `u32` version, `u32` length of the JSON
//! header, the header (architecture and seed), `u64` parameter count, then
//! the parameters as little-endian `f32`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{CvaeConfig, CvaeModel};
use crate::{CvaeError, Result};

pub const MAGIC: &[u8; 8] = b"SEHSCVAE";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: CvaeConfig,
    seed: u64,
}

pub fn write_checkpoint<W: Write>(model: &CvaeModel, mut w: W) -> Result<()> {
    let header = serde_json::to_vec(&Header {
        config: model.config.clone(),
        seed: model.seed,
    })?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    w.write_all(&(model.params.len() as u64).to_le_bytes())?;
    for &p in &model.params {
        w.write_all(&(p as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<CvaeModel> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CvaeError::Checkpoint("bad magic bytes".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(CvaeError::Checkpoint(format!("unsupported version {version}")));
    }
    r.read_exact(&mut b4)?;
    let mut header = vec![0u8; u32::from_le_bytes(b4) as usize];
    r.read_exact(&mut header)?;
    let header: Header = serde_json::from_slice(&header)?;
    let mut model = CvaeModel::new(header.config, header.seed)?;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    if count != model.params.len() {
        return Err(CvaeError::Checkpoint(format!(
            "blob has {count} parameters, architecture needs {}",
            model.params.len()
        )));
    }
    for p in &mut model.params {
        r.read_exact(&mut b4)?;
        let v = f32::from_le_bytes(b4);
        if !v.is_finite() {
            return Err(CvaeError::Checkpoint("non-finite weight".into()));
        }
        *p = v as f64;
    }
    Ok(model)
}

pub fn save(model: &CvaeModel, path: &Path) -> Result<()> {
    write_checkpoint(model, BufWriter::new(File::create(path)?))
}

pub fn load(path: &Path) -> Result<CvaeModel> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

/// Rounds parameters to `f32`, so an in-memory model scores exactly like
/// its reloaded checkpoint.
pub fn quantize(model: &mut CvaeModel) {
    for p in &mut model.params {
        *p = *p as f32 as f64;
    }
}
