//! Passage persistence: a `t,accel` CSV plus a JSON sidecar with metadata.
//!
//! A CSV without a sidecar is treated as an externally recorded trace; its
//! time step is recovered from the `t` column.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::passage::{BridgeState, PassageRecord};
use crate::road::RoadClass;
use crate::vehicle::VehicleModel;
use crate::{Result, VbiError};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    dt: f64,
    samples: usize,
    sensor_location: f64,
    state: BridgeState,
    vehicle: Option<VehicleModel>,
    road_class: Option<RoadClass>,
    road_seed: Option<u64>,
    #[serde(default)]
    id: Option<String>,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_passage(record: &PassageRecord, csv_path: &Path) -> Result<()> {
    record.validate()?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(csv_path)?));
    w.write_record(["t", "accel"])?;
    for (i, a) in record.accel.iter().enumerate() {
        w.write_record([format!("{:e}", i as f64 * record.dt), format!("{a:e}")])?;
    }
    w.flush()?;
    let meta = Sidecar {
        dt: record.dt,
        samples: record.accel.len(),
        sensor_location: record.sensor_location,
        state: record.state,
        vehicle: record.vehicle,
        road_class: record.road_class,
        road_seed: record.road_seed,
        id: record.id.clone(),
    };
    let mut f = BufWriter::new(File::create(sidecar_path(csv_path))?);
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Reads `t,accel` rows; returns `(t, accel)`.
fn read_columns(csv_path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(File::open(csv_path)?));
    let headers = r.headers()?.clone();
    let ti = headers.iter().position(|h| h == "t");
    let ai = headers.iter().position(|h| h == "accel");
    let (Some(ti), Some(ai)) = (ti, ai) else {
        return Err(VbiError::Format(format!(
            "{}: expected header 't,accel', found '{}'",
            csv_path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    };
    let mut t = Vec::new();
    let mut a = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| VbiError::Format(format!("{}: bad value on row {}", csv_path.display(), line + 2)))
        };
        t.push(parse(ti)?);
        a.push(parse(ai)?);
    }
    Ok((t, a))
}

/// Loads a passage. Without a sidecar the trace is treated as external:
/// healthy label, unknown vehicle and road, sensor location 0 (unknown).
pub fn read_passage(csv_path: &Path) -> Result<PassageRecord> {
    let (t, accel) = read_columns(csv_path)?;
    let side = sidecar_path(csv_path);
    let record = if side.exists() {
        let meta: Sidecar = serde_json::from_reader(BufReader::new(File::open(&side)?))?;
        if meta.samples != accel.len() {
            return Err(VbiError::Format(format!(
                "sidecar declares {} samples, CSV holds {}",
                meta.samples,
                accel.len()
            )));
        }
        PassageRecord {
            dt: meta.dt,
            accel,
            sensor_location: meta.sensor_location,
            state: meta.state,
            vehicle: meta.vehicle,
            road_class: meta.road_class,
            road_seed: meta.road_seed,
            id: meta.id,
        }
    } else {
        PassageRecord {
            dt: uniform_step(&t)?,
            accel,
            sensor_location: 0.0,
            state: BridgeState::Healthy,
            vehicle: None,
            road_class: None,
            road_seed: None,
            id: csv_path.file_stem().map(|s| s.to_string_lossy().into_owned()),
        }
    };
    record.validate()?;
    Ok(record)
}

fn uniform_step(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(VbiError::Format("need at least two samples to infer dt".into()));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(VbiError::Format("time column is not increasing".into()));
    }
    for w in t.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-3 * dt {
            return Err(VbiError::Format(format!(
                "non-uniform sampling: step {} vs mean {dt}",
                w[1] - w[0]
            )));
        }
    }
    Ok(dt)
}
