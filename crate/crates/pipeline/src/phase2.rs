//! Phase 2: time-frequency images of every acceleration and voltage trace.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sehs_tf::{read_image, signal_to_image, write_image, TfImage};
use sehs_vbi::io::read_passage;

use crate::artifacts::{Manifest, Quarantine, RunDir};
use crate::config::ExperimentConfig;
use crate::phase1::{self, PassageSet};
use crate::tables::{read_csv, write_csv};
use crate::{PipelineError, Result};

pub const PHASE: &str = "phase2";
/// Image source name of the acceleration benchmark.
pub const ACCEL: &str = "accel";

pub fn design_source(index: usize) -> String {
    format!("d{index:02}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRow {
    pub source: String,
    pub passage_id: String,
    pub set: PassageSet,
    pub state: String,
    pub path: String,
    pub dominant_hz: f64,
}

pub fn image_path(run: &RunDir, source: &str, id: &str) -> PathBuf {
    run.root.join(PHASE).join("images").join(source).join(format!("{id}.f32"))
}

#[derive(Debug, Deserialize)]
struct VoltageSidecar {
    dt: f64,
    samples: usize,
}

/// Reads a `t,volts` CSV written in phase 1.
pub fn read_voltage(path: &Path) -> Result<(f64, Vec<f64>)> {
    let meta: VoltageSidecar = serde_json::from_str(&std::fs::read_to_string(path.with_extension("json"))?)?;
    let mut r = csv::Reader::from_path(path)?;
    let mut v = Vec::with_capacity(meta.samples);
    for rec in r.records() {
        let rec = rec?;
        let x: f64 = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PipelineError::Numerical(format!("malformed voltage row in {}", path.display())))?;
        v.push(x);
    }
    if v.len() != meta.samples {
        return Err(PipelineError::Numerical(format!(
            "{} holds {} samples, sidecar declares {}",
            path.display(),
            v.len(),
            meta.samples
        )));
    }
    Ok((meta.dt, v))
}

pub fn run_phase2(run: &RunDir, cfg: &ExperimentConfig) -> Result<Vec<ImageRow>> {
    run.verify(phase1::PHASE)?;
    let dir = run.phase_dir(PHASE)?;
    let passages = phase1::read_passages(run)?;
    let designs = phase1::read_designs(run)?;
    let mut manifest = Manifest::new(PHASE, &run.config_sha256()?);
    let mut rows = Vec::new();
    let mut excluded = Vec::new();

    let mut sources: Vec<(String, Option<usize>)> = Vec::new();
    if cfg.detector.acceleration_baseline {
        sources.push((ACCEL.to_string(), None));
    }
    sources.extend(designs.iter().map(|d| (design_source(d.index), Some(d.index))));

    for (source, design) in &sources {
        std::fs::create_dir_all(dir.join("images").join(source))?;
        for p in &passages {
            let (dt, signal) = match design {
                None => {
                    let rec = read_passage(&phase1::accel_path(run, &p.id))?;
                    (rec.dt, rec.accel)
                }
                Some(i) => {
                    let path = phase1::voltage_path(run, *i, &p.id);
                    if !phase1::trace_exists(&path) {
                        // Quarantined in phase 1.
                        continue;
                    }
                    read_voltage(&path)?
                }
            };
            let img = signal_to_image(&signal, dt, &cfg.imaging, Some(p.id.clone()))?;
            if img.degenerate {
                log::warn!("{source}/{}: degenerate transform, excluded", p.id);
                excluded.push(Quarantine {
                    id: format!("{source}/{}", p.id),
                    reason: "identically zero transform".into(),
                });
                continue;
            }
            let path = image_path(run, source, &p.id);
            write_image(&img, &path)?;
            manifest.files.push(run.entry(&path)?);
            manifest.files.push(run.entry(&sehs_tf::io::header_path(&path))?);
            rows.push(ImageRow {
                source: source.clone(),
                passage_id: p.id.clone(),
                set: p.set,
                state: p.state.clone(),
                path: run.relative(&path),
                dominant_hz: img.row_frequency(img.dominant_row()),
            });
        }
        log::info!("phase 2: {source} imaged");
    }
    let index = dir.join("images.csv");
    write_csv(&index, &rows)?;
    manifest.files.push(run.entry(&index)?);
    manifest.quarantined = excluded;
    manifest.note("band_hz", cfg.imaging.band);
    manifest.note("image_size", cfg.imaging.image_size);
    run.write_manifest(&manifest)?;
    Ok(rows)
}

pub fn read_index(run: &RunDir) -> Result<Vec<ImageRow>> {
    read_csv(&run.root.join(PHASE).join("images.csv"))
}

pub fn load_image(run: &RunDir, row: &ImageRow) -> Result<TfImage> {
    Ok(read_image(&run.root.join(&row.path))?)
}
