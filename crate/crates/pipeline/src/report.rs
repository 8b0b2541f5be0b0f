//! Result bundle: plot-ready CSVs and a JSON summary of a run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sehs_peh::{fundamental_frequency_map, Mesh, PehDesign};

use crate::artifacts::{sha256_file, Manifest, RunDir};
use crate::config::{ExperimentConfig, Seeds, ASPECT_RANGE, LENGTH_RANGE};
use crate::power::{reference_budgets, write_power_table};
use crate::{phase1, phase2, phase3, phase4, Result};

pub const PHASE: &str = "report";

/// Per-design row combining both objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCurveRow {
    pub design_index: usize,
    pub length_m: f64,
    pub aspect_ratio: f64,
    pub f1_hz: f64,
    pub state: String,
    pub mean_energy_uj: f64,
    pub mean_energy_per_area_uj_m2: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub config_sha256: String,
    pub seeds: Seeds,
    /// Phase name → manifest hash.
    pub manifests: BTreeMap<String, String>,
    /// Bundle file → hash.
    pub files: BTreeMap<String, String>,
    pub accuracy: BTreeMap<String, f64>,
    pub pareto_clusters_m: Vec<f64>,
    pub gaps: Vec<String>,
}

/// Frequency isocurve grid over the full design box.
pub fn write_frequency_map(path: &Path, tip_mass: f64, thickness: f64, n: usize, mesh: Mesh) -> Result<()> {
    let lin = |lo: f64, hi: f64| -> Vec<f64> { (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect() };
    let base = PehDesign::reference().with_thickness(thickness);
    let map = fundamental_frequency_map(
        &base,
        &lin(LENGTH_RANGE.0, LENGTH_RANGE.1),
        &lin(ASPECT_RANGE.0, ASPECT_RANGE.1),
        tip_mass,
        mesh,
    )?;
    map.write_csv(path)?;
    Ok(())
}

/// Writes the bundle. Missing phases are listed as gaps instead of
/// aborting.
pub fn run_report(run: &RunDir, cfg: &ExperimentConfig) -> Result<Summary> {
    let dir = run.phase_dir(PHASE)?;
    let mut gaps = Vec::new();
    let mut manifests = BTreeMap::new();
    for phase in [phase1::PHASE, phase2::PHASE, phase3::PHASE, phase3::EVAL_PHASE, phase4::PHASE] {
        match run.verify(phase) {
            Ok(_) => {
                manifests.insert(phase.to_string(), sha256_file(&run.manifest_path(phase))?);
            }
            Err(e) => gaps.push(format!("{phase}: {e}")),
        }
    }
    let done = |p: &str| manifests.contains_key(p);
    let mut written: Vec<String> = Vec::new();
    let copy = |from: &Path, to: &str, written: &mut Vec<String>| -> Result<()> {
        std::fs::copy(from, dir.join(to))?;
        written.push(to.into());
        Ok(())
    };

    if done(phase1::PHASE) {
        let energy = phase1::read_energy_table(run)?;
        let designs = phase1::read_designs(run)?;
        let acc = if done(phase3::EVAL_PHASE) {
            phase3::read_accuracy(run)?
        } else {
            Vec::new()
        };
        let rows: Vec<DesignCurveRow> = energy
            .iter()
            .map(|e| {
                let d = designs.iter().find(|d| d.index == e.design_index);
                let a = acc.iter().find(|a| a.design_index == e.design_index as i64);
                DesignCurveRow {
                    design_index: e.design_index,
                    length_m: e.length_m,
                    aspect_ratio: e.aspect_ratio,
                    f1_hz: d.map_or(f64::NAN, |d| d.f1_hz),
                    state: e.state.clone(),
                    mean_energy_uj: e.mean_energy_uj,
                    mean_energy_per_area_uj_m2: e.mean_energy_per_area_uj_m2,
                    accuracy_mean: a.map_or(f64::NAN, |a| a.accuracy_mean),
                    accuracy_std: a.map_or(f64::NAN, |a| a.accuracy_std),
                }
            })
            .collect();
        crate::tables::write_csv(&dir.join("design_curves.csv"), &rows)?;
        written.push("design_curves.csv".into());
        copy(&run.root.join(phase1::PHASE).join("energy.csv"), "energy_per_passage.csv", &mut written)?;
    }
    let mut accuracy = BTreeMap::new();
    if done(phase3::EVAL_PHASE) {
        let eval = run.root.join(phase3::EVAL_PHASE);
        copy(&eval.join("s_table.csv"), "accuracy.csv", &mut written)?;
        copy(&eval.join("di.csv"), "di_distribution.csv", &mut written)?;
        copy(&eval.join("di_summary.csv"), "di_summary.csv", &mut written)?;
        copy(&eval.join("confusion.csv"), "confusion.csv", &mut written)?;
        for a in phase3::read_accuracy(run)? {
            accuracy.insert(a.source, a.accuracy_mean);
        }
    }
    let mut pareto_clusters_m = Vec::new();
    if done(phase4::PHASE) {
        let p4 = run.root.join(phase4::PHASE);
        copy(&p4.join("pareto.csv"), "pareto.csv", &mut written)?;
        copy(&p4.join("curves.csv"), "surrogate_curves.csv", &mut written)?;
        copy(&p4.join("clusters.csv"), "pareto_clusters.csv", &mut written)?;
        pareto_clusters_m = phase4::read_clusters(run)?.iter().map(|c| c.length_center_m).collect();
    }
    let mesh = Mesh::new(cfg.design.mesh[0].min(12), cfg.design.mesh[1].min(12));
    write_frequency_map(&dir.join("frequency_map.csv"), cfg.design.tip_mass, cfg.design.thickness, 8, mesh)?;
    written.push("frequency_map.csv".into());
    write_power_table(&dir.join("power_budget.csv"), &reference_budgets())?;
    written.push("power_budget.csv".into());

    let mut files = BTreeMap::new();
    let mut manifest = Manifest::new(PHASE, &run.config_sha256()?);
    for name in &written {
        let p = dir.join(name);
        files.insert(name.clone(), sha256_file(&p)?);
        manifest.files.push(run.entry(&p)?);
    }
    let summary = Summary {
        name: cfg.name.clone(),
        config_sha256: run.config_sha256()?,
        seeds: cfg.seeds,
        manifests,
        files,
        accuracy,
        pareto_clusters_m,
        gaps: gaps.clone(),
    };
    let summary_path = dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    manifest.files.push(run.entry(&summary_path)?);
    manifest.note("gaps", &gaps);
    run.write_manifest(&manifest)?;
    Ok(summary)
}
