//! Phase 1: bridge passages, harvester voltages and the energy table.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sehs_peh::{build_reduced, select_load_resistance, simulate_voltage, total_energy, write_voltage, Mesh};
use sehs_vbi::io::write_passage;
use sehs_vbi::{assemble_beam, generate_road_profile, sample_vehicle_params, simulate_passage, BeamSystem, PassageRecord};

use crate::artifacts::{derive_seed, Manifest, Quarantine, RunDir};
use crate::config::{DamageState, ExperimentConfig};
use crate::tables::{read_csv, write_csv};
use crate::{PipelineError, Result};

pub const PHASE: &str = "phase1";

/// Role of a passage in the detector datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PassageSet {
    /// Healthy passages for training and validation.
    Healthy,
    HealthyTest,
    DamagedTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageRow {
    pub id: String,
    pub set: PassageSet,
    pub state: String,
    pub body_mass_kg: f64,
    pub speed_mps: f64,
    pub axle_spacing_m: f64,
    pub road_seed: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub index: usize,
    pub design_id: String,
    pub length_m: f64,
    pub aspect_ratio: f64,
    pub tip_mass_kg: f64,
    pub area_m2: f64,
    pub f1_hz: f64,
    pub load_resistance_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub design_index: usize,
    pub passage_id: String,
    pub state: String,
    pub energy_j: f64,
}

/// Mean energy per design and bridge state, in μJ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySummaryRow {
    pub design_index: usize,
    pub length_m: f64,
    pub aspect_ratio: f64,
    pub area_m2: f64,
    pub state: String,
    pub passages: usize,
    pub mean_energy_uj: f64,
    pub mean_energy_per_area_uj_m2: f64,
}

#[derive(Debug, Clone)]
pub struct PlannedPassage {
    pub id: String,
    pub set: PassageSet,
    pub state: DamageState,
    /// Index into the sampled vehicles.
    pub vehicle: usize,
    /// Label the road seed is derived from.
    pub road: String,
}

/// Passage ids in simulation order. The first damaged state is the
/// primary test state, the rest are only scored for DI distributions.
///
/// Damaged test passage `i` reuses the vehicle and road of healthy test
/// passage `i mod healthy_test`, so the test sets differ only in the
/// bridge state.
pub fn plan(cfg: &ExperimentConfig) -> Vec<PlannedPassage> {
    let ds = &cfg.dataset;
    let mut out = Vec::new();
    for i in 0..ds.healthy {
        let id = format!("hn-{i:04}");
        out.push(PlannedPassage {
            road: id.clone(),
            id,
            set: PassageSet::Healthy,
            state: DamageState::Healthy,
            vehicle: i,
        });
    }
    let test_id = |i: usize| format!("hn-test-{i:04}");
    for i in 0..ds.healthy_test {
        out.push(PlannedPassage {
            id: test_id(i),
            road: test_id(i),
            set: PassageSet::HealthyTest,
            state: DamageState::Healthy,
            vehicle: ds.healthy + i,
        });
    }
    for st in cfg.damaged_states() {
        for i in 0..ds.damaged_test {
            let j = i % ds.healthy_test;
            out.push(PlannedPassage {
                id: format!("{}-test-{i:04}", st.label().to_ascii_lowercase()),
                road: test_id(j),
                set: PassageSet::DamagedTest,
                state: st,
                vehicle: ds.healthy + j,
            });
        }
    }
    out
}

pub fn accel_path(run: &RunDir, id: &str) -> PathBuf {
    run.root.join(PHASE).join("accel").join(format!("{id}.csv"))
}

pub fn voltage_path(run: &RunDir, design: usize, id: &str) -> PathBuf {
    run.root
        .join(PHASE)
        .join("voltage")
        .join(format!("d{design:02}"))
        .join(format!("{id}.csv"))
}

#[derive(Debug, Clone)]
pub struct Phase1Output {
    pub passages: Vec<PassageRow>,
    pub designs: Vec<DesignRow>,
    pub energy: Vec<EnergySummaryRow>,
    pub quarantined: Vec<Quarantine>,
}

fn systems(cfg: &ExperimentConfig) -> Result<Vec<(DamageState, BeamSystem)>> {
    let beam = cfg.beam();
    let mut out = vec![(DamageState::Healthy, assemble_beam(&beam, None)?)];
    for st in cfg.damaged_states() {
        let crack = st.crack(&beam);
        out.push((st, assemble_beam(&beam, crack.as_ref())?));
    }
    Ok(out)
}

pub fn run_phase1(run: &RunDir, cfg: &ExperimentConfig) -> Result<Phase1Output> {
    let dir = run.phase_dir(PHASE)?;
    std::fs::create_dir_all(dir.join("accel"))?;
    let mut manifest = Manifest::new(PHASE, &run.config_sha256()?);
    let planned = plan(cfg);
    let beam = cfg.beam();
    let systems = systems(cfg)?;
    let sensor = cfg.scenario.sensor.fraction() * beam.span;
    let n_vehicles = cfg.dataset.healthy + cfg.dataset.healthy_test;
    let vehicles = sample_vehicle_params(n_vehicles, &cfg.vehicle_ranges(), cfg.seeds.vehicles)?;

    // Bridge passages.
    let mut records: Vec<Option<PassageRecord>> = Vec::with_capacity(planned.len());
    let mut rows = Vec::new();
    let mut quarantined = Vec::new();
    for p in &planned {
        let veh = &vehicles[p.vehicle];
        let sys = &systems.iter().find(|(s, _)| *s == p.state).expect("system per state").1;
        let road_seed = derive_seed(cfg.seeds.roads, &p.road);
        let sim = generate_road_profile(cfg.scenario.road, beam.span + cfg.scenario.approach, road_seed)
            .and_then(|road| simulate_passage(sys, veh, &road, cfg.scenario.dt, sensor));
        match sim {
            Ok(mut rec) => {
                rec.id = Some(p.id.clone());
                let path = accel_path(run, &p.id);
                write_passage(&rec, &path)?;
                manifest.files.push(run.entry(&path)?);
                manifest.files.push(run.entry(&sehs_vbi::io::sidecar_path(&path))?);
                rows.push(PassageRow {
                    id: p.id.clone(),
                    set: p.set,
                    state: p.state.label(),
                    body_mass_kg: veh.body_mass,
                    speed_mps: veh.speed,
                    axle_spacing_m: veh.axle_spacing(),
                    road_seed,
                    samples: rec.accel.len(),
                });
                records.push(Some(rec));
            }
            Err(e) => {
                log::warn!("passage {} quarantined: {e}", p.id);
                quarantined.push(Quarantine {
                    id: p.id.clone(),
                    reason: e.to_string(),
                });
                records.push(None);
            }
        }
    }
    check_quarantine(cfg, &quarantined, planned.len())?;
    log::info!("phase 1: {} passages simulated", rows.len());

    // Harvester voltages.
    let mesh = Mesh::new(cfg.design.mesh[0], cfg.design.mesh[1]);
    let mut designs = Vec::new();
    let mut energies = Vec::new();
    for (index, design) in cfg.design.designs().into_iter().enumerate() {
        let (_, reduced) = build_reduced(&design, mesh)?;
        let rl = select_load_resistance(&reduced)?;
        let reduced = reduced.with_load_resistance(rl);
        designs.push(DesignRow {
            index,
            design_id: design.id(),
            length_m: design.length,
            aspect_ratio: design.aspect_ratio,
            tip_mass_kg: design.tip_mass,
            area_m2: design.length * design.width(),
            f1_hz: reduced.first_frequency_hz(),
            load_resistance_ohm: rl,
        });
        std::fs::create_dir_all(voltage_path(run, index, "x").parent().expect("has parent"))?;
        for (p, rec) in planned.iter().zip(&records) {
            let Some(rec) = rec else { continue };
            match simulate_voltage(&reduced, rec) {
                Ok(trace) => {
                    let path = voltage_path(run, index, &p.id);
                    write_voltage(&trace, &path)?;
                    manifest.files.push(run.entry(&path)?);
                    manifest.files.push(run.entry(&path.with_extension("json"))?);
                    energies.push(EnergyRow {
                        design_index: index,
                        passage_id: p.id.clone(),
                        state: p.state.label(),
                        energy_j: total_energy(&trace),
                    });
                }
                Err(e) => {
                    log::warn!("voltage for {} on design {index} quarantined: {e}", p.id);
                    quarantined.push(Quarantine {
                        id: format!("{}@d{index:02}", p.id),
                        reason: e.to_string(),
                    });
                }
            }
        }
        log::info!("phase 1: design {index} ({}) f1 = {:.3} Hz", design.id(), reduced.first_frequency_hz());
    }
    check_quarantine(cfg, &quarantined, planned.len() * (1 + designs.len()))?;

    let summary = summarize(cfg, &designs, &energies);
    let files = [
        ("passages.csv", write_csv(&dir.join("passages.csv"), &rows)),
        ("designs.csv", write_csv(&dir.join("designs.csv"), &designs)),
        ("energy.csv", write_csv(&dir.join("energy.csv"), &energies)),
        ("e_table.csv", write_csv(&dir.join("e_table.csv"), &summary)),
    ];
    for (name, res) in files {
        res?;
        manifest.files.push(run.entry(&dir.join(name))?);
    }
    manifest.quarantined = quarantined.clone();
    manifest.note("seeds", cfg.seeds);
    manifest.note("sensor_position_m", sensor);
    run.write_manifest(&manifest)?;
    Ok(Phase1Output {
        passages: rows,
        designs,
        energy: summary,
        quarantined,
    })
}

fn check_quarantine(cfg: &ExperimentConfig, q: &[Quarantine], total: usize) -> Result<()> {
    let frac = q.len() as f64 / total.max(1) as f64;
    if frac > cfg.dataset.max_quarantine_fraction {
        return Err(PipelineError::Numerical(format!(
            "{} of {total} simulations failed ({:.1}% > {:.1}%); first: {} ({})",
            q.len(),
            100.0 * frac,
            100.0 * cfg.dataset.max_quarantine_fraction,
            q[0].id,
            q[0].reason
        )));
    }
    Ok(())
}

fn summarize(cfg: &ExperimentConfig, designs: &[DesignRow], energies: &[EnergyRow]) -> Vec<EnergySummaryRow> {
    let mut states = vec![DamageState::Healthy.label()];
    states.extend(cfg.damaged_states().iter().map(|s| s.label()));
    let mut out = Vec::new();
    for d in designs {
        for st in &states {
            let e: Vec<f64> = energies
                .iter()
                .filter(|r| r.design_index == d.index && &r.state == st)
                .map(|r| r.energy_j)
                .collect();
            if e.is_empty() {
                continue;
            }
            let mean_uj = 1e6 * e.iter().sum::<f64>() / e.len() as f64;
            out.push(EnergySummaryRow {
                design_index: d.index,
                length_m: d.length_m,
                aspect_ratio: d.aspect_ratio,
                area_m2: d.area_m2,
                state: st.clone(),
                passages: e.len(),
                mean_energy_uj: mean_uj,
                mean_energy_per_area_uj_m2: mean_uj / d.area_m2,
            });
        }
    }
    out
}

pub fn read_passages(run: &RunDir) -> Result<Vec<PassageRow>> {
    read_csv(&run.root.join(PHASE).join("passages.csv"))
}

pub fn read_designs(run: &RunDir) -> Result<Vec<DesignRow>> {
    read_csv(&run.root.join(PHASE).join("designs.csv"))
}

pub fn read_energy_table(run: &RunDir) -> Result<Vec<EnergySummaryRow>> {
    read_csv(&run.root.join(PHASE).join("e_table.csv"))
}

pub fn read_energies(run: &RunDir) -> Result<Vec<EnergyRow>> {
    read_csv(&run.root.join(PHASE).join("energy.csv"))
}

/// Whether a path exists with its sidecar.
pub fn trace_exists(path: &Path) -> bool {
    path.exists() && path.with_extension("json").exists()
}
