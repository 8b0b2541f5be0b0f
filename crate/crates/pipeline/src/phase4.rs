//! Phase 4: Kriging surrogates of E and S and the bi-objective search.

use serde::{Deserialize, Serialize};
use sehs_optim::{kriging_fit, nsga2, KrigingModel, KrigingOptions, Nsga2Config, ParetoSet};

use crate::artifacts::{derive_seed, Manifest, RunDir};
use crate::config::{DamageState, EnergyState, ExperimentConfig, Objective};
use crate::phase1::{self, EnergySummaryRow};
use crate::phase3::{self, AccuracyRow};
use crate::tables::{read_csv, write_csv};
use crate::{PipelineError, Result};

pub const PHASE: &str = "phase4";
/// Designs needed to fit the surrogates.
pub const MIN_DESIGNS: usize = 4;
/// Gap in length [m] separating Pareto clusters.
pub const CLUSTER_GAP: f64 = 0.03;

/// One tabulated design with both objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportRow {
    pub design_index: usize,
    pub length_m: f64,
    pub aspect_ratio: f64,
    pub energy: f64,
    pub accuracy: f64,
    pub accuracy_std: f64,
}

/// Builds the support table. Energy is averaged over the passages of the
/// selected bridge states.
pub fn support_table(
    cfg: &ExperimentConfig,
    energy: &[EnergySummaryRow],
    accuracy: &[AccuracyRow],
) -> Result<Vec<SupportRow>> {
    let primary = cfg.scenario.damage.label();
    let healthy = DamageState::Healthy.label();
    let mut out = Vec::new();
    for a in accuracy.iter().filter(|a| a.design_index >= 0) {
        let idx = a.design_index as usize;
        let rows: Vec<&EnergySummaryRow> = energy
            .iter()
            .filter(|e| e.design_index == idx)
            .filter(|e| match cfg.optimizer.energy_state {
                EnergyState::Healthy => e.state == healthy,
                EnergyState::Damaged => e.state == primary,
                EnergyState::All => true,
            })
            .collect();
        let n: usize = rows.iter().map(|r| r.passages).sum();
        if n == 0 {
            log::warn!("design {idx} has no energy rows for {:?}", cfg.optimizer.energy_state);
            continue;
        }
        let value = |r: &EnergySummaryRow| match cfg.optimizer.objective {
            Objective::Energy => r.mean_energy_uj,
            Objective::EnergyPerArea => r.mean_energy_per_area_uj_m2,
        };
        let e = rows.iter().map(|r| value(r) * r.passages as f64).sum::<f64>() / n as f64;
        out.push(SupportRow {
            design_index: idx,
            length_m: a.length_m,
            aspect_ratio: a.aspect_ratio,
            energy: e,
            accuracy: a.accuracy_mean,
            accuracy_std: a.accuracy_std,
        });
    }
    out.sort_by_key(|r| r.design_index);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub length_m: f64,
    pub aspect_ratio: f64,
    pub energy_mean: f64,
    pub energy_std: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
}

/// Pareto designs grouped along the length axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub cluster: usize,
    pub points: usize,
    pub length_center_m: f64,
    pub length_min_m: f64,
    pub length_max_m: f64,
    pub energy_mean: f64,
    pub accuracy_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateDiagnostics {
    pub objective: String,
    pub length_scales: Vec<f64>,
    pub nugget: f64,
    pub trend: f64,
    pub process_variance: f64,
    pub loo_rmse: f64,
    /// LOO RMSE over the range of the tabulated values.
    pub loo_rmse_relative: f64,
}

#[derive(Debug, Clone)]
pub struct Phase4Output {
    pub support: Vec<SupportRow>,
    pub pareto: ParetoSet,
    pub clusters: Vec<ClusterRow>,
    pub curves: Vec<CurveRow>,
    pub diagnostics: Vec<SurrogateDiagnostics>,
}

fn diagnostics(name: &str, m: &KrigingModel) -> Result<SurrogateDiagnostics> {
    let loo = m.loo_residuals()?;
    let rmse = (loo.iter().map(|r| r * r).sum::<f64>() / loo.len() as f64).sqrt();
    let lo = m.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = m.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SurrogateDiagnostics {
        objective: name.into(),
        length_scales: m.length_scales.clone(),
        nugget: m.nugget,
        trend: m.trend,
        process_variance: m.process_variance,
        loo_rmse: rmse,
        loo_rmse_relative: if hi > lo { rmse / (hi - lo) } else { 0.0 },
    })
}

/// Groups Pareto designs whose lengths are within `gap` of a neighbour.
pub fn cluster_by_length(pareto: &ParetoSet, gap: f64) -> Vec<ClusterRow> {
    let mut pts: Vec<_> = pareto.points.iter().collect();
    pts.sort_by(|a, b| a.design[0].total_cmp(&b.design[0]));
    let mut groups: Vec<Vec<&sehs_optim::ParetoPoint>> = Vec::new();
    for p in pts {
        match groups.last_mut() {
            Some(g) if p.design[0] - g.last().expect("non-empty group").design[0] <= gap => g.push(p),
            _ => groups.push(vec![p]),
        }
    }
    groups
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let n = g.len() as f64;
            ClusterRow {
                cluster: k,
                points: g.len(),
                length_center_m: g.iter().map(|p| p.design[0]).sum::<f64>() / n,
                length_min_m: g[0].design[0],
                length_max_m: g[g.len() - 1].design[0],
                energy_mean: g.iter().map(|p| p.objectives[0]).sum::<f64>() / n,
                accuracy_mean: g.iter().map(|p| p.objectives[1]).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Fits both surrogates and searches them. `two_parameter` adds the aspect
/// ratio as a second design variable.
pub fn optimize_support(
    support: &[SupportRow],
    two_parameter: bool,
    kriging: &KrigingOptions,
    nsga: &Nsga2Config,
) -> Result<(KrigingModel, KrigingModel, ParetoSet)> {
    if support.len() < MIN_DESIGNS {
        return Err(PipelineError::Config(format!(
            "{} valid designs; the surrogates need at least {MIN_DESIGNS}",
            support.len()
        )));
    }
    let x: Vec<Vec<f64>> = support
        .iter()
        .map(|r| {
            if two_parameter {
                vec![r.length_m, r.aspect_ratio]
            } else {
                vec![r.length_m]
            }
        })
        .collect();
    let e: Vec<f64> = support.iter().map(|r| r.energy).collect();
    let s: Vec<f64> = support.iter().map(|r| r.accuracy).collect();
    let fit = |y: &[f64], what: &str| {
        kriging_fit(&x, y, kriging).map_err(|err| {
            PipelineError::Numerical(format!("{what} surrogate fit failed on {} designs: {err}", x.len()))
        })
    };
    let em = fit(&e, "energy")?;
    let sm = fit(&s, "accuracy")?;
    let bounds: Vec<(f64, f64)> = (0..em.dim()).map(|d| (em.lower[d], em.upper[d])).collect();
    let pareto = nsga2(
        |z| {
            let a = em.predict(z).map_err(|err| err.to_string())?;
            let b = sm.predict(z).map_err(|err| err.to_string())?;
            Ok([a.mean, b.mean])
        },
        &bounds,
        nsga,
    )?;
    Ok((em, sm, pareto))
}

fn curves(em: &KrigingModel, sm: &KrigingModel) -> Result<Vec<CurveRow>> {
    let (n_l, n_r) = if em.dim() == 2 { (41, 41) } else { (201, 1) };
    let lin = |lo: f64, hi: f64, n: usize, i: usize| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    let mut out = Vec::with_capacity(n_l * n_r);
    for i in 0..n_l {
        for j in 0..n_r {
            let l = lin(em.lower[0], em.upper[0], n_l, i);
            let z = if em.dim() == 2 {
                vec![l, lin(em.lower[1], em.upper[1], n_r, j)]
            } else {
                vec![l]
            };
            let a = em.predict(&z)?;
            let b = sm.predict(&z)?;
            out.push(CurveRow {
                length_m: l,
                aspect_ratio: z.get(1).copied().unwrap_or(f64::NAN),
                energy_mean: a.mean,
                energy_std: a.variance.sqrt(),
                accuracy_mean: b.mean,
                accuracy_std: b.variance.sqrt(),
            });
        }
    }
    Ok(out)
}

pub fn run_phase4(run: &RunDir, cfg: &ExperimentConfig) -> Result<Phase4Output> {
    run.verify(phase1::PHASE)?;
    run.verify(phase3::EVAL_PHASE)?;
    let energy = phase1::read_energy_table(run)?;
    let accuracy = phase3::read_accuracy(run)?;
    let support = support_table(cfg, &energy, &accuracy)?;
    let two = cfg.design.two_parameter();
    let kopts = KrigingOptions {
        seed: derive_seed(cfg.seeds.optimizer, "kriging"),
        ..cfg.optimizer.kriging.clone()
    };
    let nopts = Nsga2Config {
        seed: derive_seed(cfg.seeds.optimizer, "nsga2"),
        ..cfg.optimizer.nsga2.clone()
    };
    let (em, sm, pareto) = optimize_support(&support, two, &kopts, &nopts)?;
    let clusters = cluster_by_length(&pareto, CLUSTER_GAP);
    let curves = curves(&em, &sm)?;
    let diags = vec![diagnostics("energy", &em)?, diagnostics("accuracy", &sm)?];

    let dir = run.phase_dir(PHASE)?;
    let mut manifest = Manifest::new(PHASE, &run.config_sha256()?);
    let names: &[&str] = if two { &["length_m", "aspect_ratio"] } else { &["length_m"] };
    pareto.write_csv(&dir.join("pareto.csv"), names)?;
    write_csv(&dir.join("support.csv"), &support)?;
    write_csv(&dir.join("curves.csv"), &curves)?;
    write_csv(&dir.join("clusters.csv"), &clusters)?;
    for name in ["pareto.csv", "support.csv", "curves.csv", "clusters.csv"] {
        manifest.files.push(run.entry(&dir.join(name))?);
    }
    manifest.note("kriging", &kopts);
    manifest.note("nsga2", &nopts);
    manifest.note("surrogates", &diags);
    manifest.note("objective", cfg.optimizer.objective);
    manifest.note("energy_state", cfg.optimizer.energy_state);
    manifest.note("evaluations", pareto.evaluations);
    manifest.note("hypervolume_history", &pareto.hypervolume_history);
    run.write_manifest(&manifest)?;
    for c in &clusters {
        log::info!(
            "phase 4: Pareto cluster {} at L = {:.3} m ({} points)",
            c.cluster,
            c.length_center_m,
            c.points
        );
    }
    Ok(Phase4Output {
        support,
        pareto,
        clusters,
        curves,
        diagnostics: diags,
    })
}

pub fn read_clusters(run: &RunDir) -> Result<Vec<ClusterRow>> {
    read_csv(&run.root.join(PHASE).join("clusters.csv"))
}
