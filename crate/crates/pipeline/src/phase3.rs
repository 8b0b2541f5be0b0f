//! Phase 3: detector training per image source and sensing-accuracy
//! evaluation from reloaded checkpoints.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sehs_cvae::{
    build_cvae, checkpoint, classify, damage_indices, sensing_accuracy, threshold_from_indices, train, CvaeModel,
    Health, TrainConfig,
};

use crate::artifacts::{derive_seed, Manifest, RunDir};
use crate::config::{DamageState, ExperimentConfig};
use crate::phase1::{self, PassageSet};
use crate::phase2::{self, ImageRow, ACCEL};
use crate::tables::{read_csv, write_csv};
use crate::{PipelineError, Result};

pub const PHASE: &str = "phase3";
pub const EVAL_PHASE: &str = "evaluation";

/// Images of one source split by role, each sorted by passage id.
#[derive(Debug, Clone, Default)]
pub struct SourceImages {
    pub train: Vec<(String, Vec<f32>)>,
    pub validation: Vec<(String, Vec<f32>)>,
    pub healthy_test: Vec<(String, Vec<f32>)>,
    /// Keyed by state label.
    pub damaged: BTreeMap<String, Vec<(String, Vec<f32>)>>,
}

fn pixels(v: &[(String, Vec<f32>)]) -> Vec<Vec<f32>> {
    v.iter().map(|(_, p)| p.clone()).collect()
}

pub fn load_source(run: &RunDir, cfg: &ExperimentConfig, index: &[ImageRow], source: &str) -> Result<SourceImages> {
    let mut rows: Vec<&ImageRow> = index.iter().filter(|r| r.source == source).collect();
    rows.sort_by(|a, b| a.passage_id.cmp(&b.passage_id));
    let mut out = SourceImages::default();
    let mut healthy = Vec::new();
    for r in rows {
        let img = phase2::load_image(run, r)?;
        let item = (r.passage_id.clone(), img.pixels);
        match r.set {
            PassageSet::Healthy => healthy.push(item),
            PassageSet::HealthyTest => out.healthy_test.push(item),
            PassageSet::DamagedTest => out.damaged.entry(r.state.clone()).or_default().push(item),
        }
    }
    let n_val = (healthy.len() as f64 * cfg.dataset.validation_fraction).round() as usize;
    out.validation = healthy.split_off(healthy.len() - n_val);
    out.train = healthy;
    Ok(out)
}

pub fn rep_dir(run: &RunDir, source: &str, rep: usize) -> PathBuf {
    run.root.join(PHASE).join(source).join(format!("rep{rep}"))
}

/// Initialization and training seeds of repetition `rep`; shared by all
/// sources so designs are compared under common random numbers.
pub fn rep_seeds(cfg: &ExperimentConfig, rep: usize) -> (u64, u64) {
    (
        derive_seed(cfg.seeds.detector, &format!("init/{rep}")),
        derive_seed(cfg.seeds.detector, &format!("train/{rep}")),
    )
}

pub fn sources(run: &RunDir, cfg: &ExperimentConfig) -> Result<Vec<String>> {
    let mut s = Vec::new();
    if cfg.detector.acceleration_baseline {
        s.push(ACCEL.to_string());
    }
    s.extend(phase1::read_designs(run)?.iter().map(|d| phase2::design_source(d.index)));
    Ok(s)
}

/// Trains one detector; the returned model is rounded to checkpoint
/// precision.
pub fn train_detector(
    cfg: &ExperimentConfig,
    train_images: &[Vec<f32>],
    rep: usize,
) -> Result<(CvaeModel, sehs_cvae::TrainReport)> {
    let (init, seed) = rep_seeds(cfg, rep);
    let mut model = build_cvae(cfg.detector.network.clone(), init)?;
    let tc = TrainConfig {
        seed,
        ..cfg.detector.training.clone()
    };
    let report = train(&mut model, train_images, &tc)?;
    checkpoint::quantize(&mut model);
    Ok((model, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingFailure {
    pub source: String,
    pub rep: usize,
    pub message: String,
}

pub fn run_training(run: &RunDir, cfg: &ExperimentConfig) -> Result<Vec<TrainingFailure>> {
    run.verify(phase2::PHASE)?;
    let index = phase2::read_index(run)?;
    let mut manifest = Manifest::new(PHASE, &run.config_sha256()?);
    let mut failures = Vec::new();
    for source in sources(run, cfg)? {
        let imgs = load_source(run, cfg, &index, &source)?;
        let train_px = pixels(&imgs.train);
        for rep in 0..cfg.detector.repetitions {
            let dir = rep_dir(run, &source, rep);
            std::fs::create_dir_all(&dir)?;
            match train_detector(cfg, &train_px, rep) {
                Ok((model, report)) => {
                    let ckpt = dir.join("model.ckpt");
                    checkpoint::save(&model, &ckpt)?;
                    let rep_csv = dir.join("train.csv");
                    report.write_csv(&rep_csv, cfg.detector.network.beta_kl)?;
                    manifest.files.push(run.entry(&ckpt)?);
                    manifest.files.push(run.entry(&rep_csv)?);
                    log::info!(
                        "phase 3: {source} rep {rep}: loss {:.4e} → {:.4e}",
                        report.total(1.0)[0],
                        report.total(1.0).last().copied().unwrap_or(f64::NAN)
                    );
                }
                Err(PipelineError::Cvae(e @ sehs_cvae::CvaeError::Training { .. })) => {
                    log::warn!("phase 3: {source} rep {rep} failed: {e}");
                    failures.push(TrainingFailure {
                        source: source.clone(),
                        rep,
                        message: e.to_string(),
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }
    manifest.note("failures", &failures);
    manifest.note("n_train", cfg.dataset.n_train());
    run.write_manifest(&manifest)?;
    Ok(failures)
}

/// Outcome of one trained detector on one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorScore {
    pub threshold: f64,
    pub accuracy: f64,
    /// `[true negatives, false positives, false negatives, true positives]`
    /// with "positive" meaning damaged.
    pub confusion: [usize; 4],
    pub healthy_di: Vec<f64>,
    /// DIs per damaged state label.
    pub damaged_di: BTreeMap<String, Vec<f64>>,
}

/// Calibrates on validation images and scores the healthy test set against
/// the `primary` damaged state.
pub fn score_detector(
    model: &CvaeModel,
    imgs: &SourceImages,
    primary: &str,
    percentile: f64,
) -> Result<DetectorScore> {
    let val = damage_indices(model, &pixels(&imgs.validation))?;
    let cal = threshold_from_indices(&val, percentile, "validation")?;
    let healthy_di = damage_indices(model, &pixels(&imgs.healthy_test))?;
    let mut damaged_di = BTreeMap::new();
    for (state, v) in &imgs.damaged {
        damaged_di.insert(state.clone(), damage_indices(model, &pixels(v))?);
    }
    let primary_di = damaged_di
        .get(primary)
        .ok_or_else(|| PipelineError::Numerical(format!("no {primary} test images")))?;
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    let mut confusion = [0usize; 4];
    for (&di, label) in healthy_di
        .iter()
        .map(|d| (d, Health::Healthy))
        .chain(primary_di.iter().map(|d| (d, Health::Damaged)))
    {
        let p = classify(di, cal.threshold);
        let k = match (label, p) {
            (Health::Healthy, Health::Healthy) => 0,
            (Health::Healthy, Health::Damaged) => 1,
            (Health::Damaged, Health::Healthy) => 2,
            (Health::Damaged, Health::Damaged) => 3,
        };
        confusion[k] += 1;
        pred.push(p);
        truth.push(label);
    }
    Ok(DetectorScore {
        threshold: cal.threshold,
        accuracy: sensing_accuracy(&pred, &truth)?,
        confusion,
        healthy_di,
        damaged_di,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiRow {
    pub source: String,
    pub rep: usize,
    pub passage_id: String,
    pub state: String,
    pub di: f64,
    pub damaged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionRow {
    pub source: String,
    pub rep: usize,
    pub threshold: f64,
    pub accuracy: f64,
    pub true_healthy: usize,
    pub false_damaged: usize,
    pub missed_damaged: usize,
    pub true_damaged: usize,
}

/// Sensing accuracy per source over the repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub source: String,
    /// -1 for the acceleration benchmark.
    pub design_index: i64,
    pub length_m: f64,
    pub aspect_ratio: f64,
    pub repetitions: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub accuracy_min: f64,
    pub accuracy_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiSummaryRow {
    pub source: String,
    pub state: String,
    pub samples: usize,
    pub mean_di: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EvaluationOutput {
    pub accuracy: Vec<AccuracyRow>,
    pub di_summary: Vec<DiSummaryRow>,
    pub confusion: Vec<ConfusionRow>,
    pub skipped: Vec<String>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = if xs.len() > 1 {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v.sqrt())
}

pub fn run_evaluation(run: &RunDir, cfg: &ExperimentConfig) -> Result<EvaluationOutput> {
    run.verify(phase2::PHASE)?;
    let trained = run.verify(PHASE)?;
    let index = phase2::read_index(run)?;
    let designs = phase1::read_designs(run)?;
    let dir = run.phase_dir(EVAL_PHASE)?;
    let mut manifest = Manifest::new(EVAL_PHASE, &run.config_sha256()?);
    let primary = cfg.scenario.damage.label();
    let mut out = EvaluationOutput::default();
    let mut di_rows = Vec::new();

    for source in sources(run, cfg)? {
        let imgs = load_source(run, cfg, &index, &source)?;
        let mut accs = Vec::new();
        let mut pooled: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for rep in 0..cfg.detector.repetitions {
            let ckpt = rep_dir(run, &source, rep).join("model.ckpt");
            if !trained.files.iter().any(|f| run.root.join(&f.path) == ckpt) {
                out.skipped.push(format!("{source}/rep{rep}"));
                continue;
            }
            let model = checkpoint::load(&ckpt)?;
            let s = score_detector(&model, &imgs, &primary, cfg.detector.percentile)?;
            accs.push(s.accuracy);
            out.confusion.push(ConfusionRow {
                source: source.clone(),
                rep,
                threshold: s.threshold,
                accuracy: s.accuracy,
                true_healthy: s.confusion[0],
                false_damaged: s.confusion[1],
                missed_damaged: s.confusion[2],
                true_damaged: s.confusion[3],
            });
            for ((id, _), &di) in imgs.healthy_test.iter().zip(&s.healthy_di) {
                di_rows.push(DiRow {
                    source: source.clone(),
                    rep,
                    passage_id: id.clone(),
                    state: DamageState::Healthy.label(),
                    di,
                    damaged: di > s.threshold,
                });
                pooled.entry(DamageState::Healthy.label()).or_default().push(di);
            }
            for (state, v) in &imgs.damaged {
                for ((id, _), &di) in v.iter().zip(&s.damaged_di[state]) {
                    di_rows.push(DiRow {
                        source: source.clone(),
                        rep,
                        passage_id: id.clone(),
                        state: state.clone(),
                        di,
                        damaged: di > s.threshold,
                    });
                    pooled.entry(state.clone()).or_default().push(di);
                }
            }
        }
        if accs.is_empty() {
            out.skipped.push(source.clone());
            continue;
        }
        let (m, sd) = mean_std(&accs);
        let design = designs.iter().find(|d| phase2::design_source(d.index) == source);
        out.accuracy.push(AccuracyRow {
            source: source.clone(),
            design_index: design.map_or(-1, |d| d.index as i64),
            length_m: design.map_or(f64::NAN, |d| d.length_m),
            aspect_ratio: design.map_or(f64::NAN, |d| d.aspect_ratio),
            repetitions: accs.len(),
            accuracy_mean: m,
            accuracy_std: sd,
            accuracy_min: accs.iter().cloned().fold(f64::INFINITY, f64::min),
            accuracy_max: accs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
        for (state, v) in pooled {
            out.di_summary.push(DiSummaryRow {
                source: source.clone(),
                state,
                samples: v.len(),
                mean_di: v.iter().sum::<f64>() / v.len() as f64,
            });
        }
        log::info!("evaluation: {source} S = {m:.3} ± {sd:.3}");
    }

    let files = [
        ("s_table.csv", write_csv(&dir.join("s_table.csv"), &out.accuracy)),
        ("di.csv", write_csv(&dir.join("di.csv"), &di_rows)),
        ("di_summary.csv", write_csv(&dir.join("di_summary.csv"), &out.di_summary)),
        ("confusion.csv", write_csv(&dir.join("confusion.csv"), &out.confusion)),
    ];
    for (name, res) in files {
        res?;
        manifest.files.push(run.entry(&dir.join(name))?);
    }
    manifest.note("skipped", &out.skipped);
    manifest.note("primary_state", &primary);
    run.write_manifest(&manifest)?;
    Ok(out)
}

pub fn read_accuracy(run: &RunDir) -> Result<Vec<AccuracyRow>> {
    read_csv(&run.root.join(EVAL_PHASE).join("s_table.csv"))
}

pub fn read_di_summary(run: &RunDir) -> Result<Vec<DiSummaryRow>> {
    read_csv(&run.root.join(EVAL_PHASE).join("di_summary.csv"))
}
