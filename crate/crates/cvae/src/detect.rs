//! Damage index, threshold calibration and sensing accuracy.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::loss::mse;
use crate::model::{CvaeModel, Sampling};
use crate::{CvaeError, Result};

pub const MIN_CALIBRATION_IMAGES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Health {
    Healthy,
    Damaged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReconstructMode<'a> {
    Mean,
    Stochastic { seed: u64 },
    /// Stochastic with caller-supplied `ε`.
    FixedNoise(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub image: Vec<f32>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

pub fn reconstruct(model: &CvaeModel, image: &[f32], mode: ReconstructMode<'_>) -> Result<Reconstruction> {
    let x: Vec<f64> = image.iter().map(|&p| p as f64).collect();
    let noise: Vec<f64>;
    let sampling = match mode {
        ReconstructMode::Mean => Sampling::Mean,
        ReconstructMode::Stochastic { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            noise = (0..model.config.latent).map(|_| StandardNormal.sample(&mut rng)).collect();
            Sampling::Noise(&noise)
        }
        ReconstructMode::FixedNoise(e) => Sampling::Noise(e),
    };
    let fwd = model.forward(&x, sampling)?;
    Ok(Reconstruction {
        image: fwd.output.iter().map(|&v| v as f32).collect(),
        sigma: fwd.sigma(),
        mu: fwd.mu,
    })
}

/// Mean squared error between an image and its mean-mode reconstruction.
pub fn damage_index(model: &CvaeModel, image: &[f32]) -> Result<f64> {
    let x: Vec<f64> = image.iter().map(|&p| p as f64).collect();
    let fwd = model.forward(&x, Sampling::Mean)?;
    mse(&x, &fwd.output)
}

pub fn damage_indices(model: &CvaeModel, images: &[Vec<f32>]) -> Result<Vec<f64>> {
    images.iter().map(|im| damage_index(model, im)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorCalibration {
    pub threshold: f64,
    pub percentile: f64,
    pub calibration_set: String,
}

/// Γ from already computed validation DIs.
pub fn threshold_from_indices(dis: &[f64], percentile: f64, calibration_set: &str) -> Result<DetectorCalibration> {
    if dis.is_empty() {
        return Err(CvaeError::Domain("empty calibration set".into()));
    }
    if dis.len() < MIN_CALIBRATION_IMAGES {
        return Err(CvaeError::Domain(format!(
            "calibration needs at least {MIN_CALIBRATION_IMAGES} images, got {}",
            dis.len()
        )));
    }
    if dis.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(CvaeError::Domain("damage indices must be finite and non-negative".into()));
    }
    let threshold = sehs_numerics::stats::percentile(dis, percentile)
        .map_err(|e| CvaeError::Domain(e.to_string()))?;
    Ok(DetectorCalibration {
        threshold,
        percentile,
        calibration_set: calibration_set.to_string(),
    })
}

pub fn calibrate_threshold(
    model: &CvaeModel,
    validation: &[Vec<f32>],
    percentile: f64,
    calibration_set: &str,
) -> Result<DetectorCalibration> {
    threshold_from_indices(&damage_indices(model, validation)?, percentile, calibration_set)
}

/// Damaged iff `DI > Γ`.
pub fn classify(di: f64, threshold: f64) -> Health {
    if di > threshold {
        Health::Damaged
    } else {
        Health::Healthy
    }
}

pub fn sensing_accuracy(predicted: &[Health], truth: &[Health]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(CvaeError::Domain(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(CvaeError::Domain("no samples to score".into()));
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / truth.len() as f64)
}

/// CSV of `id,label,di,predicted`.
pub fn write_di_table(path: &Path, rows: &[(String, Health, f64)], threshold: f64) -> Result<()> {
    let name = |h: Health| match h {
        Health::Healthy => "healthy",
        Health::Damaged => "damaged",
    };
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "label", "di", "predicted"])?;
    for (id, label, di) in rows {
        w.write_record([id.as_str(), name(*label), &format!("{di:e}"), name(classify(*di, threshold))])?;
    }
    w.flush()?;
    Ok(())
}
