//! Mini-batch Adam training on the ELBO.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::loss::elbo_loss;
use crate::model::{CvaeModel, Sampling};
use crate::{CvaeError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Per-epoch mean reconstruction term.
    pub l1: Vec<f64>,
    /// Per-epoch mean KL term.
    pub l2: Vec<f64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl TrainReport {
    pub fn total(&self, beta_kl: f64) -> Vec<f64> {
        self.l1.iter().zip(&self.l2).map(|(a, b)| a + beta_kl * b).collect()
    }

    pub fn write_csv(&self, path: &Path, beta_kl: f64) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "l1", "l2", "total"])?;
        for (i, t) in self.total(beta_kl).iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                format!("{:e}", self.l1[i]),
                format!("{:e}", self.l2[i]),
                format!("{t:e}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn step(&mut self, cfg: &TrainConfig, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * grad[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= cfg.learning_rate * mh / (vh.sqrt() + cfg.adam_epsilon);
        }
    }
}

/// Trains in place. Images are flattened row-major and must match the
/// model input size. Shuffling and reparametrization noise come from two
/// independent ChaCha streams derived from `cfg.seed`.
pub fn train(model: &mut CvaeModel, images: &[Vec<f32>], cfg: &TrainConfig) -> Result<TrainReport> {
    if cfg.batch_size == 0 || cfg.epochs == 0 || !(cfg.learning_rate > 0.0) {
        return Err(CvaeError::Config("epochs, batch size and learning rate must be positive".into()));
    }
    let n = images.len();
    if n.div_ceil(cfg.batch_size) < 2 {
        return Err(CvaeError::Domain(format!(
            "{n} images give fewer than 2 batches of {}",
            cfg.batch_size
        )));
    }
    let data: Vec<Vec<f64>> = images.iter().map(|im| im.iter().map(|&p| p as f64).collect()).collect();
    for im in &data {
        model.check_input(im)?;
    }
    let p = model.config.latent;
    let beta_kl = model.config.beta_kl;
    let pixels = model.config.pixels() as f64;

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut eps_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    eps_rng.set_stream(1);

    let np = model.n_params();
    let mut adam = Adam {
        m: vec![0.0; np],
        v: vec![0.0; np],
        t: 0,
    };
    let mut grad = vec![0.0; np];
    let mut order: Vec<usize> = (0..n).collect();
    let mut report = TrainReport {
        l1: Vec::with_capacity(cfg.epochs),
        l2: Vec::with_capacity(cfg.epochs),
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        learning_rate: cfg.learning_rate,
        seed: cfg.seed,
    };

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let (mut s1, mut s2) = (0.0, 0.0);
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.fill(0.0);
            let scale = 1.0 / batch.len() as f64;
            for &idx in batch {
                let x = &data[idx];
                let eps: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut eps_rng)).collect();
                let fwd = model.forward(x, Sampling::Noise(&eps))?;
                let e = elbo_loss(x, &fwd.output, &fwd.mu, &fwd.sigma(), beta_kl).map_err(|e| CvaeError::Training {
                    epoch: epoch + 1,
                    batch: b + 1,
                    message: e.to_string(),
                })?;
                if !e.total.is_finite() {
                    return Err(CvaeError::Training {
                        epoch: epoch + 1,
                        batch: b + 1,
                        message: format!("non-finite loss (L1 = {}, L2 = {})", e.reconstruction, e.kl),
                    });
                }
                s1 += e.reconstruction;
                s2 += e.kl;
                let d_out: Vec<f64> =
                    fwd.output.iter().zip(x).map(|(o, t)| 2.0 * (o - t) * scale / pixels).collect();
                model.backward(&fwd, &d_out, beta_kl * scale, &mut grad);
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(CvaeError::Training {
                    epoch: epoch + 1,
                    batch: b + 1,
                    message: "non-finite gradient".into(),
                });
            }
            adam.step(cfg, &mut model.params, &grad);
        }
        report.l1.push(s1 / n as f64);
        report.l2.push(s2 / n as f64);
        log::debug!(
            "epoch {}: L1 = {:.6e}, L2 = {:.6e}",
            epoch + 1,
            report.l1[epoch],
            report.l2[epoch]
        );
    }
    Ok(report)
}
