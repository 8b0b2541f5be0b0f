//! Convolutional variational autoencoder trained on healthy-state
//! time-frequency images, with reconstruction-error damage indices,
//! percentile thresholds and sensing-accuracy scoring.
//!
//! Images are flattened row-major `f32` slices in `[0, 1]`.

pub mod checkpoint;
pub mod detect;
mod error;
pub mod loss;
pub mod model;
pub mod ops;
pub mod train;

pub use detect::{
    calibrate_threshold, classify, damage_index, damage_indices, reconstruct, sensing_accuracy,
    threshold_from_indices, write_di_table, DetectorCalibration, Health, ReconstructMode, Reconstruction,
};
pub use error::{CvaeError, Result};
pub use loss::{elbo_loss, kl_divergence, mse, Elbo};
pub use model::{CvaeConfig, CvaeModel, Forward, Sampling};
pub use train::{train, TrainConfig, TrainReport};

/// Builds a freshly initialized model.
pub fn build_cvae(config: CvaeConfig, seed: u64) -> Result<CvaeModel> {
    CvaeModel::new(config, seed)
}
