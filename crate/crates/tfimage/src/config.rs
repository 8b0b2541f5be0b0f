use serde::{Deserialize, Serialize};

use crate::{Result, TfError};

/// How an image's intensities are mapped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Normalization {
    /// Min-max over the image itself.
    PerImage,
    /// Z-score with dataset statistics, mapped through `(z + 3) / 6` and
    /// clipped.
    GlobalZScore { mean: f64, std: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WsstConfig {
    /// Analytic Morlet centre frequency ω₀ (dimensionless).
    pub center_frequency: f64,
    /// Log-spaced scales between `min_frequency` and the band top.
    pub n_scales: usize,
    /// Coefficients with `|W| ≤ γ·max|W|` are discarded before squeezing.
    pub gamma_threshold: f64,
    /// Linear frequency bins across `band`.
    pub freq_bins: usize,
    /// Analysis band [Hz].
    pub band: [f64; 2],
    /// Lowest scale frequency [Hz]; the signal must span at least one
    /// wavelet width at this frequency.
    pub min_frequency: f64,
    /// Output raster `[height, width]`.
    pub image_size: [usize; 2],
    /// Strength of the `log1p(κ·|S|/max|S|)` compression.
    pub log_gain: f64,
    pub normalization: Normalization,
}

impl Default for WsstConfig {
    fn default() -> Self {
        Self {
            center_frequency: 6.0,
            n_scales: 128,
            gamma_threshold: 1e-4,
            freq_bins: 128,
            band: [0.0, 20.0],
            min_frequency: 1.0,
            image_size: [128, 128],
            log_gain: 100.0,
            normalization: Normalization::PerImage,
        }
    }
}

impl WsstConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_scales < 16 {
            return Err(TfError::Config(format!("n_scales = {} < 16", self.n_scales)));
        }
        if !(self.gamma_threshold > 0.0 && self.gamma_threshold < 1.0) {
            return Err(TfError::Config(format!("gamma {} outside (0, 1)", self.gamma_threshold)));
        }
        if self.freq_bins < 32 {
            return Err(TfError::Config(format!("freq_bins = {} < 32", self.freq_bins)));
        }
        let [lo, hi] = self.band;
        if !(lo >= 0.0 && hi > lo) {
            return Err(TfError::Config(format!("band [{lo}, {hi}] is empty")));
        }
        if !(self.min_frequency > 0.0 && self.min_frequency < hi) {
            return Err(TfError::Config(format!("min_frequency {} outside (0, {hi})", self.min_frequency)));
        }
        if !(self.center_frequency >= 5.0) {
            return Err(TfError::Config("Morlet centre frequency below 5 is not admissible".into()));
        }
        if self.image_size.iter().any(|&n| n < 2) {
            return Err(TfError::Config("image dimensions must be at least 2".into()));
        }
        if !(self.log_gain > 0.0) {
            return Err(TfError::Config("log_gain must be positive".into()));
        }
        if let Normalization::GlobalZScore { std, .. } = self.normalization {
            if !(std > 0.0) {
                return Err(TfError::Config("global z-score needs std > 0".into()));
            }
        }
        Ok(())
    }

    /// Width of one frequency bin [Hz].
    pub fn bin_width(&self) -> f64 {
        (self.band[1] - self.band[0]) / self.freq_bins as f64
    }

    /// Centre of bin `k` [Hz].
    pub fn bin_center(&self, k: usize) -> f64 {
        self.band[0] + (k as f64 + 0.5) * self.bin_width()
    }

    /// Bin containing `f`, if inside the band.
    pub fn bin_of(&self, f: f64) -> Option<usize> {
        let k = ((f - self.band[0]) / self.bin_width()).floor();
        (k >= 0.0 && (k as usize) < self.freq_bins).then_some(k as usize)
    }
}
