//! Rasterization of time-frequency matrices into normalized images.

use serde::{Deserialize, Serialize};

use crate::config::{Normalization, WsstConfig};
use crate::wsst::{wsst, TfMatrix};
use crate::{Result, TfError};

/// Grayscale image; row 0 is the lowest frequency, column 0 the start of
/// the record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f32>,
    pub freq_band: [f64; 2],
    pub duration: f64,
    pub source_id: Option<String>,
    /// Set when the transform was identically zero.
    pub degenerate: bool,
}

impl TfImage {
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.pixels[row * self.width + col]
    }

    /// Row holding the most intensity summed over time.
    pub fn dominant_row(&self) -> usize {
        (0..self.height)
            .max_by(|&a, &b| {
                let s = |r: usize| self.pixels[r * self.width..(r + 1) * self.width].iter().sum::<f32>();
                s(a).total_cmp(&s(b))
            })
            .unwrap_or(0)
    }

    /// Centre frequency of an image row [Hz].
    pub fn row_frequency(&self, row: usize) -> f64 {
        let [lo, hi] = self.freq_band;
        lo + (row as f64 + 0.5) * (hi - lo) / self.height as f64
    }
}

/// Averages consecutive columns down to `target` (area resampling); a
/// no-op when the matrix is already narrow enough.
fn pool_columns(mag: &[f64], rows: usize, cols: usize, target: usize) -> (Vec<f64>, usize) {
    if cols <= target {
        return (mag.to_vec(), cols);
    }
    let mut out = vec![0.0; rows * target];
    for j in 0..target {
        let a = j * cols / target;
        let b = ((j + 1) * cols / target).max(a + 1);
        for r in 0..rows {
            let row = &mag[r * cols..(r + 1) * cols];
            out[r * target + j] = row[a..b].iter().sum::<f64>() / (b - a) as f64;
        }
    }
    (out, target)
}

/// Bilinear resampling with corner alignment.
fn bilinear(src: &[f64], rows: usize, cols: usize, h: usize, w: usize) -> Vec<f64> {
    let map = |i: usize, n_out: usize, n_in: usize| {
        if n_out == 1 || n_in == 1 {
            return (0, 0, 0.0);
        }
        let x = i as f64 * (n_in - 1) as f64 / (n_out - 1) as f64;
        let i0 = (x.floor() as usize).min(n_in - 2);
        (i0, i0 + 1, x - i0 as f64)
    };
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        let (r0, r1, fr) = map(r, h, rows);
        for c in 0..w {
            let (c0, c1, fc) = map(c, w, cols);
            let top = src[r0 * cols + c0] * (1.0 - fc) + src[r0 * cols + c1] * fc;
            let bot = src[r1 * cols + c0] * (1.0 - fc) + src[r1 * cols + c1] * fc;
            out[r * w + c] = top * (1.0 - fr) + bot * fr;
        }
    }
    out
}

/// `log1p(κ·|S|/max|S|)` for per-image normalization, `log1p(κ·|S|)`
/// otherwise, on the native grid.
pub fn log_compressed(matrix: &TfMatrix, config: &WsstConfig) -> Vec<f64> {
    let mag = matrix.magnitude();
    let scale = match config.normalization {
        Normalization::PerImage => {
            let max = mag.iter().fold(0.0f64, |m, &v| m.max(v));
            if max > 0.0 {
                config.log_gain / max
            } else {
                0.0
            }
        }
        Normalization::GlobalZScore { .. } => config.log_gain,
    };
    mag.iter().map(|&v| (scale * v).ln_1p()).collect()
}

pub fn to_image(matrix: &TfMatrix, config: &WsstConfig, source_id: Option<String>) -> Result<TfImage> {
    config.validate()?;
    if matrix.band != config.band || matrix.n_bins != config.freq_bins {
        return Err(TfError::Domain(format!(
            "matrix covers {:?} Hz in {} bins, config expects {:?} Hz in {}",
            matrix.band, matrix.n_bins, config.band, config.freq_bins
        )));
    }
    if matrix.n_times < 2 {
        return Err(TfError::Domain("matrix needs at least two time samples".into()));
    }
    let [h, w] = config.image_size;
    let degenerate = matrix.values.iter().all(|c| c.norm() == 0.0);
    let compressed = log_compressed(matrix, config);
    let (pooled, cols) = pool_columns(&compressed, matrix.n_bins, matrix.n_times, w);
    let raster = bilinear(&pooled, matrix.n_bins, cols, h, w);
    let pixels: Vec<f32> = match config.normalization {
        Normalization::PerImage => {
            let (lo, hi) = raster.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            if hi > lo {
                raster.iter().map(|&v| ((v - lo) / (hi - lo)) as f32).collect()
            } else {
                vec![0.0; h * w]
            }
        }
        Normalization::GlobalZScore { mean, std } => raster
            .iter()
            .map(|&v| (((v - mean) / std + 3.0) / 6.0).clamp(0.0, 1.0) as f32)
            .collect(),
    };
    Ok(TfImage {
        height: h,
        width: w,
        pixels,
        freq_band: config.band,
        duration: matrix.duration(),
        source_id,
        degenerate,
    })
}

/// WSST followed by rasterization.
pub fn signal_to_image(signal: &[f64], dt: f64, config: &WsstConfig, source_id: Option<String>) -> Result<TfImage> {
    to_image(&wsst(signal, dt, config)?, config, source_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn cfg() -> WsstConfig {
        WsstConfig {
            freq_bins: 32,
            image_size: [16, 24],
            ..Default::default()
        }
    }

    #[test]
    fn constant_matrix_maps_to_zero() {
        let c = cfg();
        let mut m = TfMatrix::zeros(32, 100, 0.01, c.band);
        m.values.iter_mut().for_each(|v| *v = Complex64::new(3.0, -1.0));
        let img = to_image(&m, &c, None).unwrap();
        assert!(img.pixels.iter().all(|&p| p == 0.0));
        assert!(!img.degenerate);
        assert_eq!(img.pixels.len(), 16 * 24);
    }

    #[test]
    fn zero_matrix_is_flagged() {
        let c = cfg();
        let img = to_image(&TfMatrix::zeros(32, 100, 0.01, c.band), &c, None).unwrap();
        assert!(img.degenerate);
        assert!(img.pixels.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn pixels_in_unit_interval_and_extremes_reached() {
        let c = cfg();
        let mut m = TfMatrix::zeros(32, 100, 0.01, c.band);
        for (i, v) in m.values.iter_mut().enumerate() {
            *v = Complex64::new((i % 7) as f64, 0.0);
        }
        let img = to_image(&m, &c, None).unwrap();
        assert!(img.pixels.iter().all(|&p| (0.0..=1.0).contains(&p)));
        assert!(img.pixels.iter().any(|&p| p == 0.0));
        assert!(img.pixels.iter().any(|&p| p == 1.0));
    }

    #[test]
    fn bilinear_identity_and_midpoints() {
        let src = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(bilinear(&src, 2, 2, 2, 2), src.to_vec());
        let up = bilinear(&src, 2, 2, 3, 3);
        assert_eq!(up[4], 1.5);
    }

    #[test]
    fn mismatched_band_rejected() {
        let c = cfg();
        let m = TfMatrix::zeros(32, 100, 0.01, [0.0, 10.0]);
        assert!(to_image(&m, &c, None).is_err());
    }
}
