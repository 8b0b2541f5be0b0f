//! Synchrosqueezing: CWT coefficients are moved to the frequency bin of
//! their instantaneous frequency `ω̂ = Im(∂_b W / W)` and summed with
//! `da/a` weights.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::WsstConfig;
use crate::cwt::cwt_with_derivative;
use crate::Result;

/// Complex time-frequency matrix on linear bins, row-major by bin.
#[derive(Debug, Clone, PartialEq)]
pub struct TfMatrix {
    pub dt: f64,
    pub band: [f64; 2],
    pub n_bins: usize,
    pub n_times: usize,
    pub values: Vec<Complex64>,
}

impl TfMatrix {
    pub fn zeros(n_bins: usize, n_times: usize, dt: f64, band: [f64; 2]) -> Self {
        Self {
            dt,
            band,
            n_bins,
            n_times,
            values: vec![Complex64::new(0.0, 0.0); n_bins * n_times],
        }
    }

    pub fn get(&self, bin: usize, t: usize) -> Complex64 {
        self.values[bin * self.n_times + t]
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }

    /// `Σ |S|²`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Energy in each bin summed over time.
    pub fn row_energy(&self) -> Vec<f64> {
        self.values.chunks(self.n_times).map(|r| r.iter().map(|c| c.norm_sqr()).sum()).collect()
    }

    pub fn duration(&self) -> f64 {
        self.n_times as f64 * self.dt
    }
}

pub fn wsst(signal: &[f64], dt: f64, config: &WsstConfig) -> Result<TfMatrix> {
    let w = cwt_with_derivative(signal, dt, config)?;
    let n = w.len();
    let mut out = TfMatrix::zeros(config.freq_bins, n, dt, config.band);
    let cut = config.gamma_threshold * w.max_abs();
    if cut == 0.0 {
        return Ok(out);
    }
    let m = w.scales.len();
    // Log-spaced scales: every coefficient carries the same da/a.
    let dlna = (w.scales[0] / w.scales[m - 1]).ln() / (m - 1) as f64;
    for (row, drow) in w.coeffs.iter().zip(&w.dcoeffs) {
        for b in 0..n {
            let c = row[b];
            if c.norm() <= cut {
                continue;
            }
            let f = (drow[b] / c).im / (2.0 * PI);
            if let Some(k) = config.bin_of(f) {
                out.values[k * n + b] += c * dlna;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_signal_zero_matrix() {
        let m = wsst(&vec![0.0; 1024], 0.01, &WsstConfig::default()).unwrap();
        assert_eq!(m.energy(), 0.0);
        assert_eq!(m.n_bins, 128);
        assert_eq!(m.n_times, 1024);
    }

    #[test]
    fn out_of_band_tone_leaves_band_nearly_empty() {
        let dt = 0.005;
        let x: Vec<f64> = (0..4000).map(|i| (2.0 * PI * 25.0 * i as f64 * dt).sin()).collect();
        let m = wsst(&x, dt, &WsstConfig::default()).unwrap();
        let inband = wsst(
            &(0..4000).map(|i| (2.0 * PI * 15.0 * i as f64 * dt).sin()).collect::<Vec<_>>(),
            dt,
            &WsstConfig::default(),
        )
        .unwrap();
        assert!(m.energy() < 1e-3 * inband.energy());
    }
}
