//! Continuous wavelet transform with the analytic Morlet wavelet.
//!
//! `W(a, b) = ∫ x(t) a^{-1/2} ψ*((t − b)/a) dt`, evaluated per scale as an
//! inverse FFT of `X(ω)·√a·ψ̂(aω)`. The spectrum of the Morlet wavelet is
//! `ψ̂(ω) = π^{-1/4} √(2π) exp(−(ω − ω₀)²/2)` for `ω > 0` and zero
//! otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::config::WsstConfig;
use crate::{Result, TfError};

pub const MIN_SIGNAL_LEN: usize = 64;

#[derive(Debug, Clone)]
pub struct Cwt {
    pub dt: f64,
    /// Scales [s], ordered by increasing centre frequency.
    pub scales: Vec<f64>,
    pub freqs_hz: Vec<f64>,
    /// `coeffs[j][b]` for scale `j`, sample `b`.
    pub coeffs: Vec<Vec<Complex64>>,
    /// `∂W/∂b`, same layout; only filled by [`cwt_with_derivative`].
    pub dcoeffs: Vec<Vec<Complex64>>,
}

impl Cwt {
    pub fn len(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flatten().fold(0.0, |m, c| m.max(c.norm()))
    }
}

pub fn morlet_spectrum(omega: f64, center: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    PI.powf(-0.25) * (2.0 * PI).sqrt() * (-0.5 * (omega - center).powi(2)).exp()
}

/// Scale whose wavelet spectrum peaks at `f` [Hz].
pub fn scale_for_frequency(f: f64, center: f64) -> f64 {
    center / (2.0 * PI * f)
}

/// Log-spaced scale frequencies from `config.min_frequency` to the band top.
pub fn scale_frequencies(config: &WsstConfig) -> Vec<f64> {
    let (lo, hi) = (config.min_frequency, config.band[1]);
    let n = config.n_scales;
    (0..n).map(|j| lo * (hi / lo).powf(j as f64 / (n - 1) as f64)).collect()
}

fn check(signal: &[f64], dt: f64, config: &WsstConfig) -> Result<()> {
    config.validate()?;
    if signal.len() < MIN_SIGNAL_LEN {
        return Err(TfError::Domain(format!(
            "signal has {} samples, at least {MIN_SIGNAL_LEN} required",
            signal.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(TfError::Domain(format!("dt must be positive, got {dt}")));
    }
    if signal.iter().any(|x| !x.is_finite()) {
        return Err(TfError::Domain("signal contains non-finite samples".into()));
    }
    let nyquist = 0.5 / dt;
    if config.band[1] >= nyquist {
        return Err(TfError::Domain(format!(
            "band top {} Hz is not below the Nyquist frequency {nyquist} Hz",
            config.band[1]
        )));
    }
    let duration = signal.len() as f64 * dt;
    let needed = scale_for_frequency(config.min_frequency, config.center_frequency);
    if duration < needed {
        return Err(TfError::Domain(format!(
            "{duration:.3} s record cannot resolve {} Hz (needs ≥ {needed:.3} s)",
            config.min_frequency
        )));
    }
    Ok(())
}

pub fn cwt(signal: &[f64], dt: f64, config: &WsstConfig) -> Result<Cwt> {
    transform(signal, dt, config, false)
}

pub fn cwt_with_derivative(signal: &[f64], dt: f64, config: &WsstConfig) -> Result<Cwt> {
    transform(signal, dt, config, true)
}

fn transform(signal: &[f64], dt: f64, config: &WsstConfig, derivative: bool) -> Result<Cwt> {
    check(signal, dt, config)?;
    let n = signal.len();
    let nfft = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);

    let mut spec: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    spec.resize(nfft, Complex64::new(0.0, 0.0));
    fwd.process(&mut spec);
    let omega: Vec<f64> = (0..nfft)
        .map(|k| {
            let k = if k <= nfft / 2 { k as f64 } else { k as f64 - nfft as f64 };
            2.0 * PI * k / (nfft as f64 * dt)
        })
        .collect();

    let freqs = scale_frequencies(config);
    let scales: Vec<f64> = freqs.iter().map(|&f| scale_for_frequency(f, config.center_frequency)).collect();
    let norm = 1.0 / nfft as f64;
    let mut coeffs = Vec::with_capacity(scales.len());
    let mut dcoeffs = Vec::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for &a in &scales {
        let sa = a.sqrt();
        for k in 0..nfft {
            buf[k] = spec[k] * (sa * morlet_spectrum(a * omega[k], config.center_frequency) * norm);
        }
        let filtered = derivative.then(|| buf.clone());
        inv.process(&mut buf);
        coeffs.push(buf[..n].to_vec());
        if let Some(mut d) = filtered {
            for (dk, &w) in d.iter_mut().zip(&omega) {
                *dk *= Complex64::new(0.0, w);
            }
            inv.process(&mut d);
            dcoeffs.push(d[..n].to_vec());
        }
    }
    Ok(Cwt {
        dt,
        scales,
        freqs_hz: freqs,
        coeffs,
        dcoeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_signal_gives_zero_coefficients() {
        let c = cwt(&vec![0.0; 512], 0.01, &WsstConfig::default()).unwrap();
        assert!(c.coeffs.iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn short_or_unresolvable_signals_rejected() {
        let cfg = WsstConfig::default();
        assert!(cwt(&[0.0; 32], 0.01, &cfg).is_err());
        // 0.64 s < one wavelet width at 1 Hz.
        assert!(cwt(&[0.0; 64], 0.01, &cfg).is_err());
        // Band top above Nyquist.
        assert!(cwt(&[0.0; 4096], 0.05, &cfg).is_err());
    }

    #[test]
    fn scale_frequency_mapping() {
        let a = scale_for_frequency(5.0, 6.0);
        assert!((morlet_spectrum(a * 2.0 * PI * 5.0, 6.0) - PI.powf(-0.25) * (2.0 * PI).sqrt()).abs() < 1e-12);
        let f = scale_frequencies(&WsstConfig::default());
        assert_eq!(f.len(), 128);
        assert!((f[0] - 1.0).abs() < 1e-12 && (f[127] - 20.0).abs() < 1e-9);
    }
}
