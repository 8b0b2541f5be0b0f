//! Voltage frequency response and load-resistance selection.
//!
//! With `Y = 1/R_l + iωC_p` and `g = iω/Y`, harmonic balance of the coupled
//! equations gives `V/A = −g Θᵀ (K − ω²M + iωC + g ΘΘᵀ)⁻¹ F`. The sign
//! follows from the state-space form; magnitudes are sign-independent.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use sehs_numerics::optimize::golden_section_max;

use crate::assembly::PehSystem;
use crate::modal::ReducedPeh;
use crate::{PehError, Result};

fn admittance_gain(omega: f64, rl: f64, cp: f64) -> Complex64 {
    let i_w = Complex64::new(0.0, omega);
    i_w / (Complex64::new(1.0 / rl, 0.0) + i_w * cp)
}

/// Modal-domain FRF `H_v(ω)` [V·s²/m].
pub fn voltage_frf(reduced: &ReducedPeh, omegas: &[f64]) -> Result<Vec<Complex64>> {
    if omegas.is_empty() {
        return Err(PehError::Domain("empty frequency grid".into()));
    }
    omegas.iter().map(|&w| frf_point(reduced, w, reduced.load_resistance)).collect()
}

fn frf_point(r: &ReducedPeh, omega: f64, rl: f64) -> Result<Complex64> {
    if !(omega >= 0.0) {
        return Err(PehError::Domain(format!("negative frequency {omega}")));
    }
    if omega == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let g = admittance_gain(omega, rl, r.capacitance);
    // Sherman–Morrison on the diagonal modal operator.
    let mut s_f = Complex64::new(0.0, 0.0);
    let mut s_t = Complex64::new(0.0, 0.0);
    for i in 0..r.order() {
        let d = Complex64::new(r.omegas[i] * r.omegas[i] - omega * omega, omega * r.damping[i]);
        s_f += r.theta[i] * r.forcing[i] / d;
        s_t += r.theta[i] * r.theta[i] / d;
    }
    Ok(-g * s_f / (1.0 + g * s_t))
}

/// FRF of the unreduced system, by dense complex solves.
pub fn full_voltage_frf(system: &PehSystem, rl: f64, omegas: &[f64]) -> Result<Vec<Complex64>> {
    if omegas.is_empty() {
        return Err(PehError::Domain("empty frequency grid".into()));
    }
    let n = system.n_free();
    let c = system.damping();
    let theta = &system.coupling;
    let mut out = Vec::with_capacity(omegas.len());
    for &w in omegas {
        if !(w >= 0.0) {
            return Err(PehError::Domain(format!("negative frequency {w}")));
        }
        if w == 0.0 {
            out.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let g = admittance_gain(w, rl, system.capacitance);
        let a = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            Complex64::new(system.stiffness[(i, j)] - w * w * system.mass[(i, j)], w * c[(i, j)])
                + g * theta[i] * theta[j]
        });
        let rhs = nalgebra::DVector::<Complex64>::from_iterator(
            n,
            system.forcing.iter().map(|&f| Complex64::new(f, 0.0)),
        );
        let x = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| PehError::Assembly(format!("dynamic stiffness singular at ω = {w}")))?;
        let proj: Complex64 = theta.iter().zip(x.iter()).map(|(t, xi)| *t * xi).sum();
        out.push(-g * proj);
    }
    Ok(out)
}

/// Average-power proxy `|H_v(ω₁)|² / R_l` at the first mode.
pub fn power_at_first_mode(reduced: &ReducedPeh, rl: f64) -> f64 {
    frf_point(reduced, reduced.omegas[0], rl).map_or(0.0, |h| h.norm_sqr() / rl)
}

/// Load maximizing [`power_at_first_mode`] over `R_l ∈ [10², 10⁸] Ω`: a
/// coarse logarithmic scan locates the best bracket, golden-section search
/// refines it.
pub fn select_load_resistance(reduced: &ReducedPeh) -> Result<f64> {
    let (lo, hi) = (2.0, 8.0);
    let n = 61;
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| power_at_first_mode(reduced, 10f64.powf(x))).collect();
    let best = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| PehError::Domain("empty resistance grid".into()))?;
    if !(vals[best] > 0.0) {
        return Err(PehError::Numerical(sehs_numerics::NumericsError::SearchFailed(
            "no harvestable power on the resistance bracket".into(),
        )));
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(n - 1)];
    let (x, _) = golden_section_max(|x| power_at_first_mode(reduced, 10f64.powf(x)), a, b, 1e-9, 200)?;
    Ok(10f64.powf(x))
}

/// Writes `freq_hz,re,im,abs` rows.
pub fn write_frf_csv(path: &Path, freqs_hz: &[f64], values: &[Complex64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["freq_hz", "re", "im", "abs"])?;
    for (f, h) in freqs_hz.iter().zip(values) {
        w.write_record([f.to_string(), h.re.to_string(), h.im.to_string(), h.norm().to_string()])?;
    }
    w.flush()?;
    Ok(())
}
