//! Fundamental-frequency map over a `(L, R)` design grid.

use std::path::Path;

use crate::assembly::{assemble_peh, Mesh};
use crate::design::PehDesign;
use crate::modal::solve_modes;
use crate::{PehError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMap {
    pub lengths: Vec<f64>,
    pub aspect_ratios: Vec<f64>,
    /// `freq_hz[i][j]` for `lengths[i]`, `aspect_ratios[j]`.
    pub freq_hz: Vec<Vec<f64>>,
    pub tip_mass: f64,
}

/// First modal frequency for every grid point; all other design fields are
/// taken from `base`.
pub fn fundamental_frequency_map(
    base: &PehDesign,
    lengths: &[f64],
    aspect_ratios: &[f64],
    tip_mass: f64,
    mesh: Mesh,
) -> Result<FrequencyMap> {
    if lengths.is_empty() || aspect_ratios.is_empty() {
        return Err(PehError::Domain("frequency map grid is empty".into()));
    }
    let mut freq_hz = Vec::with_capacity(lengths.len());
    for &l in lengths {
        let mut row = Vec::with_capacity(aspect_ratios.len());
        for &r in aspect_ratios {
            let d = base.clone().with_length(l).with_aspect_ratio(r).with_tip_mass(tip_mass);
            let sys = assemble_peh(&d, mesh)?;
            let modes = solve_modes(&sys, 1)?;
            row.push(modes.frequencies_hz()[0]);
        }
        freq_hz.push(row);
    }
    Ok(FrequencyMap {
        lengths: lengths.to_vec(),
        aspect_ratios: aspect_ratios.to_vec(),
        freq_hz,
        tip_mass,
    })
}

impl FrequencyMap {
    /// Long-format CSV: `length_m,aspect_ratio,tip_mass_kg,f1_hz`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["length_m", "aspect_ratio", "tip_mass_kg", "f1_hz"])?;
        for (i, l) in self.lengths.iter().enumerate() {
            for (j, r) in self.aspect_ratios.iter().enumerate() {
                w.write_record([
                    l.to_string(),
                    r.to_string(),
                    self.tip_mass.to_string(),
                    self.freq_hz[i][j].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
