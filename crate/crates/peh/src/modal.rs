//! Modal analysis and reduced-order electromechanical model.

use nalgebra::{DMatrix, DVector};
use sehs_numerics::generalized_eigen;

use crate::assembly::{assemble_peh, Mesh, PehSystem};
use crate::design::PehDesign;
use crate::{PehError, Result};

/// Retain modes until one lies above this frequency [Hz].
pub const TRUNCATION_HZ: f64 = 60.0;
pub const MIN_MODES: usize = 3;

/// Ascending angular frequencies [rad/s] with mass-normalized shapes.
#[derive(Debug, Clone)]
pub struct Modes {
    pub omegas: Vec<f64>,
    pub shapes: DMatrix<f64>,
}

impl Modes {
    pub fn frequencies_hz(&self) -> Vec<f64> {
        self.omegas.iter().map(|w| w / (2.0 * std::f64::consts::PI)).collect()
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

pub fn solve_modes(system: &PehSystem, count: usize) -> Result<Modes> {
    let n = system.n_free();
    if count == 0 || count > n {
        return Err(PehError::Domain(format!("requested {count} modes of {n} free DOFs")));
    }
    let eig = generalized_eigen(&system.stiffness, &system.mass)?;
    Ok(Modes {
        omegas: eig.eigenvalues.iter().take(count).map(|l| l.max(0.0).sqrt()).collect(),
        shapes: eig.eigenvectors.columns(0, count).into_owned(),
    })
}

/// Smallest `K ≥ MIN_MODES` whose highest retained mode exceeds `cutoff_hz`.
pub fn truncation_order(omegas: &[f64], cutoff_hz: f64) -> usize {
    let cutoff = 2.0 * std::f64::consts::PI * cutoff_hz;
    let k = omegas.iter().position(|&w| w > cutoff).map_or(omegas.len(), |i| i + 1);
    k.max(MIN_MODES).min(omegas.len())
}

/// Modal electromechanical model: `η̈ + c_o η̇ + k_o η − θ_o v = f_o a_b`,
/// `C_p v̇ + v/R_l + θ_oᵀ η̇ = 0`.
#[derive(Debug, Clone)]
pub struct ReducedPeh {
    pub omegas: Vec<f64>,
    /// Diagonal of `c_o`: `α + β ω_i²`.
    pub damping: Vec<f64>,
    pub theta: Vec<f64>,
    pub forcing: Vec<f64>,
    pub capacitance: f64,
    pub load_resistance: f64,
    pub shapes: DMatrix<f64>,
    pub design_id: String,
}

impl ReducedPeh {
    pub fn order(&self) -> usize {
        self.omegas.len()
    }

    pub fn with_load_resistance(mut self, r: f64) -> Self {
        self.load_resistance = r;
        self
    }

    /// Diagonal of `k_o`.
    pub fn stiffness(&self) -> Vec<f64> {
        self.omegas.iter().map(|w| w * w).collect()
    }

    pub fn first_frequency_hz(&self) -> f64 {
        self.omegas[0] / (2.0 * std::f64::consts::PI)
    }
}

pub fn reduce_model(system: &PehSystem, modes: &Modes, count: usize) -> Result<ReducedPeh> {
    if count == 0 || count > modes.len() {
        return Err(PehError::Domain(format!(
            "reduced order {count} inconsistent with {} available modes",
            modes.len()
        )));
    }
    let phi = modes.shapes.columns(0, count).into_owned();
    let theta: DVector<f64> = phi.transpose() * &system.coupling;
    let forcing: DVector<f64> = phi.transpose() * &system.forcing;
    let (alpha, beta) = (system.design.damping_alpha, system.design.damping_beta);
    let omegas: Vec<f64> = modes.omegas[..count].to_vec();
    Ok(ReducedPeh {
        damping: omegas.iter().map(|w| alpha + beta * w * w).collect(),
        omegas,
        theta: theta.iter().copied().collect(),
        forcing: forcing.iter().copied().collect(),
        capacitance: system.capacitance,
        load_resistance: system.design.load_resistance,
        shapes: phi,
        design_id: system.design.id(),
    })
}

/// Assemble, solve and truncate at the default cutoff in one call.
pub fn build_reduced(design: &PehDesign, mesh: Mesh) -> Result<(PehSystem, ReducedPeh)> {
    let system = assemble_peh(design, mesh)?;
    let modes = solve_modes(&system, system.n_free())?;
    let k = truncation_order(&modes.omegas, TRUNCATION_HZ);
    let reduced = reduce_model(&system, &modes, k)?;
    Ok((system, reduced))
}
