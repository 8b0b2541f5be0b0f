//! Harvester geometry and material description.

use serde::{Deserialize, Serialize};

use crate::{PehError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Substrate {
    pub youngs_modulus: f64,
    pub poisson: f64,
    pub density: f64,
}

impl Substrate {
    /// Plane-stress reduced stiffness `[Q11, Q12, Q22, Q66]`.
    pub fn reduced_stiffness(&self) -> [f64; 4] {
        let (e, nu) = (self.youngs_modulus, self.poisson);
        let q11 = e / (1.0 - nu * nu);
        [q11, nu * q11, q11, e / (2.0 * (1.0 + nu))]
    }
}

/// Piezoceramic constants, already reduced for plane stress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piezo {
    pub c11: f64,
    pub c12: f64,
    pub c22: f64,
    pub c66: f64,
    pub e31: f64,
    pub e32: f64,
    pub eps33: f64,
    pub density: f64,
}

impl Piezo {
    pub fn reduced_stiffness(&self) -> [f64; 4] {
        [self.c11, self.c12, self.c22, self.c66]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PehDesign {
    /// Plate length `L` [m].
    pub length: f64,
    /// Width over length, `W = R·L`.
    pub aspect_ratio: f64,
    /// Piezo coverage from the clamp, `L_pzt = ℓ·L`.
    pub pzt_length_ratio: f64,
    /// Total laminate thickness `h` [m].
    pub total_thickness: f64,
    /// Piezo layer share, `h_p = H·h`.
    pub thickness_ratio: f64,
    pub substrate: Substrate,
    pub piezo: Piezo,
    /// Mass-proportional damping [rad/s].
    pub damping_alpha: f64,
    /// Stiffness-proportional damping [s/rad].
    pub damping_beta: f64,
    /// External load [Ω].
    pub load_resistance: f64,
    /// Tip mass spread along the free edge [kg].
    pub tip_mass: f64,
}

impl PehDesign {
    /// Default total thickness [m]; see the README for why this is thinner
    /// than the nominal 10 mm.
    pub const DEFAULT_THICKNESS: f64 = 0.002;

    pub fn reference() -> Self {
        Self {
            length: 0.34,
            aspect_ratio: 1.0,
            pzt_length_ratio: 0.1,
            total_thickness: Self::DEFAULT_THICKNESS,
            thickness_ratio: 0.3,
            substrate: Substrate {
                youngs_modulus: 105e9,
                poisson: 0.3,
                density: 9000.0,
            },
            piezo: Piezo {
                c11: 69.5e9,
                c12: 24.3e9,
                c22: 69.5e9,
                c66: 22.6e9,
                e31: -16.0,
                e32: -16.0,
                eps33: 9.57e-9,
                density: 7800.0,
            },
            damping_alpha: 14.65,
            damping_beta: 1e-5,
            load_resistance: 1e5,
            tip_mass: 0.0,
        }
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    pub fn with_aspect_ratio(mut self, r: f64) -> Self {
        self.aspect_ratio = r;
        self
    }

    pub fn with_tip_mass(mut self, m: f64) -> Self {
        self.tip_mass = m;
        self
    }

    pub fn with_thickness(mut self, h: f64) -> Self {
        self.total_thickness = h;
        self
    }

    pub fn with_load_resistance(mut self, r: f64) -> Self {
        self.load_resistance = r;
        self
    }

    pub fn width(&self) -> f64 {
        self.aspect_ratio * self.length
    }

    pub fn pzt_length(&self) -> f64 {
        self.pzt_length_ratio * self.length
    }

    pub fn piezo_thickness(&self) -> f64 {
        self.thickness_ratio * self.total_thickness
    }

    pub fn substrate_thickness(&self) -> f64 {
        self.total_thickness - 2.0 * self.piezo_thickness()
    }

    /// Series bimorph capacitance `ε33·W·L_pzt / (2 h_p)` [F].
    pub fn capacitance(&self) -> f64 {
        self.piezo.eps33 * self.width() * self.pzt_length() / (2.0 * self.piezo_thickness())
    }

    /// Compact identifier used in file names and logs.
    pub fn id(&self) -> String {
        format!("L{:.4}-R{:.4}-m{:.4}", self.length, self.aspect_ratio, self.tip_mass)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("aspect ratio", self.aspect_ratio),
            ("total thickness", self.total_thickness),
            ("substrate modulus", self.substrate.youngs_modulus),
            ("substrate density", self.substrate.density),
            ("c11", self.piezo.c11),
            ("c22", self.piezo.c22),
            ("c66", self.piezo.c66),
            ("eps33", self.piezo.eps33),
            ("piezo density", self.piezo.density),
            ("load resistance", self.load_resistance),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PehError::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.pzt_length_ratio > 0.0 && self.pzt_length_ratio <= 1.0) {
            return Err(PehError::Domain(format!(
                "piezo length ratio {} outside (0, 1]",
                self.pzt_length_ratio
            )));
        }
        if !(self.thickness_ratio > 0.0 && self.thickness_ratio < 0.5) {
            return Err(PehError::Domain(format!(
                "thickness ratio {} leaves no substrate (needs 0 < H < 0.5)",
                self.thickness_ratio
            )));
        }
        if !(self.substrate.poisson > -1.0 && self.substrate.poisson < 0.5) {
            return Err(PehError::Domain("substrate Poisson ratio outside (-1, 0.5)".into()));
        }
        if !(self.tip_mass >= 0.0) || !(self.damping_alpha >= 0.0) || !(self.damping_beta >= 0.0) {
            return Err(PehError::Domain("tip mass and damping must be non-negative".into()));
        }
        Ok(())
    }
}

impl Default for PehDesign {
    fn default() -> Self {
        Self::reference()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacitance_closed_form() {
        let d = PehDesign::reference().with_thickness(0.01);
        let expected = 9.57e-9 * (0.34 * 0.34) * 0.1 / (2.0 * 0.003);
        assert!((d.capacitance() - expected).abs() < 1e-18);
        assert!((d.capacitance() - 18.44e-9).abs() < 0.01e-9);
    }

    #[test]
    fn derived_thicknesses() {
        let d = PehDesign::reference();
        assert!((d.piezo_thickness() - 0.0006).abs() < 1e-15);
        assert!((d.substrate_thickness() - 0.0008).abs() < 1e-15);
    }

    #[test]
    fn half_thickness_piezo_rejected() {
        let mut d = PehDesign::reference();
        d.thickness_ratio = 0.5;
        assert!(matches!(d.validate(), Err(PehError::Domain(_))));
    }
}
