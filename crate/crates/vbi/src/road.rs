//! ISO 8608 road roughness synthesised as a sum of random-phase cosines.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Result, VbiError};

/// Reference spatial frequency [cycle/m].
pub const N0: f64 = 0.1;
/// Harmonic spacing [cycle/m].
pub const DELTA_N: f64 = 0.04;
/// Highest synthesised spatial frequency [cycle/m].
pub const N_MAX: f64 = 10.0;
/// PSD roll-off exponent.
pub const WAVINESS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoadClass {
    A,
    B,
    /// Smooth pavement, no roughness.
    NR,
}

impl RoadClass {
    /// `G_d(n0)` in m³.
    pub fn psd_coefficient(self) -> f64 {
        match self {
            RoadClass::A => 16e-6,
            RoadClass::B => 64e-6,
            RoadClass::NR => 0.0,
        }
    }
}

impl fmt::Display for RoadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RoadClass::A => "A",
            RoadClass::B => "B",
            RoadClass::NR => "NR",
        };
        f.write_str(s)
    }
}

impl FromStr for RoadClass {
    type Err = VbiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(RoadClass::A),
            "B" => Ok(RoadClass::B),
            "NR" | "NONE" | "SMOOTH" => Ok(RoadClass::NR),
            other => Err(VbiError::Domain(format!("unknown road class '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadProfile {
    pub class: RoadClass,
    pub gd_n0: f64,
    pub exponent_w: f64,
    pub n0: f64,
    pub delta_n: f64,
    pub harmonics: Vec<Harmonic>,
    pub seed: u64,
}

impl RoadProfile {
    pub fn smooth() -> Self {
        Self {
            class: RoadClass::NR,
            gd_n0: 0.0,
            exponent_w: WAVINESS,
            n0: N0,
            delta_n: DELTA_N,
            harmonics: Vec::new(),
            seed: 0,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.harmonics.is_empty()
    }

    /// One-sided displacement PSD `G_d(n)` [m³].
    pub fn psd(&self, n: f64) -> f64 {
        if n <= 0.0 {
            return 0.0;
        }
        self.gd_n0 * (n / self.n0).powf(-self.exponent_w)
    }

    /// Harmonic amplitude `√(2 G_d(n) Δn)` at spatial frequency `n`.
    pub fn amplitude(&self, n: f64) -> f64 {
        (2.0 * self.psd(n) * self.delta_n).sqrt()
    }

    /// Road height `r(x)` [m].
    pub fn height(&self, x: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| h.amplitude * (2.0 * PI * h.frequency * x + h.phase).cos())
            .sum()
    }

    /// Height and slope `(r, dr/dx)` in one pass.
    pub fn height_and_slope(&self, x: f64) -> (f64, f64) {
        let mut r = 0.0;
        let mut dr = 0.0;
        for h in &self.harmonics {
            let k = 2.0 * PI * h.frequency;
            let (s, c) = (k * x + h.phase).sin_cos();
            r += h.amplitude * c;
            dr -= h.amplitude * k * s;
        }
        (r, dr)
    }
}

/// Random-phase profile for `class`; `length` only needs to be positive
/// since the synthesis is defined on the whole line.
pub fn generate_road_profile(class: RoadClass, length: f64, seed: u64) -> Result<RoadProfile> {
    if !(length > 0.0) {
        return Err(VbiError::Domain(format!("road length must be > 0, got {length}")));
    }
    let mut profile = RoadProfile {
        class,
        gd_n0: class.psd_coefficient(),
        seed,
        ..RoadProfile::smooth()
    };
    if class == RoadClass::NR {
        return Ok(profile);
    }
    let count = (N_MAX / DELTA_N).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    profile.harmonics = (1..=count)
        .map(|i| {
            let n = i as f64 * DELTA_N;
            Harmonic {
                amplitude: profile.amplitude(n),
                frequency: n,
                phase: rng.random_range(0.0..2.0 * PI),
            }
        })
        .collect();
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_road_is_flat() {
        let r = generate_road_profile(RoadClass::NR, 100.0, 3).unwrap();
        assert!(r.is_smooth());
        for x in [0.0, 1.3, 50.0] {
            assert_eq!(r.height_and_slope(x), (0.0, 0.0));
        }
    }

    #[test]
    fn class_a_amplitude_at_reference() {
        let r = generate_road_profile(RoadClass::A, 100.0, 9).unwrap();
        assert!((r.amplitude(0.1) - (2.0f64 * 16e-6 * 0.04).sqrt()).abs() < 1e-15);
        assert!((r.amplitude(0.1) - 1.1314e-3).abs() < 1e-7);
    }

    #[test]
    fn harmonics_cover_band_with_valid_phases() {
        let r = generate_road_profile(RoadClass::B, 10.0, 1).unwrap();
        assert_eq!(r.harmonics.len(), 250);
        assert!((r.harmonics[0].frequency - DELTA_N).abs() < 1e-12);
        assert!((r.harmonics.last().unwrap().frequency - N_MAX).abs() < 1e-9);
        for h in &r.harmonics {
            assert!(h.amplitude >= 0.0);
            assert!((0.0..2.0 * PI).contains(&h.phase));
        }
    }

    #[test]
    fn slope_matches_finite_difference() {
        let r = generate_road_profile(RoadClass::A, 10.0, 4).unwrap();
        let x = 3.7;
        let e = 1e-6;
        let fd = (r.height(x + e) - r.height(x - e)) / (2.0 * e);
        let (_, s) = r.height_and_slope(x);
        assert!((fd - s).abs() < 1e-6 * s.abs().max(1e-3));
    }

    #[test]
    fn rejects_nonpositive_length() {
        assert!(generate_road_profile(RoadClass::A, 0.0, 1).is_err());
    }

    #[test]
    fn parse_class() {
        assert_eq!("b".parse::<RoadClass>().unwrap(), RoadClass::B);
        assert!("C".parse::<RoadClass>().is_err());
    }
}
