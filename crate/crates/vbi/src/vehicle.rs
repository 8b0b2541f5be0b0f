//! Four-degree-of-freedom half-car and Latin hypercube parameter sampling.
//!
//! Degrees of freedom are `[z_c, θ_c, z_t1, z_t2]`: body bounce and pitch
//! followed by front and rear tire hop, all measured from static
//! equilibrium. Axle 1 is the front axle, a distance `d1` ahead of the
//! centre of mass; axle 2 trails it by `d1 + d2`.

use nalgebra::{Matrix4, Vector4};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Result, VbiError, GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleModel {
    pub body_mass: f64,
    pub inertia: f64,
    pub tire_mass: [f64; 2],
    pub suspension_stiffness: [f64; 2],
    pub suspension_damping: [f64; 2],
    pub tire_stiffness: [f64; 2],
    pub tire_damping: [f64; 2],
    /// Front and rear axle offsets from the centre of mass [m].
    pub axle_offsets: [f64; 2],
    /// Forward speed [m/s].
    pub speed: f64,
}

impl VehicleModel {
    pub const DEFAULT_TIRE_MASS: f64 = 50.0;

    /// Two-axle vehicle with the fixed suspension and tire properties used
    /// throughout, mid-interval mass, speed and geometry.
    pub fn reference() -> Self {
        Self::from_varied(1000.0, 55.0 / 3.6, 2.75, 0.45)
    }

    /// Builds a vehicle from the four sampled quantities: body mass, speed,
    /// axle spacing `d1 + d2` and the front-axle share `d1 / (d1 + d2)`.
    pub fn from_varied(mass: f64, speed: f64, spacing: f64, front_ratio: f64) -> Self {
        let d1 = front_ratio * spacing;
        let d2 = spacing - d1;
        Self {
            body_mass: mass,
            inertia: mass * d1 * d2,
            tire_mass: [Self::DEFAULT_TIRE_MASS; 2],
            suspension_stiffness: [27_500.0; 2],
            suspension_damping: [1_300.0; 2],
            tire_stiffness: [1.5e5; 2],
            tire_damping: [5.0; 2],
            axle_offsets: [d1, d2],
            speed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("body mass", self.body_mass),
            ("pitch inertia", self.inertia),
            ("tire mass 1", self.tire_mass[0]),
            ("tire mass 2", self.tire_mass[1]),
            ("suspension stiffness 1", self.suspension_stiffness[0]),
            ("suspension stiffness 2", self.suspension_stiffness[1]),
            ("tire stiffness 1", self.tire_stiffness[0]),
            ("tire stiffness 2", self.tire_stiffness[1]),
            ("speed", self.speed),
            ("axle spacing", self.axle_spacing()),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(VbiError::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let nonneg = self
            .suspension_damping
            .iter()
            .chain(&self.tire_damping)
            .chain(&self.axle_offsets);
        for &v in nonneg {
            if !(v >= 0.0) {
                return Err(VbiError::Domain(format!(
                    "damping and axle offsets must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn axle_spacing(&self) -> f64 {
        self.axle_offsets[0] + self.axle_offsets[1]
    }

    pub fn total_mass(&self) -> f64 {
        self.body_mass + self.tire_mass[0] + self.tire_mass[1]
    }

    /// Static wheel loads [N] for front and rear axle.
    pub fn static_axle_loads(&self) -> [f64; 2] {
        let [d1, d2] = self.axle_offsets;
        let s = d1 + d2;
        [
            (self.body_mass * d2 / s + self.tire_mass[0]) * GRAVITY,
            (self.body_mass * d1 / s + self.tire_mass[1]) * GRAVITY,
        ]
    }

    pub fn mass_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vector4::new(
            self.body_mass,
            self.inertia,
            self.tire_mass[0],
            self.tire_mass[1],
        ))
    }

    /// Stiffness matrix including the tire springs on the hop diagonal.
    pub fn stiffness_matrix(&self) -> Matrix4<f64> {
        let mut k = coupling_matrix(self.suspension_stiffness, self.axle_offsets);
        k[(2, 2)] += self.tire_stiffness[0];
        k[(3, 3)] += self.tire_stiffness[1];
        k
    }

    /// Damping matrix; tire dampers are added only when requested.
    pub fn damping_matrix(&self, tire_damping: bool) -> Matrix4<f64> {
        let mut c = coupling_matrix(self.suspension_damping, self.axle_offsets);
        if tire_damping {
            c[(2, 2)] += self.tire_damping[0];
            c[(3, 3)] += self.tire_damping[1];
        }
        c
    }
}

impl Default for VehicleModel {
    fn default() -> Self {
        Self::reference()
    }
}

/// Suspension connection between body (bounce, pitch) and the two tires.
fn coupling_matrix(k: [f64; 2], d: [f64; 2]) -> Matrix4<f64> {
    let [k1, k2] = k;
    let [d1, d2] = d;
    Matrix4::new(
        k1 + k2,
        k1 * d1 - k2 * d2,
        -k1,
        -k2,
        k1 * d1 - k2 * d2,
        k1 * d1 * d1 + k2 * d2 * d2,
        -k1 * d1,
        k2 * d2,
        -k1,
        -k1 * d1,
        k1,
        0.0,
        -k2,
        k2 * d2,
        0.0,
        k2,
    )
}

/// Sampling intervals for the four varied vehicle quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleRanges {
    /// Body mass [kg].
    pub mass: (f64, f64),
    /// Speed [m/s].
    pub speed: (f64, f64),
    /// Axle spacing `d1 + d2` [m].
    pub axle_spacing: (f64, f64),
    /// Front-axle share of the spacing.
    pub front_ratio: (f64, f64),
}

impl Default for VehicleRanges {
    fn default() -> Self {
        Self {
            mass: (500.0, 1500.0),
            speed: (50.0 / 3.6, 60.0 / 3.6),
            axle_spacing: (2.0, 3.5),
            front_ratio: (0.4, 0.5),
        }
    }
}

impl VehicleRanges {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("mass", self.mass),
            ("speed", self.speed),
            ("axle spacing", self.axle_spacing),
            ("front ratio", self.front_ratio),
        ] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(VbiError::Domain(format!("empty {name} interval [{lo}, {hi}]")));
            }
        }
        if self.mass.0 <= 0.0 || self.speed.0 <= 0.0 || self.axle_spacing.0 <= 0.0 {
            return Err(VbiError::Domain("mass, speed and spacing must be positive".into()));
        }
        if self.front_ratio.0 < 0.0 || self.front_ratio.1 > 1.0 {
            return Err(VbiError::Domain("front ratio must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Latin hypercube sample: one point per equal-width stratum in each of the
/// four dimensions, strata paired by independent random permutations.
pub fn sample_vehicle_params(n: usize, ranges: &VehicleRanges, seed: u64) -> Result<Vec<VehicleModel>> {
    if n == 0 {
        return Err(VbiError::Domain("sample count must be at least 1".into()));
    }
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let intervals = [ranges.mass, ranges.speed, ranges.axle_spacing, ranges.front_ratio];
    let columns: Vec<Vec<f64>> = intervals
        .iter()
        .map(|&(lo, hi)| {
            let mut strata: Vec<usize> = (0..n).collect();
            strata.shuffle(&mut rng);
            strata
                .into_iter()
                .map(|s| {
                    let u: f64 = rng.random();
                    lo + (hi - lo) * (s as f64 + u) / n as f64
                })
                .collect()
        })
        .collect();
    Ok((0..n)
        .map(|i| VehicleModel::from_varied(columns[0][i], columns[1][i], columns[2][i], columns[3][i]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_are_symmetric_and_static_loads_balance() {
        let v = VehicleModel::reference();
        let k = v.stiffness_matrix();
        let c = v.damping_matrix(true);
        assert!((k - k.transpose()).norm() == 0.0);
        assert!((c - c.transpose()).norm() == 0.0);
        assert!(k.cholesky().is_some());
        let [w1, w2] = v.static_axle_loads();
        assert!((w1 + w2 - v.total_mass() * GRAVITY).abs() < 1e-9);
    }

    #[test]
    fn rigid_body_translation_is_resisted_only_by_tires() {
        let v = VehicleModel::reference();
        let k = v.stiffness_matrix();
        let f = k * Vector4::new(1.0, 0.0, 1.0, 1.0);
        assert!(f[0].abs() < 1e-9 && f[1].abs() < 1e-9);
        assert_eq!(f[2], v.tire_stiffness[0]);
    }

    #[test]
    fn tire_damping_switch() {
        let v = VehicleModel::reference();
        let d = v.damping_matrix(true) - v.damping_matrix(false);
        assert_eq!(d[(2, 2)], 5.0);
        assert_eq!(d[(3, 3)], 5.0);
        assert_eq!(d.sum(), 10.0);
    }

    #[test]
    fn wheel_hop_near_ten_hertz() {
        let v = VehicleModel::reference();
        let m = v.mass_matrix();
        let k = v.stiffness_matrix();
        let minv = m.try_inverse().unwrap();
        let ev = (minv * k).complex_eigenvalues();
        let mut f: Vec<f64> = ev.iter().map(|e| e.re.sqrt() / (2.0 * std::f64::consts::PI)).collect();
        f.sort_by(f64::total_cmp);
        assert!(f[3] > 8.0 && f[3] < 12.0, "{f:?}");
        assert!(f[0] > 0.5 && f[0] < 3.0, "{f:?}");
    }

    #[test]
    fn single_sample_inside_intervals() {
        let r = VehicleRanges::default();
        let v = sample_vehicle_params(1, &r, 0).unwrap();
        assert_eq!(v.len(), 1);
        let v = v[0];
        assert!((r.mass.0..=r.mass.1).contains(&v.body_mass));
        assert!((r.speed.0..=r.speed.1).contains(&v.speed));
        assert!((r.axle_spacing.0..=r.axle_spacing.1).contains(&v.axle_spacing()));
        v.validate().unwrap();
    }

    #[test]
    fn masses_fill_deciles() {
        let r = VehicleRanges::default();
        let vs = sample_vehicle_params(10, &r, 42).unwrap();
        let mut m: Vec<f64> = vs.iter().map(|v| v.body_mass).collect();
        m.sort_by(f64::total_cmp);
        for (i, x) in m.iter().enumerate() {
            let lo = 500.0 + 100.0 * i as f64;
            assert!(*x >= lo && *x < lo + 100.0, "{i}: {x}");
        }
    }

    #[test]
    fn empty_request_and_bad_interval_rejected() {
        assert!(sample_vehicle_params(0, &VehicleRanges::default(), 0).is_err());
        let r = VehicleRanges {
            mass: (2.0, 1.0),
            ..Default::default()
        };
        assert!(sample_vehicle_params(3, &r, 0).is_err());
    }
}
